//! Randomized greedy MIS by local simulation.

use rustc_hash::FxHashMap;

use crate::error::Result;
use crate::graph::{Graph, Oracle};

/// Position of a vertex in the random order: hash of `(seed, v)`, ties
/// broken by id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Priority {
    pub value: u64,
    pub vertex: u32,
}

impl Priority {
    pub fn of(seed: u64, v: u32) -> Self {
        let mut z = seed ^ 0x5851_f42d_4c95_7f2d;
        z = z.wrapping_add((v as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        Priority {
            value: z ^ (z >> 31),
            vertex: v,
        }
    }
}

/// Order in which earlier neighbours are explored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NeighborOrder {
    /// Increasing priority.
    #[default]
    Yoshida,
    /// Adjacency order.
    NguyenOnak,
}

/// Per-question state.
pub struct RgContext<'g> {
    oracle: Oracle<'g>,
    seed: u64,
    order: NeighborOrder,
    memo: FxHashMap<u32, bool>,
    revealed: FxHashMap<u32, Vec<u32>>,
    /// Largest explicit stack seen.
    pub max_stack: usize,
}

struct Frame {
    v: u32,
    earlier: Vec<u32>,
    next: usize,
}

impl<'g> RgContext<'g> {
    pub fn new(g: &'g Graph, seed: u64, order: NeighborOrder) -> Self {
        RgContext {
            oracle: Oracle::new(g),
            seed,
            order,
            memo: FxHashMap::default(),
            revealed: FxHashMap::default(),
            max_stack: 0,
        }
    }

    pub fn probes(&self) -> u64 {
        self.oracle.probes()
    }

    fn frame(&mut self, v: u32) -> Result<Frame> {
        let nbrs = match self.revealed.get(&v) {
            Some(n) => n.clone(),
            None => {
                let n = self.oracle.reveal_neighbors(v)?;
                self.revealed.insert(v, n.clone());
                n
            }
        };
        let pv = Priority::of(self.seed, v);
        let mut earlier: Vec<u32> = nbrs
            .into_iter()
            .filter(|&u| Priority::of(self.seed, u) < pv)
            .collect();
        if self.order == NeighborOrder::Yoshida {
            earlier.sort_unstable_by_key(|&u| Priority::of(self.seed, u));
        }
        Ok(Frame {
            v,
            earlier,
            next: 0,
        })
    }

    /// Whether `v` is in the greedy MIS over the priority order.
    pub fn in_mis(&mut self, v: u32) -> Result<bool> {
        if let Some(&b) = self.memo.get(&v) {
            return Ok(b);
        }
        let mut stack = vec![self.frame(v)?];
        while let Some(top) = stack.last_mut() {
            let mut decided = None;
            let mut push = None;
            while top.next < top.earlier.len() {
                let u = top.earlier[top.next];
                match self.memo.get(&u) {
                    Some(true) => {
                        decided = Some(false);
                        break;
                    }
                    Some(false) => top.next += 1,
                    None => {
                        push = Some(u);
                        break;
                    }
                }
            }
            if let Some(u) = push {
                debug_assert!(Priority::of(self.seed, u) < Priority::of(self.seed, top.v));
                let f = self.frame(u)?;
                stack.push(f);
                self.max_stack = self.max_stack.max(stack.len());
                continue;
            }
            let top = stack.pop().expect("non-empty");
            self.memo.insert(top.v, decided.unwrap_or(true));
        }
        Ok(self.memo[&v])
    }
}

/// One question with a fresh context; returns membership and probes used.
pub fn rgmis_answer(g: &Graph, seed: u64, v: u32) -> Result<(bool, u64)> {
    rgmis_answer_with(g, seed, v, NeighborOrder::Yoshida)
}

pub fn rgmis_answer_with(
    g: &Graph,
    seed: u64,
    v: u32,
    order: NeighborOrder,
) -> Result<(bool, u64)> {
    let mut ctx = RgContext::new(g, seed, order);
    let b = ctx.in_mis(v)?;
    Ok((b, ctx.probes()))
}

/// Sequential greedy over the priority order.
pub fn sequential_greedy(g: &Graph, seed: u64) -> Vec<bool> {
    let mut order: Vec<u32> = (0..g.n() as u32).collect();
    order.sort_unstable_by_key(|&v| Priority::of(seed, v));
    let mut in_set = vec![false; g.n()];
    for v in order {
        if !g.neighbors(v).iter().any(|&u| in_set[u as usize]) {
            in_set[v as usize] = true;
        }
    }
    in_set
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isolated_and_edge() {
        let g = Graph::empty(1);
        assert_eq!(rgmis_answer(&g, 3, 0).unwrap(), (true, 1));
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        for seed in 0..10 {
            let first = if Priority::of(seed, 0) < Priority::of(seed, 1) {
                0
            } else {
                1
            };
            assert!(rgmis_answer(&g, seed, first).unwrap().0);
            assert!(!rgmis_answer(&g, seed, 1 - first).unwrap().0);
        }
    }

    #[test]
    fn both_orders_agree_with_sequential() {
        let g =
            crate::graph::generate(crate::graph::GraphKind::Gnp { n: 500, p: 0.02 }, 5).unwrap();
        let seq = sequential_greedy(&g, 9);
        for v in 0..500 {
            for order in [NeighborOrder::Yoshida, NeighborOrder::NguyenOnak] {
                assert_eq!(
                    rgmis_answer_with(&g, 9, v, order).unwrap().0,
                    seq[v as usize]
                );
            }
        }
    }
}
