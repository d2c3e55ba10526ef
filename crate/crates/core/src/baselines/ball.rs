//! Phase-1 status by revealing a whole ball and running the reference
//! simulator on it.
//!
//! The state of a vertex after round `t` depends on vertices up to `2t`
//! hops away (marks, then joins, each cross one edge per round), and the
//! final status reads the round-`T` joins of the neighbours, so every vertex
//! within distance `2T` needs its full adjacency.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::graph::{Graph, Oracle};
use crate::local_ref::{self, RunOptions};
use crate::par::Execution;
use crate::state::Phase1Status;
use crate::tape::Params;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BallMode {
    /// Reveal every vertex within distance `2T`.
    #[default]
    Exact,
    /// One extra hop, as a cross-check.
    Padded,
}

impl BallMode {
    pub fn reveal_radius(self, rounds: u32) -> u32 {
        match self {
            BallMode::Exact => 2 * rounds,
            BallMode::Padded => 2 * rounds + 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BallAnswer {
    pub status: Phase1Status,
    pub probes: u64,
    /// Vertices in the simulated subgraph.
    pub ball_size: usize,
    pub radius: u32,
}

/// Moore bound on the number of vertices within distance `radius`, as a
/// float so that it can exceed any integer type.
pub fn moore_bound(max_degree: u32, radius: u32) -> f64 {
    let d = max_degree as f64;
    let mut total = 1.0;
    let mut layer = d;
    for _ in 0..radius {
        total += layer;
        layer *= (d - 1.0).max(0.0);
    }
    total
}

/// Estimated reveal cost: `min(n, Moore bound) * (Δ + 1)` probes.
pub fn estimated_probes(params: &Params, n: usize, radius: u32) -> u128 {
    let verts = moore_bound(params.delta_max_degree, radius).min(n as f64) as u128;
    verts * (params.delta_max_degree as u128 + 1)
}

pub const DEFAULT_BALL_BUDGET: u128 = 20_000_000;

pub fn ball_simulate_answer(
    g: &Graph,
    params: &Params,
    v: u32,
    mode: BallMode,
    budget: u128,
) -> Result<BallAnswer> {
    let radius = mode.reveal_radius(params.rounds);
    let estimate = estimated_probes(params, g.n(), radius);
    if estimate > budget {
        return Err(Error::BallBudget {
            vertex: v,
            radius,
            estimate,
            budget,
        });
    }
    let mut oracle = Oracle::new(g);
    // local ids in discovery order; `dist` of the discovered vertices
    let mut local: FxHashMap<u32, u32> = FxHashMap::default();
    let mut ids = vec![v];
    let mut dist = vec![0u32];
    local.insert(v, 0);
    let mut edges = Vec::new();
    let mut head = 0;
    while head < ids.len() {
        let (w, d) = (ids[head], dist[head]);
        head += 1;
        if d > radius {
            continue;
        }
        let lw = local[&w];
        for u in oracle.reveal_neighbors(w)? {
            let lu = *local.entry(u).or_insert_with(|| {
                ids.push(u);
                dist.push(d + 1);
                ids.len() as u32 - 1
            });
            edges.push((lw.min(lu), lw.max(lu)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let sub = Graph::from_edges(ids.len(), &edges)?;
    let out = local_ref::run_with(
        &sub,
        params,
        RunOptions {
            execution: Execution::Sequential,
            labels: Some(&ids),
        },
    )?;
    let status = match out.status(0) {
        Phase1Status::Dominated { by } => Phase1Status::Dominated {
            by: ids[by as usize],
        },
        s => s,
    };
    Ok(BallAnswer {
        status,
        probes: oracle.probes(),
        ball_size: ids.len(),
        radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};
    use crate::lca::QuestionContext;

    #[test]
    fn moore_bounds() {
        assert_eq!(moore_bound(3, 2), 1.0 + 3.0 + 6.0);
        assert_eq!(moore_bound(2, 5), 11.0);
        assert_eq!(moore_bound(0, 4), 1.0);
    }

    #[test]
    fn isolated_vertex_ball() {
        let g = Graph::empty(2);
        let p = Params::new(0, 1);
        let a = ball_simulate_answer(&g, &p, 1, BallMode::Exact, DEFAULT_BALL_BUDGET).unwrap();
        assert_eq!(a.ball_size, 1);
        assert_eq!(a.probes, 1);
        let mut ctx = QuestionContext::new(&g, &p).unwrap();
        assert_eq!(a.status, ctx.phase1_status(1).unwrap());
    }

    #[test]
    fn cycle_matches_lca() {
        let g = generate(GraphKind::Cycle { n: 20 }, 0).unwrap();
        for seed in 0..5 {
            let p = Params::new(2, seed).with_t_multiplier(1);
            for v in 0..20 {
                let mut ctx = QuestionContext::new(&g, &p).unwrap();
                let want = ctx.phase1_status(v).unwrap();
                for mode in [BallMode::Exact, BallMode::Padded] {
                    let a = ball_simulate_answer(&g, &p, v, mode, DEFAULT_BALL_BUDGET).unwrap();
                    assert_eq!(a.status, want, "seed {seed} v {v} {mode:?}");
                }
            }
        }
    }

    #[test]
    fn refuses_over_budget() {
        let g = generate(GraphKind::RandomRegular { n: 200, d: 8 }, 0).unwrap();
        let p = Params::new(8, 0);
        assert!(matches!(
            ball_simulate_answer(&g, &p, 0, BallMode::Exact, 100),
            Err(Error::BallBudget { .. })
        ));
    }
}
