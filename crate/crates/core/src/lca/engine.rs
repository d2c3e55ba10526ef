use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::graph::{Graph, Oracle};
use crate::state::{
    bitset, init_sleep_extension, size_threshold, NodeRoundState, Phase1Status, SleepBasis,
    SleepDecl,
};
use crate::tape::{Params, Tape};

const NONE: u32 = u32::MAX;

/// Lazily advanced simulation of one vertex.
#[derive(Clone, Debug)]
struct NodeSim {
    v: u32,
    nbrs: Vec<u32>,
    words: usize,
    sets: Vec<u64>,
    sizes: Vec<u32>,
    cursor: Vec<u16>,
    /// Index `0..=T+1`.
    sleeping: Vec<bool>,
    /// Index `1..=T+1`: exponent used in round `t`.
    exps: Vec<u8>,
    /// Index `0..=T`.
    marked: Vec<bool>,
    /// Index `0..=T`: last processed round at the end of round `t`.
    lp_hist: Vec<u16>,
    exponent: u32,
    lp: u32,
    join_round: u32,
    dead_round: u32,
    marked_done: u32,
    join_done: u32,
    full: u32,
    decls: Vec<SleepDecl>,
    status: Option<Phase1Status>,
}

impl NodeSim {
    fn new(v: u32, nbrs: Vec<u32>, params: &Params, tape: &Tape) -> Self {
        let rounds = params.rounds as usize;
        let e1 = params.initial_exponent();
        let words = bitset::words(nbrs.len());
        let mut s = NodeSim {
            v,
            words,
            sets: vec![0; words * rounds],
            sizes: vec![0; rounds],
            cursor: vec![0; rounds + 1],
            sleeping: vec![false; rounds + 2],
            exps: vec![0; rounds + 2],
            marked: vec![false; rounds + 1],
            lp_hist: vec![0; rounds + 1],
            exponent: e1,
            lp: 0,
            join_round: 0,
            dead_round: 0,
            marked_done: 0,
            join_done: 0,
            full: 0,
            decls: Vec::new(),
            status: None,
            nbrs,
        };
        s.exps[1] = e1 as u8;
        for t in 1..=params.rounds {
            let base = (t as usize - 1) * words;
            let mut size = 0;
            for (i, &u) in s.nbrs.iter().enumerate() {
                if tape.within(u, t, e1, t - 1) {
                    s.sets[base + i / 64] |= 1 << (i % 64);
                    size += 1;
                }
            }
            s.sizes[t as usize - 1] = size;
        }
        for t in 1..=params.rounds {
            if let Some(z) = init_sleep_extension(s.sizes[t as usize - 1] as u64, t, params.k) {
                let to = (t + z).min(params.rounds);
                s.sleeping[t as usize..=to as usize].fill(true);
                s.decls.push(SleepDecl {
                    vertex: v,
                    target: t,
                    from: t,
                    to,
                    basis: SleepBasis::Init { z },
                });
            }
        }
        s
    }

    #[inline]
    fn resolved(&self) -> bool {
        self.join_round != 0 || self.dead_round != 0
    }

    #[inline]
    fn block(&self, t: u32) -> &[u64] {
        let b = (t as usize - 1) * self.words;
        &self.sets[b..b + self.words]
    }

    fn members(&self, t: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.sizes[t as usize - 1] as usize);
        bitset::for_each(self.block(t), |i| out.push(self.nbrs[i]));
        out
    }

    /// Freezes the node after it joined or died in round `t`.
    fn finalize(&mut self, t: u32, rounds: u32) {
        for s in t..=rounds {
            self.exps[s as usize + 1] = self.exponent as u8;
            self.lp_hist[s as usize] = self.lp as u16;
        }
        self.marked_done = rounds;
        self.join_done = rounds;
        self.full = rounds;
    }

    fn state(&self, t: u32) -> NodeRoundState {
        NodeRoundState {
            exponent: self.exps[t.max(1) as usize] as u32,
            marked: self.marked[t as usize],
            sleeping: t >= 1 && self.sleeping[t as usize],
            dead: self.dead_round != 0 && self.dead_round <= t,
            joined: self.join_round != 0 && self.join_round <= t,
            last_processed: self.lp_hist[t as usize] as u32,
        }
    }
}

/// Per-question state: the probe-counted oracle, revealed adjacency and the
/// memoized vertex simulations.
pub struct QuestionContext<'g> {
    oracle: Oracle<'g>,
    params: Params,
    tape: Tape,
    slot: Vec<u32>,
    sims: Vec<NodeSim>,
    depth: u32,
    max_depth: u32,
    cap: usize,
}

/// Default residual component cap `ceil(10 * Δ^4 * max(ln n, 1))`.
pub fn default_component_cap(max_degree: u32, n: usize) -> usize {
    let d = max_degree.max(1) as f64;
    let ln = (n.max(1) as f64).ln().max(1.0);
    (10.0 * d.powi(4) * ln).ceil().min(usize::MAX as f64) as usize
}

impl<'g> QuestionContext<'g> {
    pub fn new(graph: &'g Graph, params: &Params) -> Result<Self> {
        params.validate()?;
        if graph.max_degree() > params.delta_max_degree {
            return Err(Error::Params(format!(
                "graph has maximum degree {} above the configured {}",
                graph.max_degree(),
                params.delta_max_degree
            )));
        }
        Ok(QuestionContext {
            oracle: Oracle::new(graph),
            params: params.clone(),
            tape: params.tape(),
            slot: vec![NONE; graph.n()],
            sims: Vec::new(),
            depth: 0,
            max_depth: 3 * params.rounds + 4,
            cap: default_component_cap(params.delta_max_degree, graph.n()),
        })
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Probes spent so far.
    pub fn probes(&self) -> u64 {
        self.oracle.probes()
    }

    /// Number of distinct vertices revealed so far.
    pub fn revealed(&self) -> usize {
        self.sims.len()
    }

    /// Forgets every simulation and the probe count.
    pub fn reset(&mut self) {
        for s in &self.sims {
            self.slot[s.v as usize] = NONE;
        }
        self.sims.clear();
        self.oracle.reset();
        self.depth = 0;
    }

    fn slot_of(&mut self, v: u32) -> Result<usize> {
        if v as usize >= self.slot.len() {
            return Err(Error::VertexOutOfRange {
                vertex: v as u64,
                n: self.slot.len(),
            });
        }
        let s = self.slot[v as usize];
        if s != NONE {
            return Ok(s as usize);
        }
        let nbrs = self.oracle.reveal_neighbors(v)?;
        let i = self.sims.len();
        self.sims
            .push(NodeSim::new(v, nbrs, &self.params, &self.tape));
        self.slot[v as usize] = i as u32;
        Ok(i)
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > self.max_depth {
            return Err(Error::Internal(format!(
                "simulation recursion deeper than {}",
                self.max_depth
            )));
        }
        Ok(())
    }

    /// Step 1 and marking of round `t`.
    fn ensure_marked(&mut self, i: usize, t: u32) -> Result<()> {
        if self.sims[i].marked_done >= t {
            return Ok(());
        }
        self.enter()?;
        if t > 1 {
            self.ensure_full(i, t - 1)?;
        }
        if !self.sims[i].resolved() {
            if !self.sims[i].sleeping[t as usize] {
                let mut died = false;
                'rounds: for r in self.sims[i].lp + 1..t {
                    for x in self.sims[i].members(r) {
                        let j = self.slot_of(x)?;
                        self.ensure_join(j, r)?;
                        if self.sims[j].join_round == r {
                            died = true;
                            break 'rounds;
                        }
                    }
                }
                let rounds = self.params.rounds;
                let s = &mut self.sims[i];
                s.lp = t - 1;
                if died {
                    s.dead_round = t;
                    s.finalize(t, rounds);
                }
            }
            let s = &mut self.sims[i];
            if !s.resolved() {
                s.marked[t as usize] = self.tape.marked(s.v, t, s.exponent);
                s.marked_done = t;
            }
        }
        self.depth -= 1;
        Ok(())
    }

    /// Join decision of round `t`.
    fn ensure_join(&mut self, i: usize, t: u32) -> Result<()> {
        if self.sims[i].join_done >= t {
            return Ok(());
        }
        self.enter()?;
        self.ensure_marked(i, t)?;
        if !self.sims[i].resolved() {
            let s = &self.sims[i];
            if s.marked[t as usize] && !s.sleeping[t as usize] {
                let mut blocked = false;
                for x in self.sims[i].members(t) {
                    let j = self.slot_of(x)?;
                    self.ensure_marked(j, t)?;
                    if self.sims[j].marked[t as usize] {
                        blocked = true;
                        break;
                    }
                }
                if !blocked {
                    let rounds = self.params.rounds;
                    let s = &mut self.sims[i];
                    s.join_round = t;
                    s.finalize(t, rounds);
                }
            }
            let s = &mut self.sims[i];
            if !s.resolved() {
                s.join_done = t;
            }
        }
        self.depth -= 1;
        Ok(())
    }

    /// Everything of round `t`: exponent update, end-of-round death and
    /// refinement of future relevant sets.
    fn ensure_full(&mut self, i: usize, t: u32) -> Result<()> {
        if self.sims[i].full >= t {
            return Ok(());
        }
        self.enter()?;
        self.ensure_join(i, t)?;
        if !self.sims[i].resolved() {
            let e = self.sims[i].exponent;
            let mut died = false;
            let next = if self.sims[i].sleeping[t as usize] {
                e + 1
            } else {
                let mut blocked = false;
                for x in self.sims[i].members(t) {
                    let j = self.slot_of(x)?;
                    self.ensure_join(j, t)?;
                    let sj = &self.sims[j];
                    blocked |= sj.marked[t as usize];
                    died |= sj.join_round == t;
                }
                self.sims[i].lp = t;
                if blocked {
                    e + 1
                } else {
                    e.saturating_sub(1).max(1)
                }
            };
            let rounds = self.params.rounds;
            let s = &mut self.sims[i];
            s.exponent = next;
            s.exps[t as usize + 1] = next as u8;
            s.lp_hist[t as usize] = s.lp as u16;
            if died {
                s.dead_round = t;
                s.finalize(t, rounds);
            } else {
                self.refine(i, t)?;
                self.sims[i].full = t;
            }
        }
        self.depth -= 1;
        Ok(())
    }

    fn refine(&mut self, i: usize, t: u32) -> Result<()> {
        let rounds = self.params.rounds;
        for t2 in t + 1..=rounds {
            if self.sims[i].sleeping[t2 as usize] {
                continue;
            }
            let gap = t2 - t;
            if t <= gap + 1 {
                break;
            }
            let hi = t - gap - 1;
            let lo = t.saturating_sub(2 * gap).max(1);
            let done = self.sims[i].cursor[t2 as usize] as u32;
            for r in lo.max(done + 1)..=hi {
                let words = self.sims[i].words;
                let base = (t2 as usize - 1) * words;
                let mut block = self.sims[i].sets[base..base + words].to_vec();
                let mut gone = Vec::new();
                let mut members = Vec::new();
                bitset::for_each(&block, |k| members.push(k));
                for k in members {
                    let x = self.sims[i].nbrs[k];
                    let j = self.slot_of(x)?;
                    self.ensure_full(j, r)?;
                    let sj = &self.sims[j];
                    let dead = sj.dead_round != 0 && sj.dead_round <= r;
                    if dead || !self.tape.within(x, t2, sj.exps[r as usize] as u32, t2 - r) {
                        gone.push(k);
                    }
                }
                for k in gone {
                    block[k / 64] &= !(1u64 << (k % 64));
                }
                let size = bitset::count(&block) as u32;
                let s = &mut self.sims[i];
                s.sets[base..base + words].copy_from_slice(&block);
                s.sizes[t2 as usize - 1] = size;
                s.cursor[t2 as usize] = r as u16;
                if size as u64 > size_threshold(t2 - r, self.params.k) {
                    let to = (t2 + (t2 - r)).min(rounds);
                    s.sleeping[t2 as usize..=to as usize].fill(true);
                    let v = s.v;
                    s.decls.push(SleepDecl {
                        vertex: v,
                        target: t2,
                        from: t2,
                        to,
                        basis: SleepBasis::Refine {
                            declared_round: t,
                            message_round: r,
                        },
                    });
                    break;
                }
            }
        }
        Ok(())
    }

    /// State of `v` in round `t` (`0..=T`), identical to the reference
    /// simulator's trace.
    pub fn simulate_node(&mut self, v: u32, t: u32) -> Result<NodeRoundState> {
        if t > self.params.rounds {
            return Err(Error::Input(format!(
                "round {t} outside [0, {}]",
                self.params.rounds
            )));
        }
        let i = self.slot_of(v)?;
        if t >= 1 {
            self.ensure_full(i, t)?;
        }
        Ok(self.sims[i].state(t))
    }

    /// Sleep declarations made by `v` once simulated through round `T`.
    pub fn declarations(&mut self, v: u32) -> Result<Vec<SleepDecl>> {
        let i = self.slot_of(v)?;
        self.ensure_full(i, self.params.rounds)?;
        Ok(self.sims[i].decls.clone())
    }

    /// `N(v, t)` after simulating `v` through round `T`.
    pub fn relevant_set(&mut self, v: u32, t: u32) -> Result<Vec<u32>> {
        let i = self.slot_of(v)?;
        self.ensure_full(i, self.params.rounds)?;
        Ok(self.sims[i].members(t))
    }

    /// Phase-1 outcome of `v`.
    pub fn phase1_status(&mut self, v: u32) -> Result<Phase1Status> {
        let i = self.slot_of(v)?;
        if let Some(s) = self.sims[i].status {
            return Ok(s);
        }
        let rounds = self.params.rounds;
        self.ensure_full(i, rounds)?;
        let status = if self.sims[i].join_round != 0 {
            Phase1Status::InI
        } else {
            // every neighbour that joins in round r is in N(v, r)
            let mut found = None;
            for r in 1..=rounds {
                let mut best: Option<u32> = None;
                for x in self.sims[i].members(r) {
                    let j = self.slot_of(x)?;
                    self.ensure_join(j, r)?;
                    if self.sims[j].join_round == r {
                        best = Some(best.map_or(x, |b| b.min(x)));
                    }
                }
                if let Some(by) = best {
                    found = Some(by);
                    break;
                }
            }
            found.map_or(Phase1Status::Residual, |by| Phase1Status::Dominated { by })
        };
        self.sims[i].status = Some(status);
        Ok(status)
    }

    fn neighbors(&mut self, v: u32) -> Result<&[u32]> {
        let i = self.slot_of(v)?;
        Ok(&self.sims[i].nbrs)
    }

    /// Connected component of `v` in the residual graph, ascending.
    pub fn residual_component(&mut self, v: u32) -> Result<Vec<u32>> {
        if self.phase1_status(v)? != Phase1Status::Residual {
            return Err(Error::Input(format!("vertex {v} is not residual")));
        }
        let mut seen: FxHashSet<u32> = FxHashSet::default();
        seen.insert(v);
        let mut order = vec![v];
        let mut head = 0;
        while head < order.len() {
            let w = order[head];
            head += 1;
            let nbrs = self.neighbors(w)?.to_vec();
            for y in nbrs {
                if seen.contains(&y) || self.phase1_status(y)? != Phase1Status::Residual {
                    continue;
                }
                seen.insert(y);
                order.push(y);
                if order.len() > self.cap {
                    return Err(Error::ComponentCap {
                        vertex: v,
                        cap: self.cap,
                        reached: order.len(),
                    });
                }
            }
        }
        order.sort_unstable();
        Ok(order)
    }

    /// Lexicographically-first MIS of a residual component, using the
    /// already revealed adjacency.
    pub fn complete(&mut self, component: &[u32]) -> Result<Vec<u32>> {
        let mut edges = Vec::new();
        let members: FxHashSet<u32> = component.iter().copied().collect();
        for &w in component {
            for &y in self.neighbors(w)? {
                if w < y && members.contains(&y) {
                    edges.push((w, y));
                }
            }
        }
        Ok(greedy_complete(component, &edges))
    }

    /// Full answer for `v`; probes are those spent by this context since
    /// the call started.
    pub fn answer(&mut self, v: u32) -> Result<Answer> {
        let before = self.probes();
        let phase1 = self.phase1_status(v)?;
        let (in_mis, component_size) = match phase1 {
            Phase1Status::InI => (true, 0),
            Phase1Status::Dominated { .. } => (false, 0),
            Phase1Status::Residual => {
                let comp = self.residual_component(v)?;
                let mis = self.complete(&comp)?;
                (mis.binary_search(&v).is_ok(), comp.len())
            }
        };
        Ok(Answer {
            in_mis,
            phase1,
            probes_used: self.probes() - before,
            component_size,
        })
    }
}

/// Result of one question.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Answer {
    pub in_mis: bool,
    pub phase1: Phase1Status,
    pub probes_used: u64,
    /// Residual component size, 0 unless `phase1` is residual.
    pub component_size: usize,
}

/// Processes `component` in increasing id order, adding a vertex iff none of
/// its neighbours was added. `edges` are pairs inside the component.
pub fn greedy_complete(component: &[u32], edges: &[(u32, u32)]) -> Vec<u32> {
    let mut ids = component.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let pos = |v: u32| ids.binary_search(&v).ok();
    let mut adj = vec![Vec::new(); ids.len()];
    for &(a, b) in edges {
        if let (Some(i), Some(j)) = (pos(a), pos(b)) {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    let mut taken = vec![false; ids.len()];
    for i in 0..ids.len() {
        if !adj[i].iter().any(|&j| j < i && taken[j]) {
            taken[i] = true;
        }
    }
    ids.into_iter()
        .zip(taken)
        .filter_map(|(v, t)| t.then_some(v))
        .collect()
}
