//! Global round-synchronous reference simulator.
//!
//! Every round runs in three barrier-separated phases over all vertices:
//! (A) join announcements, marking; (B) join decisions; (C) exponent updates,
//! end-of-round deaths and refinement of future relevant sets. Each phase
//! reads only the committed history of earlier phases, so per-vertex work
//! runs data-parallel.

mod classify;
mod export;
mod influence;

pub use classify::{
    classify_rounds, tally_rounds, ClassTable, RoundClass, RoundClassRecord, Tallies, Tally,
};
pub use export::{OutcomeJson, TRACE_HEADER};
pub use influence::{assert_influence_bounds, InfluenceLedger, InfluenceVerdict};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par::{self, Execution};
use crate::state::{
    bitset, init_sleep_extension, size_threshold, NodeRoundState, Phase1Status, SleepBasis,
    SleepDecl,
};
use crate::tape::{Params, Tape};

/// Per-vertex mutable state.
#[derive(Clone, Debug)]
struct Local {
    /// `T` blocks of `words` words; block `t - 1` holds `N(v, t)`.
    sets: Vec<u64>,
    sizes: Vec<u32>,
    /// Latest message round already applied to `N(v, t)`.
    cursor: Vec<u16>,
    /// Index `t` in `1..=T`.
    sleeping: Vec<bool>,
    exponent: u32,
    last_processed: u32,
    decls: Vec<SleepDecl>,
    /// Reads of round-`t'` messages during the current round, index `t'`.
    reads: Vec<u32>,
}

/// Committed history readable by every vertex.
#[derive(Clone, Debug)]
struct History {
    n: usize,
    /// Row `t` in `1..=T+1`: exponent used in round `t` (row `T + 1` is final).
    exps: Vec<u8>,
    /// Row `t` in `0..=T`.
    marked: Vec<bool>,
    /// Row `t` in `0..=T`: last processed round at the end of round `t`.
    last_processed: Vec<u16>,
    join_round: Vec<u16>,
    dead_round: Vec<u16>,
}

impl History {
    #[inline]
    fn exp(&self, t: u32, v: usize) -> u32 {
        self.exps[t as usize * self.n + v] as u32
    }

    #[inline]
    fn marked(&self, t: u32, v: usize) -> bool {
        self.marked[t as usize * self.n + v]
    }

    #[inline]
    fn dead_by(&self, r: u32, v: usize) -> bool {
        let d = self.dead_round[v] as u32;
        d != 0 && d <= r
    }

    #[inline]
    fn resolved_before(&self, t: u32, v: usize) -> bool {
        let (j, d) = (self.join_round[v] as u32, self.dead_round[v] as u32);
        (j != 0 && j < t) || (d != 0 && d < t)
    }
}

/// Counts recorded after each round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RoundCounts {
    pub round: u32,
    pub marked: u64,
    pub sleeping: u64,
    pub joined: u64,
    pub died: u64,
    /// Vertices neither in I nor known dead after the round.
    pub active: u64,
}

/// Simulator options.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions<'a> {
    pub execution: Execution,
    /// Tape identities of the vertices (`labels[v]` is used in place of `v`
    /// when reading the tape). Used to simulate on an induced subgraph.
    pub labels: Option<&'a [u32]>,
}

/// Mid-run state; `run_round` must be called for `t = 1, 2, ..., T`.
pub struct SimState<'g> {
    graph: &'g Graph,
    params: Params,
    tape: Tape,
    exec: Execution,
    labels: Option<Vec<u32>>,
    words: Vec<usize>,
    locals: Vec<Local>,
    hist: History,
    ledger: InfluenceLedger,
    per_round: Vec<RoundCounts>,
    round: u32,
}

#[inline]
fn label(labels: &Option<Vec<u32>>, v: usize) -> u32 {
    match labels {
        Some(l) => l[v],
        None => v as u32,
    }
}

/// Builds the relevant sets and the initial sleep schedule.
pub fn initialize<'g>(g: &'g Graph, params: &Params) -> Result<SimState<'g>> {
    initialize_with(g, params, RunOptions::default())
}

pub fn initialize_with<'g>(
    g: &'g Graph,
    params: &Params,
    opts: RunOptions<'_>,
) -> Result<SimState<'g>> {
    params.validate()?;
    if g.max_degree() > params.delta_max_degree {
        return Err(Error::Params(format!(
            "graph has maximum degree {} above the configured {}",
            g.max_degree(),
            params.delta_max_degree
        )));
    }
    if let Some(l) = opts.labels {
        if l.len() != g.n() {
            return Err(Error::Input(format!(
                "{} labels for {} vertices",
                l.len(),
                g.n()
            )));
        }
    }
    let n = g.n();
    let rounds = params.rounds;
    let tape = params.tape();
    let e1 = params.initial_exponent();
    let labels = opts.labels.map(|l| l.to_vec());
    let words: Vec<usize> = (0..n as u32).map(|v| bitset::words(g.degree(v))).collect();

    let locals = par::map_range(opts.execution, n, |v| {
        let nbrs = g.neighbors(v as u32);
        let w = words[v];
        let mut local = Local {
            sets: vec![0; w * rounds as usize],
            sizes: vec![0; rounds as usize],
            cursor: vec![0; rounds as usize + 1],
            sleeping: vec![false; rounds as usize + 2],
            exponent: e1,
            last_processed: 0,
            decls: Vec::new(),
            reads: vec![0; rounds as usize + 1],
        };
        for t in 1..=rounds {
            let block = &mut local.sets[(t as usize - 1) * w..t as usize * w];
            let mut size = 0u32;
            for (i, &u) in nbrs.iter().enumerate() {
                if tape.within(label(&labels, u as usize), t, e1, t - 1) {
                    block[i / 64] |= 1 << (i % 64);
                    size += 1;
                }
            }
            local.sizes[t as usize - 1] = size;
        }
        for t in 1..=rounds {
            let size = local.sizes[t as usize - 1] as u64;
            if let Some(z) = init_sleep_extension(size, t, params.k) {
                let to = (t + z).min(rounds);
                for s in t..=to {
                    local.sleeping[s as usize] = true;
                }
                local.decls.push(SleepDecl {
                    vertex: v as u32,
                    target: t,
                    from: t,
                    to,
                    basis: SleepBasis::Init { z },
                });
            }
        }
        local
    });

    let rows = rounds as usize + 2;
    let mut exps = vec![0u8; rows * n];
    exps[n..2 * n].fill(e1 as u8);
    let hist = History {
        n,
        exps,
        marked: vec![false; (rounds as usize + 1) * n],
        last_processed: vec![0; (rounds as usize + 1) * n],
        join_round: vec![0; n],
        dead_round: vec![0; n],
    };
    Ok(SimState {
        graph: g,
        params: params.clone(),
        tape,
        exec: opts.execution,
        labels,
        words,
        locals,
        hist,
        ledger: InfluenceLedger::new(rounds),
        per_round: Vec::with_capacity(rounds as usize),
        round: 0,
    })
}

struct PhaseA {
    marked: bool,
    died: bool,
}

struct PhaseC {
    exponent: u32,
    died: bool,
}

impl<'g> SimState<'g> {
    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Executes round `t`; rounds must be run in order.
    pub fn run_round(&mut self, t: u32) -> Result<()> {
        if t != self.round + 1 || t > self.params.rounds {
            return Err(Error::Internal(format!(
                "round {t} requested after round {}",
                self.round
            )));
        }
        let n = self.hist.n;
        let g = self.graph;
        let tape = self.tape;
        let labels = &self.labels;
        let words = &self.words;

        // Phase A: step 1 for awake vertices, then marking.
        let hist = &self.hist;
        let a = par::map_slice_mut(self.exec, &mut self.locals, |v, local| {
            local.reads.fill(0);
            if hist.resolved_before(t, v) {
                return PhaseA {
                    marked: false,
                    died: false,
                };
            }
            let sleeping = local.sleeping[t as usize];
            if !sleeping {
                let nbrs = g.neighbors(v as u32);
                let w = words[v];
                let mut died = false;
                for r in local.last_processed + 1..t {
                    let block = &local.sets[(r as usize - 1) * w..r as usize * w];
                    local.reads[r as usize] += local.sizes[r as usize - 1];
                    if bitset::any(block, |i| hist.join_round[nbrs[i] as usize] as u32 == r) {
                        died = true;
                        break;
                    }
                }
                local.last_processed = t - 1;
                if died {
                    return PhaseA {
                        marked: false,
                        died: true,
                    };
                }
            }
            PhaseA {
                marked: tape.marked(label(labels, v), t, local.exponent),
                died: false,
            }
        });
        let row = t as usize * n;
        for (v, out) in a.iter().enumerate() {
            self.hist.marked[row + v] = out.marked;
            if out.died {
                self.hist.dead_round[v] = t as u16;
            }
        }

        // Phase B: joins.
        let hist = &self.hist;
        let locals = &self.locals;
        let joins = par::map_range(self.exec, n, |v| {
            let local = &locals[v];
            if !hist.marked(t, v) || local.sleeping[t as usize] {
                return false;
            }
            let nbrs = g.neighbors(v as u32);
            let w = words[v];
            let block = &local.sets[(t as usize - 1) * w..t as usize * w];
            !bitset::any(block, |i| hist.marked(t, nbrs[i] as usize))
        });
        for (v, &j) in joins.iter().enumerate() {
            if j {
                self.hist.join_round[v] = t as u16;
            }
        }

        // Phase C: exponent update, end-of-round deaths, step 2.
        let hist = &self.hist;
        let params = &self.params;
        let c = par::map_slice_mut(self.exec, &mut self.locals, |v, local| {
            let e = local.exponent;
            if hist.resolved_before(t, v) || hist.dead_round[v] as u32 == t {
                return PhaseC {
                    exponent: e,
                    died: false,
                };
            }
            if hist.join_round[v] as u32 == t {
                return PhaseC {
                    exponent: e,
                    died: false,
                };
            }
            let nbrs = g.neighbors(v as u32);
            let w = words[v];
            let mut died = false;
            let exponent = if local.sleeping[t as usize] {
                e + 1
            } else {
                let block = &local.sets[(t as usize - 1) * w..t as usize * w];
                let blocked = bitset::any(block, |i| hist.marked(t, nbrs[i] as usize));
                died = bitset::any(block, |i| hist.join_round[nbrs[i] as usize] as u32 == t);
                local.last_processed = t;
                if blocked {
                    e + 1
                } else {
                    e.saturating_sub(1).max(1)
                }
            };
            local.exponent = exponent;
            if !died {
                refine(local, v, t, params, &tape, labels, hist, nbrs, w);
            }
            PhaseC { exponent, died }
        });
        let next = (t as usize + 1) * n;
        for (v, out) in c.iter().enumerate() {
            self.hist.exps[next + v] = out.exponent as u8;
            if out.died {
                self.hist.dead_round[v] = t as u16;
            }
        }
        for v in 0..n {
            self.hist.last_processed[row + v] = self.locals[v].last_processed as u16;
        }

        self.record_round(t);
        self.round = t;
        Ok(())
    }

    fn record_round(&mut self, t: u32) {
        let n = self.hist.n;
        let mut counts = RoundCounts {
            round: t,
            ..Default::default()
        };
        for v in 0..n {
            let local = &self.locals[v];
            let hist = &self.hist;
            counts.marked += hist.marked(t, v) as u64;
            let j = hist.join_round[v] as u32;
            let d = hist.dead_round[v] as u32;
            if j == t {
                counts.joined += 1;
            }
            if d == t {
                counts.died += 1;
            }
            let resolved = j != 0 || d != 0;
            if !resolved {
                counts.active += 1;
            }
            if !hist.resolved_before(t, v) && local.sleeping[t as usize] {
                counts.sleeping += 1;
            }
            for (tp, &reads) in local.reads.iter().enumerate().take(t as usize) {
                if reads > 0 {
                    self.ledger.record_reads(v as u32, t, tp as u32, reads);
                }
            }
            if !resolved {
                for t2 in t + 1..=self.params.rounds {
                    if !local.sleeping[t2 as usize] {
                        self.ledger
                            .record_size(v as u32, t, t2, local.sizes[t2 as usize - 1]);
                    }
                }
            }
        }
        self.per_round.push(counts);
    }

    /// Runs the remaining rounds and freezes the outcome.
    pub fn finish(mut self) -> Result<Outcome> {
        while self.round < self.params.rounds {
            self.run_round(self.round + 1)?;
        }
        let n = self.hist.n;
        let rounds = self.params.rounds;
        let mut sleeping = vec![false; (rounds as usize + 1) * n];
        let mut decls = Vec::new();
        let mut sets = Vec::with_capacity(n);
        for (v, local) in self.locals.into_iter().enumerate() {
            for t in 1..=rounds as usize {
                sleeping[t * n + v] = local.sleeping[t];
            }
            decls.extend(local.decls);
            sets.push(local.sets);
        }
        let g = self.graph;
        let hist = self.hist;
        let status = (0..n)
            .map(|v| {
                if hist.join_round[v] != 0 {
                    return Phase1Status::InI;
                }
                g.neighbors(v as u32)
                    .iter()
                    .filter(|&&u| hist.join_round[u as usize] != 0)
                    .min_by_key(|&&u| (hist.join_round[u as usize], u))
                    .map_or(Phase1Status::Residual, |&u| Phase1Status::Dominated {
                        by: u,
                    })
            })
            .collect();
        Ok(Outcome {
            params: self.params,
            n,
            words: self.words,
            sets,
            status,
            hist,
            sleeping,
            decls,
            ledger: self.ledger,
            per_round: self.per_round,
        })
    }
}

/// Step 2: refine `N(v, t'')` for `t'' > t` using the messages of earlier
/// rounds and declare sleeping intervals.
#[allow(clippy::too_many_arguments)]
fn refine(
    local: &mut Local,
    v: usize,
    t: u32,
    params: &Params,
    tape: &Tape,
    labels: &Option<Vec<u32>>,
    hist: &History,
    nbrs: &[u32],
    w: usize,
) {
    let rounds = params.rounds;
    for t2 in t + 1..=rounds {
        if local.sleeping[t2 as usize] {
            continue;
        }
        let gap = t2 - t;
        if t <= gap + 1 {
            break;
        }
        let hi = t - gap - 1;
        let lo = t.saturating_sub(2 * gap).max(1);
        let idx = t2 as usize - 1;
        let done = local.cursor[t2 as usize] as u32;
        for r in lo..=hi.min(done) {
            local.reads[r as usize] += local.sizes[idx];
        }
        for r in lo.max(done + 1)..=hi {
            local.reads[r as usize] += local.sizes[idx];
            let block = &mut local.sets[idx * w..(idx + 1) * w];
            bitset::retain(block, |i| {
                let u = nbrs[i] as usize;
                !hist.dead_by(r, u) && tape.within(label(labels, u), t2, hist.exp(r, u), t2 - r)
            });
            let size = bitset::count(block) as u32;
            local.sizes[idx] = size;
            local.cursor[t2 as usize] = r as u16;
            if size as u64 > size_threshold(t2 - r, params.k) {
                let to = (t2 + (t2 - r)).min(rounds);
                for s in t2..=to {
                    local.sleeping[s as usize] = true;
                }
                local.decls.push(SleepDecl {
                    vertex: v as u32,
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
}

/// Runs all `T` rounds.
pub fn run(g: &Graph, params: &Params) -> Result<Outcome> {
    initialize(g, params)?.finish()
}

pub fn run_with(g: &Graph, params: &Params, opts: RunOptions<'_>) -> Result<Outcome> {
    initialize_with(g, params, opts)?.finish()
}

/// A completed run: the independent set, per-round traces and the ledger.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub params: Params,
    n: usize,
    words: Vec<usize>,
    sets: Vec<Vec<u64>>,
    status: Vec<Phase1Status>,
    hist: History,
    /// Row `t` in `1..=T`.
    sleeping: Vec<bool>,
    pub decls: Vec<SleepDecl>,
    pub ledger: InfluenceLedger,
    pub per_round: Vec<RoundCounts>,
}

impl Outcome {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rounds(&self) -> u32 {
        self.params.rounds
    }

    pub fn status(&self, v: u32) -> Phase1Status {
        self.status[v as usize]
    }

    pub fn statuses(&self) -> &[Phase1Status] {
        &self.status
    }

    pub fn in_set(&self, v: u32) -> bool {
        self.hist.join_round[v as usize] != 0
    }

    /// Round in which `v` joined, if it did.
    pub fn join_round(&self, v: u32) -> Option<u32> {
        Some(self.hist.join_round[v as usize] as u32).filter(|&r| r != 0)
    }

    /// Round in which `v` learned that a neighbour joined, if it did.
    pub fn dead_round(&self, v: u32) -> Option<u32> {
        Some(self.hist.dead_round[v as usize] as u32).filter(|&r| r != 0)
    }

    pub fn independent_set(&self) -> Vec<u32> {
        self.select(|s| s == Phase1Status::InI)
    }

    /// `Γ(I)`: every vertex with a neighbour in `I`.
    pub fn dead_set(&self) -> Vec<u32> {
        self.select(|s| matches!(s, Phase1Status::Dominated { .. }))
    }

    pub fn residual(&self) -> Vec<u32> {
        self.select(Phase1Status::is_residual)
    }

    fn select(&self, f: impl Fn(Phase1Status) -> bool) -> Vec<u32> {
        (0..self.n as u32).filter(|&v| f(self.status(v))).collect()
    }

    pub fn residual_fraction(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.status.iter().filter(|s| s.is_residual()).count() as f64 / self.n as f64
    }

    /// Exponent used in round `t` (`t = 0` gives the initial exponent);
    /// `t = T + 1` is the final value.
    pub fn exponent(&self, v: u32, t: u32) -> u32 {
        self.hist.exp(t.max(1), v as usize)
    }

    pub fn marked(&self, v: u32, t: u32) -> bool {
        self.hist.marked(t, v as usize)
    }

    /// Whether `v` takes part in the marking of round `t`: not resolved
    /// before round `t` and not killed by a join announcement at its start.
    pub fn active(&self, v: u32, t: u32) -> bool {
        let i = v as usize;
        if self.hist.resolved_before(t, i) {
            return false;
        }
        let step1_death = self.hist.dead_round[i] as u32 == t
            && self.hist.last_processed[t as usize * self.n + i] as u32 == t - 1;
        !step1_death
    }

    pub fn sleeping(&self, v: u32, t: u32) -> bool {
        t >= 1 && self.sleeping[t as usize * self.n + v as usize]
    }

    pub fn state(&self, v: u32, t: u32) -> NodeRoundState {
        let i = v as usize;
        let j = self.hist.join_round[i] as u32;
        let d = self.hist.dead_round[i] as u32;
        NodeRoundState {
            exponent: self.exponent(v, t),
            marked: self.marked(v, t),
            sleeping: self.sleeping(v, t),
            dead: d != 0 && d <= t,
            joined: j != 0 && j <= t,
            last_processed: self.hist.last_processed[t as usize * self.n + i] as u32,
        }
    }

    /// Final contents of `N(v, t)` as neighbour ids, ascending by adjacency index.
    pub fn relevant_set(&self, g: &Graph, v: u32, t: u32) -> Vec<u32> {
        let w = self.words[v as usize];
        let block = &self.sets[v as usize][(t as usize - 1) * w..t as usize * w];
        let nbrs = g.neighbors(v);
        let mut out = Vec::new();
        bitset::for_each(block, |i| out.push(nbrs[i]));
        out
    }

    /// Sleep declarations of `v`, in declaration order.
    pub fn declarations(&self, v: u32) -> impl Iterator<Item = &SleepDecl> {
        self.decls.iter().filter(move |d| d.vertex == v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};

    #[test]
    fn isolated_vertex_joins_when_first_marked() {
        let g = Graph::empty(1);
        for seed in 0..20 {
            let p = Params::new(0, seed);
            let out = run(&g, &p).unwrap();
            let tape = p.tape();
            let first = (1..=p.rounds).find(|&t| tape.marked(0, t, 1));
            assert_eq!(out.join_round(0), first);
            assert!(out.declarations(0).next().is_none());
            assert_eq!(out.exponent(0, 1), 1);
        }
    }

    #[test]
    fn empty_graph_residual_matches_tape() {
        let g = Graph::empty(200);
        let p = Params::new(0, 42);
        let out = run(&g, &p).unwrap();
        let tape = p.tape();
        let expected: Vec<u32> = (0..200)
            .filter(|&v| (1..=p.rounds).all(|t| !tape.marked(v, t, 1)))
            .collect();
        assert_eq!(out.residual(), expected);
    }

    #[test]
    fn clique_has_at_most_one_member() {
        let g = generate(GraphKind::Complete { n: 9 }, 0).unwrap();
        for seed in 0..30 {
            let out = run(&g, &Params::new(8, seed)).unwrap();
            let i = out.independent_set();
            assert!(i.len() <= 1);
            if i.len() == 1 {
                assert_eq!(out.dead_set().len(), 8);
            }
        }
    }

    #[test]
    fn modes_agree() {
        let g = generate(GraphKind::Gnp { n: 400, p: 0.02 }, 3).unwrap();
        let p = Params::new(g.max_degree(), 5).with_k(1);
        let a = run_with(
            &g,
            &p,
            RunOptions {
                execution: Execution::Sequential,
                labels: None,
            },
        )
        .unwrap();
        let b = run_with(
            &g,
            &p,
            RunOptions {
                execution: Execution::Parallel,
                labels: None,
            },
        )
        .unwrap();
        assert_eq!(a.statuses(), b.statuses());
        for v in 0..400 {
            for t in 0..=p.rounds {
                assert_eq!(a.state(v, t), b.state(v, t));
            }
        }
        assert_eq!(a.decls, b.decls);
    }

    #[test]
    fn rejects_degree_above_parameter() {
        let g = generate(GraphKind::Star { leaves: 5 }, 0).unwrap();
        assert!(run(&g, &Params::new(4, 0)).is_err());
    }
}
