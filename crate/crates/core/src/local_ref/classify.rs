//! Round taxonomy used by the statistical diagnostics.

use std::cmp::Ordering;
use std::ops::AddAssign;

use serde::Serialize;

use super::Outcome;
use crate::graph::Graph;
use crate::state::SleepBasis;
use crate::tape::Mass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RoundClass {
    Sleeping,
    Light,
    Moderate,
    Heavy,
}

impl RoundClass {
    pub fn name(self) -> &'static str {
        match self {
            RoundClass::Sleeping => "sleeping",
            RoundClass::Light => "light",
            RoundClass::Moderate => "moderate",
            RoundClass::Heavy => "heavy",
        }
    }
}

/// Classification of one intact `(v, t)`: `v` neither joined nor learned of
/// a joined neighbour before marking in round `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundClassRecord {
    pub vertex: u32,
    pub round: u32,
    /// `d_t(v)`: total marking probability of the intact neighbours.
    pub mass: Mass,
    /// Mass of the intact neighbours that are heavy or sleeping.
    pub heavy_or_sleeping_mass: Mass,
    pub class: RoundClass,
    pub good1: bool,
    pub good2: bool,
    pub wrong_down: bool,
    pub wrong_up: bool,
    pub mistaken: bool,
    /// The exponent went up by one into round `t + 1`.
    pub halved: bool,
    pub joined: bool,
    pub neighbor_joined: bool,
}

/// Hit counter with a binomial standard error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub trials: u64,
    pub hits: u64,
}

impl Tally {
    #[inline]
    pub fn add(&mut self, hit: bool) {
        self.trials += 1;
        self.hits += hit as u64;
    }

    /// Empirical rate; 0 without trials.
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.hits as f64 / self.trials as f64
        }
    }

    /// `sqrt(p(1-p)/N)` at the empirical rate.
    pub fn sigma(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let p = self.rate();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

impl AddAssign for Tally {
    fn add_assign(&mut self, o: Tally) {
        self.trials += o.trials;
        self.hits += o.hits;
    }
}

/// Event frequencies over intact `(v, t)` pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tallies {
    pub intact: u64,
    pub sleeping: u64,
    pub light: u64,
    pub moderate: u64,
    pub heavy: u64,
    /// Hits: mistaken rounds, over all intact pairs.
    pub mistaken: Tally,
    /// Hits: light rounds that halved, over all intact pairs.
    pub wrong_down: Tally,
    /// Hits: wrong-up moves, over intact pairs with `t < T`.
    pub wrong_up: Tally,
    /// Hits: halved, over heavy rounds.
    pub heavy_halving: Tally,
    /// Hits: `v` joined, over good type-1 rounds.
    pub good1_join: Tally,
    /// Hits: a neighbour joined, over good type-2 rounds.
    pub good2_neighbor_join: Tally,
}

impl AddAssign for Tallies {
    fn add_assign(&mut self, o: Tallies) {
        self.intact += o.intact;
        self.sleeping += o.sleeping;
        self.light += o.light;
        self.moderate += o.moderate;
        self.heavy += o.heavy;
        self.mistaken += o.mistaken;
        self.wrong_down += o.wrong_down;
        self.wrong_up += o.wrong_up;
        self.heavy_halving += o.heavy_halving;
        self.good1_join += o.good1_join;
        self.good2_neighbor_join += o.good2_neighbor_join;
    }
}

impl Tallies {
    fn record(&mut self, r: &RoundClassRecord, has_next: bool) {
        self.intact += 1;
        match r.class {
            RoundClass::Sleeping => self.sleeping += 1,
            RoundClass::Light => self.light += 1,
            RoundClass::Moderate => self.moderate += 1,
            RoundClass::Heavy => {
                self.heavy += 1;
                self.heavy_halving.add(r.halved);
            }
        }
        self.mistaken.add(r.mistaken);
        self.wrong_down.add(r.wrong_down);
        if has_next {
            self.wrong_up.add(r.wrong_up);
        }
        if r.good1 {
            self.good1_join.add(r.joined);
        }
        if r.good2 {
            self.good2_neighbor_join.add(r.neighbor_joined);
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassTable {
    /// Intact pairs ordered by round, then vertex.
    pub records: Vec<RoundClassRecord>,
    pub tallies: Tallies,
}

/// Per-round mass and class rows.
struct Rows {
    n: usize,
    mass: Vec<Mass>,
    class: Vec<Option<RoundClass>>,
}

fn rows(g: &Graph, out: &Outcome) -> Rows {
    let n = out.n();
    let rounds = out.rounds();
    let bits = out.params.bits;
    let (delta, c_delta) = (out.params.delta_const, out.params.c_delta);
    let mut mass = vec![Mass::default(); (rounds as usize + 2) * n];
    let mut class = vec![None; (rounds as usize + 2) * n];
    for t in 1..=rounds {
        let row = t as usize * n;
        for v in 0..n as u32 {
            let mut d = Mass::default();
            for &u in g.neighbors(v) {
                if out.active(u, t) {
                    d.add_exponent(out.exponent(u, t), bits);
                }
            }
            mass[row + v as usize] = d;
            if !out.active(v, t) {
                continue;
            }
            class[row + v as usize] = Some(if out.sleeping(v, t) {
                RoundClass::Sleeping
            } else if d.cmp_f64(bits, delta) != Ordering::Greater {
                RoundClass::Light
            } else if d.cmp_f64(bits, c_delta) != Ordering::Less {
                RoundClass::Heavy
            } else {
                RoundClass::Moderate
            });
        }
    }
    Rows { n, mass, class }
}

/// Marks `[r + 1, t'' + (t'' - r)]` for in-run declarations made although
/// `d_r(v) <= 2^(4(t'' - r))`, and `[t, t + z]` for initial declarations
/// with `z >= 1`; clamped to `[1, T]`.
fn mistaken_rounds(out: &Outcome, rows: &Rows) -> Vec<bool> {
    let n = out.n();
    let rounds = out.rounds();
    let bits = out.params.bits;
    let mut flags = vec![false; (rounds as usize + 1) * n];
    for d in &out.decls {
        let span = match d.basis {
            SleepBasis::Init { z } if z >= 1 => Some((d.target, d.target + z)),
            SleepBasis::Init { .. } => None,
            SleepBasis::Refine {
                message_round: r, ..
            } => {
                let gap = d.target - r;
                let m = rows.mass[r as usize * rows.n + d.vertex as usize];
                let limit = (4.0 * gap as f64).exp2();
                (m.cmp_f64(bits, limit) != Ordering::Greater).then_some((r + 1, d.target + gap))
            }
        };
        if let Some((a, b)) = span {
            for t in a.max(1)..=b.min(rounds) {
                flags[t as usize * n + d.vertex as usize] = true;
            }
        }
    }
    flags
}

fn visit(g: &Graph, out: &Outcome, mut f: impl FnMut(RoundClassRecord, bool)) {
    let rows = rows(g, out);
    let mistaken = mistaken_rounds(out, &rows);
    let n = out.n();
    let rounds = out.rounds();
    let p = &out.params;
    let bits = p.bits;
    for t in 1..=rounds {
        let row = t as usize * n;
        for v in 0..n as u32 {
            let Some(class) = rows.class[row + v as usize] else {
                continue;
            };
            let d = rows.mass[row + v as usize];
            let mut heavy_or_sleeping = Mass::default();
            let mut neighbor_joined = false;
            for &u in g.neighbors(v) {
                if matches!(
                    rows.class[row + u as usize],
                    Some(RoundClass::Heavy | RoundClass::Sleeping)
                ) {
                    heavy_or_sleeping.add_exponent(out.exponent(u, t), bits);
                }
                neighbor_joined |= out.join_round(u) == Some(t);
            }
            let e = out.exponent(v, t);
            let halved = out.exponent(v, t + 1) == e + 1;
            let at_least_delta = d.cmp_f64(bits, p.delta_const) != Ordering::Less;
            let light = class == RoundClass::Light;
            let good1 = matches!(class, RoundClass::Light | RoundClass::Moderate) && e == 1;
            let good2 = at_least_delta && heavy_or_sleeping.at_most_nineteen_twentieths_of(d);
            let has_next = t < rounds;
            let wrong_up = has_next
                && at_least_delta
                && !good2
                && rows.mass[row + n + v as usize].exceeds_seven_tenths_of(d);
            let record = RoundClassRecord {
                vertex: v,
                round: t,
                mass: d,
                heavy_or_sleeping_mass: heavy_or_sleeping,
                class,
                good1,
                good2,
                wrong_down: light && halved,
                wrong_up,
                mistaken: mistaken[row + v as usize],
                halved,
                joined: out.join_round(v) == Some(t),
                neighbor_joined,
            };
            f(record, has_next);
        }
    }
}

/// Every intact `(v, t)` record plus the aggregated tallies.
pub fn classify_rounds(g: &Graph, out: &Outcome) -> ClassTable {
    let mut records = Vec::new();
    let mut tallies = Tallies::default();
    visit(g, out, |r, has_next| {
        tallies.record(&r, has_next);
        records.push(r);
    });
    ClassTable { records, tallies }
}

/// Tallies only, without materializing the records.
pub fn tally_rounds(g: &Graph, out: &Outcome) -> Tallies {
    let mut tallies = Tallies::default();
    visit(g, out, |r, has_next| tallies.record(&r, has_next));
    tallies
}
