//! Message-read and relevant-set accounting with the deterministic bounds
//! they must satisfy.

use serde::Serialize;

use crate::state::pow2_saturating;
use crate::tape::Params;

/// Maxima over vertices, with the first vertex (in recording order)
/// attaining each maximum. `reads[t][t']` is the largest number of round-`t'` messages one
/// vertex read during round `t`; `sizes[t][t'']` is the largest `|N(v, t'')|`
/// at the end of round `t` over vertices still participating and not
/// sleeping in `t''`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InfluenceLedger {
    rounds: u32,
    reads: Vec<(u32, u32)>,
    sizes: Vec<(u32, u32)>,
    pub total_reads: u64,
}

impl InfluenceLedger {
    pub fn new(rounds: u32) -> Self {
        let cells = (rounds as usize + 1) * (rounds as usize + 1);
        InfluenceLedger {
            rounds,
            reads: vec![(0, 0); cells],
            sizes: vec![(0, 0); cells],
            total_reads: 0,
        }
    }

    #[inline]
    fn idx(&self, a: u32, b: u32) -> usize {
        a as usize * (self.rounds as usize + 1) + b as usize
    }

    pub(crate) fn record_reads(&mut self, v: u32, t: u32, t_msg: u32, count: u32) {
        let i = self.idx(t, t_msg);
        self.total_reads += count as u64;
        if count > self.reads[i].0 {
            self.reads[i] = (count, v);
        }
    }

    pub(crate) fn record_size(&mut self, v: u32, t: u32, t2: u32, size: u32) {
        let i = self.idx(t, t2);
        if size > self.sizes[i].0 {
            self.sizes[i] = (size, v);
        }
    }

    /// `(max reads, argmax vertex)` of round-`t_msg` messages in round `t`.
    pub fn max_reads(&self, t: u32, t_msg: u32) -> (u32, u32) {
        self.reads[self.idx(t, t_msg)]
    }

    /// `(max |N(v, t2)|, argmax vertex)` at the end of round `t`.
    pub fn max_size(&self, t: u32, t2: u32) -> (u32, u32) {
        self.sizes[self.idx(t, t2)]
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum InfluenceVerdict {
    Pass,
    RelevantSetTooLarge {
        vertex: u32,
        round: u32,
        target: u32,
        size: u32,
        bound: u64,
    },
    TooManyReads {
        vertex: u32,
        round: u32,
        message_round: u32,
        reads: u32,
        bound: u64,
    },
}

impl InfluenceVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, InfluenceVerdict::Pass)
    }
}

/// Checks `|N(v,t'')| <= 2^(10(t''-t+1)) + K` for `t'' >= t + 1` and
/// `reads[v][t][t'] <= 2^(25(t-t'+1)) + K(t-t')` for `t' < t`; returns the
/// first violation in round order.
pub fn assert_influence_bounds(ledger: &InfluenceLedger, params: &Params) -> InfluenceVerdict {
    let k = params.k;
    for t in 1..=ledger.rounds {
        for t2 in t + 1..=ledger.rounds {
            let (size, vertex) = ledger.max_size(t, t2);
            let bound = pow2_saturating(10 * (t2 - t + 1) as u64).saturating_add(k);
            if size as u64 > bound {
                return InfluenceVerdict::RelevantSetTooLarge {
                    vertex,
                    round: t,
                    target: t2,
                    size,
                    bound,
                };
            }
        }
        for t_msg in 1..t {
            let (reads, vertex) = ledger.max_reads(t, t_msg);
            let gap = (t - t_msg) as u64;
            let bound = pow2_saturating(25 * (gap + 1)).saturating_add(k.saturating_mul(gap));
            if reads as u64 > bound {
                return InfluenceVerdict::TooManyReads {
                    vertex,
                    round: t,
                    message_round: t_msg,
                    reads,
                    bound,
                };
            }
        }
    }
    InfluenceVerdict::Pass
}
