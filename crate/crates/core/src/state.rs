//! Per-node state shared by the reference simulator and the LCA.

use serde::{Deserialize, Serialize};

/// A node's state in round `t` (`t = 0` is the state after initialization).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRoundState {
    /// Exponent `e` of the marking probability `2^-e` used in round `t`.
    pub exponent: u32,
    /// Marked in round `t`.
    pub marked: bool,
    /// Sleeping in round `t`.
    pub sleeping: bool,
    /// Knows a neighbour joined the independent set by the end of round `t`.
    pub dead: bool,
    /// In the independent set by the end of round `t`.
    pub joined: bool,
    /// Latest round whose join announcements the node has consumed.
    pub last_processed: u32,
}

/// Outcome of the near-maximal phase for one vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase1Status {
    InI,
    /// Some neighbour joined; `by` is the earliest joiner (smallest id on ties).
    Dominated {
        by: u32,
    },
    Residual,
}

impl Phase1Status {
    pub fn is_residual(self) -> bool {
        matches!(self, Phase1Status::Residual)
    }
}

/// Where a sleeping interval came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SleepBasis {
    /// Declared before round 1 from the initial relevant set; `z` is the
    /// extension beyond the target round.
    Init { z: u32 },
    /// Declared in round `declared_round` after filtering with the messages
    /// of round `message_round`.
    Refine {
        declared_round: u32,
        message_round: u32,
    },
}

/// One sleeping declaration: rounds `[from, to]` (already clamped to `[1, T]`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SleepDecl {
    pub vertex: u32,
    /// The future round whose relevant set triggered the declaration.
    pub target: u32,
    pub from: u32,
    pub to: u32,
    pub basis: SleepBasis,
}

/// `2^(5 * gap) + k`, saturating.
#[inline]
pub fn size_threshold(gap: u32, k: u64) -> u64 {
    pow2_saturating(5 * gap as u64).saturating_add(k)
}

#[inline]
pub(crate) fn pow2_saturating(exp: u64) -> u64 {
    if exp >= 64 {
        u64::MAX
    } else {
        1u64 << exp
    }
}

/// Rounds `[t, t + z]` slept by the initialization rule, where `z` is the
/// greatest integer with `size > 2^(5(t+z-1)) + k`; `None` when
/// `size <= 2^(5(t-1)) + k`.
pub fn init_sleep_extension(size: u64, t: u32, k: u64) -> Option<u32> {
    if size <= size_threshold(t - 1, k) {
        return None;
    }
    let mut z = 0;
    while size > size_threshold(t + z, k) {
        z += 1;
    }
    Some(z)
}

/// Word-packed subsets of a vertex's adjacency list.
pub(crate) mod bitset {
    #[inline]
    pub fn words(len: usize) -> usize {
        len.div_ceil(64)
    }

    #[inline]
    pub fn count(words: &[u64]) -> u64 {
        words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn for_each(words: &[u64], mut f: impl FnMut(usize)) {
        for (i, &w) in words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                f(i * 64 + b);
                w &= w - 1;
            }
        }
    }

    pub fn any(words: &[u64], mut f: impl FnMut(usize) -> bool) -> bool {
        for (i, &w) in words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                if f(i * 64 + b) {
                    return true;
                }
                w &= w - 1;
            }
        }
        false
    }

    /// Keeps the members for which `keep` holds.
    pub fn retain(words: &mut [u64], mut keep: impl FnMut(usize) -> bool) {
        for (i, w) in words.iter_mut().enumerate() {
            let mut rest = *w;
            while rest != 0 {
                let b = rest.trailing_zeros() as usize;
                if !keep(i * 64 + b) {
                    *w &= !(1u64 << b);
                }
                rest &= rest - 1;
            }
        }
    }
}
