//! Shared randomness and exact dyadic probability arithmetic.
//!
//! Every marking decision compares a fixed random value `rho(v, t)` against a
//! marking probability `2^-e`. Both live on the same grid of `bits` binary
//! digits, so the comparison is a single integer test and the algorithm is a
//! pure function of `(graph, params)`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default small constant `delta`.
pub const DEFAULT_DELTA: f64 = 0.005;
/// Default round multiplier: `T = C_T * ceil(log2(Delta + 1))`.
pub const DEFAULT_T_MULTIPLIER: u32 = 8;

/// Smallest `k` with `2^k >= x` (`ceil_log2(0) = ceil_log2(1) = 0`).
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// `ceil(20 * log2(1 / delta))`.
pub fn sleep_threshold_constant(delta: f64) -> u64 {
    (20.0 * (1.0 / delta).log2()).ceil() as u64
}

/// All algorithm constants in one record.
///
/// Field names on the wire are fixed: `delta_max_degree`, `T`, `delta_const`,
/// `K`, `C_delta`, `bits`, `master_seed`, `T_multiplier`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub delta_max_degree: u32,
    #[serde(rename = "T")]
    pub rounds: u32,
    pub delta_const: f64,
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(rename = "C_delta")]
    pub c_delta: f64,
    pub bits: u32,
    pub master_seed: u64,
    #[serde(rename = "T_multiplier")]
    pub t_multiplier: u32,
}

impl Params {
    /// Default constants for a graph of maximum degree `max_degree`.
    pub fn new(max_degree: u32, master_seed: u64) -> Self {
        Self::derive(max_degree, DEFAULT_DELTA, DEFAULT_T_MULTIPLIER, master_seed)
    }

    /// Derives `T`, `K`, `C_delta` and `bits` from the free knobs.
    pub fn derive(max_degree: u32, delta: f64, t_multiplier: u32, master_seed: u64) -> Self {
        let degree_bits = ceil_log2(max_degree as u64 + 1);
        let rounds = t_multiplier.saturating_mul(degree_bits.max(1));
        Params {
            delta_max_degree: max_degree,
            rounds,
            delta_const: delta,
            k: sleep_threshold_constant(delta),
            c_delta: (1.0 / delta).log2(),
            bits: degree_bits + 1 + rounds,
            master_seed,
            t_multiplier,
        }
    }

    pub fn with_seed(&self, master_seed: u64) -> Self {
        Params {
            master_seed,
            ..self.clone()
        }
    }

    /// Replaces `K`. Small values force the sleeping code paths; every
    /// deterministic invariant holds for any `K >= 0`.
    pub fn with_k(&self, k: u64) -> Self {
        Params { k, ..self.clone() }
    }

    /// Re-derives the round count and precision for a new multiplier,
    /// keeping any `K` override.
    pub fn with_t_multiplier(&self, t_multiplier: u32) -> Self {
        let mut p = Self::derive(
            self.delta_max_degree,
            self.delta_const,
            t_multiplier,
            self.master_seed,
        );
        p.k = self.k;
        p
    }

    /// Re-derives everything that depends on `delta`, keeping any `K` override
    /// only if it differed from the derived value.
    pub fn with_delta(&self, delta: f64) -> Self {
        let overridden = self.k != sleep_threshold_constant(self.delta_const);
        let mut p = Self::derive(
            self.delta_max_degree,
            delta,
            self.t_multiplier,
            self.master_seed,
        );
        if overridden {
            p.k = self.k;
        }
        p
    }

    /// Initial exponent `ceil(log2 Delta) + 1`, with `Delta` clamped to 1.
    pub fn initial_exponent(&self) -> u32 {
        ceil_log2(self.delta_max_degree.max(1) as u64) + 1
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Params(msg));
        if !(self.delta_const > 0.0 && self.delta_const <= 0.01) {
            return fail(format!(
                "delta_const {} outside (0, 0.01]",
                self.delta_const
            ));
        }
        if self.t_multiplier < 1 {
            return fail("T_multiplier must be >= 1".into());
        }
        let degree_bits = ceil_log2(self.delta_max_degree as u64 + 1);
        let expected_rounds = self.t_multiplier.saturating_mul(degree_bits.max(1));
        if self.rounds != expected_rounds {
            return fail(format!(
                "T = {} but T_multiplier * ceil(log2(Delta+1)) = {}",
                self.rounds, expected_rounds
            ));
        }
        if self.rounds > u16::MAX as u32 {
            return fail(format!("T = {} too large", self.rounds));
        }
        if self.bits != degree_bits + 1 + self.rounds {
            return fail(format!(
                "bits = {} but ceil(log2(Delta+1)) + 1 + T = {}",
                self.bits,
                degree_bits + 1 + self.rounds
            ));
        }
        // rho lives in [1, 2^bits] and neighbourhood masses reach Delta * 2^(bits-1).
        if self.bits > 127 || self.bits + degree_bits > 128 {
            return fail(format!(
                "precision of {} bits exceeds the 128-bit arithmetic (lower T_multiplier)",
                self.bits
            ));
        }
        let c = (1.0 / self.delta_const).log2();
        if (self.c_delta - c).abs() > 1e-9 {
            return fail(format!(
                "C_delta = {} but log2(1/delta) = {}",
                self.c_delta, c
            ));
        }
        Ok(())
    }

    pub fn tape(&self) -> Tape {
        Tape::new(self.master_seed, self.bits, self.rounds)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Params = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }
}

/// A marking probability `2^-e`, `e >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProbExponent(pub u32);

impl ProbExponent {
    pub fn probability(self) -> f64 {
        (-(self.0 as f64)).exp2()
    }
}

/// A fixed random value `value / 2^bits` in `(0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rho {
    pub value: u128,
}

/// Initial exponent for maximum degree `Delta >= 1`.
pub fn initial_exponent(max_degree: u32) -> Result<ProbExponent> {
    if max_degree < 1 {
        return Err(Error::Input("maximum degree must be >= 1".into()));
    }
    Ok(ProbExponent(ceil_log2(max_degree as u64) + 1))
}

/// `rho_t(v)`; `t` must lie in `[1, T]`.
pub fn rho(params: &Params, v: u32, t: u32) -> Result<Rho> {
    if t < 1 || t > params.rounds {
        return Err(Error::Input(format!(
            "round {} outside [1, {}]",
            t, params.rounds
        )));
    }
    Ok(Rho {
        value: params.tape().rho(v, t),
    })
}

/// `rho <= 2^-e`, compared exactly on the `bits`-digit grid.
pub fn is_marked(r: Rho, p: ProbExponent, params: &Params) -> bool {
    debug_assert!(p.0 <= params.bits);
    r.value <= 1u128 << (params.bits - p.0)
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed hash realization of the random tape.
#[derive(Clone, Copy, Debug)]
pub struct Tape {
    key: u64,
    bits: u32,
    rounds: u32,
}

impl Tape {
    pub fn new(seed: u64, bits: u32, rounds: u32) -> Self {
        assert!(
            (1..=127).contains(&bits),
            "tape precision must be in [1, 127]"
        );
        Tape {
            key: mix64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15)),
            bits,
            rounds,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    /// Raw tape value in `[1, 2^bits]`.
    #[inline]
    pub fn rho(&self, v: u32, t: u32) -> u128 {
        let h = mix64(self.key ^ (v as u64).wrapping_mul(0xd6e8_feb8_6659_fd93));
        let lo = mix64(h ^ (t as u64).wrapping_mul(0xa076_1d64_78bd_642f));
        let hi = mix64(lo ^ 0xe703_7ed1_a0b4_28db);
        let mask = (1u128 << self.bits) - 1;
        let x = (((hi as u128) << 64) | lo as u128) & mask;
        if x == 0 {
            1u128 << self.bits
        } else {
            x
        }
    }

    /// `rho_t(v) <= 2^-e`.
    #[inline]
    pub fn marked(&self, v: u32, t: u32, e: u32) -> bool {
        self.rho(v, t) <= 1u128 << (self.bits - e)
    }

    /// `rho_t(v) <= 2^-e * 2^shift`; always true once the bound reaches 1.
    #[inline]
    pub fn within(&self, v: u32, t: u32, e: u32, shift: u32) -> bool {
        if shift >= e {
            return true;
        }
        self.marked(v, t, e - shift)
    }
}

/// Exact sum of marking probabilities, stored as a multiple of `2^-bits`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mass(pub u128);

impl Mass {
    #[inline]
    pub fn add_exponent(&mut self, e: u32, bits: u32) {
        self.0 += 1u128 << (bits - e);
    }

    pub fn to_f64(self, bits: u32) -> f64 {
        self.0 as f64 * (-(bits as f64)).exp2()
    }

    /// Exact comparison of `self * 2^-bits` with a finite non-negative float.
    pub fn cmp_f64(self, bits: u32, x: f64) -> Ordering {
        assert!(x.is_finite() && x >= 0.0);
        if x == 0.0 {
            return self.0.cmp(&0);
        }
        let raw = x.to_bits();
        let exp_field = ((raw >> 52) & 0x7ff) as i32;
        let frac = raw & ((1u64 << 52) - 1);
        let (mantissa, exp) = if exp_field == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_field - 1075)
        };
        let mantissa = mantissa as u128;
        let shift = exp + bits as i32;
        let bitlen = |v: u128| 128 - v.leading_zeros() as i32;
        if shift >= 0 {
            if bitlen(mantissa) + shift > 128 {
                return Ordering::Less;
            }
            self.0.cmp(&(mantissa << shift))
        } else {
            let s = -shift;
            if self.0 != 0 && bitlen(self.0) + s > 128 {
                return Ordering::Greater;
            }
            if s >= 128 {
                return if self.0 == 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                };
            }
            (self.0 << s).cmp(&mantissa)
        }
    }

    /// `self <= (19/20) * total`.
    pub fn at_most_nineteen_twentieths_of(self, total: Mass) -> bool {
        // 20a <= 19d  <=>  d - a >= ceil(d / 20)
        if self.0 > total.0 {
            return false;
        }
        let rest = total.0 - self.0;
        let ceil = total.0 / 20 + u128::from(!total.0.is_multiple_of(20));
        rest >= ceil
    }

    /// `self > 0.7 * prev`.
    pub fn exceeds_seven_tenths_of(self, prev: Mass) -> bool {
        let floor = 7 * (prev.0 / 10) + (7 * (prev.0 % 10)) / 10;
        self.0 > floor
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(bits: u32) -> Params {
        let mut p = Params::new(4, 1);
        p.bits = bits;
        p
    }

    #[test]
    fn initial_exponent_values() {
        assert_eq!(initial_exponent(4).unwrap(), ProbExponent(3));
        assert_eq!(initial_exponent(1).unwrap(), ProbExponent(1));
        assert_eq!(initial_exponent(5).unwrap(), ProbExponent(4));
        assert!(initial_exponent(0).is_err());
    }

    #[test]
    fn marking_is_exact_and_inclusive() {
        let p = small(4);
        assert!(is_marked(Rho { value: 4 }, ProbExponent(1), &p));
        assert!(!is_marked(Rho { value: 12 }, ProbExponent(1), &p));
        assert!(is_marked(Rho { value: 8 }, ProbExponent(1), &p));
        assert!(!is_marked(Rho { value: 9 }, ProbExponent(1), &p));
        assert!(is_marked(Rho { value: 2 }, ProbExponent(3), &p));
        assert!(!is_marked(Rho { value: 3 }, ProbExponent(3), &p));
    }

    #[test]
    fn derived_constants() {
        let p = Params::new(16, 7);
        assert_eq!(p.k, 153);
        assert_eq!(p.rounds, 8 * 5);
        assert_eq!(p.bits, 5 + 1 + 40);
        assert!((p.c_delta - 200f64.log2()).abs() < 1e-12);
        p.validate().unwrap();
        assert_eq!(Params::new(0, 0).initial_exponent(), 1);
    }

    #[test]
    fn rho_is_deterministic_and_in_range() {
        let p = Params::new(8, 42);
        for v in 0..50 {
            for t in 1..=p.rounds {
                let a = rho(&p, v, t).unwrap();
                assert_eq!(a, rho(&p, v, t).unwrap());
                assert!(a.value >= 1 && a.value <= 1u128 << p.bits);
            }
        }
        assert!(rho(&p, 0, 0).is_err());
        assert!(rho(&p, 0, p.rounds + 1).is_err());
    }

    #[test]
    fn seed_changes_tape() {
        let a = Params::new(8, 1);
        let b = Params::new(8, 2);
        let differs = (0..100u32).any(|i| {
            rho(&a, i, 1 + i % a.rounds).unwrap() != rho(&b, i, 1 + i % a.rounds).unwrap()
        });
        assert!(differs);
    }

    #[test]
    fn json_round_trip_uses_fixed_names() {
        let p = Params::new(16, u64::MAX);
        let s = p.to_json().unwrap();
        for key in [
            "\"delta_max_degree\"",
            "\"T\"",
            "\"delta_const\"",
            "\"K\"",
            "\"C_delta\"",
            "\"bits\"",
            "\"master_seed\": 18446744073709551615",
            "\"T_multiplier\"",
        ] {
            assert!(s.contains(key), "{key} missing in {s}");
        }
        assert_eq!(Params::from_json(&s).unwrap(), p);
        let mut bad = p.clone();
        bad.bits += 1;
        assert!(Params::from_json(&bad.to_json().unwrap()).is_err());
    }

    #[test]
    fn mass_comparisons() {
        let bits = 20;
        let mut m = Mass::default();
        for _ in 0..4 {
            m.add_exponent(10, bits);
        }
        // 4 * 2^-10 = 0.00390625 <= 0.005
        assert_eq!(m.cmp_f64(bits, 0.005), Ordering::Less);
        assert_eq!(m.cmp_f64(bits, 0.00390625), Ordering::Equal);
        assert_eq!(m.cmp_f64(bits, 0.0039), Ordering::Greater);
        assert_eq!(Mass(0).cmp_f64(bits, 0.0), Ordering::Equal);
        assert_eq!(Mass(1).cmp_f64(bits, 1e-300), Ordering::Greater);
        assert_eq!(Mass(1).cmp_f64(bits, 1e300), Ordering::Less);

        assert!(Mass(19).at_most_nineteen_twentieths_of(Mass(20)));
        assert!(!Mass(20).at_most_nineteen_twentieths_of(Mass(21)));
        assert!(Mass(0).at_most_nineteen_twentieths_of(Mass(0)));
        assert!(Mass(8).exceeds_seven_tenths_of(Mass(10)));
        assert!(!Mass(7).exceeds_seven_tenths_of(Mass(10)));
        assert!(Mass(1).exceeds_seven_tenths_of(Mass(1)));
    }
}
