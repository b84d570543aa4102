//! Exact arithmetic in the ring of integers `O_d` of `Q(sqrt(-d))` for the
//! nine class-number-one fields.
//!
//! Elements are stored as integer coordinates `(a, b)` over the integral basis
//! `{1, w}` where `w = sqrt(-d)` for `d = 1, 2 (mod 4)` and `w = (1 + sqrt(-d))/2`
//! for `d = 3 (mod 4)`. Every predicate in this module is exact; floating point
//! only appears in [`QuadInt::to_complex`], which is used for reporting.

mod quadint;
mod residue;
mod text;

pub use quadint::{content, gcd, ArithOp, QuadInt};
pub use residue::Modulus;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The nine `d` for which `O_d` has class number one.
pub const CLASS_NUMBER_ONE: [u32; 9] = [1, 2, 3, 7, 11, 19, 43, 67, 163];

/// Shape of the second basis vector `w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaRule {
    /// `w = sqrt(-d)`, used when `d = 1, 2 (mod 4)`.
    SqrtMinusD,
    /// `w = (1 + sqrt(-d))/2`, used when `d = 3 (mod 4)`.
    HalfInteger,
}

/// One of the nine imaginary quadratic rings of class number one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Ring {
    d: u32,
}

impl TryFrom<u32> for Ring {
    type Error = Error;

    fn try_from(d: u32) -> Result<Self> {
        Ring::new(d)
    }
}

impl From<Ring> for u32 {
    fn from(r: Ring) -> u32 {
        r.d
    }
}

impl Ring {
    pub fn new(d: u32) -> Result<Self> {
        if CLASS_NUMBER_ONE.contains(&d) {
            Ok(Ring { d })
        } else {
            Err(Error::usage(format!(
                "d = {d} is not one of the class-number-one values {CLASS_NUMBER_ONE:?}"
            )))
        }
    }

    pub fn d(self) -> u32 {
        self.d
    }

    pub fn omega_rule(self) -> OmegaRule {
        if self.d % 4 == 3 {
            OmegaRule::HalfInteger
        } else {
            OmegaRule::SqrtMinusD
        }
    }

    pub(crate) fn half(self) -> bool {
        self.d % 4 == 3
    }

    /// Norm-Euclidean rings among the nine.
    pub fn is_euclidean(self) -> bool {
        matches!(self.d, 1 | 2 | 3 | 7 | 11)
    }

    /// Discriminant of the field `Q(sqrt(-d))`: `-4d` or `-d`.
    pub fn field_discriminant(self) -> i64 {
        if self.half() {
            -(self.d as i64)
        } else {
            -4 * self.d as i64
        }
    }

    /// Coordinates `(c0, c1)` with `w^2 = c0 + c1 w`.
    pub fn omega_square(self) -> (i64, i64) {
        if self.half() {
            (-((1 + self.d as i64) / 4), 1)
        } else {
            (-(self.d as i64), 0)
        }
    }

    pub fn elem(self, a: impl Into<BigInt>, b: impl Into<BigInt>) -> QuadInt {
        QuadInt::new(self, a, b)
    }

    pub fn int(self, a: impl Into<BigInt>) -> QuadInt {
        QuadInt::new(self, a, 0)
    }

    pub fn zero(self) -> QuadInt {
        self.int(0)
    }

    pub fn one(self) -> QuadInt {
        self.int(1)
    }

    pub fn omega(self) -> QuadInt {
        self.elem(0, 1)
    }

    /// The unit group: `{±1, ±i}` for `d = 1`, the sixth roots of unity for
    /// `d = 3`, `{±1}` otherwise.
    pub fn units(self) -> Vec<QuadInt> {
        let mut out: Vec<QuadInt> = self
            .ball_coords(1)
            .into_iter()
            .filter(|&(a, b)| self.norm_coords(a, b) == 1)
            .map(|(a, b)| self.elem(a, b))
            .collect();
        out.sort_by(|x, y| x.lex_cmp(y));
        out
    }

    /// Norm of `a + b w` on machine integers.
    pub fn norm_coords(self, a: i64, b: i64) -> i128 {
        let (a, b) = (a as i128, b as i128);
        if self.half() {
            a * a + a * b + b * b * ((1 + self.d as i128) / 4)
        } else {
            a * a + self.d as i128 * b * b
        }
    }

    /// Checked norm on `i128` coordinates.
    pub fn norm_i128(self, x: (i128, i128)) -> Option<i128> {
        let (a, b) = x;
        let aa = a.checked_mul(a)?;
        let bb = b.checked_mul(b)?;
        if self.half() {
            let ab = a.checked_mul(b)?;
            aa.checked_add(ab)?.checked_add(bb.checked_mul((1 + self.d as i128) / 4)?)
        } else {
            aa.checked_add(bb.checked_mul(self.d as i128)?)
        }
    }

    /// Checked product on `i128` coordinates; used by hot enumeration loops
    /// that fall back to [`QuadInt`] on overflow.
    pub fn mul_i128(self, x: (i128, i128), y: (i128, i128)) -> Option<(i128, i128)> {
        let (c0, c1) = self.omega_square();
        let ac = x.0.checked_mul(y.0)?;
        let be = x.1.checked_mul(y.1)?;
        let ae = x.0.checked_mul(y.1)?;
        let bc = x.1.checked_mul(y.0)?;
        let re = ac.checked_add(be.checked_mul(c0 as i128)?)?;
        let om = ae.checked_add(bc)?.checked_add(be.checked_mul(c1 as i128)?)?;
        Some((re, om))
    }

    /// Coordinates of every element with norm at most `bound`, sorted by
    /// `(norm, a, b)`.
    pub fn ball_coords(self, bound: u64) -> Vec<(i64, i64)> {
        let bound_i = bound as i128;
        let d = self.d as i128;
        let mut out = Vec::new();
        if self.half() {
            // 4 N(a + b w) = (2a + b)^2 + d b^2
            let bmax = isqrt_u128((4 * bound_i / d) as u128) as i64;
            for b in -bmax..=bmax {
                let rest = 4 * bound_i - d * (b as i128) * (b as i128);
                if rest < 0 {
                    continue;
                }
                let r = isqrt_u128(rest as u128) as i64;
                let lo = (-r - b).div_euclid(2) + i64::from((-r - b).rem_euclid(2) != 0);
                let hi = (r - b).div_euclid(2);
                for a in lo..=hi {
                    out.push((a, b));
                }
            }
        } else {
            let bmax = isqrt_u128((bound_i / d) as u128) as i64;
            for b in -bmax..=bmax {
                let rest = bound_i - d * (b as i128) * (b as i128);
                let r = isqrt_u128(rest as u128) as i64;
                for a in -r..=r {
                    out.push((a, b));
                }
            }
        }
        out.retain(|&(a, b)| self.norm_coords(a, b) <= bound_i);
        out.sort_by_key(|&(a, b)| (self.norm_coords(a, b), a, b));
        out
    }

    /// All `x` with `N(x) <= bound`, each once, ordered by `(norm, a, b)`.
    pub fn lattice_ball(self, bound: u64) -> Vec<QuadInt> {
        self.ball_coords(bound)
            .into_iter()
            .map(|(a, b)| self.elem(a, b))
            .collect()
    }

    /// Complex embedding of `w`.
    pub fn omega_complex(self) -> (f64, f64) {
        let s = (self.d as f64).sqrt();
        if self.half() {
            (0.5, s / 2.0)
        } else {
            (0.0, s)
        }
    }
}

impl std::fmt::Display for Ring {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "O_{}", self.d)
    }
}

pub(crate) fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|s| s <= n) {
        x += 1;
    }
    x
}

/// Exact square root of a nonnegative `u128`, if it is a perfect square.
pub(crate) fn exact_sqrt_u128(n: u128) -> Option<u128> {
    let r = isqrt_u128(n);
    (r * r == n).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_other_d() {
        for d in [0, 4, 5, 6, 15, 23, 164] {
            assert!(Ring::new(d).is_err(), "d = {d}");
        }
        for d in CLASS_NUMBER_ONE {
            let r = Ring::new(d).unwrap();
            assert_eq!(r.is_euclidean(), d <= 11);
        }
    }

    #[test]
    fn omega_rule_and_discriminant() {
        let r = Ring::new(7).unwrap();
        assert_eq!(r.omega_rule(), OmegaRule::HalfInteger);
        assert_eq!(r.field_discriminant(), -7);
        assert_eq!(r.omega_square(), (-2, 1));
        let r = Ring::new(2).unwrap();
        assert_eq!(r.omega_rule(), OmegaRule::SqrtMinusD);
        assert_eq!(r.field_discriminant(), -8);
    }

    #[test]
    fn ball_small_cases() {
        let g = Ring::new(1).unwrap();
        assert_eq!(g.lattice_ball(1).len(), 5);
        let e = Ring::new(3).unwrap();
        assert_eq!(e.lattice_ball(1).len(), 7);
        for d in CLASS_NUMBER_ONE {
            let r = Ring::new(d).unwrap();
            assert_eq!(r.lattice_ball(0), vec![r.zero()]);
        }
    }

    #[test]
    fn ball_matches_box_count() {
        for d in [1, 2, 3, 7, 19] {
            let r = Ring::new(d).unwrap();
            for bound in [0u64, 1, 2, 5, 17, 60] {
                let mut direct = 0;
                for a in -70i64..=70 {
                    for b in -70i64..=70 {
                        if r.norm_coords(a, b) <= bound as i128 {
                            direct += 1;
                        }
                    }
                }
                assert_eq!(r.ball_coords(bound).len(), direct, "d={d} bound={bound}");
            }
        }
    }

    #[test]
    fn ball_is_monotone_and_sorted() {
        let r = Ring::new(11).unwrap();
        let small = r.ball_coords(20);
        let big = r.ball_coords(45);
        assert!(small.iter().all(|x| big.contains(x)));
        let keys: Vec<_> = big.iter().map(|&(a, b)| (r.norm_coords(a, b), a, b)).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn unit_groups() {
        assert_eq!(Ring::new(1).unwrap().units().len(), 4);
        assert_eq!(Ring::new(3).unwrap().units().len(), 6);
        assert_eq!(Ring::new(43).unwrap().units().len(), 2);
    }

    #[test]
    fn isqrt_edges() {
        assert_eq!(isqrt_u128(0), 0);
        assert_eq!(isqrt_u128(15), 3);
        assert_eq!(isqrt_u128(16), 4);
        assert_eq!(exact_sqrt_u128(1 << 100), Some(1 << 50));
        assert_eq!(exact_sqrt_u128((1 << 100) + 1), None);
    }
}
