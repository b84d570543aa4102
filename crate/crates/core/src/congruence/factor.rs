use num_bigint::BigInt;
use num_prime::nt_funcs::factorize128;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::error::{Error, Result};
use crate::ring::{exact_sqrt_u128, isqrt_u128, Modulus, QuadInt, Ring};

/// Largest rational prime for which a prime element is searched.
pub const MAX_PRIME: u128 = 100_000_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimePower {
    /// Canonical generator of the prime ideal.
    pub pi: QuadInt,
    pub e: u32,
    /// `N(P) = |O_d / P|`.
    #[serde_as(as = "DisplayFromStr")]
    pub residue_size: BigInt,
    #[serde_as(as = "DisplayFromStr")]
    pub rational_prime: BigInt,
    pub splitting: Splitting,
}

/// `O_d / u O_d` together with the prime factorization of `u O_d`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueRing {
    pub u: QuadInt,
    pub factors: Vec<PrimePower>,
    /// The unit `v` with `u = v * prod pi^e`.
    pub unit: QuadInt,
    /// `N(u) = |O_d / u O_d|`.
    #[serde_as(as = "DisplayFromStr")]
    pub order: BigInt,
}

impl ResidueRing {
    pub fn modulus(&self) -> Modulus {
        Modulus::new(&self.u).expect("nonzero modulus")
    }
}

fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    if let Some(x) = a.checked_mul(b) {
        return x % m;
    }
    let (mut a, mut b, mut acc) = (a % m, b, 0u128);
    while b > 0 {
        if b & 1 == 1 {
            acc = (acc + a) % m;
        }
        a = (a << 1) % m;
        b >>= 1;
    }
    acc
}

fn powmod(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Decomposition type of the rational prime `p` in `O_d`.
pub fn splitting(ring: Ring, p: u128) -> Splitting {
    let disc = ring.field_discriminant();
    if p == 2 {
        return match disc.rem_euclid(8) {
            0 | 4 => Splitting::Ramified,
            1 | 7 => Splitting::Split,
            _ => Splitting::Inert,
        };
    }
    let dm = (disc as i128).rem_euclid(p as i128) as u128;
    if dm == 0 {
        return Splitting::Ramified;
    }
    if powmod(dm, (p - 1) / 2, p) == 1 {
        Splitting::Split
    } else {
        Splitting::Inert
    }
}

/// An element of norm `p`, by direct search on the norm form.
pub fn element_of_norm(ring: Ring, p: u128) -> Result<Option<QuadInt>> {
    if p > MAX_PRIME {
        return Err(Error::Unsupported(format!(
            "norm-equation search for p = {p} exceeds the bound {MAX_PRIME}"
        )));
    }
    let d = ring.d() as u128;
    if ring.omega_rule() == crate::ring::OmegaRule::HalfInteger {
        // 4p = X^2 + d Y^2 with X = 2a + b, Y = b.
        let mut y: u128 = 0;
        while d * y * y <= 4 * p {
            let rest = 4 * p - d * y * y;
            let x = isqrt_u128(rest);
            if x * x == rest && (x + y).is_multiple_of(2) {
                let (xi, yi) = (x as i128, y as i128);
                return Ok(Some(ring.elem((xi - yi) / 2, yi)));
            }
            y += 1;
        }
    } else {
        let mut b: u128 = 0;
        while d * b * b <= p {
            let rest = p - d * b * b;
            let a = isqrt_u128(rest);
            if a * a == rest {
                return Ok(Some(ring.elem(a as i128, b as i128)));
            }
            b += 1;
        }
    }
    Ok(None)
}

/// Prime factorization of `u O_d` into prime elements.
pub fn factor_modulus(u: &QuadInt) -> Result<ResidueRing> {
    let ring = u.ring();
    if u.is_zero() || u.is_unit() {
        return Err(Error::usage(format!("modulus {u} must be a nonzero non-unit")));
    }
    let order = u.norm();
    let n = order
        .to_u128()
        .ok_or_else(|| Error::Unsupported("N(u) exceeds 128 bits".into()))?;
    let mut rest = u.clone();
    let mut factors = Vec::new();
    for &p in factorize128(n).keys() {
        let kind = splitting(ring, p);
        let pb = BigInt::from(p);
        let primes: Vec<(QuadInt, BigInt)> = match kind {
            Splitting::Inert => vec![(ring.int(p as i128), &pb * &pb)],
            Splitting::Ramified => {
                let pi = element_of_norm(ring, p)?
                    .ok_or_else(|| Error::invariant(format!("no element of norm {p}")))?;
                vec![(pi.canonical_associate(), pb.clone())]
            }
            Splitting::Split => {
                let pi = element_of_norm(ring, p)?
                    .ok_or_else(|| Error::invariant(format!("no element of norm {p}")))?;
                let mut v = vec![pi.canonical_associate(), pi.conj().canonical_associate()];
                v.sort_by(|a, b| a.lex_cmp(b));
                v.into_iter().map(|x| (x, pb.clone())).collect()
            }
        };
        for (pi, size) in primes {
            let mut e = 0;
            while let Some(q) = rest.exact_div(&pi)? {
                rest = q;
                e += 1;
            }
            if e > 0 {
                factors.push(PrimePower {
                    pi,
                    e,
                    residue_size: size,
                    rational_prime: pb.clone(),
                    splitting: kind,
                });
            }
        }
    }
    if !rest.is_unit() {
        return Err(Error::invariant(format!("cofactor {rest} of {u} is not a unit")));
    }
    Ok(ResidueRing {
        u: u.clone(),
        factors,
        unit: rest,
        order,
    })
}

/// `|SL_2(O_d / u O_d)| = prod N(P)^(3e-2) (N(P)^2 - 1)`.
pub fn sl2_order(r: &ResidueRing) -> BigInt {
    r.factors.iter().fold(BigInt::one(), |acc, f| {
        let q = &f.residue_size;
        acc * q.pow(3 * f.e - 2) * (q * q - 1u32)
    })
}

/// Counts `(p, q, r, s)` with `ps - qr = 1` in `O_d / u O_d` directly.
pub fn sl2_order_brute_force(u: &QuadInt) -> Result<BigInt> {
    let m = Modulus::new(u)?;
    let n = m
        .size()
        .to_usize()
        .filter(|&n| n <= 4096)
        .ok_or_else(|| Error::usage("brute-force count needs N(u) <= 4096"))?;
    let reps = m.representatives();
    let mul: Vec<usize> = (0..n * n)
        .map(|k| m.index(&(&reps[k / n] * &reps[k % n])))
        .collect();
    let mut cnt = vec![0u64; n];
    for &x in &mul {
        cnt[x] += 1;
    }
    let one = u.ring().one();
    let mut total: u64 = 0;
    for &ps in &mul {
        total += cnt[m.index(&(&reps[ps] - &one))];
    }
    Ok(BigInt::from(total))
}

/// The same count with four nested loops, for tiny moduli.
pub fn sl2_order_naive(u: &QuadInt) -> Result<u64> {
    let m = Modulus::new(u)?;
    let reps = m.representatives();
    if reps.len() > 16 {
        return Err(Error::usage("naive count needs N(u) <= 16"));
    }
    let one = u.ring().one();
    let mut total = 0;
    for p in &reps {
        for q in &reps {
            for r in &reps {
                for s in &reps {
                    if m.congruent(&(&(p * s) - &(q * r)), &one) {
                        total += 1;
                    }
                }
            }
        }
    }
    Ok(total)
}

/// Whether `p` is a rational prime.
pub fn is_rational_prime(p: &BigInt) -> bool {
    p.to_u128().is_some_and(|n| {
        n >= 2 && {
            let f = factorize128(n);
            f.len() == 1 && f.values().all(|&e| e == 1)
        }
    })
}

/// Whether `x` generates a prime ideal: either `N(x)` is a rational prime,
/// or `N(x) = p^2` for a rational prime `p` that stays inert.
pub fn is_prime_element(x: &QuadInt) -> bool {
    let n = x.norm();
    if is_rational_prime(&n) {
        return true;
    }
    let Some(nn) = n.to_u128() else { return false };
    exact_sqrt_u128(nn)
        .is_some_and(|p| is_rational_prime(&BigInt::from(p)) && splitting(x.ring(), p) == Splitting::Inert)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> Ring {
        Ring::new(1).unwrap()
    }

    #[test]
    fn factor_examples() {
        let r = g();
        let f = factor_modulus(&r.int(2)).unwrap();
        assert_eq!(f.factors.len(), 1);
        assert_eq!(f.factors[0].pi, r.elem(1, 1));
        assert_eq!(f.factors[0].e, 2);
        assert_eq!(f.factors[0].residue_size, BigInt::from(2));
        let f = factor_modulus(&r.elem(2, 1)).unwrap();
        assert_eq!(f.factors.len(), 1);
        assert_eq!(f.factors[0].residue_size, BigInt::from(5));
        let f = factor_modulus(&r.elem(0, 5)).unwrap();
        assert_eq!(f.factors.len(), 2);
        assert!(f.factors.iter().all(|x| x.e == 1));
        let mut prod = f.unit.clone();
        for x in &f.factors {
            prod = &prod * &x.pi.pow(x.e);
        }
        assert_eq!(prod, r.elem(0, 5));
        assert!(factor_modulus(&r.one()).is_err());
        assert!(factor_modulus(&r.zero()).is_err());
    }

    #[test]
    fn factorizations_reassemble() {
        for d in crate::ring::CLASS_NUMBER_ONE {
            let ring = Ring::new(d).unwrap();
            for u in ring.lattice_ball(300).into_iter().filter(|u| !u.is_zero() && !u.is_unit()) {
                let f = factor_modulus(&u).unwrap();
                let mut prod = f.unit.clone();
                let mut sq = BigInt::one();
                for x in &f.factors {
                    assert!(is_prime_element(&x.pi), "d={d} pi={}", x.pi);
                    prod = &prod * &x.pi.pow(x.e);
                    sq *= x.residue_size.pow(2 * x.e);
                }
                assert_eq!(prod, u);
                assert_eq!(sq, &f.order * &f.order);
            }
        }
    }

    #[test]
    fn sl2_examples() {
        let r = g();
        let ord = |u: QuadInt| sl2_order(&factor_modulus(&u).unwrap());
        assert_eq!(ord(r.elem(1, 1)), BigInt::from(6));
        assert_eq!(ord(r.int(2)), BigInt::from(48));
        assert_eq!(ord(r.elem(2, 1)), BigInt::from(120));
        assert_eq!(ord(r.int(5)), BigInt::from(14400));
        assert_eq!(sl2_order_naive(&r.int(2)).unwrap(), 48);
        assert_eq!(sl2_order_brute_force(&r.int(2)).unwrap(), BigInt::from(48));
    }

    #[test]
    fn splitting_matches_norm_search() {
        for d in crate::ring::CLASS_NUMBER_ONE {
            let ring = Ring::new(d).unwrap();
            for p in [2u128, 3, 5, 7, 11, 13, 17, 19, 23, 43, 67, 163, 1009] {
                let found = element_of_norm(ring, p).unwrap().is_some();
                assert_eq!(found, splitting(ring, p) != Splitting::Inert, "d={d} p={p}");
            }
        }
    }
}
