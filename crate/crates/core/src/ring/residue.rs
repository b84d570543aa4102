use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use super::{QuadInt, Ring};
use crate::error::{Error, Result};

/// The ideal `u O_d`, with a Hermite basis `{(A, 0), (c, B)}` of the
/// coordinate lattice so that `{a + b w : 0 <= a < A, 0 <= b < B}` is a
/// complete residue system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Modulus {
    u: QuadInt,
    big_a: BigInt,
    big_b: BigInt,
    w2: (BigInt, BigInt),
}

impl Modulus {
    pub fn new(u: &QuadInt) -> Result<Modulus> {
        if u.is_zero() {
            return Err(Error::usage("modulus must be nonzero"));
        }
        let ring = u.ring();
        let uw = u * &ring.omega();
        let (b1, b2) = (u.b().clone(), uw.b().clone());
        let eg = b1.extended_gcd(&b2);
        let (mut g, mut s, mut t) = (eg.gcd, eg.x, eg.y);
        if g.is_negative() {
            g = -g;
            s = -s;
            t = -t;
        }
        let w2a = &s * u.a() + &t * uw.a();
        let norm = u.norm();
        let big_a = &norm / &g;
        debug_assert!((&big_a * &g) == norm);
        let w2a = w2a.mod_floor(&big_a);
        Ok(Modulus {
            u: u.clone(),
            big_a,
            w2: (w2a, g.clone()),
            big_b: g,
        })
    }

    pub fn ring(&self) -> Ring {
        self.u.ring()
    }

    pub fn modulus(&self) -> &QuadInt {
        &self.u
    }

    /// Number of residue classes, `N(u)`.
    pub fn size(&self) -> BigInt {
        &self.big_a * &self.big_b
    }

    /// The box dimensions `(A, B)`.
    pub fn shape(&self) -> (&BigInt, &BigInt) {
        (&self.big_a, &self.big_b)
    }

    /// Canonical representative in the Hermite box.
    pub fn reduce(&self, x: &QuadInt) -> QuadInt {
        assert_eq!(x.ring(), self.ring(), "ring mismatch in reduce");
        let k = x.b().div_floor(&self.big_b);
        let a = (x.a() - &k * &self.w2.0).mod_floor(&self.big_a);
        let b = x.b() - &k * &self.w2.1;
        QuadInt::new(self.ring(), a, b)
    }

    pub fn is_zero(&self, x: &QuadInt) -> bool {
        self.reduce(x).is_zero()
    }

    pub fn congruent(&self, x: &QuadInt, y: &QuadInt) -> bool {
        self.is_zero(&(x - y))
    }

    /// Position of `x mod u` in `0..N(u)`.
    pub fn index(&self, x: &QuadInt) -> usize {
        let r = self.reduce(x);
        let idx = r.b() * &self.big_a + r.a();
        idx.to_usize().expect("residue index fits in usize")
    }

    pub fn from_index(&self, idx: usize) -> QuadInt {
        let (b, a) = BigInt::from(idx).div_rem(&self.big_a);
        QuadInt::new(self.ring(), a, b)
    }

    /// All canonical representatives, ordered by [`Modulus::index`].
    pub fn representatives(&self) -> Vec<QuadInt> {
        let n = self.size().to_usize().expect("modulus too large to enumerate");
        (0..n).map(|i| self.from_index(i)).collect()
    }

    /// The representative of `x + u O_d` of least norm; ties go to the
    /// lexicographically largest `(a, b)`.
    pub fn norm_minimal(&self, x: &QuadInt) -> QuadInt {
        let ring = self.ring();
        let num = x * &self.u.conj();
        let n = self.u.norm();
        let fa = num.a().div_floor(&n);
        let fb = num.b().div_floor(&n);
        let mut best: Option<(BigInt, QuadInt)> = None;
        for da in -2i32..=3 {
            for db in -2i32..=3 {
                let q = QuadInt::new(ring, &fa + da, &fb + db);
                let r = x - &(&q * &self.u);
                let rn = r.norm();
                let better = match &best {
                    None => true,
                    Some((bn, br)) => {
                        rn < *bn || (rn == *bn && r.lex_cmp(br) == std::cmp::Ordering::Greater)
                    }
                };
                if better {
                    best = Some((rn, r));
                }
            }
        }
        best.expect("window is nonempty").1
    }

    /// Multiplicative inverse mod `u`, when it exists.
    pub fn inverse(&self, x: &QuadInt) -> Option<QuadInt> {
        let n = self.size();
        if n.is_one() {
            return Some(self.ring().zero());
        }
        let n_us = n.to_usize()?;
        let xr = self.reduce(x);
        let one = self.ring().one();
        (0..n_us)
            .map(|i| self.from_index(i))
            .find(|y| self.congruent(&(&xr * y), &one))
    }
}
