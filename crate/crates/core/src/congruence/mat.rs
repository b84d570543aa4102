use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{QuadInt, Ring};

/// An element `[[p, q], [r, s]]` of `SL_2(O_d)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mat2 {
    p: QuadInt,
    q: QuadInt,
    r: QuadInt,
    s: QuadInt,
}

impl Mat2 {
    /// Builds a matrix, rejecting determinants other than 1.
    pub fn new(p: QuadInt, q: QuadInt, r: QuadInt, s: QuadInt) -> Result<Mat2> {
        let ring = p.ring();
        if [&q, &r, &s].iter().any(|x| x.ring() != ring) {
            return Err(Error::usage("matrix entries live in different rings"));
        }
        let det = &(&p * &s) - &(&q * &r);
        if !det.is_one() {
            return Err(Error::usage(format!("determinant is {det}, not 1")));
        }
        Ok(Mat2 { p, q, r, s })
    }

    pub(crate) fn new_unchecked(p: QuadInt, q: QuadInt, r: QuadInt, s: QuadInt) -> Mat2 {
        debug_assert!((&(&p * &s) - &(&q * &r)).is_one());
        Mat2 { p, q, r, s }
    }

    pub fn from_ints(ring: Ring, e: [(i64, i64); 4]) -> Result<Mat2> {
        let [p, q, r, s] = e.map(|(a, b)| ring.elem(a, b));
        Mat2::new(p, q, r, s)
    }

    pub fn identity(ring: Ring) -> Mat2 {
        Mat2::new_unchecked(ring.one(), ring.zero(), ring.zero(), ring.one())
    }

    /// `[[0, -1], [1, 0]]`.
    pub fn s_gen(ring: Ring) -> Mat2 {
        Mat2::new_unchecked(ring.zero(), -ring.one(), ring.one(), ring.zero())
    }

    /// `[[1, x], [0, 1]]`.
    pub fn upper(x: QuadInt) -> Mat2 {
        let ring = x.ring();
        Mat2::new_unchecked(ring.one(), x, ring.zero(), ring.one())
    }

    /// `[[1, 0], [x, 1]]`.
    pub fn lower(x: QuadInt) -> Mat2 {
        let ring = x.ring();
        Mat2::new_unchecked(ring.one(), ring.zero(), x, ring.one())
    }

    /// `S`, `T_1`, `T_w` and their inverses.
    pub fn standard_generators(ring: Ring) -> Vec<Mat2> {
        let s = Mat2::s_gen(ring);
        let t1 = Mat2::upper(ring.one());
        let tw = Mat2::upper(ring.omega());
        vec![
            s.clone(),
            s.inverse(),
            t1.clone(),
            t1.inverse(),
            tw.clone(),
            tw.inverse(),
        ]
    }

    pub fn ring(&self) -> Ring {
        self.p.ring()
    }

    pub fn p(&self) -> &QuadInt {
        &self.p
    }

    pub fn q(&self) -> &QuadInt {
        &self.q
    }

    pub fn r(&self) -> &QuadInt {
        &self.r
    }

    pub fn s(&self) -> &QuadInt {
        &self.s
    }

    pub fn entries(&self) -> [&QuadInt; 4] {
        [&self.p, &self.q, &self.r, &self.s]
    }

    pub fn trace(&self) -> QuadInt {
        &self.p + &self.s
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            p: &(&self.p * &o.p) + &(&self.q * &o.r),
            q: &(&self.p * &o.q) + &(&self.q * &o.s),
            r: &(&self.r * &o.p) + &(&self.s * &o.r),
            s: &(&self.r * &o.q) + &(&self.s * &o.s),
        }
    }

    pub fn inverse(&self) -> Mat2 {
        Mat2 {
            p: self.s.clone(),
            q: -&self.q,
            r: -&self.r,
            s: self.p.clone(),
        }
    }

    pub fn neg(&self) -> Mat2 {
        Mat2 {
            p: -&self.p,
            q: -&self.q,
            r: -&self.r,
            s: -&self.s,
        }
    }

    /// `M^n` for any integer `n`.
    pub fn pow(&self, n: i64) -> Mat2 {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Mat2::identity(self.ring());
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        acc
    }

    /// `g^{-1} M g`.
    pub fn conjugate_by(&self, g: &Mat2) -> Mat2 {
        g.inverse().mul(self).mul(g)
    }

    pub fn is_identity(&self) -> bool {
        self.p.is_one() && self.q.is_zero() && self.r.is_zero() && self.s.is_one()
    }

    pub fn max_entry_norm(&self) -> BigInt {
        self.entries()
            .iter()
            .map(|x| x.norm())
            .max()
            .expect("four entries")
    }

    pub fn lex_cmp(&self, o: &Mat2) -> std::cmp::Ordering {
        self.entries()
            .iter()
            .zip(o.entries())
            .map(|(x, y)| x.lex_cmp(y))
            .find(|c| c.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.p, self.q, self.r, self.s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_laws() {
        let g = Ring::new(1).unwrap();
        let gens = Mat2::standard_generators(g);
        for a in &gens {
            assert!(a.mul(&a.inverse()).is_identity());
            for b in &gens {
                let ab = a.mul(b);
                assert_eq!(ab.inverse(), b.inverse().mul(&a.inverse()));
            }
        }
        let s = Mat2::s_gen(g);
        assert_eq!(s.pow(2), Mat2::identity(g).neg());
        assert!(s.pow(4).is_identity());
        let t = Mat2::upper(g.omega());
        assert_eq!(t.pow(-3), Mat2::upper(g.elem(0, -3)));
    }

    #[test]
    fn rejects_bad_determinant() {
        let g = Ring::new(1).unwrap();
        assert!(Mat2::from_ints(g, [(2, 0), (0, 0), (0, 0), (1, 0)]).is_err());
        let m = Mat2::from_ints(g, [(0, 3), (0, 5), (0, 5), (0, 8)]).unwrap();
        assert_eq!(m.trace(), g.elem(0, 11));
    }
}
