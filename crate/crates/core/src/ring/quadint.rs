use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Ring;
use crate::error::{Error, Result};

/// An element `a + b w` of `O_d`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadInt {
    ring: Ring,
    a: BigInt,
    b: BigInt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Conj,
    Neg,
}

impl QuadInt {
    pub fn new(ring: Ring, a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        QuadInt {
            ring,
            a: a.into(),
            b: b.into(),
        }
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn coords_i128(&self) -> Option<(i128, i128)> {
        Some((self.a.to_i128()?, self.b.to_i128()?))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn is_unit(&self) -> bool {
        self.norm().is_one()
    }

    /// True iff the element is a rational integer.
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// `N(x) = x conj(x)`.
    pub fn norm(&self) -> BigInt {
        let (a, b) = (&self.a, &self.b);
        if self.ring.half() {
            a * a + a * b + b * b * BigInt::from((1 + self.ring.d()) / 4)
        } else {
            a * a + b * b * BigInt::from(self.ring.d())
        }
    }

    pub fn conj(&self) -> Self {
        if self.ring.half() {
            // conj(w) = 1 - w
            QuadInt::new(self.ring, &self.a + &self.b, -&self.b)
        } else {
            QuadInt::new(self.ring, self.a.clone(), -&self.b)
        }
    }

    /// Ring operation with an explicit ring-compatibility check.
    pub fn checked_arith(&self, other: &QuadInt, op: ArithOp) -> Result<QuadInt> {
        if self.ring != other.ring {
            return Err(Error::usage(format!(
                "operands live in different rings ({} and {})",
                self.ring, other.ring
            )));
        }
        Ok(match op {
            ArithOp::Add => self + other,
            ArithOp::Sub => self - other,
            ArithOp::Mul => self * other,
            ArithOp::Conj => self.conj(),
            ArithOp::Neg => -self,
        })
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        QuadInt::new(self.ring, &self.a * k, &self.b * k)
    }

    /// Exact division by a rational integer, if both coordinates divide.
    pub fn div_int(&self, k: &BigInt) -> Option<Self> {
        if k.is_zero() {
            return None;
        }
        let (qa, ra) = self.a.div_rem(k);
        let (qb, rb) = self.b.div_rem(k);
        (ra.is_zero() && rb.is_zero()).then(|| QuadInt::new(self.ring, qa, qb))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = self.ring.one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// The exact quotient `self / divisor` when it lies in `O_d`.
    ///
    /// Decided on the coordinates of `self * conj(divisor)`, which must both be
    /// divisible by `N(divisor)`.
    pub fn exact_div(&self, divisor: &QuadInt) -> Result<Option<QuadInt>> {
        if divisor.is_zero() {
            return Err(Error::usage("division by zero"));
        }
        if self.ring != divisor.ring {
            return Err(Error::usage("operands live in different rings"));
        }
        let num = self * &divisor.conj();
        Ok(num.div_int(&divisor.norm()))
    }

    pub fn divides(&self, other: &QuadInt) -> bool {
        if self.is_zero() {
            return other.is_zero();
        }
        matches!(other.exact_div(self), Ok(Some(_)))
    }

    /// `q` minimizing `N(self - q divisor)`; ties resolved towards the
    /// lexicographically smallest remainder.
    pub fn nearest_quotient(&self, divisor: &QuadInt) -> QuadInt {
        assert!(!divisor.is_zero(), "nearest_quotient by zero");
        let num = self * &divisor.conj();
        let n = divisor.norm();
        let fa = num.a.div_floor(&n);
        let fb = num.b.div_floor(&n);
        let mut best: Option<(BigInt, QuadInt, QuadInt)> = None;
        for da in -1i32..=2 {
            for db in -1i32..=2 {
                let q = QuadInt::new(self.ring, &fa + da, &fb + db);
                let r = self - &(&q * divisor);
                let rn = r.norm();
                let better = match &best {
                    None => true,
                    Some((bn, _, br)) => rn < *bn || (rn == *bn && r.lex_cmp(br) == Ordering::Less),
                };
                if better {
                    best = Some((rn, q, r));
                }
            }
        }
        best.expect("window is nonempty").1
    }

    /// Exact square root, if one exists in `O_d`.
    ///
    /// Works on the coordinates directly: `N(w)` must be the integer square
    /// root of `N(z)`, and then each coordinate of `w` is an integer square
    /// root fixed up to sign.
    pub fn sqrt(&self) -> Option<QuadInt> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let nz = self.norm();
        let n = exact_sqrt(&nz)?;
        let d = BigInt::from(self.ring.d());
        let two = BigInt::from(2);
        let candidates: Vec<QuadInt> = if self.ring.half() {
            // 2w = X + Y sqrt(-d) with X = 2a + b, Y = b.
            let x2: BigInt = &n * 2 + &self.a * 2 + &self.b;
            let dy2: BigInt = &n * 2 - &self.a * 2 - &self.b;
            let x = exact_sqrt(&x2)?;
            let (y2, r) = dy2.div_rem(&d);
            if !r.is_zero() {
                return None;
            }
            let y = exact_sqrt(&y2)?;
            let mut out = Vec::new();
            for sx in [1, -1] {
                for sy in [1, -1] {
                    let xx: BigInt = &x * sx;
                    let yy: BigInt = &y * sy;
                    let diff: BigInt = &xx - &yy;
                    if diff.is_even() {
                        out.push(QuadInt::new(self.ring, diff / &two, yy));
                    }
                }
            }
            out
        } else {
            let a2 = &n + &self.a;
            let db2 = &n - &self.a;
            if a2.is_odd() || db2.is_odd() {
                return None;
            }
            let a = exact_sqrt(&(a2 / &two))?;
            let (b2, r) = (db2 / &two).div_rem(&d);
            if !r.is_zero() {
                return None;
            }
            let b = exact_sqrt(&b2)?;
            let mut out = Vec::new();
            for sa in [1, -1] {
                for sb in [1, -1] {
                    out.push(QuadInt::new(self.ring, &a * sa, &b * sb));
                }
            }
            out
        };
        candidates
            .into_iter()
            .filter(|w| &(w * w) == self)
            .max_by(|x, y| x.lex_cmp(y))
    }

    /// Lexicographic comparison on `(a, b)`.
    pub fn lex_cmp(&self, other: &QuadInt) -> Ordering {
        (&self.a, &self.b).cmp(&(&other.a, &other.b))
    }

    /// The associate maximizing `(a, b)` lexicographically.
    pub fn canonical_associate(&self) -> QuadInt {
        self.ring
            .units()
            .iter()
            .map(|u| self * u)
            .max_by(|x, y| x.lex_cmp(y))
            .expect("unit group is nonempty")
    }

    /// Complex value under the embedding with `Im w > 0`.
    pub fn to_complex(&self) -> Complex64 {
        let (wr, wi) = self.ring.omega_complex();
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        Complex64::new(a + b * wr, b * wi)
    }
}

pub(crate) fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.sign() == Sign::Minus {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Euclidean gcd; only defined for the five norm-Euclidean rings.
pub fn gcd(x: &QuadInt, y: &QuadInt) -> Result<QuadInt> {
    let ring = x.ring;
    if !ring.is_euclidean() {
        return Err(Error::Unsupported(format!(
            "gcd in non-Euclidean {ring} is not implemented"
        )));
    }
    let (mut p, mut q) = (x.clone(), y.clone());
    while !q.is_zero() {
        let quot = p.nearest_quotient(&q);
        let r = &p - &(&quot * &q);
        if r.norm() >= q.norm() {
            return Err(Error::invariant("Euclidean step failed to decrease the norm"));
        }
        p = q;
        q = r;
    }
    Ok(p.canonical_associate())
}

/// Content `g` of a list, with `(xs) = (g)`; `g` is a unit iff the list
/// generates the whole ring.
pub fn content(xs: &[QuadInt]) -> Result<QuadInt> {
    let Some(first) = xs.first() else {
        return Err(Error::usage("content of an empty list"));
    };
    if xs.iter().all(QuadInt::is_zero) {
        return Err(Error::usage("content of an all-zero list"));
    }
    let mut g = first.clone();
    for x in &xs[1..] {
        g = gcd(&g, x)?;
    }
    Ok(g.canonical_associate())
}

fn same_ring(x: &QuadInt, y: &QuadInt) {
    assert!(
        x.ring == y.ring,
        "ring mismatch: {} vs {}",
        x.ring,
        y.ring
    );
}

impl<'a> Add<&'a QuadInt> for &'a QuadInt {
    type Output = QuadInt;
    fn add(self, rhs: &QuadInt) -> QuadInt {
        same_ring(self, rhs);
        QuadInt::new(self.ring, &self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl<'a> Sub<&'a QuadInt> for &'a QuadInt {
    type Output = QuadInt;
    fn sub(self, rhs: &QuadInt) -> QuadInt {
        same_ring(self, rhs);
        QuadInt::new(self.ring, &self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl<'a> Mul<&'a QuadInt> for &'a QuadInt {
    type Output = QuadInt;
    fn mul(self, rhs: &QuadInt) -> QuadInt {
        same_ring(self, rhs);
        let (c0, c1) = self.ring.omega_square();
        let ac = &self.a * &rhs.a;
        let be = &self.b * &rhs.b;
        let cross = &self.a * &rhs.b + &self.b * &rhs.a;
        let re = ac + &be * c0;
        let om = if c1 == 0 { cross } else { cross + &be };
        QuadInt::new(self.ring, re, om)
    }
}

impl Neg for &QuadInt {
    type Output = QuadInt;
    fn neg(self) -> QuadInt {
        QuadInt::new(self.ring, -&self.a, -&self.b)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<QuadInt> for QuadInt {
            type Output = QuadInt;
            fn $m(self, rhs: QuadInt) -> QuadInt {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a QuadInt> for QuadInt {
            type Output = QuadInt;
            fn $m(self, rhs: &QuadInt) -> QuadInt {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<QuadInt> for &'a QuadInt {
            type Output = QuadInt;
            fn $m(self, rhs: QuadInt) -> QuadInt {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for QuadInt {
    type Output = QuadInt;
    fn neg(self) -> QuadInt {
        -&self
    }
}

impl std::fmt::Debug for QuadInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} [d={}]", self, self.ring.d())
    }
}

impl std::fmt::Display for QuadInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*w", self.b),
            (false, false) => {
                if self.b.is_negative() {
                    write!(f, "{}-{}*w", self.a, -&self.b)
                } else {
                    write!(f, "{}+{}*w", self.a, self.b)
                }
            }
        }
    }
}
