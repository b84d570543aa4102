//! Thin wrapper over `astro-float` for the handful of real and complex
//! operations the length and unit computations need.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign, Word};
use num_bigint::BigInt;

use crate::ring::{QuadInt, Ring};

/// Working precision in bits (about 57 decimal digits).
pub const PREC: usize = 192;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants"));
}

fn with_cc<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

#[derive(Clone, Debug)]
pub struct Real {
    v: BigFloat,
    p: usize,
}

impl Real {
    fn wrap(v: BigFloat, p: usize) -> Real {
        Real { v, p }
    }

    pub fn precision(&self) -> usize {
        self.p
    }

    pub fn from_f64(x: f64, p: usize) -> Real {
        Real::wrap(BigFloat::from_f64(x, p), p)
    }

    pub fn from_i64(x: i64, p: usize) -> Real {
        Real::wrap(BigFloat::from_i64(x, p), p)
    }

    /// Exact conversion; the result carries precision `p` for later
    /// operations.
    pub fn from_bigint(x: &BigInt, p: usize) -> Real {
        let (sign, digits) = x.to_u64_digits();
        if digits.is_empty() {
            return Real::from_i64(0, p);
        }
        let words: Vec<Word> = digits.iter().map(|&w| w as Word).collect();
        let s = if sign == num_bigint::Sign::Minus {
            Sign::Neg
        } else {
            Sign::Pos
        };
        let e = (words.len() * Word::BITS as usize) as i32;
        Real::wrap(BigFloat::from_words(&words, s, e), p)
    }

    pub fn parse(s: &str, p: usize) -> Real {
        Real::wrap(with_cc(|cc| BigFloat::parse(s, Radix::Dec, p, RM, cc)), p)
    }

    pub fn pi(p: usize) -> Real {
        Real::wrap(with_cc(|cc| cc.pi(p, RM)), p)
    }

    pub fn zero(p: usize) -> Real {
        Real::from_i64(0, p)
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.v.is_zero() && self.v.is_negative()
    }

    pub fn abs(&self) -> Real {
        Real::wrap(self.v.abs(), self.p)
    }

    pub fn sqrt(&self) -> Real {
        Real::wrap(self.v.sqrt(self.p, RM), self.p)
    }

    pub fn ln(&self) -> Real {
        Real::wrap(with_cc(|cc| self.v.ln(self.p, RM, cc)), self.p)
    }

    pub fn exp(&self) -> Real {
        Real::wrap(with_cc(|cc| self.v.exp(self.p, RM, cc)), self.p)
    }

    pub fn cos(&self) -> Real {
        Real::wrap(with_cc(|cc| self.v.cos(self.p, RM, cc)), self.p)
    }

    pub fn sin(&self) -> Real {
        Real::wrap(with_cc(|cc| self.v.sin(self.p, RM, cc)), self.p)
    }

    pub fn cosh(&self) -> Real {
        Real::wrap(with_cc(|cc| self.v.cosh(self.p, RM, cc)), self.p)
    }

    pub fn sinh(&self) -> Real {
        Real::wrap(with_cc(|cc| self.v.sinh(self.p, RM, cc)), self.p)
    }

    /// `acosh` for arguments `>= 1`.
    pub fn acosh(&self) -> Real {
        Real::wrap(with_cc(|cc| self.v.acosh(self.p, RM, cc)), self.p)
    }

    pub fn atan(&self) -> Real {
        Real::wrap(with_cc(|cc| self.v.atan(self.p, RM, cc)), self.p)
    }

    pub fn powi(&self, n: usize) -> Real {
        Real::wrap(self.v.powi(n, self.p, RM), self.p)
    }

    /// Four-quadrant arctangent of `y / x` in `(-pi, pi]`.
    pub fn atan2(y: &Real, x: &Real) -> Real {
        let p = y.p.max(x.p);
        if x.is_zero() {
            let half = &Real::pi(p) / &Real::from_i64(2, p);
            return match y.cmp_real(&Real::zero(p)) {
                Ordering::Less => -&half,
                Ordering::Greater => half,
                Ordering::Equal => Real::zero(p),
            };
        }
        let base = (y / x).atan();
        if !x.is_negative() {
            base
        } else if y.is_negative() {
            &base - &Real::pi(p)
        } else {
            &base + &Real::pi(p)
        }
    }

    pub fn cmp_real(&self, other: &Real) -> Ordering {
        match self.v.cmp(&other.v) {
            Some(c) if c < 0 => Ordering::Less,
            Some(c) if c > 0 => Ordering::Greater,
            _ => Ordering::Equal,
        }
    }

    /// Nearest `f64` (within one unit in the last place).
    pub fn to_f64(&self) -> f64 {
        if self.v.is_zero() {
            return 0.0;
        }
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.v.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let (words, _, sign, e, _) = self.v.as_raw_parts().expect("finite value");
        let top = words[words.len() - 1] as f64;
        let next = if words.len() > 1 {
            words[words.len() - 2] as f64
        } else {
            0.0
        };
        let frac = top * 2f64.powi(-64) + next * 2f64.powi(-128);
        let half = e / 2;
        let x = frac * 2f64.powi(half) * 2f64.powi(e - half);
        if sign == Sign::Neg {
            -x
        } else {
            x
        }
    }

    /// Decimal rendering, for diagnostics.
    pub fn to_decimal(&self) -> String {
        with_cc(|cc| self.v.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into())
    }
}

macro_rules! real_binop {
    ($tr:ident, $m:ident) => {
        impl<'a> $tr<&'a Real> for &'a Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                let p = self.p.max(rhs.p);
                Real::wrap(self.v.$m(&rhs.v, p, RM), p)
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                (&self).$m(&rhs)
            }
        }
    };
}

real_binop!(Add, add);
real_binop!(Sub, sub);
real_binop!(Mul, mul);
real_binop!(Div, div);

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::wrap(BigFloat::neg(&self.v), self.p)
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        -&self
    }
}

#[derive(Clone, Debug)]
pub struct Cplx {
    pub re: Real,
    pub im: Real,
}

impl Cplx {
    pub fn new(re: Real, im: Real) -> Cplx {
        Cplx { re, im }
    }

    pub fn from_f64(re: f64, im: f64, p: usize) -> Cplx {
        Cplx::new(Real::from_f64(re, p), Real::from_f64(im, p))
    }

    pub fn real(x: Real) -> Cplx {
        let p = x.p;
        Cplx::new(x, Real::zero(p))
    }

    /// Embedding with `Im w > 0`.
    pub fn from_quadint(x: &QuadInt, p: usize) -> Cplx {
        let (wr, wi) = omega_embedding(x.ring(), p);
        let a = Real::from_bigint(x.a(), p);
        let b = Real::from_bigint(x.b(), p);
        Cplx::new(&a + &(&b * &wr), &b * &wi)
    }

    pub fn precision(&self) -> usize {
        self.re.p.max(self.im.p)
    }

    pub fn norm_sqr(&self) -> Real {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn abs(&self) -> Real {
        self.norm_sqr().sqrt()
    }

    pub fn arg(&self) -> Real {
        Real::atan2(&self.im, &self.re)
    }

    pub fn scale(&self, k: &Real) -> Cplx {
        Cplx::new(&self.re * k, &self.im * k)
    }

    /// Principal square root: `Re >= 0`, and `Im >= 0` on the negative axis.
    pub fn sqrt(&self) -> Cplx {
        let p = self.precision();
        if self.re.is_zero() && self.im.is_zero() {
            return Cplx::real(Real::zero(p));
        }
        let two = Real::from_i64(2, p);
        let r = self.abs();
        if !self.re.is_negative() {
            let s = ((&r + &self.re) / two.clone()).sqrt();
            let t = &self.im / &(&two * &s);
            Cplx::new(s, t)
        } else {
            let t = ((&r - &self.re) / two.clone()).sqrt();
            let t = if self.im.is_negative() { -t } else { t };
            let s = &self.im / &(&two * &t);
            Cplx::new(s, t)
        }
    }

    /// Principal logarithm, imaginary part in `(-pi, pi]`.
    pub fn ln(&self) -> Cplx {
        Cplx::new(self.abs().ln(), self.arg())
    }

    /// Principal `acosh(w) = ln(w + sqrt(w - 1) sqrt(w + 1))`, real part `>= 0`.
    pub fn acosh(&self) -> Cplx {
        let p = self.precision();
        let one = Cplx::real(Real::from_i64(1, p));
        let a = (self - &one).sqrt();
        let b = (self + &one).sqrt();
        (self + &(&a * &b)).ln()
    }

    pub fn cosh(&self) -> Cplx {
        Cplx::new(&self.re.cosh() * &self.im.cos(), &self.re.sinh() * &self.im.sin())
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

/// `w` as `(re, im)` at precision `p`.
pub fn omega_embedding(ring: Ring, p: usize) -> (Real, Real) {
    let s = Real::from_i64(ring.d() as i64, p).sqrt();
    if ring.d() % 4 == 3 {
        let two = Real::from_i64(2, p);
        (Real::from_f64(0.5, p), &s / &two)
    } else {
        (Real::zero(p), s)
    }
}

impl<'a> Add<&'a Cplx> for &'a Cplx {
    type Output = Cplx;
    fn add(self, rhs: &Cplx) -> Cplx {
        Cplx::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'a> Sub<&'a Cplx> for &'a Cplx {
    type Output = Cplx;
    fn sub(self, rhs: &Cplx) -> Cplx {
        Cplx::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'a> Mul<&'a Cplx> for &'a Cplx {
    type Output = Cplx;
    fn mul(self, rhs: &Cplx) -> Cplx {
        Cplx::new(
            &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
            &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
        )
    }
}

impl<'a> Div<&'a Cplx> for &'a Cplx {
    type Output = Cplx;
    fn div(self, rhs: &Cplx) -> Cplx {
        let den = rhs.norm_sqr();
        let re = &(&self.re * &rhs.re) + &(&self.im * &rhs.im);
        let im = &(&self.im * &rhs.re) - &(&self.re * &rhs.im);
        Cplx::new(&re / &den, &im / &den)
    }
}

impl Neg for &Cplx {
    type Output = Cplx;
    fn neg(self) -> Cplx {
        Cplx::new(-&self.re, -&self.im)
    }
}
