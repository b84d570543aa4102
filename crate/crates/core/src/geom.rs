//! Trace classification and translation lengths of elements of `SL_2(C)`.

use std::cmp::Ordering;

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precise::{Cplx, Real, PREC};
use crate::ring::QuadInt;

/// Traces this close to `±2` count as parabolic.
pub const PARABOLIC_GUARD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IsometryClass {
    Elliptic,
    Parabolic,
    Loxodromic,
}

/// `ell + i theta` with `cosh((ell + i theta)/2) = ±tr/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexLength {
    pub ell: f64,
    pub theta: f64,
}

pub fn classify(tr: Complex64) -> IsometryClass {
    if (tr - 2.0).norm() <= PARABOLIC_GUARD || (tr + 2.0).norm() <= PARABOLIC_GUARD {
        IsometryClass::Parabolic
    } else if tr.im.abs() <= PARABOLIC_GUARD && tr.re.abs() < 2.0 {
        IsometryClass::Elliptic
    } else {
        IsometryClass::Loxodromic
    }
}

/// Exact classification of an integral trace.
pub fn classify_exact(tr: &QuadInt) -> IsometryClass {
    if !tr.is_rational() {
        return IsometryClass::Loxodromic;
    }
    match tr.a().abs().to_u8() {
        Some(2) => IsometryClass::Parabolic,
        Some(0 | 1) => IsometryClass::Elliptic,
        _ => IsometryClass::Loxodromic,
    }
}

fn require_loxodromic(tr: Complex64) -> Result<()> {
    match classify(tr) {
        IsometryClass::Loxodromic => Ok(()),
        k => Err(Error::Domain(format!("trace {tr} is {k:?}, not loxodromic"))),
    }
}

fn length_of(w: &Cplx) -> ComplexLength {
    let a = w.acosh();
    let two = Real::from_i64(2, PREC);
    let pi = Real::pi(PREC);
    let two_pi = &pi * &two;
    let mut theta = &a.im * &two;
    if theta.cmp_real(&pi) == Ordering::Greater {
        theta = &theta - &two_pi;
    }
    if theta.cmp_real(&-&pi) != Ordering::Greater {
        theta = &theta + &two_pi;
    }
    let snap = Real::parse("1e-40", PREC);
    if (&theta + &pi).abs().cmp_real(&snap) != Ordering::Greater {
        theta = pi;
    }
    ComplexLength {
        ell: (&a.re * &two).to_f64().max(0.0),
        theta: theta.to_f64(),
    }
}

/// `ell + i theta = 2 acosh(tr/2)`, with the rotation angle reduced to
/// `(-pi, pi]`.
pub fn complex_length(tr: Complex64) -> Result<ComplexLength> {
    require_loxodromic(tr)?;
    Ok(length_of(&Cplx::from_f64(tr.re / 2.0, tr.im / 2.0, PREC)))
}

pub fn complex_length_exact(tr: &QuadInt) -> Result<ComplexLength> {
    if classify_exact(tr) != IsometryClass::Loxodromic {
        return Err(Error::Domain(format!("trace {tr} is not loxodromic")));
    }
    let half = Real::from_f64(0.5, PREC);
    Ok(length_of(&Cplx::from_quadint(tr, PREC).scale(&half)))
}

fn displacement_of(abs_tr2: Real, abs_tr2_m4: Real) -> f64 {
    let four = Real::from_i64(4, PREC);
    ((&abs_tr2 + &abs_tr2_m4) / four).acosh().to_f64()
}

/// `acosh((|tr^2| + |tr^2 - 4|)/4)`.
pub fn displacement(tr: Complex64) -> Result<f64> {
    require_loxodromic(tr)?;
    let t = Cplx::from_f64(tr.re, tr.im, PREC);
    let t2 = &t * &t;
    let four = Cplx::real(Real::from_i64(4, PREC));
    Ok(displacement_of(t2.abs(), (&t2 - &four).abs()))
}

/// Displacement for an integral trace, with `|tr^2| = N(tr)` exact.
pub fn displacement_exact(tr: &QuadInt) -> Result<f64> {
    if classify_exact(tr) != IsometryClass::Loxodromic {
        return Err(Error::Domain(format!("trace {tr} is not loxodromic")));
    }
    let (n_tr, n_tr2_m4) = displacement_key(tr);
    Ok(displacement_of(
        Real::from_bigint(&n_tr, PREC),
        Real::from_bigint(&n_tr2_m4, PREC).sqrt(),
    ))
}

/// `(N(tr), N(tr^2 - 4))`, from which `4 cosh(ell) = N(tr) + sqrt(N(tr^2 - 4))`.
pub fn displacement_key(tr: &QuadInt) -> (num_bigint::BigInt, num_bigint::BigInt) {
    let t2 = tr * tr;
    let m4 = &t2 - &tr.ring().int(4);
    (tr.norm(), m4.norm())
}

/// The comparison `|z^2 - 4| >= |w^2 - 4|` under `|z| + |w| >= 8` and
/// `|z| >= |w| + 1`.
pub fn lemma_z_w(z: Complex64, w: Complex64) -> Result<bool> {
    let (az, aw) = (z.norm(), w.norm());
    if az + aw < 8.0 {
        return Err(Error::precondition(format!("|z| + |w| = {} < 8", az + aw)));
    }
    if az < aw + 1.0 {
        return Err(Error::precondition("|z| < |w| + 1"));
    }
    Ok((z * z - 4.0).norm() >= (w * w - 4.0).norm())
}
