use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use super::level::CongruenceLevel;
use super::mat::Mat2;
use crate::error::{Error, Result};
use crate::geom::{classify_exact, displacement_key, IsometryClass};
use crate::precise::{Real, PREC};
use crate::ring::QuadInt;

/// Sign of `(a + sqrt(b)) - (c + sqrt(e))` for integers with `b, e >= 0`.
pub fn cmp_add_sqrt(a: &BigInt, b: &BigInt, c: &BigInt, e: &BigInt) -> Ordering {
    debug_assert!(!b.is_negative() && !e.is_negative());
    let x = a - c;
    let xs = x.sign();
    use num_bigint::Sign::*;
    match (xs, b.cmp(e)) {
        (NoSign, o) => o,
        (Plus, Ordering::Greater | Ordering::Equal) => Ordering::Greater,
        (Minus, Ordering::Less | Ordering::Equal) => Ordering::Less,
        (Plus, Ordering::Less) => cmp_gap(&x, b, e),
        (Minus, Ordering::Greater) => cmp_gap(&-x, e, b).reverse(),
    }
}

// Sign of x - (sqrt(e) - sqrt(b)) for x > 0 and b < e.
fn cmp_gap(x: &BigInt, b: &BigInt, e: &BigInt) -> Ordering {
    let y = x * x - e - b;
    let be4 = BigInt::from(4) * b * e;
    if y.is_negative() {
        be4.cmp(&(&y * &y))
    } else if y.is_zero() && be4.is_zero() {
        Ordering::Equal
    } else {
        Ordering::Greater
    }
}

/// `4 cosh(ell) = N(tr) + sqrt(N(tr^2 - 4))`, kept as the pair of integers.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoshKey {
    #[serde_as(as = "DisplayFromStr")]
    pub n_tr: BigInt,
    #[serde_as(as = "DisplayFromStr")]
    pub n_tr2_m4: BigInt,
}

impl CoshKey {
    pub fn of_trace(tr: &QuadInt) -> CoshKey {
        let (n_tr, n_tr2_m4) = displacement_key(tr);
        CoshKey { n_tr, n_tr2_m4 }
    }

    pub fn cmp_key(&self, o: &CoshKey) -> Ordering {
        cmp_add_sqrt(&self.n_tr, &self.n_tr2_m4, &o.n_tr, &o.n_tr2_m4)
    }

    pub fn ell(&self) -> f64 {
        let four = Real::from_i64(4, PREC);
        let s = &Real::from_bigint(&self.n_tr, PREC) + &Real::from_bigint(&self.n_tr2_m4, PREC).sqrt();
        (s / four).acosh().to_f64()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertStatus {
    Certified,
    Vacuous,
    Violated,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertReport {
    pub u: QuadInt,
    pub tau: QuadInt,
    pub t: QuadInt,
    pub height: u64,
    pub members: u64,
    pub loxodromic: u64,
    /// Members with `4 cosh(ell) < |t|^2 + |t^2 - 4|`, at most
    /// [`MAX_LISTED`] of them.
    pub violations: Vec<Mat2>,
    pub violation_count: u64,
    /// `ell` bound guaranteed for loxodromic members.
    pub target_ell: f64,
    pub min_ell: Option<f64>,
    pub min_key: Option<CoshKey>,
    /// Members attaining the minimum, lexicographically first
    /// [`MAX_LISTED`].
    pub witnesses: Vec<Mat2>,
    pub witness_count: u64,
    pub status: CertStatus,
}

pub const MAX_LISTED: usize = 64;

#[derive(Default)]
struct Partial {
    members: u64,
    loxodromic: u64,
    violations: Vec<Mat2>,
    min: Option<(CoshKey, Vec<Mat2>)>,
}

impl Partial {
    fn visit(&mut self, m: Mat2, target: &CoshKey) {
        self.members += 1;
        let tr = m.trace();
        if classify_exact(&tr) != IsometryClass::Loxodromic {
            return;
        }
        self.loxodromic += 1;
        let key = CoshKey::of_trace(&tr);
        if key.cmp_key(target) == Ordering::Less {
            self.violations.push(m.clone());
        }
        match &mut self.min {
            None => self.min = Some((key, vec![m])),
            Some((k, w)) => match key.cmp_key(k) {
                Ordering::Less => self.min = Some((key, vec![m])),
                Ordering::Equal => w.push(m),
                Ordering::Greater => {}
            },
        }
    }

    fn merge(mut self, o: Partial) -> Partial {
        self.members += o.members;
        self.loxodromic += o.loxodromic;
        self.violations.extend(o.violations);
        self.min = match (self.min, o.min) {
            (None, x) | (x, None) => x,
            (Some((k1, mut w1)), Some((k2, w2))) => match k1.cmp_key(&k2) {
                Ordering::Less => Some((k1, w1)),
                Ordering::Greater => Some((k2, w2)),
                Ordering::Equal => {
                    w1.extend(w2);
                    Some((k1, w1))
                }
            },
        };
        self
    }
}

/// Checks `4 cosh(ell(M)) >= |t|^2 + |t^2 - 4|` for every loxodromic `M` in
/// `SL_2(O_d)_tau[u]` with all entry norms at most `height`.
///
/// Diagonal entries run over the ball in the class of `1` or `tau` mod `u`;
/// `q = u q'` and `r = u r'` come from the divisors `q'` of
/// `(ps - 1)/u^2`.
pub fn systole_certificate(level: &CongruenceLevel, t: &QuadInt, height: u64) -> Result<CertReport> {
    let ring = level.ring();
    let u = &level.u;
    if t.ring() != ring {
        return Err(Error::usage("t and the level live in different rings"));
    }
    let (nt, nu) = (t.norm(), u.norm());
    if nt <= BigInt::from(16) {
        return Err(Error::precondition(format!("|t| <= 4 for t = {t}")));
    }
    if BigInt::from(81) * &nt >= BigInt::from(16) * &nu * &nu {
        return Err(Error::precondition(format!("|t| >= (4/9)|u|^2 for t = {t}, u = {u}")));
    }
    if height == 0 {
        return Err(Error::usage("height must be at least 1"));
    }
    let modulus = level.modulus();
    let u2 = u * u;
    let nu64 = nu.to_u64().unwrap_or(u64::MAX);
    let target = CoshKey::of_trace(t);
    let ball = ring.lattice_ball(height);
    let small: Vec<QuadInt> = ring.lattice_ball(height / nu64);
    let mut classes = vec![ring.one()];
    if !level.is_degenerate() {
        classes.push(level.tau.clone());
    }
    let diag: Vec<Vec<QuadInt>> = classes
        .iter()
        .map(|c| ball.iter().filter(|x| modulus.congruent(x, c)).cloned().collect())
        .collect();
    let within = |x: &QuadInt| x.norm() * &nu <= BigInt::from(height);

    let jobs: Vec<(usize, &QuadInt)> = diag
        .iter()
        .enumerate()
        .flat_map(|(k, v)| v.iter().map(move |p| (k, p)))
        .collect();
    let total = jobs
        .par_iter()
        .map(|&(k, p)| {
            let mut acc = Partial::default();
            for s in &diag[k] {
                let ps1 = &(p * s) - &ring.one();
                let Some(m) = ps1.exact_div(&u2).expect("u^2 is nonzero") else {
                    continue;
                };
                let mk = |q1: &QuadInt, r1: &QuadInt| {
                    Mat2::new_unchecked(p.clone(), u * q1, u * r1, s.clone())
                };
                if m.is_zero() {
                    for x in &small {
                        acc.visit(mk(&ring.zero(), x), &target);
                        if !x.is_zero() {
                            acc.visit(mk(x, &ring.zero()), &target);
                        }
                    }
                    continue;
                }
                for q1 in small.iter().filter(|x| !x.is_zero()) {
                    if let Some(r1) = m.exact_div(q1).expect("nonzero divisor") {
                        if within(&r1) {
                            acc.visit(mk(q1, &r1), &target);
                        }
                    }
                }
            }
            acc
        })
        .reduce(Partial::default, Partial::merge);

    let mut violations = total.violations;
    violations.sort_by(|a, b| a.lex_cmp(b));
    let violation_count = violations.len() as u64;
    violations.truncate(MAX_LISTED);
    let (min_key, mut witnesses) = match total.min {
        Some((k, w)) => (Some(k), w),
        None => (None, Vec::new()),
    };
    witnesses.sort_by(|a, b| a.lex_cmp(b));
    let witness_count = witnesses.len() as u64;
    witnesses.truncate(MAX_LISTED);
    let status = if violation_count > 0 {
        CertStatus::Violated
    } else if total.loxodromic == 0 {
        CertStatus::Vacuous
    } else {
        CertStatus::Certified
    };
    Ok(CertReport {
        u: u.clone(),
        tau: level.tau.clone(),
        t: t.clone(),
        height,
        members: total.members,
        loxodromic: total.loxodromic,
        violations,
        violation_count,
        target_ell: target.ell(),
        min_ell: min_key.as_ref().map(CoshKey::ell),
        min_key,
        witnesses,
        witness_count,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::level::{make_level, member, Membership};
    use crate::pell::is_discriminant;
    use crate::ring::Ring;
    use proptest::prelude::*;

    fn level5() -> CongruenceLevel {
        let r = Ring::new(1).unwrap();
        let disc = is_discriminant(&r.int(5)).unwrap();
        make_level(&r.elem(0, 11), &r.elem(0, 5), &disc).unwrap()
    }

    fn real_sum(a: i64, b: i64) -> Real {
        &Real::from_i64(a, PREC) + &Real::from_i64(b, PREC).sqrt()
    }

    #[test]
    fn sqrt_sum_examples() {
        let b = |x: i64| BigInt::from(x);
        assert_eq!(cmp_add_sqrt(&b(1), &b(4), &b(3), &b(0)), Ordering::Equal);
        assert_eq!(cmp_add_sqrt(&b(0), &b(2), &b(1), &b(0)), Ordering::Greater);
        assert_eq!(cmp_add_sqrt(&b(1), &b(4), &b(0), &b(9)), Ordering::Equal);
        assert_eq!(cmp_add_sqrt(&b(121), &b(15625), &b(121), &b(15625)), Ordering::Equal);
        assert_eq!(cmp_add_sqrt(&b(5), &b(3), &b(4), &b(7)), Ordering::Greater);
    }

    proptest! {
        #[test]
        fn sqrt_sum_matches_high_precision(a in -500i64..500, b in 0i64..5000, c in -500i64..500, e in 0i64..5000) {
            let exact = cmp_add_sqrt(&BigInt::from(a), &BigInt::from(b), &BigInt::from(c), &BigInt::from(e));
            let diff = &real_sum(a, b) - &real_sum(c, e);
            let tiny = Real::parse("1e-50", PREC);
            let approx = if diff.abs().cmp_real(&tiny) != Ordering::Greater {
                Ordering::Equal
            } else if diff.is_negative() {
                Ordering::Less
            } else {
                Ordering::Greater
            };
            prop_assert_eq!(exact, approx);
        }
    }

    #[test]
    fn preconditions() {
        let r = Ring::new(1).unwrap();
        let l = level5();
        assert!(matches!(systole_certificate(&l, &r.int(3), 10), Err(Error::Precondition(_))));
        assert!(matches!(systole_certificate(&l, &r.int(12), 10), Err(Error::Precondition(_))));
        assert!(matches!(systole_certificate(&l, &r.elem(0, 11), 0), Err(Error::Usage(_))));
    }

    #[test]
    fn vacuous_when_small() {
        let r = Ring::new(1).unwrap();
        let rep = systole_certificate(&level5(), &r.elem(0, 11), 5).unwrap();
        assert_eq!(rep.status, CertStatus::Vacuous);
        assert!(rep.min_ell.is_none());
    }

    #[test]
    fn minimum_is_the_inducing_power() {
        let r = Ring::new(1).unwrap();
        let l = level5();
        let w = Mat2::from_ints(r, [(0, 3), (0, 5), (0, 5), (0, 8)]).unwrap();
        let mut last = f64::INFINITY;
        for h in [40, 64, 150] {
            let rep = systole_certificate(&l, &r.elem(0, 11), h).unwrap();
            assert_eq!(rep.violation_count, 0);
            if let Some(e) = rep.min_ell {
                assert!(e <= last + 1e-12);
                last = e;
            }
            for m in &rep.witnesses {
                assert_ne!(member(m, &l), Membership::No);
            }
            if h >= 64 {
                assert_eq!(rep.status, CertStatus::Certified);
                assert!(rep.witnesses.contains(&w));
                assert!((rep.min_ell.unwrap() - 61.5f64.acosh()).abs() < 1e-12);
            }
        }
    }
}
