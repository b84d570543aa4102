//! Seeded randomized property suites, one per module.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::congruence::{
    factor_modulus, member, reduce_mat, sl2_order, sl2_order_brute_force, trace_congruence_check,
    CongruenceLevel, Mat2, Membership,
};
use crate::error::{Error, Result};
use crate::forms::{act, automorph, enumerate_forms};
use crate::geom::{classify, complex_length, displacement, lemma_z_w, IsometryClass};
use crate::pell::{discriminants, pell_compose, pell_fundamental, power_sequence, verify_pell_bounds, PellSolution};
use crate::ring::{Modulus, QuadInt, Ring};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Ring,
    Pell,
    Forms,
    Geom,
    Congruence,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Ok(match s {
            "ring" => Suite::Ring,
            "pell" => Suite::Pell,
            "forms" => Suite::Forms,
            "geom" => Suite::Geom,
            "congruence" => Suite::Congruence,
            _ => return Err(Error::usage(format!("unknown suite {s}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub d: u32,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

struct Recorder {
    checks: Vec<Check>,
}

impl Recorder {
    fn check(&mut self, name: &str, cases: usize, mut f: impl FnMut(usize) -> Result<std::result::Result<(), String>>) -> Result<()> {
        let mut c = Check {
            name: name.into(),
            cases,
            failures: 0,
            first_failure: None,
        };
        for k in 0..cases {
            if let Err(msg) = f(k)? {
                c.failures += 1;
                c.first_failure.get_or_insert(msg);
            }
        }
        self.checks.push(c);
        Ok(())
    }
}

fn expect(ok: bool, msg: impl FnOnce() -> String) -> Result<std::result::Result<(), String>> {
    Ok(if ok { Ok(()) } else { Err(msg()) })
}

fn pick(rng: &mut ChaCha8Rng, ball: &[QuadInt]) -> QuadInt {
    ball.choose(rng).expect("nonempty ball").clone()
}

/// A product of `len` random standard generators.
pub fn random_word(ring: Ring, rng: &mut ChaCha8Rng, len: usize) -> Mat2 {
    let gens = Mat2::standard_generators(ring);
    (0..len).fold(Mat2::identity(ring), |acc, _| acc.mul(gens.choose(rng).expect("six generators")))
}

/// A random element of the principal congruence subgroup of level `u`,
/// as a product of conjugated elementary matrices.
pub fn random_principal(u: &QuadInt, rng: &mut ChaCha8Rng, len: usize) -> Mat2 {
    let ring = u.ring();
    let small = ring.lattice_ball(2);
    (0..len).fold(Mat2::identity(ring), |acc, _| {
        let x = u * &pick(rng, &small);
        let e = if rng.gen_bool(0.5) { Mat2::upper(x) } else { Mat2::lower(x) };
        let len = rng.gen_range(0..3);
        let g = random_word(ring, rng, len);
        acc.mul(&e.conjugate_by(&g))
    })
}

pub fn run_suite(suite: Suite, ring: Ring, seed: u64, cases: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder { checks: Vec::new() };
    match suite {
        Suite::Ring => ring_suite(ring, &mut rng, cases, &mut rec)?,
        Suite::Pell => pell_suite(ring, &mut rng, cases, &mut rec)?,
        Suite::Forms => forms_suite(ring, &mut rng, cases, &mut rec)?,
        Suite::Geom => geom_suite(&mut rng, cases, &mut rec)?,
        Suite::Congruence => congruence_suite(ring, &mut rng, cases, &mut rec)?,
    }
    let passed = rec.checks.iter().all(|c| c.failures == 0);
    Ok(SuiteReport {
        suite,
        d: ring.d(),
        seed,
        checks: rec.checks,
        passed,
    })
}

fn ring_suite(ring: Ring, rng: &mut ChaCha8Rng, cases: usize, rec: &mut Recorder) -> Result<()> {
    let ball = ring.lattice_ball(10_000);
    let mut triple = || (pick(rng, &ball), pick(rng, &ball), pick(rng, &ball));
    let samples: Vec<_> = (0..cases).map(|_| triple()).collect();
    rec.check("associativity_distributivity", cases, |k| {
        let (x, y, z) = &samples[k];
        expect(
            (&(x * y) * z) == (x * &(y * z)) && (x * &(y + z)) == (&(x * y) + &(x * z)),
            || format!("{x}, {y}, {z}"),
        )
    })?;
    rec.check("norm_multiplicative", cases, |k| {
        let (x, y, _) = &samples[k];
        expect((x * y).norm() == x.norm() * y.norm(), || format!("{x}, {y}"))
    })?;
    rec.check("exact_division", cases, |k| {
        let (x, y, _) = &samples[k];
        if y.is_zero() {
            return expect(true, String::new);
        }
        expect((x * y).exact_div(y)?.as_ref() == Some(x), || format!("{x}, {y}"))
    })?;
    rec.check("square_root", cases, |k| {
        let x = &samples[k].0;
        let r = (x * x).sqrt();
        expect(r.as_ref().is_some_and(|r| r == x || *r == -x), || format!("{x}"))
    })?;
    rec.check("residue_reduction", cases, |k| {
        let (x, y, _) = &samples[k];
        if y.is_zero() {
            return expect(true, String::new);
        }
        let m = Modulus::new(y)?;
        let r = m.reduce(x);
        expect(y.divides(&(x - &r)) && m.reduce(&r) == r, || format!("{x} mod {y}"))
    })
}

fn pell_suite(ring: Ring, rng: &mut ChaCha8Rng, cases: usize, rec: &mut Recorder) -> Result<()> {
    let mut discs = discriminants(ring, 200);
    discs.shuffle(rng);
    let mut units = Vec::new();
    for disc in discs.iter().take(cases.clamp(1, 12)) {
        if let Ok(f) = pell_fundamental(disc, 400) {
            units.push(f);
        }
    }
    rec.check("group_laws", units.len(), |k| {
        let s = &units[k].sol;
        let s2 = pell_compose(s, s)?;
        let s3 = pell_compose(&s2, s)?;
        let ok = pell_compose(&s2, s)? == pell_compose(s, &s2)?
            && pell_compose(&pell_compose(s, s)?, &s2)? == pell_compose(s, &s3)?
            && pell_compose(s, &s.inverse())? == PellSolution::identity(&s.d_value)
            && pell_compose(s, &PellSolution::identity(&s.d_value))? == *s;
        expect(ok, || format!("D = {}", s.d_value))
    })?;
    rec.check("power_sequence_matches_composition", units.len(), |k| {
        let f = &units[k];
        let seq = power_sequence(f, 6)?;
        let mut acc = f.sol.clone();
        for e in &seq.entries {
            if e.t != acc.t || e.u != acc.u {
                return expect(false, || format!("D = {}, n = {}", f.sol.d_value, e.n));
            }
            acc = pell_compose(&acc, &f.sol)?;
        }
        expect(true, String::new)
    })?;
    rec.check("bound_rows", units.len(), |k| {
        let r = verify_pell_bounds(&units[k], 6)?;
        expect(r.failures() == 0, || format!("D = {}", units[k].sol.d_value))
    })
}

fn forms_suite(ring: Ring, rng: &mut ChaCha8Rng, cases: usize, rec: &mut Recorder) -> Result<()> {
    let mut discs = discriminants(ring, 100);
    discs.shuffle(rng);
    let disc = discs
        .iter()
        .find(|d| pell_fundamental(d, 200).is_ok())
        .ok_or_else(|| Error::BudgetExhausted("no discriminant with a unit in range".into()))?
        .clone();
    let forms = enumerate_forms(&disc, 20)?;
    let unit = pell_fundamental(&disc, 200)?.sol;
    let unit2 = pell_compose(&unit, &unit)?;
    let samples: Vec<_> = (0..cases)
        .map(|_| {
            let q = forms.choose(rng).expect("forms exist").clone();
            let l1 = rng.gen_range(0..8);
            let l2 = rng.gen_range(0..8);
            (q, random_word(ring, rng, l1), random_word(ring, rng, l2))
        })
        .collect();
    rec.check("right_action", cases, |k| {
        let (q, m1, m2) = &samples[k];
        expect(act(&m1.mul(m2), q) == act(m2, &act(m1, q)), || format!("{q}"))
    })?;
    rec.check("discriminant_invariant", cases, |k| {
        let (q, m1, _) = &samples[k];
        expect(act(m1, q).disc() == q.disc(), || format!("{q}"))
    })?;
    rec.check("automorph_homomorphism", cases, |k| {
        let (q, _, _) = &samples[k];
        let e = automorph(q, &unit)?;
        let ok = automorph(q, &unit2)? == e.mul(&e) && &act(&e, q) == q && e.trace() == unit.t;
        expect(ok, || format!("{q}"))
    })?;
    rec.check("automorph_conjugation", cases, |k| {
        let (q, m1, _) = &samples[k];
        let lhs = automorph(&act(m1, q), &unit)?;
        expect(lhs == automorph(q, &unit)?.conjugate_by(m1), || format!("{q}"))
    })
}

/// A random trace that is loxodromic with `|tr| <= 100`.
pub fn random_loxodromic(rng: &mut ChaCha8Rng) -> Complex64 {
    loop {
        let tr = Complex64::new(rng.gen_range(-70.0..70.0), rng.gen_range(-70.0..70.0));
        if tr.norm() <= 100.0 && classify(tr) == IsometryClass::Loxodromic && (tr * tr - 4.0).norm() > 1e-3 {
            return tr;
        }
    }
}

fn geom_suite(rng: &mut ChaCha8Rng, cases: usize, rec: &mut Recorder) -> Result<()> {
    let traces: Vec<Complex64> = (0..cases).map(|_| random_loxodromic(rng)).collect();
    rec.check("displacement_matches_length", cases, |k| {
        let tr = traces[k];
        let gap = (displacement(tr)? - complex_length(tr)?.ell).abs();
        expect(gap <= 1e-9, || format!("{tr}: {gap}"))
    })?;
    rec.check("ellipse_identity", cases, |k| {
        let tr = traces[k];
        let l = complex_length(tr)?;
        let gap = ((tr - 2.0).norm() + (tr + 2.0).norm() - 4.0 * (l.ell / 2.0).cosh()).abs();
        expect(gap <= 1e-9 * (1.0 + tr.norm()), || format!("{tr}: {gap}"))
    })?;
    rec.check("squaring_doubles_length", cases, |k| {
        let tr = traces[k];
        let gap = (complex_length(tr * tr - 2.0)?.ell - 2.0 * complex_length(tr)?.ell).abs();
        expect(gap <= 1e-9, || format!("{tr}: {gap}"))
    })?;
    rec.check("displacement_symmetries", cases, |k| {
        let tr = traces[k];
        let base = displacement(tr)?;
        let ok = (displacement(-tr)? - base).abs() <= 1e-12 && (displacement(tr.conj())? - base).abs() <= 1e-12;
        expect(ok, || format!("{tr}"))
    })?;
    rec.check("lemma_z_w", cases, |_| {
        let w = Complex64::from_polar(rng.gen_range(0.0..20.0), rng.gen_range(-3.2..3.2));
        let rz = (w.norm() + 1.0).max(8.0 - w.norm()) + rng.gen_range(0.0..20.0);
        let z = Complex64::from_polar(rz, rng.gen_range(-3.2..3.2));
        expect(lemma_z_w(z, w)?, || format!("z = {z}, w = {w}"))
    })
}

fn congruence_suite(ring: Ring, rng: &mut ChaCha8Rng, cases: usize, rec: &mut Recorder) -> Result<()> {
    let levels: Vec<QuadInt> = [ring.elem(1, 1), ring.int(2), ring.int(3)]
        .into_iter()
        .filter(|u| !u.is_unit())
        .collect();
    let samples: Vec<_> = (0..cases)
        .map(|k| {
            let u = levels[k % levels.len()].clone();
            let len = rng.gen_range(1..=12);
            let g = random_principal(&u, rng, len);
            let l1 = rng.gen_range(0..10);
            let l2 = rng.gen_range(0..10);
            (u, g, random_word(ring, rng, l1), random_word(ring, rng, l2))
        })
        .collect();
    rec.check("trace_congruence", cases, |k| {
        let (u, g, _, _) = &samples[k];
        expect(trace_congruence_check(g, u)?, || format!("{g} at level {u}"))
    })?;
    rec.check("reduction_homomorphism", cases, |k| {
        let (u, _, a, b) = &samples[k];
        let m = Modulus::new(u)?;
        let lhs = reduce_mat(&a.mul(b), &m);
        expect(lhs == reduce_mat(a, &m).mul(&reduce_mat(b, &m), &m), || format!("{a}, {b}"))
    })?;
    rec.check("coset_closure", cases, |k| {
        let (u, g, a, b) = &samples[k];
        let mut level = CongruenceLevel::principal(u)?;
        level.tau = level.modulus().reduce(&-u.ring().one());
        let h = g.mul(&Mat2::identity(u.ring()).neg());
        let expected = if level.is_degenerate() { Membership::Principal } else { Membership::TauCoset };
        let (ma, mb) = (member(a, &level), member(b, &level));
        let ok = member(g, &level) == Membership::Principal
            && member(&h, &level) == expected
            && member(&h.mul(&h), &level) == Membership::Principal
            && member(&h.inverse(), &level) == expected
            && member(&a.mul(g), &level) == ma
            && (ma == Membership::No || mb == Membership::No || member(&a.mul(b), &level) != Membership::No);
        expect(ok, || format!("{g} at level {u}"))
    })?;
    let small: Vec<QuadInt> = ring
        .lattice_ball(25)
        .into_iter()
        .filter(|u| !u.is_zero() && !u.is_unit())
        .collect();
    rec.check("sl2_order_brute_force", small.len(), |k| {
        let u = &small[k];
        let f = sl2_order(&factor_modulus(u)?);
        expect(f == sl2_order_brute_force(u)?, || format!("u = {u}"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_and_repeat() {
        let g = Ring::new(1).unwrap();
        for s in [Suite::Ring, Suite::Pell, Suite::Forms, Suite::Geom, Suite::Congruence] {
            let a = run_suite(s, g, 7, 20).unwrap();
            assert!(a.passed, "{a:?}");
            assert_eq!(a, run_suite(s, g, 7, 20).unwrap());
        }
        assert!("nope".parse::<Suite>().is_err());
    }
}
