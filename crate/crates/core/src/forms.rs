//! Binary quadratic forms over `O_d` and their `SL_2(O_d)` classes.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::congruence::{factor_modulus, Mat2};
use crate::error::{Error, Result};
use crate::pell::{Discriminant, PellSolution};
use crate::ring::{Modulus, QuadInt, Ring};

/// `a x^2 + b x y + c y^2`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: QuadInt,
    pub b: QuadInt,
    pub c: QuadInt,
    #[serde(rename = "D")]
    disc: QuadInt,
}

impl QuadForm {
    pub fn new(a: QuadInt, b: QuadInt, c: QuadInt) -> QuadForm {
        let disc = &(&b * &b) - &(&a * &c).scale(&BigInt::from(4));
        QuadForm { a, b, c, disc }
    }

    pub fn from_ints(ring: Ring, a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> QuadForm {
        QuadForm::new(ring.elem(a.0, a.1), ring.elem(b.0, b.1), ring.elem(c.0, c.1))
    }

    pub fn ring(&self) -> Ring {
        self.a.ring()
    }

    pub fn disc(&self) -> &QuadInt {
        &self.disc
    }

    pub fn eval(&self, x: &QuadInt, y: &QuadInt) -> QuadInt {
        &(&(&self.a * &(x * x)) + &(&self.b * &(x * y))) + &(&self.c * &(y * y))
    }

    /// No prime element divides all three coefficients.
    pub fn is_primitive(&self) -> Result<bool> {
        let coeffs = [&self.a, &self.c, &self.b];
        let Some(g) = coeffs.iter().find(|x| !x.is_zero()) else {
            return Ok(false);
        };
        if g.is_unit() {
            return Ok(true);
        }
        let f = factor_modulus(g)?;
        Ok(f.factors
            .iter()
            .all(|p| !coeffs.iter().all(|x| p.pi.divides(x))))
    }

    pub fn scaled(&self, k: &QuadInt) -> QuadForm {
        QuadForm::new(k * &self.a, k * &self.b, k * &self.c)
    }

    pub fn lex_cmp(&self, o: &QuadForm) -> std::cmp::Ordering {
        self.a
            .lex_cmp(&o.a)
            .then_with(|| self.b.lex_cmp(&o.b))
            .then_with(|| self.c.lex_cmp(&o.c))
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

impl fmt::Debug for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The form `Q(p x + q y, r x + s y)`.
///
/// This is a right action: `act(M N, Q) = act(N, act(M, Q))`.
pub fn act(m: &Mat2, f: &QuadForm) -> QuadForm {
    let (p, q, r, s) = (m.p(), m.q(), m.r(), m.s());
    let two = BigInt::from(2);
    let a = f.eval(p, r);
    let c = f.eval(q, s);
    let b = &(&(&f.a * &(p * q)).scale(&two) + &(&f.b * &(&(p * s) + &(q * r))))
        + &(&f.c * &(r * s)).scale(&two);
    QuadForm::new(a, b, c)
}

/// `r x^2 + (s - p) x y - q y^2`, which satisfies
/// `form(g^{-1} M g) = act(g, form(M))`.
pub fn conjugation_form(m: &Mat2) -> QuadForm {
    QuadForm::new(m.r().clone(), m.s() - m.p(), -m.q())
}

/// `[[(t - b u)/2, -c u], [a u, (t + b u)/2]]`, an automorphism of `Q`
/// with trace `t`.
pub fn automorph(f: &QuadForm, s: &PellSolution) -> Result<Mat2> {
    if &s.d_value != f.disc() {
        return Err(Error::usage(format!(
            "solution is for D = {}, form has D = {}",
            s.d_value,
            f.disc()
        )));
    }
    let two = BigInt::from(2);
    let bu = &f.b * &s.u;
    let half = |x: QuadInt| {
        x.div_int(&two)
            .ok_or_else(|| Error::invariant(format!("{x} is not divisible by 2")))
    };
    let p = half(&s.t - &bu)?;
    let q = -&(&f.c * &s.u);
    let r = &f.a * &s.u;
    let sd = half(&s.t + &bu)?;
    let m = Mat2::new(p, q, r, sd).map_err(|e| Error::invariant(e.to_string()))?;
    if &act(&m, f) != f {
        return Err(Error::invariant(format!("{m} does not fix {f}")));
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivWitness {
    #[serde(rename = "M")]
    pub m: Mat2,
    pub from: QuadForm,
    pub to: QuadForm,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Equivalence {
    Found(Box<EquivWitness>),
    Unknown,
    No,
}

/// Forms reachable from `f` by words of length at most `radius` in the
/// standard generators, each with a matrix `W` such that `act(W, f)` is it.
struct Orbit {
    seen: Vec<(QuadForm, Mat2)>,
    index: HashMap<QuadForm, usize>,
}

impl Orbit {
    fn grow(f: &QuadForm, radius: usize) -> Orbit {
        let ring = f.ring();
        let gens = Mat2::standard_generators(ring);
        let mut seen = vec![(f.clone(), Mat2::identity(ring))];
        let mut index = HashMap::from([(f.clone(), 0)]);
        let mut start = 0;
        for _ in 0..radius {
            let end = seen.len();
            for k in start..end {
                for g in &gens {
                    let nf = act(g, &seen[k].0);
                    if !index.contains_key(&nf) {
                        let w = seen[k].1.mul(g);
                        index.insert(nf.clone(), seen.len());
                        seen.push((nf, w));
                    }
                }
            }
            start = end;
        }
        Orbit { seen, index }
    }
}

/// Searches for `M` of word length at most `depth` with `act(M, f1) = f2`.
pub fn equivalent(f1: &QuadForm, f2: &QuadForm, depth: usize) -> Equivalence {
    if f1.ring() != f2.ring() || f1.disc() != f2.disc() {
        return Equivalence::No;
    }
    let fwd = Orbit::grow(f1, depth.div_ceil(2));
    let bwd = Orbit::grow(f2, depth / 2);
    for (g, a) in &fwd.seen {
        if let Some(&k) = bwd.index.get(g) {
            let m = a.mul(&bwd.seen[k].1.inverse());
            debug_assert_eq!(&act(&m, f1), f2);
            return Equivalence::Found(Box::new(EquivWitness {
                m,
                from: f1.clone(),
                to: f2.clone(),
            }));
        }
    }
    Equivalence::Unknown
}

/// Searches for `g` of word length at most `depth` with `g^{-1} m1 g = m2`.
pub fn conjugate(m1: &Mat2, m2: &Mat2, depth: usize) -> Option<Mat2> {
    if m1.trace() != m2.trace() {
        return None;
    }
    match equivalent(&conjugation_form(m1), &conjugation_form(m2), depth) {
        Equivalence::Found(w) => {
            debug_assert_eq!(&m1.conjugate_by(&w.m), m2);
            Some(w.m)
        }
        _ => None,
    }
}

/// Primitive forms of discriminant `D` with `1 <= N(a) <= a_norm_bound`, `b`
/// the norm-minimal representative of its class mod `2a`.
pub fn enumerate_forms(disc: &Discriminant, a_norm_bound: u64) -> Result<Vec<QuadForm>> {
    if a_norm_bound == 0 {
        return Err(Error::usage("a_norm_bound must be at least 1"));
    }
    let d_value = &disc.value;
    if d_value.sqrt().is_some() {
        return Err(Error::usage(format!("{d_value} is a perfect square")));
    }
    let ring = disc.ring();
    let a_list: Vec<QuadInt> = ring
        .lattice_ball(a_norm_bound)
        .into_iter()
        .filter(|a| !a.is_zero())
        .collect();
    let per_a: Vec<Result<Vec<QuadForm>>> = a_list
        .par_iter()
        .map(|a| {
            let two_a = a.scale(&BigInt::from(2));
            let four_a = a.scale(&BigInt::from(4));
            let m = Modulus::new(&two_a)?;
            let mut bs: Vec<QuadInt> = m
                .representatives()
                .iter()
                .map(|b| m.norm_minimal(b))
                .collect();
            bs.sort_by(|x, y| x.norm().cmp(&y.norm()).then_with(|| x.lex_cmp(y)));
            let mut out = Vec::new();
            for b in bs {
                if let Some(c) = (&(&b * &b) - d_value).exact_div(&four_a)? {
                    let f = QuadForm::new(a.clone(), b, c);
                    if f.is_primitive()? {
                        out.push(f);
                    }
                }
            }
            Ok(out)
        })
        .collect();
    let mut forms = Vec::new();
    for v in per_a {
        forms.extend(v?);
    }
    Ok(forms)
}

/// Moduli used by [`signature`].
pub fn signature_moduli(ring: Ring) -> Vec<QuadInt> {
    let mut out: Vec<QuadInt> = Vec::new();
    for x in ring.lattice_ball(16) {
        if x.is_zero() || x.is_unit() {
            continue;
        }
        let c = x.canonical_associate();
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// For each modulus `m`, how often `Q(x, y)` takes each value as `(x, y)`
/// runs over `(O_d / m)^2`. Equivalent forms have equal signatures.
pub fn signature(f: &QuadForm, moduli: &[QuadInt]) -> Vec<Vec<u32>> {
    moduli
        .iter()
        .map(|u| {
            let m = Modulus::new(u).expect("nonzero modulus");
            let reps = m.representatives();
            let mut hist = vec![0u32; reps.len()];
            for x in &reps {
                for y in &reps {
                    hist[m.index(&f.eval(x, y))] += 1;
                }
            }
            hist
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateStatus {
    /// `classes_found` forms are pairwise inequivalent by an exact invariant,
    /// so `h(D) >= classes_found`.
    LowerBoundCertified,
    HeuristicEstimate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassNumberEstimate {
    #[serde(rename = "D")]
    pub disc: Discriminant,
    pub forms_enumerated: usize,
    pub classes_found: usize,
    pub merged_by_depth: usize,
    /// Number of distinct residue signatures among the enumerated forms.
    pub certified_lower: usize,
    pub a_norm_bound: u64,
    pub equiv_depth: usize,
    pub status: EstimateStatus,
    /// Searches used only `S`, `T_1`, `T_w`, which do not generate
    /// `SL_2(O_d)` for the non-Euclidean `d`.
    pub generator_restricted: bool,
    /// First enumerated form of each class.
    pub representatives: Vec<QuadForm>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, x: usize, y: usize) -> bool {
        let (a, b) = (self.find(x), self.find(y));
        if a == b {
            return false;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.0[hi] = lo;
        true
    }
}

/// Groups the enumerated forms of discriminant `D` by bounded equivalence
/// search.
pub fn class_number_estimate(
    disc: &Discriminant,
    a_norm_bound: u64,
    equiv_depth: usize,
) -> Result<ClassNumberEstimate> {
    let forms = enumerate_forms(disc, a_norm_bound)?;
    let n = forms.len();
    let core: Vec<Orbit> = forms
        .par_iter()
        .map(|f| Orbit::grow(f, equiv_depth / 2))
        .collect();
    let mut owners: HashMap<&QuadForm, Vec<usize>> = HashMap::new();
    for (j, o) in core.iter().enumerate() {
        for (g, _) in &o.seen {
            owners.entry(g).or_default().push(j);
        }
    }
    let links: Vec<Vec<usize>> = forms
        .par_iter()
        .map(|f| {
            let far = Orbit::grow(f, equiv_depth.div_ceil(2));
            let mut js: Vec<usize> = far
                .seen
                .iter()
                .filter_map(|(g, _)| owners.get(g))
                .flatten()
                .copied()
                .collect();
            js.sort_unstable();
            js.dedup();
            js
        })
        .collect();
    let mut uf = UnionFind((0..n).collect());
    let mut merged = 0;
    for (i, js) in links.iter().enumerate() {
        for &j in js {
            if uf.union(i, j) {
                merged += 1;
            }
        }
    }
    let roots: Vec<usize> = (0..n).filter(|&i| uf.find(i) == i).collect();
    let moduli = signature_moduli(disc.ring());
    let mut sigs: Vec<Vec<Vec<u32>>> = forms.par_iter().map(|f| signature(f, &moduli)).collect();
    sigs.sort();
    sigs.dedup();
    let certified_lower = sigs.len();
    let status = if certified_lower == roots.len() && n > 0 {
        EstimateStatus::LowerBoundCertified
    } else {
        EstimateStatus::HeuristicEstimate
    };
    Ok(ClassNumberEstimate {
        disc: disc.clone(),
        forms_enumerated: n,
        classes_found: roots.len(),
        merged_by_depth: merged,
        certified_lower,
        a_norm_bound,
        equiv_depth,
        status,
        generator_restricted: !disc.ring().is_euclidean(),
        representatives: roots.iter().map(|&i| forms[i].clone()).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrespondenceReport {
    pub forms: usize,
    pub traces_match: bool,
    pub pairs_checked: usize,
    pub equivalent_pairs: usize,
    /// Equivalent pairs whose automorphs fail `e2 = M^{-1} e1 M`.
    pub conjugation_mismatches: usize,
    /// Pairs not found equivalent whose automorphs were found conjugate.
    pub anomalies: Vec<(usize, usize)>,
    pub passed: bool,
}

/// Checks that equivalent forms have conjugate automorphs, conjugated by
/// the equivalence witness, and that no conjugacy turns up between forms
/// not found equivalent.
pub fn correspondence_check(
    forms: &[QuadForm],
    s: &PellSolution,
    depth: usize,
) -> Result<CorrespondenceReport> {
    let autos: Vec<Mat2> = forms.iter().map(|f| automorph(f, s)).collect::<Result<_>>()?;
    let traces_match = autos.iter().all(|m| m.trace() == s.t);
    let pairs: Vec<(usize, usize)> = (0..forms.len())
        .flat_map(|i| (i + 1..forms.len()).map(move |j| (i, j)))
        .collect();
    let outcomes: Vec<(bool, bool, bool)> = pairs
        .par_iter()
        .map(|&(i, j)| match equivalent(&forms[i], &forms[j], depth) {
            Equivalence::Found(w) => {
                let ok = autos[i].conjugate_by(&w.m) == autos[j];
                (true, ok, false)
            }
            _ => (false, true, conjugate(&autos[i], &autos[j], depth).is_some()),
        })
        .collect();
    let equivalent_pairs = outcomes.iter().filter(|o| o.0).count();
    let conjugation_mismatches = outcomes.iter().filter(|o| !o.1).count();
    let anomalies: Vec<(usize, usize)> = pairs
        .iter()
        .zip(&outcomes)
        .filter(|(_, o)| o.2)
        .map(|(p, _)| *p)
        .collect();
    Ok(CorrespondenceReport {
        forms: forms.len(),
        traces_match,
        pairs_checked: pairs.len(),
        equivalent_pairs,
        conjugation_mismatches,
        passed: traces_match && conjugation_mismatches == 0 && anomalies.is_empty(),
        anomalies,
    })
}
