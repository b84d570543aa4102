//! The kissing-number pipeline, volume bookkeeping and the class-number
//! average table.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::congruence::{
    level_index, make_level, member, splitting, systole_certificate, CongruenceLevel, Membership,
    Splitting,
};
use crate::error::{Error, Result};
use crate::forms::{automorph, class_number_estimate, conjugate, signature, signature_moduli, ClassNumberEstimate, EstimateStatus};
use crate::pell::{
    is_discriminant, m_index, pell_fundamental, power_sequence, Discriminant, PellSolution, UnitStatus,
};
use crate::congruence::CoshKey;
use crate::ring::{QuadInt, Ring};

/// `psi'(x)` for `x > 0`.
pub fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    acc + 1.0 / x
        + x2 / 2.0
        + x2 / x * (1.0 / 6.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 42.0 - x2 / 30.0)))
}

/// `chi(n) = (Delta / n)` for the field discriminant of `ring`.
pub fn kronecker(ring: Ring, n: u64) -> i64 {
    let mut n = n;
    let mut acc = 1i64;
    let mut p = 2u64;
    while n > 1 {
        if p * p > n {
            p = n;
        }
        while n.is_multiple_of(p) {
            acc *= match splitting(ring, p as u128) {
                Splitting::Split => 1,
                Splitting::Inert => -1,
                Splitting::Ramified => 0,
            };
            n /= p;
        }
        p += 1;
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Volume {
    pub d: u32,
    pub field_discriminant: i64,
    pub zeta_2: f64,
    pub l_2: f64,
    pub value: f64,
    pub formula: String,
}

/// Covolume of `SL_2(O_d)`, `|Delta|^{3/2} zeta(2) L(2, chi) / (4 pi^2)`.
pub fn orbifold_volume(ring: Ring) -> Volume {
    use std::f64::consts::PI;
    let delta = ring.field_discriminant();
    let n = delta.unsigned_abs();
    let l_2 = (1..=n)
        .map(|a| kronecker(ring, a) as f64 * trigamma(a as f64 / n as f64))
        .sum::<f64>()
        / (n * n) as f64;
    let zeta_2 = PI * PI / 6.0;
    let value = (n as f64).powf(1.5) * zeta_2 * l_2 / (4.0 * PI * PI);
    Volume {
        d: ring.d(),
        field_discriminant: delta,
        zeta_2,
        l_2,
        value,
        formula: "|Delta|^(3/2) * zeta(2) * L(2, chi_Delta) / (4 pi^2)".into(),
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
    let m = (a + b) / 2.0;
    let (lm, rm) = ((a + m) / 2.0, (m + b) / 2.0);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
}

/// `Li(x) = int_2^x dt / ln t`, by adaptive Simpson quadrature.
pub fn li(x: f64) -> Result<f64> {
    if x.is_nan() || x < 2.0 || x.is_infinite() {
        return Err(Error::Domain(format!("Li needs x >= 2, got {x}")));
    }
    if x == 2.0 {
        return Ok(0.0);
    }
    let f = |t: f64| 1.0 / t.ln();
    let (fa, fb, fm) = (f(2.0), f(x), f(1.0 + x / 2.0));
    let whole = (x - 2.0) / 6.0 * (fa + 4.0 * fm + fb);
    let eps = 1e-10 * (x - 2.0).max(1.0);
    Ok(simpson(&f, 2.0, x, fa, fm, fb, whole, eps, 60))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub pell_bound: u64,
    pub a_bound: u64,
    pub depth: usize,
    pub m_cap: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            pell_bound: 100,
            a_bound: 10,
            depth: 6,
            m_cap: 12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportStatus {
    Complete,
    Partial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fundamental {
    pub t0: QuadInt,
    pub u0: QuadInt,
    pub eps_abs: f64,
    pub status: UnitStatus,
}

/// How the matrices `A_j^{m+1}` of the class representatives behave.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassMatrices {
    pub representatives: usize,
    /// Representatives whose `A_j^{m+1}` reduces to `tau Id`.
    pub in_tau_coset: usize,
    /// Pairs separated by an exact invariant.
    pub pairs_certified: usize,
    /// Pairs with no conjugating word found within the search depth.
    pub pairs_unresolved: usize,
    /// Pairs found conjugate; this would contradict the class count.
    pub pairs_conjugate: usize,
    /// Representatives with distinct signatures, pairwise certified.
    pub certified_nonconjugate: usize,
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KissReport {
    pub d: u32,
    #[serde(rename = "D")]
    pub d_value: QuadInt,
    pub budgets: Budgets,
    pub status: ReportStatus,
    pub notes: Vec<String>,
    pub fundamental: Option<Fundamental>,
    pub m: Option<usize>,
    pub t_m: Option<QuadInt>,
    pub u_m: Option<QuadInt>,
    pub tau: Option<QuadInt>,
    #[serde_as(as = "Option<DisplayFromStr>")]
    pub group_order: Option<BigInt>,
    pub stabilizer_order: Option<usize>,
    pub stabilizer_uniform: usize,
    pub h_estimate: Option<ClassNumberEstimate>,
    pub class_matrices: Option<ClassMatrices>,
    /// `classes_found * group_order / stabilizer_order`.
    #[serde_as(as = "Option<DisplayFromStr>")]
    pub kiss_lower: Option<BigInt>,
    /// The same with the uniform stabilizer bound 6.
    #[serde_as(as = "Option<DisplayFromStr>")]
    pub kiss_lower_uniform: Option<BigInt>,
    /// The same with only the pairwise certified classes.
    #[serde_as(as = "Option<DisplayFromStr>")]
    pub kiss_lower_certified: Option<BigInt>,
    /// `kiss_lower` rests on a class count that is only an estimate.
    pub conditional_on_h: bool,
    /// The division in `kiss_lower` was not exact and was floored.
    pub floored: bool,
    pub systole: Option<f64>,
    pub orbifold_volume: f64,
    pub manifold_volume: Option<f64>,
    /// `ln(kiss_lower) / ln(manifold_volume)`.
    pub diagnostic_exponent: Option<f64>,
}

impl KissReport {
    pub fn is_complete(&self) -> bool {
        self.status == ReportStatus::Complete
    }
}

fn kiss_formula(classes: usize, order: &BigInt, stab: usize) -> (BigInt, bool) {
    let (q, r) = (BigInt::from(classes) * order).div_rem(&BigInt::from(stab));
    (q, !r.is_zero())
}

fn class_matrices(est: &ClassNumberEstimate, s: &PellSolution, level: &CongruenceLevel, depth: usize) -> Result<ClassMatrices> {
    let reps = &est.representatives;
    let mats: Vec<_> = reps.iter().map(|q| automorph(q, s)).collect::<Result<_>>()?;
    let in_tau_coset = mats
        .iter()
        .filter(|a| member(a, level) == Membership::TauCoset)
        .count();
    let moduli = signature_moduli(level.ring());
    let sigs: Vec<_> = reps.iter().map(|q| signature(q, &moduli)).collect();
    let (mut certified, mut unresolved, mut conj) = (0, 0, 0);
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            if sigs[i] != sigs[j] {
                certified += 1;
            } else if conjugate(&mats[i], &mats[j], depth).is_some() {
                conj += 1;
            } else {
                unresolved += 1;
            }
        }
    }
    let mut distinct = sigs.clone();
    distinct.sort();
    distinct.dedup();
    Ok(ClassMatrices {
        representatives: reps.len(),
        in_tau_coset,
        pairs_certified: certified,
        pairs_unresolved: unresolved,
        pairs_conjugate: conj,
        certified_nonconjugate: distinct.len(),
    })
}

/// Runs Pell search, power sequence, level, index and class count, and
/// combines them into a lower bound for the kissing number.
///
/// Stages after a failed budget are left as `None`.
pub fn kiss_lower_bound(d_value: &QuadInt, budgets: Budgets) -> Result<KissReport> {
    let ring = d_value.ring();
    let disc = is_discriminant(d_value)
        .ok_or_else(|| Error::precondition(format!("{d_value} is not a discriminant")))?;
    if budgets.a_bound == 0 || budgets.m_cap < 2 {
        return Err(Error::usage("a_bound must be at least 1 and m_cap at least 2"));
    }
    let vol = orbifold_volume(ring).value;
    let mut r = KissReport {
        d: ring.d(),
        d_value: d_value.clone(),
        budgets,
        status: ReportStatus::Partial,
        notes: Vec::new(),
        fundamental: None,
        m: None,
        t_m: None,
        u_m: None,
        tau: None,
        group_order: None,
        stabilizer_order: None,
        stabilizer_uniform: 6,
        h_estimate: None,
        class_matrices: None,
        kiss_lower: None,
        kiss_lower_uniform: None,
        kiss_lower_certified: None,
        conditional_on_h: true,
        floored: false,
        systole: None,
        orbifold_volume: vol,
        manifold_volume: None,
        diagnostic_exponent: None,
    };
    let f = match pell_fundamental(&disc, budgets.pell_bound) {
        Ok(f) => f,
        Err(e @ Error::NotFound { .. }) => {
            r.notes.push(e.to_string());
            return Ok(r);
        }
        Err(e) => return Err(e),
    };
    r.fundamental = Some(Fundamental {
        t0: f.sol.t.clone(),
        u0: f.sol.u.clone(),
        eps_abs: f.sol.eps_abs,
        status: f.status,
    });
    if !f.globally_minimal {
        r.notes.push("fundamental unit is least only within the searched ball".into());
    }
    let mi = match m_index(&f, budgets.m_cap) {
        Ok(mi) => mi,
        Err(e @ Error::CapExceeded { .. }) => {
            r.notes.push(e.to_string());
            return Ok(r);
        }
        Err(e) => return Err(e),
    };
    let seq = power_sequence(&f, mi.m)?;
    if let Some(w) = &seq.warning {
        r.notes.push(w.clone());
    }
    let entry = &seq.entries[mi.m];
    let s_m = PellSolution::new(entry.t.clone(), entry.u.clone(), d_value.clone())?;
    r.m = Some(mi.m);
    r.t_m = Some(entry.t.clone());
    r.u_m = Some(entry.u.clone());
    r.systole = Some(CoshKey::of_trace(&entry.t).ell());
    let stab = 2 * (mi.m + 1);
    r.stabilizer_order = Some(stab);

    let level = make_level(&entry.t, &entry.u, &disc)?;
    r.tau = Some(level.tau.clone());
    let idx = level_index(&level)?;
    if let Some(w) = idx.warning {
        r.notes.push(w);
    }
    r.manifold_volume = Some(vol * idx.index.to_f64().unwrap_or(f64::INFINITY));
    r.group_order = Some(idx.index.clone());

    let est = class_number_estimate(&disc, budgets.a_bound, budgets.depth)?;
    let cm = class_matrices(&est, &s_m, &level, budgets.depth)?;
    if cm.in_tau_coset != cm.representatives {
        return Err(Error::invariant("some A_j^(m+1) lies outside the tau coset"));
    }
    if cm.pairs_conjugate > 0 {
        r.notes.push(format!("{} class pairs have conjugate A_j^(m+1)", cm.pairs_conjugate));
    }
    let (k, floored) = kiss_formula(est.classes_found, &idx.index, stab);
    r.kiss_lower_uniform = Some(kiss_formula(est.classes_found, &idx.index, 6).0);
    r.kiss_lower_certified = Some(kiss_formula(cm.certified_nonconjugate, &idx.index, stab).0);
    r.conditional_on_h = est.status == EstimateStatus::HeuristicEstimate;
    r.floored = floored;
    r.diagnostic_exponent = match (k.to_f64(), r.manifold_volume) {
        (Some(kf), Some(v)) if kf > 0.0 && v > 1.0 => Some(kf.ln() / v.ln()),
        _ => None,
    };
    r.kiss_lower = Some(k);
    r.h_estimate = Some(est);
    r.class_matrices = Some(cm);
    r.status = ReportStatus::Complete;
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    /// `kiss_lower ln(V) / V^(31/27)` for the manifold volume `V`.
    pub ratio: f64,
    /// `N(u_m) / V^(1/3)`.
    pub norm_ratio: f64,
    /// `|SL_2(O_d / u_m)| <= N(u_m)^3`.
    pub index_bound_holds: bool,
}

pub fn growth_diagnostic(r: &KissReport) -> Result<Growth> {
    let (Some(k), Some(v), Some(g), Some(u)) = (&r.kiss_lower, r.manifold_volume, &r.group_order, &r.u_m) else {
        return Err(Error::precondition("growth diagnostic needs a complete report"));
    };
    let kf = k.to_f64().unwrap_or(f64::INFINITY);
    let ratio = if k.is_zero() { 0.0 } else { kf * v.ln() / v.powf(31.0 / 27.0) };
    let nu = u.norm();
    Ok(Growth {
        ratio,
        norm_ratio: nu.to_f64().unwrap_or(f64::INFINITY) / v.cbrt(),
        index_bound_holds: g * 2u32 <= nu.pow(3),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AverageBudgets {
    /// Discriminants are scanned up to this norm.
    pub disc_norm_bound: u64,
    pub pell_bound: u64,
    pub a_bound: u64,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageEntry {
    #[serde(rename = "D")]
    pub d_value: QuadInt,
    pub eps_abs: f64,
    pub h_estimate: usize,
    pub h_status: EstimateStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageTable {
    pub d: u32,
    pub x: f64,
    pub budgets: AverageBudgets,
    pub discriminants_scanned: usize,
    pub found: Vec<AverageEntry>,
    pub empirical_mean: f64,
    pub c_d: f64,
    pub c_d_fitted: bool,
    /// `Li(x^4) / (c_d x^2)`.
    pub model_value: f64,
    pub caveats: Vec<String>,
}

/// Averages class-number estimates over discriminants whose fundamental
/// unit has `|eps| <= x`, and compares with `Li(x^4) / (c_d x^2)`.
pub fn sarnak_average(ring: Ring, x: f64, budgets: AverageBudgets, c_d: Option<f64>) -> Result<AverageTable> {
    if x.is_nan() || x <= 1.0 {
        return Err(Error::usage(format!("x must exceed 1, got {x}")));
    }
    let discs: Vec<Discriminant> = crate::pell::discriminants(ring, budgets.disc_norm_bound);
    let mut found = Vec::new();
    for disc in &discs {
        let Ok(f) = pell_fundamental(disc, budgets.pell_bound) else {
            continue;
        };
        if f.status != UnitStatus::CertifiedWithinBound || f.sol.eps_abs > x {
            continue;
        }
        let est = class_number_estimate(disc, budgets.a_bound, budgets.depth)?;
        found.push(AverageEntry {
            d_value: disc.value.clone(),
            eps_abs: f.sol.eps_abs,
            h_estimate: est.classes_found,
            h_status: est.status,
        });
    }
    if found.is_empty() {
        return Err(Error::BudgetExhausted(
            "no discriminants within x at current budgets".into(),
        ));
    }
    let model = |y: f64| -> Result<f64> { Ok(li(y.powi(4).max(2.0))? / (y * y)) };
    let empirical_mean = found.iter().map(|e| e.h_estimate as f64).sum::<f64>() / found.len() as f64;
    let (c_d, c_d_fitted) = match c_d {
        Some(c) => (c, false),
        None => {
            let mut sorted: Vec<&AverageEntry> = found.iter().collect();
            sorted.sort_by(|a, b| a.eps_abs.total_cmp(&b.eps_abs));
            let (mut sgm, mut sgg, mut sum) = (0.0, 0.0, 0.0);
            for (k, e) in sorted.iter().enumerate() {
                sum += e.h_estimate as f64;
                let mean = sum / (k + 1) as f64;
                let g = model(e.eps_abs)?;
                sgm += g * mean;
                sgg += g * g;
            }
            (if sgm > 0.0 { sgg / sgm } else { f64::NAN }, true)
        }
    };
    Ok(AverageTable {
        d: ring.d(),
        x,
        budgets,
        discriminants_scanned: discs.len(),
        found,
        empirical_mean,
        c_d,
        c_d_fitted,
        model_value: model(x)? / c_d,
        caveats: vec![
            "class numbers are bounded-search estimates".into(),
            "the discriminant set is limited by the scan and Pell budgets".into(),
            "the comparison is qualitative".into(),
        ],
    })
}

/// Systole certificate for the level attached to a report.
pub fn report_certificate(r: &KissReport, height: u64) -> Result<crate::congruence::CertReport> {
    let (Some(t), Some(u)) = (&r.t_m, &r.u_m) else {
        return Err(Error::precondition("report has no level"));
    };
    let disc = is_discriminant(&r.d_value).ok_or_else(|| Error::invariant("report D is not a discriminant"))?;
    let level = make_level(t, u, &disc)?;
    systole_certificate(&level, t, height)
}
