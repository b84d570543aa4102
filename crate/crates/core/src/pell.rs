//! Discriminants of `O_d`, the equation `t^2 - D u^2 = 4`, and the power
//! sequence of its fundamental solution.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precise::{Cplx, Real, PREC};
use crate::ring::{isqrt_u128, QuadInt, Ring};

/// An element `D` that is a square mod 4 and not a square.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discriminant {
    pub value: QuadInt,
    /// Some `x` with `D - x^2` in `4 O_d`.
    pub witness: QuadInt,
    pub nonsquare_certified: bool,
}

impl Discriminant {
    pub fn ring(&self) -> Ring {
        self.value.ring()
    }

    /// `|D|` as a float.
    pub fn abs(&self) -> f64 {
        self.value.norm().to_f64().unwrap_or(f64::INFINITY).sqrt()
    }
}

/// Representatives of `O_d / 2 O_d`.
fn mod_two_reps(ring: Ring) -> [QuadInt; 4] {
    [ring.zero(), ring.one(), ring.omega(), ring.elem(1, 1)]
}

pub fn is_discriminant(d_value: &QuadInt) -> Option<Discriminant> {
    let ring = d_value.ring();
    if d_value.sqrt().is_some() {
        return None;
    }
    let four = BigInt::from(4);
    let witness = mod_two_reps(ring)
        .into_iter()
        .find(|x| (d_value - &(x * x)).div_int(&four).is_some())?;
    Some(Discriminant {
        value: d_value.clone(),
        witness,
        nonsquare_certified: true,
    })
}

/// All discriminants with `N(D) <= max_norm`, ordered by `(norm, a, b)`.
pub fn discriminants(ring: Ring, max_norm: u64) -> Vec<Discriminant> {
    ring.lattice_ball(max_norm)
        .iter()
        .filter_map(is_discriminant)
        .collect()
}

/// A solution of `t^2 - D u^2 = 4`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PellSolution {
    pub t: QuadInt,
    pub u: QuadInt,
    #[serde(rename = "D")]
    pub d_value: QuadInt,
    /// `|eps|` for `eps = (t + u sqrt(D))/2`.
    pub eps_abs: f64,
}

impl PellSolution {
    /// Checks the equation exactly.
    pub fn new(t: QuadInt, u: QuadInt, d_value: QuadInt) -> Result<PellSolution> {
        if &(&t * &t) - &(&d_value * &(&u * &u)) != t.ring().int(4) {
            return Err(Error::invariant(format!(
                "({t}, {u}) does not solve t^2 - ({d_value}) u^2 = 4"
            )));
        }
        let eps_abs = eps_abs2(&t, &u, &branch_sqrt(&d_value, PREC)).sqrt().to_f64();
        Ok(PellSolution {
            t,
            u,
            d_value,
            eps_abs,
        })
    }

    pub fn ring(&self) -> Ring {
        self.t.ring()
    }

    pub fn identity(d_value: &QuadInt) -> PellSolution {
        let ring = d_value.ring();
        PellSolution::new(ring.int(2), ring.zero(), d_value.clone()).expect("(2, 0) solves")
    }

    pub fn inverse(&self) -> PellSolution {
        PellSolution::new(self.t.clone(), -&self.u, self.d_value.clone()).expect("(t, -u) solves")
    }

    /// `|eps|^2` at `p` bits.
    pub fn eps_abs2(&self, p: usize) -> Real {
        eps_abs2(&self.t, &self.u, &branch_sqrt(&self.d_value, p))
    }

    /// `eps` as a complex number at `p` bits.
    pub fn eps(&self, p: usize) -> Cplx {
        eps_value(&self.t, &self.u, &branch_sqrt(&self.d_value, p))
    }
}

/// `sqrt(D)` with argument in `[0, pi)`.
pub fn branch_sqrt(d_value: &QuadInt, p: usize) -> Cplx {
    let s = Cplx::from_quadint(d_value, p).sqrt();
    if s.im.is_negative() {
        -&s
    } else {
        s
    }
}

fn eps_value(t: &QuadInt, u: &QuadInt, sqrt_d: &Cplx) -> Cplx {
    let p = sqrt_d.precision();
    let tc = Cplx::from_quadint(t, p);
    let uc = Cplx::from_quadint(u, p);
    let half = Real::from_f64(0.5, p);
    (&tc + &(&uc * sqrt_d)).scale(&half)
}

fn eps_abs2(t: &QuadInt, u: &QuadInt, sqrt_d: &Cplx) -> Real {
    eps_value(t, u, sqrt_d).norm_sqr()
}

/// Product of two solutions under `eps` multiplication.
pub fn pell_compose(s1: &PellSolution, s2: &PellSolution) -> Result<PellSolution> {
    if s1.d_value != s2.d_value {
        return Err(Error::usage("solutions belong to different D"));
    }
    let two = BigInt::from(2);
    let tn = &(&s1.t * &s2.t) + &(&s1.d_value * &(&s1.u * &s2.u));
    let un = &(&s1.t * &s2.u) + &(&s2.t * &s1.u);
    let t = tn
        .div_int(&two)
        .ok_or_else(|| Error::invariant("t1 t2 + D u1 u2 is not divisible by 2"))?;
    let u = un
        .div_int(&two)
        .ok_or_else(|| Error::invariant("t1 u2 + t2 u1 is not divisible by 2"))?;
    PellSolution::new(t, u, s1.d_value.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnitStatus {
    /// Least `|eps| > 1` among all `u` in the searched ball.
    CertifiedWithinBound,
    /// Supplied by the caller without a search.
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalUnit {
    pub sol: PellSolution,
    pub search_norm_bound: u64,
    pub status: UnitStatus,
    /// Set when the search passed the point `N(u)^2 N(D) >= (|eps| + 1)^4`,
    /// beyond which no smaller `|eps|` can occur.
    pub globally_minimal: bool,
}

impl FundamentalUnit {
    /// Wraps a caller-supplied solution, e.g. one read from the command line.
    pub fn assume(sol: PellSolution) -> Result<FundamentalUnit> {
        if sol.eps_abs2(PREC).cmp_real(&one_plus_guard()) != Ordering::Greater {
            return Err(Error::precondition("a fundamental unit needs |eps| > 1"));
        }
        Ok(FundamentalUnit {
            sol,
            search_norm_bound: 0,
            status: UnitStatus::Unknown,
            globally_minimal: false,
        })
    }
}

fn one_plus_guard() -> Real {
    Real::parse("1.0000000000000000000000000000000000000001", PREC)
}

struct Candidate {
    eps2: Real,
    t: QuadInt,
    u: QuadInt,
}

fn tie_key(c: &Candidate) -> (&BigInt, &BigInt, &BigInt, &BigInt) {
    (c.t.a(), c.t.b(), c.u.a(), c.u.b())
}

/// `Some(t)` with `t^2 = 4 + D u^2` when such `t` exists.
fn pell_root(ring: Ring, d_coords: Option<(i128, i128)>, d_value: &QuadInt, u: (i64, i64)) -> Option<QuadInt> {
    let uq = (u.0 as i128, u.1 as i128);
    let fast = d_coords.and_then(|dc| {
        let u2 = ring.mul_i128(uq, uq)?;
        let z = ring.mul_i128(dc, u2)?;
        let z = (z.0.checked_add(4)?, z.1);
        let n = ring.norm_i128(z)?;
        Some(n)
    });
    if let Some(n) = fast {
        let r = isqrt_u128(n as u128);
        if r * r != n as u128 {
            return None;
        }
    }
    let uq = ring.elem(u.0, u.1);
    let z = &ring.int(4) + &(d_value * &(&uq * &uq));
    z.sqrt()
}

const CHUNK: usize = 4096;

/// Exhaustive search for the least `|eps| > 1` with `N(u) <= norm_bound`.
pub fn pell_fundamental(disc: &Discriminant, norm_bound: u64) -> Result<FundamentalUnit> {
    let ring = disc.ring();
    let d_value = &disc.value;
    let sqrt_d = branch_sqrt(d_value, PREC);
    let d_coords = d_value.coords_i128();
    let d_norm = Real::from_bigint(&d_value.norm(), PREC);
    let guard = one_plus_guard();
    let one = Real::from_i64(1, PREC);
    let ball: Vec<(i64, i64)> = ring
        .ball_coords(norm_bound)
        .into_iter()
        .filter(|&c| c != (0, 0))
        .collect();

    let mut best: Option<Candidate> = None;
    let mut cutoff_reached = false;
    let past_cutoff = |eps2: &Real, norm_u: i128| -> bool {
        let e1 = &eps2.sqrt() + &one;
        let lhs = &Real::from_i64(norm_u as i64, PREC).powi(2) * &d_norm;
        lhs.cmp_real(&e1.powi(4)) != Ordering::Less
    };
    for chunk in ball.chunks(CHUNK) {
        let first = chunk[0];
        if best
            .as_ref()
            .is_some_and(|b| past_cutoff(&b.eps2, ring.norm_coords(first.0, first.1)))
        {
            cutoff_reached = true;
            break;
        }
        let hits: Vec<((i64, i64), QuadInt)> = chunk
            .par_iter()
            .filter_map(|&u| pell_root(ring, d_coords, d_value, u).map(|t| (u, t)))
            .collect();
        for (u, t) in hits {
            let uq = ring.elem(u.0, u.1);
            for tt in [t.clone(), -&t] {
                let eps2 = eps_abs2(&tt, &uq, &sqrt_d);
                if eps2.cmp_real(&guard) != Ordering::Greater {
                    continue;
                }
                let cand = Candidate {
                    eps2,
                    t: tt,
                    u: uq.clone(),
                };
                let replace = match &best {
                    None => true,
                    Some(b) => match compare_eps(&cand.eps2, &b.eps2) {
                        Ordering::Less => true,
                        Ordering::Greater => false,
                        Ordering::Equal => tie_key(&cand) > tie_key(b),
                    },
                };
                if replace {
                    best = Some(cand);
                }
            }
        }
    }
    let Some(b) = best else {
        return Err(Error::NotFound { bound: norm_bound });
    };
    if !cutoff_reached {
        cutoff_reached = past_cutoff(&b.eps2, norm_bound as i128 + 1);
    }
    Ok(FundamentalUnit {
        sol: PellSolution::new(b.t, b.u, d_value.clone())?,
        search_norm_bound: norm_bound,
        status: UnitStatus::CertifiedWithinBound,
        globally_minimal: cutoff_reached,
    })
}

/// Compares two values of `|eps|^2`, treating a relative gap below `1e-40`
/// as equality.
fn compare_eps(x: &Real, y: &Real) -> Ordering {
    let diff = (x - y).abs();
    let scale = &x.abs() * &Real::parse("1e-40", PREC);
    if diff.cmp_real(&scale) != Ordering::Greater {
        Ordering::Equal
    } else {
        x.cmp_real(y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerEntry {
    pub n: usize,
    pub t: QuadInt,
    pub u: QuadInt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSeq {
    pub base: FundamentalUnit,
    pub entries: Vec<PowerEntry>,
    /// Present when `|D| <= 4`, where the powers of `eps` may not exhaust
    /// the solutions.
    pub warning: Option<String>,
}

impl PowerSeq {
    pub fn get(&self, n: usize) -> Option<&PowerEntry> {
        self.entries.get(n)
    }
}

/// `eps^(n+1) = (t_n + u_n sqrt(D))/2` for `n = 0..=n_max`, by
/// `x_{n+1} = t_0 x_n - x_{n-1}` from `(t_{-1}, u_{-1}) = (2, 0)`.
pub fn power_sequence(f: &FundamentalUnit, n_max: usize) -> Result<PowerSeq> {
    let ring = f.sol.ring();
    let t0 = f.sol.t.clone();
    let u0 = f.sol.u.clone();
    let mut prev = (ring.int(2), ring.zero());
    let mut cur = (t0.clone(), u0.clone());
    let mut entries = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        PellSolution::new(cur.0.clone(), cur.1.clone(), f.sol.d_value.clone())?;
        entries.push(PowerEntry {
            n,
            t: cur.0.clone(),
            u: cur.1.clone(),
        });
        let next = (
            &(&t0 * &cur.0) - &prev.0,
            &(&t0 * &cur.1) - &prev.1,
        );
        prev = std::mem::replace(&mut cur, next);
    }
    if n_max >= 1 && entries[1].u != &u0 * &t0 {
        return Err(Error::invariant("u_1 differs from u_0 t_0"));
    }
    let small = f.sol.d_value.norm() <= BigInt::from(16);
    Ok(PowerSeq {
        base: f.clone(),
        entries,
        warning: small.then(|| {
            "|D| <= 4: powers of eps need not produce every solution".to_string()
        }),
    })
}

/// `81 N(t) < 16 N(u)^2`, i.e. `|t| < (4/9)|u|^2`.
pub fn t_small(t: &QuadInt, u: &QuadInt) -> bool {
    let nu = u.norm();
    BigInt::from(81) * t.norm() < BigInt::from(16) * &nu * &nu
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MIndex {
    pub m: usize,
    /// `m <= 2`, the range guaranteed once `|D| > 51`.
    pub small_regime: bool,
}

/// Least `n <= cap` with `|t_n| < (4/9)|u_n|^2`.
pub fn m_index(f: &FundamentalUnit, cap: usize) -> Result<MIndex> {
    if cap < 2 {
        return Err(Error::usage("m_index needs cap >= 2"));
    }
    let seq = power_sequence(f, cap)?;
    seq.entries
        .iter()
        .find(|e| t_small(&e.t, &e.u))
        .map(|e| MIndex {
            m: e.n,
            small_regime: e.n <= 2,
        })
        .ok_or(Error::CapExceeded { cap })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub lemma: String,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn failures(&self) -> usize {
        self.count(Verdict::Fail)
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.rows.iter().filter(|r| r.verdict == v).count()
    }
}

fn exact(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn nf(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Evaluates the size inequalities satisfied by the powers of `eps_D` for
/// `n = 0..=n_max`.
///
/// Integer comparisons are exact; the two-sided power window is decided at
/// a precision that grows with `|t_n|`, with an inconclusive band of `1e-9`.
pub fn verify_pell_bounds(f: &FundamentalUnit, n_max: usize) -> Result<BoundReport> {
    let seq = power_sequence(f, n_max)?;
    let d_value = &f.sol.d_value;
    let nd = d_value.norm();
    let d_abs = nf(&nd).sqrt();
    let large_d = nd > BigInt::from(51 * 51);
    let m = seq
        .entries
        .iter()
        .find(|e| t_small(&e.t, &e.u))
        .map(|e| e.n);
    let mut rows = Vec::new();
    let mut push = |lemma: &str, n: usize, lhs: f64, rhs: f64, verdict: Verdict| {
        rows.push(BoundRow {
            lemma: lemma.to_string(),
            n,
            lhs,
            rhs,
            verdict,
        })
    };
    for e in &seq.entries {
        let n = e.n;
        let nt = e.t.norm();
        let nu = e.u.norm();

        let p = PREC.max(nt.bits() as usize + 128);
        let power = f.sol.eps_abs2(p).powi(n + 1);
        let tn2 = Real::from_bigint(&nt, p);
        let three = Real::from_i64(3, p);
        let band = Real::parse("1e-9", p);
        let lower_gap = &power - &(&tn2 - &three);
        let upper_gap = &(&tn2 + &three) - &power;
        for (name, gap, lhs, rhs) in [
            ("power_norm_lower", &lower_gap, nf(&nt) - 3.0, power.to_f64()),
            ("power_norm_upper", &upper_gap, power.to_f64(), nf(&nt) + 3.0),
        ] {
            let v = if gap.cmp_real(&band) == Ordering::Greater {
                Verdict::Pass
            } else if gap.cmp_real(&-&band) == Ordering::Less {
                Verdict::Fail
            } else {
                Verdict::Inconclusive
            };
            push(name, n, lhs, rhs, v);
        }

        let nu2 = &nu * &nu;
        let four = BigInt::from(4);
        push(
            "u_upper_by_t",
            n,
            nf(&nu),
            (nf(&nt) + 4.0) / d_abs,
            exact(&nu2 * &nd <= (&nt + &four) * (&nt + &four)),
        );
        let lower_ok = nt <= four || &nu2 * &nd >= (&nt - &four) * (&nt - &four);
        push("u_lower_by_t", n, nf(&nu), (nf(&nt) - 4.0) / d_abs, exact(lower_ok));
        if e.u.is_zero() {
            push("t_lower_by_d", n, nf(&nt), d_abs - 4.0, Verdict::NotApplicable);
        } else {
            push(
                "t_lower_by_d",
                n,
                nf(&nt),
                d_abs - 4.0,
                exact((&nt + &four) * (&nt + &four) >= nd),
            );
        }
        let t_not_small = !t_small(&e.t, &e.u);
        let v = if t_not_small && !e.u.is_zero() {
            exact(BigInt::from(4) * &nt <= BigInt::from(81) * &nd)
        } else {
            Verdict::NotApplicable
        };
        push("t_upper_when_not_small", n, nf(&nt).sqrt(), 4.5 * d_abs, v);
        let v = if large_d && n >= 2 {
            exact(!t_not_small)
        } else {
            Verdict::NotApplicable
        };
        push("t_below_u_sq_after_two", n, nf(&nt).sqrt(), 4.0 / 9.0 * nf(&nu), v);
        if Some(n) == m {
            let v = if large_d && (n == 1 || n == 2) {
                exact(nu2 <= BigInt::from(810_000) * &nd * &nd * &nd)
            } else {
                Verdict::NotApplicable
            };
            push("u_at_m_upper", n, nf(&nu).sqrt(), 30.0 * d_abs.powf(1.5), v);
        }
    }
    Ok(BoundReport { rows })
}
