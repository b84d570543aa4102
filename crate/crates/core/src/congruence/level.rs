use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use super::factor::{factor_modulus, sl2_order};
use super::mat::Mat2;
use crate::error::{Error, Result};
use crate::pell::Discriminant;
use crate::ring::{Modulus, QuadInt, Ring};

/// A matrix over `O_d / u O_d`, entries in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueMat {
    pub entries: [QuadInt; 4],
}

impl ResidueMat {
    pub fn scalar(m: &Modulus, x: &QuadInt) -> ResidueMat {
        let z = m.reduce(&m.ring().zero());
        let x = m.reduce(x);
        ResidueMat {
            entries: [x.clone(), z.clone(), z, x],
        }
    }

    pub fn mul(&self, o: &ResidueMat, m: &Modulus) -> ResidueMat {
        let [p, q, r, s] = &self.entries;
        let [p2, q2, r2, s2] = &o.entries;
        ResidueMat {
            entries: [
                m.reduce(&(&(p * p2) + &(q * r2))),
                m.reduce(&(&(p * q2) + &(q * s2))),
                m.reduce(&(&(r * p2) + &(s * r2))),
                m.reduce(&(&(r * q2) + &(s * s2))),
            ],
        }
    }
}

pub fn reduce_mat(mat: &Mat2, m: &Modulus) -> ResidueMat {
    ResidueMat {
        entries: mat.entries().map(|x| m.reduce(x)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSource {
    pub t: QuadInt,
    pub u: QuadInt,
    #[serde(rename = "D")]
    pub d_value: QuadInt,
}

/// The level `u` with residue `tau`, defining `SL_2(O_d)_tau[u]`, the
/// preimage of `{Id, tau Id}` under reduction mod `u`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceLevel {
    pub u: QuadInt,
    pub tau: QuadInt,
    pub source: Option<LevelSource>,
    /// `beta` with `D - beta^2` in `4 O_d` that produced `tau`.
    pub beta: Option<QuadInt>,
    /// Number of alternative `beta` that reproduced the same `tau`.
    pub alternatives_checked: usize,
}

impl CongruenceLevel {
    /// The principal level: `tau = 1`.
    pub fn principal(u: &QuadInt) -> Result<CongruenceLevel> {
        let m = Modulus::new(u)?;
        Ok(CongruenceLevel {
            u: u.clone(),
            tau: m.reduce(&u.ring().one()),
            source: None,
            beta: None,
            alternatives_checked: 0,
        })
    }

    pub fn modulus(&self) -> Modulus {
        Modulus::new(&self.u).expect("level modulus is nonzero")
    }

    pub fn ring(&self) -> Ring {
        self.u.ring()
    }

    /// `tau = 1` in `O_d / u O_d`.
    pub fn is_degenerate(&self) -> bool {
        self.modulus().congruent(&self.tau, &self.ring().one())
    }
}

fn tau_from(t: &QuadInt, u: &QuadInt, beta: &QuadInt, m: &Modulus) -> Result<QuadInt> {
    let num = t - &(beta * u);
    let tau1 = num
        .div_int(&BigInt::from(2))
        .ok_or_else(|| Error::invariant(format!("(t - beta u)/2 is not integral for beta = {beta}")))?;
    Ok(m.reduce(&tau1))
}

/// Computes `tau = (t - beta u)/2 mod u` and checks `2 tau = t`,
/// `tau^2 = 1`, and independence from `beta`.
pub fn make_level(t: &QuadInt, u: &QuadInt, disc: &Discriminant) -> Result<CongruenceLevel> {
    let ring = u.ring();
    if u.is_zero() || u.is_unit() {
        return Err(Error::usage(format!("u = {u} gives a trivial level")));
    }
    let d_value = &disc.value;
    if &(t * t) - &(d_value * &(u * u)) != ring.int(4) {
        return Err(Error::precondition(format!(
            "({t}, {u}) does not solve t^2 - D u^2 = 4"
        )));
    }
    let m = Modulus::new(u)?;
    let beta = disc.witness.clone();
    let four = BigInt::from(4);
    if (d_value - &(&beta * &beta)).div_int(&four).is_none() {
        return Err(Error::invariant("witness does not satisfy D = beta^2 mod 4"));
    }
    let tau = tau_from(t, u, &beta, &m)?;
    if !m.congruent(&tau.scale(&BigInt::from(2)), t) {
        return Err(Error::invariant("2 tau differs from t mod u"));
    }
    if !m.congruent(&(&tau * &tau), &ring.one()) {
        return Err(Error::invariant("tau^2 differs from 1 mod u"));
    }
    let alternatives = [
        &beta + &ring.int(2),
        &beta + &ring.elem(0, 2),
        -&beta,
        &beta - &ring.elem(2, 2),
    ];
    for alt in &alternatives {
        if tau_from(t, u, alt, &m)? != tau {
            return Err(Error::invariant(format!("tau changes with beta = {alt}")));
        }
    }
    Ok(CongruenceLevel {
        u: u.clone(),
        tau,
        source: Some(LevelSource {
            t: t.clone(),
            u: u.clone(),
            d_value: d_value.clone(),
        }),
        beta: Some(beta),
        alternatives_checked: alternatives.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Principal,
    TauCoset,
    No,
}

pub fn member(mat: &Mat2, level: &CongruenceLevel) -> Membership {
    let m = level.modulus();
    let red = reduce_mat(mat, &m);
    if red == ResidueMat::scalar(&m, &level.ring().one()) {
        Membership::Principal
    } else if red == ResidueMat::scalar(&m, &level.tau) {
        Membership::TauCoset
    } else {
        Membership::No
    }
}

/// `u^2 | tr(M) - 2` for `M` in the principal congruence subgroup of level
/// `u`.
pub fn trace_congruence_check(mat: &Mat2, u: &QuadInt) -> Result<bool> {
    let principal = CongruenceLevel::principal(u)?;
    if member(mat, &principal) != Membership::Principal {
        return Err(Error::usage(format!("{mat} is not congruent to Id mod {u}")));
    }
    let u2 = u * u;
    Ok(u2.divides(&(&mat.trace() - &u.ring().int(2))))
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelIndex {
    /// `[SL_2(O_d) : SL_2(O_d)_tau[u]]`.
    #[serde_as(as = "DisplayFromStr")]
    pub index: BigInt,
    /// `|SL_2(O_d / u O_d)|`.
    #[serde_as(as = "DisplayFromStr")]
    pub sl2_order: BigInt,
    pub degenerate: bool,
    pub warning: Option<String>,
}

/// Index of the level, assuming reduction onto `SL_2(O_d / u O_d)` is
/// surjective.
pub fn level_index(level: &CongruenceLevel) -> Result<LevelIndex> {
    let order = sl2_order(&factor_modulus(&level.u)?);
    let degenerate = level.is_degenerate();
    if degenerate {
        return Ok(LevelIndex {
            index: order.clone(),
            sl2_order: order,
            degenerate,
            warning: Some("tau = 1 mod u: the two cosets coincide".into()),
        });
    }
    let two = BigInt::from(2);
    if &order % &two != BigInt::from(0) {
        return Err(Error::invariant("|SL_2(O/u)| is odd"));
    }
    Ok(LevelIndex {
        index: &order / two,
        sl2_order: order,
        degenerate,
        warning: None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionReport {
    /// Integral traces in `(-2, 2)` allowed in the principal coset by
    /// `tr = 2 mod u^2`.
    pub principal_candidates: Vec<i64>,
    /// Those allowed in the `tau` coset by `tau tr = 1 + tau^2 mod u^2`.
    pub coset_candidates: Vec<i64>,
    pub certified: bool,
}

/// Rules out elliptic elements through trace congruences.
///
/// An element `tau Id + u X` of determinant one has
/// `tau tr = 1 + tau^2 (mod u^2)` for any lift `tau`, so a real trace `v`
/// in `{-1, 0, 1}` must satisfy that congruence.
pub fn torsion_scan(level: &CongruenceLevel) -> TorsionReport {
    let ring = level.ring();
    let u2 = &level.u * &level.u;
    let tau = &level.tau;
    let rhs = &ring.one() + &(tau * tau);
    let principal_candidates: Vec<i64> = (-1..=1)
        .filter(|&v| u2.divides(&(&ring.int(v) - &ring.int(2))))
        .collect();
    let coset_candidates: Vec<i64> = (-1..=1)
        .filter(|&v| u2.divides(&(&(tau * &ring.int(v)) - &rhs)))
        .collect();
    let certified = principal_candidates.is_empty() && coset_candidates.is_empty();
    TorsionReport {
        principal_candidates,
        coset_candidates,
        certified,
    }
}
