use std::collections::HashSet;

use bianchi::congruence::{
    level_index, make_level, member, reduce_mat, systole_certificate, CongruenceLevel, Mat2, Membership,
};
use bianchi::forms::{automorph, enumerate_forms};
use bianchi::pell::{discriminants, m_index, pell_fundamental, power_sequence, PellSolution};
use bianchi::ring::{Modulus, QuadInt, Ring};
use bianchi::verify::{random_principal, random_word};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gauss() -> Ring {
    Ring::new(1).unwrap()
}

fn level_5i() -> CongruenceLevel {
    let r = gauss();
    let disc = bianchi::pell::is_discriminant(&r.int(5)).unwrap();
    make_level(&r.elem(0, 11), &r.elem(0, 5), &disc).unwrap()
}

type G = (i64, i64);

fn gmul(x: G, y: G) -> G {
    (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0)
}

fn gnorm(x: G) -> i64 {
    x.0 * x.0 + x.1 * x.1
}

fn gdiv(x: G, y: G) -> Option<G> {
    let n = gnorm(y);
    let z = gmul(x, (y.0, -y.1));
    (z.0 % n == 0 && z.1 % n == 0).then(|| (z.0 / n, z.1 / n))
}

fn md5(x: G) -> G {
    (x.0.rem_euclid(5), x.1.rem_euclid(5))
}

/// Entries of `[[p, q], [r, s]]` with all norms at most `h`, determinant one,
/// congruent to `Id` or `3i Id` modulo 5, found by looping over `p, q, r`.
fn brute_members(h: i64) -> Vec<[G; 4]> {
    let k = (h as f64).sqrt() as i64 + 1;
    let ball: Vec<G> = (-k..=k)
        .flat_map(|a| (-k..=k).map(move |b| (a, b)))
        .filter(|&x| gnorm(x) <= h)
        .collect();
    let mut out = Vec::new();
    for &p in &ball {
        let pc = md5(p);
        if pc != (1, 0) && pc != (0, 3) {
            continue;
        }
        for &q in ball.iter().filter(|&&q| md5(q) == (0, 0)) {
            for &r in ball.iter().filter(|&&r| md5(r) == (0, 0)) {
                let qr = gmul(q, r);
                let Some(s) = gdiv((1 + qr.0, qr.1), p) else { continue };
                if gnorm(s) <= h && md5(s) == pc {
                    out.push([p, q, r, s]);
                }
            }
        }
    }
    out
}

fn coords(m: &Mat2) -> [G; 4] {
    m.entries().map(|x| (x.a().to_i64().unwrap(), x.b().to_i64().unwrap()))
}

#[test]
fn systole_matches_brute_force() {
    let level = level_5i();
    let t = gauss().elem(0, 11);
    for h in [30, 45, 64, 100] {
        let members = brute_members(h);
        let lox: Vec<_> = members
            .iter()
            .filter(|m| {
                let tr = (m[0].0 + m[3].0, m[0].1 + m[3].1);
                !(tr.1 == 0 && tr.0.abs() <= 2)
            })
            .collect();
        let val = |m: &[G; 4]| {
            let tr = (m[0].0 + m[3].0, m[0].1 + m[3].1);
            let t2 = gmul(tr, tr);
            (gnorm(tr) as f64 + (gnorm((t2.0 - 4, t2.1)) as f64).sqrt()) / 4.0
        };
        let min = lox.iter().map(|m| val(m)).fold(f64::INFINITY, f64::min);
        let at_min: HashSet<[G; 4]> = lox.iter().filter(|m| val(m) - min < 1e-9).map(|m| **m).collect();

        let rep = systole_certificate(&level, &t, h as u64).unwrap();
        assert_eq!(rep.members, members.len() as u64, "height {h}");
        assert_eq!(rep.loxodromic, lox.len() as u64, "height {h}");
        assert_eq!(rep.violation_count, 0);
        assert_eq!(rep.witness_count, at_min.len() as u64, "height {h}");
        match rep.min_ell {
            Some(e) => assert!((e - min.acosh()).abs() < 1e-12),
            None => assert!(lox.is_empty()),
        }
        for w in &rep.witnesses {
            assert!(at_min.contains(&coords(w)));
        }
        let floor = 61.5f64;
        assert!(lox.iter().all(|m| val(m) >= floor - 1e-9));
    }
}

#[test]
fn reduction_is_multiplicative() {
    let r = gauss();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let moduli: Vec<Modulus> = [r.elem(1, 1), r.int(2), r.elem(0, 5), r.elem(3, 2), r.int(6)]
        .iter()
        .map(|u| Modulus::new(u).unwrap())
        .collect();
    for k in 0..1000 {
        let m = &moduli[k % moduli.len()];
        let (a, b) = (rng.gen_range(0..10), rng.gen_range(0..10));
        let x = random_word(r, &mut rng, a);
        let y = random_word(r, &mut rng, b);
        let lhs = reduce_mat(&x.mul(&y), m);
        let rhs = reduce_mat(&x, m).mul(&reduce_mat(&y, m), m);
        assert_eq!(lhs, rhs, "{x} {y} mod {}", m.modulus());
    }
}

#[test]
fn coset_arithmetic() {
    let level = level_5i();
    let w = Mat2::from_ints(gauss(), [(0, 3), (0, 5), (0, 5), (0, 8)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let len = rng.gen_range(1..6);
        let p = random_principal(&level.u, &mut rng, len);
        assert_eq!(member(&p, &level), Membership::Principal);
        let x = p.mul(&w);
        assert_eq!(member(&x, &level), Membership::TauCoset);
        assert_eq!(member(&x.mul(&w), &level), Membership::Principal);
        assert_eq!(member(&x.inverse(), &level), Membership::TauCoset);
        assert_eq!(member(&w.conjugate_by(&p), &level), Membership::TauCoset);
    }
}

#[test]
fn index_with_and_without_tau() {
    let r = gauss();
    let u = r.elem(2, 1);
    let minus = CongruenceLevel {
        u: u.clone(),
        tau: r.int(-1),
        source: None,
        beta: None,
        alternatives_checked: 0,
    };
    assert_eq!(level_index(&minus).unwrap().index, BigInt::from(60));
    let p = level_index(&CongruenceLevel::principal(&u).unwrap()).unwrap();
    assert!(p.degenerate);
    assert_eq!(p.index, BigInt::from(120));
}

/// For every Gaussian discriminant of small norm with a unit in reach, the
/// automorph powers `e^(m+1)` land in the level built from `(t_m, u_m)`.
#[test]
fn inducing_powers_lie_in_the_level() {
    let r = gauss();
    let mut levels = 0;
    for disc in discriminants(r, 200) {
        let Ok(f) = pell_fundamental(&disc, 2000) else { continue };
        let Ok(mi) = m_index(&f, 12) else { continue };
        let seq = power_sequence(&f, mi.m).unwrap();
        let e = seq.get(mi.m).unwrap();
        let Ok(level) = make_level(&e.t, &e.u, &disc) else { continue };
        levels += 1;
        let idx = level_index(&level).unwrap();
        let nu = e.u.norm();
        assert!(&idx.index * 2u32 <= &nu * &nu * &nu, "D={}", disc.value);
        let unit = PellSolution::new(f.sol.t.clone(), f.sol.u.clone(), disc.value.clone()).unwrap();
        for q in enumerate_forms(&disc, 5).unwrap() {
            let a = automorph(&q, &unit).unwrap().pow(mi.m as i64 + 1);
            assert_eq!(a.trace(), e.t);
            let want = if level.is_degenerate() {
                Membership::Principal
            } else {
                Membership::TauCoset
            };
            assert_eq!(member(&a, &level), want, "D={} Q={q}", disc.value);
        }
    }
    assert!(levels >= 5, "only {levels} levels");
}

#[test]
fn tau_is_a_square_root_of_one() {
    let r = gauss();
    for disc in discriminants(r, 300) {
        let Ok(f) = pell_fundamental(&disc, 2000) else { continue };
        let seq = power_sequence(&f, 4).unwrap();
        for e in &seq.entries {
            if e.u.is_unit() || e.u.is_zero() {
                continue;
            }
            let level = make_level(&e.t, &e.u, &disc).unwrap();
            let m = level.modulus();
            let tau: &QuadInt = &level.tau;
            assert!(m.congruent(&(tau * tau), &r.one()));
            assert!(m.congruent(&(tau * &r.int(2)), &e.t));
        }
    }
}
