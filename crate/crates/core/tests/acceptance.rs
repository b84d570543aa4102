//! End-to-end acceptance checks. Runs without the libtest harness and prints
//! one line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bianchi::congruence::{
    factor_modulus, make_level, member, sl2_order, sl2_order_brute_force, systole_certificate,
    trace_congruence_check, CertStatus, CongruenceLevel, Mat2, Membership,
};
use bianchi::forms::{act, automorph, correspondence_check, enumerate_forms, QuadForm};
use bianchi::geom::{complex_length, displacement, displacement_exact};
use bianchi::pell::{
    discriminants, is_discriminant, m_index, pell_compose, pell_fundamental, power_sequence,
    verify_pell_bounds, PellSolution, Verdict,
};
use bianchi::report::{kiss_lower_bound, Budgets};
use bianchi::ring::{QuadInt, Ring};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took <= limit, || format!("took {took:?}, limit {limit:?}"))
}

fn gauss() -> Ring {
    Ring::new(1).unwrap()
}

fn golden() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

fn pell_worked_instance() -> Outcome {
    let start = Instant::now();
    let r = gauss();
    let disc = is_discriminant(&r.int(5)).ok_or("5 is not a discriminant")?;
    let f = pell_fundamental(&disc, 100).map_err(|e| e.to_string())?;
    ensure(f.sol.t == r.elem(0, 1) && f.sol.u == r.elem(0, 1), || {
        format!("fundamental ({}, {})", f.sol.t, f.sol.u)
    })?;
    let eps = f.sol.eps(128).abs().to_f64();
    ensure((eps - golden()).abs() <= 1e-9, || format!("|eps| = {eps}"))?;
    let seq = power_sequence(&f, 4).map_err(|e| e.to_string())?;
    let e1 = seq.get(1).unwrap();
    let e4 = seq.get(4).unwrap();
    ensure(e1.t == r.int(-3) && e1.u == r.int(-1), || format!("(t1, u1) = ({}, {})", e1.t, e1.u))?;
    ensure(e4.t == r.elem(0, 11) && e4.u == r.elem(0, 5), || {
        format!("(t4, u4) = ({}, {})", e4.t, e4.u)
    })?;
    let m = m_index(&f, 12).map_err(|e| e.to_string())?.m;
    ensure(m == 4, || format!("m = {m}"))?;
    within(start, Duration::from_secs(1))?;
    Ok(format!("(t,u) = (i,i), |eps| = {eps:.12}, m = {m}"))
}

/// `|eps|^(2(n+1))` from `(t0 + u0 sqrt(D))/2` in plain floating point.
fn eps_power_f64(s: &PellSolution, n: usize) -> f64 {
    let c = |x: &QuadInt| x.to_complex();
    let root = {
        let z = c(&s.d_value).sqrt();
        let e = (c(&s.t) + c(&s.u) * z) / 2.0;
        if e.norm() >= 1.0 {
            e
        } else {
            (c(&s.t) - c(&s.u) * z) / 2.0
        }
    };
    root.norm_sqr().powi(n as i32 + 1)
}

fn power_window_suite() -> Outcome {
    let start = Instant::now();
    let (mut units, mut rows, mut inconclusive, mut cross) = (0, 0, 0, 0);
    for d in [1, 2, 3] {
        let ring = Ring::new(d).unwrap();
        for disc in discriminants(ring, 400) {
            let f = match pell_fundamental(&disc, 10_000) {
                Ok(f) => f,
                Err(_) => continue,
            };
            units += 1;
            let report = verify_pell_bounds(&f, 6).map_err(|e| e.to_string())?;
            let seq = power_sequence(&f, 6).map_err(|e| e.to_string())?;
            for row in report.rows.iter().filter(|r| r.lemma.starts_with("power_norm")) {
                rows += 1;
                match row.verdict {
                    Verdict::Fail => {
                        return Err(format!("d={d} D={} n={} {}: {} vs {}", disc.value, row.n, row.lemma, row.lhs, row.rhs))
                    }
                    Verdict::Inconclusive => inconclusive += 1,
                    _ => {}
                }
            }
            for e in &seq.entries {
                let power = eps_power_f64(&f.sol, e.n);
                if power > 1e10 {
                    continue;
                }
                let nt = e.t.norm().to_f64().unwrap();
                cross += 1;
                ensure(nt - 3.0 < power && power < nt + 3.0, || {
                    format!("float oracle: d={d} D={} n={}: {power} vs {nt}", disc.value, e.n)
                })?;
            }
        }
    }
    ensure(units > 0, || "no units found".into())?;
    within(start, Duration::from_secs(300))?;
    Ok(format!(
        "{units} units, {rows} window rows, {inconclusive} inconclusive, {cross} float cross-checks"
    ))
}

fn length_formula() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0f64;
    let mut n = 0;
    while n < 10_000 {
        let tr = Complex64::new(rng.gen_range(-60.0..60.0), rng.gen_range(-60.0..60.0));
        let (Ok(ell), Ok(len)) = (displacement(tr), complex_length(tr)) else {
            continue;
        };
        if (tr * tr - 4.0).norm() < 1e-3 {
            continue;
        }
        n += 1;
        worst = worst.max((ell - len.ell).abs());
    }
    ensure(worst <= 1e-9, || format!("worst gap {worst:e}"))?;
    let r = gauss();
    for (tr, c) in [(r.int(3), 3.5f64), (r.elem(0, -4), 9.0), (r.elem(0, 11), 61.5)] {
        let want = c.acosh();
        let got = displacement_exact(&tr).map_err(|e| e.to_string())?;
        let float = displacement(tr.to_complex()).map_err(|e| e.to_string())?;
        ensure((got - want).abs() <= 1e-9 && (float - want).abs() <= 1e-9, || {
            format!("trace {tr}: {got} / {float} vs acosh({c}) = {want}")
        })?;
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!("10000 traces, worst gap {worst:.1e}"))
}

fn finite_group_oracle() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for d in [1, 2, 3] {
        let ring = Ring::new(d).unwrap();
        let mut seen: Vec<QuadInt> = Vec::new();
        for u in ring.lattice_ball(25) {
            if u.is_zero() || u.is_unit() {
                continue;
            }
            let c = u.canonical_associate();
            if seen.contains(&c) {
                continue;
            }
            seen.push(c);
            let formula = sl2_order(&factor_modulus(&u).map_err(|e| e.to_string())?);
            let brute = sl2_order_brute_force(&u).map_err(|e| e.to_string())?;
            ensure(formula == brute, || format!("d={d} u={u}: {formula} vs {brute}"))?;
            checked += 1;
        }
    }
    let r = gauss();
    for (u, want) in [(r.elem(1, 1), 6u32), (r.int(2), 48), (r.elem(2, 1), 120)] {
        let got = sl2_order(&factor_modulus(&u).map_err(|e| e.to_string())?);
        ensure(got == BigInt::from(want), || format!("u={u}: {got}, expected {want}"))?;
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!("{checked} moduli, orders 6/48/120 reproduced"))
}

/// Elementary matrices `u x` above and below the diagonal, with their
/// conjugates by the standard generators.
fn level_generators(u: &QuadInt) -> Vec<Mat2> {
    let ring = u.ring();
    let mut out = Vec::new();
    for x in [ring.one(), ring.omega()] {
        let ux = u * &x;
        for e in [Mat2::upper(ux.clone()), Mat2::lower(ux.clone())] {
            out.push(e.inverse());
            for g in Mat2::standard_generators(ring) {
                out.push(e.conjugate_by(&g));
            }
            out.push(e);
        }
    }
    out
}

fn trace_congruence_words() -> Outcome {
    let start = Instant::now();
    let r = gauss();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for u in [r.elem(1, 1), r.int(2), r.elem(0, 5)] {
        let gens = level_generators(&u);
        let principal = CongruenceLevel::principal(&u).map_err(|e| e.to_string())?;
        let u2 = &u * &u;
        for _ in 0..500 {
            let len = rng.gen_range(1..=12);
            let w = (0..len).fold(Mat2::identity(r), |acc, _| acc.mul(gens.choose(&mut rng).unwrap()));
            ensure(member(&w, &principal) == Membership::Principal, || format!("word {w:?} left the level"))?;
            let gap = &w.trace() - &r.int(2);
            ensure(u2.divides(&gap), || format!("u={u}: u^2 does not divide {gap}"))?;
            ensure(matches!(trace_congruence_check(&w, &u), Ok(true)), || format!("u={u}: check rejects {w:?}"))?;
        }
    }
    within(start, Duration::from_secs(60))?;
    Ok("1500 words, u^2 | tr - 2 in every case".into())
}

fn inducing_matrix() -> Mat2 {
    Mat2::from_ints(gauss(), [(0, 3), (0, 5), (0, 5), (0, 8)]).unwrap()
}

fn level_5i() -> Result<CongruenceLevel, String> {
    let r = gauss();
    let disc = is_discriminant(&r.int(5)).ok_or("5 is not a discriminant")?;
    make_level(&r.elem(0, 11), &r.elem(0, 5), &disc).map_err(|e| e.to_string())
}

fn tau_and_coset() -> Outcome {
    let start = Instant::now();
    let r = gauss();
    let level = level_5i()?;
    ensure(level.modulus().congruent(&level.tau, &r.elem(0, 3)), || format!("tau = {}", level.tau))?;
    let q = QuadForm::from_ints(r, (1, 0), (1, 0), (-1, 0));
    let unit = PellSolution::new(r.elem(0, 1), r.elem(0, 1), r.int(5)).map_err(|e| e.to_string())?;
    let a5 = automorph(&q, &unit).map_err(|e| e.to_string())?.pow(5);
    let w = inducing_matrix();
    ensure(a5 == w, || format!("fifth power of the automorph is {a5:?}"))?;
    ensure(member(&w, &level) == Membership::TauCoset, || "not in the tau coset".into())?;
    ensure(w.trace() == r.elem(0, 11), || format!("trace {}", w.trace()))?;
    let ell = displacement_exact(&w.trace()).map_err(|e| e.to_string())?;
    ensure((ell - 61.5f64.acosh()).abs() <= 1e-9, || format!("displacement {ell}"))?;
    within(start, Duration::from_secs(1))?;
    Ok(format!("tau = 3i, witness in tau coset, ell = {ell:.10}"))
}

fn systole_at_650() -> Outcome {
    let start = Instant::now();
    let r = gauss();
    let level = level_5i()?;
    let rep = systole_certificate(&level, &r.elem(0, 11), 650).map_err(|e| e.to_string())?;
    ensure(rep.violation_count == 0, || format!("{} violations", rep.violation_count))?;
    ensure(rep.status == CertStatus::Certified, || format!("status {:?}", rep.status))?;
    let min = rep.min_ell.ok_or("no loxodromic member")?;
    ensure((min - 61.5f64.acosh()).abs() <= 1e-9, || format!("minimum {min}"))?;
    let w = inducing_matrix();
    let listed = rep.witnesses.contains(&w);
    let attains = rep.min_key.as_ref().is_some_and(|k| {
        k.cmp_key(&bianchi::congruence::CoshKey::of_trace(&w.trace())).is_eq()
    }) && w.max_entry_norm() <= BigInt::from(650)
        && member(&w, &level) != Membership::No;
    ensure(listed || attains, || "inducing matrix does not attain the minimum".into())?;
    within(start, Duration::from_secs(600))?;
    Ok(format!(
        "{} members, {} loxodromic, 0 violations, min {min:.10} over {} witnesses",
        rep.members, rep.loxodromic, rep.witness_count
    ))
}

fn form_algebra() -> Outcome {
    let start = Instant::now();
    let r = gauss();
    let disc = is_discriminant(&r.int(5)).ok_or("5 is not a discriminant")?;
    let forms = enumerate_forms(&disc, 10).map_err(|e| e.to_string())?;
    ensure(!forms.is_empty(), || "no forms".into())?;
    let gens = Mat2::standard_generators(r);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let word = |rng: &mut ChaCha8Rng| {
        let len = rng.gen_range(0..8);
        (0..len).fold(Mat2::identity(r), |acc, _| acc.mul(gens.choose(rng).unwrap()))
    };
    let mut actions = 0;
    for q in &forms {
        ensure(&act(&Mat2::identity(r), q) == q, || format!("identity moves {q}"))?;
        for _ in 0..25 {
            let (m, n) = (word(&mut rng), word(&mut rng));
            let composed = act(&m.mul(&n), q);
            ensure(composed == act(&n, &act(&m, q)), || format!("action law fails on {q}"))?;
            ensure(composed.disc() == q.disc(), || format!("disc moved on {q}"))?;
            actions += 1;
        }
    }
    let f = pell_fundamental(&disc, 100).map_err(|e| e.to_string())?;
    let seq = power_sequence(&f, 5).map_err(|e| e.to_string())?;
    let sols: Vec<PellSolution> = seq
        .entries
        .iter()
        .map(|e| PellSolution::new(e.t.clone(), e.u.clone(), disc.value.clone()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for q in &forms {
        for a in &sols {
            for b in &sols {
                let ab = pell_compose(a, b).map_err(|e| e.to_string())?;
                let lhs = automorph(q, &ab).map_err(|e| e.to_string())?;
                let rhs = automorph(q, a).map_err(|e| e.to_string())?.mul(&automorph(q, b).map_err(|e| e.to_string())?);
                ensure(lhs == rhs, || format!("automorph not multiplicative on {q}"))?;
            }
        }
    }
    let rep = correspondence_check(&forms, &f.sol, 6).map_err(|e| e.to_string())?;
    ensure(rep.passed && rep.anomalies.is_empty(), || format!("{rep:?}"))?;
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{} forms, {actions} action checks, {} pairs, {} equivalent, 0 anomalies",
        forms.len(),
        rep.pairs_checked,
        rep.equivalent_pairs
    ))
}

fn pipeline() -> Outcome {
    let r = gauss();
    let run = || kiss_lower_bound(&r.int(5), Budgets::default()).map_err(|e| e.to_string());
    let rep = run()?;
    ensure(rep.is_complete(), || format!("status {:?}", rep.status))?;
    let h = rep.h_estimate.as_ref().ok_or("no class estimate")?;
    let order = rep.group_order.clone().ok_or("no group order")?;
    let stab = rep.stabilizer_order.ok_or("no stabilizer")?;
    let m = rep.m.ok_or("no m")?;
    ensure(stab == 2 * (m + 1), || format!("stabilizer {stab} with m = {m}"))?;
    let kiss = rep.kiss_lower.clone().ok_or("no kiss bound")?;
    ensure(kiss == BigInt::from(h.classes_found) * &order / BigInt::from(stab), || {
        format!("kiss {kiss} from h={} |G|={order} stab={stab}", h.classes_found)
    })?;
    let sl2_5 = sl2_order(&factor_modulus(&r.int(5)).map_err(|e| e.to_string())?);
    ensure(order == &sl2_5 / 2u32, || format!("|G| = {order}, sl2(5) = {sl2_5}"))?;
    let t = rep.t_m.as_ref().ok_or("no t_m")?.to_complex();
    let want = ((t.norm_sqr() + (t * t - 4.0).norm()) / 4.0).acosh();
    let sys = rep.systole.ok_or("no systole")?;
    ensure((sys - want).abs() <= 1e-9, || format!("systole {sys} vs {want}"))?;
    let vol = rep.manifold_volume.ok_or("no volume")?;
    ensure(vol == rep.orbifold_volume * order.to_f64().unwrap(), || {
        format!("volume {vol} vs {} * {order}", rep.orbifold_volume)
    })?;
    let first = serde_json::to_string(&rep).map_err(|e| e.to_string())?;
    let second = serde_json::to_string(&run()?).map_err(|e| e.to_string())?;
    ensure(first == second, || "two runs serialize differently".into())?;
    Ok(format!("h = {}, |G| = {order}, stabilizer {stab}, kiss >= {kiss}, output stable", h.classes_found))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("pell worked instance", pell_worked_instance),
        ("power window suite", power_window_suite),
        ("length formula consistency", length_formula),
        ("finite group oracle", finite_group_oracle),
        ("trace congruence on level words", trace_congruence_words),
        ("tau and coset witness", tau_and_coset),
        ("systole certificate", systole_at_650),
        ("form and automorph algebra", form_algebra),
        ("pipeline determinism and consistency", pipeline),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name} ({took:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name} ({took:.2}s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
