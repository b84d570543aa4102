use std::io::Write;
use std::process::ExitCode;

use bianchi::congruence::{level_index, make_level, systole_certificate, torsion_scan};
use bianchi::forms::class_number_estimate;
use bianchi::geom::{classify, complex_length, displacement, IsometryClass};
use bianchi::pell::{discriminants, is_discriminant, m_index, pell_fundamental, verify_pell_bounds, Discriminant};
use bianchi::report::{growth_diagnostic, kiss_lower_bound, sarnak_average, AverageBudgets, Budgets};
use bianchi::ring::Ring;
use bianchi::verify::{run_suite, Suite};
use bianchi::{Error, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "bianchi", version, about = "Pell units, form classes and congruence levels over O_d")]
struct Cli {
    /// The ring O_d, one of 1, 2, 3, 7, 11, 19, 43, 67, 163.
    #[arg(long, global = true, default_value_t = 1)]
    d: u32,
    #[arg(long, global = true, value_enum, default_value_t = Out::Json)]
    out: Out,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Out {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fundamental solution of t^2 - D u^2 = 4 by search over N(u) <= bound.
    Pell {
        #[arg(long = "D")]
        disc: String,
        #[arg(long, default_value_t = 100)]
        bound: u64,
        /// Rows n = 0..=n_max of the bound report (CSV output).
        #[arg(long, default_value_t = 6)]
        n_max: usize,
    },
    /// Discriminants with N(D) <= max-norm.
    Discriminants {
        #[arg(long, default_value_t = 50)]
        max_norm: u64,
    },
    /// Classes of primitive forms of discriminant D.
    Classnumber {
        #[arg(long = "D")]
        disc: String,
        #[arg(long, default_value_t = 10)]
        a_bound: u64,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Isometry class and lengths for a trace "re,im".
    Length {
        #[arg(long, allow_hyphen_values = true)]
        trace: String,
    },
    /// Residue tau and index of the level built from (t, u, D).
    Level {
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long = "D")]
        disc: String,
    },
    /// Systole certificate for the level built from (t, u, D).
    Systole {
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long = "D")]
        disc: String,
        #[arg(long, default_value_t = 650)]
        height: u64,
    },
    /// Kissing-number lower bound for discriminant D.
    Kiss {
        #[arg(long = "D")]
        disc: String,
        #[arg(long, default_value_t = Budgets::default().pell_bound)]
        pell_bound: u64,
        #[arg(long, default_value_t = Budgets::default().a_bound)]
        a_bound: u64,
        #[arg(long, default_value_t = Budgets::default().depth)]
        depth: usize,
        #[arg(long, default_value_t = Budgets::default().m_cap)]
        m_cap: usize,
    },
    /// Average class number over discriminants with |eps_D| <= x.
    Average {
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 100)]
        disc_bound: u64,
        #[arg(long, default_value_t = 200)]
        pell_bound: u64,
        #[arg(long, default_value_t = 5)]
        a_bound: u64,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Fixed c_d; fitted by least squares when omitted.
        #[arg(long)]
        c_d: Option<f64>,
    },
    /// Seeded randomized property suite.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

struct Output {
    out: Out,
    buf: Vec<u8>,
}

impl Output {
    fn json<T: Serialize>(&mut self, v: &T) {
        serde_json::to_writer_pretty(&mut self.buf, v).expect("serializable");
        self.buf.push(b'\n');
    }

    fn csv(&mut self, header: &[&str], rows: Vec<Vec<String>>) {
        let mut w = csv::Writer::from_writer(&mut self.buf);
        w.write_record(header).expect("in-memory write");
        for r in rows {
            w.write_record(&r).expect("in-memory write");
        }
        w.flush().expect("in-memory write");
    }
}

fn disc_of(ring: Ring, text: &str) -> Result<Discriminant> {
    let v = ring.parse(text)?;
    is_discriminant(&v).ok_or_else(|| Error::precondition(format!("{v} is not a discriminant")))
}

fn parse_trace(text: &str) -> Result<Complex64> {
    let bad = || Error::usage(format!("trace must be \"re,im\", got {text:?}"));
    let (re, im) = text.split_once(',').ok_or_else(bad)?;
    Ok(Complex64::new(
        re.trim().parse().map_err(|_| bad())?,
        im.trim().parse().map_err(|_| bad())?,
    ))
}

fn s<T: ToString>(x: T) -> String {
    x.to_string()
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn run(cli: Cli, o: &mut Output) -> Result<u8> {
    let ring = Ring::new(cli.d)?;
    let csv = o.out == Out::Csv;
    match cli.cmd {
        Cmd::Pell { disc, bound, n_max } => {
            let disc = disc_of(ring, &disc)?;
            let f = pell_fundamental(&disc, bound)?;
            if csv {
                let r = verify_pell_bounds(&f, n_max)?;
                let rows = r
                    .rows
                    .iter()
                    .map(|x| vec![x.lemma.clone(), s(x.n), s(x.lhs), s(x.rhs), serde_json::to_value(x.verdict).expect("enum").as_str().unwrap_or_default().to_string()])
                    .collect();
                o.csv(&["lemma", "n", "lhs", "rhs", "verdict"], rows);
            } else {
                let m = m_index(&f, 12).ok();
                o.json(&json!({
                    "t": f.sol.t,
                    "u": f.sol.u,
                    "eps_abs": f.sol.eps_abs,
                    "status": f.status,
                    "globally_minimal": f.globally_minimal,
                    "search_norm_bound": f.search_norm_bound,
                    "m": m.map(|m| m.m),
                }));
            }
        }
        Cmd::Discriminants { max_norm } => {
            let ds = discriminants(ring, max_norm);
            if csv {
                let rows = ds
                    .iter()
                    .map(|x| vec![s(x.value.a()), s(x.value.b()), s(x.witness.a()), s(x.witness.b())])
                    .collect();
                o.csv(&["a", "b", "witness_a", "witness_b"], rows);
            } else {
                o.json(&ds);
            }
        }
        Cmd::Classnumber { disc, a_bound, depth } => {
            let e = class_number_estimate(&disc_of(ring, &disc)?, a_bound, depth)?;
            if csv {
                let rows = e
                    .representatives
                    .iter()
                    .map(|f| vec![s(&f.a), s(&f.b), s(&f.c)])
                    .collect();
                o.csv(&["a", "b", "c"], rows);
            } else {
                o.json(&e);
            }
        }
        Cmd::Length { trace } => {
            let tr = parse_trace(&trace)?;
            let class = classify(tr);
            let (ell, theta, disp) = if class == IsometryClass::Loxodromic {
                let l = complex_length(tr)?;
                (Some(l.ell), Some(l.theta), Some(displacement(tr)?))
            } else {
                (None, None, None)
            };
            if csv {
                o.csv(
                    &["class", "ell", "theta", "displacement"],
                    vec![vec![format!("{class:?}"), opt(&ell), opt(&theta), opt(&disp)]],
                );
            } else {
                o.json(&json!({"class": class, "ell": ell, "theta": theta, "displacement": disp}));
            }
        }
        Cmd::Level { t, u, disc } => {
            let level = make_level(&ring.parse(&t)?, &ring.parse(&u)?, &disc_of(ring, &disc)?)?;
            let idx = level_index(&level)?;
            let tor = torsion_scan(&level);
            if csv {
                o.csv(
                    &["tau", "index", "sl2_order", "degenerate", "torsion_certified"],
                    vec![vec![s(&level.tau), s(&idx.index), s(&idx.sl2_order), s(idx.degenerate), s(tor.certified)]],
                );
            } else {
                o.json(&json!({"level": level, "index": idx, "torsion": tor}));
            }
        }
        Cmd::Systole { t, u, disc, height } => {
            let t = ring.parse(&t)?;
            let level = make_level(&t, &ring.parse(&u)?, &disc_of(ring, &disc)?)?;
            let c = systole_certificate(&level, &t, height)?;
            if csv {
                let rows = c
                    .witnesses
                    .iter()
                    .map(|m| m.entries().iter().map(s).collect())
                    .collect();
                o.csv(&["p", "q", "r", "s"], rows);
            } else {
                o.json(&c);
            }
        }
        Cmd::Kiss { disc, pell_bound, a_bound, depth, m_cap } => {
            let budgets = Budgets { pell_bound, a_bound, depth, m_cap };
            let r = kiss_lower_bound(&ring.parse(&disc)?, budgets)?;
            let growth = growth_diagnostic(&r).ok();
            if csv {
                let h = r.h_estimate.as_ref().map(|e| e.classes_found);
                o.csv(
                    &["d", "D", "m", "t_m", "u_m", "tau", "group_order", "stabilizer_order", "h_estimate", "kiss_lower", "systole", "manifold_volume"],
                    vec![vec![
                        s(r.d),
                        s(&r.d_value),
                        opt(&r.m),
                        opt(&r.t_m),
                        opt(&r.u_m),
                        opt(&r.tau),
                        opt(&r.group_order),
                        opt(&r.stabilizer_order),
                        opt(&h),
                        opt(&r.kiss_lower),
                        opt(&r.systole),
                        opt(&r.manifold_volume),
                    ]],
                );
            } else {
                o.json(&json!({"report": r, "growth": growth}));
            }
            if !r.is_complete() {
                return Ok(3);
            }
        }
        Cmd::Average { x, disc_bound, pell_bound, a_bound, depth, c_d } => {
            let budgets = AverageBudgets {
                disc_norm_bound: disc_bound,
                pell_bound,
                a_bound,
                depth,
            };
            let t = sarnak_average(ring, x, budgets, c_d)?;
            if csv {
                let rows = t
                    .found
                    .iter()
                    .map(|e| vec![s(&e.d_value), s(e.eps_abs), s(e.h_estimate)])
                    .collect();
                o.csv(&["D", "eps_abs", "h_estimate"], rows);
            } else {
                o.json(&t);
            }
        }
        Cmd::Verify { suite, cases } => {
            let suite: Suite = suite.parse()?;
            let r = run_suite(suite, ring, cli.seed, cases)?;
            if csv {
                let rows = r
                    .checks
                    .iter()
                    .map(|c| vec![c.name.clone(), s(c.cases), s(c.failures), opt(&c.first_failure)])
                    .collect();
                o.csv(&["check", "cases", "failures", "first_failure"], rows);
            } else {
                o.json(&r);
            }
            if !r.passed {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut o = Output { out: cli.out, buf: Vec::new() };
    let code = match run(cli, &mut o) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code() as u8
        }
    };
    std::io::stdout().write_all(&o.buf).expect("stdout");
    ExitCode::from(code)
}

