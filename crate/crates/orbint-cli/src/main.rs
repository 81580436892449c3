//! Command-line front end: counting-function tables, orbital integrals,
//! tree shapes, intersection numbers, and the full identity sweep.
//!
//! Exit codes: 0 success (and all rows pass for `verify`), 1 verification
//! failure, 2 usage error, 3 internal invariant violation (precision,
//! certificate, or ledger failure).

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use orbint::atverify::{summary, sweep, SweepOptions, VerifyReport};
use orbint::bttree::{ball_count, compute_t, conj_linear_from_invariant};
use orbint::error::Error;
use orbint::intersect::{int_closed, int_geometric};
use orbint::latcount::{brute_pair_count, case_instance, pair_count, CountCase};
use orbint::laurent::LaurentPoly;
use orbint::localfield::{FieldParams, Lambda, NumInvariant, QuadAlgebra};
use orbint::orbital::{
    default_c_max, functional_equation_check, orbital_brute, orbital_closed, TestFn,
};

#[derive(Parser)]
#[command(name = "orbint", version, about = "exact orbital integrals, tree shapes, and intersection-number verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
    Md,
}

#[derive(Subcommand)]
enum Command {
    /// Compare closed-form lattice-pair counts with brute-force enumeration.
    Count {
        #[arg(long)]
        q: u64,
        /// Top relative positions range over 0 <= a <= b <= amax.
        #[arg(long, default_value_t = 3)]
        amax: i64,
    },
    /// Compute one orbital integral as a Laurent polynomial in u = q^s.
    Orbital {
        #[arg(long)]
        q: u64,
        /// Invariant in the form kind:r:d2 (kind one of split|inert|ram).
        #[arg(long)]
        inv: String,
        /// Test function: par, iw, or d.
        #[arg(long = "fn")]
        func: String,
        /// Recompute by brute-force lattice enumeration and compare.
        #[arg(long)]
        brute: bool,
        /// Dump the enumerated contributions.
        #[arg(long)]
        trace: bool,
    },
    /// Explore the maximizing set of the tree multiplicity function.
    Tree {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        inv: String,
        /// Print the dual-graph edge list as CSV.
        #[arg(long)]
        edges: bool,
    },
    /// Intersection numbers for a matched invariant.
    Intersect {
        #[arg(long)]
        q: u64,
        /// Hasse invariant: 1/4 or 3/4.
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        inv: String,
        /// Use the geometric recipe instead of the closed form.
        #[arg(long)]
        geometric: bool,
    },
    /// Verify the fundamental-lemma and arithmetic-transfer identities.
    Verify {
        /// Comma-separated residue cardinalities, e.g. 2,3.
        #[arg(long, default_value = "2,3")]
        q: String,
        #[arg(long, default_value_t = 6)]
        rmax: i64,
        #[arg(long, default_value_t = -2)]
        rmin: i64,
        #[arg(long, default_value_t = 4)]
        d2max: i64,
        /// Which transfer identities: 1/4, 3/4, or both.
        #[arg(long, default_value = "both")]
        lambda: String,
        /// Skip the brute-force re-derivation of left sides.
        #[arg(long)]
        no_brute: bool,
        /// Skip the geometric intersection recipes.
        #[arg(long)]
        no_geometric: bool,
        #[arg(long, value_enum, default_value_t = OutFormat::Md)]
        out: OutFormat,
        /// Write the table to a file instead of standard output.
        #[arg(long)]
        out_file: Option<String>,
    },
}

fn poly_json(p: &LaurentPoly) -> serde_json::Value {
    serde_json::json!({
        "text": p.to_string(),
        "terms": p.to_triples().iter().map(|(k, n, d)| {
            serde_json::json!({"exp": k, "num": n, "den": d})
        }).collect::<Vec<_>>(),
    })
}

fn run() -> Result<i32, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Count { q, amax } => {
            let params = FieldParams::new(q, 64)?;
            let zero = params.zero();
            println!("a,b,k,case,formula,brute,match");
            let mut all_ok = true;
            for a in 0..=amax {
                for b in a..=amax {
                    for (case, name) in [
                        (CountCase::Balanced, "balanced"),
                        (CountCase::Widened, "widened"),
                        (CountCase::Narrowed, "narrowed"),
                    ] {
                        let Ok((m0, m0f, m1, m1f)) = case_instance(zero.clone(), case, a, b)
                        else {
                            continue;
                        };
                        for k in 0..=(a + b) {
                            let formula = pair_count(case, a, b, k, q as i128)?;
                            let brute = brute_pair_count(&m0, &m0f, &m1, &m1f, k)?;
                            let ok = formula == brute;
                            all_ok &= ok;
                            println!("{a},{b},{k},{name},{formula},{brute},{ok}");
                        }
                    }
                }
            }
            Ok(if all_ok { 0 } else { 1 })
        }
        Command::Orbital { q, inv, func, brute, trace } => {
            let inv = NumInvariant::parse(&inv)?;
            let fnk = TestFn::parse(&func)?;
            let poly = if brute {
                let alg = QuadAlgebra::new(inv.kind, FieldParams::for_invariant(q, &inv)?)?;
                let w = alg.element_from_invariant(&inv)?;
                let p = orbital_brute(fnk, &alg, &w, default_c_max(&inv))?;
                if trace {
                    let germs = orbint::orbital::orbital_brute_germs(
                        if fnk == TestFn::Dnorm { TestFn::Iw } else { fnk },
                        &alg,
                        &w,
                        default_c_max(&inv),
                    )?;
                    eprintln!("principal contributions by index: {:?}", germs.principal_counts);
                    eprintln!("other contributions by index: {:?}", germs.other_counts);
                    let zm = alg.zeta_mat();
                    for c in 0..=2i64 {
                        let orbit =
                            orbint::lattices::unit_conductor_orbit(c, &zm, alg.params.zero())?;
                        eprintln!("conductor {c}: {} top lattices", orbit.len());
                        for lat in orbit.iter().take(3) {
                            eprintln!("  {}", lat.render());
                        }
                    }
                }
                let closed = orbital_closed(fnk, &inv, q as i128)?;
                if p != closed {
                    return Err(Error::Internal(format!(
                        "brute/closed mismatch: {p} vs {closed}"
                    )));
                }
                p
            } else {
                orbital_closed(fnk, &inv, q as i128)?
            };
            let out = serde_json::json!({
                "q": q,
                "inv": inv.to_string(),
                "fn": func,
                "poly": poly_json(&poly),
                "central": poly.central_value_int()?.to_string(),
                "dcoeff": poly.central_derivative_int()?.to_string(),
                "feq_ok": functional_equation_check(fnk, &inv, &poly),
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
            Ok(0)
        }
        Command::Tree { q, inv, edges } => {
            let inv = NumInvariant::parse(&inv)?;
            let z = conj_linear_from_invariant(q, &inv)?;
            let window = compute_t(&z, 2)?;
            let shape = window.classify_shape(&inv)?;
            println!("inv: {inv}  q: {q}");
            println!("shape: {}", shape.render());
            println!("max multiplicity m: {}", window.m);
            println!("maximizing vertices: {}", window.t_keys.len());
            println!("window vertices (radius {}): {}", window.radius, window.info.len());
            for m in 0..=window.m.max(0) {
                println!(
                    "ball radius {m}: census {} formula {}",
                    window.ball_census(m)?,
                    ball_count(shape, m, q as i128)
                );
            }
            if edges {
                println!("edge list (maximizing set):");
                println!("from,to");
                for (i, k) in window.t_keys.iter().enumerate() {
                    for nb in &window.info[k].neighbors {
                        if let Ok(j) = window.t_keys.binary_search(nb) {
                            if j > i {
                                println!("{i},{j}");
                            }
                        }
                    }
                }
            }
            Ok(0)
        }
        Command::Intersect { q, lambda, inv, geometric } => {
            let lambda = Lambda::parse(&lambda)?;
            let inv = NumInvariant::parse(&inv)?;
            let out = if geometric {
                let r = int_geometric(lambda, &inv, q as i128)?;
                serde_json::json!({
                    "q": q, "lambda": lambda.to_string(), "inv": inv.to_string(),
                    "int": r.value.to_string(),
                    "int0": r.int0.to_string(),
                    "pure_sum": r.pure_sum.to_string(),
                    "artinian_total": r.artinian_total.to_string(),
                    "doubling": r.doubling.to_string(),
                    "ledger": r.ledger.iter().map(|(row, n)| {
                        let (len, ideal) = orbint::intersect::artinian_length(*row, q as i128);
                        serde_json::json!({
                            "row": format!("{row:?}"), "count": n.to_string(),
                            "length": len.to_string(), "ideal": ideal,
                        })
                    }).collect::<Vec<_>>(),
                })
            } else {
                let v = int_closed(lambda, &inv, q as i128)?;
                serde_json::json!({
                    "q": q, "lambda": lambda.to_string(), "inv": inv.to_string(),
                    "int": v.to_string(),
                })
            };
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
            Ok(0)
        }
        Command::Verify { q, rmax, rmin, d2max, lambda, no_brute, no_geometric, out, out_file } => {
            let q_list: Vec<u64> = q
                .split(',')
                .map(|s| s.trim().parse::<u64>().map_err(|_| Error::Domain(format!("bad q list: {q}"))))
                .collect::<Result<_, _>>()?;
            let lambdas: Vec<Lambda> = match lambda.as_str() {
                "both" => vec![Lambda::Quarter, Lambda::ThreeQuarter],
                s => vec![Lambda::parse(s)?],
            };
            let opts = SweepOptions {
                r_min: rmin,
                r_max: rmax,
                d2_max: d2max,
                with_brute: !no_brute,
                with_geometric: !no_geometric,
            };
            let rows = sweep(&q_list, &lambdas, &opts)?;
            let (pass, fail) = summary(&rows);
            let rendered = render(&rows, out);
            match out_file {
                Some(path) => {
                    let mut f = std::fs::File::create(&path)
                        .map_err(|e| Error::Domain(format!("cannot write {path}: {e}")))?;
                    f.write_all(rendered.as_bytes())
                        .map_err(|e| Error::Domain(format!("cannot write {path}: {e}")))?;
                }
                None => print!("{rendered}"),
            }
            eprintln!("{pass} pass, {fail} fail");
            Ok(if fail == 0 { 0 } else { 1 })
        }
    }
}

fn render(rows: &[VerifyReport], fmt: OutFormat) -> String {
    let mut s = String::new();
    match fmt {
        OutFormat::Csv => {
            s.push_str(VerifyReport::csv_header());
            s.push('\n');
            for r in rows {
                s.push_str(&r.to_csv());
                s.push('\n');
            }
        }
        OutFormat::Json => {
            let vals: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "check": match r.check {
                            orbint::atverify::CheckKind::FundamentalLemma => "fl",
                            orbint::atverify::CheckKind::ArithmeticTransfer => "at",
                        },
                        "q": r.q,
                        "inv": r.inv.to_string(),
                        "lambda": r.lambda.map(|l| l.to_string()),
                        "provenance": r.provenance.as_str(),
                        "lhs_dcoeff": r.lhs_dcoeff.to_string(),
                        "correction_coeff": r.correction_coeff.to_string(),
                        "rhs": r.rhs.to_string(),
                        "matched": r.matched,
                        "pass": r.pass,
                    })
                })
                .collect();
            s = serde_json::to_string_pretty(&vals).expect("serializable");
            s.push('\n');
        }
        OutFormat::Md => {
            s.push_str("| check | q | inv | lambda | prov | lhs | corr | rhs | matched | pass |\n");
            s.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
            for r in rows {
                s.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
                    match r.check {
                        orbint::atverify::CheckKind::FundamentalLemma => "fl",
                        orbint::atverify::CheckKind::ArithmeticTransfer => "at",
                    },
                    r.q,
                    r.inv,
                    r.lambda.map_or("-".to_string(), |l| l.to_string()),
                    r.provenance.as_str(),
                    r.lhs_dcoeff,
                    r.correction_coeff,
                    r.rhs,
                    r.matched,
                    if r.pass { "pass" } else { "FAIL" },
                ));
            }
        }
    }
    s
}

fn main() -> ExitCode {
    match run() {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Domain(_) | Error::InvalidInvariant(_) | Error::NotRealizable(_)
                | Error::Unsupported(_) => 2,
                Error::PrecisionUnderflow(_) | Error::Internal(_) | Error::NonUnit(_) => 3,
            };
            ExitCode::from(code)
        }
    }
}
