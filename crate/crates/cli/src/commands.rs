use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use beeid_core::exponents::{
    bee_exponent_curves, capacity_curve, check_expurgated_midpoint, check_lp_below_double_gv,
    probability_grid, rate_grid, step_grid,
};
use beeid_core::montecarlo::{run_experiment, CodebookSource, ExperimentConfig};
use beeid_core::oracle::{exact_error_probability, min_bee_id_error, min_codebook_error, OracleOptions};
use beeid_core::verify::{run_suite, VerifyOptions};
use beeid_core::{Codebook, DecoderKind};
use serde::Serialize;
use serde_json::json;

use crate::args::{BoundsArgs, CapacityArgs, ExactArgs, FiguresArgs, SimulateArgs, VerifyArgs};
use crate::output::{manifest_path, num, write_file, Csv, RunManifest};
use crate::CliError;

/// Rates of the exponent figure: 0, 0.001, ..., 0.5.
const FIG3_STEPS: usize = 501;
/// Rates of the distance-ratio figure: 0.001, ..., 0.2.
const FIG6_POINTS: usize = 200;

pub const SIMULATE_HEADER: [&str; 13] = [
    "n", "m", "k", "p", "rate", "alpha", "decoder", "trials", "errors", "estimate", "ci_low", "ci_high", "seed",
];

/// Writes `text` to `out` or stdout, with a manifest beside a file output.
fn emit<P: Serialize>(
    name: &str,
    params: &P,
    seed: Option<u64>,
    out: Option<&Path>,
    text: &str,
    start: Instant,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_file(path, text)?;
            let outputs = [path.to_path_buf()];
            RunManifest::new(name, params, seed, &outputs, start.elapsed()).write(&manifest_path(path))
        }
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(format!("writing stdout: {e}"))),
    }
}

pub fn simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::new(
        args.n.unwrap_or(0),
        args.rate.unwrap_or(1.0),
        args.alpha,
        args.p,
        args.decoder.into(),
        args.trials,
        args.seed,
    );
    if let Some(path) = &args.codebook {
        cfg.codebook = CodebookSource::File(path.clone());
    }
    cfg.fresh_codebook = args.fresh_codebook;
    cfg.max_m = args.max_m;
    cfg.sweep = args.sweep.as_deref().map(str::parse).transpose()?;

    let mut csv = Csv::new(&SIMULATE_HEADER);
    for row in run_experiment(&cfg)? {
        let e = row.estimate;
        csv.row(&[
            row.n.to_string(),
            row.m.to_string(),
            row.k.to_string(),
            num(row.p),
            num(row.rate),
            num(row.alpha),
            row.decoder.to_string(),
            e.trials.to_string(),
            e.errors.to_string(),
            num(e.estimate),
            num(e.ci_low),
            num(e.ci_high),
            e.seed.to_string(),
        ]);
    }
    emit("simulate", args, Some(args.seed), args.out.as_deref(), &csv.into_string(), start, stdout)
}

fn inline_codebook(rows: &str) -> Result<Codebook, CliError> {
    Ok(Codebook::parse(&rows.replace(',', "\n"))?)
}

pub fn exact(args: &ExactArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    let opts = OracleOptions {
        budget: args.budget,
        canonical: args.canonical,
    };
    let book = match (&args.codebook, &args.rows) {
        (Some(path), _) => Some(Codebook::load(path)?),
        (None, Some(rows)) => Some(inline_codebook(rows)?),
        (None, None) => None,
    };
    let value = if let Some(c) = book {
        for (flag, given, actual) in [("--n", args.n, c.n()), ("--m", args.m, c.m())] {
            if given.is_some_and(|g| g != actual) {
                return Err(CliError::usage(format!("{flag} does not match the codebook ({actual})")));
            }
        }
        let k = args.k.unwrap_or(0);
        let decoder: DecoderKind = args.decoder.map_or(DecoderKind::Joint, Into::into);
        let e = exact_error_probability(&c, args.p, k, decoder, &opts)?;
        json!({"n": e.n, "m": e.m, "k": k, "p": e.p, "decoder": decoder.as_str(), "exact_error": e.value})
    } else {
        if args.decoder.is_some() {
            return Err(CliError::usage("--decoder needs --codebook or --rows"));
        }
        let (Some(n), Some(m)) = (args.n, args.m) else {
            return Err(CliError::usage("give --codebook/--rows, or both --n and --m"));
        };
        match args.k {
            Some(k) => {
                let e = min_bee_id_error(n, m, args.p, k, &opts)?;
                json!({"n": n, "m": m, "k": k, "p": e.p, "dmin_bee_id": e.value})
            }
            None => {
                let e = min_codebook_error(n, m, args.p, &opts)?;
                json!({"n": n, "m": m, "p": e.p, "pe_min": e.value})
            }
        }
    };
    let text = serde_json::to_string_pretty(&value).expect("json value") + "\n";
    emit("exact", args, None, args.out.as_deref(), &text, start, stdout)
}

fn bounds_csv(p: f64, rates: &[f64]) -> Result<String, CliError> {
    let (lower, upper) = bee_exponent_curves(p, rates)?;
    let mut csv = Csv::new(&["R", "lower", "upper"]);
    for (&(r, lo), &(_, hi)) in lower.points.iter().zip(&upper.points) {
        csv.row(&[num(r), num(lo), num(hi)]);
    }
    Ok(csv.into_string())
}

pub fn bounds(args: &BoundsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    if args.rmax.is_nan() || args.rmax > 1.0 {
        return Err(CliError::usage(format!("--rmax {} exceeds 1", args.rmax)));
    }
    let rates = rate_grid(args.rmin, args.rmax, args.steps)?;
    let text = bounds_csv(args.p, &rates)?;
    emit("bounds", args, None, args.out.as_deref(), &text, start, stdout)
}

fn capacity_csv(ps: &[f64]) -> Result<String, CliError> {
    let mut csv = Csv::new(&["p", "cap_lower", "cap_upper"]);
    for (p, b) in capacity_curve(ps)? {
        csv.row(&[num(p), num(b.lower), num(b.upper)]);
    }
    Ok(csv.into_string())
}

pub fn capacity(args: &CapacityArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    if !(args.pmin > 0.0 && args.pmax < 0.5) {
        return Err(CliError::usage("probabilities must lie in (0, 0.5)"));
    }
    let ps = if args.steps == 1 && args.pmin == args.pmax {
        vec![args.pmin]
    } else {
        rate_grid(args.pmin, args.pmax, args.steps)?
    };
    let text = capacity_csv(&ps)?;
    emit("capacity", args, None, args.out.as_deref(), &text, start, stdout)
}

fn inequality_csv(x: &str, rows: &[beeid_core::exponents::InequalityRow]) -> String {
    let mut csv = Csv::new(&[x, "lhs", "rhs", "holds"]);
    for r in rows {
        csv.row(&[num(r.x), num(r.lhs), num(r.rhs), r.holds.to_string()]);
    }
    csv.into_string()
}

pub fn figures(args: &FiguresArgs) -> Result<Vec<PathBuf>, CliError> {
    let start = Instant::now();
    let dir = &args.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}: {e}", dir.display())))?;
    let ps = probability_grid();
    let files = [
        ("fig3.csv", bounds_csv(args.p, &rate_grid(0.0, 0.5, FIG3_STEPS)?)?),
        ("fig4.csv", capacity_csv(&ps)?),
        ("fig5.csv", inequality_csv("p", &check_expurgated_midpoint(&ps)?)),
        ("fig6.csv", inequality_csv("R", &check_lp_below_double_gv(&step_grid(0.001, FIG6_POINTS))?)),
    ];
    let mut written = Vec::new();
    for (name, text) in &files {
        let path = dir.join(name);
        write_file(&path, text)?;
        written.push(path);
    }
    RunManifest::new("figures", args, None, &written, start.elapsed()).write(&dir.join("manifest.json"))?;
    Ok(written)
}

/// Returns whether every check held.
pub fn verify(args: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<bool, CliError> {
    let opts = VerifyOptions {
        oracle: OracleOptions {
            budget: args.budget,
            canonical: false,
        },
        seed: args.seed,
        inject_failure: args.inject_failure,
    };
    let report = run_suite(&opts)?;
    let io = |e: std::io::Error| CliError::io(format!("writing report: {e}"));
    let failures: Vec<_> = report.failures().collect();
    if args.json {
        let checks: Vec<_> = report
            .checks
            .iter()
            .map(|c| {
                json!({
                    "suite": c.suite,
                    "instance": c.instance,
                    "lhs": c.lhs,
                    "relation": c.relation.symbol(),
                    "rhs": c.rhs,
                    "holds": c.holds,
                })
            })
            .collect();
        let doc = json!({
            "passed": report.passed(),
            "total": report.checks.len(),
            "failed": failures.len(),
            "checks": checks,
        });
        writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).expect("json value")).map_err(io)?;
    } else {
        let mut suites: Vec<&str> = report.checks.iter().map(|c| c.suite).collect();
        suites.dedup();
        for s in suites {
            let all = report.checks.iter().filter(|c| c.suite == s).count();
            let bad = failures.iter().filter(|c| c.suite == s).count();
            writeln!(stdout, "{s}: {}/{all} hold", all - bad).map_err(io)?;
        }
        writeln!(
            stdout,
            "{} checks, {} failed",
            report.checks.len(),
            failures.len()
        )
        .map_err(io)?;
    }
    for c in &failures {
        writeln!(stderr, "violated: {c}").map_err(io)?;
    }
    Ok(report.passed())
}
