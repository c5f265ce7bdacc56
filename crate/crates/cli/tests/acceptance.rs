//! Acceptance criteria, one pass/fail line each. Runs without the libtest
//! harness so the summary always prints.

use std::time::{Duration, Instant};

use beeid_core::exponents::{
    bee_exponent_curves, bhattacharyya, capacity_bounds, check_expurgated_midpoint,
    check_lp_below_double_gv, delta_gv, absentee_gap, kl_bernoulli, probability_grid, rate_constants,
    rate_grid, step_grid, BscExponents, GAP_RATE_LIMIT,
};
use beeid_core::montecarlo::{estimate_error, run_experiment, ExperimentConfig, Sweep};
use beeid_core::oracle::{exact_error_probability, min_codebook_error, OracleOptions};
use beeid_core::verify::{
    absentee_lower_bound_checks, assignment_checks, ml_dominance_checks, union_bound_checks, Check,
};
use beeid_core::{Codebook, DecoderKind};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn first_failure(checks: &[Check]) -> Option<String> {
    checks.iter().find(|c| !c.holds).map(|c| c.to_string())
}

/// First data row of `beeid bounds` as (lower, upper).
fn bounds_first_row(p: f64, rmin: f64) -> (f64, f64) {
    let (p, rmin) = (p.to_string(), rmin.to_string());
    let mut out = Vec::new();
    let mut err = Vec::new();
    let args = ["beeid", "bounds", "--p", &p, "--rmin", &rmin, "--rmax", "0.5", "--steps", "500"];
    let code = beeid_cli::run(args, &mut out, &mut err);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    let text = String::from_utf8(out).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    (row[1], row[2])
}

fn criterion_1() -> Outcome {
    let half = bhattacharyya(0.05).unwrap() / 2.0;
    let mut pass = (half - 0.599).abs() <= 5e-4;
    let mut gaps = Vec::new();
    for rmin in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8] {
        let (lo, hi) = bounds_first_row(0.05, rmin);
        gaps.push(((half - lo).abs(), (half - hi).abs()));
    }
    pass &= gaps.windows(2).all(|w| w[1].0 <= w[0].0 && w[1].1 <= w[0].1);
    let (last_lo, last_hi) = *gaps.last().unwrap();
    pass &= last_lo <= 5e-4 && last_hi <= 5e-4;
    let (lo0, hi0) = bounds_first_row(0.05, 0.0);
    pass &= (lo0 - 0.599).abs() <= 5e-4 && (hi0 - 0.599).abs() <= 5e-4;
    outcome(
        pass,
        format!(
            "B_p/2 = {half:.6}; gap at R=1e-2: {:.2e}/{:.2e}, at R=1e-8: {last_lo:.2e}/{last_hi:.2e}, at R=0: {lo0}/{hi0}",
            gaps[0].0, gaps[0].1
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 1..=49 {
        let p = i as f64 / 100.0;
        let c = rate_constants(p).unwrap();
        let b = bhattacharyya(p).unwrap();
        let left = (delta_gv(c.r_ex).unwrap() * b - (c.r_0 - c.r_ex)).abs();
        let right = ((c.r_0 - c.r_cr) - kl_bernoulli(delta_gv(c.r_cr).unwrap(), p).unwrap()).abs();
        worst = worst.max(left).max(right);
    }
    outcome(worst <= 1e-9, format!("largest breakpoint mismatch {worst:.2e} over 49 values of p"))
}

fn criterion_3() -> Outcome {
    let c = rate_constants(0.05).unwrap();
    let b = capacity_bounds(0.05).unwrap();
    let ex = BscExponents::new(0.05).unwrap();
    let res_lo = (ex.tlc(b.lower) - b.lower).abs();
    let res_hi = (ex.upper(b.upper) - b.upper).abs();
    let mut pass = (b.lower - c.r_0 / 2.0).abs() <= 1e-4 && (b.lower - 0.2390).abs() <= 1e-4;
    pass &= res_lo <= 1e-8 && res_hi <= 1e-8;
    let mut worst_res: f64 = 0.0;
    let mut ordered = true;
    for p in probability_grid() {
        let ex = BscExponents::new(p).unwrap();
        let b = ex.capacity_bounds();
        ordered &= b.lower <= b.upper && b.upper < ex.rate_constants().r_cr;
        worst_res = worst_res
            .max((ex.tlc(b.lower) - b.lower).abs())
            .max((ex.upper(b.upper) - b.upper).abs());
    }
    pass &= ordered && worst_res <= 1e-8;
    outcome(
        pass,
        format!(
            "cap_lower(0.05) = {:.6}, R_0/2 = {:.6}; residuals {res_lo:.1e}/{res_hi:.1e}, grid max {worst_res:.1e}; ordering {}",
            b.lower,
            c.r_0 / 2.0,
            if ordered { "holds" } else { "violated" }
        ),
    )
}

fn criterion_4() -> Outcome {
    let mid = check_expurgated_midpoint(&probability_grid()).unwrap();
    let lp = check_lp_below_double_gv(&step_grid(0.001, 168)).unwrap();
    let bad_mid = mid.iter().filter(|r| !r.holds).count();
    let bad_lp = lp.iter().filter(|r| !r.holds).count();
    outcome(
        bad_mid == 0 && bad_lp == 0,
        format!("{bad_mid}/{} p values and {bad_lp}/{} rates violate", mid.len(), lp.len()),
    )
}

fn criterion_5() -> Outcome {
    let mut count = 0;
    let mut min_gap = f64::INFINITY;
    let mut pass = true;
    for i in 1..=10 {
        let p = i as f64 / 100.0;
        let limit = GAP_RATE_LIMIT.min(rate_constants(p).unwrap().r_ex / 2.0);
        for r in step_grid(0.001, 1000).into_iter().take_while(|&r| r < limit) {
            let g = absentee_gap(r, p).unwrap();
            pass &= g.absentee_limit_upper < g.no_absentee_lower;
            min_gap = min_gap.min(g.gap());
            count += 1;
        }
    }
    outcome(pass && count > 0, format!("{count} grid points, smallest gap {min_gap:.3e}"))
}

fn criterion_6() -> Outcome {
    let c = Codebook::from_u64s(&[0, 1], 1).unwrap();
    let exact = exact_error_probability(&c, 0.2, 1, DecoderKind::Independent, &OracleOptions::default())
        .unwrap()
        .value;
    let a = estimate_error(&c, 0.2, 1, DecoderKind::Independent, 100_000, 6).unwrap();
    let b = estimate_error(&c, 0.2, 1, DecoderKind::Independent, 100_000, 6).unwrap();
    let se = a.standard_error_at(exact);
    let pass = (exact - 0.2).abs() < 1e-15 && (a.estimate - exact).abs() <= 3.0 * se && a == b;
    outcome(
        pass,
        format!("exact {exact}, estimate {} ({:.2} SE), repeat identical: {}", a.estimate, (a.estimate - exact) / se, a == b),
    )
}

fn criterion_7() -> Outcome {
    let opts = OracleOptions::default();
    let dominance = ml_dominance_checks(100, 7, &opts).unwrap();
    let costs = assignment_checks(100, 7).unwrap();
    let fail = first_failure(&dominance).or_else(|| first_failure(&costs));
    outcome(
        fail.is_none(),
        fail.unwrap_or_else(|| format!("{} dominance and {} assignment instances hold", dominance.len(), costs.len())),
    )
}

fn criterion_8() -> Outcome {
    let ps = [0.05, 0.1, 0.2, 0.3];
    let opts = OracleOptions::default();
    let premise = ps
        .iter()
        .all(|&p| (min_codebook_error(1, 2, p, &opts).unwrap().value - p).abs() < 1e-15);
    let lower = absentee_lower_bound_checks(&ps, &opts).unwrap();
    let union = union_bound_checks(12, &ps, &opts).unwrap();
    let fail = first_failure(&lower).or_else(|| first_failure(&union));
    outcome(
        premise && fail.is_none(),
        fail.unwrap_or_else(|| {
            format!("P_e(1,2,p) = p: {premise}; {} lower-bound and {} union-bound checks hold", lower.len(), union.len())
        }),
    )
}

fn criterion_9() -> Outcome {
    let cap = capacity_bounds(0.1).unwrap().upper;
    let rate = 1.2 * cap;
    let mut cfg = ExperimentConfig::new(8, rate, 0.5, 0.1, DecoderKind::Joint, 1000, 9);
    cfg.sweep = Some(Sweep::N(vec![8, 12, 16]));
    // average over the random-code ensemble rather than one drawn codebook
    cfg.fresh_codebook = true;
    let rows = run_experiment(&cfg).unwrap();
    let pass = rows
        .windows(2)
        .all(|w| w[1].estimate.estimate >= w[0].estimate.estimate || w[1].estimate.overlaps(&w[0].estimate));
    let shown: Vec<String> = rows
        .iter()
        .map(|r| {
            let e = r.estimate;
            format!("n={} m={} k={}: {:.3} [{:.3}, {:.3}]", r.n, r.m, r.k, e.estimate, e.ci_low, e.ci_high)
        })
        .collect();
    outcome(pass, format!("R = {rate:.4}; {}", shown.join(", ")))
}

fn criterion_10() -> Outcome {
    let rates = rate_grid(0.0, 1.0, 500).unwrap();
    let mut pass = true;
    let mut zero_from = Vec::new();
    for p in [0.05, 0.1, 0.2] {
        let (lo, hi) = bee_exponent_curves(p, &rates).unwrap();
        pass &= lo.points.windows(2).all(|w| w[1].1 <= w[0].1);
        pass &= hi.points.windows(2).all(|w| w[1].1 <= w[0].1);
        let r_cr = rate_constants(p).unwrap().r_cr;
        pass &= hi.points.iter().filter(|&&(r, _)| r >= r_cr).all(|&(_, v)| v == 0.0);
        zero_from.push(format!(
            "p={p}: upper zero from R={:.3} (R_cr={r_cr:.3})",
            hi.points.iter().find(|&&(_, v)| v == 0.0).map_or(f64::NAN, |x| x.0)
        ));
    }
    outcome(pass, zero_from.join("; "))
}

type Criterion = (u32, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, criterion_1, Duration::from_secs(1)),
        (2, criterion_2, Duration::from_secs(1)),
        (3, criterion_3, Duration::from_secs(5)),
        (4, criterion_4, Duration::from_secs(2)),
        (5, criterion_5, Duration::from_secs(2)),
        (6, criterion_6, Duration::from_secs(1)),
        (7, criterion_7, Duration::from_secs(30)),
        (8, criterion_8, Duration::from_secs(60)),
        (9, criterion_9, Duration::from_secs(120)),
        (10, criterion_10, Duration::from_secs(2)),
    ];
    let mut failed = 0;
    for (id, run, limit) in criteria {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2}: {} [{:.3}s / limit {}s] {}{}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
            o.detail,
            if in_time { "" } else { " (over time limit)" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
