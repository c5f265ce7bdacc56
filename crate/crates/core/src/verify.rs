//! Inequality suites on exhaustively solvable instances.
//!
//! Each check compares an exactly computed error probability with a bound
//! and records both sides, so a failure can be reported with its instance.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{sample_injective_map, transmit, ChannelParams};
use crate::codebook::Codebook;
use crate::decode::{decode_joint_bruteforce, decode_joint_ml, DecoderKind, DEFAULT_BRUTEFORCE_BUDGET};
use crate::error::Result;
use crate::exponents::finite_length_bounds;
use crate::oracle::{
    exact_error_probability, min_bee_id_error_grid, min_codebook_error_grid, OracleOptions,
};

/// Slack for comparisons that can hold with equality.
pub const TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `lhs <= rhs + TOLERANCE`
    AtMost,
    /// `lhs > rhs`
    Above,
    /// `lhs == rhs`
    Equal,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::Above => ">",
            Relation::Equal => "==",
        }
    }

    fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Relation::AtMost => lhs <= rhs + TOLERANCE,
            Relation::Above => lhs > rhs,
            Relation::Equal => lhs == rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub instance: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub holds: bool,
}

impl Check {
    pub fn new(suite: &'static str, instance: String, lhs: f64, relation: Relation, rhs: f64) -> Self {
        Check {
            suite,
            instance,
            lhs,
            relation,
            rhs,
            holds: relation.holds(lhs, rhs),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} {}: {} {} {}",
            if self.holds { "ok" } else { "FAIL" },
            self.suite,
            self.instance,
            self.lhs,
            self.relation.symbol(),
            self.rhs
        )
    }
}

/// Union bound: the optimal bee-identification error is at most
/// `min{1, (m-k) P_e(n, m, p)}`, for every `(n, m)` with `n * m <= max_nm`
/// and every `k < m`.
pub fn union_bound_checks(max_nm: usize, ps: &[f64], opts: &OracleOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 1..=max_nm {
        for m in 1..=max_nm / n {
            let pe = min_codebook_error_grid(n, m, ps, opts)?;
            for k in 0..m {
                let best = min_bee_id_error_grid(n, m, k, ps, opts)?;
                for ((p, d), e) in ps.iter().zip(&best).zip(&pe) {
                    let rhs = ((m - k) as f64 * e.value).min(1.0);
                    out.push(Check::new(
                        "union-bound",
                        format!("n={n} m={m} k={k} p={p}"),
                        d.value,
                        Relation::AtMost,
                        rhs,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// Lower bounds built from the error of `floor(k eps)`-word codes, on the
/// single instance `n = 1, m = 9, k = 8, eps = 1/4`.
pub fn absentee_lower_bound_checks(ps: &[f64], opts: &OracleOptions) -> Result<Vec<Check>> {
    let (n, m, k, eps) = (1usize, 9usize, 8usize, 0.25f64);
    let small = (k as f64 * eps).floor() as usize;
    let best = min_bee_id_error_grid(n, m, k, ps, opts)?;
    let pe_small = min_codebook_error_grid(n, small, ps, opts)?;
    let pe_full = min_codebook_error_grid(n, m, ps, opts)?;
    let mut out = Vec::new();
    for (((p, d), s), f) in ps.iter().zip(&best).zip(&pe_small).zip(&pe_full) {
        let b = finite_length_bounds(n, m, k, eps, s.value, f.value)?;
        let instance = format!("n={n} m={m} k={k} eps={eps} p={p}");
        out.push(Check::new("half-min-lower", instance.clone(), d.value, Relation::Above, b.half_min_lower));
        out.push(Check::new("exp-lower", instance, d.value, Relation::Above, b.exp_lower));
    }
    Ok(out)
}

/// Joint ML never does worse than independent decoding, on random
/// codebooks with `n <= 4`, `m <= 5`, `k <= 2`.
pub fn ml_dominance_checks(count: usize, seed: u64, opts: &OracleOptions) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(1..=4);
            let m = rng.random_range(2..=5);
            let k = rng.random_range(0..=2.min(m - 1));
            let p = rng.random_range(0.01..0.49);
            let c = Codebook::random(n, m, &mut rng)?;
            let joint = exact_error_probability(&c, p, k, DecoderKind::Joint, opts)?.value;
            let indep = exact_error_probability(&c, p, k, DecoderKind::Independent, opts)?.value;
            Ok(Check::new(
                "ml-dominance",
                format!("C={} k={k} p={p}", codebook_label(&c)),
                joint,
                Relation::AtMost,
                indep,
            ))
        })
        .collect()
}

/// The assignment solver's optimum equals exhaustive search on random
/// instances with `m <= 6`.
pub fn assignment_checks(count: usize, seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(1..=8);
            let m = rng.random_range(1..=6);
            let k = rng.random_range(0..m);
            let p = rng.random_range(0.0..0.49);
            let c = Codebook::random(n, m, &mut rng)?;
            let map = sample_injective_map(m, k, &mut rng)?;
            let obs = transmit(&c, &map, ChannelParams::new(p, k)?, &mut rng)?;
            let fast = decode_joint_ml(&obs, &c)?.cost;
            let slow = decode_joint_bruteforce(&obs, &c, DEFAULT_BRUTEFORCE_BUDGET)?.cost;
            Ok(Check::new(
                "assignment-cost",
                format!("C={} k={k} p={p}", codebook_label(&c)),
                fast as f64,
                Relation::Equal,
                slow as f64,
            ))
        })
        .collect()
}

fn codebook_label(c: &Codebook) -> String {
    let rows: Vec<String> = c.rows().iter().map(|r| r.to_string()).collect();
    format!("{{{}}}", rows.join(","))
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub oracle: OracleOptions,
    pub seed: u64,
    /// Adds a check against a sign-flipped bound, which must fail.
    pub inject_failure: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            oracle: OracleOptions::default(),
            seed: 1,
            inject_failure: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

/// Crossover probabilities used by the built-in suite.
pub const SUITE_PROBABILITIES: [f64; 4] = [0.05, 0.1, 0.2, 0.3];

/// Runs the built-in suite.
pub fn run_suite(opts: &VerifyOptions) -> Result<VerifyReport> {
    let ps = SUITE_PROBABILITIES;
    let mut checks = union_bound_checks(8, &ps, &opts.oracle)?;
    if opts.inject_failure {
        let first = checks[0].clone();
        checks.push(Check::new(
            "injected",
            first.instance,
            first.lhs,
            Relation::AtMost,
            -first.rhs - 1.0,
        ));
    }
    checks.extend(absentee_lower_bound_checks(&ps, &opts.oracle)?);
    checks.extend(ml_dominance_checks(100, opts.seed, &opts.oracle)?);
    checks.extend(assignment_checks(100, opts.seed)?);
    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let report = run_suite(&VerifyOptions::default()).unwrap();
        for c in report.failures() {
            eprintln!("{c}");
        }
        assert!(report.passed());
        assert!(report.checks.len() > 300);
    }

    #[test]
    fn injected_failure_is_caught() {
        let report = run_suite(&VerifyOptions {
            inject_failure: true,
            ..VerifyOptions::default()
        })
        .unwrap();
        assert!(!report.passed());
        assert_eq!(report.failures().count(), 1);
        assert_eq!(report.failures().next().unwrap().suite, "injected");
    }

    #[test]
    fn relations() {
        assert!(Relation::AtMost.holds(0.2, 0.2));
        assert!(!Relation::Above.holds(0.2, 0.2));
        assert!(Relation::Equal.holds(3.0, 3.0));
        let c = Check::new("s", "x".into(), 1.0, Relation::AtMost, 0.5);
        assert_eq!(c.to_string(), "[FAIL] s x: 1 <= 0.5");
    }
}
