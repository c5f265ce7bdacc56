//! Seeded, parallel Monte Carlo estimation of the bee-identification error.
//!
//! Trial `t` draws all its randomness from a ChaCha8 generator keyed by the
//! master seed and positioned on stream `t`, so estimates are bit-identical
//! for any number of worker threads.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{sample_injective_map, transmit, ChannelParams};
use crate::codebook::Codebook;
use crate::decode::{decode, decode_independent, decode_joint_ml, is_error, DecoderKind};
use crate::error::{Error, Result};

/// Largest codebook size an experiment may request by default.
pub const DEFAULT_MAX_M: usize = 1 << 16;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Stream reserved for drawing a shared codebook.
const CODEBOOK_STREAM: u64 = u64::MAX;

/// Generator for trial `trial` under master seed `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorEstimate {
    pub trials: u64,
    pub errors: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl ErrorEstimate {
    /// Builds an estimate with a Wilson score 95% interval.
    pub fn from_counts(trials: u64, errors: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::invalid("need at least one trial"));
        }
        if errors > trials {
            return Err(Error::invalid(format!("{errors} errors in {trials} trials")));
        }
        let n = trials as f64;
        let estimate = errors as f64 / n;
        let z2 = Z95 * Z95;
        let centre = (estimate + z2 / (2.0 * n)) / (1.0 + z2 / n);
        let half = Z95 / (1.0 + z2 / n) * (estimate * (1.0 - estimate) / n + z2 / (4.0 * n * n)).sqrt();
        Ok(ErrorEstimate {
            trials,
            errors,
            estimate,
            ci_low: (centre - half).clamp(0.0, estimate),
            ci_high: (centre + half).clamp(estimate, 1.0),
            seed,
        })
    }

    /// Plug-in standard error `sqrt(q(1-q)/trials)` at probability `q`.
    pub fn standard_error_at(&self, q: f64) -> f64 {
        (q * (1.0 - q) / self.trials as f64).sqrt()
    }

    pub fn overlaps(&self, other: &ErrorEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

fn run_trial(c: &Codebook, params: ChannelParams, decoder: DecoderKind, rng: &mut ChaCha8Rng) -> Result<bool> {
    let map = sample_injective_map(c.m(), params.k, rng)?;
    let obs = transmit(c, &map, params, rng)?;
    let result = decode(decoder, &obs, c, rng)?;
    is_error(&result, &map)
}

/// Counts errors over `trials` independent channel uses of a fixed codebook.
pub fn estimate_error(
    c: &Codebook,
    p: f64,
    k: usize,
    decoder: DecoderKind,
    trials: u64,
    seed: u64,
) -> Result<ErrorEstimate> {
    let params = ChannelParams::new(p, k)?;
    params.check_for(c.m())?;
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let errors = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(c, params, decoder, &mut trial_rng(seed, t)).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    ErrorEstimate::from_counts(trials, errors, seed)
}

/// Like [`estimate_error`], but every trial first draws a fresh uniformly
/// random `n x m` codebook from its own stream.
pub fn estimate_error_random_codes(
    n: usize,
    m: usize,
    p: f64,
    k: usize,
    decoder: DecoderKind,
    trials: u64,
    seed: u64,
) -> Result<ErrorEstimate> {
    let params = ChannelParams::new(p, k)?;
    params.check_for(m)?;
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let errors = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let c = Codebook::random(n, m, &mut rng)?;
            run_trial(&c, params, decoder, &mut rng).map(u64::from)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    ErrorEstimate::from_counts(trials, errors, seed)
}

/// Both decoders run on the same maps and noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairedEstimate {
    pub joint: ErrorEstimate,
    pub independent: ErrorEstimate,
    /// Trials where the joint decoder erred and independent decoding did not.
    pub joint_only_errors: u64,
}

pub fn estimate_paired(c: &Codebook, p: f64, k: usize, trials: u64, seed: u64) -> Result<PairedEstimate> {
    let params = ChannelParams::new(p, k)?;
    params.check_for(c.m())?;
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let (joint, indep, joint_only) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let map = sample_injective_map(c.m(), k, &mut rng)?;
            let obs = transmit(c, &map, params, &mut rng)?;
            let j = is_error(&decode_joint_ml(&obs, c)?, &map)?;
            let i = is_error(&decode_independent(&obs, c, &mut rng)?, &map)?;
            Ok::<_, Error>((u64::from(j), u64::from(i), u64::from(j && !i)))
        })
        .try_reduce(|| (0, 0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)))?;
    Ok(PairedEstimate {
        joint: ErrorEstimate::from_counts(trials, joint, seed)?,
        independent: ErrorEstimate::from_counts(trials, indep, seed)?,
        joint_only_errors: joint_only,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodebookSource {
    /// Uniformly random rows drawn from the master seed.
    Random,
    File(PathBuf),
}

/// A list of values for one swept parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum Sweep {
    N(Vec<usize>),
    P(Vec<f64>),
    Rate(Vec<f64>),
}

impl Sweep {
    pub fn len(&self) -> usize {
        match self {
            Sweep::N(v) => v.len(),
            Sweep::P(v) => v.len(),
            Sweep::Rate(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl FromStr for Sweep {
    type Err = Error;

    /// Parses `n=8,12,16`, `p=0.05,0.1` or `rate=0.3,0.4`.
    fn from_str(s: &str) -> Result<Self> {
        let (key, list) = s
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("sweep {s:?} is not KEY=LIST")))?;
        let items: Vec<&str> = list.split(',').map(str::trim).collect();
        if items.iter().any(|x| x.is_empty()) {
            return Err(Error::invalid(format!("empty value in sweep {s:?}")));
        }
        fn parse_all<T: FromStr>(items: &[&str], what: &str) -> Result<Vec<T>> {
            items
                .iter()
                .map(|x| x.parse().map_err(|_| Error::invalid(format!("bad {what} value {x:?}"))))
                .collect()
        }
        match key.trim() {
            "n" => Ok(Sweep::N(parse_all(&items, "n")?)),
            "p" => Ok(Sweep::P(parse_all(&items, "p")?)),
            "rate" => Ok(Sweep::Rate(parse_all(&items, "rate")?)),
            other => Err(Error::invalid(format!("unknown sweep key {other:?}"))),
        }
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join<T: ToString>(v: &[T]) -> String {
            v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
        }
        match self {
            Sweep::N(v) => write!(f, "n={}", join(v)),
            Sweep::P(v) => write!(f, "p={}", join(v)),
            Sweep::Rate(v) => write!(f, "rate={}", join(v)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub rate: f64,
    /// Absentee fraction; `k = floor(alpha * m)`.
    pub alpha: f64,
    pub p: f64,
    pub decoder: DecoderKind,
    pub trials: u64,
    pub seed: u64,
    pub codebook: CodebookSource,
    /// Draw a new random codebook for every trial.
    pub fresh_codebook: bool,
    pub max_m: usize,
    pub sweep: Option<Sweep>,
}

impl ExperimentConfig {
    pub fn new(n: usize, rate: f64, alpha: f64, p: f64, decoder: DecoderKind, trials: u64, seed: u64) -> Self {
        ExperimentConfig {
            n,
            rate,
            alpha,
            p,
            decoder,
            trials,
            seed,
            codebook: CodebookSource::Random,
            fresh_codebook: false,
            max_m: DEFAULT_MAX_M,
            sweep: None,
        }
    }
}

/// `ceil(2^(n * rate))`, with values within rounding error of an integer
/// taken as that integer.
pub fn codebook_size(n: usize, rate: f64, max_m: usize) -> Result<usize> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::invalid(format!("rate = {rate} must be positive")));
    }
    let exact = (n as f64 * rate).exp2();
    if exact > max_m as f64 {
        return Err(Error::ResourceLimit(format!(
            "m = ceil(2^({n} * {rate})) exceeds the cap {max_m}"
        )));
    }
    let nearest = exact.round();
    let m = if (exact - nearest).abs() <= 1e-9 * nearest {
        nearest
    } else {
        exact.ceil()
    };
    Ok(m as usize)
}

/// `floor(alpha * m)`.
pub fn absentee_count(alpha: f64, m: usize) -> Result<usize> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha = {alpha} outside [0, 1)")));
    }
    Ok((alpha * m as f64).floor() as usize)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub p: f64,
    pub rate: f64,
    pub alpha: f64,
    pub decoder: DecoderKind,
    pub estimate: ErrorEstimate,
}

/// One instance of the experiment after applying a sweep value.
struct Point {
    n: usize,
    rate: f64,
    p: f64,
}

/// Runs one estimate per sweep point (a single point without a sweep).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    if cfg.trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let base = Point {
        n: cfg.n,
        rate: cfg.rate,
        p: cfg.p,
    };
    let points: Vec<Point> = match &cfg.sweep {
        None => vec![base],
        Some(s) if s.is_empty() => return Err(Error::invalid("empty sweep")),
        Some(Sweep::N(v)) => v.iter().map(|&n| Point { n, ..base }).collect(),
        Some(Sweep::P(v)) => v.iter().map(|&p| Point { p, ..base }).collect(),
        Some(Sweep::Rate(v)) => v.iter().map(|&rate| Point { rate, ..base }).collect(),
    };

    let file_book = match &cfg.codebook {
        CodebookSource::Random => None,
        CodebookSource::File(path) => {
            if matches!(cfg.sweep, Some(Sweep::N(_) | Sweep::Rate(_))) {
                return Err(Error::invalid("a codebook file fixes n and m; only p can be swept"));
            }
            if cfg.fresh_codebook {
                return Err(Error::invalid("fresh codebooks need a random codebook source"));
            }
            Some(Codebook::load(path)?)
        }
    };

    points
        .iter()
        .map(|pt| {
            let (n, m, rate) = match &file_book {
                Some(c) => (c.n(), c.m(), (c.m() as f64).log2() / c.n() as f64),
                None => {
                    if pt.n == 0 {
                        return Err(Error::invalid("n must be positive"));
                    }
                    (pt.n, codebook_size(pt.n, pt.rate, cfg.max_m)?, pt.rate)
                }
            };
            if m < 2 {
                return Err(Error::invalid(format!("need m >= 2, got m = {m}")));
            }
            let k = absentee_count(cfg.alpha, m)?;
            let estimate = match (&file_book, cfg.fresh_codebook) {
                (Some(c), _) => estimate_error(c, pt.p, k, cfg.decoder, cfg.trials, cfg.seed)?,
                (None, true) => estimate_error_random_codes(n, m, pt.p, k, cfg.decoder, cfg.trials, cfg.seed)?,
                (None, false) => {
                    let mut rng = trial_rng(cfg.seed, CODEBOOK_STREAM);
                    let c = Codebook::random(n, m, &mut rng)?;
                    estimate_error(&c, pt.p, k, cfg.decoder, cfg.trials, cfg.seed)?
                }
            };
            Ok(ExperimentRow {
                n,
                m,
                k,
                p: pt.p,
                rate,
                alpha: cfg.alpha,
                decoder: cfg.decoder,
                estimate,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{exact_error_probability, OracleOptions};
    use rand::Rng;

    fn book(rows: &[&str]) -> Codebook {
        Codebook::new(rows.iter().map(|r| r.parse().unwrap()).collect()).unwrap()
    }

    #[test]
    fn wilson_interval_brackets_estimate() {
        for (t, e) in [(1, 0), (1, 1), (10, 3), (1000, 0), (1000, 1000), (7, 6)] {
            let est = ErrorEstimate::from_counts(t, e, 0).unwrap();
            assert_eq!(est.estimate, e as f64 / t as f64);
            assert!(0.0 <= est.ci_low && est.ci_low <= est.estimate);
            assert!(est.estimate <= est.ci_high && est.ci_high <= 1.0);
        }
        // textbook value: 3/10 -> [0.1078, 0.6032]
        let est = ErrorEstimate::from_counts(10, 3, 0).unwrap();
        assert!((est.ci_low - 0.107_789).abs() < 1e-5);
        assert!((est.ci_high - 0.603_221).abs() < 1e-5);
        assert!(ErrorEstimate::from_counts(0, 0, 0).is_err());
        assert!(ErrorEstimate::from_counts(3, 4, 0).is_err());
    }

    #[test]
    fn single_bit_estimate_near_p() {
        let c = book(&["0", "1"]);
        let est = estimate_error(&c, 0.2, 1, DecoderKind::Independent, 100_000, 11).unwrap();
        let se = est.standard_error_at(0.2);
        assert!((est.estimate - 0.2).abs() < 3.0 * se, "{est:?}");
    }

    #[test]
    fn noiseless_distinct_rows_never_err() {
        let c = book(&["0000", "0101", "1010", "1111", "0011"]);
        for k in 0..4 {
            let est = estimate_error(&c, 0.0, k, DecoderKind::Joint, 500, 3).unwrap();
            assert_eq!(est.errors, 0);
            assert_eq!(est.estimate, 0.0);
        }
    }

    #[test]
    fn same_seed_same_estimate() {
        let c = book(&["000", "011", "101", "110"]);
        for d in [DecoderKind::Independent, DecoderKind::Joint] {
            let a = estimate_error(&c, 0.15, 1, d, 5000, 99).unwrap();
            let b = estimate_error(&c, 0.15, 1, d, 5000, 99).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn thread_count_does_not_change_estimate() {
        let c = book(&["000", "011", "101", "110"]);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_error(&c, 0.2, 1, DecoderKind::Independent, 4000, 5).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn rejects_bad_arguments() {
        let c = book(&["0", "1"]);
        assert!(estimate_error(&c, 0.2, 1, DecoderKind::Joint, 0, 1).is_err());
        assert!(estimate_error(&c, 0.2, 2, DecoderKind::Joint, 10, 1).is_err());
        assert!(estimate_error(&c, 0.6, 0, DecoderKind::Joint, 10, 1).is_err());
        assert!("bogus".parse::<DecoderKind>().is_err());
    }

    #[test]
    fn estimates_agree_with_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let trials = 20_000;
        for case in 0..12 {
            let n = rng.random_range(1..=3);
            let m = rng.random_range(2..=4);
            let k = rng.random_range(0..m);
            let p = rng.random_range(0.02..0.4);
            let c = Codebook::random(n, m, &mut rng).unwrap();
            for d in [DecoderKind::Independent, DecoderKind::Joint] {
                let exact = exact_error_probability(&c, p, k, d, &OracleOptions::default())
                    .unwrap()
                    .value;
                let est = estimate_error(&c, p, k, d, trials, 1000 + case).unwrap();
                // 4 standard errors keeps the family-wise false alarm rate small
                let tol = 4.0 * est.standard_error_at(exact) + 1e-12;
                assert!((est.estimate - exact).abs() <= tol, "{c:?} k={k} p={p} {d}: {} vs {exact}", est.estimate);
            }
        }
    }

    #[test]
    fn paired_joint_rarely_worse() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let c = Codebook::random(8, 12, &mut rng).unwrap();
        let pair = estimate_paired(&c, 0.1, 3, 5000, 1).unwrap();
        assert!(pair.joint.estimate <= pair.independent.estimate);
        assert!(pair.joint.errors <= pair.independent.errors + pair.joint_only_errors);
        // joint can only lose when independent decoding hit a tie
        assert!(pair.joint_only_errors * 20 <= pair.joint.errors.max(20));
    }

    #[test]
    fn config_arithmetic() {
        assert_eq!(codebook_size(8, 0.5, DEFAULT_MAX_M).unwrap(), 16);
        assert_eq!(absentee_count(0.5, 16).unwrap(), 8);
        assert_eq!(codebook_size(10, 0.5, DEFAULT_MAX_M).unwrap(), 32);
        assert_eq!(absentee_count(0.25, 32).unwrap(), 8);
        assert_eq!(codebook_size(3, 0.5, DEFAULT_MAX_M).unwrap(), 3);
        assert_eq!(codebook_size(10, 0.1, DEFAULT_MAX_M).unwrap(), 2);
        assert!(matches!(codebook_size(40, 1.0, DEFAULT_MAX_M), Err(Error::ResourceLimit(_))));
        assert!(absentee_count(1.0, 4).is_err());
    }

    #[test]
    fn experiment_shapes() {
        let mut cfg = ExperimentConfig::new(8, 0.5, 0.5, 0.1, DecoderKind::Joint, 200, 7);
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].m, rows[0].k), (16, 8));

        cfg.sweep = Some("n=8,12,16".parse().unwrap());
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![8, 12, 16]);
        assert_eq!(run_experiment(&cfg).unwrap(), rows);

        cfg.fresh_codebook = true;
        let fresh = run_experiment(&cfg).unwrap();
        assert_eq!(fresh.len(), 3);
        assert_eq!(run_experiment(&cfg).unwrap(), fresh);
    }

    #[test]
    fn experiment_from_file() {
        let dir = std::env::temp_dir().join(format!("beeid-mc-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("book.txt");
        std::fs::write(&path, "0\n1\n").unwrap();
        let mut cfg = ExperimentConfig::new(1, 1.0, 0.5, 0.2, DecoderKind::Independent, 1000, 3);
        cfg.codebook = CodebookSource::File(path.clone());
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!((rows[0].n, rows[0].m, rows[0].k), (1, 2, 1));
        cfg.sweep = Some(Sweep::N(vec![1, 2]));
        assert!(run_experiment(&cfg).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn sweep_parsing() {
        assert_eq!("n=8,12,16".parse::<Sweep>().unwrap(), Sweep::N(vec![8, 12, 16]));
        assert_eq!("p=0.1, 0.2".parse::<Sweep>().unwrap(), Sweep::P(vec![0.1, 0.2]));
        assert_eq!("rate=0.5".parse::<Sweep>().unwrap().to_string(), "rate=0.5");
        for bad in ["n", "q=1", "n=1,,2", "n=x"] {
            assert!(bad.parse::<Sweep>().is_err(), "{bad}");
        }
    }
}
