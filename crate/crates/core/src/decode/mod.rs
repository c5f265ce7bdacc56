//! Decoders that recover the channel's injective map from an observation.
//!
//! * [`decode_independent`] maps each row to a nearest codeword on its own,
//!   breaking ties uniformly at random. Its output need not be injective.
//! * [`decode_joint_ml`] picks the injective map of least total Hamming
//!   distance, which is the maximum-likelihood choice for `p < 1/2`. It is
//!   solved as a rectangular assignment problem.
//! * [`decode_joint_bruteforce`] enumerates every injective map and serves as
//!   the reference for the assignment solver.

pub mod assignment;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::channel::{check_dims, InjectiveMap, Observation};
use crate::codebook::Codebook;
use crate::error::{Error, Result};

/// Default cap on the number of injective maps the exhaustive decoder visits.
pub const DEFAULT_BRUTEFORCE_BUDGET: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecoderKind {
    Independent,
    Joint,
}

impl DecoderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DecoderKind::Independent => "independent",
            DecoderKind::Joint => "joint",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(DecoderKind::Independent),
            "joint" => Ok(DecoderKind::Joint),
            other => Err(Error::invalid(format!(
                "unknown decoder {other:?} (expected \"independent\" or \"joint\")"
            ))),
        }
    }
}

/// A decoder's guess of the channel map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    /// 0-based codeword index for each observed row.
    pub assignment: Vec<usize>,
    /// Whether all entries of `assignment` are distinct.
    pub injective: bool,
    /// Total Hamming distance between the rows and their assigned codewords.
    pub cost: u64,
}

impl DecodeResult {
    fn new(assignment: Vec<usize>, cost: u64) -> Self {
        let injective = all_distinct(&assignment);
        DecodeResult {
            assignment,
            injective,
            cost,
        }
    }
}

fn all_distinct(xs: &[usize]) -> bool {
    let Some(&max) = xs.iter().max() else {
        return true;
    };
    let mut seen = vec![false; max + 1];
    xs.iter().all(|&x| !std::mem::replace(&mut seen[x], true))
}

/// Nearest-codeword decoding of each row, ties broken uniformly at random.
pub fn decode_independent<R: Rng + ?Sized>(
    obs: &Observation,
    c: &Codebook,
    rng: &mut R,
) -> Result<DecodeResult> {
    check_dims(obs, c)?;
    let mut assignment = Vec::with_capacity(obs.len());
    let mut cost = 0u64;
    for y in obs.rows() {
        let mut best = u32::MAX;
        let mut pick = 0;
        let mut ties = 0u32;
        for (j, cw) in c.rows().iter().enumerate() {
            let d = y.distance(cw);
            if d < best {
                best = d;
                pick = j;
                ties = 1;
            } else if d == best {
                // reservoir sampling over the tied indices
                ties += 1;
                if rng.random_range(0..ties) == 0 {
                    pick = j;
                }
            }
        }
        assignment.push(pick);
        cost += u64::from(best);
    }
    Ok(DecodeResult::new(assignment, cost))
}

/// Row-major `(rows x m)` matrix of Hamming distances.
pub fn distance_matrix(obs: &Observation, c: &Codebook) -> Vec<i64> {
    let mut costs = Vec::with_capacity(obs.len() * c.m());
    for y in obs.rows() {
        costs.extend(c.rows().iter().map(|cw| i64::from(y.distance(cw))));
    }
    costs
}

/// Joint maximum-likelihood decoding: the injective map of least total
/// Hamming distance, found with the assignment solver.
pub fn decode_joint_ml(obs: &Observation, c: &Codebook) -> Result<DecodeResult> {
    check_dims(obs, c)?;
    if obs.len() > c.m() {
        return Err(Error::invalid(format!(
            "{} observed rows exceed {} codewords",
            obs.len(),
            c.m()
        )));
    }
    let costs = distance_matrix(obs, c);
    let (assignment, total) = assignment::solve(&costs, obs.len(), c.m());
    Ok(DecodeResult::new(assignment, total as u64))
}

/// Number of injective maps from `len` rows into `m` indices, or `None` on
/// overflow.
pub fn count_injective_maps(m: usize, len: usize) -> Option<u64> {
    if len > m {
        return Some(0);
    }
    ((m - len + 1)..=m).try_fold(1u64, |acc, x| acc.checked_mul(x as u64))
}

/// Exhaustive joint decoding. Returns the lexicographically smallest
/// assignment among those of least total distance.
pub fn decode_joint_bruteforce(
    obs: &Observation,
    c: &Codebook,
    budget: u64,
) -> Result<DecodeResult> {
    check_dims(obs, c)?;
    let rows = obs.len();
    let m = c.m();
    if rows > m {
        return Err(Error::invalid(format!(
            "{rows} observed rows exceed {m} codewords"
        )));
    }
    match count_injective_maps(m, rows) {
        Some(count) if count <= budget => {}
        _ => {
            return Err(Error::ResourceLimit(format!(
                "enumerating injective maps {rows} -> {m} exceeds budget {budget}"
            )))
        }
    }
    let costs = distance_matrix(obs, c);

    struct Search<'a> {
        costs: &'a [i64],
        m: usize,
        rows: usize,
        used: Vec<bool>,
        current: Vec<usize>,
        best: Option<(i64, Vec<usize>)>,
    }

    impl Search<'_> {
        fn visit(&mut self, partial: i64) {
            if let Some((b, _)) = &self.best {
                // only strict improvements replace, so equal partials are dead
                if partial >= *b {
                    return;
                }
            }
            let i = self.current.len();
            if i == self.rows {
                self.best = Some((partial, self.current.clone()));
                return;
            }
            for j in 0..self.m {
                if self.used[j] {
                    continue;
                }
                self.used[j] = true;
                self.current.push(j);
                self.visit(partial + self.costs[i * self.m + j]);
                self.current.pop();
                self.used[j] = false;
            }
        }
    }

    let mut search = Search {
        costs: &costs,
        m,
        rows,
        used: vec![false; m],
        current: Vec::with_capacity(rows),
        best: None,
    };
    search.visit(0);
    let (total, assignment) = search.best.expect("at least one injective map exists");
    Ok(DecodeResult::new(assignment, total as u64))
}

/// The bee-identification error indicator: true iff the decoded map differs
/// from the channel map in any position.
pub fn is_error(result: &DecodeResult, truth: &InjectiveMap) -> Result<bool> {
    if result.assignment.len() != truth.domain_size() {
        return Err(Error::invalid(format!(
            "decoded {} rows but the channel kept {}",
            result.assignment.len(),
            truth.domain_size()
        )));
    }
    Ok(result.assignment.as_slice() != truth.image())
}

/// Decodes with the requested decoder. The joint decoder ignores `rng`.
pub fn decode<R: Rng + ?Sized>(
    kind: DecoderKind,
    obs: &Observation,
    c: &Codebook,
    rng: &mut R,
) -> Result<DecodeResult> {
    match kind {
        DecoderKind::Independent => decode_independent(obs, c, rng),
        DecoderKind::Joint => decode_joint_ml(obs, c),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_injective_map, transmit, ChannelParams};
    use crate::codebook::Codeword;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn book(rows: &[&str]) -> Codebook {
        Codebook::new(rows.iter().map(|r| r.parse().unwrap()).collect()).unwrap()
    }

    fn obs(rows: &[&str]) -> Observation {
        let rows: Vec<Codeword> = rows.iter().map(|r| r.parse().unwrap()).collect();
        let n = rows[0].len();
        Observation::new(rows, n).unwrap()
    }

    fn one_based(r: &DecodeResult) -> Vec<usize> {
        r.assignment.iter().map(|j| j + 1).collect()
    }

    #[test]
    fn independent_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = book(&["000", "111"]);
        let r = decode_independent(&obs(&["111", "000"]), &c, &mut rng).unwrap();
        assert_eq!(one_based(&r), vec![2, 1]);
        assert!(r.injective);
        assert_eq!(r.cost, 0);

        let r = decode_independent(&obs(&["001"]), &c, &mut rng).unwrap();
        assert_eq!(one_based(&r), vec![1]);

        let r = decode_independent(&obs(&["001", "000"]), &c, &mut rng).unwrap();
        assert_eq!(one_based(&r), vec![1, 1]);
        assert!(!r.injective);
    }

    #[test]
    fn independent_tie_break_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = book(&["00", "11"]);
        let o = obs(&["01"]);
        let trials = 20_000;
        let ones = (0..trials)
            .filter(|_| decode_independent(&o, &c, &mut rng).unwrap().assignment[0] == 0)
            .count();
        let sigma = (trials as f64 * 0.25).sqrt();
        assert!((ones as f64 - trials as f64 / 2.0).abs() <= 4.0 * sigma, "{ones}");

        // three-way tie
        let c = book(&["00", "11", "00", "11"]);
        let o = obs(&["10"]);
        let mut counts = [0usize; 4];
        for _ in 0..trials {
            counts[decode_independent(&o, &c, &mut rng).unwrap().assignment[0]] += 1;
        }
        let sigma = (trials as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - trials as f64 / 4.0).abs() <= 4.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = book(&["000", "111"]);
        assert!(decode_independent(&obs(&["00"]), &c, &mut rng).is_err());
        assert!(decode_joint_ml(&obs(&["00"]), &c).is_err());
        assert!(decode_joint_ml(&obs(&["000", "000", "000"]), &c).is_err());
    }

    #[test]
    fn joint_example_matches_bruteforce() {
        let c = book(&["0000", "1111", "0011"]);
        let o = obs(&["0001", "1110"]);
        let ml = decode_joint_ml(&o, &c).unwrap();
        let bf = decode_joint_bruteforce(&o, &c, DEFAULT_BRUTEFORCE_BUDGET).unwrap();
        assert_eq!(bf.cost, 2);
        assert_eq!(one_based(&bf), vec![1, 2]);
        assert_eq!(ml.cost, 2);
        assert_eq!(one_based(&ml), vec![1, 2]);
        assert!(ml.injective);
    }

    #[test]
    fn noiseless_joint_has_zero_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = Codebook::random(12, 8, &mut rng).unwrap();
        let map = sample_injective_map(8, 3, &mut rng).unwrap();
        let o = transmit(&c, &map, ChannelParams::new(0.0, 3).unwrap(), &mut rng).unwrap();
        let r = decode_joint_ml(&o, &c).unwrap();
        assert_eq!(r.cost, 0);
        if c.min_distance().unwrap() > 0 {
            assert!(!is_error(&r, &map).unwrap());
        }
    }

    #[test]
    fn single_row_joint_is_a_nearest_codeword() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let c = Codebook::random(6, 5, &mut rng).unwrap();
            let y = Codeword::random(6, &mut rng).unwrap();
            let o = Observation::new(vec![y.clone()], 6).unwrap();
            let r = decode_joint_ml(&o, &c).unwrap();
            let best = c.rows().iter().map(|cw| cw.distance(&y)).min().unwrap();
            assert_eq!(c.row(r.assignment[0]).distance(&y), best);
        }
    }

    #[test]
    fn bruteforce_edge_cases() {
        let c = book(&["01", "10"]);
        let o = Observation::new(vec![], 2).unwrap();
        let r = decode_joint_bruteforce(&o, &c, 10).unwrap();
        assert!(r.assignment.is_empty());
        assert_eq!(r.cost, 0);

        let c = Codebook::random(3, 9, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let o = obs(&["000"; 9]);
        assert!(matches!(
            decode_joint_bruteforce(&o, &c, 1000),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn error_indicator() {
        let truth = InjectiveMap::from_one_based(&[1, 2], 3).unwrap();
        let r = |a: &[usize]| DecodeResult::new(a.iter().map(|j| j - 1).collect(), 0);
        assert!(!is_error(&r(&[1, 2]), &truth).unwrap());
        assert!(is_error(&r(&[1, 3]), &truth).unwrap());
        assert!(is_error(&r(&[2, 1]), &truth).unwrap());
        assert!(is_error(&r(&[1]), &truth).is_err());
    }

    /// Per-row errors of the independent decoder are independent events when
    /// every codeword has the same per-row success probability.
    #[test]
    fn independent_row_errors_are_uncorrelated() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let c = book(&["0000", "1111"]);
        let params = ChannelParams::new(0.3, 0).unwrap();
        let trials = 40_000;
        let (mut e0, mut e1, mut both) = (0usize, 0usize, 0usize);
        for _ in 0..trials {
            let map = sample_injective_map(2, 0, &mut rng).unwrap();
            let o = transmit(&c, &map, params, &mut rng).unwrap();
            let r = decode_independent(&o, &c, &mut rng).unwrap();
            let a = r.assignment[0] != map.get(0);
            let b = r.assignment[1] != map.get(1);
            e0 += a as usize;
            e1 += b as usize;
            both += (a && b) as usize;
        }
        let t = trials as f64;
        let (p0, p1, p01) = (e0 as f64 / t, e1 as f64 / t, both as f64 / t);
        let sigma = (p0 * p1 * (1.0 - p0 * p1) / t).sqrt();
        assert!((p01 - p0 * p1).abs() <= 4.0 * sigma, "{p01} vs {}", p0 * p1);
    }

    #[test]
    fn decoder_kind_parsing() {
        assert_eq!("joint".parse::<DecoderKind>().unwrap(), DecoderKind::Joint);
        assert_eq!(
            "independent".parse::<DecoderKind>().unwrap(),
            DecoderKind::Independent
        );
        assert!("ml".parse::<DecoderKind>().is_err());
        assert_eq!(DecoderKind::Joint.to_string(), "joint");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn joint_cost_equals_bruteforce(seed in any::<u64>(), n in 1usize..7, m in 1usize..=6, k_frac in 0.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = ((m as f64) * k_frac) as usize % m;
            let c = Codebook::random(n, m, &mut rng).unwrap();
            let map = sample_injective_map(m, k, &mut rng).unwrap();
            let o = transmit(&c, &map, ChannelParams::new(0.3, k).unwrap(), &mut rng).unwrap();
            let ml = decode_joint_ml(&o, &c).unwrap();
            let bf = decode_joint_bruteforce(&o, &c, DEFAULT_BRUTEFORCE_BUDGET).unwrap();
            prop_assert_eq!(ml.cost, bf.cost);
            prop_assert!(ml.injective && bf.injective);
            let recomputed: u64 = ml.assignment.iter().enumerate()
                .map(|(i, &j)| u64::from(o.row(i).distance(c.row(j)))).sum();
            prop_assert_eq!(recomputed, ml.cost);
        }
    }
}
