//! Exact error probabilities for tiny instances.
//!
//! Two routes compute the expected bee-identification error `D(C, p, k, phi)`:
//!
//! * [`exact_error_enumerated`] walks every injective map and every noise
//!   pattern, splitting decoder ties uniformly. It is the literal definition.
//! * [`exact_error_probability`] factorizes the same sum. For the joint
//!   decoder every optimal map has the same likelihood `p^c* (1-p)^(N-c*)`,
//!   so the success probability is `sum_y p^c*(y) (1-p)^(N-c*(y)) / |maps|`
//!   and only the optimal cost `c*(y)` of each received multiset is needed.
//!   For independent decoding rows fail independently given the map, and the
//!   average over maps of a product of per-codeword success probabilities is
//!   an elementary symmetric polynomial.
//!
//! The minimizations over all codebooks ([`min_codebook_error`],
//! [`min_bee_id_error`]) use the fast route and run in parallel over
//! codebooks; the reduction keeps the smallest value and, among equal values,
//! the smallest codebook index, so results do not depend on thread count.

use rayon::prelude::*;

use crate::codebook::Codebook;
use crate::decode::{assignment, count_injective_maps, DecoderKind};
use crate::error::{Error, Result};

/// Default cap on elementary evaluations for one oracle call.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Widest row the lookup tables accept.
const MAX_TABLE_BITS: usize = 20;

/// Largest codebook for which the optimal-assignment cost uses subset DP.
const SUBSET_DP_MAX_M: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleOptions {
    /// Maximum number of elementary evaluations.
    pub budget: u64,
    /// Only visit codebooks whose rows are in non-decreasing order. The
    /// error of a codebook does not depend on row order, so the minimum is
    /// unchanged; off by default.
    pub canonical: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            budget: DEFAULT_BUDGET,
            canonical: false,
        }
    }
}

/// What an [`ExactError`] measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// `D(C, p, k, phi)` for a fixed codebook and decoder.
    Codebook(DecoderKind),
    /// `P_e(n, m, p)`: best ordinary block error over all codebooks.
    MinCodebookError,
    /// The optimal bee-identification error over codebooks and decoders.
    MinBeeId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactError {
    pub value: f64,
    pub n: usize,
    pub m: usize,
    /// Absent rows; `None` for [`Quantity::MinCodebookError`].
    pub k: Option<usize>,
    pub p: f64,
    pub quantity: Quantity,
    /// A codebook attaining the minimum, for the minimized quantities.
    pub minimizer: Option<Codebook>,
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..0.5).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("p = {p} outside [0, 0.5)")))
    }
}

fn check_budget(what: &str, work: Option<u64>, budget: u64) -> Result<()> {
    match work {
        Some(w) if w <= budget => Ok(()),
        Some(w) => Err(Error::ResourceLimit(format!(
            "{what} needs {w} evaluations, budget is {budget}"
        ))),
        None => Err(Error::ResourceLimit(format!(
            "{what} needs more than 2^64 evaluations"
        ))),
    }
}

fn pow2(bits: usize) -> Option<u64> {
    1u64.checked_shl(u32::try_from(bits).ok()?)
        .filter(|_| bits < 64)
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k.min(n));
    (0..k).try_fold(1u64, |acc, i| {
        acc.checked_mul(n - i).map(|x| x / (i + 1))
    })
}

/// Probability weights `p^c (1-p)^(total-c)` for `c = 0..=total`.
fn weights(p: f64, total: usize) -> Vec<f64> {
    (0..=total)
        .map(|c| p.powi(c as i32) * (1.0 - p).powi((total - c) as i32))
        .collect()
}

fn packed_rows(c: &Codebook) -> Result<Vec<u64>> {
    if c.n() > MAX_TABLE_BITS {
        return Err(Error::ResourceLimit(format!(
            "exact computation supports n <= {MAX_TABLE_BITS}, got {}",
            c.n()
        )));
    }
    Ok(c.rows().iter().map(|r| r.words()[0]).collect())
}

/// Calls `f(values, multiplicity)` for every multiset of `len` values from
/// `0..alphabet`, given as a non-decreasing sequence. `multiplicity` counts
/// the ordered sequences with that multiset.
fn for_each_multiset<F: FnMut(&[u64], u64)>(alphabet: u64, len: usize, mut f: F) {
    if len == 0 {
        f(&[], 1);
        return;
    }
    let factorial: Vec<u64> = (0..=len as u64)
        .scan(1u64, |acc, i| {
            if i > 0 {
                *acc *= i;
            }
            Some(*acc)
        })
        .collect();
    let mut seq = vec![0u64; len];
    loop {
        let mut mult = factorial[len];
        let mut run = 1usize;
        for i in 1..=len {
            if i < len && seq[i] == seq[i - 1] {
                run += 1;
            } else {
                mult /= factorial[run];
                run = 1;
            }
        }
        f(&seq, mult);
        let Some(i) = (0..len).rev().find(|&i| seq[i] + 1 < alphabet) else {
            return;
        };
        let v = seq[i] + 1;
        seq[i..].fill(v);
    }
}

/// Least total cost of an injective assignment of each row of `cost`
/// (`rows x m`, row-major) to distinct columns.
fn min_assignment_cost(cost: &[u32], rows: usize, m: usize, dp: &mut Vec<u32>) -> u32 {
    if rows == 0 {
        return 0;
    }
    if m <= SUBSET_DP_MAX_M {
        // dp[mask] = least cost of giving the first popcount(mask) rows the
        // columns in mask
        dp.clear();
        dp.resize(1 << m, u32::MAX);
        dp[0] = 0;
        let mut best = u32::MAX;
        for mask in 0usize..(1 << m) {
            let base = dp[mask];
            if base == u32::MAX {
                continue;
            }
            let i = mask.count_ones() as usize;
            if i == rows {
                best = best.min(base);
                continue;
            }
            let row = &cost[i * m..(i + 1) * m];
            for (j, &cj) in row.iter().enumerate() {
                if mask & (1 << j) == 0 {
                    let next = &mut dp[mask | (1 << j)];
                    *next = (*next).min(base + cj);
                }
            }
        }
        best
    } else {
        let wide: Vec<i64> = cost.iter().map(|&c| i64::from(c)).collect();
        assignment::solve(&wide, rows, m).1 as u32
    }
}

/// Histogram over `y` of the optimal joint cost `c*(y)`, for `r` received
/// rows. Entry `c` counts ordered observations with `c*(y) = c`.
fn joint_cost_histogram(rows: &[u64], n: usize, r: usize) -> Vec<u64> {
    let m = rows.len();
    let alphabet = 1u64 << n;
    let dist: Vec<u32> = (0..alphabet)
        .flat_map(|v| rows.iter().map(move |&c| (v ^ c).count_ones()))
        .collect();
    let mut hist = vec![0u64; n * r + 1];
    let mut cost = vec![0u32; r * m];
    let mut dp = Vec::new();
    for_each_multiset(alphabet, r, |ys, mult| {
        for (i, &y) in ys.iter().enumerate() {
            let y = y as usize;
            cost[i * m..(i + 1) * m].copy_from_slice(&dist[y * m..(y + 1) * m]);
        }
        hist[min_assignment_cost(&cost, r, m, &mut dp) as usize] += mult;
    });
    hist
}

/// Work estimate for [`joint_cost_histogram`]: one unit per cost-matrix
/// entry of every received multiset.
fn joint_work(n: usize, m: usize, r: usize) -> Option<u64> {
    let alphabet = pow2(n)?;
    let multisets = binomial(alphabet + r as u64 - 1, r as u64)?;
    multisets.checked_mul(((r * m) as u64).max(1))
}

/// Error from the optimal-cost histogram. Writing the total probability one
/// as `sum_c maps * C(N, c) w_c` turns the error into
/// `sum_c (maps * C(N, c) - hist_c) w_c / maps`, which is exactly zero when
/// every observation decodes correctly.
fn joint_error_from_histogram(hist: &[u64], p: f64, maps: u64) -> f64 {
    let total = hist.len() - 1;
    let w = weights(p, total);
    let mut s = CompensatedSum::default();
    let mut choose = 1u128;
    for (c, (&h, &wc)) in hist.iter().zip(&w).enumerate() {
        let all = choose.checked_mul(u128::from(maps)).and_then(|x| i128::try_from(x).ok());
        let Some(all) = all else {
            return joint_error_direct(hist, &w, maps);
        };
        let missing = all - i128::from(h);
        if missing != 0 {
            s.add(missing as f64 * wc);
        }
        let Some(next) = choose.checked_mul((total - c) as u128) else {
            return joint_error_direct(hist, &w, maps);
        };
        choose = next / (c as u128 + 1);
    }
    (s.value() / maps as f64).clamp(0.0, 1.0)
}

/// `1 - sum_c hist_c w_c / maps`, for histograms too wide for exact
/// integer coefficients.
fn joint_error_direct(hist: &[u64], w: &[f64], maps: u64) -> f64 {
    let mut s = CompensatedSum::default();
    for (&h, &wc) in hist.iter().zip(w) {
        if h > 0 {
            s.add(h as f64 * wc);
        }
    }
    (1.0 - s.value() / maps as f64).clamp(0.0, 1.0)
}

/// Per-codeword probability that independent decoding of a received copy
/// returns a wrong index, ties split uniformly.
fn independent_row_failure(rows: &[u64], n: usize, p: f64) -> Vec<f64> {
    let m = rows.len();
    let w = weights(p, n);
    let mut acc = vec![CompensatedSum::default(); m];
    let mut dists = vec![0u32; m];
    for v in 0..(1u64 << n) {
        for (d, &c) in dists.iter_mut().zip(rows) {
            *d = (v ^ c).count_ones();
        }
        let best = *dists.iter().min().expect("m >= 1");
        let ties = dists.iter().filter(|&&d| d == best).count();
        for (j, &d) in dists.iter().enumerate() {
            if d != best {
                acc[j].add(w[d as usize]);
            } else if ties > 1 {
                acc[j].add(w[d as usize] * (ties - 1) as f64 / ties as f64);
            }
        }
    }
    acc.iter().map(CompensatedSum::value).collect()
}

/// Mean over uniformly drawn `r`-subsets `S` of `1 - prod_{j in S} (1 - f_j)`,
/// built up one index at a time: index `j` joins a random `t`-subset of the
/// first `j` indices with probability `t / j`.
fn mean_failure_over_maps(f: &[f64], r: usize) -> f64 {
    let mut g = vec![0.0f64; r + 1];
    for (j, &fj) in f.iter().enumerate() {
        let j = j + 1;
        for t in (1..=r.min(j)).rev() {
            let a = t as f64 / j as f64;
            g[t] = (1.0 - a) * g[t] + a * (fj + (1.0 - fj) * g[t - 1]);
        }
    }
    g[r]
}

/// Exact `D(C, p, k, decoder)` by the factorized route.
pub fn exact_error_probability(
    c: &Codebook,
    p: f64,
    k: usize,
    decoder: DecoderKind,
    opts: &OracleOptions,
) -> Result<ExactError> {
    check_p(p)?;
    let (n, m) = (c.n(), c.m());
    if k >= m {
        return Err(Error::invalid(format!("need k < m, got k = {k}, m = {m}")));
    }
    let rows = packed_rows(c)?;
    let r = m - k;
    let value = match decoder {
        DecoderKind::Joint => {
            check_budget("joint exact error", joint_work(n, m, r), opts.budget)?;
            let hist = joint_cost_histogram(&rows, n, r);
            let maps = count_injective_maps(m, r)
                .ok_or_else(|| Error::ResourceLimit("too many injective maps".into()))?;
            joint_error_from_histogram(&hist, p, maps)
        }
        DecoderKind::Independent => {
            let work = pow2(n).and_then(|a| a.checked_mul(m as u64));
            check_budget("independent exact error", work, opts.budget)?;
            let f = independent_row_failure(&rows, n, p);
            mean_failure_over_maps(&f, r).clamp(0.0, 1.0)
        }
    };
    Ok(ExactError {
        value,
        n,
        m,
        k: Some(k),
        p,
        quantity: Quantity::Codebook(decoder),
        minimizer: None,
    })
}

/// Calls `f` on every injective map `{0..len} -> {0..m}` in lexicographic
/// order.
fn for_each_injective_map<F: FnMut(&[usize])>(m: usize, len: usize, mut f: F) {
    fn rec<F: FnMut(&[usize])>(m: usize, len: usize, cur: &mut Vec<usize>, used: &mut [bool], f: &mut F) {
        if cur.len() == len {
            f(cur);
            return;
        }
        for j in 0..m {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                rec(m, len, cur, used, f);
                cur.pop();
                used[j] = false;
            }
        }
    }
    rec(m, len, &mut Vec::with_capacity(len), &mut vec![false; m], &mut f);
}

/// Exact `D(C, p, k, decoder)` by direct enumeration of every (map, noise)
/// pair, splitting decoder ties uniformly. Needs
/// `(m!/k!) * 2^(n(m-k))` evaluations (squared map count for the joint
/// decoder).
pub fn exact_error_enumerated(
    c: &Codebook,
    p: f64,
    k: usize,
    decoder: DecoderKind,
    opts: &OracleOptions,
) -> Result<ExactError> {
    check_p(p)?;
    let (n, m) = (c.n(), c.m());
    if k >= m {
        return Err(Error::invalid(format!("need k < m, got k = {k}, m = {m}")));
    }
    let rows = packed_rows(c)?;
    let r = m - k;
    let total_bits = n * r;
    let maps_count = count_injective_maps(m, r);
    let patterns = pow2(total_bits);
    let per_pair = match decoder {
        DecoderKind::Independent => Some((r * m) as u64),
        DecoderKind::Joint => maps_count.and_then(|x| x.checked_mul(r as u64)),
    };
    let work = maps_count
        .zip(patterns)
        .and_then(|(a, b)| a.checked_mul(b))
        .zip(per_pair)
        .and_then(|(a, b)| a.checked_mul(b));
    check_budget("enumerated exact error", work, opts.budget)?;

    let mut maps = Vec::new();
    for_each_injective_map(m, r, |map| maps.push(map.to_vec()));
    let w = weights(p, total_bits);
    let row_mask = (1u64 << n) - 1;

    let mut err = CompensatedSum::default();
    let mut ys = vec![0u64; r];
    let mut costs = vec![0u32; maps.len()];
    for truth in &maps {
        for noise in 0..patterns.expect("checked") {
            let weight = w[noise.count_ones() as usize];
            for (i, y) in ys.iter_mut().enumerate() {
                *y = rows[truth[i]] ^ ((noise >> (i * n)) & row_mask);
            }
            let success = match decoder {
                DecoderKind::Independent => ys
                    .iter()
                    .zip(truth)
                    .map(|(&y, &t)| {
                        let d: Vec<u32> = rows.iter().map(|&c| (c ^ y).count_ones()).collect();
                        let best = *d.iter().min().expect("m >= 1");
                        if d[t] == best {
                            1.0 / d.iter().filter(|&&x| x == best).count() as f64
                        } else {
                            0.0
                        }
                    })
                    .product::<f64>(),
                DecoderKind::Joint => {
                    for (cost, sigma) in costs.iter_mut().zip(&maps) {
                        *cost = ys
                            .iter()
                            .zip(sigma)
                            .map(|(&y, &j)| (y ^ rows[j]).count_ones())
                            .sum();
                    }
                    let best = *costs.iter().min().expect("at least one map");
                    let optima = costs.iter().filter(|&&x| x == best).count() as f64;
                    let truth_cost: u32 = ys
                        .iter()
                        .zip(truth)
                        .map(|(&y, &j)| (y ^ rows[j]).count_ones())
                        .sum();
                    if truth_cost == best {
                        1.0 / optima
                    } else {
                        0.0
                    }
                }
            };
            err.add(weight * (1.0 - success));
        }
    }
    let value = (err.value() / maps.len() as f64).clamp(0.0, 1.0);
    Ok(ExactError {
        value,
        n,
        m,
        k: Some(k),
        p,
        quantity: Quantity::Codebook(decoder),
        minimizer: None,
    })
}

/// Decodes a codebook index into packed rows: row `j` is digit `j` of
/// `index` in base `2^n`.
fn codebook_rows(index: u64, n: usize, m: usize) -> Vec<u64> {
    let mask = (1u64 << n) - 1;
    (0..m).map(|j| (index >> (j * n)) & mask).collect()
}

fn is_canonical(rows: &[u64]) -> bool {
    rows.windows(2).all(|w| w[0] <= w[1])
}

/// Minimizes `eval(rows)[i]` over all `2^(nm)` codebooks, separately for
/// each output slot `i`. Returns `(value, codebook index)` per slot.
fn minimize_over_codebooks<F>(n: usize, m: usize, canonical: bool, slots: usize, eval: F) -> Vec<(f64, u64)>
where
    F: Fn(&[u64]) -> Vec<f64> + Sync,
{
    let total = 1u64 << (n * m);
    let better = |a: (f64, u64), b: (f64, u64)| {
        if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let init = || vec![(f64::INFINITY, u64::MAX); slots];
    (0..total)
        .into_par_iter()
        .fold(init, |mut acc, idx| {
            let rows = codebook_rows(idx, n, m);
            if canonical && !is_canonical(&rows) {
                return acc;
            }
            for (slot, v) in acc.iter_mut().zip(eval(&rows)) {
                *slot = better(*slot, (v, idx));
            }
            acc
        })
        .reduce(init, |a, b| a.into_iter().zip(b).map(|(x, y)| better(x, y)).collect())
}

fn check_codebook_space(n: usize, m: usize, per_codebook: Option<u64>, budget: u64, what: &str) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("n and m must be positive"));
    }
    let work = pow2(n * m).zip(per_codebook).and_then(|(a, b)| a.checked_mul(b));
    check_budget(what, work, budget)
}

/// Block error of ML decoding of a codebook with uniform messages. For each
/// received word the failure mass is every codeword's likelihood except one
/// share among the nearest.
fn ml_block_error(rows: &[u64], n: usize, w: &[f64]) -> f64 {
    let mut s = CompensatedSum::default();
    for v in 0..(1u64 << n) {
        let mut best = u32::MAX;
        for &c in rows {
            let d = (c ^ v).count_ones();
            if d < best {
                if best != u32::MAX {
                    s.add(w[best as usize]);
                }
                best = d;
            } else {
                s.add(w[d as usize]);
            }
        }
    }
    (s.value() / rows.len() as f64).clamp(0.0, 1.0)
}

/// `P_e(n, m, p)`: least ML block error over all `m`-word codebooks of
/// length `n`, uniform messages, ties split uniformly.
pub fn min_codebook_error(n: usize, m: usize, p: f64, opts: &OracleOptions) -> Result<ExactError> {
    Ok(min_codebook_error_grid(n, m, &[p], opts)?.remove(0))
}

/// [`min_codebook_error`] at several crossover probabilities, sharing one
/// pass over the codebooks.
pub fn min_codebook_error_grid(n: usize, m: usize, ps: &[f64], opts: &OracleOptions) -> Result<Vec<ExactError>> {
    ps.iter().try_for_each(|&p| check_p(p))?;
    check_codebook_space(
        n,
        m,
        pow2(n).and_then(|a| a.checked_mul(m as u64)),
        opts.budget,
        "minimum codebook error",
    )?;
    let ws: Vec<Vec<f64>> = ps.iter().map(|&p| weights(p, n)).collect();
    let best = minimize_over_codebooks(n, m, opts.canonical, ps.len(), |rows| {
        ws.iter().map(|w| ml_block_error(rows, n, w)).collect()
    });
    ps.iter()
        .zip(best)
        .map(|(&p, (value, idx))| {
            Ok(ExactError {
                value,
                n,
                m,
                k: None,
                p,
                quantity: Quantity::MinCodebookError,
                minimizer: Some(Codebook::from_u64s(&codebook_rows(idx, n, m), n)?),
            })
        })
        .collect()
}

/// The optimal bee-identification error `D(n, m, p, k)`: least joint-ML
/// error over all codebooks.
pub fn min_bee_id_error(n: usize, m: usize, p: f64, k: usize, opts: &OracleOptions) -> Result<ExactError> {
    Ok(min_bee_id_error_grid(n, m, k, &[p], opts)?.remove(0))
}

/// [`min_bee_id_error`] at several crossover probabilities.
pub fn min_bee_id_error_grid(
    n: usize,
    m: usize,
    k: usize,
    ps: &[f64],
    opts: &OracleOptions,
) -> Result<Vec<ExactError>> {
    ps.iter().try_for_each(|&p| check_p(p))?;
    if k >= m {
        return Err(Error::invalid(format!("need k < m, got k = {k}, m = {m}")));
    }
    if n > MAX_TABLE_BITS {
        return Err(Error::ResourceLimit(format!("n = {n} too large for enumeration")));
    }
    let r = m - k;
    check_codebook_space(n, m, joint_work(n, m, r), opts.budget, "minimum bee-identification error")?;
    let maps = count_injective_maps(m, r)
        .ok_or_else(|| Error::ResourceLimit("too many injective maps".into()))?;
    let best = minimize_over_codebooks(n, m, opts.canonical, ps.len(), |rows| {
        let hist = joint_cost_histogram(rows, n, r);
        ps.iter()
            .map(|&p| joint_error_from_histogram(&hist, p, maps))
            .collect()
    });
    ps.iter()
        .zip(best)
        .map(|(&p, (value, idx))| {
            Ok(ExactError {
                value,
                n,
                m,
                k: Some(k),
                p,
                quantity: Quantity::MinBeeId,
                minimizer: Some(Codebook::from_u64s(&codebook_rows(idx, n, m), n)?),
            })
        })
        .collect()
}
