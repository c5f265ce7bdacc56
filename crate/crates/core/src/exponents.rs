//! Error-exponent and capacity bounds for the BSC, in bits.
//!
//! The reliability function `E(R, p)` is not known in closed form, so every
//! quantity here is a bound: `E_TLC` (typical linear codes) from below, and
//! from above the minimum of the sphere-packing exponent, the
//! linear-programming distance bound `delta_LP(R) * B_p`, and straight lines
//! joining `delta_LP(R1) * B_p` to `E_sp(R2, p)`.
//!
//! With `k = alpha * m` absent rows and `0 < alpha < 1`, the bee-identification
//! exponent is `|E(R, p) - R|^+` and the capacity is the root of `E(R, p) = R`,
//! so both inherit a lower/upper pair from the reliability bounds.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default number of endpoints for the straight-line bound search.
pub const DEFAULT_LINE_GRID: usize = 200;

/// Rates below this are where the low-rate discontinuity result is stated.
pub const GAP_RATE_LIMIT: f64 = 0.169;

const DELTA_GV_MAX_ITER: usize = 64;
const ROOT_TOL: f64 = 1e-13;

/// Binary entropy without range checks; `0 log 0 = 0`.
#[inline]
fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 0.5 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "crossover probability {p} outside (0, 0.5)"
        )))
    }
}

fn check_rate(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("rate {r} must be non-negative")))
    }
}

/// `H(x) = -x log2 x - (1-x) log2 (1-x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("entropy argument {x} outside [0, 1]")));
    }
    Ok(h2(x))
}

fn delta_gv_unchecked(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.5;
    }
    if r >= 1.0 {
        return 0.0;
    }
    let target = 1.0 - r;
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..DELTA_GV_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h2(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // endpoint with the smaller residual
    if (h2(lo) - target).abs() <= (h2(hi) - target).abs() {
        lo
    } else {
        hi
    }
}

/// Gilbert-Varshamov relative distance: the `delta` in `[0, 1/2]` with
/// `H(delta) = 1 - R`. Endpoints follow by continuity.
pub fn delta_gv(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::invalid(format!("rate {r} outside [0, 1]")));
    }
    Ok(delta_gv_unchecked(r))
}

fn delta_lp_unchecked(r: f64) -> f64 {
    let d = delta_gv_unchecked(1.0 - r);
    0.5 - (d * (1.0 - d)).sqrt()
}

/// Linear-programming upper bound on the best relative minimum distance:
/// `1/2 - sqrt(delta_GV(1-R) (1 - delta_GV(1-R)))`.
pub fn delta_lp(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::invalid(format!("rate {r} outside [0, 1]")));
    }
    Ok(delta_lp_unchecked(r))
}

fn bhattacharyya_unchecked(p: f64) -> f64 {
    -(4.0 * p * (1.0 - p)).sqrt().log2()
}

/// `B_p = -log2 sqrt(4 p (1-p))`.
pub fn bhattacharyya(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(bhattacharyya_unchecked(p))
}

fn kl_unchecked(x: f64, y: f64) -> f64 {
    let a = if x > 0.0 { x * (x / y).log2() } else { 0.0 };
    let b = if x < 1.0 {
        (1.0 - x) * ((1.0 - x) / (1.0 - y)).log2()
    } else {
        0.0
    };
    a + b
}

/// Binary KL divergence `D(x || y)` in bits.
pub fn kl_bernoulli(x: f64, y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("x = {x} outside [0, 1]")));
    }
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::invalid(format!("y = {y} outside (0, 1)")));
    }
    Ok(kl_unchecked(x, y))
}

/// Breakpoints of the typical-linear-codes exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateConstants {
    /// Expurgation threshold `R_ex`.
    pub r_ex: f64,
    /// Critical rate `R_cr`.
    pub r_cr: f64,
    /// Cutoff rate `R_0`.
    pub r_0: f64,
}

fn rate_constants_unchecked(p: f64) -> RateConstants {
    let s = (4.0 * p * (1.0 - p)).sqrt();
    let (sp, sq) = (p.sqrt(), (1.0 - p).sqrt());
    RateConstants {
        r_ex: 1.0 - h2(s / (1.0 + s)),
        r_cr: 1.0 - h2(sp / (sp + sq)),
        r_0: 1.0 - (1.0 + s).log2(),
    }
}

pub fn rate_constants(p: f64) -> Result<RateConstants> {
    check_p(p)?;
    Ok(rate_constants_unchecked(p))
}

/// All exponent bounds for one crossover probability, with the
/// straight-line endpoint tables precomputed.
///
/// The straight-line endpoints come from one fixed grid of rates inside
/// `(0, 1 - H(p))`, shared by every evaluation point. With a shared grid the
/// resulting upper bound is non-increasing in `R`.
#[derive(Clone, Debug)]
pub struct BscExponents {
    p: f64,
    b_p: f64,
    consts: RateConstants,
    capacity: f64,
    /// `(R_i, delta_LP(R_i) B_p, E_sp(R_i))`, increasing in `R_i`.
    line_grid: Vec<(f64, f64, f64)>,
}

impl BscExponents {
    pub fn new(p: f64) -> Result<Self> {
        Self::with_line_grid(p, DEFAULT_LINE_GRID)
    }

    pub fn with_line_grid(p: f64, points: usize) -> Result<Self> {
        check_p(p)?;
        let b_p = bhattacharyya_unchecked(p);
        let capacity = 1.0 - h2(p);
        let mut ex = BscExponents {
            p,
            b_p,
            consts: rate_constants_unchecked(p),
            capacity,
            line_grid: Vec::new(),
        };
        ex.line_grid = (1..=points)
            .map(|i| {
                let r = capacity * i as f64 / (points + 1) as f64;
                (r, ex.lp_bound(r), ex.sp(r))
            })
            .collect();
        Ok(ex)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn bhattacharyya(&self) -> f64 {
        self.b_p
    }

    pub fn rate_constants(&self) -> RateConstants {
        self.consts
    }

    /// Channel capacity `1 - H(p)`.
    pub fn channel_capacity(&self) -> f64 {
        self.capacity
    }

    /// Typical-linear-codes lower bound on `E(R, p)`.
    pub fn tlc(&self, r: f64) -> f64 {
        let RateConstants { r_ex, r_cr, r_0 } = self.consts;
        if r >= self.capacity {
            0.0
        } else if r <= r_ex {
            delta_gv_unchecked(r) * self.b_p
        } else if r <= r_cr {
            r_0 - r
        } else {
            kl_unchecked(delta_gv_unchecked(r), self.p).max(0.0)
        }
    }

    /// Sphere-packing exponent, zero at and above capacity.
    pub fn sp(&self, r: f64) -> f64 {
        if r >= self.capacity {
            0.0
        } else {
            kl_unchecked(delta_gv_unchecked(r), self.p).max(0.0)
        }
    }

    /// `delta_LP(R) * B_p`.
    pub fn lp_bound(&self, r: f64) -> f64 {
        delta_lp_unchecked(r.clamp(0.0, 1.0)) * self.b_p
    }

    /// Least chord value at `r` over grid endpoints `R1 < r < R2`, joining
    /// `delta_LP(R1) B_p` to `E_sp(R2)`. Infinite when no chord spans `r`.
    pub fn straight_line(&self, r: f64) -> f64 {
        let split = self.line_grid.partition_point(|&(ri, _, _)| ri < r);
        let (left, right) = self.line_grid.split_at(split);
        let right = match right.first() {
            Some(&(r2, _, _)) if r2 == r => &right[1..],
            _ => right,
        };
        let mut best = f64::INFINITY;
        for &(r1, a, _) in left {
            for &(r2, _, b) in right {
                let v = a + (r - r1) * ((b - a) / (r2 - r1));
                best = best.min(v);
            }
        }
        best
    }

    /// Upper bound on `E(R, p)`: the least of the sphere-packing, LP-distance
    /// and straight-line bounds.
    pub fn upper(&self, r: f64) -> f64 {
        if r >= self.capacity {
            return 0.0;
        }
        self.sp(r).min(self.lp_bound(r)).min(self.straight_line(r))
    }

    /// `(max(0, E_TLC - R), max(0, E_upper - R))`.
    pub fn bee_bounds(&self, r: f64) -> (f64, f64) {
        ((self.tlc(r) - r).max(0.0), (self.upper(r) - r).max(0.0))
    }

    /// Roots of `E_TLC(R) = R` and `E_upper(R) = R`.
    pub fn capacity_bounds(&self) -> CapacityBounds {
        let lower = bisect_decreasing(|r| self.tlc(r) - r, 0.0, self.capacity);
        let upper = bisect_decreasing(|r| self.upper(r) - r, 0.0, self.capacity);
        CapacityBounds { lower, upper }
    }
}

/// Root of a decreasing function with `f(lo) > 0 >= f(hi)`.
fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    debug_assert!(f(lo) > 0.0, "no sign change at lower end");
    for _ in 0..200 {
        if hi - lo <= ROOT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn e_tlc(r: f64, p: f64) -> Result<f64> {
    check_rate(r)?;
    check_p(p)?;
    Ok(BscExponents::with_line_grid(p, 0)?.tlc(r))
}

pub fn e_sp(r: f64, p: f64) -> Result<f64> {
    check_rate(r)?;
    check_p(p)?;
    Ok(BscExponents::with_line_grid(p, 0)?.sp(r))
}

pub fn e_upper(r: f64, p: f64) -> Result<f64> {
    check_rate(r)?;
    Ok(BscExponents::new(p)?.upper(r))
}

/// Bounds on the bee-identification exponent `|E(R, p) - R|^+`.
pub fn bee_exponent_bounds(r: f64, p: f64) -> Result<(f64, f64)> {
    check_rate(r)?;
    Ok(BscExponents::new(p)?.bee_bounds(r))
}

/// Bracket on the bee-identification capacity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacityBounds {
    pub lower: f64,
    pub upper: f64,
}

pub fn capacity_bounds(p: f64) -> Result<CapacityBounds> {
    Ok(BscExponents::new(p)?.capacity_bounds())
}

/// Lower or upper bound tag for an [`ExponentCurve`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveKind {
    Lower,
    Upper,
}

/// Sampled bound curve, rates strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentCurve {
    pub kind: CurveKind,
    pub points: Vec<(f64, f64)>,
}

/// `steps` evenly spaced rates from `rmin` to `rmax` inclusive.
pub fn rate_grid(rmin: f64, rmax: f64, steps: usize) -> Result<Vec<f64>> {
    if !(rmin >= 0.0 && rmax > rmin && rmax.is_finite()) {
        return Err(Error::invalid(format!(
            "rate range must satisfy 0 <= rmin < rmax, got [{rmin}, {rmax}]"
        )));
    }
    if steps < 2 {
        return Err(Error::invalid("need at least two grid points"));
    }
    let h = (rmax - rmin) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { rmax } else { rmin + h * i as f64 })
        .collect())
}

/// Lower and upper bee-exponent curves at the given rates. At `R = 0` both
/// equal the zero-rate limit `B_p / 2`.
pub fn bee_exponent_curves(p: f64, rates: &[f64]) -> Result<(ExponentCurve, ExponentCurve)> {
    if rates.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("rates must be strictly increasing"));
    }
    if let Some(&r) = rates.iter().find(|&&r| r.is_nan() || r < 0.0) {
        return Err(Error::invalid(format!("rate {r} must be non-negative")));
    }
    let ex = BscExponents::new(p)?;
    let pairs: Vec<(f64, f64)> = rates.par_iter().map(|&r| ex.bee_bounds(r)).collect();
    let lower = rates.iter().zip(&pairs).map(|(&r, b)| (r, b.0)).collect();
    let upper = rates.iter().zip(&pairs).map(|(&r, b)| (r, b.1)).collect();
    Ok((
        ExponentCurve {
            kind: CurveKind::Lower,
            points: lower,
        },
        ExponentCurve {
            kind: CurveKind::Upper,
            points: upper,
        },
    ))
}

/// Capacity brackets for each `p`, computed in parallel.
pub fn capacity_curve(ps: &[f64]) -> Result<Vec<(f64, CapacityBounds)>> {
    ps.par_iter()
        .map(|&p| Ok((p, capacity_bounds(p)?)))
        .collect()
}

/// Bounds on the exponent with no absent rows, valid for `0 < R < R_ex / 2`:
/// `2 delta_GV(2R) B_p <= E <= 2 delta_LP(R) B_p + R`.
pub fn no_absentee_bounds(r: f64, p: f64) -> Result<(f64, f64)> {
    let c = rate_constants(p)?;
    if !(r > 0.0 && r < c.r_ex / 2.0) {
        return Err(Error::invalid(format!(
            "rate {r} outside (0, R_ex/2 = {})",
            c.r_ex / 2.0
        )));
    }
    let b = bhattacharyya_unchecked(p);
    Ok((
        2.0 * delta_gv_unchecked(2.0 * r) * b,
        2.0 * delta_lp_unchecked(r) * b + r,
    ))
}

/// The two sides of the low-rate discontinuity: an upper bound on the
/// `alpha -> 0` limit of the absentee exponent, and a lower bound on the
/// exponent with every row present.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbsenteeGap {
    pub absentee_limit_upper: f64,
    pub no_absentee_lower: f64,
}

impl AbsenteeGap {
    pub fn gap(&self) -> f64 {
        self.no_absentee_lower - self.absentee_limit_upper
    }
}

pub fn absentee_gap(r: f64, p: f64) -> Result<AbsenteeGap> {
    let c = rate_constants(p)?;
    let limit = GAP_RATE_LIMIT.min(c.r_ex / 2.0);
    if !(r > 0.0 && r < limit) {
        return Err(Error::invalid(format!("rate {r} outside (0, {limit})")));
    }
    let b = bhattacharyya_unchecked(p);
    Ok(AbsenteeGap {
        absentee_limit_upper: (delta_lp_unchecked(r) * b - r).max(0.0),
        no_absentee_lower: 2.0 * delta_gv_unchecked(2.0 * r) * b,
    })
}

/// One row of an inequality table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityRow {
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `delta_GV(R_ex/2) B_p > R_ex/2` for each `p`.
pub fn check_expurgated_midpoint(p_grid: &[f64]) -> Result<Vec<InequalityRow>> {
    p_grid
        .iter()
        .map(|&p| {
            let c = rate_constants(p)?;
            let lhs = delta_gv_unchecked(c.r_ex / 2.0) * bhattacharyya_unchecked(p);
            let rhs = c.r_ex / 2.0;
            Ok(InequalityRow {
                x: p,
                lhs,
                rhs,
                holds: lhs > rhs,
            })
        })
        .collect()
}

/// `delta_LP(R) < 2 delta_GV(2R)` for each `R` in `(0, 1/2)`.
pub fn check_lp_below_double_gv(r_grid: &[f64]) -> Result<Vec<InequalityRow>> {
    r_grid
        .iter()
        .map(|&r| {
            if !(r > 0.0 && r < 0.5) {
                return Err(Error::invalid(format!("rate {r} outside (0, 0.5)")));
            }
            let lhs = delta_lp_unchecked(r);
            let rhs = 2.0 * delta_gv_unchecked(2.0 * r);
            Ok(InequalityRow {
                x: r,
                lhs,
                rhs,
                holds: lhs < rhs,
            })
        })
        .collect()
}

/// Right-hand sides of the finite-length bounds on the optimal
/// bee-identification error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteLengthBounds {
    /// Union-bound upper bound `min{1, (m-k) P_e(n, m, p)}`.
    pub union_upper: f64,
    /// `(1 - 2 eps)/2 * min{1, (m-k) eps P_e(n, floor(k eps), p)}`.
    pub half_min_lower: f64,
    /// `(1 - 2 eps) * (1 - exp(-(m-k) eps P_e(n, floor(k eps), p)))`.
    pub exp_lower: f64,
}

/// `pe_small` is `P_e(n, floor(k eps), p)` and `pe_full` is `P_e(n, m, p)`.
pub fn finite_length_bounds(
    n: usize,
    m: usize,
    k: usize,
    eps: f64,
    pe_small: f64,
    pe_full: f64,
) -> Result<FiniteLengthBounds> {
    if n == 0 {
        return Err(Error::invalid("blocklength must be positive"));
    }
    if k >= m {
        return Err(Error::invalid(format!("need k < m, got k = {k}, m = {m}")));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::invalid(format!("eps = {eps} outside (0, 1/2)")));
    }
    if k as f64 <= 1.0 / eps {
        return Err(Error::invalid(format!("need k > 1/eps, got k = {k}, eps = {eps}")));
    }
    for (name, v) in [("pe_small", pe_small), ("pe_full", pe_full)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!("{name} = {v} outside [0, 1]")));
        }
    }
    let present = (m - k) as f64;
    let x = present * eps * pe_small;
    Ok(FiniteLengthBounds {
        union_upper: (present * pe_full).min(1.0),
        half_min_lower: (1.0 - 2.0 * eps) / 2.0 * x.min(1.0),
        exp_lower: (1.0 - 2.0 * eps) * (1.0 - (-x).exp()),
    })
}

/// `i * step` for `i = 1..=count`; avoids accumulated rounding.
pub fn step_grid(step: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|i| i as f64 * step).collect()
}

/// Crossover probabilities 0.005, 0.010, ..., 0.495.
pub fn probability_grid() -> Vec<f64> {
    step_grid(0.005, 99)
}
