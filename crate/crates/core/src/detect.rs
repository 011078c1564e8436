//! Locating the first significant rise of the ACDF: kernel change-point
//! search with ANOVA validation, the iterative smallest-breakpoint loop
//! with its overshoot guard, gradient refinement, and two alternative
//! detectors (variance scan, threshold-certified binary search).

use crate::acdf::{decide_jump, AcdfCurve, JumpDecision};
use crate::specfun::f_distribution_cdf;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Signal for change-point analysis: samples `y` on ascending abscissas `x`.
#[derive(Debug, Clone)]
pub struct Signal {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Signal {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Signal> {
        if x.len() != y.len() {
            return Err(Error::Dimension(format!(
                "signal lengths differ: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        if x.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("abscissas must be ascending".into()));
        }
        Ok(Signal { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthPolicy {
    /// Median of pairwise |y_s - y_t|, floored at 1e-12.
    MedianHeuristic,
    Fixed(f64),
}

/// Minimizer of the two-segment Gaussian-kernel cost
/// `sum_seg (len - (1/len) sum_{s,t in seg} K(y_s, y_t))` over split points
/// `b` in `[min_seg, n - min_seg]`; ties break to the smallest `b`.
pub fn kernel_breakpoint(y: &[f64], bandwidth: BandwidthPolicy, min_seg: usize) -> Result<usize> {
    let n = y.len();
    if min_seg == 0 || n < 2 * min_seg {
        return Err(Error::Parameter(format!(
            "signal of length {n} too short for min_seg {min_seg}"
        )));
    }
    let h = match bandwidth {
        BandwidthPolicy::Fixed(h) => h.max(1e-12),
        BandwidthPolicy::MedianHeuristic => median_pairwise_distance(y).max(1e-12),
    };
    let inv_two_h_sq = 1.0 / (2.0 * h * h);

    // prefix block sums S_L(b) = sum_{s,t < b} K and the suffix analogue
    let mut left_block = vec![0.0f64; n + 1];
    for b in 1..=n {
        let mut cross = 0.0;
        let yb = y[b - 1];
        for t in 0..b - 1 {
            let d = yb - y[t];
            cross += (-d * d * inv_two_h_sq).exp();
        }
        left_block[b] = left_block[b - 1] + 2.0 * cross + 1.0;
    }
    let mut right_block = vec![0.0f64; n + 2];
    for b in (0..n).rev() {
        let mut cross = 0.0;
        let yb = y[b];
        for t in b + 1..n {
            let d = yb - y[t];
            cross += (-d * d * inv_two_h_sq).exp();
        }
        right_block[b] = right_block[b + 1] + 2.0 * cross + 1.0;
    }

    let mut best = min_seg;
    let mut best_cost = f64::INFINITY;
    for b in min_seg..=n - min_seg {
        let left = b as f64 - left_block[b] / b as f64;
        let right = (n - b) as f64 - right_block[b] / (n - b) as f64;
        let cost = left + right;
        if cost < best_cost {
            best_cost = cost;
            best = b;
        }
    }
    Ok(best)
}

fn median_pairwise_distance(y: &[f64]) -> f64 {
    let n = y.len();
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for s in 0..n {
        for t in s + 1..n {
            dists.push((y[s] - y[t]).abs());
        }
    }
    if dists.is_empty() {
        return 0.0;
    }
    let mid = (dists.len() - 1) / 2;
    *dists
        .select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap())
        .1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnovaOrientation {
    /// `f = (n-2)(SS_w - SS_b)/SS_b`: explained over residual scatter, the
    /// usual one-way layout. A perfect step is maximally significant.
    Standard,
    /// `f = (n-2) SS_b / SS_w` exactly as printed in the source scheme.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaOutcome {
    pub significant: bool,
    pub f: f64,
    pub p: f64,
}

/// Two-segment ANOVA acceptance: F-test at level `alpha` plus the
/// monotone-increase gate (the right segment mean must exceed the left).
pub fn anova_validate(
    y: &[f64],
    b: usize,
    alpha: f64,
    orientation: AnovaOrientation,
) -> Result<AnovaOutcome> {
    let n = y.len();
    if b < 1 || b > n - 1 {
        return Err(Error::Parameter(format!(
            "breakpoint {b} leaves an empty segment (n = {n})"
        )));
    }
    if n < 3 {
        return Err(Error::Parameter("signal too short for the F-test".into()));
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let mean0 = y[..b].iter().sum::<f64>() / b as f64;
    let mean1 = y[b..].iter().sum::<f64>() / (n - b) as f64;
    let ss_w: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_b: f64 = y[..b].iter().map(|v| (v - mean0).powi(2)).sum::<f64>()
        + y[b..].iter().map(|v| (v - mean1).powi(2)).sum::<f64>();

    let dof = (n - 2) as f64;
    let f = match orientation {
        AnovaOrientation::Standard => {
            if ss_w <= 0.0 {
                0.0
            } else if ss_b <= 0.0 {
                f64::INFINITY
            } else {
                dof * (ss_w - ss_b).max(0.0) / ss_b
            }
        }
        AnovaOrientation::AsPrinted => {
            if ss_w <= 0.0 {
                0.0
            } else {
                dof * ss_b / ss_w
            }
        }
    };
    let p = f_distribution_cdf(f, 1, (n - 2) as u32);
    let significant = p > 1.0 - alpha && mean1 > mean0;
    Ok(AnovaOutcome { significant, f, p })
}

/// Overshoot guard: the search stops once the mean of the `l` points left
/// of the accepted breakpoint drops below `k * sigma + eps_tilde`, i.e. the
/// left side is indistinguishable from the empirical noise floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardParams {
    pub enabled: bool,
    pub k: f64,
    pub l: usize,
    pub sigma: f64,
    pub eps_tilde: f64,
}

impl GuardParams {
    pub fn new(k: f64, l: usize, sigma: f64, eps_tilde: f64) -> GuardParams {
        GuardParams {
            enabled: true,
            k,
            l,
            sigma,
            eps_tilde,
        }
    }

    pub fn disabled() -> GuardParams {
        GuardParams {
            enabled: false,
            k: 0.0,
            l: 0,
            sigma: 0.0,
            eps_tilde: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub candidate: usize,
    pub f: f64,
    pub p: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct RuptureParams {
    pub alpha: f64,
    pub orientation: AnovaOrientation,
    pub bandwidth: BandwidthPolicy,
    pub min_seg: usize,
    pub guard: GuardParams,
    /// Acceptance floor for the second segment: reject a candidate whose
    /// 25th-percentile right-segment value is not above
    /// `floor_s * sigma`. Zero disables the check.
    pub floor_s: f64,
    pub floor_sigma: f64,
}

impl Default for RuptureParams {
    fn default() -> Self {
        RuptureParams {
            alpha: 0.01,
            orientation: AnovaOrientation::Standard,
            bandwidth: BandwidthPolicy::MedianHeuristic,
            min_seg: 2,
            guard: GuardParams::disabled(),
            floor_s: 0.0,
            floor_sigma: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BreakpointSearch {
    /// Last accepted breakpoint; `n` when the first candidate was rejected.
    pub breakpoint: usize,
    pub trace: Vec<TraceEntry>,
    pub stopped_by_guard: bool,
}

/// Iterative smallest-breakpoint search: find the kernel breakpoint of the
/// current prefix, validate that split of the prefix with ANOVA, accept and
/// shrink while significant. The guard and the second-segment floor stop
/// the walk early.
pub fn find_smallest_breakpoint(y: &[f64], params: &RuptureParams) -> Result<BreakpointSearch> {
    let n = y.len();
    if n < 2 * params.min_seg {
        return Err(Error::Parameter("signal too short for one validation".into()));
    }
    let mut b = n;
    let mut trace = Vec::new();
    let mut stopped_by_guard = false;
    loop {
        let prefix = &y[..b];
        if prefix.len() < 2 * params.min_seg || prefix.len() < 3 {
            break;
        }
        let candidate = kernel_breakpoint(prefix, params.bandwidth, params.min_seg)?;
        let outcome = anova_validate(prefix, candidate, params.alpha, params.orientation)?;
        let mut accepted = outcome.significant;
        if accepted && params.floor_s > 0.0 {
            let floor = params.floor_s * params.floor_sigma;
            accepted = lower_quartile(&prefix[candidate..]) > floor;
        }
        trace.push(TraceEntry {
            candidate,
            f: outcome.f,
            p: outcome.p,
            accepted,
        });
        if !accepted {
            break;
        }
        b = candidate;
        if params.guard.enabled {
            let lo = b.saturating_sub(params.guard.l);
            if b > lo {
                let window_mean = y[lo..b].iter().sum::<f64>() / (b - lo) as f64;
                if window_mean < params.guard.k * params.guard.sigma + params.guard.eps_tilde {
                    stopped_by_guard = true;
                    break;
                }
            }
        }
    }
    Ok(BreakpointSearch {
        breakpoint: b,
        trace,
        stopped_by_guard,
    })
}

fn lower_quartile(seg: &[f64]) -> f64 {
    let mut v = seg.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((v.len() as f64 * 0.25).ceil() as usize).saturating_sub(1);
    v[idx.min(v.len() - 1)]
}

/// Empirical noise floor of a curve over `[-pi, -pi/2)`:
/// `(standard deviation, mean |G|)`.
pub fn noise_floor(curve: &AcdfCurve) -> Result<(f64, f64)> {
    noise_floor_between(curve, -PI, -FRAC_PI_2)
}

/// Noise floor over an arbitrary window `[lo, hi)`.
pub fn noise_floor_between(curve: &AcdfCurve, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let vals: Vec<f64> = curve
        .grid
        .iter()
        .zip(curve.g_values.iter())
        .filter(|(x, _)| **x >= lo && **x < hi)
        .map(|(_, g)| *g)
        .collect();
    if vals.is_empty() {
        return Err(Error::Parameter(format!(
            "noise window [{lo}, {hi}) contains no grid points"
        )));
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let eps_tilde = vals.iter().map(|v| v.abs()).sum::<f64>() / n;
    Ok((var.sqrt(), eps_tilde))
}

/// Argmax of the curve gradient inside `[x0 - half_window, x0 + half_window]`;
/// ties break to the smallest abscissa.
pub fn refine_energy(curve: &AcdfCurve, inflection_x: f64, half_window: f64) -> Result<f64> {
    let mut best_x = f64::NAN;
    let mut best_g = f64::NEG_INFINITY;
    for (x, g) in curve.grid.iter().zip(curve.grad_values.iter()) {
        if (x - inflection_x).abs() <= half_window && *g > best_g {
            best_g = *g;
            best_x = *x;
        }
    }
    if best_x.is_nan() {
        return Err(Error::Parameter(format!(
            "refinement window around {inflection_x} misses the grid"
        )));
    }
    Ok(best_x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceScanParams {
    /// Threshold multiplier on the empirical sigma.
    pub s: f64,
    /// Window length.
    pub window_l: usize,
    /// Fraction of window points that must clear the threshold.
    pub fraction_x: f64,
    /// Leading points used to estimate sigma.
    pub leading: usize,
}

impl Default for VarianceScanParams {
    fn default() -> Self {
        VarianceScanParams {
            s: 3.0,
            window_l: 40,
            fraction_x: 0.8,
            leading: 50,
        }
    }
}

/// First index whose window `[i, i + L)` has at least `fraction_x` of its
/// points above `s * sigma`, with sigma estimated from the leading segment.
/// `None` when no window qualifies.
pub fn variance_scan(y: &[f64], params: &VarianceScanParams) -> Result<Option<usize>> {
    let n = y.len();
    if params.leading < 2 || params.leading > n {
        return Err(Error::Parameter(format!(
            "variance scan needs 2 <= leading <= {n}"
        )));
    }
    if params.window_l == 0 || params.window_l > n {
        return Err(Error::Parameter("window length out of range".into()));
    }
    let lead = &y[..params.leading];
    let mean = lead.iter().sum::<f64>() / lead.len() as f64;
    let sigma = (lead.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / lead.len() as f64).sqrt();
    let threshold = params.s * sigma;
    let need = (params.fraction_x * params.window_l as f64).ceil() as usize;
    for i in 0..=n - params.window_l {
        let above = y[i..i + params.window_l]
            .iter()
            .filter(|v| **v > threshold)
            .count();
        if above >= need {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Binary search certified by the eta-threshold decision rule. The
/// evaluator must return a fresh `G(x)` estimate per query.
pub fn certified_search<F>(
    mut evaluate: F,
    eta: f64,
    epsilon: f64,
    x_lo: f64,
    x_hi: f64,
    delta: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(eta > 2.0 * epsilon) {
        return Err(Error::Parameter(format!(
            "certified search requires eta > 2 epsilon (eta={eta}, epsilon={epsilon})"
        )));
    }
    if !(delta > 0.0) || x_lo >= x_hi {
        return Err(Error::Parameter("bad search interval".into()));
    }
    let mut lo = x_lo;
    let mut hi = x_hi;
    while hi - lo > 2.0 * delta {
        let mid = 0.5 * (lo + hi);
        match decide_jump(evaluate(mid)?, eta, epsilon)? {
            JumpDecision::BelowEta => lo = mid - delta,
            JumpDecision::AboveZero => hi = mid + delta,
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionMethod {
    Rupture,
    VarianceScan,
    CertifiedSearch,
}

/// Full detection output, serializable with its acceptance trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionResult {
    pub method: DetectionMethod,
    pub breakpoint_index: usize,
    pub inflection_x: f64,
    pub refined_energy: f64,
    pub sigma_empirical: f64,
    pub noise_floor: f64,
    pub trace: Vec<TraceEntry>,
}

/// Options for the curve-level rupture pipeline.
#[derive(Debug, Clone)]
pub struct RuptureOptions {
    pub alpha: f64,
    pub orientation: AnovaOrientation,
    pub guard_enabled: bool,
    pub guard_k: f64,
    pub guard_l: usize,
    pub min_seg: usize,
    /// Acceptance floor multiplier for the second segment (0 disables).
    pub floor_s: f64,
    /// Left edge of the breakpoint search window.
    pub search_lo: f64,
    /// Maximum number of detection points; the curve is stride-decimated
    /// down to this budget before the O(n^2) kernel search.
    pub max_points: usize,
    /// Refinement half-window.
    pub half_window: f64,
    /// Noise-floor estimation window.
    pub noise_lo: f64,
    pub noise_hi: f64,
}

impl RuptureOptions {
    pub fn new(half_window: f64) -> RuptureOptions {
        RuptureOptions {
            alpha: 0.01,
            orientation: AnovaOrientation::Standard,
            guard_enabled: true,
            guard_k: 2.0,
            guard_l: 20,
            min_seg: 2,
            floor_s: 1.0,
            search_lo: -FRAC_PI_2,
            max_points: 2048,
            half_window,
            noise_lo: -PI,
            noise_hi: -FRAC_PI_2,
        }
    }
}

/// Run the whole rupture pipeline on a curve: noise floor, stride-decimated
/// breakpoint walk over the search window, gradient refinement on the full
/// grid.
pub fn rupture_pipeline(curve: &AcdfCurve, opts: &RuptureOptions) -> Result<DetectionResult> {
    let (sigma, eps_tilde) = noise_floor_between(curve, opts.noise_lo, opts.noise_hi)?;

    let sel: Vec<usize> = (0..curve.grid.len())
        .filter(|&i| curve.grid[i] >= opts.search_lo)
        .collect();
    if sel.len() < 2 * opts.min_seg {
        return Err(Error::Detection("search window too small".into()));
    }
    let stride = sel.len().div_ceil(opts.max_points).max(1);
    let picked: Vec<usize> = sel.iter().copied().step_by(stride).collect();
    let ys: Vec<f64> = picked.iter().map(|&i| curve.g_values[i]).collect();

    let params = RuptureParams {
        alpha: opts.alpha,
        orientation: opts.orientation,
        bandwidth: BandwidthPolicy::MedianHeuristic,
        min_seg: opts.min_seg,
        guard: if opts.guard_enabled {
            GuardParams::new(opts.guard_k, opts.guard_l, sigma, eps_tilde)
        } else {
            GuardParams::disabled()
        },
        floor_s: opts.floor_s,
        floor_sigma: sigma,
    };
    let search = find_smallest_breakpoint(&ys, &params)?;

    let (breakpoint_index, inflection_x) = if search.breakpoint >= ys.len() {
        (curve.grid.len(), *curve.grid.last().unwrap())
    } else {
        let idx = picked[search.breakpoint];
        (idx, curve.grid[idx])
    };
    let refined_energy = refine_energy(curve, inflection_x, opts.half_window)?;
    Ok(DetectionResult {
        method: DetectionMethod::Rupture,
        breakpoint_index,
        inflection_x,
        refined_energy,
        sigma_empirical: sigma,
        noise_floor: eps_tilde,
        trace: search.trace,
    })
}
