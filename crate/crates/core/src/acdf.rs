//! Monte Carlo construction of the approximate CDF `G(x)` and its
//! derivative.
//!
//! A batch holds `M` sampled coefficient indices with either exact moment
//! values (infinite-statistics studies) or one Hadamard shot pair each. The
//! curve is the importance-sampled average
//! `G(x) = 1/2 + (2 F / M) sum_i [re_i sin(j_i x) + im_i cos(j_i x)]`.

use crate::evolution::{hadamard_shot_at, MomentSet};
use crate::exec::{map_indexed, ExecMode};
use crate::fourier::{sample_index, FourierSeries, IndexSampler};
use crate::rng::{domain, SeedScheme};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// Store the exact moment components for each sampled index.
    ExactMoment,
    /// One Hadamard shot pair (+-1 outcomes) per sampled index.
    SingleShot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchEntry {
    pub k: usize,
    pub re_obs: f64,
    pub im_obs: f64,
}

#[derive(Debug, Clone)]
pub struct AcdfSampleBatch {
    pub entries: Vec<BatchEntry>,
    pub mode: SampleMode,
    pub seed: u64,
}

/// Draw `m` coefficient indices and attach observations. Index draws come
/// from the batch stream; in single-shot mode each entry consumes one
/// counter-addressed shot (stream id = moment index, counter = occurrence).
pub fn draw_batch(
    fs: &FourierSeries,
    moments: &MomentSet,
    m: usize,
    mode: SampleMode,
    seed: u64,
) -> Result<AcdfSampleBatch> {
    if m == 0 {
        return Err(Error::Parameter("batch size must be >= 1".into()));
    }
    if moments.max_j() < fs.max_frequency() {
        return Err(Error::Parameter(format!(
            "moment set covers j <= {}, series needs {}",
            moments.max_j(),
            fs.max_frequency()
        )));
    }
    let scheme = SeedScheme::new(seed);
    let sampler = IndexSampler::new(fs)?;
    let mut index_rng = scheme.stream(domain::BATCH_INDEX, 0);
    let mut occurrence = vec![0u64; fs.d + 1];
    let mut entries = Vec::with_capacity(m);
    for _ in 0..m {
        let k = sample_index(&sampler, &mut index_rng);
        let j = 2 * k as u64 + 1;
        let g = moments
            .moment(j as i64)
            .ok_or_else(|| Error::Parameter(format!("missing moment j={j}")))?;
        let (re_obs, im_obs) = match mode {
            SampleMode::ExactMoment => (g.re, g.im),
            SampleMode::SingleShot => {
                let shot = hadamard_shot_at(&scheme, j, occurrence[k], g)?;
                occurrence[k] += 1;
                (shot.x_outcome as f64, shot.y_outcome as f64)
            }
        };
        entries.push(BatchEntry { k, re_obs, im_obs });
    }
    Ok(AcdfSampleBatch {
        entries,
        mode,
        seed,
    })
}

/// Evaluated curve on a uniform grid.
#[derive(Debug, Clone)]
pub struct AcdfCurve {
    pub grid: Vec<f64>,
    pub g_values: Vec<f64>,
    pub grad_values: Vec<f64>,
    pub norm_f: f64,
    pub m_samples: usize,
}

impl AcdfCurve {
    pub fn spacing(&self) -> f64 {
        if self.grid.len() > 1 {
            self.grid[1] - self.grid[0]
        } else {
            0.0
        }
    }

    /// CSV export: `x, g, grad`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "x,g,grad")?;
        for i in 0..self.grid.len() {
            writeln!(w, "{},{},{}", self.grid[i], self.g_values[i], self.grad_values[i])?;
        }
        Ok(())
    }
}

/// Uniform grid over `[-pi, pi)` with spacing `min(delta/4, 2 pi / 4096)`.
pub fn default_grid(delta: f64) -> Vec<f64> {
    let spacing = (delta / 4.0).min(2.0 * PI / 4096.0);
    let n = (2.0 * PI / spacing).ceil() as usize;
    uniform_grid(n)
}

pub fn uniform_grid(n: usize) -> Vec<f64> {
    let step = 2.0 * PI / n as f64;
    (0..n).map(|i| -PI + i as f64 * step).collect()
}

/// Evaluate `G` and `G'` for one batch. Entries sharing an index are
/// accumulated first, so the per-point cost is `O(d)` while the value is
/// exactly the batch average.
pub fn evaluate_acdf(
    batch: &AcdfSampleBatch,
    fs: &FourierSeries,
    grid: &[f64],
) -> Result<AcdfCurve> {
    evaluate_acdf_with(ExecMode::auto(), batch, fs, grid)
}

pub fn evaluate_acdf_with(
    mode: ExecMode,
    batch: &AcdfSampleBatch,
    fs: &FourierSeries,
    grid: &[f64],
) -> Result<AcdfCurve> {
    if batch.entries.is_empty() {
        return Err(Error::Parameter("empty sample batch".into()));
    }
    let mut re_sum = vec![0.0f64; fs.d + 1];
    let mut im_sum = vec![0.0f64; fs.d + 1];
    for e in &batch.entries {
        if e.k > fs.d {
            return Err(Error::Parameter(format!("entry index {} out of range", e.k)));
        }
        re_sum[e.k] += e.re_obs;
        im_sum[e.k] += e.im_obs;
    }
    let m = batch.entries.len();
    let scale = 2.0 * fs.norm_f / m as f64;
    let curve = weighted_curve(mode, fs, grid, &re_sum, &im_sum, scale);
    Ok(AcdfCurve {
        grid: grid.to_vec(),
        g_values: curve.0,
        grad_values: curve.1,
        norm_f: fs.norm_f,
        m_samples: m,
    })
}

/// Deterministic ("infinite statistics") curve: every coefficient enters
/// with its exact weight and moment.
pub fn deterministic_curve(
    fs: &FourierSeries,
    moments: &MomentSet,
    grid: &[f64],
) -> Result<AcdfCurve> {
    deterministic_curve_with(ExecMode::auto(), fs, moments, grid)
}

pub fn deterministic_curve_with(
    mode: ExecMode,
    fs: &FourierSeries,
    moments: &MomentSet,
    grid: &[f64],
) -> Result<AcdfCurve> {
    if moments.max_j() < fs.max_frequency() {
        return Err(Error::Parameter(format!(
            "moment set covers j <= {}, series needs {}",
            moments.max_j(),
            fs.max_frequency()
        )));
    }
    let mut re = vec![0.0f64; fs.d + 1];
    let mut im = vec![0.0f64; fs.d + 1];
    for k in 0..=fs.d {
        let g = moments.moment(2 * k as i64 + 1).unwrap();
        re[k] = fs.coeff_mags[k] * g.re;
        im[k] = fs.coeff_mags[k] * g.im;
    }
    let curve = weighted_curve(mode, fs, grid, &re, &im, 2.0);
    Ok(AcdfCurve {
        grid: grid.to_vec(),
        g_values: curve.0,
        grad_values: curve.1,
        norm_f: fs.norm_f,
        m_samples: 0,
    })
}

fn weighted_curve(
    mode: ExecMode,
    fs: &FourierSeries,
    grid: &[f64],
    re: &[f64],
    im: &[f64],
    scale: f64,
) -> (Vec<f64>, Vec<f64>) {
    let d = fs.d;
    let pairs = map_indexed(mode, grid.len(), |i| {
        let x = grid[i];
        let mut g_acc = 0.0;
        let mut grad_acc = 0.0;
        for k in 0..=d {
            let j = (2 * k + 1) as f64;
            let (s, c) = (j * x).sin_cos();
            g_acc += re[k] * s + im[k] * c;
            grad_acc += j * (re[k] * c - im[k] * s);
        }
        (0.5 + scale * g_acc, scale * grad_acc)
    });
    let mut g = Vec::with_capacity(grid.len());
    let mut gr = Vec::with_capacity(grid.len());
    for (a, b) in pairs {
        g.push(a);
        gr.push(b);
    }
    (g, gr)
}

/// Pointwise mean and unbiased sample variance across curves at one grid
/// index.
pub fn estimator_stats(curves: &[AcdfCurve], grid_index: usize) -> Result<(f64, f64)> {
    if curves.len() < 2 {
        return Err(Error::Parameter("need at least two curves".into()));
    }
    let n = curves.len() as f64;
    let mean = curves.iter().map(|c| c.g_values[grid_index]).sum::<f64>() / n;
    let var = curves
        .iter()
        .map(|c| (c.g_values[grid_index] - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    Ok((mean, var))
}

/// Median of per-repetition means; even counts return the lower median.
pub fn median_of_means(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Parameter("median of an empty list".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(sorted[(sorted.len() - 1) / 2])
}

/// Pointwise median-of-means aggregation of repetition curves.
pub fn aggregate_curves(curves: &[AcdfCurve]) -> Result<AcdfCurve> {
    if curves.is_empty() {
        return Err(Error::Parameter("no curves to aggregate".into()));
    }
    let first = &curves[0];
    for c in curves {
        if c.grid.len() != first.grid.len() {
            return Err(Error::Dimension("curves have different grids".into()));
        }
    }
    let n = first.grid.len();
    let mut g_values = Vec::with_capacity(n);
    let mut grad_values = Vec::with_capacity(n);
    let mut buf = Vec::with_capacity(curves.len());
    for i in 0..n {
        buf.clear();
        buf.extend(curves.iter().map(|c| c.g_values[i]));
        g_values.push(median_of_means(&buf)?);
        buf.clear();
        buf.extend(curves.iter().map(|c| c.grad_values[i]));
        grad_values.push(median_of_means(&buf)?);
    }
    Ok(AcdfCurve {
        grid: first.grid.clone(),
        g_values,
        grad_values,
        norm_f: first.norm_f,
        m_samples: first.m_samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JumpDecision {
    /// `C(x - delta) < eta`: no resolvable accumulation below.
    BelowEta,
    /// `C(x + delta) > 0`: spectral mass certified below.
    AboveZero,
}

/// Threshold rule at `zeta = eta / 2`; values exactly at the threshold count
/// as `AboveZero`.
pub fn decide_jump(g_value: f64, eta: f64, epsilon: f64) -> Result<JumpDecision> {
    if !(eta > 2.0 * epsilon) {
        return Err(Error::Parameter(format!(
            "decide_jump requires eta > 2 epsilon (eta={eta}, epsilon={epsilon})"
        )));
    }
    Ok(if g_value < eta / 2.0 {
        JumpDecision::BelowEta
    } else {
        JumpDecision::AboveZero
    })
}
