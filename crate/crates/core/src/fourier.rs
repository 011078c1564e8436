//! Fourier-series approximation of the periodic step function: scale
//! selection, coefficient magnitudes, series evaluation and importance
//! sampling of coefficient indices.

use crate::specfun::{bessel_i_scaled_many, harmonic, lambert_w0, HarmonicMode};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use std::f64::consts::PI;
use std::io::Write;

/// Truncated odd-sine series for the smoothed step. Only coefficient
/// magnitudes are stored; the fixed phases are folded into the sin/cos form
/// of the estimator.
#[derive(Debug, Clone)]
pub struct FourierSeries {
    pub beta: f64,
    /// Truncation: coefficients cover odd frequencies `2k + 1`, `k = 0..=d`.
    pub d: usize,
    /// `|F_{2k+1}|` for `k = 0..=d`.
    pub coeff_mags: Vec<f64>,
    /// Normalization `sum_k |F_{2k+1}|`.
    pub norm_f: f64,
}

impl FourierSeries {
    /// Constant term of the series.
    pub const F0: f64 = 0.5;

    /// Largest odd frequency `D = 2d + 1`.
    pub fn max_frequency(&self) -> u64 {
        2 * self.d as u64 + 1
    }

    /// CSV export: header comment with the series parameters, then
    /// `k, j, coeff_mag` rows.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(
            w,
            "# beta={} d={} D={} norm_f={}",
            self.beta,
            self.d,
            self.max_frequency(),
            self.norm_f
        )?;
        writeln!(w, "k,j,coeff_mag")?;
        for (k, c) in self.coeff_mags.iter().enumerate() {
            writeln!(w, "{},{},{}", k, 2 * k + 1, c)?;
        }
        Ok(())
    }
}

/// Smoothing scale for transition half-width `delta` and tolerance
/// `epsilon`: `beta = max(1, W0(2/(pi eps^2)) / (4 sin^2 delta))`.
pub fn select_beta(delta: f64, epsilon: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < PI / 6.0) {
        return Err(Error::Domain(format!(
            "select_beta requires 0 < delta < pi/6, got {delta}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!(
            "select_beta requires 0 < epsilon < 1, got {epsilon}"
        )));
    }
    let w = lambert_w0(2.0 / (PI * epsilon * epsilon))?;
    let s = delta.sin();
    Ok((w / (4.0 * s * s)).max(1.0))
}

/// Coefficient magnitudes for the truncated series:
/// `|F_{2k+1}| = sqrt(beta/2pi) e^{-beta} (I_k + I_{k+1})/(2k+1)` for
/// `k < d`, with the tail entry `sqrt(beta/2pi) e^{-beta} I_d/(2d+1)`.
pub fn coefficients(beta: f64, d: usize) -> Result<FourierSeries> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    let scaled = bessel_i_scaled_many(d as u32 + 1, beta)?;
    let prefactor = (beta / (2.0 * PI)).sqrt();
    let mut coeff_mags = Vec::with_capacity(d + 1);
    for k in 0..d {
        coeff_mags.push(prefactor * (scaled[k] + scaled[k + 1]) / (2 * k + 1) as f64);
    }
    coeff_mags.push(prefactor * scaled[d] / (2 * d + 1) as f64);
    let norm_f = coeff_mags.iter().sum();
    Ok(FourierSeries {
        beta,
        d,
        coeff_mags,
        norm_f,
    })
}

/// Series value `1/2 + 2 sum_k |F_{2k+1}| sin((2k+1) x)` — the smoothed
/// periodic step itself.
pub fn evaluate_series(fs: &FourierSeries, x: f64) -> f64 {
    let mut acc = 0.0;
    for (k, c) in fs.coeff_mags.iter().enumerate() {
        acc += c * ((2 * k + 1) as f64 * x).sin();
    }
    FourierSeries::F0 + 2.0 * acc
}

/// Alias-table sampler over coefficient indices `k ~ |F_{2k+1}| / norm_f`.
pub struct IndexSampler {
    alias: WeightedAliasIndex<f64>,
}

impl IndexSampler {
    pub fn new(fs: &FourierSeries) -> Result<IndexSampler> {
        if !(fs.norm_f > 0.0) {
            return Err(Error::Domain("series has zero norm".into()));
        }
        let alias = WeightedAliasIndex::new(fs.coeff_mags.clone())
            .map_err(|e| Error::Domain(format!("alias table: {e}")))?;
        Ok(IndexSampler { alias })
    }
}

/// One index draw from the caller's stream.
pub fn sample_index<R: Rng>(sampler: &IndexSampler, rng: &mut R) -> usize {
    sampler.alias.sample(rng)
}

/// Harmonic-number bound on the coefficient norm (used as a sanity
/// invariant; the true sum is always below it).
pub fn norm_bound_harmonic(d: usize) -> f64 {
    2.07 / (2.0 * PI) * (harmonic(2 * d as u64 + 1, HarmonicMode::Exact) + 2.0 * 2f64.ln()) + 0.5
}
