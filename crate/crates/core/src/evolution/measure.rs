//! Spectral measure of an initial state and its exact CDF.

use super::eigen::EigenDecomposition;
use crate::states::StateVector;
use crate::{Error, Result};
use num_complex::Complex64;

/// Weights `p_k = |<E_k|psi>|^2` over the ascending scaled eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    /// `(lambda_k, p_k)`, lambdas ascending.
    pub points: Vec<(f64, f64)>,
}

impl SpectralMeasure {
    pub fn total_weight(&self) -> f64 {
        self.points.iter().map(|(_, p)| p).sum()
    }

    /// Cumulative weight at and below the eigenvalue of index `k`,
    /// including the whole degenerate block containing it.
    pub fn cumulative_at(&self, k: usize) -> f64 {
        let lam = self.points[k].0;
        self.points
            .iter()
            .filter(|(l, _)| *l <= lam + 1e-12)
            .map(|(_, p)| p)
            .sum()
    }
}

pub fn spectral_measure(ed: &EigenDecomposition, psi: &StateVector) -> Result<SpectralMeasure> {
    let dim = ed.dim();
    if psi.dim() != dim {
        return Err(Error::Dimension(format!(
            "state dim {} does not match eigenbasis dim {}",
            psi.dim(),
            dim
        )));
    }
    let mut points = Vec::with_capacity(dim);
    for k in 0..dim {
        let col = ed.vectors.column(k);
        let mut inner = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            inner += col[i].conj() * psi.amplitudes()[i];
        }
        points.push((ed.lambdas[k], inner.norm_sqr()));
    }
    Ok(SpectralMeasure { points })
}

/// Right-continuous exact CDF: sum of weights with `lambda_k <= x`.
pub fn exact_cdf(m: &SpectralMeasure, x: f64) -> f64 {
    m.points
        .iter()
        .take_while(|(l, _)| *l <= x)
        .map(|(_, p)| p)
        .sum()
}
