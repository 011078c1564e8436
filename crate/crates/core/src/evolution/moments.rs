//! Fourier moments `g_j = <psi| e^{-i H tau j} |psi>`.

use super::measure::SpectralMeasure;
use super::trotter::trotter_step_2nd_inplace;
use crate::exec::{map_indexed, ExecMode};
use crate::hamiltonian::Hamiltonian;
use crate::resources;
use crate::states::StateVector;
use crate::{Error, Result};
use num_complex::Complex64;
use std::io::Write;

/// Moments for `j = 0` and the odd indices up to the truncation. Negative
/// indices follow from `g_{-j} = conj(g_j)`.
#[derive(Debug, Clone)]
pub struct MomentSet {
    /// `(j, g_j)` with `j` ascending, starting at 0 then odd.
    pub entries: Vec<(u64, Complex64)>,
}

impl MomentSet {
    pub fn moment(&self, j: i64) -> Option<Complex64> {
        let a = j.unsigned_abs();
        let g = self
            .entries
            .iter()
            .find(|(jj, _)| *jj == a)
            .map(|(_, g)| *g)?;
        Some(if j < 0 { g.conj() } else { g })
    }

    /// Largest stored odd index.
    pub fn max_j(&self) -> u64 {
        self.entries.last().map(|(j, _)| *j).unwrap_or(0)
    }
}

/// Exact moments from a spectral measure: `g_j = sum_k p_k e^{-i lambda_k j}`
/// for `j = 0` and odd `j <= 2d + 1`.
pub fn exact_moments(m: &SpectralMeasure, d: usize) -> MomentSet {
    let mut entries = Vec::with_capacity(d + 2);
    entries.push((0, moment_from_measure(m, 0)));
    for k in 0..=d {
        let j = 2 * k as u64 + 1;
        entries.push((j, moment_from_measure(m, j)));
    }
    MomentSet { entries }
}

fn moment_from_measure(m: &SpectralMeasure, j: u64) -> Complex64 {
    let mut g = Complex64::new(0.0, 0.0);
    for &(lam, p) in &m.points {
        g += Complex64::from_polar(p, -lam * j as f64);
    }
    g
}

/// Trotter step budgeting per moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepsPolicy {
    /// `r` steps per unit time tau: moment `j` uses `j * r` steps of size
    /// `tau / r`.
    PerUnit(u32),
    /// Steps chosen to keep the product-formula error below `epsilon` over
    /// the evolution time `tau * j`, with prefactor `c` and order `p`.
    ErrorBound { c: f64, p: u32, epsilon: f64 },
}

impl StepsPolicy {
    pub fn steps_for(&self, j: u64, tau: f64) -> u64 {
        match *self {
            StepsPolicy::PerUnit(r) => j * r as u64,
            StepsPolicy::ErrorBound { c, p, epsilon } => {
                resources::trotter_steps(c, p, tau, j, epsilon).max(1)
            }
        }
    }
}

/// Moments through the second-order Trotter backend. Each odd `j` evolves a
/// fresh copy of the state for `steps_for(j)` symmetric steps.
pub fn trotter_moments(
    h: &Hamiltonian,
    psi: &StateVector,
    j_values: &[u64],
    policy: StepsPolicy,
) -> Result<MomentSet> {
    trotter_moments_with(ExecMode::auto(), h, psi, j_values, policy)
}

pub fn trotter_moments_with(
    mode: ExecMode,
    h: &Hamiltonian,
    psi: &StateVector,
    j_values: &[u64],
    policy: StepsPolicy,
) -> Result<MomentSet> {
    for &j in j_values {
        if j == 0 || j % 2 == 0 {
            return Err(Error::Parameter(format!(
                "trotter moments are defined for odd j >= 1, got {j}"
            )));
        }
    }
    let mut js: Vec<u64> = j_values.to_vec();
    js.sort_unstable();
    js.dedup();

    let computed = map_indexed(mode, js.len(), |idx| {
        let j = js[idx];
        let steps = policy.steps_for(j, h.tau);
        let dt = h.tau * j as f64 / steps as f64;
        let mut amps = psi.amplitudes().to_vec();
        for _ in 0..steps {
            trotter_step_2nd_inplace(h, dt, &mut amps);
        }
        let mut g = Complex64::new(0.0, 0.0);
        for (a, b) in psi.amplitudes().iter().zip(amps.iter()) {
            g += a.conj() * b;
        }
        (j, g)
    });

    let mut entries = vec![(0u64, Complex64::new(1.0, 0.0))];
    entries.extend(computed);
    Ok(MomentSet { entries })
}

/// CSV export: `j, re_g, im_g, backend, r`.
pub fn write_moments_csv<W: Write>(
    w: &mut W,
    set: &MomentSet,
    backend: &str,
    r: u64,
) -> std::io::Result<()> {
    writeln!(w, "j,re_g,im_g,backend,r")?;
    for (j, g) in &set.entries {
        writeln!(w, "{},{},{},{},{}", j, g.re, g.im, backend, r)?;
    }
    Ok(())
}
