//! Closed-form resource estimation: maximal runtime, sample count, the
//! resolvable-jump inversion, Trotter step counts and reported circuit
//! depth.

use crate::fourier::select_beta;
use crate::specfun::lambert_w0;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};

/// Euler-Mascheroni constant as pinned by the resource formulas.
pub const EULER_MASCHERONI_FIXED: f64 = 0.57721567;

/// Maximal runtime (largest Fourier index) for approximation error
/// `epsilon` at transition half-width `delta`:
/// `D = 2 ceil(sqrt(f(beta, min[1, 4 e^{-w/2}]) w)) + 1` with
/// `w = W0(18/(pi eps^2))` and
/// `f(beta, e) = -(ln e + beta) / W0(-(1 + ln e / beta) / e1)`.
pub fn theorem1_d(epsilon: f64, delta: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!(
            "theorem1_d requires 0 < epsilon < 1, got {epsilon}"
        )));
    }
    let beta = select_beta(delta, epsilon)?;
    let w = lambert_w0(18.0 / (PI * epsilon * epsilon))?;
    let e2 = 4.0 * (-w / 2.0).exp();
    let t = if e2 >= 1.0 {
        // f(beta, 1) = beta since W0(-1/e) = -1
        beta
    } else {
        let ln_e2 = e2.ln();
        let arg = -(1.0 + ln_e2 / beta) / E;
        -(ln_e2 + beta) / lambert_w0(arg)?
    };
    Ok(2 * (t * w).sqrt().ceil() as u64 + 1)
}

/// Sample count guaranteeing resolution of an accumulation `eta` with
/// confidence `1 - vartheta`:
/// `M = ceil( 2 [ (2.07/pi (ln 4D + gamma) + 1) / (eta - 2 eps) ]^2
///            [ ln ln (1/(tau eps)) + ln (1/vartheta) ] )`.
pub fn theorem2_m(d: u64, eta: f64, epsilon: f64, tau: f64, vartheta: f64) -> Result<u64> {
    if !(eta > 2.0 * epsilon) {
        return Err(Error::Parameter(format!(
            "theorem2_m requires eta > 2 epsilon (eta={eta}, epsilon={epsilon})"
        )));
    }
    if !(vartheta > 0.0 && vartheta < 1.0) {
        return Err(Error::Parameter(format!(
            "vartheta must lie in (0,1), got {vartheta}"
        )));
    }
    let log_term = log_log_term(tau, epsilon, vartheta)?;
    let norm_term = 2.07 / PI * ((4.0 * d as f64).ln() + EULER_MASCHERONI_FIXED) + 1.0;
    let ratio = norm_term / (eta - 2.0 * epsilon);
    Ok((2.0 * ratio * ratio * log_term).ceil() as u64)
}

fn log_log_term(tau: f64, epsilon: f64, vartheta: f64) -> Result<f64> {
    let te = tau * epsilon;
    if !(te > 0.0 && te < 1.0 / E) {
        return Err(Error::Parameter(format!(
            "theorem2 needs tau*epsilon < 1/e for a positive log-log term, got {te}"
        )));
    }
    Ok((1.0 / te).ln().ln() + (1.0 / vartheta).ln())
}

/// Closed-form inversion of `theorem2_m`: the jump size resolvable with `m`
/// samples.
pub fn resolvable_eta(m: u64, d: u64, epsilon: f64, tau: f64, vartheta: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::Parameter("m must be >= 1".into()));
    }
    let log_term = log_log_term(tau, epsilon, vartheta)?;
    let norm_term = 2.07 / PI * ((4.0 * d as f64).ln() + EULER_MASCHERONI_FIXED) + 1.0;
    Ok(2.0 * epsilon + norm_term * (2.0 * log_term / m as f64).sqrt())
}

/// Second-order-style product-formula step count over total time `tau * d`:
/// `r = ceil(C^{1/p} (tau d)^{1 + 1/p} eps^{-1/p})`.
pub fn trotter_steps(c: f64, p: u32, tau: f64, d: u64, epsilon: f64) -> u64 {
    assert!(c > 0.0 && p >= 1, "need c > 0 and p >= 1");
    let pf = p as f64;
    let total_time = tau * d as f64;
    (c.powf(1.0 / pf) * total_time.powf(1.0 + 1.0 / pf) * (1.0 / epsilon).powf(1.0 / pf)).ceil()
        as u64
}

/// Reported circuit depth `2 N r D`.
pub fn circuit_depth(n_sites: u64, r: u64, d: u64) -> u64 {
    2 * n_sites * r * d
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResourceInputs {
    pub epsilon: f64,
    pub delta: f64,
    pub eta: f64,
    pub vartheta: f64,
    pub tau: f64,
    pub trotter_prefactor: f64,
    pub trotter_order: u32,
    pub n_sites: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub d: u64,
    pub m: u64,
    pub r: u64,
    pub depth: u64,
    /// Depth with the control-reversal fast-forwarding factor of two.
    pub depth_fast_forwarded: u64,
    pub t_max: f64,
    pub inputs: ResourceInputs,
}

/// Full estimate from the scaled-precision inputs; `delta` is derived as
/// `tau * epsilon`.
pub fn estimate(
    epsilon: f64,
    eta: f64,
    vartheta: f64,
    tau: f64,
    trotter_prefactor: f64,
    trotter_order: u32,
    n_sites: u64,
) -> Result<ResourceEstimate> {
    let delta = tau * epsilon;
    let d = theorem1_d(epsilon, delta)?;
    let m = theorem2_m(d, eta, epsilon, tau, vartheta)?;
    let r = trotter_steps(trotter_prefactor, trotter_order, tau, d, epsilon);
    let depth = circuit_depth(n_sites, r, d);
    Ok(ResourceEstimate {
        d,
        m,
        r,
        depth,
        depth_fast_forwarded: depth / 2,
        t_max: tau * d as f64,
        inputs: ResourceInputs {
            epsilon,
            delta,
            eta,
            vartheta,
            tau,
            trotter_prefactor,
            trotter_order,
            n_sites,
        },
    })
}

/// CSV sweep `M, eta_resolvable` over a grid of sample counts.
pub fn write_eta_sweep_csv<W: std::io::Write>(
    w: &mut W,
    ms: &[u64],
    d: u64,
    epsilon: f64,
    tau: f64,
    vartheta: f64,
) -> Result<()> {
    writeln!(w, "M,eta_resolvable")?;
    for &m in ms {
        writeln!(w, "{},{}", m, resolvable_eta(m, d, epsilon, tau, vartheta)?)?;
    }
    Ok(())
}
