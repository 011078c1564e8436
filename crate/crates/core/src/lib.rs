//! Ground-state energy estimation through the spectral cumulative
//! distribution function.
//!
//! The crate simulates the full desk-scale pipeline: spin Hamiltonians as
//! weighted Pauli strings, exact and Trotterized time evolution, Fourier
//! moments estimated through Hadamard-test sampling, the Monte Carlo
//! approximate CDF, change-point detection of its first significant rise,
//! and the closed-form runtime/sample-count formulas.
//!
//! Everything is deterministic for a fixed root seed: randomness is split
//! into counter-addressed ChaCha streams so results do not depend on
//! execution order or thread count.

pub mod acdf;
pub mod detect;
pub mod evolution;
pub mod exec;
pub mod experiment;
pub mod fourier;
pub mod hamiltonian;
pub mod resources;
pub mod rng;
pub mod specfun;
pub mod states;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("infeasible request: {0}")]
    Infeasible(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("detection error: {0}")]
    Detection(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use acdf::{AcdfCurve, AcdfSampleBatch, SampleMode};
pub use detect::{DetectionResult, GuardParams, Signal};
pub use evolution::{EigenDecomposition, MomentSet, SpectralMeasure, StepsPolicy};
pub use fourier::FourierSeries;
pub use hamiltonian::{Hamiltonian, PauliTerm};
pub use resources::ResourceEstimate;
pub use states::StateVector;
