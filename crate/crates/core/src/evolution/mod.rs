//! Time evolution: exact eigendecomposition backend, spectral measures and
//! moments, second-order Trotter statevector backend, and Hadamard-test
//! shot sampling.

mod eigen;
mod hadamard;
mod measure;
mod moments;
mod trotter;

pub use eigen::{diagonalize, EigenDecomposition};
pub use hadamard::{hadamard_shot, hadamard_shot_at, ShotRecord};
pub use measure::{exact_cdf, spectral_measure, SpectralMeasure};
pub use moments::{exact_moments, trotter_moments, trotter_moments_with, write_moments_csv, MomentSet, StepsPolicy};
pub use trotter::{trotter_step_2nd, trotter_step_2nd_inplace};
