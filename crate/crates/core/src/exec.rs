//! Execution-mode switch for the data-parallel inner loops.
//!
//! Results are bitwise identical in both modes: parallelism is only ever
//! applied across independent outputs (grid points, moments, repetitions),
//! never across the terms of one floating-point reduction.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl ExecMode {
    /// Parallel when the `parallel` feature is enabled, sequential otherwise.
    pub fn auto() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Map `0..n` through `f`, in order.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: usize| (i as f64).sqrt() * 1.000000001_f64.powi(i as i32);
        let seq = map_indexed(ExecMode::Sequential, 1000, f);
        let par = map_indexed(ExecMode::Parallel, 1000, f);
        assert_eq!(seq, par);
    }
}
