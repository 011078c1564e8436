//! Hadamard-test shot sampling: one +-1 outcome pair per moment query.

use crate::rng::{domain, SeedScheme};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotRecord {
    pub j: u64,
    pub x_outcome: i8,
    pub y_outcome: i8,
}

/// Draw one (X, Y) outcome pair for the moment `g_j`:
/// `P[X = +1] = (1 + Re g)/2` and `P[Y = +1] = (1 + Im g)/2`, so
/// `E[X] = Re g` and `E[Y] = Im g`. X is drawn before Y.
pub fn hadamard_shot<R: Rng>(j: u64, g: Complex64, rng: &mut R) -> Result<ShotRecord> {
    if g.re.abs() > 1.0 + 1e-9 || g.im.abs() > 1.0 + 1e-9 {
        return Err(Error::Domain(format!(
            "moment components must lie in [-1, 1], got {g}"
        )));
    }
    let px = 0.5 * (1.0 + g.re.clamp(-1.0, 1.0));
    let py = 0.5 * (1.0 + g.im.clamp(-1.0, 1.0));
    let x_outcome = if rng.random::<f64>() < px { 1 } else { -1 };
    let y_outcome = if rng.random::<f64>() < py { 1 } else { -1 };
    Ok(ShotRecord {
        j,
        x_outcome,
        y_outcome,
    })
}

/// Counter-addressed shot: stream id is the moment index `j`, the counter is
/// this shot's occurrence number for that moment. Reproducible regardless of
/// the order shots are evaluated in.
pub fn hadamard_shot_at(
    scheme: &SeedScheme,
    j: u64,
    occurrence: u64,
    g: Complex64,
) -> Result<ShotRecord> {
    // two u64 draws per shot
    let mut rng = scheme.stream_at(domain::SHOT, j, occurrence * 2);
    hadamard_shot(j, g, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedScheme;

    #[test]
    fn deterministic_moment_gives_constant_outcomes() {
        let scheme = SeedScheme::new(3);
        for occ in 0..50 {
            let s = hadamard_shot_at(&scheme, 1, occ, Complex64::new(1.0, -1.0)).unwrap();
            assert_eq!(s.x_outcome, 1);
            assert_eq!(s.y_outcome, -1);
        }
    }

    #[test]
    fn zero_moment_is_a_fair_coin() {
        let scheme = SeedScheme::new(11);
        let n = 20_000u64;
        let mut pos = 0i64;
        for occ in 0..n {
            let s = hadamard_shot_at(&scheme, 3, occ, Complex64::new(0.0, 0.0)).unwrap();
            pos += (s.x_outcome == 1) as i64;
        }
        let phat = pos as f64 / n as f64;
        // 4-sigma binomial band around 1/2
        let band = 4.0 * (0.25f64 / n as f64).sqrt();
        assert!((phat - 0.5).abs() <= band, "phat = {phat}");
    }

    #[test]
    fn empirical_means_sit_in_binomial_bands() {
        let scheme = SeedScheme::new(5);
        let g = Complex64::new(0.6, 0.2);
        let n = 100_000u64;
        let (mut sx, mut sy) = (0i64, 0i64);
        for occ in 0..n {
            let s = hadamard_shot_at(&scheme, 7, occ, g).unwrap();
            sx += s.x_outcome as i64;
            sy += s.y_outcome as i64;
        }
        let mean_x = sx as f64 / n as f64;
        let mean_y = sy as f64 / n as f64;
        let band_x = 4.0 * ((1.0 - 0.36f64) / n as f64).sqrt();
        let band_y = 4.0 * ((1.0 - 0.04f64) / n as f64).sqrt();
        assert!((mean_x - 0.6).abs() <= band_x, "mean_x = {mean_x}");
        assert!((mean_y - 0.2).abs() <= band_y, "mean_y = {mean_y}");
    }

    #[test]
    fn rejects_out_of_range_moments() {
        let scheme = SeedScheme::new(1);
        assert!(hadamard_shot_at(&scheme, 1, 0, Complex64::new(1.5, 0.0)).is_err());
    }

    #[test]
    fn shots_are_order_independent() {
        let scheme = SeedScheme::new(77);
        let g = Complex64::new(0.3, -0.4);
        let forward: Vec<_> = (0..10)
            .map(|occ| hadamard_shot_at(&scheme, 5, occ, g).unwrap())
            .collect();
        let mut backward: Vec<_> = (0..10)
            .rev()
            .map(|occ| hadamard_shot_at(&scheme, 5, occ, g).unwrap())
            .collect();
        backward.reverse();
        assert_eq!(forward, backward);
    }
}
