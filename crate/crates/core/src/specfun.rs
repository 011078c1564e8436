//! Scalar special functions backing the filter coefficients, the runtime and
//! sample-count formulas, and the ANOVA acceptance test.
//!
//! Everything is self-contained double precision: Halley iteration for the
//! Lambert-W principal branch, Miller's backward recurrence for scaled
//! modified Bessel values, series/continued-fraction error function, and the
//! regularized incomplete beta behind the F-distribution CDF.

use crate::{Error, Result};
use std::f64::consts::{E, FRAC_2_SQRT_PI, PI};

/// Euler–Mascheroni constant at full double precision.
pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

const W_BRANCH_POINT: f64 = -1.0 / E;

/// Principal branch of the Lambert-W function: returns `w >= -1` with
/// `w·e^w = x`, for `x >= -1/e`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if !x.is_finite() || x < W_BRANCH_POINT - 1e-15 {
        return Err(Error::Domain(format!(
            "lambert_w0 requires x >= -1/e, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let mut w = if x < W_BRANCH_POINT + 1e-3 {
        // branch-point expansion in p = sqrt(2(ex + 1))
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0
    } else if x < E {
        (1.0 + x).max(1e-300).ln().max(-0.99)
    } else {
        let l = x.ln();
        l - l.ln() + l.ln() / l
    };

    // Halley iteration with the residual tolerance fixed at 1e-12.
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= 1e-13 * x.abs().max(1.0) {
            break;
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if w < -1.0 {
            w = -1.0 + 1e-14;
        }
    }
    Ok(w.max(-1.0))
}

/// Exponentially scaled modified Bessel value `e^{-beta} I_n(beta)` by
/// Miller's backward recurrence, normalized against
/// `e^{-beta}(I_0 + 2 sum I_k) = 1`.
pub fn bessel_i_scaled(n: u32, beta: f64) -> Result<f64> {
    Ok(bessel_i_scaled_many(n, beta)?[n as usize])
}

/// Scaled values `e^{-beta} I_k(beta)` for all `k = 0..=n_max` in one
/// backward pass.
pub fn bessel_i_scaled_many(n_max: u32, beta: f64) -> Result<Vec<f64>> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!(
            "bessel_i_scaled requires beta > 0, got {beta}"
        )));
    }
    if n_max > 10_000_000 || beta > 1e9 {
        return Err(Error::Domain(
            "bessel_i_scaled supports n <= 1e7 and beta <= 1e9".into(),
        ));
    }
    let n_max = n_max as usize;
    // Start high enough that I_start / I_{n_max} is far below f64 epsilon.
    let nf = n_max as f64;
    let start = ((nf * nf + 90.0 * beta).sqrt().ceil() as usize).max(n_max + 1) + 40;

    let mut out = vec![0.0f64; n_max + 1];
    let mut above = 0.0f64; // v_{k+1}
    let mut here = 1e-280f64; // v_k, k = start
    let mut tail = 0.0f64; // 2 * sum of v_k over k >= 1, accumulated on the way down
    const RESCALE: f64 = 1e250;

    let mut k = start;
    while k > 0 {
        tail += 2.0 * here;
        let below = above + (2.0 * k as f64 / beta) * here;
        above = here;
        here = below;
        k -= 1;
        if k <= n_max {
            out[k] = here;
        }
        if here.abs() > RESCALE {
            above /= RESCALE;
            here /= RESCALE;
            tail /= RESCALE;
            for v in &mut out {
                *v /= RESCALE;
            }
        }
    }
    let norm = here + tail; // v_0 + 2 sum_{k>=1} v_k  =  e^{beta} in v-units
    for v in &mut out {
        *v /= norm;
    }
    Ok(out)
}

/// Error function, odd by construction, |erf| <= 1.
pub fn erf(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= 3.0 {
        erf_series(ax)
    } else {
        1.0 - erfc_cf(ax)
    };
    let v = v.min(1.0);
    if x < 0.0 {
        -v
    } else {
        v
    }
}

fn erf_series(x: f64) -> f64 {
    // 2/sqrt(pi) * sum (-1)^k x^{2k+1} / (k! (2k+1))
    let mut term = x;
    let mut sum = x;
    for k in 1..200 {
        term *= -x * x / k as f64;
        let add = term / (2.0 * k as f64 + 1.0);
        sum += add;
        if add.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

fn erfc_cf(x: f64) -> f64 {
    // erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    const TINY: f64 = 1e-300;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / x;
    let mut h = d;
    for i in 1..300 {
        let a = i as f64 / 2.0;
        d = 1.0 / (x + a * d);
        c = x + a / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-(x * x)).exp() / PI.sqrt() * h
}

/// ln of the Gamma function (Lanczos approximation), for z > 0.
pub fn ln_gamma(z: f64) -> f64 {
    const COEF: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut sum = 1.000000000190015;
    for (i, c) in COEF.iter().enumerate() {
        sum += c / (z + i as f64 + 1.0);
    }
    let tmp = z + 5.5;
    (z + 0.5) * tmp.ln() - tmp + (2.5066282746310005 * sum / z).ln()
}

/// Regularized incomplete beta I_x(a, b), continued fraction with the
/// standard symmetry switch.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..400 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    h
}

/// CDF of the F(d1, d2) distribution at `f`.
pub fn f_distribution_cdf(f: f64, d1: u32, d2: u32) -> f64 {
    assert!(d1 >= 1 && d2 >= 1, "degrees of freedom must be >= 1");
    if f <= 0.0 {
        return 0.0;
    }
    if f.is_infinite() {
        return 1.0;
    }
    let d1 = d1 as f64;
    let d2 = d2 as f64;
    let x = d1 * f / (d1 * f + d2);
    regularized_incomplete_beta(d1 / 2.0, d2 / 2.0, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarmonicMode {
    Exact,
    Asymptotic,
}

/// Harmonic number H_n, either by direct summation or through the
/// Euler-Maclaurin expansion around `ln n + gamma`.
pub fn harmonic(n: u64, mode: HarmonicMode) -> f64 {
    assert!(n >= 1, "harmonic requires n >= 1");
    match mode {
        // smallest terms first
        HarmonicMode::Exact => (1..=n).rev().map(|k| 1.0 / k as f64).sum(),
        HarmonicMode::Asymptotic => {
            let nf = n as f64;
            nf.ln() + EULER_MASCHERONI + 1.0 / (2.0 * nf) - 1.0 / (12.0 * nf * nf)
                + 1.0 / (120.0 * nf.powi(4))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // -- independent oracles -------------------------------------------------

    /// Bisection oracle for W0 on the monotone branch, to 1e-14 residual.
    fn lambert_bisect(x: f64) -> f64 {
        let (mut lo, mut hi) = (-1.0f64, x.max(1.0) + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() > x {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Positive-term power series oracle for e^{-beta} I_n(beta); valid while
    /// intermediate terms stay inside f64 range (beta <= ~600).
    fn bessel_scaled_series(n: u32, beta: f64) -> f64 {
        let half = beta / 2.0;
        let mut term = 1.0f64;
        for k in 1..=n {
            term *= half / k as f64;
        }
        let mut sum = term;
        let mut k = 1.0f64;
        loop {
            term *= half * half / (k * (k + n as f64));
            sum += term;
            if term < 1e-20 * sum {
                break;
            }
            k += 1.0;
        }
        sum * (-beta).exp()
    }

    /// Adaptive Simpson quadrature.
    fn simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
        fn simple<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
            let m = 0.5 * (a + b);
            (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
        }
        fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let left = simple(f, a, m);
            let right = simple(f, m, b);
            if depth > 40 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                recurse(f, a, m, left, tol / 2.0, depth + 1)
                    + recurse(f, m, b, right, tol / 2.0, depth + 1)
            }
        }
        recurse(&f, a, b, simple(&f, a, b), tol, 0)
    }

    fn erf_quadrature(x: f64) -> f64 {
        FRAC_2_SQRT_PI * simpson(|t| (-t * t).exp(), 0.0, x, 1e-13)
    }

    /// Quadrature oracle for the F(d1, d2) CDF via its density.
    fn f_cdf_quadrature(f: f64, d1: u32, d2: u32) -> f64 {
        let (a, b) = (d1 as f64, d2 as f64);
        let ln_norm = ln_gamma((a + b) / 2.0) - ln_gamma(a / 2.0) - ln_gamma(b / 2.0)
            + (a / 2.0) * (a / b).ln();
        let density = move |t: f64| {
            if t <= 0.0 {
                0.0
            } else {
                (ln_norm + (a / 2.0 - 1.0) * t.ln()
                    - ((a + b) / 2.0) * (1.0 + a * t / b).ln())
                .exp()
            }
        };
        simpson(density, 0.0, f, 1e-12)
    }

    // -- lambert_w0 ----------------------------------------------------------

    #[test]
    fn lambert_trivial_points() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert_relative_eq!(lambert_w0(E).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn lambert_at_one_matches_oracle() {
        let oracle = lambert_bisect(1.0);
        let w = lambert_w0(1.0).unwrap();
        assert_relative_eq!(w, oracle, epsilon = 1e-12);
        // frozen from a 50-digit evaluation
        assert_relative_eq!(w, 0.567_143_290_409_783_8, epsilon = 1e-13);
    }

    #[test]
    fn lambert_residual_on_log_grid() {
        let lo: f64 = -1.0 / E + 1e-6;
        // dense sweep from just above the branch point to 1e6
        for i in 0..=400 {
            let t = i as f64 / 400.0;
            let x = if i < 80 {
                lo + (0.5 - lo) * (i as f64 / 80.0)
            } else {
                10f64.powf(-0.3 + (6.0 + 0.3) * t)
            };
            let w = lambert_w0(x).unwrap();
            let resid = (w * w.exp() - x).abs();
            assert!(
                resid <= 1e-12 * x.abs().max(1.0),
                "residual {resid} at x={x}"
            );
            assert!(w >= -1.0);
        }
    }

    #[test]
    fn lambert_rejects_below_branch() {
        assert!(lambert_w0(-0.4).is_err());
    }

    #[test]
    fn lambert_branch_point_value() {
        let w = lambert_w0(W_BRANCH_POINT).unwrap();
        assert_relative_eq!(w, -1.0, epsilon = 1e-6);
        assert!((w * w.exp() - W_BRANCH_POINT).abs() <= 1e-12);
    }

    // -- bessel --------------------------------------------------------------

    #[test]
    fn bessel_small_beta_limits() {
        assert_relative_eq!(bessel_i_scaled(0, 1e-12).unwrap(), 1.0, epsilon = 1e-10);
        assert!(bessel_i_scaled(1, 1e-12).unwrap() < 1e-11);
        assert!(bessel_i_scaled(3, 1e-12).unwrap() < 1e-11);
    }

    #[test]
    fn bessel_matches_series_oracle() {
        for &(n, beta) in &[(0u32, 1.0), (1, 1.0), (5, 100.0), (3, 0.5), (0, 19.13)] {
            let oracle = bessel_scaled_series(n, beta);
            let got = bessel_i_scaled(n, beta).unwrap();
            assert_relative_eq!(got, oracle, max_relative = 1e-11);
        }
        // frozen from a 50-digit series evaluation
        assert_relative_eq!(
            bessel_i_scaled(5, 100.0).unwrap(),
            0.035_229_468_707_741_78,
            max_relative = 1e-10
        );
    }

    #[test]
    fn bessel_scaled_recurrence() {
        // I_{n-1} - I_{n+1} = (2n/beta) I_n carries over to the scaled values
        for &beta in &[0.5, 1.0, 10.0, 100.0, 1000.0] {
            let v = bessel_i_scaled_many(51, beta).unwrap();
            for n in 1..=50usize {
                let lhs = v[n - 1] - v[n + 1];
                let rhs = 2.0 * n as f64 / beta * v[n];
                let scale = v[n - 1].abs().max(1e-300);
                assert!(
                    (lhs - rhs).abs() <= 1e-10 * scale,
                    "recurrence failed at n={n}, beta={beta}"
                );
            }
        }
    }

    #[test]
    fn bessel_rejects_nonpositive_beta() {
        assert!(bessel_i_scaled(0, 0.0).is_err());
        assert!(bessel_i_scaled(0, -1.0).is_err());
    }

    #[test]
    fn bessel_large_beta() {
        // e^{-beta} I_0(beta) ~ 1/sqrt(2 pi beta) for large beta
        let v = bessel_i_scaled(0, 1e6).unwrap();
        let asym = 1.0 / (2.0 * PI * 1e6).sqrt();
        assert_relative_eq!(v, asym, max_relative = 1e-3);
    }

    // -- erf -----------------------------------------------------------------

    #[test]
    fn erf_trivial_points() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(10.0) - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn erf_matches_quadrature_oracle() {
        for &x in &[0.1, 0.5, 1.0, 2.0, 2.9, 3.5, 4.0] {
            assert_relative_eq!(erf(x), erf_quadrature(x), epsilon = 1e-10);
        }
        // frozen from a 50-digit evaluation
        assert_relative_eq!(erf(1.0), 0.842_700_792_949_714_9, epsilon = 1e-12);
    }

    #[test]
    fn erf_is_odd_and_bounded() {
        for i in 0..100 {
            let x = -6.0 + 12.0 * i as f64 / 99.0;
            assert_eq!(erf(-x), -erf(x));
            assert!(erf(x).abs() <= 1.0);
        }
    }

    // -- F distribution -------------------------------------------------------

    #[test]
    fn f_cdf_trivial_points() {
        assert_eq!(f_distribution_cdf(0.0, 1, 10), 0.0);
        assert_eq!(f_distribution_cdf(f64::INFINITY, 1, 10), 1.0);
        assert!(f_distribution_cdf(1e12, 1, 10) > 0.999);
    }

    #[test]
    fn f_cdf_matches_quadrature_oracle() {
        let got = f_distribution_cdf(1.0, 1, 4);
        assert_relative_eq!(got, f_cdf_quadrature(1.0, 1, 4), epsilon = 1e-9);
        // frozen from a 50-digit evaluation
        assert_relative_eq!(got, 0.626_099_033_699_941_1, epsilon = 1e-9);
    }

    #[test]
    fn f_cdf_grid_against_oracle() {
        // 50 points across shapes, absolute error <= 1e-8
        let cases = [(1u32, 4u32), (1, 198), (3, 7), (10, 10), (2, 30)];
        for &(d1, d2) in &cases {
            for i in 1..=10 {
                let f = i as f64 * 0.5;
                let got = f_distribution_cdf(f, d1, d2);
                let want = f_cdf_quadrature(f, d1, d2);
                assert!(
                    (got - want).abs() <= 1e-8,
                    "|{got} - {want}| > 1e-8 at f={f}, d=({d1},{d2})"
                );
            }
        }
    }

    #[test]
    fn f_cdf_monotone_in_f() {
        let mut prev = -1.0;
        for i in 0..200 {
            let f = i as f64 * 0.1;
            let v = f_distribution_cdf(f, 3, 11);
            assert!(v >= prev);
            prev = v;
        }
    }

    // -- harmonic -------------------------------------------------------------

    #[test]
    fn harmonic_trivial_points() {
        assert_eq!(harmonic(1, HarmonicMode::Exact), 1.0);
        assert_eq!(harmonic(2, HarmonicMode::Exact), 1.5);
    }

    #[test]
    fn harmonic_asymptotic_matches_direct_sum() {
        let exact = harmonic(100, HarmonicMode::Exact);
        let asym = harmonic(100, HarmonicMode::Asymptotic);
        assert!((exact - asym).abs() <= 1e-9, "diff {}", (exact - asym).abs());
        // frozen from a 50-digit evaluation
        assert_relative_eq!(exact, 5.187_377_517_639_621, epsilon = 1e-12);
    }
}
