//! Spin Hamiltonians as weighted Pauli strings, with the time normalization
//! tau that maps the spectrum into (-pi/2, pi/2).

use crate::rng::{domain, SeedScheme};
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    I,
    X,
    Y,
    Z,
}

impl Axis {
    pub fn to_char(self) -> char {
        match self {
            Axis::I => 'I',
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Axis> {
        match c {
            'I' => Ok(Axis::I),
            'X' => Ok(Axis::X),
            'Y' => Ok(Axis::Y),
            'Z' => Ok(Axis::Z),
            other => Err(Error::Parse(format!("unknown Pauli axis '{other}'"))),
        }
    }
}

/// One weighted Pauli string. Site `q` corresponds to bit `q` of the basis
/// index (least significant bit is site 0).
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub axes: Vec<Axis>,
}

impl PauliTerm {
    pub fn axes_string(&self) -> String {
        self.axes.iter().map(|a| a.to_char()).collect()
    }

    /// Bit mask of sites carrying X or Y (the basis-flipping part).
    pub fn x_mask(&self) -> usize {
        self.axes
            .iter()
            .enumerate()
            .filter(|(_, a)| matches!(a, Axis::X | Axis::Y))
            .fold(0, |m, (q, _)| m | (1 << q))
    }

    /// Bit mask of sites carrying Y or Z (the sign-contributing part).
    pub fn zy_mask(&self) -> usize {
        self.axes
            .iter()
            .enumerate()
            .filter(|(_, a)| matches!(a, Axis::Y | Axis::Z))
            .fold(0, |m, (q, _)| m | (1 << q))
    }

    pub fn y_count(&self) -> u32 {
        self.axes.iter().filter(|a| matches!(a, Axis::Y)).count() as u32
    }

    /// Action on a basis state: `P |b> = phase * |b ^ x_mask>`.
    pub fn apply_basis(&self, b: usize) -> (usize, Complex64) {
        let target = b ^ self.x_mask();
        let sign = if ((b & self.zy_mask()).count_ones() & 1) == 1 {
            -1.0
        } else {
            1.0
        };
        let phase = match self.y_count() % 4 {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        };
        (target, phase)
    }
}

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub n_sites: usize,
    pub terms: Vec<PauliTerm>,
    /// Time normalization: tau * norm_bound < pi/2.
    pub tau: f64,
    /// Upper bound on the spectral norm (coefficient 1-norm by default).
    pub norm_bound: f64,
}

/// How `normalize` bounds the spectral norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormBound {
    /// Sum of coefficient magnitudes; always an upper bound.
    OneNorm,
    /// Exact spectral norm from dense diagonalization (n_sites <= 12).
    Spectral,
}

pub const DEFAULT_MARGIN: f64 = 0.1;

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn coefficient_one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    /// Dense matrix of the *unscaled* operator.
    pub fn dense_matrix(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for term in &self.terms {
            for col in 0..dim {
                let (row, phase) = term.apply_basis(col);
                m[(row, col)] += phase * Complex64::new(term.coefficient, 0.0);
            }
        }
        m
    }

    /// Line-oriented text form: `n_sites tau norm_bound`, then one
    /// `coefficient axes` pair per term. Round-trips bit exactly.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.n_sites, self.tau, self.norm_bound);
        for t in &self.terms {
            s.push_str(&format!("{} {}\n", t.coefficient, t.axes_string()));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Hamiltonian> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty hamiltonian file".into()))?;
        let mut it = header.split_whitespace();
        let n_sites: usize = parse_field(it.next(), "n_sites")?;
        let tau: f64 = parse_field(it.next(), "tau")?;
        let norm_bound: f64 = parse_field(it.next(), "norm_bound")?;
        let mut terms = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let coefficient: f64 = parse_field(it.next(), "coefficient")?;
            let axes_str = it
                .next()
                .ok_or_else(|| Error::Parse("missing axes string".into()))?;
            if axes_str.len() != n_sites {
                return Err(Error::Parse(format!(
                    "axes string '{axes_str}' does not match n_sites={n_sites}"
                )));
            }
            let axes = axes_str
                .chars()
                .map(Axis::from_char)
                .collect::<Result<Vec<_>>>()?;
            terms.push(PauliTerm { coefficient, axes });
        }
        Ok(Hamiltonian {
            n_sites,
            terms,
            tau,
            norm_bound,
        })
    }
}

fn parse_field<T: std::str::FromStr>(s: Option<&str>, name: &str) -> Result<T> {
    s.ok_or_else(|| Error::Parse(format!("missing field {name}")))?
        .parse()
        .map_err(|_| Error::Parse(format!("invalid {name}")))
}

/// Fully connected Heisenberg model with seeded standard-normal couplings:
/// terms `(1/n) J_a^{ij} sigma_a^i sigma_a^j` for all i < j and a in x,y,z.
///
/// Couplings are drawn in the fixed order (i ascending, j ascending, axis
/// x, y, z) so the seed fully determines the coefficient list.
pub fn build_heisenberg_full(n: usize, seed: u64) -> Result<Hamiltonian> {
    if !(2..=26).contains(&n) {
        return Err(Error::Size(format!(
            "heisenberg model supports 2 <= n <= 26, got {n}"
        )));
    }
    let mut rng = SeedScheme::new(seed).stream(domain::COUPLINGS, 0);
    let mut terms = Vec::with_capacity(3 * n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            for axis in [Axis::X, Axis::Y, Axis::Z] {
                let coupling: f64 = StandardNormal.sample(&mut rng);
                let mut axes = vec![Axis::I; n];
                axes[i] = axis;
                axes[j] = axis;
                terms.push(PauliTerm {
                    coefficient: coupling / n as f64,
                    axes,
                });
            }
        }
    }
    let h = Hamiltonian {
        n_sites: n,
        terms,
        tau: 0.0,
        norm_bound: 0.0,
    };
    normalize(&h, DEFAULT_MARGIN)
}

/// Nearest-neighbour XXZ chain: `jx (XX + YY) + jz ZZ` per bond, on a ring
/// when `periodic` (the wrap bond is skipped for n = 2 where it would
/// duplicate the single existing bond).
pub fn build_xxz_chain(n: usize, jx: f64, jz: f64, periodic: bool) -> Result<Hamiltonian> {
    if n < 2 {
        return Err(Error::Size(format!("xxz chain needs n >= 2, got {n}")));
    }
    if n > 26 {
        return Err(Error::Size(format!("xxz chain supports n <= 26, got {n}")));
    }
    let mut bonds: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if periodic && n > 2 {
        bonds.push((0, n - 1));
    }
    let mut terms = Vec::with_capacity(3 * bonds.len());
    for (i, j) in bonds {
        for (axis, c) in [(Axis::X, jx), (Axis::Y, jx), (Axis::Z, jz)] {
            let mut axes = vec![Axis::I; n];
            axes[i] = axis;
            axes[j] = axis;
            terms.push(PauliTerm {
                coefficient: c,
                axes,
            });
        }
    }
    let h = Hamiltonian {
        n_sites: n,
        terms,
        tau: 0.0,
        norm_bound: 0.0,
    };
    normalize(&h, DEFAULT_MARGIN)
}

/// Recompute the norm bound (coefficient 1-norm) and set
/// `tau = pi / (2 * norm_bound * (1 + margin))`.
pub fn normalize(h: &Hamiltonian, margin: f64) -> Result<Hamiltonian> {
    normalize_with(h, margin, NormBound::OneNorm)
}

pub fn normalize_with(h: &Hamiltonian, margin: f64, kind: NormBound) -> Result<Hamiltonian> {
    if margin < 0.0 {
        return Err(Error::Parameter(format!("margin must be >= 0, got {margin}")));
    }
    let norm_bound = match kind {
        NormBound::OneNorm => h.coefficient_one_norm(),
        NormBound::Spectral => {
            if h.n_sites > 12 {
                return Err(Error::Size(
                    "exact spectral norm available only for n_sites <= 12".into(),
                ));
            }
            spectral_norm_dense(h)
        }
    };
    if !(norm_bound > 0.0) {
        return Err(Error::Parameter("hamiltonian has zero norm".into()));
    }
    let tau = FRAC_PI_2 / (norm_bound * (1.0 + margin));
    debug_assert!(tau * norm_bound <= FRAC_PI_2 * (1.0 + 1e-12));
    Ok(Hamiltonian {
        n_sites: h.n_sites,
        terms: h.terms.clone(),
        tau,
        norm_bound,
    })
}

fn spectral_norm_dense(h: &Hamiltonian) -> f64 {
    let m = h.dense_matrix();
    let dim = h.dim();
    let mut real = DMatrix::<f64>::zeros(dim, dim);
    let mut max_imag = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            real[(i, j)] = m[(i, j)].re;
            max_imag = max_imag.max(m[(i, j)].im.abs());
        }
    }
    if max_imag < 1e-12 {
        let eig = real.symmetric_eigen();
        eig.eigenvalues.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    } else {
        // Hermitian embedding [[A, -B], [B, A]] has the same spectrum, doubled.
        let emb = hermitian_embedding(&m);
        let eig = emb.symmetric_eigen();
        eig.eigenvalues.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

pub(crate) fn hermitian_embedding(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let dim = m.nrows();
    let mut emb = DMatrix::<f64>::zeros(2 * dim, 2 * dim);
    for i in 0..dim {
        for j in 0..dim {
            let v = m[(i, j)];
            emb[(i, j)] = v.re;
            emb[(i + dim, j + dim)] = v.re;
            emb[(i, j + dim)] = -v.im;
            emb[(i + dim, j)] = v.im;
        }
    }
    emb
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// Independent dense construction through explicit 2x2 Kronecker
    /// products (site 0 = least significant bit, so it is the *last* factor).
    fn kron_oracle(h: &Hamiltonian) -> DMatrix<Complex64> {
        let eye = DMatrix::<Complex64>::identity(2, 2);
        let pauli = |a: Axis| -> DMatrix<Complex64> {
            let c = |re: f64, im: f64| Complex64::new(re, im);
            match a {
                Axis::I => eye.clone(),
                Axis::X => DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
                Axis::Y => DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
                Axis::Z => DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
            }
        };
        let dim = h.dim();
        let mut total = DMatrix::<Complex64>::zeros(dim, dim);
        for term in &h.terms {
            let mut m = DMatrix::<Complex64>::identity(1, 1);
            for &a in term.axes.iter().rev() {
                m = m.kronecker(&pauli(a));
            }
            total += m * Complex64::new(term.coefficient, 0.0);
        }
        total
    }

    #[test]
    fn heisenberg_term_counts() {
        let h2 = build_heisenberg_full(2, 5).unwrap();
        assert_eq!(h2.terms.len(), 3);
        for t in &h2.terms {
            // prefactor 1/N = 1/2
            assert!(t.coefficient.abs() < 4.0);
        }
        let h4 = build_heisenberg_full(4, 5).unwrap();
        assert_eq!(h4.terms.len(), 18);
    }

    #[test]
    fn heisenberg_rejects_sizes() {
        assert!(build_heisenberg_full(1, 0).is_err());
        assert!(build_heisenberg_full(27, 0).is_err());
    }

    #[test]
    fn heisenberg_seed_determinism() {
        let a = build_heisenberg_full(5, 99).unwrap();
        let b = build_heisenberg_full(5, 99).unwrap();
        let ca: Vec<f64> = a.terms.iter().map(|t| t.coefficient).collect();
        let cb: Vec<f64> = b.terms.iter().map(|t| t.coefficient).collect();
        assert_eq!(ca, cb);
        let c = build_heisenberg_full(5, 100).unwrap();
        assert_ne!(
            ca,
            c.terms.iter().map(|t| t.coefficient).collect::<Vec<_>>()
        );
    }

    #[test]
    fn heisenberg_matches_kron_oracle() {
        let h = build_heisenberg_full(6, 3).unwrap();
        let dense = h.dense_matrix();
        let oracle = kron_oracle(&h);
        let diff = (&dense - &oracle).map(|c| c.norm()).max();
        assert!(diff < 1e-12, "max deviation {diff}");
    }

    #[test]
    fn xxz_term_counts() {
        let ring = build_xxz_chain(4, 1.0, -1.0, true).unwrap();
        assert_eq!(ring.terms.len(), 12);
        let open2 = build_xxz_chain(2, 1.0, -1.0, false).unwrap();
        assert_eq!(open2.terms.len(), 3);
    }

    #[test]
    fn xxz_spectrum_matches_dense_oracle() {
        let h = build_xxz_chain(4, 1.0, -1.0, true).unwrap();
        let dense = h.dense_matrix();
        let oracle = kron_oracle(&h);
        let diff = (&dense - &oracle).map(|c| c.norm()).max();
        assert!(diff < 1e-12);
        // exact-norm mode keeps the scaled spectrum inside (-pi/2, pi/2)
        let hx = normalize_with(&h, 0.0, NormBound::Spectral).unwrap();
        let real = dense.map(|c| c.re);
        let eig = real.symmetric_eigen();
        let max_abs = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(hx.tau * max_abs <= FRAC_PI_2 + 1e-12);
        assert_relative_eq!(hx.norm_bound, max_abs, epsilon = 1e-9);
    }

    #[test]
    fn normalize_single_term() {
        let h = Hamiltonian {
            n_sites: 1,
            terms: vec![PauliTerm {
                coefficient: 1.0,
                axes: vec![Axis::Z],
            }],
            tau: 0.0,
            norm_bound: 0.0,
        };
        let hn = normalize(&h, 0.0).unwrap();
        assert_relative_eq!(hn.tau, PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn normalize_invariant_holds() {
        for seed in 0..5 {
            let h = build_heisenberg_full(4, seed).unwrap();
            assert!(h.tau * h.norm_bound < FRAC_PI_2);
        }
    }

    #[test]
    fn hermiticity_and_triangle_bound() {
        for seed in [1u64, 2] {
            let h = build_heisenberg_full(5, seed).unwrap();
            let m = h.dense_matrix();
            let herm_dev = (&m - &m.adjoint()).map(|c| c.norm()).max();
            assert!(herm_dev < 1e-12);
            let spec = spectral_norm_dense(&h);
            assert!(h.coefficient_one_norm() >= spec - 1e-9);
        }
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let h = build_heisenberg_full(4, 11).unwrap();
        let text = h.to_text();
        let back = Hamiltonian::from_text(&text).unwrap();
        assert_eq!(back.n_sites, h.n_sites);
        assert_eq!(back.tau.to_bits(), h.tau.to_bits());
        assert_eq!(back.norm_bound.to_bits(), h.norm_bound.to_bits());
        for (a, b) in h.terms.iter().zip(back.terms.iter()) {
            assert_eq!(a.coefficient.to_bits(), b.coefficient.to_bits());
            assert_eq!(a.axes, b.axes);
        }
    }

    #[test]
    fn single_y_term_has_imaginary_entries() {
        let h = Hamiltonian {
            n_sites: 1,
            terms: vec![PauliTerm {
                coefficient: 1.0,
                axes: vec![Axis::Y],
            }],
            tau: 1.0,
            norm_bound: 1.0,
        };
        let m = h.dense_matrix();
        assert_relative_eq!(m[(1, 0)].im, 1.0, epsilon = 1e-15);
        assert_relative_eq!(m[(0, 1)].im, -1.0, epsilon = 1e-15);
        let hn = normalize_with(&h, 0.0, NormBound::Spectral).unwrap();
        assert_relative_eq!(hn.norm_bound, 1.0, epsilon = 1e-10);
    }
}
