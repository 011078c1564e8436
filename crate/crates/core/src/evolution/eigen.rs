//! Dense eigendecomposition of the scaled operator `tau * H`.

use crate::hamiltonian::{hermitian_embedding, Hamiltonian};
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

const DENSE_LIMIT: usize = 14;

/// Full spectrum of `tau * H`: scaled eigenvalues ascending, orthonormal
/// eigenvectors as matrix columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub lambdas: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }
}

/// Dense diagonalization; real-symmetric fast path, Hermitian embedding for
/// operators with genuinely complex entries (odd Pauli-Y counts).
pub fn diagonalize(h: &Hamiltonian) -> Result<EigenDecomposition> {
    if h.n_sites > DENSE_LIMIT {
        return Err(Error::Size(format!(
            "dense backend supports n_sites <= {DENSE_LIMIT}, got {}",
            h.n_sites
        )));
    }
    let dim = h.dim();
    let m = h.dense_matrix() * Complex64::new(h.tau, 0.0);

    let mut max_imag = 0.0f64;
    for v in m.iter() {
        max_imag = max_imag.max(v.im.abs());
    }

    let (mut lambdas, mut vectors) = if max_imag < 1e-12 * h.tau.max(1e-300) {
        let real = m.map(|c| c.re);
        let eig = real.symmetric_eigen();
        let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let vecs = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        (vals, vecs)
    } else {
        complex_hermitian_eigen(&m)?
    };

    // sort ascending, reorder columns to match
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| lambdas[a].partial_cmp(&lambdas[b]).unwrap());
    let sorted_vals: Vec<f64> = order.iter().map(|&i| lambdas[i]).collect();
    let mut sorted_vecs = DMatrix::<Complex64>::zeros(dim, dim);
    for (new_col, &old_col) in order.iter().enumerate() {
        sorted_vecs.set_column(new_col, &vectors.column(old_col));
    }
    lambdas = sorted_vals;
    vectors = sorted_vecs;

    Ok(EigenDecomposition { lambdas, vectors })
}

/// Hermitian eigendecomposition through the real embedding
/// `[[A, -B], [B, A]]`, whose spectrum is the complex one doubled. One
/// complex eigenvector is recovered per pair; degenerate groups are
/// re-orthonormalized.
fn complex_hermitian_eigen(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let dim = m.nrows();
    let emb = hermitian_embedding(m);
    let eig = emb.symmetric_eigen();
    let mut pairs: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // group near-equal eigenvalues; each group of 2g real vectors spans a
    // g-dimensional complex eigenspace
    let scale = pairs
        .iter()
        .fold(0.0f64, |a, (v, _)| a.max(v.abs()))
        .max(1e-300);
    let tol = 1e-9 * scale;

    let mut lambdas = Vec::with_capacity(dim);
    let mut vectors = DMatrix::<Complex64>::zeros(dim, dim);
    let mut col_out = 0usize;

    let mut group_start = 0usize;
    while group_start < pairs.len() {
        let mut group_end = group_start + 1;
        while group_end < pairs.len() && (pairs[group_end].0 - pairs[group_start].0).abs() <= tol {
            group_end += 1;
        }
        let g = (group_end - group_start) / 2;
        // complex Gram-Schmidt over candidates u = [x; y] -> v = x + i y
        let mut kept: Vec<Vec<Complex64>> = Vec::with_capacity(g);
        for &(_, idx) in &pairs[group_start..group_end] {
            if kept.len() == g {
                break;
            }
            let u = eig.eigenvectors.column(idx);
            let mut v: Vec<Complex64> = (0..dim)
                .map(|i| Complex64::new(u[i], u[i + dim]))
                .collect();
            for k in &kept {
                let inner: Complex64 = k.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, ki) in v.iter_mut().zip(k.iter()) {
                    *vi -= ki * inner;
                }
            }
            let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for c in &mut v {
                    *c /= norm;
                }
                kept.push(v);
            }
        }
        if kept.len() != g {
            return Err(Error::Domain(
                "failed to extract a complete eigenbasis from the Hermitian embedding".into(),
            ));
        }
        for v in kept {
            lambdas.push(pairs[group_start].0);
            for (i, c) in v.into_iter().enumerate() {
                vectors[(i, col_out)] = c;
            }
            col_out += 1;
        }
        group_start = group_end;
    }
    if col_out != dim {
        return Err(Error::Domain("eigenbasis extraction lost columns".into()));
    }
    Ok((lambdas, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_heisenberg_full, build_xxz_chain, Axis, PauliTerm};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn single_site_z_spectrum() {
        let h = Hamiltonian {
            n_sites: 1,
            terms: vec![PauliTerm {
                coefficient: 1.0,
                axes: vec![Axis::Z],
            }],
            tau: 0.7,
            norm_bound: 1.0,
        };
        let ed = diagonalize(&h).unwrap();
        assert_relative_eq!(ed.lambdas[0], -0.7, epsilon = 1e-12);
        assert_relative_eq!(ed.lambdas[1], 0.7, epsilon = 1e-12);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let h = build_heisenberg_full(3, 8).unwrap();
        let ed = diagonalize(&h).unwrap();
        let dim = ed.dim();
        let m = h.dense_matrix() * Complex64::new(h.tau, 0.0);

        // V Lambda V^dagger reconstructs tau H
        let mut rec = DMatrix::<Complex64>::zeros(dim, dim);
        for k in 0..dim {
            let col = ed.vectors.column(k);
            for i in 0..dim {
                for j in 0..dim {
                    rec[(i, j)] += col[i] * col[j].conj() * Complex64::new(ed.lambdas[k], 0.0);
                }
            }
        }
        let max_dev = (&rec - &m).map(|c| c.norm()).max();
        assert!(max_dev <= 1e-9 * h.norm_bound, "reconstruction off by {max_dev}");

        let gram = ed.vectors.adjoint() * &ed.vectors;
        for i in 0..dim {
            for j in 0..dim {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)].norm() - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn lambdas_ascending_inside_principal_window() {
        let h = build_xxz_chain(4, 1.0, -1.0, true).unwrap();
        let ed = diagonalize(&h).unwrap();
        for w in ed.lambdas.windows(2) {
            assert!(w[0] <= w[1] + 1e-12);
        }
        for &l in &ed.lambdas {
            assert!(l.abs() < FRAC_PI_2);
        }
    }

    #[test]
    fn rejects_oversized_systems() {
        let mut h = build_heisenberg_full(2, 0).unwrap();
        h.n_sites = 15;
        assert!(diagonalize(&h).is_err());
    }

    #[test]
    fn complex_path_single_y() {
        let h = Hamiltonian {
            n_sites: 1,
            terms: vec![PauliTerm {
                coefficient: 1.0,
                axes: vec![Axis::Y],
            }],
            tau: 1.0,
            norm_bound: 1.0,
        };
        let ed = diagonalize(&h).unwrap();
        assert_relative_eq!(ed.lambdas[0], -1.0, epsilon = 1e-10);
        assert_relative_eq!(ed.lambdas[1], 1.0, epsilon = 1e-10);
        // eigenvector check: Y v = lambda v
        let m = h.dense_matrix();
        for k in 0..2 {
            let v = ed.vectors.column(k);
            let mv = &m * v;
            for i in 0..2 {
                assert!((mv[i] - v[i] * Complex64::new(ed.lambdas[k], 0.0)).norm() < 1e-9);
            }
        }
    }
}
