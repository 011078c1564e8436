//! Initial-state construction, sparsification and quality metrics.

use crate::evolution::EigenDecomposition;
use crate::rng::{domain, SeedScheme};
use crate::{Error, Result};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use std::io::{Read, Write};
use std::path::Path;

const STATE_MAGIC: &[u8; 4] = b"GSV1";

/// Normalized statevector over `2^n` basis states. The global phase is fixed
/// so that the largest-magnitude amplitude is real and non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Normalizes and phase-fixes the given amplitudes.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<StateVector> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::Size(format!(
                "amplitude count must be a power of two, got {}",
                amps.len()
            )));
        }
        let mut s = StateVector { amps };
        s.renormalize()?;
        s.fix_phase();
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn n_sites(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn renormalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(Error::Domain("cannot normalize the zero vector".into()));
        }
        if (n - 1.0).abs() > 1e-15 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
        Ok(())
    }

    fn fix_phase(&mut self) {
        let mut best = 0usize;
        let mut best_mag = -1.0f64;
        for (i, a) in self.amps.iter().enumerate() {
            let m = a.norm_sqr();
            if m > best_mag + 1e-30 {
                best_mag = m;
                best = i;
            }
        }
        let a = self.amps[best];
        let m = a.norm();
        if m > 0.0 {
            let rot = a.conj() / m;
            if (rot - Complex64::new(1.0, 0.0)).norm() > 1e-15 {
                for v in &mut self.amps {
                    *v *= rot;
                }
            }
        }
    }

    /// Binary format: magic, u32 n_sites, then `2 * 2^n` little-endian f64
    /// (interleaved re/im).
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(STATE_MAGIC)?;
        w.write_all(&(self.n_sites() as u32).to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<StateVector> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != STATE_MAGIC {
            return Err(Error::Parse("bad state file magic".into()));
        }
        let mut nb = [0u8; 4];
        r.read_exact(&mut nb)?;
        let n_sites = u32::from_le_bytes(nb) as usize;
        if n_sites > 26 {
            return Err(Error::Size(format!("state file claims n_sites={n_sites}")));
        }
        let dim = 1usize << n_sites;
        let mut amps = Vec::with_capacity(dim);
        let mut buf = [0u8; 16];
        for _ in 0..dim {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
            amps.push(Complex64::new(re, im));
        }
        // stored states are already unit norm; this only guards corrupt files
        StateVector::from_amplitudes(amps)
    }

    pub fn write_binary_file(&self, path: &Path) -> Result<()> {
        self.write_binary(std::fs::File::create(path)?)
    }

    pub fn read_binary_file(path: &Path) -> Result<StateVector> {
        Self::read_binary(std::fs::File::open(path)?)
    }
}

/// Haar-like random state: i.i.d. complex standard-normal amplitudes,
/// normalized. Deterministic per seed.
pub fn random_state(n: usize, seed: u64) -> Result<StateVector> {
    if !(1..=26).contains(&n) {
        return Err(Error::Size(format!(
            "random_state supports 1 <= n <= 26, got {n}"
        )));
    }
    let mut rng = SeedScheme::new(seed).stream(domain::STATE, 0);
    let dim = 1usize << n;
    let mut amps = Vec::with_capacity(dim);
    for _ in 0..dim {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        amps.push(Complex64::new(re, im));
    }
    StateVector::from_amplitudes(amps)
}

/// State with prescribed squared overlaps on selected eigenvectors; the
/// remaining weight is spread over the other eigenvectors with seeded
/// random complex coefficients.
pub fn state_with_overlaps(
    ed: &EigenDecomposition,
    targets: &[(usize, f64)],
    seed: u64,
) -> Result<StateVector> {
    let dim = ed.dim();
    let total: f64 = targets.iter().map(|(_, p)| *p).sum();
    if total > 1.0 + 1e-12 {
        return Err(Error::Infeasible(format!(
            "target overlaps sum to {total} > 1"
        )));
    }
    for &(k, p) in targets {
        if k >= dim {
            return Err(Error::Dimension(format!(
                "target index {k} out of range for dim {dim}"
            )));
        }
        if p < 0.0 {
            return Err(Error::Parameter(format!("negative overlap {p}")));
        }
    }

    let mut coeff = vec![Complex64::new(0.0, 0.0); dim];
    let mut is_target = vec![false; dim];
    for &(k, p) in targets {
        coeff[k] = Complex64::new(p.sqrt(), 0.0);
        is_target[k] = true;
    }

    let residual = (1.0 - total).max(0.0);
    if residual > 0.0 {
        let mut rng = SeedScheme::new(seed).stream(domain::STATE, 1);
        let mut others = Vec::new();
        for k in 0..dim {
            if !is_target[k] {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                others.push((k, Complex64::new(re, im)));
            }
        }
        let z_norm_sq: f64 = others.iter().map(|(_, z)| z.norm_sqr()).sum();
        if z_norm_sq > 0.0 {
            let scale = (residual / z_norm_sq).sqrt();
            for (k, z) in others {
                coeff[k] = z * scale;
            }
        }
    }

    // psi = V c  (columns of V are the eigenvectors)
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for (k, c) in coeff.iter().enumerate() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let col = ed.vectors.column(k);
        for i in 0..dim {
            amps[i] += col[i] * c;
        }
    }
    StateVector::from_amplitudes(amps)
}

/// Keep the `s` largest-magnitude amplitudes (ties broken towards the lower
/// basis index), zero the rest, renormalize.
pub fn sparsify(psi: &StateVector, s: usize) -> Result<StateVector> {
    let dim = psi.dim();
    if s == 0 || s > dim {
        return Err(Error::Parameter(format!(
            "sparsify needs 1 <= s <= {dim}, got {s}"
        )));
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        let ma = psi.amps[a].norm_sqr();
        let mb = psi.amps[b].norm_sqr();
        mb.partial_cmp(&ma).unwrap().then(a.cmp(&b))
    });
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    let mut kept_norm = 0.0;
    for &idx in order.iter().take(s) {
        amps[idx] = psi.amps[idx];
        kept_norm += psi.amps[idx].norm_sqr();
    }
    if !(kept_norm > 0.0) {
        return Err(Error::Domain("all kept amplitudes are zero".into()));
    }
    StateVector::from_amplitudes(amps)
}

/// `(|<a|b>|, ||a - b||_2)`.
pub fn state_metrics(a: &StateVector, b: &StateVector) -> Result<(f64, f64)> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "state dims differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let mut inner = Complex64::new(0.0, 0.0);
    let mut dist_sq = 0.0;
    for (x, y) in a.amps.iter().zip(b.amps.iter()) {
        inner += x.conj() * y;
        dist_sq += (x - y).norm_sqr();
    }
    Ok((inner.norm(), dist_sq.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::diagonalize;
    use crate::hamiltonian::build_heisenberg_full;
    use approx::assert_relative_eq;

    #[test]
    fn random_state_basics() {
        let s = random_state(1, 3).unwrap();
        assert_eq!(s.dim(), 2);
        assert_relative_eq!(s.norm(), 1.0, epsilon = 1e-12);
        let again = random_state(1, 3).unwrap();
        assert_eq!(s.amplitudes(), again.amplitudes());
        assert!(random_state(0, 1).is_err());
        assert!(random_state(27, 1).is_err());
    }

    #[test]
    fn random_state_overlaps_sum_to_one() {
        let h = build_heisenberg_full(6, 2).unwrap();
        let ed = diagonalize(&h).unwrap();
        let psi = random_state(6, 7).unwrap();
        let mut total = 0.0;
        for k in 0..ed.dim() {
            let col = ed.vectors.column(k);
            let mut inner = Complex64::new(0.0, 0.0);
            for i in 0..ed.dim() {
                inner += col[i].conj() * psi.amplitudes()[i];
            }
            total += inner.norm_sqr();
        }
        assert_relative_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn overlaps_are_reproduced_exactly() {
        let h = build_heisenberg_full(6, 1).unwrap();
        let ed = diagonalize(&h).unwrap();
        let psi = state_with_overlaps(&ed, &[(0, 0.0014), (1, 0.015)], 5).unwrap();
        for (k, want) in [(0usize, 0.0014f64), (1, 0.015)] {
            let col = ed.vectors.column(k);
            let mut inner = Complex64::new(0.0, 0.0);
            for i in 0..ed.dim() {
                inner += col[i].conj() * psi.amplitudes()[i];
            }
            assert!(
                (inner.norm_sqr() - want).abs() <= 1e-12,
                "overlap {k}: {} vs {want}",
                inner.norm_sqr()
            );
        }
    }

    #[test]
    fn pure_target_returns_eigenvector() {
        let h = build_heisenberg_full(4, 4).unwrap();
        let ed = diagonalize(&h).unwrap();
        let psi = state_with_overlaps(&ed, &[(0, 1.0)], 9).unwrap();
        let col = ed.vectors.column(0);
        let mut inner = Complex64::new(0.0, 0.0);
        for i in 0..ed.dim() {
            inner += col[i].conj() * psi.amplitudes()[i];
        }
        assert_relative_eq!(inner.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn infeasible_overlaps_rejected() {
        let h = build_heisenberg_full(4, 4).unwrap();
        let ed = diagonalize(&h).unwrap();
        assert!(state_with_overlaps(&ed, &[(0, 0.7), (1, 0.5)], 0).is_err());
    }

    #[test]
    fn sparsify_examples() {
        let amps = vec![
            Complex64::new(0.2, 0.0),
            Complex64::new(0.4, 0.0),
            Complex64::new(0.4, 0.0),
            Complex64::new(0.8, 0.0),
        ];
        let psi = StateVector::from_amplitudes(amps).unwrap();

        let s1 = sparsify(&psi, 1).unwrap();
        assert_relative_eq!(s1.amplitudes()[3].re, 1.0, epsilon = 1e-12);
        assert_eq!(s1.amplitudes()[0], Complex64::new(0.0, 0.0));

        // tie between indices 1 and 2 resolves to the lower index
        let s2 = sparsify(&psi, 2).unwrap();
        assert_relative_eq!(s2.amplitudes()[1].re, 0.4472135954999579, epsilon = 1e-12);
        assert_eq!(s2.amplitudes()[2], Complex64::new(0.0, 0.0));
        assert_relative_eq!(s2.amplitudes()[3].re, 0.8944271909999159, epsilon = 1e-12);

        let s4 = sparsify(&psi, 4).unwrap();
        for (a, b) in s4.amplitudes().iter().zip(psi.amplitudes()) {
            assert_relative_eq!(a.re, b.re, epsilon = 1e-12);
        }
    }

    #[test]
    fn sparsify_idempotent_and_monotone() {
        let psi = random_state(8, 21).unwrap();
        let mut prev_overlap = 0.0;
        let mut prev_dist = f64::INFINITY;
        for s in [1usize, 2, 4, 8, 16, 64, 256] {
            let sp = sparsify(&psi, s).unwrap();
            let again = sparsify(&sp, s).unwrap();
            for (a, b) in sp.amplitudes().iter().zip(again.amplitudes()) {
                assert!((a - b).norm() <= 1e-12);
            }
            let (ov, dist) = state_metrics(&psi, &sp).unwrap();
            assert!(ov >= prev_overlap - 1e-12);
            assert!(dist <= prev_dist + 1e-12);
            prev_overlap = ov;
            prev_dist = dist;
        }
    }

    #[test]
    fn metrics_trivial_cases() {
        let psi = random_state(3, 5).unwrap();
        let (ov, dist) = state_metrics(&psi, &psi).unwrap();
        assert_relative_eq!(ov, 1.0, epsilon = 1e-12);
        assert!(dist <= 1e-12);

        let mut e0 = vec![Complex64::new(0.0, 0.0); 8];
        e0[0] = Complex64::new(1.0, 0.0);
        let mut e1 = vec![Complex64::new(0.0, 0.0); 8];
        e1[1] = Complex64::new(1.0, 0.0);
        let a = StateVector::from_amplitudes(e0).unwrap();
        let b = StateVector::from_amplitudes(e1).unwrap();
        let (ov, dist) = state_metrics(&a, &b).unwrap();
        assert_eq!(ov, 0.0);
        assert_relative_eq!(dist, 2.0f64.sqrt(), epsilon = 1e-12);

        let c = random_state(2, 5).unwrap();
        assert!(state_metrics(&a, &c).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let psi = random_state(5, 13).unwrap();
        let mut buf = Vec::new();
        psi.write_binary(&mut buf).unwrap();
        let back = StateVector::read_binary(&buf[..]).unwrap();
        assert_eq!(psi.amplitudes(), back.amplitudes());
    }
}
