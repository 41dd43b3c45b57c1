//! Exact evolution under a time-independent Hermitian `H` through its
//! spectral decomposition `H = V diag(E) V†`.

use alloc::vec::Vec;

use faer::{Mat, MatRef};

use crate::linalg::{hermitian_eigen, hermiticity_defect, max_abs, StateVector, C64, ZERO};
use crate::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<C64>,
}

/// Full decomposition, eigenvalues ascending.
pub fn eigendecompose(h: MatRef<'_, C64>) -> Result<SpectralDecomposition> {
    check_hermitian(h)?;
    let (eigenvalues, eigenvectors) = hermitian_eigen(h)?;
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Same result as [`eigendecompose`] for a matrix that is block diagonal with
/// respect to `labels`, computed one block at a time.
///
/// Basis states with different labels must not be coupled by `h`.
pub fn eigendecompose_sectors(h: MatRef<'_, C64>, labels: &[u8]) -> Result<SpectralDecomposition> {
    check_hermitian(h)?;
    let d = h.nrows();
    crate::fock::check_dim(d, labels.len())?;
    let scale = max_abs(h).max(1.0);
    let mut leak = 0.0f64;
    for j in 0..d {
        for i in 0..d {
            if labels[i] != labels[j] {
                leak = leak.max(h[(i, j)].norm());
            }
        }
    }
    if leak > 1e-12 * scale {
        return Err(Error::SectorLeak(leak));
    }

    let mut sector_ids: Vec<u8> = labels.to_vec();
    sector_ids.sort_unstable();
    sector_ids.dedup();

    // (eigenvalue, sector-local column, basis indices of the sector)
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(d);
    let mut blocks = Vec::with_capacity(sector_ids.len());
    for (s, &id) in sector_ids.iter().enumerate() {
        let idx: Vec<usize> = (0..d).filter(|&i| labels[i] == id).collect();
        let sub = Mat::from_fn(idx.len(), idx.len(), |a, b| h[(idx[a], idx[b])]);
        let (vals, vecs) = hermitian_eigen(sub.as_ref())?;
        for (c, &v) in vals.iter().enumerate() {
            pairs.push((v, s, c));
        }
        blocks.push((idx, vecs));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut eigenvectors = Mat::from_fn(d, d, |_, _| ZERO);
    let mut eigenvalues = Vec::with_capacity(d);
    for (col, &(v, s, c)) in pairs.iter().enumerate() {
        let (idx, vecs) = &blocks[s];
        for (a, &i) in idx.iter().enumerate() {
            eigenvectors[(i, col)] = vecs[(a, c)];
        }
        eigenvalues.push(v);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn check_hermitian(h: MatRef<'_, C64>) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: h.ncols(),
        });
    }
    let defect = hermiticity_defect(h);
    if defect.is_nan() || defect > HERMITIAN_TOL * max_abs(h).max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvectors as columns.
    pub fn eigenvectors(&self) -> MatRef<'_, C64> {
        self.eigenvectors.as_ref()
    }

    /// `V diag(E) V†`.
    pub fn reconstruct(&self) -> Mat<C64> {
        let weights: Vec<C64> = self.eigenvalues.iter().map(|&e| C64::new(e, 0.0)).collect();
        self.weighted_outer(&weights)
    }

    /// `U(t) = V diag(e^{−iEt}) V†`.
    pub fn evolve_unitary(&self, t: f64) -> Mat<C64> {
        self.weighted_outer(&self.phases(t))
    }

    fn weighted_outer(&self, weights: &[C64]) -> Mat<C64> {
        let v = self.eigenvectors.as_ref();
        let scaled = Mat::from_fn(self.dim(), self.dim(), |i, k| v[(i, k)] * weights[k]);
        &scaled * v.adjoint()
    }

    /// `e^{−i E_k t}` for every eigenvalue.
    pub fn phases(&self, t: f64) -> Vec<C64> {
        self.eigenvalues
            .iter()
            .map(|&e| C64::from_polar(1.0, -e * t))
            .collect()
    }

    /// Coefficients `V† ψ`.
    pub fn to_eigenbasis(&self, psi: &StateVector) -> Result<Vec<C64>> {
        crate::fock::check_dim(self.dim(), psi.dim())?;
        let v = self.eigenvectors.as_ref();
        let amps = psi.as_slice();
        Ok((0..self.dim())
            .map(|k| {
                let col = v.col(k);
                let mut acc = ZERO;
                for (i, a) in amps.iter().enumerate() {
                    acc += col[i].conj() * a;
                }
                acc
            })
            .collect())
    }

    /// `V diag(e^{−iEt}) c`.
    pub fn from_eigenbasis(&self, coefficients: &[C64], t: f64) -> StateVector {
        let v = self.eigenvectors.as_ref();
        let mut out = alloc::vec![ZERO; self.dim()];
        for (k, (&c, &e)) in coefficients.iter().zip(&self.eigenvalues).enumerate() {
            let w = c * C64::from_polar(1.0, -e * t);
            if w == ZERO {
                continue;
            }
            let col = v.col(k);
            for (i, o) in out.iter_mut().enumerate() {
                *o += col[i] * w;
            }
        }
        StateVector::new(out)
    }

    /// `U(t) ψ`.
    pub fn evolve_state(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        let c = self.to_eigenbasis(psi)?;
        Ok(self.from_eigenbasis(&c, t))
    }
}

/// `p(t) = ⟨ψ(t)| P |ψ(t)⟩` for each time, `P` a Hermitian projector.
pub fn population_timeseries(
    decomp: &SpectralDecomposition,
    psi0: &StateVector,
    times: &[f64],
    projector: MatRef<'_, C64>,
) -> Result<Vec<f64>> {
    crate::fock::check_dim(decomp.dim(), projector.nrows())?;
    crate::fock::check_dim(decomp.dim(), projector.ncols())?;
    psi0.check_normalized(NORM_TOL)?;
    let defect = hermiticity_defect(projector);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let c = decomp.to_eigenbasis(psi0)?;
    times
        .iter()
        .map(|&t| {
            let psi = decomp.from_eigenbasis(&c, t);
            Ok(psi.expectation(projector)?.re)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diagonal, identity, max_abs_diff, unitarity_defect};

    fn sigma_x() -> Mat<C64> {
        Mat::from_fn(2, 2, |i, j| if i != j { C64::new(1.0, 0.0) } else { ZERO })
    }

    #[test]
    fn diagonal_input() {
        let h = diagonal(&[C64::new(3.0, 0.0), C64::new(-1.0, 0.0), C64::new(2.0, 0.0)]);
        let d = eigendecompose(h.as_ref()).unwrap();
        assert_eq!(d.eigenvalues(), &[-1.0, 2.0, 3.0]);
        let v = d.eigenvectors();
        for (col, row) in [(0, 1), (1, 2), (2, 0)] {
            assert!((v[(row, col)].norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pauli_x_spectrum() {
        let d = eigendecompose(sigma_x().as_ref()).unwrap();
        assert!((d.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((d.eigenvalues()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = sigma_x();
        h[(0, 1)] = C64::new(2.0, 0.0);
        assert!(matches!(
            eigendecompose(h.as_ref()),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn sector_split_rejects_coupled_labels() {
        let h = sigma_x();
        assert!(matches!(
            eigendecompose_sectors(h.as_ref(), &[0, 1]),
            Err(Error::SectorLeak(_))
        ));
        let d = eigendecompose_sectors(h.as_ref(), &[0, 0]).unwrap();
        assert!((d.eigenvalues()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unitary_at_zero_and_group_law() {
        let h = Mat::from_fn(3, 3, |i, j| {
            C64::new(
                (i + j) as f64 * 0.3,
                if i > j {
                    0.2
                } else if i < j {
                    -0.2
                } else {
                    0.0
                },
            )
        });
        let d = eigendecompose(h.as_ref()).unwrap();
        assert!(max_abs_diff(d.evolve_unitary(0.0).as_ref(), identity(3).as_ref()) < 1e-12);
        let u1 = d.evolve_unitary(0.7);
        let u2 = d.evolve_unitary(1.9);
        let u12 = d.evolve_unitary(2.6);
        assert!(max_abs_diff((&u1 * &u2).as_ref(), u12.as_ref()) < 1e-9);
        assert!(unitarity_defect(u12.as_ref()) < 1e-9);
    }

    #[test]
    fn population_of_initial_state_at_zero() {
        let h = sigma_x();
        let d = eigendecompose(h.as_ref()).unwrap();
        let psi = StateVector::basis(2, 0);
        let proj = Mat::from_fn(2, 2, |i, j| {
            if i == 0 && j == 0 {
                C64::new(1.0, 0.0)
            } else {
                ZERO
            }
        });
        let p = population_timeseries(
            &d,
            &psi,
            &[0.0, core::f64::consts::FRAC_PI_2],
            proj.as_ref(),
        )
        .unwrap();
        assert!((p[0] - 1.0).abs() < 1e-14);
        assert!(p[1].abs() < 1e-14);
        let bad = StateVector::new(alloc::vec![C64::new(2.0, 0.0), ZERO]);
        assert!(population_timeseries(&d, &bad, &[0.0], proj.as_ref()).is_err());
    }
}
