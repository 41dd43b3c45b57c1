//! Dense complex containers and the handful of matrix helpers the rest of the
//! crate shares.

use alloc::vec::Vec;
use core::ops::Index;
#[allow(unused_imports)]
use num_traits::Float;

use faer::{Mat, MatRef};

use crate::{Error, Result};

pub type C64 = faer::c64;

/// Dense complex matrix, column-major.
pub type ComplexMatrix = Mat<C64>;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// A pure state as a dense amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(Vec<C64>);

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        Self(amplitudes)
    }

    pub fn from_real(amplitudes: &[f64]) -> Self {
        Self(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self(alloc::vec![ZERO; dim])
    }

    /// Computational basis vector `|k⟩` of dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite("state vector"));
        }
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / norm;
        for z in &mut self.0 {
            *z *= inv;
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Errors unless `| ‖ψ‖ − 1 | ≤ tol`.
    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > tol || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, op: MatRef<'_, C64>) -> Result<C64> {
        let applied = apply(op, self)?;
        Ok(self.inner(&applied))
    }

    /// Rotates the global phase so the largest-magnitude amplitude is real and
    /// positive. Ties resolve to the lowest index.
    pub fn fix_phase(&mut self) {
        let mut best = 0;
        let mut best_mag = -1.0;
        for (k, z) in self.0.iter().enumerate() {
            let mag = z.norm_sqr();
            // tolerance keeps the choice stable against last-bit noise
            if mag > best_mag * (1.0 + 1e-12) + 1e-300 {
                best = k;
                best_mag = mag;
            }
        }
        if best_mag <= 0.0 {
            return;
        }
        let z = self.0[best];
        let phase = z.conj() / z.norm();
        for a in &mut self.0 {
            *a *= phase;
        }
        self.0[best] = C64::new(self.0[best].re, 0.0);
    }

    /// Zero-padded (or truncated) copy with the given dimension.
    pub fn resized(&self, dim: usize) -> Self {
        let mut v = self.0.clone();
        v.resize(dim, ZERO);
        Self(v)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self(self.0.iter().map(|z| z * factor).collect())
    }

    /// `self + factor · other`.
    pub fn add_scaled(&self, factor: C64, other: &StateVector) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + factor * b)
                .collect(),
        )
    }

    /// Tensor product `self ⊗ other`, `self` as the most significant factor.
    pub fn kron(&self, other: &StateVector) -> Self {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.0 {
            for b in &other.0 {
                out.push(a * b);
            }
        }
        Self(out)
    }

    pub fn to_column(&self) -> Mat<C64> {
        Mat::from_fn(self.dim(), 1, |i, _| self.0[i])
    }
}

impl Index<usize> for StateVector {
    type Output = C64;

    fn index(&self, index: usize) -> &C64 {
        &self.0[index]
    }
}

impl From<Vec<C64>> for StateVector {
    fn from(v: Vec<C64>) -> Self {
        Self(v)
    }
}

/// Matrix-vector product `A ψ`.
pub fn apply(op: MatRef<'_, C64>, state: &StateVector) -> Result<StateVector> {
    if op.ncols() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.ncols(),
            found: state.dim(),
        });
    }
    let mut out = alloc::vec![ZERO; op.nrows()];
    for (j, &x) in state.as_slice().iter().enumerate() {
        if x == ZERO {
            continue;
        }
        let col = op.col(j);
        for (i, o) in out.iter_mut().enumerate() {
            *o += col[i] * x;
        }
    }
    Ok(StateVector(out))
}

pub fn identity(dim: usize) -> Mat<C64> {
    Mat::from_fn(dim, dim, |i, j| if i == j { ONE } else { ZERO })
}

pub fn zeros(nrows: usize, ncols: usize) -> Mat<C64> {
    Mat::from_fn(nrows, ncols, |_, _| ZERO)
}

pub fn diagonal(entries: &[C64]) -> Mat<C64> {
    let n = entries.len();
    Mat::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
}

/// Owned conjugate transpose.
pub fn adjoint(m: MatRef<'_, C64>) -> Mat<C64> {
    Mat::from_fn(m.ncols(), m.nrows(), |i, j| m[(j, i)].conj())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Mat<C64> {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// `c · A`.
pub fn scale(m: MatRef<'_, C64>, c: C64) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * c)
}

pub fn commutator(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Mat<C64> {
    a * b - b * a
}

/// Largest entry modulus.
pub fn max_abs(m: MatRef<'_, C64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// `max |a_ij − b_ij|`; infinite on shape mismatch.
pub fn max_abs_diff(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return f64::INFINITY;
    }
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            best = best.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    best
}

/// `‖A − A†‖_max`; infinite for non-square input.
pub fn hermiticity_defect(m: MatRef<'_, C64>) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut best = 0.0f64;
    for j in 0..n {
        for i in j..n {
            best = best.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    best
}

/// `‖A†A − I‖_max`.
pub fn unitarity_defect(m: MatRef<'_, C64>) -> f64 {
    let gram = m.adjoint() * m;
    max_abs_diff(gram.as_ref(), identity(m.ncols()).as_ref())
}

pub fn trace(m: MatRef<'_, C64>) -> C64 {
    (0..m.nrows().min(m.ncols())).fold(ZERO, |acc, i| acc + m[(i, i)])
}

/// Eigen-decomposition of a Hermitian matrix with ascending real eigenvalues.
pub(crate) fn hermitian_eigen(m: MatRef<'_, C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let real = (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].im == 0.0));
    if real {
        let re = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
        let evd = re
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|_| Error::NoConvergence)?;
        let values = evd.S().column_vector().iter().copied().collect();
        let u = evd.U();
        return Ok((
            values,
            Mat::from_fn(u.nrows(), u.ncols(), |i, j| C64::new(u[(i, j)], 0.0)),
        ));
    }
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::NoConvergence)?;
    let values = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((values, evd.U().to_owned()))
}

/// `n` evenly spaced samples on `[start, stop]`, both ends included.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|k| {
                    if k == n - 1 {
                        stop
                    } else {
                        start + step * k as f64
                    }
                })
                .collect()
        }
    }
}
