//! Truncated Fock space, atomic level structure and the composite basis.
//!
//! Composite basis states are ordered field-major: the flat index of
//! `|n⟩ ⊗ |m⟩` is `n · D_atom + m`, where `m` is the lexicographic atomic
//! multi-index with atom 0 as the most significant digit. Level indices are
//! 0-based throughout this crate.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use faer::{Mat, MatRef};

use crate::linalg::{identity, kron, StateVector, C64, ONE, ZERO};
use crate::{Error, Result};

/// Truncated single-mode Fock space.
///
/// `n_max` caps the excitation of the control field (the projector `Π`);
/// `n_trunc` is the numerical truncation, Fock states `0..=n_trunc` are kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldSpace {
    n_max: usize,
    n_trunc: usize,
}

impl FieldSpace {
    pub fn new(n_max: usize, n_trunc: usize) -> Result<Self> {
        if n_trunc < n_max {
            return Err(Error::InvalidFieldSpace { n_max, n_trunc });
        }
        Ok(Self { n_max, n_trunc })
    }

    /// Truncation at twice the excitation cap.
    pub fn with_default_buffer(n_max: usize) -> Self {
        Self {
            n_max,
            n_trunc: 2 * n_max,
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    pub fn dim(&self) -> usize {
        self.n_trunc + 1
    }
}

/// One atom: level energies and a real symmetric coupling matrix with zero
/// diagonal (units of the mode frequency).
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    energies: Vec<f64>,
    couplings: Vec<f64>,
}

impl Atom {
    /// `couplings[k][l]` multiplies `σ_kl X` in the Hamiltonian.
    pub fn new(energies: Vec<f64>, couplings: Vec<Vec<f64>>) -> Result<Self> {
        Self::validated(0, energies, couplings)
    }

    fn validated(atom: usize, energies: Vec<f64>, couplings: Vec<Vec<f64>>) -> Result<Self> {
        let levels = energies.len();
        if levels < 2 {
            return Err(Error::TooFewLevels { atom, levels });
        }
        if couplings.len() != levels || couplings.iter().any(|row| row.len() != levels) {
            let cols = couplings.first().map_or(0, Vec::len);
            return Err(Error::CouplingShape {
                atom,
                expected: levels,
                found: format!("{}x{}", couplings.len(), cols),
            });
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("level energies"));
        }
        let mut flat = Vec::with_capacity(levels * levels);
        for (k, row) in couplings.iter().enumerate() {
            for (l, &g) in row.iter().enumerate() {
                if !g.is_finite() {
                    return Err(Error::NonFinite("couplings"));
                }
                if k == l && g != 0.0 {
                    return Err(Error::DiagonalCoupling { atom, k });
                }
                if g != couplings[l][k] {
                    return Err(Error::AsymmetricCoupling { atom, k, l });
                }
                flat.push(g);
            }
        }
        Ok(Self {
            energies,
            couplings: flat,
        })
    }

    /// Two-level atom `|G⟩ = 0`, `|E⟩ = 1` with `ω_G = 0`.
    pub fn two_level(omega_e: f64, coupling: f64) -> Result<Self> {
        Self::new(
            alloc::vec![0.0, omega_e],
            alloc::vec![alloc::vec![0.0, coupling], alloc::vec![coupling, 0.0]],
        )
    }

    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn coupling(&self, k: usize, l: usize) -> f64 {
        self.couplings[k * self.levels() + l]
    }

    /// A two-colouring of the coupling graph, if one exists.
    ///
    /// When every allowed transition joins levels of opposite colour, each
    /// `σ_kl X` term flips both the level colour and the photon parity, so the
    /// joint parity is conserved.
    pub fn level_parities(&self) -> Option<Vec<u8>> {
        let n = self.levels();
        let mut colour: Vec<Option<u8>> = alloc::vec![None; n];
        for start in 0..n {
            if colour[start].is_some() {
                continue;
            }
            colour[start] = Some(0);
            let mut stack = alloc::vec![start];
            while let Some(k) = stack.pop() {
                let ck = colour[k].unwrap_or(0);
                for l in 0..n {
                    if l == k || self.coupling(k, l) == 0.0 {
                        continue;
                    }
                    match colour[l] {
                        None => {
                            colour[l] = Some(1 - ck);
                            stack.push(l);
                        }
                        Some(cl) if cl == ck => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(colour.into_iter().map(|c| c.unwrap_or(0)).collect())
    }
}

/// The target system: one or more atoms sharing the field mode.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicSystem {
    atoms: Vec<Atom>,
}

impl AtomicSystem {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::NoAtoms);
        }
        Ok(Self { atoms })
    }

    /// Builds from raw per-atom data, reporting the offending atom on error.
    pub fn from_parts(parts: Vec<(Vec<f64>, Vec<Vec<f64>>)>) -> Result<Self> {
        let atoms = parts
            .into_iter()
            .enumerate()
            .map(|(j, (e, g))| Atom::validated(j, e, g))
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms)
    }

    pub fn single(atom: Atom) -> Self {
        Self {
            atoms: alloc::vec![atom],
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `∏_j N_L^(j)`.
    pub fn dim(&self) -> usize {
        self.atoms.iter().map(Atom::levels).product()
    }

    /// Flat-index weight of each atom's level digit.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = alloc::vec![1; self.len()];
        for j in (0..self.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * self.atoms[j + 1].levels();
        }
        strides
    }

    /// Level of every atom for a flat atomic index.
    pub fn multi_index(&self, mut m: usize) -> Vec<usize> {
        let mut digits = alloc::vec![0; self.len()];
        for j in (0..self.len()).rev() {
            let nl = self.atoms[j].levels();
            digits[j] = m % nl;
            m /= nl;
        }
        digits
    }

    pub fn flat_index(&self, levels: &[usize]) -> usize {
        levels
            .iter()
            .zip(&self.atoms)
            .fold(0, |acc, (&k, atom)| acc * atom.levels() + k)
    }

    /// Bare energy `Σ_j ω_{m_j}^(j)` of a flat atomic basis state.
    pub fn energy(&self, m: usize) -> f64 {
        self.multi_index(m)
            .iter()
            .zip(&self.atoms)
            .map(|(&k, atom)| atom.energies[k])
            .sum()
    }

    /// Product basis state with every atom in the given level.
    pub fn product_state(&self, levels: &[usize]) -> Result<StateVector> {
        if levels.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: levels.len(),
            });
        }
        for (j, (&k, atom)) in levels.iter().zip(&self.atoms).enumerate() {
            if k >= atom.levels() {
                return Err(Error::LevelIndex {
                    atom: j,
                    index: k,
                    levels: atom.levels(),
                });
            }
        }
        Ok(StateVector::basis(self.dim(), self.flat_index(levels)))
    }

    /// Every atom in level 0.
    pub fn ground_state(&self) -> StateVector {
        StateVector::basis(self.dim(), 0)
    }

    /// Parity colour of every flat atomic basis state, when all atoms have a
    /// bipartite coupling graph.
    pub fn state_parities(&self) -> Option<Vec<u8>> {
        let per_atom = self
            .atoms
            .iter()
            .map(Atom::level_parities)
            .collect::<Option<Vec<_>>>()?;
        Some(
            (0..self.dim())
                .map(|m| {
                    self.multi_index(m)
                        .iter()
                        .zip(&per_atom)
                        .fold(0u8, |acc, (&k, p)| acc ^ p[k])
                })
                .collect(),
        )
    }
}

/// Field ⊗ atoms, field-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeSpace {
    pub field: FieldSpace,
    pub atoms: AtomicSystem,
}

impl CompositeSpace {
    pub fn new(field: FieldSpace, atoms: AtomicSystem) -> Self {
        Self { field, atoms }
    }

    pub fn atom_dim(&self) -> usize {
        self.atoms.dim()
    }

    pub fn dim(&self) -> usize {
        self.field.dim() * self.atom_dim()
    }

    pub fn flatten(&self, n: usize, m: usize) -> usize {
        n * self.atom_dim() + m
    }

    /// `(fock index, atomic index)`.
    pub fn unflatten(&self, i: usize) -> (usize, usize) {
        (i / self.atom_dim(), i % self.atom_dim())
    }

    /// `|field⟩ ⊗ |atoms⟩`.
    pub fn product(&self, field: &StateVector, atoms: &StateVector) -> Result<StateVector> {
        check_dim(self.field.dim(), field.dim())?;
        check_dim(self.atom_dim(), atoms.dim())?;
        Ok(field.kron(atoms))
    }

    /// Joint parity label `(n + Σ_j colour_j) mod 2` of every composite basis
    /// state, when one exists.
    pub fn parity_labels(&self) -> Option<Vec<u8>> {
        let atomic = self.atoms.state_parities()?;
        Some(
            (0..self.dim())
                .map(|i| {
                    let (n, m) = self.unflatten(i);
                    (n as u8 & 1) ^ atomic[m]
                })
                .collect(),
        )
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `a` with `a[n−1, n] = √n`.
pub fn annihilation_matrix(space: &FieldSpace) -> Mat<C64> {
    let d = space.dim();
    Mat::from_fn(d, d, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    })
}

pub fn creation_matrix(space: &FieldSpace) -> Mat<C64> {
    annihilation_matrix(space).adjoint().to_owned()
}

/// `a†a = diag(0, 1, …, n_trunc)`.
pub fn number_matrix(space: &FieldSpace) -> Mat<C64> {
    let d = space.dim();
    Mat::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(i as f64, 0.0)
        } else {
            ZERO
        }
    })
}

/// `exp(iπ a†a) = diag((−1)^n)`.
pub fn field_parity_matrix(space: &FieldSpace) -> Mat<C64> {
    let d = space.dim();
    Mat::from_fn(d, d, |i, j| {
        if i != j {
            ZERO
        } else if i % 2 == 0 {
            ONE
        } else {
            -ONE
        }
    })
}

/// `(X, P)` with `X = (a + a†)/2` and `P = (a − a†)/(2i)`.
pub fn quadratures(space: &FieldSpace) -> (Mat<C64>, Mat<C64>) {
    let a = annihilation_matrix(space);
    let d = space.dim();
    let x = Mat::from_fn(d, d, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    // (a − a†)/(2i) = −i (a − a†)/2
    let p = Mat::from_fn(d, d, |i, j| {
        (a[(i, j)] - a[(j, i)].conj()) * C64::new(0.0, -0.5)
    });
    (x, p)
}

/// `|k⟩⟨l|` on atom `j`, identity on the others (atomic space only).
pub fn transition_operator_matrix(
    atoms: &AtomicSystem,
    j: usize,
    k: usize,
    l: usize,
) -> Result<Mat<C64>> {
    let atom = atoms.atoms.get(j).ok_or(Error::AtomIndex {
        index: j,
        count: atoms.len(),
    })?;
    for idx in [k, l] {
        if idx >= atom.levels() {
            return Err(Error::LevelIndex {
                atom: j,
                index: idx,
                levels: atom.levels(),
            });
        }
    }
    let d = atoms.dim();
    let mut out = Mat::from_fn(d, d, |_, _| ZERO);
    for col in 0..d {
        let mut digits = atoms.multi_index(col);
        if digits[j] != l {
            continue;
        }
        digits[j] = k;
        out[(atoms.flat_index(&digits), col)] = ONE;
    }
    Ok(out)
}

/// `A ⊗ 1_atoms`.
pub fn embed_field_operator(op: MatRef<'_, C64>, space: &CompositeSpace) -> Result<Mat<C64>> {
    check_square(op, space.field.dim())?;
    Ok(kron(op, identity(space.atom_dim()).as_ref()))
}

/// `1_field ⊗ B`.
pub fn embed_atomic_operator(op: MatRef<'_, C64>, space: &CompositeSpace) -> Result<Mat<C64>> {
    check_square(op, space.atom_dim())?;
    Ok(kron(identity(space.field.dim()).as_ref(), op))
}

fn check_square(op: MatRef<'_, C64>, dim: usize) -> Result<()> {
    check_dim(dim, op.nrows())?;
    check_dim(dim, op.ncols())
}

pub fn fock_state(dim: usize, n: usize) -> Result<StateVector> {
    if n >= dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: n + 1,
        });
    }
    Ok(StateVector::basis(dim, n))
}

/// Log-magnitude of the untruncated coherent amplitude `⟨n|α⟩`.
fn coherent_log_amplitude(r: f64, n: usize) -> f64 {
    if r == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -0.5 * r * r + n as f64 * r.ln() - 0.5 * libm::lgamma(n as f64 + 1.0)
}

/// Truncated, renormalised coherent states of a fixed dimension.
///
/// Amplitudes are computed in log space, so large `|α|` does not underflow.
#[derive(Clone, Debug)]
pub struct CoherentFamily {
    half_log_factorial: Vec<f64>,
}

impl CoherentFamily {
    pub fn new(dim: usize) -> Self {
        let mut half_log_factorial = Vec::with_capacity(dim);
        let mut acc = 0.0;
        for n in 0..dim {
            if n > 0 {
                acc += 0.5 * (n as f64).ln();
            }
            half_log_factorial.push(acc);
        }
        Self { half_log_factorial }
    }

    pub fn dim(&self) -> usize {
        self.half_log_factorial.len()
    }

    /// Writes the normalised amplitudes of `|α⟩` into `out`.
    pub fn fill(&self, alpha: C64, out: &mut [C64]) {
        let dim = self.dim();
        debug_assert_eq!(out.len(), dim);
        let r = alpha.norm();
        if r == 0.0 {
            out.fill(ZERO);
            out[0] = ONE;
            return;
        }
        let ln_r = r.ln();
        let mut peak = f64::NEG_INFINITY;
        for n in 0..dim {
            peak = peak.max(n as f64 * ln_r - self.half_log_factorial[n]);
        }
        let step = alpha / r;
        let mut phase = ONE;
        let mut norm = 0.0;
        for (n, o) in out.iter_mut().enumerate() {
            let mag = (n as f64 * ln_r - self.half_log_factorial[n] - peak).exp();
            *o = phase * mag;
            norm += mag * mag;
            phase *= step;
        }
        let inv = 1.0 / norm.sqrt();
        for o in out.iter_mut() {
            *o *= inv;
        }
    }

    pub fn state(&self, alpha: C64) -> StateVector {
        let mut v = alloc::vec![ZERO; self.dim()];
        self.fill(alpha, &mut v);
        StateVector::new(v)
    }
}

/// Coherent state `|α⟩` truncated to `dim` Fock levels and renormalised.
pub fn coherent_state(dim: usize, alpha: C64) -> StateVector {
    CoherentFamily::new(dim).state(alpha)
}

/// Probability weight of the untruncated `|α⟩` above Fock index `dim − 1`.
pub fn coherent_leakage(dim: usize, alpha: C64) -> f64 {
    let r = alpha.norm();
    let mut tail = 0.0;
    let mut n = dim;
    loop {
        let p = (2.0 * coherent_log_amplitude(r, n)).exp();
        tail += p;
        if n as f64 > r * r && p < tail * 1e-17 + 1e-300 {
            break;
        }
        n += 1;
        if n > dim + 100_000 {
            break;
        }
    }
    tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, hermiticity_defect, max_abs_diff, trace};

    fn space(n: usize) -> FieldSpace {
        FieldSpace::new(n / 2, n).unwrap()
    }

    #[test]
    fn field_space_invariants() {
        assert!(FieldSpace::new(5, 4).is_err());
        let s = FieldSpace::new(3, 3).unwrap();
        assert_eq!(s.dim(), 4);
        assert_eq!(FieldSpace::with_default_buffer(80).n_trunc(), 160);
    }

    #[test]
    fn ladder_entries() {
        let a = annihilation_matrix(&space(6));
        assert_eq!(a[(0, 1)], ONE);
        assert!((a[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(a[(1, 0)], ZERO);
        let ada = a.adjoint() * &a;
        assert!((ada[(6, 6)].re - 6.0).abs() < 1e-12);
        assert!(max_abs_diff(ada.as_ref(), number_matrix(&space(6)).as_ref()) < 1e-12);
    }

    #[test]
    fn creation_raises_with_root_norm() {
        let s = space(8);
        let ad = creation_matrix(&s);
        for n in 0..8 {
            let v = crate::linalg::apply(ad.as_ref(), &StateVector::basis(9, n)).unwrap();
            assert!((v.norm() - ((n + 1) as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratures_are_hermitian_and_canonical_below_cutoff() {
        let s = space(10);
        let (x, p) = quadratures(&s);
        assert!((x[(0, 1)].re - 0.5).abs() < 1e-15);
        assert!(hermiticity_defect(x.as_ref()) < 1e-12);
        assert!(hermiticity_defect(p.as_ref()) < 1e-12);
        let c = commutator(x.as_ref(), p.as_ref());
        for i in 0..10 {
            for j in 0..10 {
                let expect = if i == j { C64::new(0.0, 0.5) } else { ZERO };
                assert!((c[(i, j)] - expect).norm() < 1e-12, "({i},{j})");
            }
        }
        // only the last diagonal entry is spoilt by truncation
        assert!((c[(10, 10)] - C64::new(0.0, 0.5)).norm() > 1.0);
    }

    #[test]
    fn sigma_eg_on_single_qubit() {
        let atoms = AtomicSystem::single(Atom::two_level(1.0, 0.1).unwrap());
        let s = transition_operator_matrix(&atoms, 0, 1, 0).unwrap();
        assert_eq!(s[(1, 0)], ONE);
        assert_eq!(s[(0, 1)], ZERO);
        let p = transition_operator_matrix(&atoms, 0, 1, 1).unwrap();
        assert_eq!(max_abs_diff((&p * &p).as_ref(), p.as_ref()), 0.0);
    }

    #[test]
    fn sigma_on_second_qubit_has_kronecker_structure() {
        let q = Atom::two_level(1.0, 0.0).unwrap();
        let atoms = AtomicSystem::new(alloc::vec![q.clone(), q]).unwrap();
        let s = transition_operator_matrix(&atoms, 1, 1, 0).unwrap();
        // (m1, G) -> (m1, E) for m1 in {G, E}: 0 -> 1 and 2 -> 3
        let mut nonzero = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                if s[(i, j)] != ZERO {
                    nonzero.push((i, j));
                }
            }
        }
        assert_eq!(nonzero, alloc::vec![(1, 0), (3, 2)]);
    }

    #[test]
    fn transition_operator_rejects_bad_indices() {
        let atoms = AtomicSystem::single(Atom::two_level(1.0, 0.0).unwrap());
        assert_eq!(
            transition_operator_matrix(&atoms, 1, 0, 0),
            Err(Error::AtomIndex { index: 1, count: 1 })
        );
        assert_eq!(
            transition_operator_matrix(&atoms, 0, 0, 2),
            Err(Error::LevelIndex {
                atom: 0,
                index: 2,
                levels: 2
            })
        );
    }

    #[test]
    fn atom_validation() {
        assert!(matches!(
            Atom::new(alloc::vec![0.0], alloc::vec![alloc::vec![0.0]]),
            Err(Error::TooFewLevels { .. })
        ));
        let asym = Atom::new(
            alloc::vec![0.0, 1.0],
            alloc::vec![alloc::vec![0.0, 0.1], alloc::vec![0.2, 0.0]],
        );
        assert!(matches!(asym, Err(Error::AsymmetricCoupling { .. })));
        let diag = Atom::new(
            alloc::vec![0.0, 1.0],
            alloc::vec![alloc::vec![0.3, 0.1], alloc::vec![0.1, 0.0]],
        );
        assert!(matches!(diag, Err(Error::DiagonalCoupling { .. })));
    }

    #[test]
    fn embeddings() {
        let field = FieldSpace::new(2, 4).unwrap();
        let q = Atom::two_level(1.0, 0.0).unwrap();
        let atoms = AtomicSystem::new(alloc::vec![q.clone(), q]).unwrap();
        let cs = CompositeSpace::new(field, atoms.clone());
        let id = embed_field_operator(identity(5).as_ref(), &cs).unwrap();
        assert_eq!(max_abs_diff(id.as_ref(), identity(20).as_ref()), 0.0);

        let a = embed_field_operator(annihilation_matrix(&field).as_ref(), &cs).unwrap();
        let sig = transition_operator_matrix(&atoms, 0, 1, 0).unwrap();
        let s = embed_atomic_operator(sig.as_ref(), &cs).unwrap();
        assert_eq!(max_abs(commutator(a.as_ref(), s.as_ref()).as_ref()), 0.0);
        assert_eq!(
            max_abs_diff(
                (&a * &s).as_ref(),
                kron(annihilation_matrix(&field).as_ref(), sig.as_ref()).as_ref()
            ),
            0.0
        );

        let n = number_matrix(&field);
        let tr = trace(embed_field_operator(n.as_ref(), &cs).unwrap().as_ref());
        assert!((tr.re - trace(n.as_ref()).re * 4.0).abs() < 1e-12);

        assert!(embed_field_operator(identity(3).as_ref(), &cs).is_err());
        assert!(embed_atomic_operator(identity(5).as_ref(), &cs).is_err());
    }

    fn max_abs(m: MatRef<'_, C64>) -> f64 {
        crate::linalg::max_abs(m)
    }

    #[test]
    fn flat_index_round_trip() {
        let atoms = AtomicSystem::from_parts(alloc::vec![
            (
                alloc::vec![0.0, 1.0, 2.0],
                alloc::vec![alloc::vec![0.0; 3]; 3]
            ),
            (alloc::vec![0.0, 1.0], alloc::vec![alloc::vec![0.0; 2]; 2]),
        ])
        .unwrap();
        let cs = CompositeSpace::new(FieldSpace::new(1, 3).unwrap(), atoms.clone());
        for i in 0..cs.dim() {
            let (n, m) = cs.unflatten(i);
            assert_eq!(cs.flatten(n, m), i);
            assert_eq!(atoms.flat_index(&atoms.multi_index(m)), m);
        }
        assert_eq!(atoms.strides(), alloc::vec![2, 1]);
    }

    #[test]
    fn multilevel_graph_is_bipartite() {
        let g = 0.1;
        let mut c = alloc::vec![alloc::vec![0.0; 4]; 4];
        for e in 1..3 {
            c[0][e] = g;
            c[e][0] = g;
            c[e][3] = g;
            c[3][e] = g;
        }
        let atom = Atom::new(alloc::vec![0.0, 0.9, 1.1, 2.0], c.clone()).unwrap();
        assert_eq!(atom.level_parities(), Some(alloc::vec![0, 1, 1, 0]));
        c[0][3] = g;
        c[3][0] = g;
        let triangle = Atom::new(alloc::vec![0.0, 0.9, 1.1, 2.0], c).unwrap();
        assert_eq!(triangle.level_parities(), None);
    }

    #[test]
    fn coherent_state_leakage_and_norm() {
        let alpha = C64::new(1.2, -0.7);
        let s = coherent_state(60, alpha);
        assert!((s.norm() - 1.0).abs() < 1e-12);
        assert!(coherent_leakage(60, alpha) < 1e-30);
        // closed form ⟨1|α⟩ = α e^{-|α|²/2}
        let expect = alpha * (-0.5 * alpha.norm_sqr()).exp();
        assert!((s[1] - expect).norm() < 1e-12);
        let leak = coherent_leakage(3, C64::new(1.0, 0.0));
        // 1 − e^{-1}(1 + 1 + 1/2)
        let exact = 1.0 - (-1.0f64).exp() * 2.5;
        assert!((leak - exact).abs() < 1e-14);
    }
}
