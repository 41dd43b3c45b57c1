//! The control eigenproblem.
//!
//! For a control time `T`, the transition operator `T_fi = ⟨f|U(T)|i⟩` acts on
//! the field alone. The probability of finding the atoms in `|f⟩` with at most
//! `N_max` photons left in the field, starting from `|φ⟩ ⊗ |i⟩`, is
//! `⟨φ|M|φ⟩` with `M = T_fi† Π T_fi`. Maximising over normalised `|φ⟩` is an
//! eigenvalue problem: the top eigenvalue is the fidelity, its eigenvector the
//! optimal field state.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use faer::{Mat, MatRef};

use crate::fock::{check_dim, CoherentFamily, CompositeSpace};
use crate::linalg::{hermitian_eigen, hermiticity_defect, max_abs, StateVector, C64, ZERO};
use crate::model::{build_hamiltonian, ScenarioSpec};
use crate::propagator::{eigendecompose, eigendecompose_sectors, SpectralDecomposition};
use crate::{Error, Result};

/// `T[n, m] = (⟨f| ⊗ ⟨n|) U (|i⟩ ⊗ |m⟩)` from a composite propagator.
pub fn transition_operator(
    u: MatRef<'_, C64>,
    space: &CompositeSpace,
    initial: &StateVector,
    target: &StateVector,
) -> Result<Mat<C64>> {
    check_dim(space.dim(), u.nrows())?;
    check_dim(space.dim(), u.ncols())?;
    check_dim(space.atom_dim(), initial.dim())?;
    check_dim(space.atom_dim(), target.dim())?;
    let df = space.field.dim();
    let da = space.atom_dim();
    Ok(Mat::from_fn(df, df, |n, m| {
        let mut acc = ZERO;
        for (a, fa) in target.as_slice().iter().enumerate() {
            if *fa == ZERO {
                continue;
            }
            let row = n * da + a;
            let mut inner = ZERO;
            for (b, ib) in initial.as_slice().iter().enumerate() {
                inner += u[(row, m * da + b)] * ib;
            }
            acc += fa.conj() * inner;
        }
        acc
    }))
}

/// `M = T† Π T` with `Π` the projector on Fock states `n ≤ n_max`.
pub fn control_operator(t_fi: MatRef<'_, C64>, n_max: usize) -> Result<Mat<C64>> {
    let dim = t_fi.nrows();
    if n_max >= dim {
        return Err(Error::NMaxOutOfRange { n_max, dim });
    }
    let rows = t_fi.subrows(0, n_max + 1);
    Ok(gram(rows))
}

/// `B† B`, made exactly Hermitian.
fn gram(b: MatRef<'_, C64>) -> Mat<C64> {
    let mut m = b.adjoint() * b;
    let d = m.nrows();
    for j in 0..d {
        m[(j, j)] = C64::new(m[(j, j)].re, 0.0);
        for i in j + 1..d {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    m
}

/// Which initial field states the eigenproblem ranges over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Restriction {
    /// Fock components `n ≤ N_max` only: the top block of `M`.
    #[default]
    Projected,
    /// The whole truncated field space.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentBaseline {
    /// `max ⟨α|M|α⟩` over the admissible disk.
    pub fidelity: f64,
    pub alpha: C64,
}

/// Eigen-solution of the control problem.
#[derive(Clone, Debug)]
pub struct ControlSolution {
    /// Descending eigenvalues.
    pub spectrum: Vec<f64>,
    /// Orthonormal field states matching `spectrum`, each with its largest
    /// amplitude real and positive.
    pub states: Vec<StateVector>,
    pub n_max: usize,
    pub restriction: Restriction,
    pub baseline: Option<CoherentBaseline>,
}

impl ControlSolution {
    pub fn fidelity(&self) -> f64 {
        self.spectrum[0]
    }

    pub fn optimal_state(&self) -> &StateVector {
        &self.states[0]
    }
}

/// Top `count` eigenpairs of `M` (restricted to `n ≤ n_max` under
/// [`Restriction::Projected`]). States are returned in the full dimension of
/// `M`.
pub fn solve_optimal(
    m: MatRef<'_, C64>,
    n_max: usize,
    count: usize,
    restriction: Restriction,
) -> Result<ControlSolution> {
    let dim = m.nrows();
    check_dim(dim, m.ncols())?;
    if n_max >= dim {
        return Err(Error::NMaxOutOfRange { n_max, dim });
    }
    let defect = hermiticity_defect(m);
    if defect > 1e-10 * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let sub = match restriction {
        Restriction::Projected => m.submatrix(0, 0, n_max + 1, n_max + 1),
        Restriction::Full => m,
    };
    let (values, vectors) = hermitian_eigen(sub)?;
    let k = sub.nrows();
    let count = count.clamp(1, k);
    let mut spectrum = Vec::with_capacity(count);
    let mut states = Vec::with_capacity(count);
    for c in (k - count..k).rev() {
        spectrum.push(values[c]);
        let mut amps = alloc::vec![ZERO; dim];
        for (i, a) in amps.iter_mut().take(k).enumerate() {
            *a = vectors[(i, c)];
        }
        let mut state = StateVector::new(amps);
        state.fix_phase();
        states.push(state);
    }
    Ok(ControlSolution {
        spectrum,
        states,
        n_max,
        restriction,
        baseline: None,
    })
}

/// Top-left `(n_max + 1)²` block of `M`.
pub fn restricted_block(m: MatRef<'_, C64>, n_max: usize) -> Mat<C64> {
    m.submatrix(0, 0, n_max + 1, n_max + 1).to_owned()
}

/// Grid and stopping rule for searches over coherent amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentGrid {
    /// Radii sampled on `[0, √n_max]`.
    pub radial: usize,
    /// Phases sampled on `[0, 2π)`.
    pub angular: usize,
    /// Pattern-search stops once the step is below this.
    pub tolerance: f64,
}

impl Default for CoherentGrid {
    fn default() -> Self {
        Self {
            radial: 200,
            angular: 128,
            tolerance: 1e-4,
        }
    }
}

impl CoherentGrid {
    fn points(&self, radius: f64) -> Vec<C64> {
        let radial = self.radial.max(2);
        let angular = self.angular.max(1);
        let mut pts = Vec::with_capacity(1 + (radial - 1) * angular);
        pts.push(ZERO);
        for ir in 1..radial {
            let r = radius * ir as f64 / (radial - 1) as f64;
            for ip in 0..angular {
                pts.push(C64::from_polar(r, 2.0 * PI * ip as f64 / angular as f64));
            }
        }
        pts
    }

    fn spacing(&self, radius: f64) -> f64 {
        let dr = radius / (self.radial.max(2) - 1) as f64;
        let arc = 2.0 * PI * radius / self.angular.max(1) as f64;
        dr.max(arc.min(2.0 * dr)).max(self.tolerance)
    }
}

const REFINED_CANDIDATES: usize = 4;

/// Maximum of `f` on the disk `|α| ≤ radius`: coarse polar grid, then
/// compass search from the best few grid points.
fn maximize_on_disk<F: FnMut(C64) -> f64>(
    radius: f64,
    grid: &CoherentGrid,
    mut f: F,
) -> (f64, C64) {
    let mut scored: Vec<(f64, C64)> = grid.points(radius).into_iter().map(|a| (f(a), a)).collect();
    refine_candidates(radius, grid, &mut scored, f)
}

fn refine_candidates<F: FnMut(C64) -> f64>(
    radius: f64,
    grid: &CoherentGrid,
    scored: &mut [(f64, C64)],
    mut f: F,
) -> (f64, C64) {
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let clamp = |a: C64| {
        let r = a.norm();
        if r > radius {
            a * (radius / r)
        } else {
            a
        }
    };
    let dirs: [C64; 8] = {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        [
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, -1.0),
            C64::new(s, s),
            C64::new(-s, s),
            C64::new(s, -s),
            C64::new(-s, -s),
        ]
    };
    let mut best = scored[0];
    for &(v0, a0) in scored.iter().take(REFINED_CANDIDATES) {
        let (mut v, mut a) = (v0, a0);
        let mut h = 0.5 * grid.spacing(radius);
        let mut guard = 0;
        while h >= grid.tolerance && guard < 10_000 {
            guard += 1;
            let mut step_best = (v, a);
            for d in dirs {
                let cand = clamp(a + d * h);
                let val = f(cand);
                if val > step_best.0 {
                    step_best = (val, cand);
                }
            }
            if step_best.0 > v {
                (v, a) = step_best;
            } else {
                h *= 0.5;
            }
        }
        if v > best.0 {
            best = (v, a);
        }
    }
    best
}

/// Best coherent state `⟨α|M|α⟩` with `|α|² ≤ n_max`.
///
/// Coherent states live in the full dimension of `M`, renormalised after
/// truncation. Their tails may reach past `n_max`.
pub fn coherent_baseline(
    m: MatRef<'_, C64>,
    n_max: usize,
    grid: &CoherentGrid,
) -> CoherentBaseline {
    let dim = m.nrows();
    let family = CoherentFamily::new(dim);
    let mut buf = alloc::vec![ZERO; dim];
    let mut mv = alloc::vec![ZERO; dim];
    let objective = |alpha: C64, buf: &mut [C64], mv: &mut [C64]| {
        family.fill(alpha, buf);
        quadratic_form(m, buf, mv)
    };
    let (fidelity, alpha) = maximize_on_disk((n_max as f64).sqrt(), grid, |a| {
        objective(a, &mut buf, &mut mv)
    });
    CoherentBaseline { fidelity, alpha }
}

/// `Re ⟨x|M|x⟩`.
fn quadratic_form(m: MatRef<'_, C64>, x: &[C64], scratch: &mut [C64]) -> f64 {
    for s in scratch.iter_mut() {
        *s = ZERO;
    }
    for (j, &xj) in x.iter().enumerate() {
        if xj == ZERO {
            continue;
        }
        let col = m.col(j);
        for (i, s) in scratch.iter_mut().enumerate() {
            *s += col[i] * xj;
        }
    }
    x.iter()
        .zip(scratch.iter())
        .fold(0.0, |acc, (a, b)| acc + (a.conj() * b).re)
}

/// `α = ⟨X + iP⟩ = ⟨a⟩`.
pub fn coherent_approximation(phi: &StateVector) -> C64 {
    let amps = phi.as_slice();
    (0..amps.len().saturating_sub(1)).fold(ZERO, |acc, n| {
        acc + amps[n].conj() * amps[n + 1] * ((n + 1) as f64).sqrt()
    })
}

/// `⟨ψ| diag((−1)^n) |ψ⟩`.
pub fn fock_parity(state: &StateVector) -> f64 {
    state
        .as_slice()
        .iter()
        .enumerate()
        .map(|(n, z)| {
            if n % 2 == 0 {
                z.norm_sqr()
            } else {
                -z.norm_sqr()
            }
        })
        .sum()
}

/// `max_α |⟨α|ψ⟩|²` over `|α|² ≤ n_max` and the maximiser.
pub fn localization_score(state: &StateVector, n_max: usize, grid: &CoherentGrid) -> (f64, C64) {
    let family = CoherentFamily::new(state.dim());
    let mut buf = alloc::vec![ZERO; state.dim()];
    maximize_on_disk((n_max as f64).sqrt(), grid, |a| {
        family.fill(a, &mut buf);
        overlap(&buf, state.as_slice()).norm_sqr()
    })
}

fn overlap(bra: &[C64], ket: &[C64]) -> C64 {
    bra.iter()
        .zip(ket)
        .fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
}

pub const PARITY_PHASES: usize = 64;
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct ParitySuperposition {
    pub state: StateVector,
    /// False when the top pair was not a near-degenerate opposite-parity pair
    /// and `state` is the unmodified optimal state.
    pub superposed: bool,
    /// Relative phase of the second state.
    pub chi: f64,
    /// Best coherent-state overlap of `state`.
    pub score: f64,
    pub alpha: C64,
}

/// Combines the top two eigenstates `(φ₀ + e^{iχ} φ₁)/√2` when they are almost
/// degenerate and of opposite Fock parity, choosing `χ` for the best
/// coherent-state overlap.
pub fn parity_superposition(
    solution: &ControlSolution,
    degeneracy_tol: f64,
    grid: &CoherentGrid,
) -> ParitySuperposition {
    let phi0 = &solution.states[0];
    let fallback = || {
        let (score, alpha) = localization_score(phi0, solution.n_max, grid);
        ParitySuperposition {
            state: phi0.clone(),
            superposed: false,
            chi: 0.0,
            score,
            alpha,
        }
    };
    if solution.states.len() < 2 {
        return fallback();
    }
    let phi1 = &solution.states[1];
    let (p0, p1) = (fock_parity(phi0), fock_parity(phi1));
    let gap = solution.spectrum[0] - solution.spectrum[1];
    if !(gap < degeneracy_tol && p0.abs() > 0.99 && p1.abs() > 0.99 && p0 * p1 < 0.0) {
        return fallback();
    }

    let radius = (solution.n_max as f64).sqrt();
    let family = CoherentFamily::new(phi0.dim());
    let mut buf = alloc::vec![ZERO; phi0.dim()];
    let points = grid.points(radius);
    let overlaps: Vec<(C64, C64)> = points
        .iter()
        .map(|&a| {
            family.fill(a, &mut buf);
            (
                overlap(&buf, phi0.as_slice()),
                overlap(&buf, phi1.as_slice()),
            )
        })
        .collect();

    let mut best_chi = 0.0;
    let mut best_score = f64::NEG_INFINITY;
    for k in 0..PARITY_PHASES {
        let chi = 2.0 * PI * k as f64 / PARITY_PHASES as f64;
        let w = C64::from_polar(1.0, chi);
        let score = overlaps
            .iter()
            .map(|(o0, o1)| 0.5 * (o0 + w * o1).norm_sqr())
            .fold(f64::NEG_INFINITY, f64::max);
        if score > best_score {
            best_score = score;
            best_chi = chi;
        }
    }
    let w = C64::from_polar(1.0, best_chi);
    let mut state = phi0.add_scaled(w, phi1);
    // orthonormal inputs, so this only removes rounding
    let _ = state.normalize();
    let mut scored: Vec<(f64, C64)> = points
        .iter()
        .zip(&overlaps)
        .map(|(&a, (o0, o1))| (0.5 * (o0 + w * o1).norm_sqr(), a))
        .collect();
    let (score, alpha) = refine_candidates(radius, grid, &mut scored, |a| {
        family.fill(a, &mut buf);
        overlap(&buf, state.as_slice()).norm_sqr()
    });
    ParitySuperposition {
        state,
        superposed: true,
        chi: best_chi,
        score,
        alpha,
    }
}

/// How many eigenpairs to keep and whether to run the coherent search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub count: usize,
    pub restriction: Restriction,
    pub baseline: Option<CoherentGrid>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            count: 2,
            restriction: Restriction::Projected,
            baseline: None,
        }
    }
}

/// A scenario together with the spectral decomposition of its Hamiltonian.
///
/// Evaluating the control problem at any control time, or for any other pair
/// of atomic states, reuses the decomposition.
#[derive(Clone, Debug)]
pub struct ScenarioSolver {
    spec: ScenarioSpec,
    space: CompositeSpace,
    decomposition: Arc<SpectralDecomposition>,
    /// `V† (|i⟩ ⊗ |m⟩)` for every Fock index `m`.
    initial_projection: Mat<C64>,
    /// `V† (|f⟩ ⊗ |n⟩)` for `n ≤ n_max`.
    target_projection: Mat<C64>,
}

impl ScenarioSolver {
    /// Builds and diagonalises the Hamiltonian, one parity sector at a time
    /// when the coupling graphs allow it.
    pub fn new(spec: ScenarioSpec) -> Result<Self> {
        let decomposition = Arc::new(decompose_scenario(&spec)?);
        Self::with_decomposition(spec, decomposition)
    }

    /// Reuses a decomposition of the same Hamiltonian.
    pub fn with_decomposition(
        spec: ScenarioSpec,
        decomposition: Arc<SpectralDecomposition>,
    ) -> Result<Self> {
        spec.validate()?;
        let space = spec.composite_space();
        check_dim(space.dim(), decomposition.dim())?;
        let initial_projection = project_atomic(
            &decomposition,
            &space,
            &spec.initial_atomic,
            space.field.dim(),
        );
        let target_projection = project_atomic(
            &decomposition,
            &space,
            &spec.target_atomic,
            spec.field.n_max() + 1,
        );
        Ok(Self {
            spec,
            space,
            decomposition,
            initial_projection,
            target_projection,
        })
    }

    /// Same Hamiltonian, different initial and target atomic states.
    pub fn retarget(&self, initial: StateVector, target: StateVector) -> Result<Self> {
        let mut spec = self.spec.clone();
        spec.initial_atomic = initial;
        spec.target_atomic = target;
        Self::with_decomposition(spec, self.decomposition.clone())
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn decomposition(&self) -> &Arc<SpectralDecomposition> {
        &self.decomposition
    }

    /// Rows `n ≤ n_max` of `T_fi(t)`, all columns.
    pub fn transition_rows(&self, t: f64) -> Mat<C64> {
        let phases = self.decomposition.phases(t);
        let wi = self.initial_projection.as_ref();
        let scaled = Mat::from_fn(wi.nrows(), wi.ncols(), |k, m| wi[(k, m)] * phases[k]);
        self.target_projection.adjoint() * &scaled
    }

    /// `M(t)` on the full truncated field space.
    pub fn control_operator(&self, t: f64) -> Mat<C64> {
        gram(self.transition_rows(t).as_ref())
    }

    /// Solves the control problem at time `t`.
    pub fn solve_at(&self, t: f64, options: &SolveOptions) -> Result<ControlSolution> {
        let m = self.control_operator(t);
        let n_max = self.spec.field.n_max();
        let mut solution = solve_optimal(m.as_ref(), n_max, options.count, options.restriction)?;
        if let Some(grid) = &options.baseline {
            solution.baseline = Some(coherent_baseline(m.as_ref(), n_max, grid));
        }
        Ok(solution)
    }

    /// Solves at the scenario's own control time.
    pub fn solve(&self, options: &SolveOptions) -> Result<ControlSolution> {
        self.solve_at(self.spec.control_time, options)
    }

    /// `|field⟩ ⊗ |i⟩` on the composite space.
    pub fn initial_composite(&self, field: &StateVector) -> Result<StateVector> {
        self.space.product(field, &self.spec.initial_atomic)
    }

    /// `Σ_{n ≤ cap} |⟨atomic, n|ψ⟩|²`, all Fock levels when `cap` is `None`.
    pub fn atomic_population(
        &self,
        psi: &StateVector,
        atomic: &StateVector,
        cap: Option<usize>,
    ) -> Result<f64> {
        check_dim(self.space.dim(), psi.dim())?;
        check_dim(self.space.atom_dim(), atomic.dim())?;
        let da = self.space.atom_dim();
        let top = cap
            .unwrap_or(self.spec.field.n_trunc())
            .min(self.spec.field.n_trunc());
        let amps = psi.as_slice();
        Ok((0..=top)
            .map(|n| {
                atomic
                    .as_slice()
                    .iter()
                    .enumerate()
                    .fold(ZERO, |acc, (a, fa)| acc + fa.conj() * amps[n * da + a])
                    .norm_sqr()
            })
            .sum())
    }

    /// Propagates `|φ⟩ ⊗ |i⟩` to time `t` and returns the weight on
    /// `Π ⊗ |f⟩⟨f|`. This goes through the state, not through `M`.
    pub fn forward_fidelity(&self, phi: &StateVector, t: f64) -> Result<f64> {
        let psi0 = self.initial_composite(phi)?;
        let psi = self.decomposition.evolve_state(&psi0, t)?;
        self.atomic_population(
            &psi,
            &self.spec.target_atomic,
            Some(self.spec.field.n_max()),
        )
    }

    /// Population of an atomic state over time for the initial field `phi`,
    /// with no photon-number cap.
    pub fn population_series(
        &self,
        phi: &StateVector,
        atomic: &StateVector,
        times: &[f64],
    ) -> Result<Vec<f64>> {
        let psi0 = self.initial_composite(phi)?;
        let coeffs = self.decomposition.to_eigenbasis(&psi0)?;
        let proj = project_atomic(
            &self.decomposition,
            &self.space,
            atomic,
            self.space.field.dim(),
        );
        let phases_times: Vec<f64> = times.to_vec();
        Ok(phases_times
            .iter()
            .map(|&t| {
                let phases = self.decomposition.phases(t);
                let mut total = 0.0;
                for n in 0..proj.ncols() {
                    let col = proj.col(n);
                    let mut amp = ZERO;
                    for k in 0..coeffs.len() {
                        amp += col[k].conj() * phases[k] * coeffs[k];
                    }
                    total += amp.norm_sqr();
                }
                total
            })
            .collect())
    }
}

/// Decomposition of a scenario's Hamiltonian, split by joint parity when
/// available.
pub fn decompose_scenario(spec: &ScenarioSpec) -> Result<SpectralDecomposition> {
    let h = build_hamiltonian(spec)?;
    match spec.composite_space().parity_labels() {
        Some(labels) => eigendecompose_sectors(h.as_ref(), &labels),
        None => eigendecompose(h.as_ref()),
    }
}

/// Columns `V† (|atomic⟩ ⊗ |n⟩)` for `n < count`.
fn project_atomic(
    decomp: &SpectralDecomposition,
    space: &CompositeSpace,
    atomic: &StateVector,
    count: usize,
) -> Mat<C64> {
    let v = decomp.eigenvectors();
    let da = space.atom_dim();
    let nz: Vec<(usize, C64)> = atomic
        .as_slice()
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, z)| *z != ZERO)
        .collect();
    Mat::from_fn(decomp.dim(), count, |k, n| {
        nz.iter()
            .fold(ZERO, |acc, &(a, z)| acc + v[(n * da + a, k)].conj() * z)
    })
}
