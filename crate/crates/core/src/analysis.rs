//! Diagnostics of field states and constructors for atomic target states.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_2_PI, PI};
use core::str::FromStr;
#[allow(unused_imports)]
use num_traits::Float;

use faer::Mat;

use crate::fock::{check_dim, CompositeSpace, FieldSpace};
use crate::linalg::{hermitian_eigen, StateVector, C64, ZERO};
use crate::{Error, Result};

/// Number statistics of a single-mode state.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisReport {
    /// `φ_n = ⟨n|φ⟩`.
    pub fock_amplitudes: Vec<C64>,
    /// `⟨a†a⟩`.
    pub n_av: f64,
    /// `(⟨n²⟩ − ⟨n⟩² − ⟨n⟩)/⟨n⟩`; NaN for the vacuum.
    pub mandel_q: f64,
    /// `Σ (−1)^n |φ_n|²`.
    pub parity_expectation: f64,
}

pub fn fock_statistics(state: &StateVector) -> AnalysisReport {
    let (mut n1, mut n2, mut parity) = (0.0, 0.0, 0.0);
    for (n, z) in state.as_slice().iter().enumerate() {
        let p = z.norm_sqr();
        let nf = n as f64;
        n1 += nf * p;
        n2 += nf * nf * p;
        parity += if n % 2 == 0 { p } else { -p };
    }
    let mandel_q = if n1 > 1e-14 {
        (n2 - n1 * n1 - n1) / n1
    } else {
        f64::NAN
    };
    AnalysisReport {
        fock_amplitudes: state.as_slice().to_vec(),
        n_av: n1,
        mandel_q,
        parity_expectation: parity,
    }
}

/// Poisson weights `n_av^n e^{−n_av}/n!` for `n = 0..=n_trunc`.
pub fn poisson_reference(n_av: f64, n_trunc: usize) -> Vec<f64> {
    (0..=n_trunc)
        .map(|n| {
            if n_av <= 0.0 {
                if n == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (n as f64 * n_av.ln() - n_av - libm::lgamma(n as f64 + 1.0)).exp()
            }
        })
        .collect()
}

/// Samples of `W(x + ip)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// Row-major in `x`: `values[ix * p.len() + ip]`.
    pub values: Vec<f64>,
    /// False when some grid point lies outside `|β|² ≤ 0.8 n_trunc` of the
    /// working space, where the truncated displacement is not trustworthy.
    pub reliable: bool,
}

impl WignerGrid {
    pub fn value(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.p.len() + ip]
    }

    /// `Σ W Δx Δp` for uniformly spaced axes.
    pub fn integral(&self) -> f64 {
        let step = |axis: &[f64]| {
            if axis.len() < 2 {
                0.0
            } else {
                (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64
            }
        };
        self.values.iter().sum::<f64>() * step(&self.x) * step(&self.p)
    }
}

/// Evaluates `W(β) = (2/π) ⟨ψ| D(β) Π D†(β) |ψ⟩` point by point.
///
/// `D(β) Π D†(β) = D(2β) Π`, and with `β = r e^{iθ}`,
/// `D(2β) = R(θ) exp(−4irP) R(θ)†` where `R(θ) = e^{iθ a†a}` and `P` is the
/// momentum quadrature. One eigendecomposition of `P` serves every grid point,
/// and each point costs a pair of projections onto the `P` eigenbasis.
#[derive(Clone, Debug)]
pub struct WignerEvaluator {
    /// Amplitudes up to the last nonzero one.
    support: Vec<C64>,
    working_dim: usize,
    momentum_values: Vec<f64>,
    momentum_vectors: Mat<C64>,
}

impl WignerEvaluator {
    /// `working_dim` pads the state with empty Fock levels; it must be at
    /// least the state dimension.
    pub fn new(state: &StateVector, working_dim: usize) -> Result<Self> {
        if working_dim < state.dim() {
            return Err(Error::DimensionMismatch {
                expected: state.dim(),
                found: working_dim,
            });
        }
        let field = FieldSpace::new(0, working_dim - 1)?;
        let (_, p) = crate::fock::quadratures(&field);
        let (momentum_values, momentum_vectors) = hermitian_eigen(p.as_ref())?;
        let amps = state.as_slice();
        let len = amps.iter().rposition(|z| *z != ZERO).map_or(1, |k| k + 1);
        Ok(Self {
            support: amps[..len].to_vec(),
            working_dim,
            momentum_values,
            momentum_vectors,
        })
    }

    pub fn working_dim(&self) -> usize {
        self.working_dim
    }

    pub fn value(&self, x: f64, p: f64) -> f64 {
        let r = x.hypot(p);
        let theta = p.atan2(x);
        let w = self.momentum_vectors.as_ref();
        let step = C64::from_polar(1.0, -theta);
        let mut phase = C64::new(1.0, 0.0);
        let rotated: Vec<C64> = self
            .support
            .iter()
            .map(|&z| {
                let out = z * phase;
                phase *= step;
                out
            })
            .collect();
        let mut total = ZERO;
        for k in 0..self.working_dim {
            let col = w.col(k);
            let mut plain = ZERO;
            let mut flipped = ZERO;
            for (n, &z) in rotated.iter().enumerate() {
                let term = col[n].conj() * z;
                plain += term;
                if n % 2 == 0 {
                    flipped += term;
                } else {
                    flipped -= term;
                }
            }
            total +=
                plain.conj() * flipped * C64::from_polar(1.0, -4.0 * r * self.momentum_values[k]);
        }
        FRAC_2_PI * total.re
    }
}

/// Wigner function on the grid `x × p`, working in the state's own dimension.
pub fn wigner(state: &StateVector, x: &[f64], p: &[f64]) -> Result<WignerGrid> {
    wigner_with_dim(state, x, p, state.dim())
}

pub fn wigner_with_dim(
    state: &StateVector,
    x: &[f64],
    p: &[f64],
    working_dim: usize,
) -> Result<WignerGrid> {
    state.check_normalized(1e-9)?;
    if x.iter().chain(p).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("wigner grid"));
    }
    let eval = WignerEvaluator::new(state, working_dim)?;
    let mut values = Vec::with_capacity(x.len() * p.len());
    for &xi in x {
        for &pi in p {
            values.push(eval.value(xi, pi));
        }
    }
    Ok(WignerGrid {
        x: x.to_vec(),
        p: p.to_vec(),
        values,
        reliable: grid_is_reliable(x, p, working_dim),
    })
}

pub fn grid_is_reliable(x: &[f64], p: &[f64], working_dim: usize) -> bool {
    let limit = 0.8 * working_dim.saturating_sub(1) as f64;
    let max_sq = |axis: &[f64]| axis.iter().fold(0.0f64, |m, v| m.max(v * v));
    max_sq(x) + max_sq(p) <= limit
}

/// Working dimension large enough to hold the state displaced by up to
/// `2 r_max`, with a few standard deviations of margin.
pub fn wigner_working_dim(state: &StateVector, r_max: f64) -> usize {
    let top = state
        .as_slice()
        .iter()
        .rposition(|z| z.norm_sqr() > 1e-16)
        .unwrap_or(0);
    let reach = (top as f64).sqrt() + 2.0 * r_max.abs();
    let needed = (reach * reach + 6.0 * reach + 16.0).ceil() as usize;
    // keeps |β|² ≤ 0.8 n_trunc at the grid corners
    let reliable = (r_max * r_max / 0.8).ceil() as usize + 1;
    needed.max(reliable).max(state.dim())
}

/// Named multi-qubit targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QubitTarget {
    /// `(|G…G⟩ + |E…E⟩)/√2`
    Ghz,
    /// Symmetrised single excitation.
    W,
    /// `|E…E⟩`
    AllExcited,
    /// `|+…+⟩`, `|+⟩ = (|G⟩ + |E⟩)/√2`
    AllPlus,
}

impl QubitTarget {
    pub const ALL: [QubitTarget; 4] = [
        QubitTarget::Ghz,
        QubitTarget::W,
        QubitTarget::AllExcited,
        QubitTarget::AllPlus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QubitTarget::Ghz => "ghz",
            QubitTarget::W => "w",
            QubitTarget::AllExcited => "all_excited",
            QubitTarget::AllPlus => "all_plus",
        }
    }
}

impl FromStr for QubitTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        QubitTarget::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "target",
                name: s.to_string(),
            })
    }
}

/// Named target on `n_atoms` qubits, lexicographic basis with `G = 0`.
pub fn named_target(which: QubitTarget, n_atoms: usize) -> Result<StateVector> {
    let min = match which {
        QubitTarget::Ghz | QubitTarget::W => 2,
        QubitTarget::AllExcited | QubitTarget::AllPlus => 1,
    };
    if n_atoms < min {
        return Err(Error::TooFewAtoms {
            target: which.name(),
            min,
            found: n_atoms,
        });
    }
    if n_atoms > 24 {
        return Err(Error::InvalidArgument("more than 24 qubits"));
    }
    let dim = 1usize << n_atoms;
    let mut amps = alloc::vec![ZERO; dim];
    match which {
        QubitTarget::Ghz => {
            amps[0] = C64::new(1.0, 0.0);
            amps[dim - 1] = C64::new(1.0, 0.0);
        }
        QubitTarget::W => {
            for j in 0..n_atoms {
                amps[1 << j] = C64::new(1.0, 0.0);
            }
        }
        QubitTarget::AllExcited => amps[dim - 1] = C64::new(1.0, 0.0),
        QubitTarget::AllPlus => amps.fill(C64::new(1.0, 0.0)),
    }
    StateVector::new(amps).normalized()
}

/// `cos(θ/2)|G⟩ + e^{iφ} sin(θ/2)|E⟩`.
pub fn bloch_target(theta: f64, phi: f64) -> StateVector {
    StateVector::new(alloc::vec![
        C64::new((0.5 * theta).cos(), 0.0),
        C64::from_polar((0.5 * theta).sin(), phi),
    ])
}

/// Fock number closest to a full `G → E` inversion at time `T` in the
/// resonant Jaynes-Cummings limit: `2√n g T = π(2k + 1)`.
pub fn jc_fock_resonance(g: f64, control_time: f64, k: usize, n_max: usize) -> Result<usize> {
    if !(g > 0.0 && control_time > 0.0) {
        return Err(Error::InvalidArgument(
            "g and control_time must be positive",
        ));
    }
    let root = PI * (2 * k + 1) as f64 / (2.0 * g * control_time);
    let n = (root * root).round();
    if n > n_max as f64 {
        return Err(Error::ResonanceBeyondCap {
            n: if n < usize::MAX as f64 {
                n as usize
            } else {
                usize::MAX
            },
            n_max,
        });
    }
    Ok(n as usize)
}

/// Reduced density matrix of the atoms for a composite pure state.
pub fn reduced_atomic_density(psi: &StateVector, space: &CompositeSpace) -> Result<Mat<C64>> {
    check_dim(space.dim(), psi.dim())?;
    let da = space.atom_dim();
    let amps = psi.as_slice();
    Ok(Mat::from_fn(da, da, |a, b| {
        (0..space.field.dim()).fold(ZERO, |acc, n| {
            acc + amps[n * da + a] * amps[n * da + b].conj()
        })
    }))
}

/// Von Neumann entropy (bits) of the atomic reduced state.
pub fn entanglement_entropy(psi: &StateVector, space: &CompositeSpace) -> Result<f64> {
    let rho = reduced_atomic_density(psi, space)?;
    let (values, _) = hermitian_eigen(rho.as_ref())?;
    Ok(values
        .into_iter()
        .filter(|&l| l > 1e-300)
        .map(|l| -l * l.log2())
        .sum())
}
