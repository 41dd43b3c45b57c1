//! Joint Hamiltonian of one field mode and a set of multilevel atoms, and the
//! named scenarios.
//!
//! ```text
//! H = ω_c a†a + Σ_j Σ_k ω_k^(j) σ_kk^(j) + Σ_j Σ_{k≠l} g_kl^(j) σ_kl^(j) X,   X = (a + a†)/2
//! ```
//!
//! Counter-rotating terms are always kept. Preset couplings are quoted as the
//! coefficient `g` of `σ (a + a†)`, the convention of the Rabi model, so they
//! enter the coupling matrix as `g_kl = 2g`.

use alloc::string::{String, ToString};
use core::f64::consts::PI;
use core::str::FromStr;
#[allow(unused_imports)]
use num_traits::Float;

use faer::Mat;

use crate::analysis::{bloch_target, named_target, QubitTarget};
use crate::fock::{Atom, AtomicSystem, CompositeSpace, FieldSpace};
use crate::linalg::{StateVector, C64, ZERO};
use crate::{Error, Result};

const NORM_TOL: f64 = 1e-10;

/// A complete control problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub label: String,
    /// Mode frequency. Every preset sets it to 1.
    pub omega_c: f64,
    pub atoms: AtomicSystem,
    pub field: FieldSpace,
    /// Units of `1/ω_c` when `omega_c = 1`.
    pub control_time: f64,
    pub initial_atomic: StateVector,
    pub target_atomic: StateVector,
}

impl ScenarioSpec {
    /// Scenario starting from the atomic ground state with `ω_c = 1`.
    pub fn new(
        atoms: AtomicSystem,
        field: FieldSpace,
        control_time: f64,
        target_atomic: StateVector,
    ) -> Result<Self> {
        let spec = Self {
            label: String::new(),
            omega_c: 1.0,
            initial_atomic: atoms.ground_state(),
            atoms,
            field,
            control_time,
            target_atomic,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.control_time.is_finite() || !self.omega_c.is_finite() {
            return Err(Error::NonFinite("control_time / omega_c"));
        }
        if self.control_time < 0.0 {
            return Err(Error::NegativeTime(self.control_time));
        }
        let d = self.atoms.dim();
        for state in [&self.initial_atomic, &self.target_atomic] {
            crate::fock::check_dim(d, state.dim())?;
            state.check_normalized(NORM_TOL)?;
        }
        Ok(())
    }

    pub fn composite_space(&self) -> CompositeSpace {
        CompositeSpace::new(self.field, self.atoms.clone())
    }
}

/// Dense Hermitian `H` on the composite space.
pub fn build_hamiltonian(spec: &ScenarioSpec) -> Result<Mat<C64>> {
    spec.validate()?;
    let space = spec.composite_space();
    let atoms = &spec.atoms;
    let d_atom = space.atom_dim();
    let d = space.dim();
    let n_top = spec.field.n_trunc();
    let mut h = Mat::from_fn(d, d, |_, _| ZERO);

    for i in 0..d {
        let (n, m) = space.unflatten(i);
        h[(i, i)] = C64::new(spec.omega_c * n as f64 + atoms.energy(m), 0.0);
    }

    let strides = atoms.strides();
    for (j, atom) in atoms.atoms().iter().enumerate() {
        for m in 0..d_atom {
            let digits = atoms.multi_index(m);
            let l = digits[j];
            for k in 0..atom.levels() {
                let g = atom.coupling(k, l);
                if k == l || g == 0.0 {
                    continue;
                }
                // σ_kl sends level l to level k on atom j
                let m_out = m + k * strides[j] - l * strides[j];
                for n in 0..=n_top {
                    let col = space.flatten(n, m);
                    if n > 0 {
                        let v = 0.5 * g * (n as f64).sqrt();
                        h[(space.flatten(n - 1, m_out), col)] += C64::new(v, 0.0);
                    }
                    if n < n_top {
                        let v = 0.5 * g * ((n + 1) as f64).sqrt();
                        h[(space.flatten(n + 1, m_out), col)] += C64::new(v, 0.0);
                    }
                }
            }
        }
    }
    Ok(h)
}

/// Diagonal joint parity operator `(−1)^(a†a + Σ colour)`, when the coupling
/// graphs of all atoms are bipartite.
pub fn joint_parity_operator(space: &CompositeSpace) -> Option<Mat<C64>> {
    let labels = space.parity_labels()?;
    let d = labels.len();
    Some(Mat::from_fn(d, d, |i, j| {
        if i != j {
            ZERO
        } else if labels[i] == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(-1.0, 0.0)
        }
    }))
}

/// Named scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    /// One resonant two-level atom, Bloch-sphere target.
    RabiResonant,
    /// Six-level ladder in the Jaynes-Cummings regime.
    MultilevelJc,
    /// Six-level ladder at resonant strong coupling.
    MultilevelRsc,
    /// Six-level ladder in the diabatic regime.
    MultilevelDr,
    /// `N_A` resonant qubits.
    Multiqubit,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::RabiResonant,
        Preset::MultilevelJc,
        Preset::MultilevelRsc,
        Preset::MultilevelDr,
        Preset::Multiqubit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::RabiResonant => "rabi_resonant",
            Preset::MultilevelJc => "multilevel_jc",
            Preset::MultilevelRsc => "multilevel_rsc",
            Preset::MultilevelDr => "multilevel_dr",
            Preset::Multiqubit => "multiqubit",
        }
    }

    /// Coupling used when none is supplied.
    pub fn default_coupling(self) -> Option<f64> {
        match self {
            Preset::RabiResonant => None,
            Preset::MultilevelJc => Some(0.001),
            Preset::MultilevelRsc => Some(0.1),
            Preset::MultilevelDr => Some(0.5),
            Preset::Multiqubit => Some(0.01),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "preset",
                name: s.to_string(),
            })
    }
}

/// Level energies `(G, E1..E4, F)` of the near-resonant ladder.
pub const RESONANT_LADDER: [f64; 6] = [0.0, 0.86, 0.92, 1.1, 1.2, 2.0];
/// Level energies `(G, E1..E4, F)` of the diabatic ladder.
pub const DIABATIC_LADDER: [f64; 6] = [0.0, 0.32, 0.35, 0.4, 0.42, 0.5];

/// Free parameters of a preset. Unused fields are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct PresetParams {
    pub g: Option<f64>,
    pub control_time: Option<f64>,
    pub theta: Option<f64>,
    pub phi: f64,
    pub n_atoms: Option<usize>,
    pub target: Option<QubitTarget>,
    pub n_max: usize,
    pub n_trunc: Option<usize>,
}

impl Default for PresetParams {
    fn default() -> Self {
        Self {
            g: None,
            control_time: None,
            theta: None,
            phi: 0.0,
            n_atoms: None,
            target: None,
            n_max: 80,
            n_trunc: None,
        }
    }
}

impl PresetParams {
    pub fn field(&self) -> Result<FieldSpace> {
        match self.n_trunc {
            Some(n_trunc) => FieldSpace::new(self.n_max, n_trunc),
            None => Ok(FieldSpace::with_default_buffer(self.n_max)),
        }
    }
}

/// Six-level ladder `G → E_i → F` with equal couplings on every allowed arrow.
pub fn ladder_atom(energies: &[f64; 6], g: f64) -> Result<Atom> {
    let mut c = alloc::vec![alloc::vec![0.0; 6]; 6];
    for e in 1..5 {
        for (a, b) in [(0, e), (e, 5)] {
            c[a][b] = 2.0 * g;
            c[b][a] = 2.0 * g;
        }
    }
    Atom::new(energies.to_vec(), c)
}

pub fn preset(name: Preset, params: &PresetParams) -> Result<ScenarioSpec> {
    let field = params.field()?;
    let control_time = params
        .control_time
        .ok_or(Error::MissingParameter("control_time"))?;
    let g = params
        .g
        .or(name.default_coupling())
        .ok_or(Error::MissingParameter("g"))?;

    let spec = match name {
        Preset::RabiResonant => {
            let theta = params.theta.ok_or(Error::MissingParameter("theta"))?;
            let atoms = AtomicSystem::single(Atom::two_level(1.0, 2.0 * g)?);
            ScenarioSpec::new(atoms, field, control_time, bloch_target(theta, params.phi))?
        }
        Preset::MultilevelJc | Preset::MultilevelRsc | Preset::MultilevelDr => {
            let energies = if name == Preset::MultilevelDr {
                &DIABATIC_LADDER
            } else {
                &RESONANT_LADDER
            };
            let atoms = AtomicSystem::single(ladder_atom(energies, g)?);
            let target = StateVector::basis(6, 5);
            ScenarioSpec::new(atoms, field, control_time, target)?
        }
        Preset::Multiqubit => {
            let n_atoms = params.n_atoms.ok_or(Error::MissingParameter("n_atoms"))?;
            let which = params.target.ok_or(Error::MissingParameter("target"))?;
            let target = named_target(which, n_atoms)?;
            let qubit = Atom::two_level(1.0, 2.0 * g)?;
            let atoms = AtomicSystem::new(alloc::vec![qubit; n_atoms])?;
            ScenarioSpec::new(atoms, field, control_time, target)?
        }
    };
    Ok(spec.with_label(name.name()))
}

/// Control time in units of `1/ω_c` for a time quoted in mode periods.
pub fn periods(fraction: f64) -> f64 {
    fraction * 2.0 * PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{
        annihilation_matrix, embed_atomic_operator, embed_field_operator, number_matrix,
        quadratures, transition_operator_matrix,
    };
    use crate::linalg::{hermiticity_defect, max_abs, max_abs_diff, scale};

    fn rabi(g: f64, n_max: usize) -> ScenarioSpec {
        preset(
            Preset::RabiResonant,
            &PresetParams {
                g: Some(g),
                control_time: Some(25.0),
                theta: Some(PI),
                n_max,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn rabi_preset_matches_textbook_rabi_hamiltonian() {
        let g = 0.2;
        let spec = rabi(g, 6);
        let h = build_hamiltonian(&spec).unwrap();
        let cs = spec.composite_space();
        let a = annihilation_matrix(&spec.field);
        let a_plus_ad = &a + a.adjoint();
        let sx = transition_operator_matrix(&spec.atoms, 0, 0, 1).unwrap()
            + transition_operator_matrix(&spec.atoms, 0, 1, 0).unwrap();
        let see = transition_operator_matrix(&spec.atoms, 0, 1, 1).unwrap();
        let reference = embed_field_operator(number_matrix(&spec.field).as_ref(), &cs).unwrap()
            + embed_atomic_operator(see.as_ref(), &cs).unwrap()
            + scale(
                crate::linalg::kron(a_plus_ad.as_ref(), sx.as_ref()).as_ref(),
                C64::new(g, 0.0),
            );
        assert!(max_abs_diff(h.as_ref(), reference.as_ref()) < 1e-14);
    }

    #[test]
    fn general_builder_matches_operator_sum_for_multilevel() {
        let spec = preset(
            Preset::MultilevelRsc,
            &PresetParams {
                control_time: Some(1.0),
                n_max: 3,
                ..Default::default()
            },
        )
        .unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        let cs = spec.composite_space();
        let (x, _) = quadratures(&spec.field);
        let mut reference = embed_field_operator(number_matrix(&spec.field).as_ref(), &cs).unwrap();
        let atom = &spec.atoms.atoms()[0];
        for k in 0..6 {
            let skk = transition_operator_matrix(&spec.atoms, 0, k, k).unwrap();
            reference += scale(
                embed_atomic_operator(skk.as_ref(), &cs).unwrap().as_ref(),
                C64::new(atom.energies()[k], 0.0),
            );
            for l in 0..6 {
                if k == l {
                    continue;
                }
                let skl = transition_operator_matrix(&spec.atoms, 0, k, l).unwrap();
                reference += scale(
                    crate::linalg::kron(x.as_ref(), skl.as_ref()).as_ref(),
                    C64::new(atom.coupling(k, l), 0.0),
                );
            }
        }
        assert!(max_abs_diff(h.as_ref(), reference.as_ref()) < 1e-14);
        assert!(hermiticity_defect(h.as_ref()) < 1e-12);
    }

    #[test]
    fn decoupled_hamiltonian_is_diagonal() {
        let spec = rabi(0.0, 4);
        let h = build_hamiltonian(&spec).unwrap();
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                let (n, m) = spec.composite_space().unflatten(i);
                let expect = if i == j { (n + m) as f64 } else { 0.0 };
                assert_eq!(h[(i, j)], C64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn parity_commutes_with_rabi_and_multiqubit() {
        let spec = rabi(0.3, 10);
        let h = build_hamiltonian(&spec).unwrap();
        let p = joint_parity_operator(&spec.composite_space()).unwrap();
        let c = crate::linalg::commutator(h.as_ref(), p.as_ref());
        assert!(max_abs(c.as_ref()) < 1e-10);

        let mq = preset(
            Preset::Multiqubit,
            &PresetParams {
                control_time: Some(1.0),
                n_atoms: Some(3),
                target: Some(QubitTarget::Ghz),
                n_max: 4,
                ..Default::default()
            },
        )
        .unwrap();
        let h = build_hamiltonian(&mq).unwrap();
        let p = joint_parity_operator(&mq.composite_space()).unwrap();
        assert!(max_abs(crate::linalg::commutator(h.as_ref(), p.as_ref()).as_ref()) < 1e-10);
    }

    #[test]
    fn preset_parameters() {
        let dr = preset(
            Preset::MultilevelDr,
            &PresetParams {
                control_time: Some(1.0),
                n_max: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let atom = &dr.atoms.atoms()[0];
        assert_eq!(&atom.energies()[1..], &[0.32, 0.35, 0.4, 0.42, 0.5]);
        assert_eq!(atom.coupling(0, 1), 1.0);
        assert_eq!(atom.coupling(0, 5), 0.0);
        assert_eq!(atom.coupling(1, 2), 0.0);
        assert_eq!(atom.coupling(3, 5), 1.0);
        assert_eq!(dr.target_atomic, StateVector::basis(6, 5));

        let ground = preset(
            Preset::RabiResonant,
            &PresetParams {
                g: Some(0.1),
                control_time: Some(1.0),
                theta: Some(0.0),
                n_max: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(ground.target_atomic, ground.initial_atomic);

        let ghz = preset(
            Preset::Multiqubit,
            &PresetParams {
                control_time: Some(1.0),
                n_atoms: Some(3),
                target: Some(QubitTarget::Ghz),
                n_max: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        for k in 0..8 {
            let expect = if k == 0 || k == 7 { s } else { 0.0 };
            assert!((ghz.target_atomic[k].re - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn preset_errors() {
        assert!(matches!(
            "nope".parse::<Preset>(),
            Err(Error::UnknownName { .. })
        ));
        let missing = preset(
            Preset::RabiResonant,
            &PresetParams {
                control_time: Some(1.0),
                theta: Some(1.0),
                ..Default::default()
            },
        );
        assert_eq!(missing, Err(Error::MissingParameter("g")));
        let negative = preset(
            Preset::MultilevelDr,
            &PresetParams {
                control_time: Some(-1.0),
                n_max: 2,
                ..Default::default()
            },
        );
        assert_eq!(negative, Err(Error::NegativeTime(-1.0)));
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
    }
}
