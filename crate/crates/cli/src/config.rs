//! Run configuration: a TOML document naming a scenario, the tasks to run and
//! optional sweep axes and numerical overrides.
//!
//! ```toml
//! preset = "rabi_resonant"
//! g = 0.001
//! T = 25.0
//! theta = 3.14159265
//! n_max = 80
//! tasks = ["solve", "baseline"]
//!
//! [[sweep]]
//! param = "g"
//! start = 0.001
//! stop = 0.2
//! count = 40
//! scale = "log"
//! ```
//!
//! Complex amplitudes in custom scenarios are written as `[re, im]` pairs.

use std::fmt;
use std::str::FromStr;

use fieldctl_core::analysis::QubitTarget;
use fieldctl_core::control::{CoherentGrid, Restriction};
use fieldctl_core::fock::{Atom, AtomicSystem, FieldSpace};
use fieldctl_core::model::{preset, Preset, PresetParams, ScenarioSpec};
use fieldctl_core::{Error as CoreError, StateVector, C64};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self::Invalid {
            field: field.into(),
            message: message.to_string(),
        }
    }

    /// The offending field, when the error is a validation failure.
    pub fn field(&self) -> Option<&str> {
        match self {
            Self::Invalid { field, .. } => Some(field),
            Self::Syntax(_) => None,
        }
    }
}

/// Attributes a core error to the config field that caused it.
fn from_core(err: CoreError) -> ConfigError {
    let field = match &err {
        CoreError::NegativeTime(_) => "control_time",
        CoreError::MissingParameter(name) => name,
        CoreError::InvalidFieldSpace { .. } => "n_trunc",
        CoreError::TooFewAtoms { .. } => "n_atoms",
        CoreError::UnknownName { kind, .. } => kind,
        CoreError::NonFinite(_) => "control_time",
        _ => "scenario",
    };
    ConfigError::invalid(field, err)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Solve,
    Baseline,
    Wigner,
    Evolve,
    Sweep,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Solve => "solve",
            Task::Baseline => "baseline",
            Task::Wigner => "wigner",
            Task::Evolve => "evolve",
            Task::Sweep => "sweep",
        }
    }
}

/// Scalar parameters a sweep axis may vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "g")]
    G,
    #[serde(rename = "T", alias = "control_time")]
    ControlTime,
    #[serde(rename = "theta")]
    Theta,
    #[serde(rename = "phi")]
    Phi,
    #[serde(rename = "n_atoms")]
    NAtoms,
    #[serde(rename = "n_max")]
    NMax,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::G => "g",
            SweepParam::ControlTime => "T",
            SweepParam::Theta => "theta",
            SweepParam::Phi => "phi",
            SweepParam::NAtoms => "n_atoms",
            SweepParam::NMax => "n_max",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepParam::NAtoms | SweepParam::NMax)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        match self.scale {
            Scale::Linear => fieldctl_core::linalg::linspace(self.start, self.stop, self.count),
            Scale::Log => {
                let mut v: Vec<f64> =
                    fieldctl_core::linalg::linspace(self.start.ln(), self.stop.ln(), self.count)
                        .into_iter()
                        .map(f64::exp)
                        .collect();
                if let Some(first) = v.first_mut() {
                    *first = self.start;
                }
                if self.count > 1 {
                    v[self.count - 1] = self.stop;
                }
                v
            }
        }
    }

    fn validate(&self, field: &str) -> Result<(), ConfigError> {
        if self.count == 0 {
            return Err(ConfigError::invalid(
                format!("{field}.count"),
                "must be positive",
            ));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(ConfigError::invalid(field, "start and stop must be finite"));
        }
        if self.scale == Scale::Log && (self.start <= 0.0 || self.stop <= 0.0) {
            return Err(ConfigError::invalid(
                format!("{field}.scale"),
                "log scale needs positive start and stop",
            ));
        }
        if self.param.is_integer() {
            let integral = self.values().iter().all(|v| v.fract() == 0.0 && *v >= 0.0);
            if self.scale == Scale::Log || !integral {
                return Err(ConfigError::invalid(
                    field,
                    format!(
                        "{} takes linearly spaced non-negative integers",
                        self.param.name()
                    ),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestrictionName {
    #[default]
    Projected,
    Full,
}

impl From<RestrictionName> for Restriction {
    fn from(r: RestrictionName) -> Self {
        match r {
            RestrictionName::Projected => Restriction::Projected,
            RestrictionName::Full => Restriction::Full,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub restriction: RestrictionName,
    /// Eigenpairs kept in `solution.json`.
    pub eigen_count: usize,
    pub grid_radial: usize,
    pub grid_angular: usize,
    pub refine_tolerance: f64,
    pub degeneracy_tol: f64,
    /// Superpose a near-degenerate opposite-parity pair before taking the
    /// coherent approximation.
    pub superpose: bool,
}

impl Default for Numerics {
    fn default() -> Self {
        let grid = CoherentGrid::default();
        Self {
            restriction: RestrictionName::Projected,
            eigen_count: 2,
            grid_radial: grid.radial,
            grid_angular: grid.angular,
            refine_tolerance: grid.tolerance,
            degeneracy_tol: fieldctl_core::control::DEFAULT_DEGENERACY_TOL,
            superpose: true,
        }
    }
}

impl Numerics {
    pub fn grid(&self) -> CoherentGrid {
        CoherentGrid {
            radial: self.grid_radial,
            angular: self.grid_angular,
            tolerance: self.refine_tolerance,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.eigen_count == 0 {
            return Err(ConfigError::invalid(
                "numerics.eigen_count",
                "must be positive",
            ));
        }
        if self.grid_radial < 2 || self.grid_angular == 0 {
            return Err(ConfigError::invalid(
                "numerics.grid_radial",
                "coherent grid needs at least 2 radii and 1 phase",
            ));
        }
        if self.refine_tolerance.is_nan() || self.refine_tolerance <= 0.0 {
            return Err(ConfigError::invalid(
                "numerics.refine_tolerance",
                "must be positive",
            ));
        }
        if self.degeneracy_tol.is_nan() || self.degeneracy_tol < 0.0 {
            return Err(ConfigError::invalid(
                "numerics.degeneracy_tol",
                "must be non-negative",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub t_start: f64,
    pub t_stop: f64,
    pub points: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            t_start: 0.0,
            t_stop: 4.0 * std::f64::consts::PI,
            points: 401,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WignerSource {
    #[default]
    Optimal,
    Superposition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WignerConfig {
    /// Half-width of the square `x, p` window; derived from `n_av` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extent: Option<f64>,
    pub points: usize,
    pub state: WignerSource,
}

impl Default for WignerConfig {
    fn default() -> Self {
        Self {
            extent: None,
            points: 121,
            state: WignerSource::Optimal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub energies: Vec<f64>,
    pub couplings: Vec<Vec<f64>>,
}

/// A scenario spelled out level by level instead of a preset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomScenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub atoms: Vec<AtomConfig>,
    /// Defaults to the atomic ground state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<[f64; 2]>>,
    pub target: Vec<[f64; 2]>,
}

fn complex_state(field: &str, pairs: &[[f64; 2]]) -> Result<StateVector, ConfigError> {
    let state = StateVector::new(pairs.iter().map(|&[re, im]| C64::new(re, im)).collect());
    state
        .check_normalized(1e-8)
        .map_err(|e| ConfigError::invalid(field, e))?;
    Ok(state)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(
        default,
        rename = "T",
        alias = "control_time",
        skip_serializing_if = "Option::is_none"
    )]
    pub control_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_trunc: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_atoms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default)]
    pub tasks: Vec<Task>,
    /// Output directory; the `--out` flag takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<CustomScenario>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepAxis>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub wigner: WignerConfig,
}

/// Fully resolved scalar parameters of one scenario instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Point {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(rename = "T")]
    pub control_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    pub phi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_atoms: Option<usize>,
    pub n_max: usize,
    pub n_trunc: Option<usize>,
}

impl Point {
    pub fn with(mut self, param: SweepParam, value: f64) -> Self {
        match param {
            SweepParam::G => self.g = Some(value),
            SweepParam::ControlTime => self.control_time = Some(value),
            SweepParam::Theta => self.theta = Some(value),
            SweepParam::Phi => self.phi = value,
            SweepParam::NAtoms => self.n_atoms = Some(value as usize),
            SweepParam::NMax => self.n_max = value as usize,
        }
        self
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc.unwrap_or(2 * self.n_max)
    }
}

/// Identifies the Hamiltonian of a point: everything except the control
/// time and the target state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HamiltonianKey {
    g_bits: Option<u64>,
    n_atoms: Option<usize>,
    n_max: usize,
    n_trunc: usize,
}

pub const DEFAULT_N_MAX: usize = 80;

impl RunConfig {
    pub fn preset(&self) -> Result<Option<Preset>, ConfigError> {
        self.preset
            .as_deref()
            .map(|name| Preset::from_str(name).map_err(|e| ConfigError::invalid("preset", e)))
            .transpose()
    }

    fn qubit_target(&self) -> Result<Option<QubitTarget>, ConfigError> {
        self.target
            .as_deref()
            .map(|name| QubitTarget::from_str(name).map_err(|e| ConfigError::invalid("target", e)))
            .transpose()
    }

    pub fn base_point(&self) -> Point {
        Point {
            g: self.g,
            control_time: self.control_time,
            theta: self.theta,
            phi: self.phi.unwrap_or(0.0),
            n_atoms: self.n_atoms,
            n_max: self.n_max.unwrap_or(DEFAULT_N_MAX),
            n_trunc: self.n_trunc,
        }
    }

    pub fn hamiltonian_key(&self, point: &Point) -> HamiltonianKey {
        let is_preset = self.scenario.is_none();
        HamiltonianKey {
            g_bits: if is_preset {
                point.g.map(f64::to_bits)
            } else {
                None
            },
            n_atoms: if is_preset { point.n_atoms } else { None },
            n_max: point.n_max,
            n_trunc: point.n_trunc(),
        }
    }

    /// The scenario at `point`.
    pub fn build_spec(&self, point: &Point) -> Result<ScenarioSpec, ConfigError> {
        let control_time = point
            .control_time
            .ok_or_else(|| ConfigError::invalid("control_time", "missing (set `T`)"))?;
        if !control_time.is_finite() || control_time < 0.0 {
            return Err(ConfigError::invalid(
                "control_time",
                format!("must be finite and non-negative, got {control_time}"),
            ));
        }
        let field = match point.n_trunc {
            Some(n_trunc) => FieldSpace::new(point.n_max, n_trunc).map_err(from_core)?,
            None => FieldSpace::with_default_buffer(point.n_max),
        };
        if let Some(custom) = &self.scenario {
            let atoms = custom
                .atoms
                .iter()
                .enumerate()
                .map(|(j, a)| {
                    Atom::new(a.energies.clone(), a.couplings.clone())
                        .map_err(|e| ConfigError::invalid(format!("scenario.atoms[{j}]"), e))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let atoms =
                AtomicSystem::new(atoms).map_err(|e| ConfigError::invalid("scenario.atoms", e))?;
            let target = complex_state("scenario.target", &custom.target)?;
            let mut spec =
                ScenarioSpec::new(atoms.clone(), field, control_time, atoms.ground_state())
                    .map_err(from_core)?;
            spec.target_atomic = target;
            if let Some(initial) = &custom.initial {
                spec.initial_atomic = complex_state("scenario.initial", initial)?;
            }
            spec.validate()
                .map_err(|e| ConfigError::invalid("scenario", e))?;
            return Ok(spec.with_label(custom.label.clone().unwrap_or_else(|| "custom".into())));
        }
        let name = self
            .preset()?
            .ok_or_else(|| ConfigError::invalid("preset", "set either `preset` or [scenario]"))?;
        let params = PresetParams {
            g: point.g,
            control_time: Some(control_time),
            theta: point.theta,
            phi: point.phi,
            n_atoms: point.n_atoms,
            target: self.qubit_target()?,
            n_max: point.n_max,
            n_trunc: point.n_trunc,
        };
        preset(name, &params).map_err(from_core)
    }

    /// Checks everything that can be checked without diagonalising.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.preset.is_some() == self.scenario.is_some() {
            return Err(ConfigError::invalid(
                "preset",
                "exactly one of `preset` and [scenario] must be given",
            ));
        }
        let preset = self.preset()?;
        self.qubit_target()?;
        if let Some(g) = self.g {
            if !g.is_finite() {
                return Err(ConfigError::invalid("g", "must be finite"));
            }
        }
        if let Some(t) = self.control_time {
            if !t.is_finite() || t < 0.0 {
                return Err(ConfigError::invalid(
                    "control_time",
                    format!("control_time must be finite and non-negative, got {t}"),
                ));
            }
        }
        self.numerics.validate()?;
        if self.evolve.points == 0
            || self.evolve.t_stop.is_nan()
            || self.evolve.t_stop < self.evolve.t_start
        {
            return Err(ConfigError::invalid(
                "evolve",
                "needs points > 0 and t_stop >= t_start",
            ));
        }
        if self.wigner.points == 0 {
            return Err(ConfigError::invalid("wigner.points", "must be positive"));
        }
        if let Some(extent) = self.wigner.extent {
            if !(extent > 0.0 && extent.is_finite()) {
                return Err(ConfigError::invalid("wigner.extent", "must be positive"));
            }
        }
        if self.tasks.contains(&Task::Sweep) && self.sweep.is_empty() {
            return Err(ConfigError::invalid(
                "sweep",
                "the sweep task needs at least one axis",
            ));
        }
        let mut seen = Vec::new();
        let mut point = self.base_point();
        for (i, axis) in self.sweep.iter().enumerate() {
            let field = format!("sweep[{i}]");
            axis.validate(&field)?;
            if seen.contains(&axis.param) {
                return Err(ConfigError::invalid(
                    format!("{field}.param"),
                    format!("`{}` is swept twice", axis.param.name()),
                ));
            }
            seen.push(axis.param);
            let allowed = match (preset, axis.param) {
                (_, SweepParam::ControlTime | SweepParam::NMax) => true,
                (None, _) => false,
                (Some(_), SweepParam::G) => true,
                (Some(p), SweepParam::Theta | SweepParam::Phi) => p == Preset::RabiResonant,
                (Some(p), SweepParam::NAtoms) => p == Preset::Multiqubit,
            };
            if !allowed {
                return Err(ConfigError::invalid(
                    format!("{field}.param"),
                    format!(
                        "`{}` is not a parameter of this scenario",
                        axis.param.name()
                    ),
                ));
            }
            for v in [axis.start, axis.stop] {
                self.build_spec(&point.clone().with(axis.param, v))?;
            }
            point = point.with(axis.param, axis.start);
        }
        self.build_spec(&point)?;
        Ok(())
    }

    /// Grid points in lexicographic axis order, first axis slowest.
    pub fn sweep_points(&self) -> Vec<(Vec<f64>, Point)> {
        let axes: Vec<(SweepParam, Vec<f64>)> =
            self.sweep.iter().map(|a| (a.param, a.values())).collect();
        let mut out = vec![(Vec::new(), self.base_point())];
        for (param, values) in &axes {
            out = out
                .into_iter()
                .flat_map(|(coords, point)| {
                    values.iter().map(move |&v| {
                        let mut c = coords.clone();
                        c.push(v);
                        (c, point.clone().with(*param, v))
                    })
                })
                .collect();
        }
        out
    }
}

/// Parses and validates a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Canonical TOML form; `parse_config` of the output yields the same config.
pub fn to_toml(config: &RunConfig) -> String {
    toml::to_string(config).expect("run configurations always serialise")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
preset = "rabi_resonant"
g = 0.001
T = 25
theta = 3.14159265
n_max = 80
tasks = ["solve"]
"#;

    #[test]
    fn minimal_config_parses() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.control_time, Some(25.0));
        assert_eq!(c.tasks, vec![Task::Solve]);
        assert_eq!(c.preset().unwrap(), Some(Preset::RabiResonant));
    }

    #[test]
    fn round_trip_is_identity() {
        let text = format!(
            "{MINIMAL}\n[[sweep]]\nparam = \"g\"\nstart = 0.001\nstop = 0.2\ncount = 5\nscale = \"log\"\n\n[numerics]\nrestriction = \"full\"\n"
        );
        let c = parse_config(&text).unwrap();
        let again = parse_config(&to_toml(&c)).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn negative_time_names_control_time() {
        let err = parse_config(&MINIMAL.replace("T = 25", "T = -1")).unwrap_err();
        assert_eq!(err.field(), Some("control_time"));
        assert!(err.to_string().contains("control_time"));
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_location() {
        let err = parse_config(&format!("{MINIMAL}\nbogus = 1\n")).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, ConfigError::Syntax(_)));
        assert!(msg.contains("bogus") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn sweep_axis_must_fit_the_scenario() {
        let text =
            format!("{MINIMAL}\n[[sweep]]\nparam = \"n_atoms\"\nstart = 1\nstop = 3\ncount = 3\n");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.field(), Some("sweep[0].param"));
    }

    #[test]
    fn sweep_points_are_lexicographic() {
        let text = format!(
            "{MINIMAL}\n[[sweep]]\nparam = \"g\"\nstart = 0.1\nstop = 0.2\ncount = 2\n\n[[sweep]]\nparam = \"theta\"\nstart = 1\nstop = 3\ncount = 3\n"
        );
        let c = parse_config(&text).unwrap();
        let coords: Vec<Vec<f64>> = c.sweep_points().into_iter().map(|(c, _)| c).collect();
        assert_eq!(
            coords,
            vec![
                vec![0.1, 1.0],
                vec![0.1, 2.0],
                vec![0.1, 3.0],
                vec![0.2, 1.0],
                vec![0.2, 2.0],
                vec![0.2, 3.0]
            ]
        );
    }

    #[test]
    fn custom_scenario_parses() {
        let text = r#"
T = 3.0
n_max = 4
tasks = ["solve"]

[scenario]
target = [[0.0, 0.0], [1.0, 0.0]]

[[scenario.atoms]]
energies = [0.0, 1.0]
couplings = [[0.0, 0.2], [0.2, 0.0]]
"#;
        let c = parse_config(text).unwrap();
        let spec = c.build_spec(&c.base_point()).unwrap();
        assert_eq!(spec.atoms.dim(), 2);
        assert_eq!(spec.field.n_trunc(), 8);
    }

    #[test]
    fn non_normalised_target_is_rejected() {
        let text = r#"
T = 3.0
[scenario]
target = [[0.0, 0.0], [2.0, 0.0]]
[[scenario.atoms]]
energies = [0.0, 1.0]
couplings = [[0.0, 0.2], [0.2, 0.0]]
"#;
        assert_eq!(
            parse_config(text).unwrap_err().field(),
            Some("scenario.target")
        );
    }
}
