//! Executes the tasks of a run configuration and writes their artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use fieldctl_core::analysis::{
    fock_statistics, poisson_reference, wigner_working_dim, WignerEvaluator,
};
use fieldctl_core::control::{
    coherent_approximation, parity_superposition, ControlSolution, ParitySuperposition,
    ScenarioSolver, SolveOptions,
};
use fieldctl_core::fock::coherent_state;
use fieldctl_core::linalg::linspace;
use fieldctl_core::propagator::SpectralDecomposition;
use fieldctl_core::{StateVector, C64};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{
    parse_config, ConfigError, HamiltonianKey, Point, RestrictionName, RunConfig, Task,
    WignerSource,
};
use crate::output::{finite, json, pair, OutputDir, Table, WriteError};

pub const SOLUTION_FILE: &str = "solution.json";
pub const STATISTICS_FILE: &str = "statistics.csv";
pub const WIGNER_FILE: &str = "wigner.csv";
pub const POPULATIONS_FILE: &str = "populations.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Output(#[from] WriteError),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot start thread pool: {0}")]
    Threads(String),
}

impl CliError {
    /// 2 for anything wrong with the request itself, 1 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_)
            | CliError::Read { .. }
            | CliError::Output(WriteError::Exists(_)) => 2,
            CliError::Output(WriteError::Io { .. }) | CliError::Threads(_) => 1,
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    Ok(parse_config(&text)?)
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the config's `output`; falls back to `fieldctl-out`.
    pub out: Option<PathBuf>,
    pub overwrite: bool,
    /// Worker threads for sweeps and Wigner grids; all cores when `None`.
    pub threads: Option<usize>,
    /// Recorded in the manifest; the computations are deterministic.
    pub seed: Option<u64>,
    /// Overrides `n_trunc` of the config.
    pub n_trunc: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskReport {
    pub task: Task,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub files: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub reports: Vec<TaskReport>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.reports.iter().all(|r| r.ok) {
            0
        } else {
            1
        }
    }
}

fn files_for(task: Task) -> &'static [&'static str] {
    match task {
        Task::Solve | Task::Baseline => &[SOLUTION_FILE, STATISTICS_FILE],
        Task::Wigner => &[WIGNER_FILE],
        Task::Evolve => &[POPULATIONS_FILE],
        Task::Sweep => &[SWEEP_FILE],
    }
}

/// Runs `tasks` (deduplicated, in canonical order) for `config`.
///
/// Configuration problems and existing outputs are reported before any work
/// starts. A failing task is recorded in its report and the manifest; the
/// remaining tasks still run.
pub fn execute(
    config: &RunConfig,
    tasks: &[Task],
    options: &RunOptions,
) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let mut config = config.clone();
    if let Some(n_trunc) = options.n_trunc {
        config.n_trunc = Some(n_trunc);
    }
    config.validate()?;
    let mut tasks = tasks.to_vec();
    tasks.sort();
    tasks.dedup();
    if tasks.is_empty() {
        return Err(ConfigError::invalid("tasks", "nothing to run").into());
    }
    if tasks.contains(&Task::Sweep) && config.sweep.is_empty() {
        return Err(ConfigError::invalid("sweep", "the sweep task needs at least one axis").into());
    }
    let point = config.base_point();
    if tasks.iter().any(|&t| t != Task::Sweep) {
        config.build_spec(&point)?;
    }

    let out = OutputDir::new(
        options
            .out
            .clone()
            .or_else(|| config.output.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("fieldctl-out")),
        options.overwrite,
    );
    let mut planned: Vec<&str> = tasks.iter().flat_map(|&t| files_for(t)).copied().collect();
    planned.push(MANIFEST_FILE);
    planned.dedup();
    out.check(&planned)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Threads(e.to_string()))?;
    let threads = pool.current_num_threads();

    let reports = pool.install(|| {
        let mut reports = Vec::new();
        let wants_point = tasks.iter().any(|&t| t != Task::Sweep);
        let single = wants_point
            .then(|| PointRun::compute(&config, &point, tasks.contains(&Task::Baseline)));
        for &task in &tasks {
            if task == Task::Baseline && tasks.contains(&Task::Solve) {
                continue;
            }
            let result = match task {
                Task::Solve | Task::Baseline => single
                    .as_ref()
                    .expect("computed for point tasks")
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|run| write_solution(&out, &config, &point, run)),
                Task::Wigner => single
                    .as_ref()
                    .expect("computed for point tasks")
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|run| write_wigner(&out, &config, run)),
                Task::Evolve => single
                    .as_ref()
                    .expect("computed for point tasks")
                    .as_ref()
                    .map_err(Clone::clone)
                    .and_then(|run| write_populations(&out, &config, run)),
                Task::Sweep => run_sweep(&out, &config),
            };
            reports.push(match result {
                Ok(files) => TaskReport {
                    task,
                    ok: true,
                    error: None,
                    files,
                },
                Err(error) => TaskReport {
                    task,
                    ok: false,
                    error: Some(error),
                    files: Vec::new(),
                },
            });
        }
        reports
    });

    let manifest = Manifest {
        tool: "fieldctl",
        version: env!("CARGO_PKG_VERSION"),
        config: &config,
        parameters: &point,
        threads,
        seed: options.seed,
        tasks: &reports,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    out.write(MANIFEST_FILE, &json(&manifest))?;
    Ok(Outcome {
        out_dir: out.root().to_owned(),
        reports,
    })
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    parameters: &'a Point,
    threads: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    tasks: &'a [TaskReport],
    wall_clock_seconds: f64,
}

type TaskResult = Result<Vec<String>, String>;

fn written(out: &OutputDir, name: &str, contents: &str) -> Result<String, String> {
    out.write(name, contents).map_err(|e| e.to_string())?;
    Ok(name.to_owned())
}

/// The control problem solved at the configuration's base point.
pub struct PointRun {
    pub solver: ScenarioSolver,
    pub solution: ControlSolution,
    /// The optimal state, or its superposition with the runner-up when the
    /// two are a near-degenerate opposite-parity pair.
    pub localized: ParitySuperposition,
    /// `⟨a⟩` of the localized state.
    pub alpha: C64,
    pub forward_fidelity: f64,
}

impl PointRun {
    pub fn compute(config: &RunConfig, point: &Point, baseline: bool) -> Result<Self, String> {
        let spec = config.build_spec(point).map_err(|e| e.to_string())?;
        let solver = ScenarioSolver::new(spec).map_err(|e| e.to_string())?;
        Self::with_solver(config, solver, baseline)
    }

    pub fn with_solver(
        config: &RunConfig,
        solver: ScenarioSolver,
        baseline: bool,
    ) -> Result<Self, String> {
        let numerics = &config.numerics;
        let options = SolveOptions {
            count: numerics.eigen_count.max(2),
            restriction: numerics.restriction.into(),
            baseline: baseline.then(|| numerics.grid()),
        };
        let solution = solver.solve(&options).map_err(|e| e.to_string())?;
        let tol = if numerics.superpose {
            numerics.degeneracy_tol
        } else {
            -1.0
        };
        let localized = parity_superposition(&solution, tol, &numerics.grid());
        let alpha = coherent_approximation(&localized.state);
        let forward_fidelity = solver
            .forward_fidelity(solution.optimal_state(), solver.spec().control_time)
            .map_err(|e| e.to_string())?;
        Ok(Self {
            solver,
            solution,
            localized,
            alpha,
            forward_fidelity,
        })
    }
}

#[derive(Serialize)]
struct SolutionDoc<'a> {
    label: &'a str,
    parameters: &'a Point,
    n_trunc: usize,
    restriction: RestrictionName,
    fidelity: f64,
    forward_fidelity: f64,
    spectrum: &'a [f64],
    phi_opt: Vec<[f64; 2]>,
    n_av: f64,
    mandel_q: Option<f64>,
    parity: f64,
    coherent_approximation: ApproxDoc,
    baseline: Option<BaselineDoc>,
}

#[derive(Serialize)]
struct ApproxDoc {
    /// `⟨a⟩` of the localized state.
    alpha: [f64; 2],
    superposed: bool,
    chi: f64,
    /// Best coherent overlap of the localized state and where it occurs.
    overlap: f64,
    overlap_alpha: [f64; 2],
}

#[derive(Serialize)]
struct BaselineDoc {
    fidelity: f64,
    alpha: [f64; 2],
    ratio: Option<f64>,
}

fn write_solution(
    out: &OutputDir,
    config: &RunConfig,
    point: &Point,
    run: &PointRun,
) -> TaskResult {
    let sol = &run.solution;
    let phi = sol.optimal_state();
    let stats = fock_statistics(phi);
    let doc = SolutionDoc {
        label: &run.solver.spec().label,
        parameters: point,
        n_trunc: run.solver.spec().field.n_trunc(),
        restriction: config.numerics.restriction,
        fidelity: sol.fidelity(),
        forward_fidelity: run.forward_fidelity,
        spectrum: &sol.spectrum[..config.numerics.eigen_count.min(sol.spectrum.len())],
        phi_opt: phi.as_slice().iter().map(|&z| pair(z)).collect(),
        n_av: stats.n_av,
        mandel_q: finite(stats.mandel_q),
        parity: stats.parity_expectation,
        coherent_approximation: ApproxDoc {
            alpha: pair(run.alpha),
            superposed: run.localized.superposed,
            chi: run.localized.chi,
            overlap: run.localized.score,
            overlap_alpha: pair(run.localized.alpha),
        },
        baseline: sol.baseline.map(|b| BaselineDoc {
            fidelity: b.fidelity,
            alpha: pair(b.alpha),
            ratio: finite(b.fidelity / sol.fidelity()),
        }),
    };
    let poisson = poisson_reference(stats.n_av, phi.dim() - 1);
    let mut table = Table::new(["n", "re", "im", "probability", "poisson"]);
    for (n, z) in phi.as_slice().iter().enumerate() {
        table.row(&[n], &[z.re, z.im, z.norm_sqr(), poisson[n]]);
    }
    Ok(vec![
        written(out, SOLUTION_FILE, &json(&doc))?,
        written(out, STATISTICS_FILE, &table.into_string())?,
    ])
}

/// Default half-width of the phase-space window for a state.
pub fn default_extent(state: &StateVector) -> f64 {
    (fock_statistics(state).n_av.sqrt() + 2.5).ceil()
}

fn write_wigner(out: &OutputDir, config: &RunConfig, run: &PointRun) -> TaskResult {
    let state = match config.wigner.state {
        WignerSource::Optimal => run.solution.optimal_state(),
        WignerSource::Superposition => &run.localized.state,
    };
    let extent = config
        .wigner
        .extent
        .unwrap_or_else(|| default_extent(state));
    let axis = linspace(-extent, extent, config.wigner.points);
    let dim = wigner_working_dim(state, extent * std::f64::consts::SQRT_2);
    let evaluator = WignerEvaluator::new(state, dim).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<f64>> = axis
        .par_iter()
        .map(|&x| axis.iter().map(|&p| evaluator.value(x, p)).collect())
        .collect();
    let mut table = Table::new(["x", "p", "W"]);
    for (&x, row) in axis.iter().zip(&rows) {
        for (&p, &w) in axis.iter().zip(row) {
            table.row(&[], &[x, p, w]);
        }
    }
    Ok(vec![written(out, WIGNER_FILE, &table.into_string())?])
}

fn write_populations(out: &OutputDir, config: &RunConfig, run: &PointRun) -> TaskResult {
    let solver = &run.solver;
    let spec = solver.spec();
    let times = linspace(
        config.evolve.t_start,
        config.evolve.t_stop,
        config.evolve.points,
    );
    let coherent = coherent_state(spec.field.dim(), run.alpha);
    let series = |phi: &StateVector, atomic: &StateVector| {
        solver
            .population_series(phi, atomic, &times)
            .map_err(|e| e.to_string())
    };
    let phi = run.solution.optimal_state();
    let columns = [
        series(phi, &spec.target_atomic)?,
        series(&coherent, &spec.target_atomic)?,
        series(phi, &spec.initial_atomic)?,
        series(&coherent, &spec.initial_atomic)?,
    ];
    let mut table = Table::new([
        "t",
        "target_optimal",
        "target_coherent",
        "initial_optimal",
        "initial_coherent",
    ]);
    for (k, &t) in times.iter().enumerate() {
        table.row(
            &[],
            &[
                t,
                columns[0][k],
                columns[1][k],
                columns[2][k],
                columns[3][k],
            ],
        );
    }
    Ok(vec![written(out, POPULATIONS_FILE, &table.into_string())?])
}

/// One evaluated sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub coords: Vec<f64>,
    pub fidelity: f64,
    pub coherent: f64,
    pub n_av: f64,
    pub mandel_q: f64,
}

impl SweepRow {
    pub fn ratio(&self) -> f64 {
        self.coherent / self.fidelity
    }
}

/// Evaluates every grid point of the config's sweep, in lexicographic order.
///
/// Points sharing a Hamiltonian share one diagonalisation; points are solved
/// in parallel on the current rayon pool.
pub fn sweep_rows(config: &RunConfig) -> Result<Vec<SweepRow>, String> {
    let points = config.sweep_points();
    let mut keyed: BTreeMap<HamiltonianKey, Point> = BTreeMap::new();
    for (_, point) in &points {
        keyed
            .entry(config.hamiltonian_key(point))
            .or_insert_with(|| point.clone());
    }
    let decompositions: BTreeMap<HamiltonianKey, Arc<SpectralDecomposition>> = keyed
        .into_par_iter()
        .map(|(key, point)| {
            let spec = config.build_spec(&point).map_err(|e| e.to_string())?;
            let decomp =
                fieldctl_core::control::decompose_scenario(&spec).map_err(|e| e.to_string())?;
            Ok((key, Arc::new(decomp)))
        })
        .collect::<Result<_, String>>()?;
    let options = SolveOptions {
        count: 1,
        restriction: config.numerics.restriction.into(),
        baseline: Some(config.numerics.grid()),
    };
    points
        .par_iter()
        .map(|(coords, point)| {
            let spec = config.build_spec(point).map_err(|e| e.to_string())?;
            let decomp = decompositions[&config.hamiltonian_key(point)].clone();
            let solver =
                ScenarioSolver::with_decomposition(spec, decomp).map_err(|e| e.to_string())?;
            let sol = solver.solve(&options).map_err(|e| e.to_string())?;
            let stats = fock_statistics(sol.optimal_state());
            Ok(SweepRow {
                coords: coords.clone(),
                fidelity: sol.fidelity(),
                coherent: sol.baseline.map_or(f64::NAN, |b| b.fidelity),
                n_av: stats.n_av,
                mandel_q: stats.mandel_q,
            })
        })
        .collect()
}

fn run_sweep(out: &OutputDir, config: &RunConfig) -> TaskResult {
    let rows = sweep_rows(config)?;
    let header = config
        .sweep
        .iter()
        .map(|a| a.param.name())
        .chain(["F", "F_coh", "ratio", "n_av", "Q"]);
    let mut table = Table::new(header);
    for row in &rows {
        let mut values = row.coords.clone();
        values.extend([
            row.fidelity,
            row.coherent,
            row.ratio(),
            row.n_av,
            row.mandel_q,
        ]);
        table.row(&[], &values);
    }
    Ok(vec![written(out, SWEEP_FILE, &table.into_string())?])
}
