//! Drivers for the numerical studies and their file outputs.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use poro_core::analysis::{
    cross_section, energy_functionals, error_norms, field_norms, relative_errors, ErrorReport, FieldName, Line,
    SectionSamples,
};
use poro_core::decoupled::{ContractionReport, DecoupledSolver, IterateOptions};
use poro_core::fem::{build_field_spaces, FieldSpaces};
use poro_core::mesh::{build_unit_square_mesh, tag_boundaries, BoundaryScheme, Mesh};
use poro_core::model::{barry_mercer_problem, manufactured_problem, FieldState, ProblemData};
use poro_core::monolithic::{run, TimeGrid, Trajectory};

use crate::config::{ConfigError, Experiment, ProblemKind, RunConfig, SolverMode, Stabilization};
use crate::table::{write_csv, write_metadata, ResultTable};
use crate::vtk::{write_vtk, VtkField};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Solver(poro_core::Error),
    Io(io::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "configuration error: {e}"),
            RunError::Solver(e) => write!(f, "solver failure: {e}"),
            RunError::Io(e) => write!(f, "I/O failure: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<poro_core::Error> for RunError {
    fn from(e: poro_core::Error) -> Self {
        RunError::Solver(e)
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

/// Problem data and spaces of `cfg` on the `n × n` mesh.
pub fn setup(cfg: &RunConfig, n: usize) -> RunResult<(ProblemData, FieldSpaces)> {
    let scheme = match cfg.problem {
        ProblemKind::Manufactured => BoundaryScheme::RightNeumann,
        ProblemKind::BarryMercer => BoundaryScheme::BarryMercer,
        ProblemKind::Homogeneous => BoundaryScheme::AllDirichlet,
    };
    let mesh = Arc::new(tag_boundaries(&build_unit_square_mesh(n)?, scheme)?);
    let params = cfg.model_params(mesh.h())?;
    let problem = match cfg.problem {
        ProblemKind::Manufactured => manufactured_problem(params),
        ProblemKind::BarryMercer => barry_mercer_problem(params)?,
        ProblemKind::Homogeneous => ProblemData::homogeneous(params, scheme),
    };
    Ok((problem, build_field_spaces(&mesh, cfg.k, cfg.l)?))
}

pub fn iterate_options(cfg: &RunConfig) -> IterateOptions {
    IterateOptions { tol: cfg.tol, max_iter: cfg.max_iter, stopping: cfg.stopping, schedule: cfg.schedule }
}

/// Runs the configured solver.
pub fn solve(cfg: &RunConfig, problem: &ProblemData, spaces: &FieldSpaces, grid: &TimeGrid) -> RunResult<Trajectory> {
    Ok(match cfg.solver {
        SolverMode::Monolithic => run(problem, spaces, grid)?,
        SolverMode::Decoupled => DecoupledSolver::new(problem, spaces, grid)?.iterate(&iterate_options(cfg))?.0,
    })
}

/// Final-time errors over a ladder of time steps or mesh sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    /// `"dt"` or `"h"`.
    pub parameter: &'static str,
    pub ladder: Vec<f64>,
    pub errors: Vec<ErrorReport>,
}

impl ConvergenceStudy {
    /// Rates per field, `None` for the first rung.
    pub fn rates(&self) -> [Vec<Option<f64>>; 4] {
        std::array::from_fn(|k| {
            let e: Vec<f64> = self.errors.iter().map(|r| r.as_array()[k]).collect();
            let mut out = vec![None];
            if e.len() >= 2 {
                out.extend(poro_core::analysis::convergence_rates(&e).expect("two or more errors"));
            }
            out
        })
    }

    pub fn table(&self) -> ResultTable {
        let mut t = ResultTable::new([
            self.parameter,
            "eu_H1",
            "rate_u",
            "exi_L2",
            "rate_xi",
            "ephi_H1",
            "rate_phi",
            "epsi_H1",
            "rate_psi",
        ]);
        let rates = self.rates();
        for (i, (p, e)) in self.ladder.iter().zip(&self.errors).enumerate() {
            let mut row = vec![Some(*p)];
            for (k, v) in e.as_array().into_iter().enumerate() {
                row.push(Some(v));
                row.push(rates[k][i]);
            }
            t.push(row);
        }
        t
    }
}

fn exact_errors(problem: &ProblemData, spaces: &FieldSpaces, state: &FieldState) -> RunResult<ErrorReport> {
    Ok(error_norms(state, problem.exact.as_ref(), spaces)?)
}

/// Time-step ladder on the fixed mesh `cfg.n`.
pub fn converge_time(cfg: &RunConfig) -> RunResult<ConvergenceStudy> {
    let (problem, spaces) = setup(cfg, cfg.n)?;
    let mut errors = Vec::new();
    for &dt in &cfg.dt_ladder {
        let steps = (cfg.t_final / dt).round() as usize;
        let grid = TimeGrid::new(cfg.t_final, steps)?;
        let traj = solve(cfg, &problem, &spaces, &grid)?;
        errors.push(exact_errors(&problem, &spaces, traj.last())?);
    }
    Ok(ConvergenceStudy { parameter: "dt", ladder: cfg.dt_ladder.clone(), errors })
}

/// Mesh ladder at the fixed step `t_final / steps`.
pub fn converge_space(cfg: &RunConfig) -> RunResult<ConvergenceStudy> {
    let grid = TimeGrid::new(cfg.t_final, cfg.steps)?;
    let mut errors = Vec::new();
    for &n in &cfg.n_ladder {
        let (problem, spaces) = setup(cfg, n)?;
        let traj = solve(cfg, &problem, &spaces, &grid)?;
        errors.push(exact_errors(&problem, &spaces, traj.last())?);
    }
    Ok(ConvergenceStudy { parameter: "h", ladder: cfg.n_ladder.iter().map(|&n| 1.0 / n as f64).collect(), errors })
}

/// History of the decoupled iteration measured against the monolithic run.
#[derive(Debug, Clone)]
pub struct IterationStudy {
    /// Relative errors of `(u, ξ, φ, ψ)` at the final time, per iteration.
    pub rel_errors: Vec<[f64; 4]>,
    pub report: ContractionReport,
    /// Largest relative difference to the monolithic run over all levels and
    /// fields after the last iteration.
    pub max_difference: f64,
}

impl IterationStudy {
    pub fn table(&self) -> ResultTable {
        let mut t =
            ResultTable::new(["iter", "rel_err_u", "rel_err_xi", "rel_err_phi", "rel_err_psi", "contraction_ratio"]);
        for (i, e) in self.rel_errors.iter().enumerate() {
            let ratio = if i == 0 { None } else { self.report.ratios.get(i - 1).copied() };
            t.push(vec![Some((i + 1) as f64), Some(e[0]), Some(e[1]), Some(e[2]), Some(e[3]), ratio]);
        }
        t
    }
}

pub fn iterate_study(cfg: &RunConfig) -> RunResult<IterationStudy> {
    let (problem, spaces) = setup(cfg, cfg.n)?;
    let grid = TimeGrid::new(cfg.t_final, cfg.steps)?;
    let mono = run(&problem, &spaces, &grid)?;
    let solver = DecoupledSolver::new(&problem, &spaces, &grid)?;
    let mut rel_errors = Vec::new();
    let mut failure = None;
    let (traj, report) = solver.iterate_observed(&iterate_options(cfg), |_, t| {
        match relative_errors(t.last(), mono.last(), &spaces) {
            Ok(e) => rel_errors.push(e),
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    let mut max_difference = 0.0f64;
    for (a, b) in traj.states.iter().zip(&mono.states) {
        for v in relative_errors(a, b, &spaces)? {
            max_difference = max_difference.max(v);
        }
    }
    Ok(IterationStudy { rel_errors, report, max_difference })
}

/// Cross-sections of one run.
#[derive(Debug, Clone)]
pub struct SectionSet {
    pub label: String,
    pub sections: Vec<SectionSamples>,
}

impl SectionSet {
    pub fn field(&self, f: FieldName) -> &SectionSamples {
        self.sections.iter().find(|s| s.field == f).expect("all fields are sampled")
    }

    pub fn table(&self) -> ResultTable {
        let mut cols = vec!["y".to_string()];
        cols.extend(self.sections.iter().map(|s| s.field.as_str().to_string()));
        let mut t = ResultTable::new(cols);
        for i in 0..self.sections[0].params.len() {
            let mut row = vec![Some(self.sections[0].params[i])];
            row.extend(self.sections.iter().map(|s| Some(s.values[i])));
            t.push(row);
        }
        t
    }
}

fn sample_all(state: &FieldState, spaces: &FieldSpaces, cfg: &RunConfig, label: &str) -> RunResult<SectionSet> {
    let sections = FieldName::ALL
        .into_iter()
        .map(|f| cross_section(state, spaces, f, Line::X(cfg.section_x), cfg.samples))
        .collect::<poro_core::Result<_>>()?;
    Ok(SectionSet { label: label.to_string(), sections })
}

/// Barry–Mercer runs: monolithic and decoupled with the configured
/// stabilization, the unstabilized pair for the single-step variant, and an
/// optional refined monolithic reference.
#[derive(Debug, Clone)]
pub struct BarryMercerStudy {
    pub mesh: Arc<Mesh>,
    pub sets: Vec<SectionSet>,
    pub snapshots: Vec<(String, FieldSpaces, FieldState)>,
}

impl BarryMercerStudy {
    pub fn set(&self, label: &str) -> Option<&SectionSet> {
        self.sets.iter().find(|s| s.label == label)
    }
}

pub fn barry_mercer_study(cfg: &RunConfig) -> RunResult<BarryMercerStudy> {
    let grid = TimeGrid::new(cfg.t_final, cfg.steps)?;
    let mut sets = Vec::new();
    let mut snapshots = Vec::new();
    let mut mesh = None;
    let mut variants = vec![(cfg.clone(), "")];
    if cfg.variant == poro_core::model::BarryMercerVariant::StabSingleStep && cfg.stabilization != Stabilization::Off {
        variants.push((RunConfig { stabilization: Stabilization::Off, ..cfg.clone() }, "_eta0"));
    }
    for (c, suffix) in &variants {
        let (problem, spaces) = setup(c, c.n)?;
        mesh.get_or_insert_with(|| spaces.mesh().clone());
        let mono = run(&problem, &spaces, &grid)?;
        let dec = DecoupledSolver::new(&problem, &spaces, &grid)?.iterate(&iterate_options(c))?.0;
        for (name, traj) in [("monolithic", mono), ("decoupled", dec)] {
            let label = format!("{name}{suffix}");
            sets.push(sample_all(traj.last(), &spaces, c, &label)?);
            snapshots.push((label, spaces.clone(), traj.last().clone()));
        }
    }
    if cfg.reference {
        let rc = RunConfig { n: cfg.reference_n, ..cfg.clone() };
        let (problem, spaces) = setup(&rc, rc.n)?;
        let rgrid = TimeGrid::new(cfg.t_final, cfg.reference_steps)?;
        let r = run(&problem, &spaces, &rgrid)?;
        sets.push(sample_all(r.last(), &spaces, &rc, "reference")?);
    }
    Ok(BarryMercerStudy { mesh: mesh.expect("at least one run"), sets, snapshots })
}

/// One run of the configured solver with per-step diagnostics.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub spaces: FieldSpaces,
    pub trajectory: Trajectory,
    pub history: ResultTable,
}

pub fn single_run(cfg: &RunConfig) -> RunResult<SingleRun> {
    let (problem, spaces) = setup(cfg, cfg.n)?;
    let grid = TimeGrid::new(cfg.t_final, cfg.steps)?;
    let trajectory = solve(cfg, &problem, &spaces, &grid)?;
    let mut history = ResultTable::new(["t", "norm_u", "norm_xi", "norm_phi", "norm_psi", "energy", "dissipation"]);
    for s in &trajectory.states {
        let n = field_norms(s, &spaces)?;
        let e = energy_functionals(s, &problem.params, &spaces)?;
        history.push(vec![Some(s.t), Some(n[0]), Some(n[1]), Some(n[2]), Some(n[3]), Some(e.e), Some(e.v)]);
    }
    Ok(SingleRun { spaces, trajectory, history })
}

/// Result of any experiment.
#[derive(Debug, Clone)]
pub enum Outcome {
    Convergence(ConvergenceStudy),
    Iteration(IterationStudy),
    BarryMercer(BarryMercerStudy),
    Single(SingleRun),
}

pub fn run_experiment(cfg: &RunConfig) -> RunResult<Outcome> {
    cfg.validate()?;
    Ok(match cfg.experiment {
        Experiment::ConvergeTime => Outcome::Convergence(converge_time(cfg)?),
        Experiment::ConvergeSpace => Outcome::Convergence(converge_space(cfg)?),
        Experiment::Iterate => Outcome::Iteration(iterate_study(cfg)?),
        Experiment::BarryMercer => Outcome::BarryMercer(barry_mercer_study(cfg)?),
        Experiment::SingleRun => Outcome::Single(single_run(cfg)?),
    })
}

/// Vertex fields of a state for VTK output.
pub fn vertex_fields(spaces: &FieldSpaces, state: &FieldState) -> RunResult<Vec<VtkField>> {
    let scalar = |v: Vec<[f64; 2]>| v.into_iter().map(|x| x[0]).collect::<Vec<_>>();
    Ok(vec![
        VtkField::Vector("u".into(), spaces.u.vertex_values(&state.u)?),
        VtkField::Scalar("xi".into(), scalar(spaces.xi.vertex_values(&state.xi)?)),
        VtkField::Scalar("phi".into(), scalar(spaces.phi.vertex_values(&state.phi)?)),
        VtkField::Scalar("psi".into(), scalar(spaces.psi.vertex_values(&state.psi)?)),
    ])
}

/// Vertex coordinates and field values as a table.
fn vertex_table(spaces: &FieldSpaces, state: &FieldState) -> RunResult<ResultTable> {
    let mut t = ResultTable::new(["x", "y", "u1", "u2", "xi", "phi", "psi"]);
    let u = spaces.u.vertex_values(&state.u)?;
    let xi = spaces.xi.vertex_values(&state.xi)?;
    let phi = spaces.phi.vertex_values(&state.phi)?;
    let psi = spaces.psi.vertex_values(&state.psi)?;
    for (v, p) in spaces.mesh().vertices().iter().enumerate() {
        t.push([p[0], p[1], u[v][0], u[v][1], xi[v][0], phi[v][0], psi[v][0]].map(Some).to_vec());
    }
    Ok(t)
}

/// CSV tables of an outcome, keyed by file name.
pub fn tables(cfg: &RunConfig, outcome: &Outcome) -> RunResult<Vec<(String, ResultTable)>> {
    Ok(match outcome {
        Outcome::Convergence(s) => vec![(format!("{}.csv", cfg.experiment), s.table())],
        Outcome::Iteration(s) => vec![("iterate.csv".into(), s.table())],
        Outcome::BarryMercer(s) => s.sets.iter().map(|set| (format!("section_{}.csv", set.label), set.table())).collect(),
        Outcome::Single(s) => vec![
            ("history.csv".into(), s.history.clone()),
            ("fields.csv".into(), vertex_table(&s.spaces, s.trajectory.last())?),
        ],
    })
}

/// Writes every table with its metadata sidecar and, if enabled, VTK
/// snapshots into `cfg.output_dir`. Returns the paths written.
pub fn write_outputs(cfg: &RunConfig, outcome: &Outcome) -> RunResult<Vec<PathBuf>> {
    let dir: &Path = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let text = cfg.to_text();
    let mut written = Vec::new();
    for (name, table) in tables(cfg, outcome)? {
        let path = dir.join(name);
        write_csv(&table, &path)?;
        write_metadata(&path, &text)?;
        written.push(path);
    }
    if cfg.vtk {
        let snaps: Vec<(String, &FieldSpaces, &FieldState)> = match outcome {
            Outcome::BarryMercer(s) => s.snapshots.iter().map(|(l, sp, st)| (l.clone(), sp, st)).collect(),
            Outcome::Single(s) => vec![("final".to_string(), &s.spaces, s.trajectory.last())],
            _ => Vec::new(),
        };
        for (label, spaces, state) in snaps {
            let path = dir.join(format!("{label}.vtk"));
            write_vtk(spaces.mesh(), &vertex_fields(spaces, state)?, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}
