//! Line-oriented run configuration.
//!
//! ```text
//! # comment
//! [section]
//! key = value
//! ```
//!
//! Section headers are optional and only checked for consistency: a key
//! placed under a header must belong to that section. Keys are
//! case-sensitive (`K`, `D` are permeabilities, `k`, `l` polynomial degrees).
//! The `experiment` and `variant` keys select a preset first; every other key
//! then overrides the preset, regardless of its position in the file.

use std::fmt;
use std::path::PathBuf;

use poro_core::decoupled::{Schedule, StoppingRule};
use poro_core::model::{lame_from_young_poisson, scaled_stabilization, specialize, BarryMercerVariant, ModelKind, ModelParams};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: Option<usize>, message: impl Into<String>) -> Self {
        Self { line, field: None, message: message.into() }
    }

    pub fn new(message: impl Into<String>) -> Self {
        Self::at(None, message)
    }

    pub fn field(field: &str, message: impl Into<String>) -> Self {
        Self { line: None, field: Some(field.to_string()), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        if let Some(k) = &self.field {
            write!(f, "{k}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    ConvergeTime,
    ConvergeSpace,
    Iterate,
    BarryMercer,
    SingleRun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Manufactured,
    BarryMercer,
    /// Zero sources, zero initial and boundary data.
    Homogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    Monolithic,
    Decoupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stabilization {
    Off,
    /// `η = 1 / (32 (μ + 2λ) h²)` with the mesh size of each run.
    Scaled,
    /// `eta_phi` and `eta_psi` as given.
    Explicit,
}

/// Bidirectional mapping between enum values and config tokens.
trait Token: Sized + Copy + PartialEq + 'static {
    const TABLE: &'static [(Self, &'static str)];

    fn token(self) -> &'static str {
        Self::TABLE.iter().find(|(v, _)| *v == self).map(|(_, s)| *s).unwrap()
    }

    fn parse_token(s: &str) -> Option<Self> {
        Self::TABLE.iter().find(|(_, t)| *t == s).map(|(v, _)| *v)
    }

    fn choices() -> String {
        Self::TABLE.iter().map(|(_, s)| *s).collect::<Vec<_>>().join(", ")
    }
}

impl Token for Experiment {
    const TABLE: &'static [(Self, &'static str)] = &[
        (Experiment::ConvergeTime, "converge_time"),
        (Experiment::ConvergeSpace, "converge_space"),
        (Experiment::Iterate, "iterate"),
        (Experiment::BarryMercer, "barry_mercer"),
        (Experiment::SingleRun, "single_run"),
    ];
}

impl Token for ProblemKind {
    const TABLE: &'static [(Self, &'static str)] = &[
        (ProblemKind::Manufactured, "manufactured"),
        (ProblemKind::BarryMercer, "barry_mercer"),
        (ProblemKind::Homogeneous, "homogeneous"),
    ];
}

impl Token for SolverMode {
    const TABLE: &'static [(Self, &'static str)] =
        &[(SolverMode::Monolithic, "monolithic"), (SolverMode::Decoupled, "decoupled")];
}

impl Token for Stabilization {
    const TABLE: &'static [(Self, &'static str)] =
        &[(Stabilization::Off, "off"), (Stabilization::Scaled, "scaled"), (Stabilization::Explicit, "explicit")];
}

impl Token for ModelKind {
    const TABLE: &'static [(Self, &'static str)] = &[
        (ModelKind::General, "general"),
        (ModelKind::ThermoPoroelastic, "thermo_poroelastic"),
        (ModelKind::BarenblattBiot, "barenblatt_biot"),
    ];
}

impl Token for BarryMercerVariant {
    const TABLE: &'static [(Self, &'static str)] = &[
        (BarryMercerVariant::StabSingleStep, "stab_single_step"),
        (BarryMercerVariant::SmoothRun, "smooth_run"),
    ];
}

impl Token for StoppingRule {
    const TABLE: &'static [(Self, &'static str)] =
        &[(StoppingRule::Increment, "increment"), (StoppingRule::Contraction, "contraction")];
}

impl Token for Schedule {
    const TABLE: &'static [(Self, &'static str)] =
        &[(Schedule::Parallel, "parallel"), (Schedule::Sequential, "sequential")];
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for Experiment {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Self::parse_token(s)
            .ok_or_else(|| ConfigError::field("experiment", format!("expected one of {}, got '{s}'", Self::choices())))
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,

    pub model: ModelKind,
    pub problem: ProblemKind,
    pub variant: BarryMercerVariant,
    pub mu: f64,
    pub lambda: f64,
    /// When both are set they replace `mu` and `lambda`.
    pub young: Option<f64>,
    pub nu: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub b0: f64,
    pub gamma: f64,
    pub perm_k: f64,
    pub perm_d: f64,

    pub n: usize,
    pub n_ladder: Vec<usize>,
    pub k: usize,
    pub l: usize,

    pub t_final: f64,
    pub steps: usize,
    pub dt_ladder: Vec<f64>,

    pub solver: SolverMode,
    pub tol: f64,
    pub max_iter: usize,
    pub stopping: StoppingRule,
    pub schedule: Schedule,

    pub stabilization: Stabilization,
    pub eta_phi: f64,
    pub eta_psi: f64,

    pub output_dir: PathBuf,
    pub samples: usize,
    pub section_x: f64,
    pub reference: bool,
    pub reference_n: usize,
    pub reference_steps: usize,
    pub vtk: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::preset(Experiment::ConvergeTime)
    }
}

impl RunConfig {
    /// Setup of the corresponding numerical study.
    pub fn preset(experiment: Experiment) -> Self {
        let p = ModelParams::default();
        let mut c = RunConfig {
            experiment,
            seed: 0,
            model: ModelKind::General,
            problem: ProblemKind::Manufactured,
            variant: BarryMercerVariant::SmoothRun,
            mu: p.mu,
            lambda: p.lambda,
            young: None,
            nu: None,
            alpha: p.alpha,
            beta: p.beta,
            c1: p.c1,
            c2: p.c2,
            b0: p.b0,
            gamma: p.gamma,
            perm_k: p.k,
            perm_d: p.d,
            n: 64,
            n_ladder: vec![4, 8, 16, 32],
            k: 3,
            l: 3,
            t_final: 1.0,
            steps: 32,
            dt_ladder: vec![0.25, 0.125, 0.0625, 0.03125],
            solver: SolverMode::Monolithic,
            tol: 1e-8,
            max_iter: 30,
            stopping: StoppingRule::Increment,
            schedule: Schedule::Parallel,
            stabilization: Stabilization::Off,
            eta_phi: 0.0,
            eta_psi: 0.0,
            output_dir: PathBuf::from("output"),
            samples: 129,
            section_x: 0.25,
            reference: false,
            reference_n: 128,
            reference_steps: 160,
            vtk: true,
        };
        match experiment {
            Experiment::ConvergeTime => {}
            Experiment::ConvergeSpace => {
                c.t_final = 0.01;
                c.steps = 64;
                c.k = 2;
                c.l = 2;
            }
            Experiment::Iterate => {
                c.n = 16;
                c.k = 2;
                c.l = 2;
                c.solver = SolverMode::Decoupled;
                c.tol = 1e-10;
                c.max_iter = 50;
            }
            Experiment::BarryMercer => c.apply_variant(BarryMercerVariant::SmoothRun),
            Experiment::SingleRun => {
                c.n = 8;
                c.k = 2;
                c.l = 2;
                c.steps = 8;
            }
        }
        c
    }

    /// Barry–Mercer problem data of one variant.
    fn apply_variant(&mut self, v: BarryMercerVariant) {
        self.problem = ProblemKind::BarryMercer;
        self.variant = v;
        self.n = 64;
        self.k = 2;
        self.l = 1;
        match v {
            BarryMercerVariant::StabSingleStep => {
                self.young = Some(1e5);
                self.nu = Some(0.1);
                self.perm_k = 1e-6;
                self.perm_d = 1e-6;
                self.reference = false;
            }
            BarryMercerVariant::SmoothRun => {
                self.young = None;
                self.nu = None;
                self.mu = 0.4;
                self.lambda = 0.2;
                self.perm_k = 1.0;
                self.perm_d = 1.0;
                self.reference = true;
            }
        }
        self.alpha = 0.5;
        self.beta = 0.5;
        self.c1 = 0.0;
        self.c2 = 0.0;
        self.b0 = 0.0;
        self.gamma = 0.0;
        self.t_final = v.final_time();
        self.steps = v.steps();
        self.max_iter = v.iterations();
        self.tol = 0.0;
        self.solver = SolverMode::Decoupled;
        self.stabilization = Stabilization::Scaled;
    }

    /// Lamé coefficients after the optional Young/Poisson conversion.
    pub fn lame(&self) -> Result<(f64, f64), ConfigError> {
        match (self.young, self.nu) {
            (Some(e), Some(nu)) => lame_from_young_poisson(e, nu).map_err(|err| {
                let field = if (0.0..0.5).contains(&nu) { "young" } else { "nu" };
                ConfigError::field(field, err.to_string())
            }),
            (None, None) => Ok((self.lambda, self.mu)),
            (Some(_), None) => Err(ConfigError::field("nu", "young is set but nu is missing")),
            (None, Some(_)) => Err(ConfigError::field("young", "nu is set but young is missing")),
        }
    }

    /// Model parameters with specialization and stabilization for mesh size `h`.
    pub fn model_params(&self, h: f64) -> Result<ModelParams, ConfigError> {
        let (lambda, mu) = self.lame()?;
        let mut p = ModelParams {
            mu,
            lambda,
            alpha: self.alpha,
            beta: self.beta,
            c1: self.c1,
            c2: self.c2,
            b0: self.b0,
            gamma: self.gamma,
            k: self.perm_k,
            d: self.perm_d,
            eta_phi: 0.0,
            eta_psi: 0.0,
        };
        p = specialize(self.model, p);
        match self.stabilization {
            Stabilization::Off => {}
            Stabilization::Scaled => p = p.with_stabilization(scaled_stabilization(mu, lambda, h)),
            Stabilization::Explicit => {
                p.eta_phi = self.eta_phi;
                p.eta_psi = self.eta_psi;
            }
        }
        p.validate().map_err(|e| ConfigError::field(&Self::param_field(&e.to_string()), e.to_string()))?;
        Ok(p)
    }

    fn param_field(msg: &str) -> String {
        msg.split_whitespace().next().unwrap_or("params").to_string()
    }

    /// Checks every constraint; called before any run.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(2..=3).contains(&self.k) {
            return Err(ConfigError::field("k", format!("must be 2 or 3, got {}", self.k)));
        }
        if !(1..=3).contains(&self.l) {
            return Err(ConfigError::field("l", format!("must be 1, 2 or 3, got {}", self.l)));
        }
        if self.n == 0 {
            return Err(ConfigError::field("n", "must be at least 1"));
        }
        if self.n_ladder.is_empty() || self.n_ladder.contains(&0) {
            return Err(ConfigError::field("n_ladder", "needs positive entries"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(ConfigError::field("t_final", "must be positive"));
        }
        if self.steps == 0 {
            return Err(ConfigError::field("steps", "must be at least 1"));
        }
        if self.dt_ladder.is_empty() || self.dt_ladder.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(ConfigError::field("dt_ladder", "needs positive entries"));
        }
        // The ladder only drives the temporal study; other presets inherit it
        // unchanged even when their final time differs.
        for &dt in self.dt_ladder.iter().filter(|_| self.experiment == Experiment::ConvergeTime) {
            steps_for(self.t_final, dt).map_err(|m| ConfigError::field("dt_ladder", m))?;
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(ConfigError::field("tol", "must be non-negative"));
        }
        if self.max_iter == 0 {
            return Err(ConfigError::field("max_iter", "must be at least 1"));
        }
        if self.samples < 3 {
            return Err(ConfigError::field("samples", "must be at least 3"));
        }
        if !(0.0..=1.0).contains(&self.section_x) {
            return Err(ConfigError::field("section_x", "must lie in [0, 1]"));
        }
        if self.reference_n == 0 || self.reference_steps == 0 {
            return Err(ConfigError::field("reference_n", "reference resolution must be positive"));
        }
        self.model_params(1.0 / self.n as f64)?;
        Ok(())
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.rsplit('.').next().unwrap_or(key);
        let fe = |m: String| ConfigError::field(key, m);
        match key {
            "experiment" => *self = Self::preset(value.parse().map_err(|e: ConfigError| fe(e.message))?),
            "variant" => self.apply_variant(parse_token(key, value)?),
            "seed" => self.seed = parse_num(key, value)?,
            "model" => self.model = parse_token(key, value)?,
            "problem" => self.problem = parse_token(key, value)?,
            "mu" => self.mu = parse_num(key, value)?,
            "lambda" => self.lambda = parse_num(key, value)?,
            "young" => self.young = parse_opt(key, value)?,
            "nu" => {
                self.nu = parse_opt(key, value)?;
                if let Some(nu) = self.nu {
                    if !(0.0..0.5).contains(&nu) {
                        return Err(fe(format!("Poisson ratio must lie in [0, 0.5), got {nu}")));
                    }
                }
            }
            "alpha" => self.alpha = parse_num(key, value)?,
            "beta" => self.beta = parse_num(key, value)?,
            "c1" => self.c1 = parse_num(key, value)?,
            "c2" => self.c2 = parse_num(key, value)?,
            "b0" => self.b0 = parse_num(key, value)?,
            "gamma" => self.gamma = parse_num(key, value)?,
            "K" => self.perm_k = parse_num(key, value)?,
            "D" => self.perm_d = parse_num(key, value)?,
            "n" => self.n = parse_num(key, value)?,
            "n_ladder" => self.n_ladder = parse_list(key, value)?,
            "k" => self.k = parse_num(key, value)?,
            "l" => self.l = parse_num(key, value)?,
            "t_final" => self.t_final = parse_num(key, value)?,
            "steps" => self.steps = parse_num(key, value)?,
            "dt" => {
                let dt: f64 = parse_num(key, value)?;
                self.steps = steps_for(self.t_final, dt).map_err(fe)?;
            }
            "dt_ladder" => self.dt_ladder = parse_list(key, value)?,
            "solver" => self.solver = parse_token(key, value)?,
            "tol" => self.tol = parse_num(key, value)?,
            "max_iter" => self.max_iter = parse_num(key, value)?,
            "stopping" => self.stopping = parse_token(key, value)?,
            "schedule" => self.schedule = parse_token(key, value)?,
            "stabilization" => self.stabilization = parse_token(key, value)?,
            "eta_phi" => self.eta_phi = parse_num(key, value)?,
            "eta_psi" => self.eta_psi = parse_num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "samples" => self.samples = parse_num(key, value)?,
            "section_x" => self.section_x = parse_num(key, value)?,
            "reference" => self.reference = parse_num(key, value)?,
            "reference_n" => self.reference_n = parse_num(key, value)?,
            "reference_steps" => self.reference_steps = parse_num(key, value)?,
            "vtk" => self.vtk = parse_num(key, value)?,
            _ => return Err(fe("unknown key".into())),
        }
        Ok(())
    }

    /// Canonical text form; `parse_config(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let f = |v: f64| format!("{v:?}");
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), f);
        let list = |v: &[String]| v.join(", ");
        let mut s = String::new();
        let mut section = |name: &str, entries: Vec<(&str, String)>| {
            s.push_str(&format!("[{name}]\n"));
            for (k, v) in entries {
                s.push_str(&format!("{k} = {v}\n"));
            }
            s.push('\n');
        };
        section("experiment", vec![("experiment", self.experiment.token().into()), ("seed", self.seed.to_string())]);
        section(
            "model",
            vec![
                ("model", self.model.token().into()),
                ("problem", self.problem.token().into()),
                ("variant", self.variant.token().into()),
                ("mu", f(self.mu)),
                ("lambda", f(self.lambda)),
                ("young", opt(self.young)),
                ("nu", opt(self.nu)),
                ("alpha", f(self.alpha)),
                ("beta", f(self.beta)),
                ("c1", f(self.c1)),
                ("c2", f(self.c2)),
                ("b0", f(self.b0)),
                ("gamma", f(self.gamma)),
                ("K", f(self.perm_k)),
                ("D", f(self.perm_d)),
            ],
        );
        section(
            "mesh",
            vec![
                ("n", self.n.to_string()),
                ("n_ladder", list(&self.n_ladder.iter().map(|v| v.to_string()).collect::<Vec<_>>())),
                ("k", self.k.to_string()),
                ("l", self.l.to_string()),
            ],
        );
        section(
            "time",
            vec![
                ("t_final", f(self.t_final)),
                ("steps", self.steps.to_string()),
                ("dt_ladder", list(&self.dt_ladder.iter().map(|&v| f(v)).collect::<Vec<_>>())),
            ],
        );
        section(
            "solver",
            vec![
                ("solver", self.solver.token().into()),
                ("tol", f(self.tol)),
                ("max_iter", self.max_iter.to_string()),
                ("stopping", self.stopping.token().into()),
                ("schedule", self.schedule.token().into()),
            ],
        );
        section(
            "stabilization",
            vec![
                ("stabilization", self.stabilization.token().into()),
                ("eta_phi", f(self.eta_phi)),
                ("eta_psi", f(self.eta_psi)),
            ],
        );
        section(
            "output",
            vec![
                ("output_dir", self.output_dir.display().to_string()),
                ("samples", self.samples.to_string()),
                ("section_x", f(self.section_x)),
                ("reference", self.reference.to_string()),
                ("reference_n", self.reference_n.to_string()),
                ("reference_steps", self.reference_steps.to_string()),
                ("vtk", self.vtk.to_string()),
            ],
        );
        s
    }
}

/// Section of every recognised key.
const KEYS: &[(&str, &str)] = &[
    ("experiment", "experiment"),
    ("seed", "experiment"),
    ("model", "model"),
    ("problem", "model"),
    ("variant", "model"),
    ("mu", "model"),
    ("lambda", "model"),
    ("young", "model"),
    ("nu", "model"),
    ("alpha", "model"),
    ("beta", "model"),
    ("c1", "model"),
    ("c2", "model"),
    ("b0", "model"),
    ("gamma", "model"),
    ("K", "model"),
    ("D", "model"),
    ("n", "mesh"),
    ("n_ladder", "mesh"),
    ("k", "mesh"),
    ("l", "mesh"),
    ("t_final", "time"),
    ("steps", "time"),
    ("dt", "time"),
    ("dt_ladder", "time"),
    ("solver", "solver"),
    ("tol", "solver"),
    ("max_iter", "solver"),
    ("stopping", "solver"),
    ("schedule", "solver"),
    ("stabilization", "stabilization"),
    ("eta_phi", "stabilization"),
    ("eta_psi", "stabilization"),
    ("output_dir", "output"),
    ("samples", "output"),
    ("section_x", "output"),
    ("reference", "output"),
    ("reference_n", "output"),
    ("reference_steps", "output"),
    ("vtk", "output"),
];

fn section_of(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, s)| *s)
}

fn steps_for(t_final: f64, dt: f64) -> Result<usize, String> {
    let n = (t_final / dt).round();
    if n < 1.0 || ((n * dt - t_final) / t_final).abs() > 1e-9 {
        return Err(format!("time step {dt} does not divide the final time {t_final}"));
    }
    Ok(n as usize)
}

/// Parses a number, a fraction `a/b`, or a boolean.
trait FromValue: Sized {
    fn from_value(s: &str) -> Option<Self>;
}

impl FromValue for f64 {
    fn from_value(s: &str) -> Option<Self> {
        if let Some((a, b)) = s.split_once('/') {
            let (a, b): (f64, f64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
            return (b != 0.0).then(|| a / b);
        }
        s.parse().ok().filter(|v: &f64| v.is_finite())
    }
}

impl FromValue for usize {
    fn from_value(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl FromValue for u64 {
    fn from_value(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl FromValue for bool {
    fn from_value(s: &str) -> Option<Self> {
        match s {
            "true" | "yes" | "on" | "1" => Some(true),
            "false" | "no" | "off" | "0" => Some(false),
            _ => None,
        }
    }
}

fn parse_num<T: FromValue>(key: &str, value: &str) -> Result<T, ConfigError> {
    T::from_value(value.trim()).ok_or_else(|| ConfigError::field(key, format!("invalid value '{value}'")))
}

fn parse_opt(key: &str, value: &str) -> Result<Option<f64>, ConfigError> {
    if value.trim() == "none" {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

fn parse_list<T: FromValue>(key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    value.split(',').map(|v| parse_num(key, v)).collect()
}

fn parse_token<T: Token>(key: &str, value: &str) -> Result<T, ConfigError> {
    T::parse_token(value.trim())
        .ok_or_else(|| ConfigError::field(key, format!("expected one of {}, got '{value}'", T::choices())))
}

/// A `key = value` entry with its line number.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits a document into entries, checking syntax, keys and sections.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut section: Option<String> = None;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(Some(line), "unterminated section header"))?
                .trim();
            if !KEYS.iter().any(|(_, sec)| *sec == name) {
                return Err(ConfigError::at(Some(line), format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) =
            s.split_once('=').ok_or_else(|| ConfigError::at(Some(line), format!("expected 'key = value', got '{s}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::at(Some(line), "missing key before '='"));
        }
        let home = section_of(key).ok_or_else(|| ConfigError {
            line: Some(line),
            field: Some(key.to_string()),
            message: "unknown key".into(),
        })?;
        if let Some(sec) = &section {
            if sec != home {
                return Err(ConfigError {
                    line: Some(line),
                    field: Some(key.to_string()),
                    message: format!("key belongs to section [{home}], not [{sec}]"),
                });
            }
        }
        if out.iter().any(|e: &Entry| e.key == key) {
            return Err(ConfigError { line: Some(line), field: Some(key.to_string()), message: "duplicate key".into() });
        }
        out.push(Entry { line, key: key.to_string(), value: value.to_string() });
    }
    Ok(out)
}

/// Applies entries on top of `base`: selectors first, then the rest in order.
pub fn apply_entries(mut base: RunConfig, entries: &[Entry]) -> Result<RunConfig, ConfigError> {
    let rank = |k: &str| match k {
        "experiment" => 0,
        "variant" => 1,
        _ => 2,
    };
    let mut sorted: Vec<&Entry> = entries.iter().collect();
    sorted.sort_by_key(|e| rank(&e.key));
    for e in sorted {
        base.set(&e.key, &e.value).map_err(|mut err| {
            err.line = (e.line > 0).then_some(e.line);
            err
        })?;
    }
    Ok(base)
}

/// Parses and validates a configuration document on top of the default
/// (temporal convergence) preset.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg = apply_entries(RunConfig::default(), &parse_entries(text)?)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Parses a `--set key=value` override.
pub fn parse_override(s: &str) -> Result<Entry, ConfigError> {
    let (k, v) = s.split_once('=').ok_or_else(|| ConfigError::at(None, format!("override '{s}' is not key=value")))?;
    let key = k.trim().rsplit('.').next().unwrap_or("").to_string();
    if section_of(&key).is_none() {
        return Err(ConfigError::field(&key, "unknown key"));
    }
    Ok(Entry { line: 0, key, value: v.trim().to_string() })
}
