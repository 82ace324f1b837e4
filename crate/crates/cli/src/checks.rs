//! Pass/fail checks of experiment outcomes against published reference
//! numbers and expected behaviour.

use std::fmt;

use poro_core::analysis::{oscillation_metric, relative_curve_distance, FieldName};
use poro_core::model::BarryMercerVariant;

use crate::experiments::{BarryMercerStudy, ConvergenceStudy, IterationStudy, Outcome, RunResult};
use crate::config::{Experiment, RunConfig};

/// Reference errors at the final time for `Δt = 1/4 … 1/32` on `h = 1/64`,
/// `k = l = 3`. Columns: `u` (H¹), `ξ` (L²), `φ` (H¹), `ψ` (H¹).
pub const TEMPORAL_REFERENCE: [[f64; 4]; 4] = [
    [4.459e-4, 9.919e-4, 5.239e-3, 5.256e-3],
    [2.389e-4, 5.447e-4, 2.777e-3, 2.780e-3],
    [1.245e-4, 2.878e-4, 1.436e-3, 1.436e-3],
    [6.365e-5, 1.482e-4, 7.312e-4, 7.306e-4],
];

/// Reference errors for `h = 1/4 … 1/32` at `T_f = 0.01`, `Δt = T_f/64`,
/// `k = l = 2`.
pub const SPATIAL_REFERENCE: [[f64; 4]; 4] = [
    [5.610e-4, 3.332e-3, 5.914e-3, 5.983e-3],
    [1.495e-4, 9.170e-4, 1.644e-3, 1.646e-3],
    [3.757e-5, 2.341e-4, 4.189e-4, 4.190e-4],
    [9.381e-6, 5.883e-5, 1.051e-4, 1.052e-4],
];

pub const TEMPORAL_RATE_RANGE: (f64, f64) = (0.85, 1.05);
pub const TEMPORAL_ERROR_FACTOR: f64 = 2.0;
pub const SPATIAL_MIN_RATE: f64 = 1.90;
pub const SPATIAL_ERROR_FACTOR: f64 = 3.0;
/// Contraction ratios `r_3 … r_8` must satisfy `max/min ≤` this.
pub const RATIO_SPREAD: f64 = 1.25;
pub const ITERATE_TARGET: f64 = 1e-8;
pub const ITERATE_WITHIN: usize = 30;
pub const FIXED_POINT_TOL: f64 = 1e-8;
/// Relative errors below this are roundoff and exempt from the monotonicity
/// test.
pub const MONOTONE_FLOOR: f64 = 1e-13;
pub const UNDERSHOOT_MAX: f64 = 0.02;
pub const MIN_SIGN_FLIPS: usize = 3;
pub const REFERENCE_GAP: f64 = 0.02;
pub const SOLVER_GAP: f64 = 0.01;

const FIELDS: [&str; 4] = ["u", "xi", "phi", "psi"];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn same_ladder(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * y.abs())
}

fn finest_rates(study: &ConvergenceStudy) -> [Option<f64>; 4] {
    let rates = study.rates();
    std::array::from_fn(|k| rates[k].last().copied().flatten())
}

fn within_factor(study: &ConvergenceStudy, reference: &[[f64; 4]; 4], factor: f64) -> (bool, String) {
    let mut worst = 1.0f64;
    for (e, r) in study.errors.iter().zip(reference) {
        for (a, b) in e.as_array().into_iter().zip(r) {
            worst = worst.max(a / b).max(b / a);
        }
    }
    (worst <= factor, format!("worst ratio to reference {worst:.3} (limit {factor})"))
}

fn monotone_decay(study: &ConvergenceStudy) -> (bool, String) {
    let ok = (0..4).all(|k| study.errors.windows(2).all(|w| w[1].as_array()[k] < w[0].as_array()[k]));
    (ok, "errors decay monotonically along the ladder".into())
}

/// Rates in the temporal window at the finest pair and, on the standard
/// ladder, errors within a factor of the reference table.
pub fn check_temporal(study: &ConvergenceStudy, standard_setup: bool) -> Vec<Check> {
    let (lo, hi) = TEMPORAL_RATE_RANGE;
    let rates = finest_rates(study);
    let ok = rates.iter().all(|r| r.is_some_and(|r| (lo..=hi).contains(&r)));
    let mut out = vec![Check::new("temporal rates", ok, format!("finest-pair rates {}", show_rates(&rates)))];
    let ladder = [0.25, 0.125, 0.0625, 0.03125];
    let (pass, detail) = if standard_setup && same_ladder(&study.ladder, &ladder) {
        within_factor(study, &TEMPORAL_REFERENCE, TEMPORAL_ERROR_FACTOR)
    } else {
        monotone_decay(study)
    };
    out.push(Check::new("temporal errors", pass, detail));
    out
}

/// Rates of at least the spatial bound at the finest pair and, on the
/// standard ladder, errors within a factor of the reference table.
pub fn check_spatial(study: &ConvergenceStudy, standard_setup: bool) -> Vec<Check> {
    let rates = finest_rates(study);
    let ok = rates.iter().all(|r| r.is_some_and(|r| r >= SPATIAL_MIN_RATE));
    let mut out = vec![Check::new("spatial rates", ok, format!("finest-pair rates {}", show_rates(&rates)))];
    let ladder = [0.25, 0.125, 0.0625, 0.03125];
    let (pass, detail) = if standard_setup && same_ladder(&study.ladder, &ladder) {
        within_factor(study, &SPATIAL_REFERENCE, SPATIAL_ERROR_FACTOR)
    } else {
        monotone_decay(study)
    };
    out.push(Check::new("spatial errors", pass, detail));
    out
}

fn show_rates(rates: &[Option<f64>; 4]) -> String {
    let parts: Vec<String> = FIELDS
        .iter()
        .zip(rates)
        .map(|(n, r)| match r {
            Some(r) => format!("{n}={r:.3}"),
            None => format!("{n}=n/a"),
        })
        .collect();
    parts.join(" ")
}

/// Monotone decay of the relative iterative errors, linear contraction over
/// iterations 3 to 8, the accuracy target within the iteration budget and
/// agreement with the monolithic trajectory.
pub fn check_iteration(study: &IterationStudy) -> Vec<Check> {
    let e = &study.rel_errors;
    let mut offending = Vec::new();
    for (i, w) in e.windows(2).enumerate() {
        for k in 0..4 {
            if w[0][k] > MONOTONE_FLOOR && w[1][k] > w[0][k] {
                offending.push(format!("{} at iteration {}", FIELDS[k], i + 2));
            }
        }
    }
    let mono = Check::new(
        "iterative errors decay monotonically",
        offending.is_empty(),
        if offending.is_empty() {
            format!("{} iterations", e.len())
        } else {
            format!("increase for {}", offending.join(", "))
        },
    );

    // ratios[j] compares metric j + 2 with metric j + 1.
    let window: Vec<f64> = (3..=8).filter_map(|i| study.report.ratios.get(i - 2).copied()).collect();
    let (min, max) = window.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    let linear = window.len() == 6 && max < 1.0 && max / min <= RATIO_SPREAD;
    let ratios: Vec<String> = window.iter().map(|r| format!("{r:.3}")).collect();
    let linear = Check::new(
        "contraction ratios r_3..r_8 below one and linear",
        linear,
        format!("ratios [{}], max/min {:.3} (limit {RATIO_SPREAD})", ratios.join(", "), max / min),
    );

    let hit = e.iter().position(|r| r.iter().all(|&v| v <= ITERATE_TARGET)).map(|i| i + 1);
    let target = Check::new(
        format!("relative error <= {ITERATE_TARGET:e} within {ITERATE_WITHIN} iterations"),
        hit.is_some_and(|i| i <= ITERATE_WITHIN),
        match hit {
            Some(i) => format!("reached at iteration {i}"),
            None => "not reached".into(),
        },
    );

    let fixed = Check::new(
        "fixed point equals monolithic",
        study.report.converged && study.max_difference <= FIXED_POINT_TOL,
        format!(
            "converged={} after {} iterations, max relative difference {:.3e} (limit {FIXED_POINT_TOL:e})",
            study.report.converged, study.report.iterations, study.max_difference
        ),
    );
    vec![mono, linear, target, fixed]
}

/// Pressure undershoot with and without stabilization on the single-step
/// variant.
pub fn check_stabilization(study: &BarryMercerStudy) -> RunResult<Vec<Check>> {
    let (Some(stab), Some(bare)) = (study.set("decoupled"), study.set("decoupled_eta0")) else {
        return Ok(vec![Check::new("stabilization", false, "missing stabilized or unstabilized run")]);
    };
    let s = oscillation_metric(stab.field(FieldName::Phi))?;
    let b = oscillation_metric(bare.field(FieldName::Phi))?;
    Ok(vec![
        Check::new(
            "stabilized pressure undershoot",
            s.undershoot <= UNDERSHOOT_MAX && s.undershoot < b.undershoot,
            format!("undershoot {:.3e} (limit {UNDERSHOOT_MAX}, unstabilized {:.3e})", s.undershoot, b.undershoot),
        ),
        Check::new(
            "unstabilized run oscillates",
            b.sign_flips >= MIN_SIGN_FLIPS,
            format!("{} sign flips (need {MIN_SIGN_FLIPS})", b.sign_flips),
        ),
    ])
}

/// Every sampled field of the decoupled run against the refined reference,
/// and monolithic against decoupled.
pub fn check_smooth(study: &BarryMercerStudy) -> RunResult<Vec<Check>> {
    let (Some(mono), Some(dec)) = (study.set("monolithic"), study.set("decoupled")) else {
        return Ok(vec![Check::new("smooth run", false, "missing runs")]);
    };
    let mut out = Vec::new();
    match study.set("reference") {
        Some(r) => {
            let mut gaps = Vec::new();
            let mut ok = true;
            for f in FieldName::ALL {
                let d = relative_curve_distance(dec.field(f), r.field(f))?;
                ok &= d <= REFERENCE_GAP;
                gaps.push(format!("{}={:.4}", f.as_str(), d));
            }
            out.push(Check::new(
                "section matches refined reference",
                ok,
                format!("{} (limit {REFERENCE_GAP})", gaps.join(" ")),
            ));
        }
        None => out.push(Check::new("section matches refined reference", false, "reference run disabled")),
    }
    let mut gaps = Vec::new();
    let mut ok = true;
    for f in FieldName::ALL {
        let d = relative_curve_distance(dec.field(f), mono.field(f))?;
        ok &= d <= SOLVER_GAP;
        gaps.push(format!("{}={:.4}", f.as_str(), d));
    }
    out.push(Check::new("monolithic and decoupled sections agree", ok, format!("{} (limit {SOLVER_GAP})", gaps.join(" "))));
    Ok(out)
}

fn same_physics(a: &RunConfig, b: &RunConfig) -> bool {
    let scalars = |c: &RunConfig| [c.mu, c.lambda, c.alpha, c.beta, c.c1, c.c2, c.b0, c.gamma, c.perm_k, c.perm_d];
    a.model == b.model
        && a.problem == b.problem
        && (a.young, a.nu) == (b.young, b.nu)
        && scalars(a) == scalars(b)
        && a.stabilization == b.stabilization
}

/// Checks appropriate for the outcome of `cfg`. `single_run` has none.
pub fn check_outcome(cfg: &RunConfig, outcome: &Outcome) -> RunResult<Vec<Check>> {
    let p = RunConfig::preset(cfg.experiment);
    let same_model = same_physics(cfg, &p) && cfg.k == p.k && cfg.l == p.l && cfg.t_final == p.t_final;
    Ok(match outcome {
        Outcome::Convergence(s) if cfg.experiment == Experiment::ConvergeTime => {
            check_temporal(s, same_model && cfg.n == p.n)
        }
        Outcome::Convergence(s) => check_spatial(s, same_model && cfg.steps == p.steps),
        Outcome::Iteration(s) => check_iteration(s),
        Outcome::BarryMercer(s) => match cfg.variant {
            BarryMercerVariant::StabSingleStep => check_stabilization(s)?,
            BarryMercerVariant::SmoothRun => check_smooth(s)?,
        },
        Outcome::Single(_) => Vec::new(),
    })
}
