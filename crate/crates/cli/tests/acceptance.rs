//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Criteria 1, 2, 3, 4, 7 and 8 run the standard presets
//! through the same checks the CLI applies; the rest are self-contained.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use poro_cli::checks::{check_outcome, Check};
use poro_cli::config::{Experiment, RunConfig};
use poro_cli::experiments::run_experiment;
use poro_core::analysis::energy_functionals;
use poro_core::decoupled::{DecoupledSolver, Schedule};
use poro_core::fem::{build_field_spaces, FieldSpaces};
use poro_core::mesh::{build_unit_square_mesh, tag_boundaries, BoundaryScheme};
use poro_core::model::manufactured::manufactured_sources;
use poro_core::model::{manufactured_problem, FieldState, ModelParams, ProblemData};
use poro_core::monolithic::{block_matrix, run, Operators, TimeGrid};

fn combine(checks: &[Check]) -> (bool, String) {
    let pass = checks.iter().all(|c| c.pass);
    let text: Vec<String> = checks.iter().map(ToString::to_string).collect();
    (pass, text.join("; "))
}

fn preset_checks(experiment: Experiment, edit: impl FnOnce(&mut RunConfig)) -> Vec<Check> {
    let mut cfg = RunConfig::preset(experiment);
    edit(&mut cfg);
    match run_experiment(&cfg).and_then(|out| check_outcome(&cfg, &out)) {
        Ok(c) => c,
        Err(e) => vec![Check { name: "run".into(), pass: false, detail: e.to_string() }],
    }
}

fn spaces(n: usize, scheme: BoundaryScheme) -> FieldSpaces {
    let mesh = Arc::new(tag_boundaries(&build_unit_square_mesh(n).unwrap(), scheme).unwrap());
    build_field_spaces(&mesh, 2, 2).unwrap()
}

fn random_state(sp: &FieldSpaces, rng: &mut StdRng) -> FieldState {
    let mut v = |n: usize| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
    let [nu, nx, nq, ns] = sp.sizes();
    FieldState { t: 0.0, u: v(nu), xi: v(nx), phi: v(nq), psi: v(ns) }
}

fn energy_identity() -> (bool, String) {
    let mut rng = StdRng::seed_from_u64(19);
    let (mut worst, mut min_form, mut count) = (0.0f64, f64::INFINITY, 0);
    for n in [2, 4] {
        let sp = spaces(n, BoundaryScheme::AllDirichlet);
        for _ in 0..100 {
            let mut pos = || rng.random_range(0.1..3.0);
            let (mu, lambda, alpha, beta, k, d) = (pos(), pos(), pos(), pos(), pos(), pos());
            let b0 = rng.random_range(0.0..0.5);
            let p = ModelParams {
                mu,
                lambda,
                alpha,
                beta,
                c1: b0 + rng.random_range(0.0..2.0),
                c2: b0 + rng.random_range(0.0..2.0),
                b0,
                gamma: rng.random_range(0.0..1.0),
                k,
                d,
                eta_phi: 0.0,
                eta_psi: 0.0,
            };
            let sys = block_matrix(&Operators::new(&sp, &p).unwrap(), &p, 1.0, sp.mesh().h()).unwrap();
            let s = random_state(&sp, &mut rng);
            let z = s.fields().concat();
            let form = sys.matrix().bilinear(&z, &z);
            let en = energy_functionals(&s, &p, &sp).unwrap();
            worst = worst.max((form - (en.e + en.v)).abs() / form.abs().max(1.0));
            min_form = min_form.min(form);
            count += 1;
        }
    }
    (
        worst <= 1e-10 && min_form > 0.0,
        format!("{count} tuples, worst scaled gap {worst:.2e} (limit 1e-10), smallest form {min_form:.3e}"),
    )
}

fn exact_fields(x: f64, y: f64, t: f64) -> [f64; 4] {
    let b = x * y * (1.0 - x).powi(2) * (1.0 - y);
    [
        (PI * x * t).sin() * (PI * y * t).cos() * b,
        (PI * x * t).cos() * (PI * y * t).sin() * b,
        (t + x - y).cos() * b,
        (t + x - y).sin() * b,
    ]
}

/// Sources by central differences of the exact fields.
fn fd_sources(p: &ModelParams, q: [f64; 3]) -> [f64; 4] {
    const H: f64 = 1e-5;
    let at = |i: usize, a: f64, j: usize, b: f64| {
        let mut r = q;
        r[i] += a;
        r[j] += b;
        exact_fields(r[0], r[1], r[2])
    };
    let d = |c: usize, i: usize| (at(i, H, i, 0.0)[c] - at(i, -H, i, 0.0)[c]) / (2.0 * H);
    let d2 = |c: usize, i: usize, j: usize| {
        if i == j {
            (at(i, H, i, 0.0)[c] - 2.0 * at(i, 0.0, i, 0.0)[c] + at(i, -H, i, 0.0)[c]) / (H * H)
        } else {
            (at(i, H, j, H)[c] - at(i, H, j, -H)[c] - at(i, -H, j, H)[c] + at(i, -H, j, -H)[c]) / (4.0 * H * H)
        }
    };
    let lap = |c: usize| d2(c, 0, 0) + d2(c, 1, 1);
    let v = exact_fields(q[0], q[1], q[2]);
    let dt_div = d2(0, 0, 2) + d2(1, 1, 2);
    let f = |i: usize| {
        -p.mu * lap(i) - (p.mu + p.lambda) * (d2(0, 0, i) + d2(1, 1, i)) + p.alpha * d(2, i) + p.beta * d(3, i)
    };
    [
        f(0),
        f(1),
        p.c1 * d(2, 2) - p.b0 * d(3, 2) + p.alpha * dt_div - p.k * lap(2) + p.gamma * (v[2] - v[3]),
        p.c2 * d(3, 2) - p.b0 * d(2, 2) + p.beta * dt_div - p.d * lap(3) + p.gamma * (v[3] - v[2]),
    ]
}

fn source_oracle() -> (bool, String) {
    let p = ModelParams::default();
    let mut rng = StdRng::seed_from_u64(31);
    let samples: Vec<([f64; 4], [f64; 4])> = (0..50)
        .map(|_| {
            let q = [rng.random_range(0.05..0.95), rng.random_range(0.05..0.95), rng.random_range(0.0..1.0)];
            let (f, g, h) = manufactured_sources(&p, [q[0], q[1]], q[2]);
            ([f[0], f[1], g, h], fd_sources(&p, q))
        })
        .collect();
    let scale = samples.iter().flat_map(|(a, _)| a.map(f64::abs)).fold(0.0, f64::max);
    let worst = samples
        .iter()
        .flat_map(|(a, b)| (0..4).map(move |k| (a[k] - b[k]).abs() / a[k].abs().max(scale)))
        .fold(0.0, f64::max);
    (worst <= 1e-6, format!("50 samples, worst relative deviation {worst:.2e} (limit 1e-6)"))
}

fn schedule_determinism() -> (bool, String) {
    let sp = spaces(16, BoundaryScheme::RightNeumann);
    let problem = manufactured_problem(ModelParams::default());
    let grid = TimeGrid::new(1.0, 32).unwrap();
    let solver = DecoupledSolver::new(&problem, &sp, &grid).unwrap();
    let flat = vec![solver.initial_state().xi.clone(); 33];
    let (phi, psi) = solver.transport_sweep(&flat).unwrap();
    let (u0, xi0) = solver.mechanics_solve_all(&phi, &psi, Schedule::Sequential).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let (u, xi) = solver.mechanics_solve_all(&phi, &psi, Schedule::Parallel).unwrap();
        for (a, b) in [(&u, &u0), (&xi, &xi0)] {
            for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    (worst <= 1e-12, format!("N=32, 5 runs, max entrywise difference {worst:.1e} (limit 1e-12)"))
}

fn energy_decay() -> (bool, String) {
    let p = ModelParams::default();
    let s = |q: [f64; 2]| (PI * q[0]).sin() * (PI * q[1]).sin();
    let problem = ProblemData {
        u0: Arc::new(move |q, _| [s(q) * q[0], -0.5 * s(q)]),
        phi0: Arc::new(move |q, _| s(q)),
        psi0: Arc::new(move |q, _| s(q) * (1.0 - q[0])),
        ..ProblemData::homogeneous(p, BoundaryScheme::AllDirichlet)
    };
    let sp = spaces(16, BoundaryScheme::AllDirichlet);
    let traj = run(&problem, &sp, &TimeGrid::new(1.0, 20).unwrap()).unwrap();
    let e: Vec<f64> = traj.states.iter().map(|s| energy_functionals(s, &p, &sp).unwrap().e).collect();
    let rises = e.windows(2).filter(|w| w[1] > w[0]).count();
    (
        rises == 0 && e[0] > 0.0,
        format!("N=20, E from {:.4e} to {:.4e}, {rises} increases", e[0], e[e.len() - 1]),
    )
}

fn main() -> ExitCode {
    let mut passed = Vec::new();
    let mut record = |n: usize, name: &str, start: Instant, (pass, detail): (bool, String)| {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {n} ({name}): {detail} [{:.1} s]", start.elapsed().as_secs_f64());
        passed.push(pass);
    };

    let t = Instant::now();
    record(1, "temporal convergence", t, combine(&preset_checks(Experiment::ConvergeTime, |_| {})));
    let t = Instant::now();
    record(2, "spatial convergence", t, combine(&preset_checks(Experiment::ConvergeSpace, |_| {})));
    let t = Instant::now();
    let it = preset_checks(Experiment::Iterate, |_| {});
    let split = it.len().saturating_sub(1);
    record(3, "iterative contraction", t, combine(&it[..split]));
    record(4, "fixed point equals monolithic", t, combine(&it[split..]));
    let t = Instant::now();
    record(5, "energy identity", t, energy_identity());
    let t = Instant::now();
    record(6, "manufactured sources", t, source_oracle());
    let t = Instant::now();
    record(7, "stabilization", t, combine(&preset_checks(Experiment::BarryMercer, |c| {
        c.set("variant", "stab_single_step").unwrap();
    })));
    let t = Instant::now();
    record(8, "smooth point-source run", t, combine(&preset_checks(Experiment::BarryMercer, |_| {})));
    let t = Instant::now();
    record(9, "parallel determinism", t, schedule_determinism());
    let t = Instant::now();
    record(10, "energy monotonicity", t, energy_decay());

    let ok = passed.iter().filter(|&&p| p).count();
    println!("acceptance: {ok} of {} criteria pass", passed.len());
    if ok == passed.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
