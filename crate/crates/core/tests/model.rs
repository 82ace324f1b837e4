//! Parameters, benchmark problems and the manufactured sources.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use poro_core::fem::{assemble_mass, build_field_spaces, FieldSpaces};
use poro_core::mesh::{build_unit_square_mesh, tag_boundaries, BoundaryScheme};
use poro_core::model::barry_mercer::source_frequency;
use poro_core::model::manufactured::manufactured_sources;
use poro_core::model::{
    barry_mercer_problem, lame_from_young_poisson, manufactured_problem, specialize, total_pressure_initial,
    BarryMercerVariant, ModelKind, ModelParams,
};

fn spaces(n: usize, k: usize, l: usize) -> FieldSpaces {
    let mesh = Arc::new(tag_boundaries(&build_unit_square_mesh(n).unwrap(), BoundaryScheme::BarryMercer).unwrap());
    build_field_spaces(&mesh, k, l).unwrap()
}

#[test]
fn lame_examples() {
    let (l, m) = lame_from_young_poisson(1e5, 0.1).unwrap();
    assert!((l - 11363.636363636364).abs() < 1e-9 && (m - 45454.545454545456).abs() < 1e-9);
    let (l, m) = lame_from_young_poisson(2.0, 0.0).unwrap();
    assert_eq!((l, m), (0.0, 1.0));
    let (l, m) = lame_from_young_poisson(1.0, 0.25).unwrap();
    assert!((l - 0.4).abs() < 1e-15 && (m - 0.4).abs() < 1e-15);
    assert!(ModelParams { lambda: 0.0, ..ModelParams::default() }.validate().is_err());
}

#[test]
fn specializations_zero_one_coupling() {
    let p = ModelParams::default();
    assert_eq!(specialize(ModelKind::ThermoPoroelastic, p).gamma, 0.0);
    assert_eq!(specialize(ModelKind::BarenblattBiot, p).b0, 0.0);
    assert_eq!(specialize(ModelKind::General, p), p);
}

#[test]
fn manufactured_initial_data() {
    let problem = manufactured_problem(ModelParams::default());
    assert!(((problem.phi0)([0.5, 0.5], 0.0) - 0.03125).abs() < 1e-15);
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..20 {
        let p = [rng.random::<f64>(), rng.random::<f64>()];
        assert_eq!((problem.u0)(p, 0.0), [0.0, 0.0]);
    }
}

/// Closed-form exact fields, written out independently of the library.
fn bubble(x: f64, y: f64) -> f64 {
    x * y * (1.0 - x).powi(2) * (1.0 - y)
}

fn u_exact(x: f64, y: f64, t: f64) -> [f64; 2] {
    let b = bubble(x, y);
    [(PI * x * t).sin() * (PI * y * t).cos() * b, (PI * x * t).cos() * (PI * y * t).sin() * b]
}

fn phi_exact(x: f64, y: f64, t: f64) -> f64 {
    (t + x - y).cos() * bubble(x, y)
}

fn psi_exact(x: f64, y: f64, t: f64) -> f64 {
    (t + x - y).sin() * bubble(x, y)
}

/// Sources obtained by central differences with step `H` applied to the
/// exact fields.
fn fd_sources(p: &ModelParams, x: f64, y: f64, t: f64) -> ([f64; 2], f64, f64) {
    const H: f64 = 1e-5;
    let d = |f: &dyn Fn(f64, f64, f64) -> f64, i: usize| {
        let e = |s: f64| match i {
            0 => f(x + s, y, t),
            1 => f(x, y + s, t),
            _ => f(x, y, t + s),
        };
        (e(H) - e(-H)) / (2.0 * H)
    };
    let d2 = |f: &dyn Fn(f64, f64, f64) -> f64, i: usize, j: usize| {
        let e = |a: f64, b: f64| {
            let mut q = [x, y, t];
            q[i] += a;
            q[j] += b;
            f(q[0], q[1], q[2])
        };
        if i == j {
            (e(H, 0.0) - 2.0 * f(x, y, t) + e(-H, 0.0)) / (H * H)
        } else {
            (e(H, H) - e(H, -H) - e(-H, H) + e(-H, -H)) / (4.0 * H * H)
        }
    };
    let u1 = |x: f64, y: f64, t: f64| u_exact(x, y, t)[0];
    let u2 = |x: f64, y: f64, t: f64| u_exact(x, y, t)[1];
    let lap = |f: &dyn Fn(f64, f64, f64) -> f64| d2(f, 0, 0) + d2(f, 1, 1);
    let grad_div = [d2(&u1, 0, 0) + d2(&u2, 1, 0), d2(&u1, 0, 1) + d2(&u2, 1, 1)];
    let dt_div = d2(&u1, 0, 2) + d2(&u2, 1, 2);
    let (phi, psi) = (phi_exact(x, y, t), psi_exact(x, y, t));
    let f = [
        -p.mu * lap(&u1) - (p.mu + p.lambda) * grad_div[0] + p.alpha * d(&phi_exact, 0) + p.beta * d(&psi_exact, 0),
        -p.mu * lap(&u2) - (p.mu + p.lambda) * grad_div[1] + p.alpha * d(&phi_exact, 1) + p.beta * d(&psi_exact, 1),
    ];
    let g = p.c1 * d(&phi_exact, 2) - p.b0 * d(&psi_exact, 2) + p.alpha * dt_div - p.k * lap(&phi_exact)
        + p.gamma * (phi - psi);
    let h = p.c2 * d(&psi_exact, 2) - p.b0 * d(&phi_exact, 2) + p.beta * dt_div - p.d * lap(&psi_exact)
        + p.gamma * (psi - phi);
    (f, g, h)
}

/// Samples of `(analytic, finite-difference)` source vectors `(f₁, f₂, g, h)`.
fn source_samples(p: &ModelParams, count: usize, seed: u64) -> Vec<([f64; 4], [f64; 4])> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (x, y, t) = (rng.random_range(0.05..0.95), rng.random_range(0.05..0.95), rng.random_range(0.0..1.0));
            let (f, g, h) = manufactured_sources(p, [x, y], t);
            let (ff, fg, fh) = fd_sources(p, x, y, t);
            ([f[0], f[1], g, h], [ff[0], ff[1], fg, fh])
        })
        .collect()
}

#[test]
fn manufactured_sources_match_finite_differences() {
    for p in [ModelParams::default(), ModelParams { mu: 2.0, lambda: 0.5, alpha: 0.7, k: 3.0, ..ModelParams::default() }] {
        let samples = source_samples(&p, 50, 5);
        // Errors are measured against the largest source magnitude over the
        // sample set so that isolated near-zeros do not dominate.
        let scale = samples.iter().flat_map(|(a, _)| a.iter().map(|v| v.abs())).fold(0.0f64, f64::max);
        for (a, b) in &samples {
            for k in 0..4 {
                let rel = (a[k] - b[k]).abs() / a[k].abs().max(scale);
                assert!(rel < 1e-6, "component {k}: {} vs {}", a[k], b[k]);
            }
        }
    }
}

#[test]
fn barry_mercer_variants_and_load() {
    let s = BarryMercerVariant::StabSingleStep.params().unwrap();
    assert_eq!((s.k, s.d, s.c1, s.c2, s.b0, s.gamma, s.alpha, s.beta), (1e-6, 1e-6, 0.0, 0.0, 0.0, 0.0, 0.5, 0.5));
    let m = BarryMercerVariant::SmoothRun.params().unwrap();
    assert_eq!((m.mu, m.lambda, m.k, m.d, m.alpha, m.beta), (0.4, 0.2, 1.0, 1.0, 0.5, 0.5));

    let problem = barry_mercer_problem(m).unwrap();
    let sp = spaces(8, 2, 1);
    let t = PI / 2.0 / source_frequency(&m);
    let b = problem.g.load(&sp.phi, t).unwrap();
    let k = sp.phi.node_coords().iter().position(|q| *q == [0.25, 0.25]).unwrap();
    assert!((b[k] - 2.0).abs() < 1e-14);
    assert!(b.iter().enumerate().all(|(i, v)| i == k || *v == 0.0));
    assert_eq!(problem.h.load(&sp.psi, t).unwrap(), b);
}

#[test]
fn total_pressure_initial_examples() {
    let sp = spaces(4, 2, 2);
    let p = ModelParams::default();
    let zero_u = vec![0.0; sp.u.n_dofs()];
    let zero_q = vec![0.0; sp.phi.n_dofs()];
    let xi = total_pressure_initial(&zero_u, &zero_q, &zero_q, &p, &sp).unwrap();
    assert!(xi.iter().all(|&v| v == 0.0));

    let one = vec![1.0; sp.phi.n_dofs()];
    let xi = total_pressure_initial(&zero_u, &one, &one, &p, &sp).unwrap();
    assert!(xi.iter().all(|&v| (v - 2.0).abs() < 1e-12));

    // Manufactured data: the projection approaches αφ₀ + βψ₀ at order h^k.
    let errs: Vec<f64> = [4, 8]
        .iter()
        .map(|&n| {
            let sp = spaces(n, 2, 2);
            let problem = manufactured_problem(p);
            let s = problem.initial_state(&sp).unwrap();
            let target = sp.xi.interpolate_scalar(|q| (problem.phi0)(q, 0.0) + (problem.psi0)(q, 0.0));
            let d: Vec<f64> = s.xi.iter().zip(&target).map(|(a, b)| a - b).collect();
            assemble_mass(&sp.xi, &sp.xi, 1.0).unwrap().bilinear(&d, &d).sqrt()
        })
        .collect();
    assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
}
