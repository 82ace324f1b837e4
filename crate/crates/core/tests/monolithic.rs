//! Block structure and time stepping of the fully coupled scheme.

use std::sync::Arc;

use poro_core::fem::{
    assemble_divergence, assemble_elasticity, assemble_mass, assemble_stiffness, build_field_spaces, FieldSpaces,
};
use poro_core::mesh::{build_unit_square_mesh, tag_boundaries, BoundaryScheme};
use poro_core::model::{manufactured_problem, ExactSolution, ModelParams, ProblemData, ScalarSource};
use poro_core::monolithic::{assemble_system, block_matrix, run, Operators, TimeGrid};
use poro_core::sparse::SparseMatrix;

fn spaces(n: usize, k: usize, l: usize, scheme: BoundaryScheme) -> FieldSpaces {
    let mesh = Arc::new(tag_boundaries(&build_unit_square_mesh(n).unwrap(), scheme).unwrap());
    build_field_spaces(&mesh, k, l).unwrap()
}

fn odd_params() -> ModelParams {
    ModelParams {
        mu: 1.3,
        lambda: 0.7,
        alpha: 0.9,
        beta: 0.6,
        c1: 1.1,
        c2: 1.4,
        b0: 0.2,
        gamma: 0.3,
        k: 0.8,
        d: 1.5,
        eta_phi: 0.05,
        eta_psi: 0.07,
    }
}

/// Places `m` scaled by `s` into `dense` at the given offsets.
fn place(dense: &mut [Vec<f64>], m: &SparseMatrix, s: f64, r0: usize, c0: usize) {
    for (i, j, v) in m.iter() {
        dense[r0 + i][c0 + j] += s * v;
    }
}

#[test]
fn block_matrix_matches_dense_placement_on_one_square() {
    let sp = spaces(1, 2, 2, BoundaryScheme::AllDirichlet);
    let p = odd_params();
    let (dt, h) = (0.25, sp.mesh().h());
    let sys = block_matrix(&Operators::new(&sp, &p).unwrap(), &p, dt, h).unwrap();

    let [nu, nx, nq, ns] = sp.sizes();
    let (ou, ox, oq, os) = (0, nu, nu + nx, nu + nx + nq);
    let mut want = vec![vec![0.0; os + ns]; os + ns];
    let el = assemble_elasticity(&sp.u, p.mu).unwrap();
    let b = assemble_divergence(&sp.u, &sp.xi).unwrap();
    let mx = assemble_mass(&sp.xi, &sp.xi, 1.0).unwrap();
    let mxq = assemble_mass(&sp.xi, &sp.phi, 1.0).unwrap();
    let mq = assemble_mass(&sp.phi, &sp.phi, 1.0).unwrap();
    let aq = assemble_stiffness(&sp.phi, 1.0).unwrap();
    let (lam, a, be) = (p.lambda, p.alpha, p.beta);

    place(&mut want, &el, 1.0, ou, ou);
    place(&mut want, &b.transpose(), -1.0, ou, ox);
    place(&mut want, &b, 1.0, ox, ou);
    place(&mut want, &mx, 1.0 / lam, ox, ox);
    place(&mut want, &mxq, -a / lam, ox, oq);
    place(&mut want, &mxq, -be / lam, ox, os);
    place(&mut want, &mxq.transpose(), -a / (lam * dt), oq, ox);
    place(&mut want, &mxq.transpose(), -be / (lam * dt), os, ox);
    place(&mut want, &mq, (p.c1 + a * a / lam) / dt + p.gamma, oq, oq);
    place(&mut want, &aq, p.k + p.eta_phi * h * h / dt, oq, oq);
    place(&mut want, &mq, (a * be / lam - p.b0) / dt - p.gamma, oq, os);
    place(&mut want, &mq, (a * be / lam - p.b0) / dt - p.gamma, os, oq);
    place(&mut want, &mq, (p.c2 + be * be / lam) / dt + p.gamma, os, os);
    place(&mut want, &aq, p.d + p.eta_psi * h * h / dt, os, os);

    let got = sys.matrix().to_dense();
    for i in 0..want.len() {
        for j in 0..want.len() {
            assert!((got[i][j] - want[i][j]).abs() < 1e-12, "entry ({i},{j}): {} vs {}", got[i][j], want[i][j]);
        }
    }
}

#[test]
fn unit_coefficients_give_two_mass_plus_stiffness() {
    let sp = spaces(3, 2, 2, BoundaryScheme::AllDirichlet);
    let p = ModelParams { b0: 0.0, gamma: 0.0, ..ModelParams::default() };
    let sys = block_matrix(&Operators::new(&sp, &p).unwrap(), &p, 1.0, sp.mesh().h()).unwrap();
    let m = assemble_mass(&sp.phi, &sp.phi, 2.0).unwrap();
    let a = assemble_stiffness(&sp.phi, 1.0).unwrap();
    let want = SparseMatrix::linear_combination(&[(1.0, &m), (1.0, &a)]).unwrap().to_dense();
    let got = sys.block(2, 2).unwrap().to_dense();
    for (r, s) in got.iter().zip(&want) {
        for (x, y) in r.iter().zip(s) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}

#[test]
fn zero_data_stays_zero() {
    let sp = spaces(4, 2, 2, BoundaryScheme::AllDirichlet);
    let problem = ProblemData::homogeneous(ModelParams::default(), BoundaryScheme::AllDirichlet);
    let traj = run(&problem, &sp, &TimeGrid::new(1.0, 3).unwrap()).unwrap();
    assert_eq!(traj.len(), 4);
    for s in &traj.states {
        assert!(s.fields().iter().all(|f| f.iter().all(|&v| v == 0.0)));
    }
}

#[test]
fn one_step_run_equals_one_advance() {
    let sp = spaces(4, 2, 2, BoundaryScheme::RightNeumann);
    let problem = manufactured_problem(ModelParams::default());
    let grid = TimeGrid::new(0.5, 1).unwrap();
    let traj = run(&problem, &sp, &grid).unwrap();
    let sys = assemble_system(&problem, &sp, &grid).unwrap();
    let init = problem.initial_state(&sp).unwrap();
    let one = sys.advance(&init, 0.5).unwrap();
    assert_eq!(traj.last(), &one);
    assert!(sys.residual(&init, &one).unwrap() < 1e-12);
}

/// `u = (x², y²)`, `φ = x + y`, `ψ = x − y`, which the Taylor–Hood P2–P1
/// pair with P2 pressures reproduces exactly.
fn steady_problem(p: ModelParams) -> ProblemData {
    let u = |q: [f64; 2], _t: f64| ([q[0] * q[0], q[1] * q[1]], [[2.0 * q[0], 0.0], [0.0, 2.0 * q[1]]]);
    let phi = |q: [f64; 2], _t: f64| (q[0] + q[1], [1.0, 1.0]);
    let psi = |q: [f64; 2], _t: f64| (q[0] - q[1], [1.0, -1.0]);
    let xi = move |q: [f64; 2], _t: f64| -p.lambda * 2.0 * (q[0] + q[1]) + p.alpha * (q[0] + q[1]) + p.beta * (q[0] - q[1]);
    // f = −μΔu − (μ+λ)∇(∇·u) + α∇φ + β∇ψ, g = γ(φ − ψ), h = γ(ψ − φ)
    let f = move |_q: [f64; 2], _t: f64| {
        [-2.0 * p.mu - 2.0 * (p.mu + p.lambda) + p.alpha + p.beta, -2.0 * p.mu - 2.0 * (p.mu + p.lambda) + p.alpha - p.beta]
    };
    let g = move |q: [f64; 2], _t: f64| p.gamma * 2.0 * q[1];
    let h = move |q: [f64; 2], _t: f64| -p.gamma * 2.0 * q[1];
    ProblemData {
        params: p,
        scheme: BoundaryScheme::AllDirichlet,
        f: Some(Arc::new(f)),
        g: ScalarSource::Field(Arc::new(g)),
        h: ScalarSource::Field(Arc::new(h)),
        u0: Arc::new(move |q, t| u(q, t).0),
        phi0: Arc::new(move |q, t| phi(q, t).0),
        psi0: Arc::new(move |q, t| psi(q, t).0),
        exact: Some(ExactSolution { u: Arc::new(u), xi: Arc::new(xi), phi: Arc::new(phi), psi: Arc::new(psi) }),
    }
}

#[test]
fn steady_solution_is_a_fixed_point_of_advance() {
    let sp = spaces(4, 2, 2, BoundaryScheme::AllDirichlet);
    let problem = steady_problem(odd_params());
    let grid = TimeGrid::new(1.0, 4).unwrap();
    let sys = assemble_system(&problem, &sp, &grid).unwrap();
    let init = problem.initial_state(&sp).unwrap();
    let want_xi = sp.xi.interpolate_scalar(|q| (problem.exact.as_ref().unwrap().xi)(q, 0.0));
    for (a, b) in init.xi.iter().zip(&want_xi) {
        assert!((a - b).abs() < 1e-10, "projected total pressure");
    }
    let traj = sys.run_from(init.clone()).unwrap();
    for s in &traj.states[1..] {
        for (a, b) in s.fields().iter().zip(init.fields()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn uncoupled_pressures_give_diagonal_transport_blocks() {
    let sp = spaces(2, 2, 2, BoundaryScheme::AllDirichlet);
    let p = ModelParams { alpha: 0.0, beta: 0.0, b0: 0.0, gamma: 0.0, ..ModelParams::default() };
    let ops = Operators::new(&sp, &p).unwrap();
    let [[_, qs], [sq, _]] = ops.transport_blocks(&p, 1.0, sp.mesh().h()).unwrap();
    assert!(qs.iter().all(|(_, _, v)| v == 0.0));
    assert!(sq.iter().all(|(_, _, v)| v == 0.0));
}
