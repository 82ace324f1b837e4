//! Global-in-time decoupling: consistency with the coupled scheme and
//! schedule independence.

use std::sync::Arc;

use poro_core::decoupled::{contraction_metric, DecoupledSolver, IterateOptions, Schedule};
use poro_core::fem::{build_field_spaces, FieldSpaces};
use poro_core::mesh::{build_unit_square_mesh, tag_boundaries, BoundaryScheme};
use poro_core::model::{manufactured_problem, ModelParams, ProblemData};
use poro_core::monolithic::{run, TimeGrid, Trajectory};
use poro_core::sparse::SparseMatrix;

fn spaces(n: usize, scheme: BoundaryScheme) -> FieldSpaces {
    let mesh = Arc::new(tag_boundaries(&build_unit_square_mesh(n).unwrap(), scheme).unwrap());
    build_field_spaces(&mesh, 2, 2).unwrap()
}

fn column(t: &Trajectory, k: usize) -> Vec<Vec<f64>> {
    t.states.iter().map(|s| s.fields()[k].to_vec()).collect()
}

fn max_rel(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            let s = y.iter().map(|q| q * q).sum::<f64>().sqrt();
            if s > 0.0 {
                d / s
            } else {
                d
            }
        })
        .fold(0.0, f64::max)
}

#[test]
fn monolithic_trajectories_are_a_fixed_point() {
    let sp = spaces(6, BoundaryScheme::RightNeumann);
    let problem = manufactured_problem(ModelParams::default());
    let grid = TimeGrid::new(1.0, 8).unwrap();
    let mono = run(&problem, &sp, &grid).unwrap();
    let solver = DecoupledSolver::new(&problem, &sp, &grid).unwrap();

    let (phi, psi) = solver.transport_sweep(&column(&mono, 1)).unwrap();
    assert!(max_rel(&phi, &column(&mono, 2)) < 1e-9);
    assert!(max_rel(&psi, &column(&mono, 3)) < 1e-9);

    let (u, xi) = solver.mechanics_solve_all(&column(&mono, 2), &column(&mono, 3), Schedule::Parallel).unwrap();
    assert!(max_rel(&u, &column(&mono, 0)) < 1e-9);
    assert!(max_rel(&xi, &column(&mono, 1)) < 1e-9);
}

#[test]
fn zero_data_gives_zero_trajectories() {
    let sp = spaces(4, BoundaryScheme::AllDirichlet);
    let problem = ProblemData::homogeneous(ModelParams::default(), BoundaryScheme::AllDirichlet);
    let grid = TimeGrid::new(1.0, 4).unwrap();
    let solver = DecoupledSolver::new(&problem, &sp, &grid).unwrap();
    let flat = vec![vec![0.0; sp.xi.n_dofs()]; 5];
    let (phi, psi) = solver.transport_sweep(&flat).unwrap();
    let (u, xi) = solver.mechanics_solve_all(&phi, &psi, Schedule::Parallel).unwrap();
    for v in [phi, psi, u, xi] {
        assert!(v.iter().flatten().all(|&x| x == 0.0));
    }
}

#[test]
fn single_iteration_is_one_sweep_and_one_mechanics_pass() {
    let sp = spaces(4, BoundaryScheme::RightNeumann);
    let problem = manufactured_problem(ModelParams::default());
    let grid = TimeGrid::new(0.5, 4).unwrap();
    let solver = DecoupledSolver::new(&problem, &sp, &grid).unwrap();
    let opts = IterateOptions { tol: 0.0, max_iter: 1, ..IterateOptions::default() };
    let (traj, report) = solver.iterate(&opts).unwrap();
    assert_eq!((report.iterations, report.converged), (1, false));

    let flat = vec![solver.initial_state().xi.clone(); 5];
    let (phi, psi) = solver.transport_sweep(&flat).unwrap();
    let (u, xi) = solver.mechanics_solve_all(&phi, &psi, Schedule::Sequential).unwrap();
    assert_eq!(column(&traj, 0), u);
    assert_eq!(column(&traj, 1), xi);
    assert_eq!(column(&traj, 2), phi);
}

#[test]
fn schedules_agree_over_repeated_runs() {
    let sp = spaces(8, BoundaryScheme::RightNeumann);
    let problem = manufactured_problem(ModelParams::default());
    let grid = TimeGrid::new(1.0, 32).unwrap();
    let solver = DecoupledSolver::new(&problem, &sp, &grid).unwrap();
    let flat = vec![solver.initial_state().xi.clone(); 33];
    let (phi, psi) = solver.transport_sweep(&flat).unwrap();
    let (u0, xi0) = solver.mechanics_solve_all(&phi, &psi, Schedule::Sequential).unwrap();
    for _ in 0..5 {
        let (u, xi) = solver.mechanics_solve_all(&phi, &psi, Schedule::Parallel).unwrap();
        for (a, b) in u.iter().flatten().zip(u0.iter().flatten()).chain(xi.iter().flatten().zip(xi0.iter().flatten())) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn iteration_converges_to_the_monolithic_solution() {
    let sp = spaces(4, BoundaryScheme::RightNeumann);
    let problem = manufactured_problem(ModelParams::default());
    let grid = TimeGrid::new(1.0, 8).unwrap();
    let mono = run(&problem, &sp, &grid).unwrap();
    let opts = IterateOptions { tol: 1e-11, max_iter: 80, ..IterateOptions::default() };
    let (traj, report) = poro_core::decoupled::iterate(&problem, &sp, &grid, &opts).unwrap();
    assert!(report.converged);
    assert!(report.ratios.iter().all(|&r| r < 1.0));
    for k in 0..4 {
        assert!(max_rel(&column(&traj, k), &column(&mono, k)) < 1e-8, "field {k}");
    }
}

#[test]
fn contraction_metric_examples() {
    let grid = TimeGrid::new(1.0, 1).unwrap();
    let m = SparseMatrix::identity(1);
    let a = vec![vec![0.0], vec![3.0]];
    let zero = vec![vec![0.0], vec![0.0]];
    assert!((contraction_metric(&a, &zero, &grid, &m).unwrap() - 3.0).abs() < 1e-15);
    assert_eq!(contraction_metric(&a, &a, &grid, &m).unwrap(), 0.0);

    let grid = TimeGrid::new(1.0, 3).unwrap();
    let m = SparseMatrix::from_diagonal(&[1.0, 2.0]);
    let b: Vec<Vec<f64>> = (0..4).map(|n| vec![n as f64, (n * n) as f64]).collect();
    let shifted: Vec<Vec<f64>> = b.iter().map(|v| vec![v[0] + 5.0, v[1] - 1.0]).collect();
    assert!(contraction_metric(&shifted, &b, &grid, &m).unwrap().abs() < 1e-14);
}
