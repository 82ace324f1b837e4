//! Global-in-time iterative decoupling.
//!
//! Each iteration first marches the transport pair `(φ, ψ)` through all time
//! levels with the total pressure of the previous iteration frozen, then
//! solves the quasi-static mechanics pair `(u, ξ)` at every level. The
//! mechanics solves are independent of each other and run concurrently over
//! the time levels with one shared factorization.

use rayon::prelude::*;

use crate::error::{check_len, invalid, Result};
use crate::fem::{DirichletElimination, FieldSpaces};
use crate::model::{FieldState, ProblemData};
use crate::monolithic::{lattice_ordering, BoundaryDofs, Operators, TimeGrid, Trajectory};
use crate::sparse::{block_compose, Factorization, SparseMatrix};

/// How the mechanics solves over the time levels are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    Sequential,
    #[default]
    Parallel,
}

/// Which quantity the stopping test compares against `tol`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StoppingRule {
    /// Largest relative change of any field at any time level.
    #[default]
    Increment,
    /// Contraction metric relative to its first value.
    Contraction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateOptions {
    /// A tolerance of zero runs exactly `max_iter` iterations.
    pub tol: f64,
    pub max_iter: usize,
    pub stopping: StoppingRule,
    pub schedule: Schedule,
}

impl Default for IterateOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 100, stopping: StoppingRule::Increment, schedule: Schedule::Parallel }
    }
}

/// Convergence history of [`DecoupledSolver::iterate`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContractionReport {
    /// `m_i` for `i = 1, 2, …`.
    pub metrics: Vec<f64>,
    /// `m_i / m_{i−1}` for `i = 2, 3, …`.
    pub ratios: Vec<f64>,
    /// Relative increments of `(u, ξ, φ, ψ)` at the final time level.
    pub final_increments: Vec<[f64; 4]>,
    /// Largest relative increment over all levels and fields.
    pub max_increments: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// `sqrt(Δt Σₙ dᵀ M d)` with `d = ∂̄ₜ(ξⁱ − ξⁱ⁻¹)` at level `n`.
pub fn contraction_metric(xi_i: &[Vec<f64>], xi_im1: &[Vec<f64>], grid: &TimeGrid, mass: &SparseMatrix) -> Result<f64> {
    check_len(xi_i.len(), xi_im1.len())?;
    if xi_i.is_empty() {
        return Ok(0.0);
    }
    let dt = grid.dt();
    let diff = |n: usize| -> Result<Vec<f64>> {
        check_len(xi_i[n].len(), xi_im1[n].len())?;
        Ok(xi_i[n].iter().zip(&xi_im1[n]).map(|(a, b)| a - b).collect())
    };
    let mut prev = diff(0)?;
    let mut sum = 0.0;
    for n in 1..xi_i.len() {
        let cur = diff(n)?;
        let d: Vec<f64> = cur.iter().zip(&prev).map(|(a, b)| (a - b) / dt).collect();
        sum += mass.bilinear(&d, &d);
        prev = cur;
    }
    Ok((dt * sum).max(0.0).sqrt())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖a − b‖ / ‖a‖`, falling back to the absolute difference when `a = 0`.
pub fn relative_difference(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let s = norm(a);
    if s > 0.0 {
        d / s
    } else {
        d
    }
}

/// Per-field relative differences between two states.
pub fn state_difference(a: &FieldState, b: &FieldState) -> [f64; 4] {
    let (fa, fb) = (a.fields(), b.fields());
    std::array::from_fn(|k| relative_difference(fa[k], fb[k]))
}

/// Factorized transport and mechanics step matrices for one problem.
#[derive(Debug)]
pub struct DecoupledSolver {
    problem: ProblemData,
    spaces: FieldSpaces,
    grid: TimeGrid,
    ops: Operators,
    bdofs: BoundaryDofs,
    h: f64,
    transport: DirichletElimination,
    transport_lu: Factorization,
    mechanics: DirichletElimination,
    mechanics_lu: Factorization,
    initial: FieldState,
}

impl DecoupledSolver {
    pub fn new(problem: &ProblemData, spaces: &FieldSpaces, grid: &TimeGrid) -> Result<Self> {
        problem.params.validate()?;
        let p = &problem.params;
        let ops = Operators::new(spaces, p)?;
        let h = spaces.mesh().h();
        let bdofs = BoundaryDofs::new(problem, spaces);

        let [[a, b], [c, d]] = ops.transport_blocks(p, grid.dt(), h)?;
        let t = block_compose(vec![vec![Some(a), Some(b)], vec![Some(c), Some(d)]])?;
        let nq = spaces.phi.n_dofs();
        let tdofs = bdofs.phi.iter().copied().chain(bdofs.psi.iter().map(|d| d + nq));
        let transport = DirichletElimination::new(t.matrix(), tdofs)?;
        let transport_lu = Factorization::new(transport.matrix(), Some(&lattice_ordering(&[&spaces.phi, &spaces.psi])))?;

        let [[a, bt], [b, m]] = ops.mechanics_blocks(p);
        let mech = block_compose(vec![vec![Some(a), Some(bt)], vec![Some(b), Some(m)]])?;
        let mechanics = DirichletElimination::new(mech.matrix(), bdofs.u.iter().copied())?;
        let mechanics_lu = Factorization::new(mechanics.matrix(), Some(&lattice_ordering(&[&spaces.u, &spaces.xi])))?;

        Ok(Self {
            initial: problem.initial_state(spaces)?,
            problem: problem.clone(),
            spaces: spaces.clone(),
            grid: *grid,
            ops,
            bdofs,
            h,
            transport,
            transport_lu,
            mechanics,
            mechanics_lu,
        })
    }

    pub fn initial_state(&self) -> &FieldState {
        &self.initial
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn operators(&self) -> &Operators {
        &self.ops
    }

    /// Marches `(φ, ψ)` over `n = 1..N` with `ξ` frozen at `xi_prev`.
    /// Entry 0 of the output is the initial data.
    pub fn transport_sweep(&self, xi_prev: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let steps = self.grid.steps();
        check_len(steps + 1, xi_prev.len())?;
        let p = &self.problem.params;
        let dt = self.grid.dt();
        let nq = self.spaces.phi.n_dofs();
        let mut phi = vec![self.initial.phi.clone()];
        let mut psi = vec![self.initial.psi.clone()];
        for n in 1..=steps {
            let t = self.grid.time(n);
            check_len(self.spaces.xi.n_dofs(), xi_prev[n].len())?;
            let [mut rq, mut rs] = self.ops.transport_history(p, dt, self.h, &phi[n - 1], &psi[n - 1]);
            let g = self.problem.g.load(&self.spaces.phi, t)?;
            let hh = self.problem.h.load(&self.spaces.psi, t)?;
            rq.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
            rs.iter_mut().zip(&hh).for_each(|(a, b)| *a += b);
            let dxi: Vec<f64> = xi_prev[n].iter().zip(&xi_prev[n - 1]).map(|(a, b)| a - b).collect();
            self.ops.mass_phi_xi.mul_vec_add(p.alpha / (p.lambda * dt), &dxi, &mut rq);
            self.ops.mass_psi_xi.mul_vec_add(p.beta / (p.lambda * dt), &dxi, &mut rs);
            rq.extend(rs);
            let [mut vq, vs] = self.bdofs.pressure_values(&self.problem, &self.spaces, t);
            vq.extend(vs);
            self.transport.lift(&mut rq, &vq)?;
            let x = self.transport_lu.solve(&rq)?;
            phi.push(x[..nq].to_vec());
            psi.push(x[nq..].to_vec());
        }
        Ok((phi, psi))
    }

    fn mechanics_step(&self, n: usize, phi: &[f64], psi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let p = &self.problem.params;
        let t = self.grid.time(n);
        let nu = self.spaces.u.n_dofs();
        let mut rhs = self.problem.load_f(&self.spaces.u, t)?;
        let mut rx = vec![0.0; self.spaces.xi.n_dofs()];
        self.ops.mass_xi_phi.mul_vec_add(p.alpha / p.lambda, phi, &mut rx);
        self.ops.mass_xi_psi.mul_vec_add(p.beta / p.lambda, psi, &mut rx);
        rhs.extend(rx);
        let values = self.bdofs.u_values(&self.problem, &self.spaces, t);
        self.mechanics.lift(&mut rhs, &values)?;
        let mut x = self.mechanics_lu.solve(&rhs)?;
        let xi = x.split_off(nu);
        Ok((x, xi))
    }

    /// Solves the mechanics pair at every level `n = 1..N` for the given
    /// transport trajectories. Entry 0 is the initial data.
    pub fn mechanics_solve_all(
        &self,
        phi: &[Vec<f64>],
        psi: &[Vec<f64>],
        schedule: Schedule,
    ) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let steps = self.grid.steps();
        check_len(steps + 1, phi.len())?;
        check_len(steps + 1, psi.len())?;
        for n in 0..=steps {
            check_len(self.spaces.phi.n_dofs(), phi[n].len())?;
            check_len(self.spaces.psi.n_dofs(), psi[n].len())?;
        }
        let solve = |n: usize| self.mechanics_step(n, &phi[n], &psi[n]);
        let solved: Vec<(Vec<f64>, Vec<f64>)> = match schedule {
            Schedule::Sequential => (1..=steps).map(solve).collect::<Result<_>>()?,
            Schedule::Parallel => (1..=steps).into_par_iter().map(solve).collect::<Result<_>>()?,
        };
        let mut u = vec![self.initial.u.clone()];
        let mut xi = vec![self.initial.xi.clone()];
        for (a, b) in solved {
            u.push(a);
            xi.push(b);
        }
        Ok((u, xi))
    }

    fn assemble(&self, u: Vec<Vec<f64>>, xi: Vec<Vec<f64>>, phi: Vec<Vec<f64>>, psi: Vec<Vec<f64>>, i: usize) -> Trajectory {
        let states = u
            .into_iter()
            .zip(xi)
            .zip(phi.into_iter().zip(psi))
            .enumerate()
            .map(|(n, ((u, xi), (phi, psi)))| FieldState { t: self.grid.time(n), u, xi, phi, psi })
            .collect();
        Trajectory { states, iteration: i }
    }

    /// Runs the fixed-point loop from the flat-in-time guess `ξⁿ'⁰ = ξ₀`.
    pub fn iterate(&self, opts: &IterateOptions) -> Result<(Trajectory, ContractionReport)> {
        self.iterate_observed(opts, |_, _| {})
    }

    /// As [`iterate`](Self::iterate), calling `observe(i, trajectory)` after
    /// every iteration.
    pub fn iterate_observed(
        &self,
        opts: &IterateOptions,
        mut observe: impl FnMut(usize, &Trajectory),
    ) -> Result<(Trajectory, ContractionReport)> {
        if !(opts.tol >= 0.0 && opts.tol.is_finite()) {
            return Err(invalid(format!("tolerance must be non-negative, got {}", opts.tol)));
        }
        if opts.max_iter == 0 {
            return Err(invalid("max_iter must be at least 1"));
        }
        let steps = self.grid.steps();
        let mut current = self.assemble(
            vec![self.initial.u.clone(); steps + 1],
            vec![self.initial.xi.clone(); steps + 1],
            vec![self.initial.phi.clone(); steps + 1],
            vec![self.initial.psi.clone(); steps + 1],
            0,
        );
        let mut report = ContractionReport::default();
        for i in 1..=opts.max_iter {
            let xi_prev: Vec<Vec<f64>> = current.states.iter().map(|s| s.xi.clone()).collect();
            let (phi, psi) = self.transport_sweep(&xi_prev)?;
            let (u, xi) = self.mechanics_solve_all(&phi, &psi, opts.schedule)?;
            let metric = contraction_metric(&xi, &xi_prev, &self.grid, &self.ops.mass_xi)?;
            let next = self.assemble(u, xi, phi, psi, i);

            if let Some(&last) = report.metrics.last() {
                report.ratios.push(if last > 0.0 { metric / last } else { 0.0 });
            }
            report.metrics.push(metric);
            report.final_increments.push(state_difference(next.last(), current.last()));
            let max_inc = next
                .states
                .iter()
                .zip(&current.states)
                .flat_map(|(a, b)| state_difference(a, b))
                .fold(0.0f64, f64::max);
            report.max_increments.push(max_inc);
            report.iterations = i;
            observe(i, &next);
            current = next;

            let measure = match opts.stopping {
                StoppingRule::Increment => max_inc,
                StoppingRule::Contraction => {
                    let first = report.metrics[0];
                    if first > 0.0 {
                        metric / first
                    } else {
                        0.0
                    }
                }
            };
            if opts.tol > 0.0 && measure <= opts.tol {
                report.converged = true;
                break;
            }
        }
        Ok((current, report))
    }
}

/// Builds the solver and iterates.
pub fn iterate(
    problem: &ProblemData,
    spaces: &FieldSpaces,
    grid: &TimeGrid,
    opts: &IterateOptions,
) -> Result<(Trajectory, ContractionReport)> {
    DecoupledSolver::new(problem, spaces, grid)?.iterate(opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_hand_example() {
        let grid = TimeGrid::new(1.0, 1).unwrap();
        let m = SparseMatrix::identity(1);
        let a = vec![vec![0.0], vec![3.0]];
        let b = vec![vec![0.0], vec![0.0]];
        assert!((contraction_metric(&a, &b, &grid, &m).unwrap() - 3.0).abs() < 1e-15);
        assert_eq!(contraction_metric(&a, &a, &grid, &m).unwrap(), 0.0);
        let shifted = vec![vec![1.0], vec![4.0]];
        let base = vec![vec![0.0], vec![3.0]];
        assert_eq!(contraction_metric(&shifted, &base, &grid, &m).unwrap(), 0.0);
        assert!(contraction_metric(&a, &b[..1], &grid, &m).is_err());
    }
}
