//! Fully coupled backward-Euler stepping of the four-field system.

use crate::error::{invalid, Result};
use crate::fem::{
    assemble_divergence, assemble_elasticity, assemble_mass, assemble_stiffness, DirichletElimination, FieldSpaces,
};
use crate::model::{FieldState, ModelParams, ProblemData};
use crate::sparse::ordering::nested_dissection;
use crate::sparse::{block_compose, BlockSystem, Factorization, SparseMatrix};

/// Uniform partition of `[0, T_f]` into `steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(invalid(format!("final time must be positive, got {t_final}")));
        }
        if steps == 0 {
            return Err(invalid("number of time steps must be at least 1"));
        }
        Ok(Self { t_final, steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    /// `t_n = n Δt`, with `t_N = T_f` exactly.
    pub fn time(&self, n: usize) -> f64 {
        if n == self.steps {
            self.t_final
        } else {
            n as f64 * self.dt()
        }
    }
}

/// Time history of the four fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<FieldState>,
    /// Iteration index of the decoupled scheme; 0 for monolithic runs.
    pub iteration: usize,
}

impl Trajectory {
    pub fn last(&self) -> &FieldState {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Time-independent matrices of the discrete forms.
#[derive(Debug, Clone)]
pub struct Operators {
    /// `2μ (ε(u), ε(v))`.
    pub elasticity: SparseMatrix,
    /// `(∇·u, w)`, rows in the total-pressure space.
    pub div: SparseMatrix,
    pub div_t: SparseMatrix,
    pub mass_xi: SparseMatrix,
    /// `(φ, w)`: rows `ξ`, columns `φ`.
    pub mass_xi_phi: SparseMatrix,
    pub mass_xi_psi: SparseMatrix,
    pub mass_phi_xi: SparseMatrix,
    pub mass_psi_xi: SparseMatrix,
    pub mass_phi: SparseMatrix,
    pub mass_psi: SparseMatrix,
    /// `(ψ, q)`: rows `φ`, columns `ψ`.
    pub mass_phi_psi: SparseMatrix,
    pub mass_psi_phi: SparseMatrix,
    pub stiff_phi: SparseMatrix,
    pub stiff_psi: SparseMatrix,
}

impl Operators {
    pub fn new(spaces: &FieldSpaces, params: &ModelParams) -> Result<Self> {
        let div = assemble_divergence(&spaces.u, &spaces.xi)?;
        let mass_xi_phi = assemble_mass(&spaces.xi, &spaces.phi, 1.0)?;
        let mass_xi_psi = assemble_mass(&spaces.xi, &spaces.psi, 1.0)?;
        let mass_phi_psi = assemble_mass(&spaces.phi, &spaces.psi, 1.0)?;
        Ok(Self {
            elasticity: assemble_elasticity(&spaces.u, params.mu)?,
            div_t: div.transpose(),
            div,
            mass_xi: assemble_mass(&spaces.xi, &spaces.xi, 1.0)?,
            mass_phi_xi: mass_xi_phi.transpose(),
            mass_psi_xi: mass_xi_psi.transpose(),
            mass_xi_phi,
            mass_xi_psi,
            mass_phi: assemble_mass(&spaces.phi, &spaces.phi, 1.0)?,
            mass_psi: assemble_mass(&spaces.psi, &spaces.psi, 1.0)?,
            mass_psi_phi: mass_phi_psi.transpose(),
            mass_phi_psi,
            stiff_phi: assemble_stiffness(&spaces.phi, 1.0)?,
            stiff_psi: assemble_stiffness(&spaces.psi, 1.0)?,
        })
    }

    /// Transport blocks `[[T_φφ, T_φψ], [T_ψφ, T_ψψ]]` at step `dt` and
    /// mesh size `h`.
    pub fn transport_blocks(&self, p: &ModelParams, dt: f64, h: f64) -> Result<[[SparseMatrix; 2]; 2]> {
        let lc = |terms: &[(f64, &SparseMatrix)]| SparseMatrix::linear_combination(terms);
        let cross = (p.alpha * p.beta / p.lambda - p.b0) / dt - p.gamma;
        Ok([
            [
                lc(&[
                    ((p.c1 + p.alpha * p.alpha / p.lambda) / dt + p.gamma, &self.mass_phi),
                    (p.k + p.eta_phi * h * h / dt, &self.stiff_phi),
                ])?,
                self.mass_phi_psi.scaled(cross),
            ],
            [
                self.mass_psi_phi.scaled(cross),
                lc(&[
                    ((p.c2 + p.beta * p.beta / p.lambda) / dt + p.gamma, &self.mass_psi),
                    (p.d + p.eta_psi * h * h / dt, &self.stiff_psi),
                ])?,
            ],
        ])
    }

    /// Mechanics blocks `[[2μA, −Bᵀ], [B, M/λ]]`.
    pub fn mechanics_blocks(&self, p: &ModelParams) -> [[SparseMatrix; 2]; 2] {
        [
            [self.elasticity.clone(), self.div_t.scaled(-1.0)],
            [self.div.clone(), self.mass_xi.scaled(1.0 / p.lambda)],
        ]
    }

    /// History part of the transport right-hand side, excluding `ξ`:
    /// `(1/Δt)[(c₁+α²/λ)Mφ + (αβ/λ−b₀)Mψ + η_φh²Aφ]` and its `ψ` analogue.
    pub fn transport_history(&self, p: &ModelParams, dt: f64, h: f64, phi: &[f64], psi: &[f64]) -> [Vec<f64>; 2] {
        let cross = p.alpha * p.beta / p.lambda - p.b0;
        let mut rq = vec![0.0; phi.len()];
        self.mass_phi.mul_vec_add((p.c1 + p.alpha * p.alpha / p.lambda) / dt, phi, &mut rq);
        self.mass_phi_psi.mul_vec_add(cross / dt, psi, &mut rq);
        if p.eta_phi != 0.0 {
            self.stiff_phi.mul_vec_add(p.eta_phi * h * h / dt, phi, &mut rq);
        }
        let mut rs = vec![0.0; psi.len()];
        self.mass_psi.mul_vec_add((p.c2 + p.beta * p.beta / p.lambda) / dt, psi, &mut rs);
        self.mass_psi_phi.mul_vec_add(cross / dt, phi, &mut rs);
        if p.eta_psi != 0.0 {
            self.stiff_psi.mul_vec_add(p.eta_psi * h * h / dt, psi, &mut rs);
        }
        [rq, rs]
    }
}

/// Elimination ordering for a system whose unknowns are the concatenation of
/// the given spaces' DOFs.
pub(crate) fn lattice_ordering(spaces: &[&crate::fem::FeSpace]) -> Vec<usize> {
    let coords: Vec<(usize, usize)> = spaces.iter().flat_map(|s| s.lattice_coords()).collect();
    nested_dissection(&coords, 6, spaces[0].mesh().n())
}

/// Global constrained DOFs of a block system and their values at `t`.
#[derive(Debug, Clone)]
pub(crate) struct BoundaryDofs {
    pub u: Vec<usize>,
    pub phi: Vec<usize>,
    pub psi: Vec<usize>,
}

impl BoundaryDofs {
    pub fn new(problem: &ProblemData, spaces: &FieldSpaces) -> Self {
        Self {
            u: problem.u_constrained_dofs(&spaces.u),
            phi: problem.pressure_constrained_dofs(&spaces.phi),
            psi: problem.pressure_constrained_dofs(&spaces.psi),
        }
    }

    pub fn u_values(&self, problem: &ProblemData, spaces: &FieldSpaces, t: f64) -> Vec<f64> {
        problem.u_boundary_values(&spaces.u, &self.u, t)
    }

    pub fn pressure_values(&self, problem: &ProblemData, spaces: &FieldSpaces, t: f64) -> [Vec<f64>; 2] {
        [
            problem.pressure_boundary_values(&spaces.phi, &self.phi, 0, t),
            problem.pressure_boundary_values(&spaces.psi, &self.psi, 1, t),
        ]
    }
}

/// The factorized step matrix and everything needed to build right-hand
/// sides.
#[derive(Debug)]
pub struct AssembledSystem {
    problem: ProblemData,
    spaces: FieldSpaces,
    grid: TimeGrid,
    ops: Operators,
    blocks: BlockSystem,
    elimination: DirichletElimination,
    factor: Factorization,
    bdofs: BoundaryDofs,
    h: f64,
}

/// Four-field block matrix at step `dt` (no boundary conditions):
///
/// ```text
/// [ 2μA    −Bᵀ          0                        0                      ]
/// [ B      M/λ          −(α/λ)M                  −(β/λ)M                ]
/// [ 0      −(α/λΔt)M    T_φφ                     T_φψ                   ]
/// [ 0      −(β/λΔt)M    T_ψφ                     T_ψψ                   ]
/// ```
pub fn block_matrix(ops: &Operators, p: &ModelParams, dt: f64, h: f64) -> Result<BlockSystem> {
    let [[t_qq, t_qs], [t_sq, t_ss]] = ops.transport_blocks(p, dt, h)?;
    let [[a, bt], [b, m]] = ops.mechanics_blocks(p);
    block_compose(vec![
        vec![Some(a), Some(bt), None, None],
        vec![
            Some(b),
            Some(m),
            Some(ops.mass_xi_phi.scaled(-p.alpha / p.lambda)),
            Some(ops.mass_xi_psi.scaled(-p.beta / p.lambda)),
        ],
        vec![None, Some(ops.mass_phi_xi.scaled(-p.alpha / (p.lambda * dt))), Some(t_qq), Some(t_qs)],
        vec![None, Some(ops.mass_psi_xi.scaled(-p.beta / (p.lambda * dt))), Some(t_sq), Some(t_ss)],
    ])
}

/// Assembles, constrains and factorizes the step matrix.
pub fn assemble_system(problem: &ProblemData, spaces: &FieldSpaces, grid: &TimeGrid) -> Result<AssembledSystem> {
    problem.params.validate()?;
    let ops = Operators::new(spaces, &problem.params)?;
    let h = spaces.mesh().h();
    let blocks = block_matrix(&ops, &problem.params, grid.dt(), h)?;
    let bdofs = BoundaryDofs::new(problem, spaces);
    let off = blocks.row_offsets().to_vec();
    let constrained = bdofs
        .u
        .iter()
        .copied()
        .chain(bdofs.phi.iter().map(|d| d + off[2]))
        .chain(bdofs.psi.iter().map(|d| d + off[3]));
    let elimination = DirichletElimination::new(blocks.matrix(), constrained)?;
    let order = lattice_ordering(&[&spaces.u, &spaces.xi, &spaces.phi, &spaces.psi]);
    let factor = Factorization::new(elimination.matrix(), Some(&order))?;
    Ok(AssembledSystem {
        problem: problem.clone(),
        spaces: spaces.clone(),
        grid: *grid,
        ops,
        blocks,
        elimination,
        factor,
        bdofs,
        h,
    })
}

impl AssembledSystem {
    pub fn blocks(&self) -> &BlockSystem {
        &self.blocks
    }

    pub fn operators(&self) -> &Operators {
        &self.ops
    }

    pub fn spaces(&self) -> &FieldSpaces {
        &self.spaces
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factor
    }

    /// Unconstrained right-hand side of the step ending at `t` from `prev`.
    pub fn rhs(&self, prev: &FieldState, t: f64) -> Result<Vec<f64>> {
        let p = &self.problem.params;
        let dt = self.grid.dt();
        let sp = &self.spaces;
        let f = self.problem.load_f(&sp.u, t)?;
        let mut g = self.problem.g.load(&sp.phi, t)?;
        let mut hh = self.problem.h.load(&sp.psi, t)?;
        let [hq, hs] = self.ops.transport_history(p, dt, self.h, &prev.phi, &prev.psi);
        g.iter_mut().zip(&hq).for_each(|(a, b)| *a += b);
        hh.iter_mut().zip(&hs).for_each(|(a, b)| *a += b);
        self.ops.mass_phi_xi.mul_vec_add(-p.alpha / (p.lambda * dt), &prev.xi, &mut g);
        self.ops.mass_psi_xi.mul_vec_add(-p.beta / (p.lambda * dt), &prev.xi, &mut hh);
        let mut rhs = f;
        rhs.extend(std::iter::repeat_n(0.0, sp.xi.n_dofs()));
        rhs.extend(g);
        rhs.extend(hh);
        Ok(rhs)
    }

    /// One backward-Euler step from `prev` to `t_n`.
    pub fn advance(&self, prev: &FieldState, t_n: f64) -> Result<FieldState> {
        prev.check(&self.spaces)?;
        let dt = self.grid.dt();
        if ((t_n - prev.t) - dt).abs() > 1e-9 * dt.max(t_n.abs()) {
            return Err(invalid(format!("step from t = {} to t = {t_n} does not match dt = {dt}", prev.t)));
        }
        let mut rhs = self.rhs(prev, t_n)?;
        let mut values = self.bdofs.u_values(&self.problem, &self.spaces, t_n);
        let [vq, vs] = self.bdofs.pressure_values(&self.problem, &self.spaces, t_n);
        values.extend(vq);
        values.extend(vs);
        self.elimination.lift(&mut rhs, &values)?;
        let x = self.factor.solve(&rhs)?;
        Ok(self.split(&x, t_n))
    }

    fn split(&self, x: &[f64], t: f64) -> FieldState {
        let parts = self.blocks.split(x);
        FieldState { t, u: parts[0].to_vec(), xi: parts[1].to_vec(), phi: parts[2].to_vec(), psi: parts[3].to_vec() }
    }

    /// Relative residual of the constrained step equations.
    pub fn residual(&self, prev: &FieldState, state: &FieldState) -> Result<f64> {
        let mut rhs = self.rhs(prev, state.t)?;
        let mut values = self.bdofs.u_values(&self.problem, &self.spaces, state.t);
        let [vq, vs] = self.bdofs.pressure_values(&self.problem, &self.spaces, state.t);
        values.extend(vq);
        values.extend(vs);
        self.elimination.lift(&mut rhs, &values)?;
        let x: Vec<f64> = state.fields().concat();
        let ax = self.elimination.matrix().mul_vec(&x);
        Ok(crate::analysis::relative_residual(&ax, &rhs))
    }

    /// Norm of the total-pressure constraint residual
    /// `B u + M ξ/λ − (α/λ) M φ − (β/λ) M ψ`.
    pub fn constraint_residual(&self, state: &FieldState) -> f64 {
        let p = &self.problem.params;
        let mut r = self.ops.div.mul_vec(&state.u);
        self.ops.mass_xi.mul_vec_add(1.0 / p.lambda, &state.xi, &mut r);
        self.ops.mass_xi_phi.mul_vec_add(-p.alpha / p.lambda, &state.phi, &mut r);
        self.ops.mass_xi_psi.mul_vec_add(-p.beta / p.lambda, &state.psi, &mut r);
        r.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Marches `n = 1..N` from the initial state.
    pub fn run_from(&self, initial: FieldState) -> Result<Trajectory> {
        let mut states = Vec::with_capacity(self.grid.steps() + 1);
        states.push(initial);
        for n in 1..=self.grid.steps() {
            let next = self.advance(states.last().unwrap(), self.grid.time(n))?;
            states.push(next);
        }
        Ok(Trajectory { states, iteration: 0 })
    }
}

/// Monolithic run from the problem's initial data.
pub fn run(problem: &ProblemData, spaces: &FieldSpaces, grid: &TimeGrid) -> Result<Trajectory> {
    let sys = assemble_system(problem, spaces, grid)?;
    sys.run_from(problem.initial_state(spaces)?)
}
