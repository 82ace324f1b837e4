use std::fmt;
use std::sync::Arc;

use super::params::ModelParams;
use crate::error::{check_len, invalid, Error, Result};
use crate::fem::{assemble_divergence, assemble_load, assemble_mass, FeSpace, FieldSpaces, Load};
use crate::mesh::{BoundaryScheme, BoundaryTag, Point, Side};
use crate::sparse::Factorization;

pub type VectorFn = Arc<dyn Fn(Point, f64) -> [f64; 2] + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;
/// Value and gradient `[∂x, ∂y]` of a scalar field.
pub type ScalarGradFn = Arc<dyn Fn(Point, f64) -> (f64, [f64; 2]) + Send + Sync>;
/// Value and Jacobian `J[c][d] = ∂_d u_c` of a vector field.
pub type VectorGradFn = Arc<dyn Fn(Point, f64) -> ([f64; 2], [[f64; 2]; 2]) + Send + Sync>;

/// Dirac source `amplitude(t) δ(p − location)`.
#[derive(Clone)]
pub struct PointSource {
    pub location: Point,
    amplitude: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl PointSource {
    pub fn new(location: Point, amplitude: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let inside = |c: f64| (0.0..=1.0).contains(&c);
        if !(inside(location[0]) && inside(location[1])) {
            return Err(Error::OutOfDomain { x: location[0], y: location[1] });
        }
        Ok(Self { location, amplitude: Arc::new(amplitude) })
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        (self.amplitude)(t)
    }
}

impl fmt::Debug for PointSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointSource").field("location", &self.location).finish_non_exhaustive()
    }
}

/// Right-hand side of a transport equation.
#[derive(Clone)]
pub enum ScalarSource {
    Zero,
    Field(ScalarFn),
    Point(PointSource),
}

impl ScalarSource {
    pub fn load(&self, space: &FeSpace, t: f64) -> Result<Vec<f64>> {
        match self {
            ScalarSource::Zero => Ok(vec![0.0; space.n_dofs()]),
            ScalarSource::Field(f) => {
                let wrapped = |p: Point, t: f64| [f(p, t), 0.0];
                assemble_load(space, Load::Field(&wrapped), t)
            }
            ScalarSource::Point(src) => assemble_load(space, Load::Point(src), t),
        }
    }
}

/// Exact fields with the derivatives needed for `H¹` error norms.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: VectorGradFn,
    pub xi: ScalarFn,
    pub phi: ScalarGradFn,
    pub psi: ScalarGradFn,
}

/// Everything that defines one initial-boundary value problem.
#[derive(Clone)]
pub struct ProblemData {
    pub params: ModelParams,
    pub scheme: BoundaryScheme,
    /// Body force; `None` means zero.
    pub f: Option<VectorFn>,
    pub g: ScalarSource,
    pub h: ScalarSource,
    pub u0: VectorFn,
    pub phi0: ScalarFn,
    pub psi0: ScalarFn,
    /// When present, Dirichlet data are the traces of the exact fields.
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemData")
            .field("params", &self.params)
            .field("scheme", &self.scheme)
            .field("has_exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

/// Field values at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub u: Vec<f64>,
    pub xi: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl FieldState {
    pub fn zeros(spaces: &FieldSpaces, t: f64) -> Self {
        let [nu, nx, nq, ns] = spaces.sizes();
        Self { t, u: vec![0.0; nu], xi: vec![0.0; nx], phi: vec![0.0; nq], psi: vec![0.0; ns] }
    }

    pub fn fields(&self) -> [&[f64]; 4] {
        [&self.u, &self.xi, &self.phi, &self.psi]
    }

    pub fn check(&self, spaces: &FieldSpaces) -> Result<()> {
        for (v, n) in self.fields().iter().zip(spaces.sizes()) {
            check_len(n, v.len())?;
        }
        Ok(())
    }
}

impl ProblemData {
    /// A problem with zero sources and zero initial data.
    pub fn homogeneous(params: ModelParams, scheme: BoundaryScheme) -> Self {
        Self {
            params,
            scheme,
            f: None,
            g: ScalarSource::Zero,
            h: ScalarSource::Zero,
            u0: Arc::new(|_, _| [0.0, 0.0]),
            phi0: Arc::new(|_, _| 0.0),
            psi0: Arc::new(|_, _| 0.0),
            exact: None,
        }
    }

    /// Displacement DOFs fixed by the boundary scheme.
    ///
    /// `all_dirichlet` and `right_neumann` clamp both components on `Γ_D`.
    /// `barry_mercer` fixes the tangential component on every side: `u₂` on
    /// `x ∈ {0, 1}` and `u₁` on `y ∈ {0, 1}`.
    pub fn u_constrained_dofs(&self, space: &FeSpace) -> Vec<usize> {
        let mut dofs = Vec::new();
        for side in Side::ALL {
            let comps: &[usize] = match self.scheme.tag_for(side) {
                BoundaryTag::Dirichlet => &[0, 1],
                BoundaryTag::Neumann => &[],
                BoundaryTag::Side(Side::Left | Side::Right) => &[1],
                BoundaryTag::Side(Side::Bottom | Side::Top) => &[0],
            };
            for k in space.nodes_on_side(side) {
                dofs.extend(comps.iter().map(|c| 2 * k + c));
            }
        }
        dofs.sort_unstable();
        dofs.dedup();
        dofs
    }

    /// Pressure DOFs: `φ = ψ = 0` holds on the whole boundary.
    pub fn pressure_constrained_dofs(&self, space: &FeSpace) -> Vec<usize> {
        space.boundary_nodes(|_| true)
    }

    /// Displacement boundary values at `t` for `dofs`.
    pub fn u_boundary_values(&self, space: &FeSpace, dofs: &[usize], t: f64) -> Vec<f64> {
        match &self.exact {
            None => vec![0.0; dofs.len()],
            Some(ex) => dofs.iter().map(|&d| (ex.u)(space.node_coords()[d / 2], t).0[d % 2]).collect(),
        }
    }

    /// Boundary values of `φ` (`which = 0`) or `ψ` (`which = 1`).
    pub fn pressure_boundary_values(&self, space: &FeSpace, dofs: &[usize], which: usize, t: f64) -> Vec<f64> {
        match &self.exact {
            None => vec![0.0; dofs.len()],
            Some(ex) => {
                let f = if which == 0 { &ex.phi } else { &ex.psi };
                dofs.iter().map(|&d| f(space.node_coords()[d], t).0).collect()
            }
        }
    }

    pub fn load_f(&self, space: &FeSpace, t: f64) -> Result<Vec<f64>> {
        match &self.f {
            None => Ok(vec![0.0; space.n_dofs()]),
            Some(f) => assemble_load(space, Load::Field(f.as_ref()), t),
        }
    }

    /// Initial state: nodal interpolants of `u₀, φ₀, ψ₀` and the projected
    /// total pressure.
    pub fn initial_state(&self, spaces: &FieldSpaces) -> Result<FieldState> {
        let u = spaces.u.interpolate(|p| (self.u0)(p, 0.0));
        let phi = spaces.phi.interpolate_scalar(|p| (self.phi0)(p, 0.0));
        let psi = spaces.psi.interpolate_scalar(|p| (self.psi0)(p, 0.0));
        let xi = total_pressure_initial(&u, &phi, &psi, &self.params, spaces)?;
        Ok(FieldState { t: 0.0, u, xi, phi, psi })
    }
}

/// `L²` projection of `−λ∇·u₀ + αφ₀ + βψ₀` onto the total-pressure space.
pub fn total_pressure_initial(
    u0: &[f64],
    phi0: &[f64],
    psi0: &[f64],
    params: &ModelParams,
    spaces: &FieldSpaces,
) -> Result<Vec<f64>> {
    check_len(spaces.u.n_dofs(), u0.len())?;
    check_len(spaces.phi.n_dofs(), phi0.len())?;
    check_len(spaces.psi.n_dofs(), psi0.len())?;
    let w = &spaces.xi;
    let mut rhs = vec![0.0; w.n_dofs()];
    if u0.iter().any(|&v| v != 0.0) {
        assemble_divergence(&spaces.u, w)?.mul_vec_add(-params.lambda, u0, &mut rhs);
    }
    if phi0.iter().any(|&v| v != 0.0) {
        assemble_mass(w, &spaces.phi, params.alpha)?.mul_vec_add(1.0, phi0, &mut rhs);
    }
    if psi0.iter().any(|&v| v != 0.0) {
        assemble_mass(w, &spaces.psi, params.beta)?.mul_vec_add(1.0, psi0, &mut rhs);
    }
    if rhs.iter().all(|&v| v == 0.0) {
        return Ok(rhs);
    }
    let mass = assemble_mass(w, w, 1.0)?;
    let order = crate::sparse::ordering::nested_dissection(&w.lattice_coords(), 6, w.mesh().n());
    Factorization::new(&mass, Some(&order))
        .map_err(|e| invalid(format!("total-pressure projection: {e}")))?
        .solve(&rhs)
}
