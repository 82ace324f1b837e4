//! Element loops for the bilinear and linear forms of the model.

use super::quadrature::QuadratureRule;
use super::space::{ElementGeometry, FeSpace};
use crate::error::{invalid, Result};
use crate::mesh::Point;
use crate::model::PointSource;
use crate::sparse::{SparseMatrix, TripletBuilder};

/// Right-hand side data for [`assemble_load`].
#[derive(Clone, Copy)]
pub enum Load<'a> {
    /// Distributed source `f(p, t)`; scalar spaces read component 0.
    Field(&'a (dyn Fn(Point, f64) -> [f64; 2] + Sync)),
    /// Dirac source `amplitude(t) δ(p − p₀)`.
    Point(&'a PointSource),
}

/// Basis values and barycentric derivatives at every point of a rule.
pub(crate) struct Tabulation {
    pub values: Vec<Vec<f64>>,
    pub bary_grads: Vec<Vec<[f64; 3]>>,
}

impl Tabulation {
    pub fn new(space: &FeSpace, rule: &QuadratureRule) -> Self {
        let basis = space.basis();
        let mut values = Vec::with_capacity(rule.len());
        let mut bary_grads = Vec::with_capacity(rule.len());
        for &p in &rule.points {
            let mut v = vec![0.0; basis.len()];
            let mut g = vec![[0.0; 3]; basis.len()];
            basis.values(p, &mut v);
            basis.bary_gradients(p, &mut g);
            values.push(v);
            bary_grads.push(g);
        }
        Self { values, bary_grads }
    }

    /// Physical gradients of all shape functions at quadrature point `q`.
    pub fn gradients(&self, geo: &ElementGeometry, q: usize, out: &mut Vec<[f64; 2]>) {
        out.clear();
        out.extend(self.bary_grads[q].iter().map(|&d| geo.physical_gradient(d)));
    }
}

fn check_same_mesh(a: &FeSpace, b: &FeSpace) -> Result<()> {
    if a.same_mesh(b) {
        Ok(())
    } else {
        Err(invalid("spaces are defined on different meshes"))
    }
}

fn check_scalar(space: &FeSpace, what: &str) -> Result<()> {
    if space.components() == 1 {
        Ok(())
    } else {
        Err(invalid(format!("{what} requires a scalar space")))
    }
}

/// `coeff · ∫ χ_j χ_i` with rows from `row` and columns from `col`.
pub fn assemble_mass(row: &FeSpace, col: &FeSpace, coeff: f64) -> Result<SparseMatrix> {
    check_scalar(row, "mass matrix")?;
    check_scalar(col, "mass matrix")?;
    check_same_mesh(row, col)?;
    let rule = QuadratureRule::with_exactness(2 * row.degree().max(col.degree()) + 2);
    let (tr, tc) = (Tabulation::new(row, &rule), Tabulation::new(col, &rule));
    let (nr, nc) = (row.basis().len(), col.basis().len());
    let n_el = row.mesh().n_triangles();
    let mut builder = TripletBuilder::with_capacity(row.n_dofs(), col.n_dofs(), n_el * nr * nc);
    let mut local = vec![0.0; nr * nc];
    for e in 0..n_el {
        let geo = row.geometry(e);
        local.iter_mut().for_each(|v| *v = 0.0);
        for (q, w) in rule.weights.iter().enumerate() {
            let wq = coeff * w * 2.0 * geo.area;
            for (a, va) in tr.values[q].iter().enumerate() {
                for (b, vb) in tc.values[q].iter().enumerate() {
                    local[a * nc + b] += wq * va * vb;
                }
            }
        }
        let (ri, ci) = (row.element_nodes(e), col.element_nodes(e));
        for a in 0..nr {
            for b in 0..nc {
                builder.add(ri[a], ci[b], local[a * nc + b]);
            }
        }
    }
    Ok(builder.build())
}

/// `coeff · ∫ ∇χ_j · ∇χ_i` on a scalar space.
pub fn assemble_stiffness(space: &FeSpace, coeff: f64) -> Result<SparseMatrix> {
    check_scalar(space, "stiffness matrix")?;
    let rule = QuadratureRule::with_exactness(2 * space.degree() + 2);
    let tab = Tabulation::new(space, &rule);
    let nl = space.basis().len();
    let n_el = space.mesh().n_triangles();
    let mut builder = TripletBuilder::with_capacity(space.n_dofs(), space.n_dofs(), n_el * nl * nl);
    let mut local = vec![0.0; nl * nl];
    let mut grads = Vec::with_capacity(nl);
    for e in 0..n_el {
        let geo = space.geometry(e);
        local.iter_mut().for_each(|v| *v = 0.0);
        for (q, w) in rule.weights.iter().enumerate() {
            let wq = coeff * w * 2.0 * geo.area;
            tab.gradients(&geo, q, &mut grads);
            for a in 0..nl {
                for b in 0..nl {
                    local[a * nl + b] += wq * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                }
            }
        }
        let nodes = space.element_nodes(e);
        for a in 0..nl {
            for b in 0..nl {
                builder.add(nodes[a], nodes[b], local[a * nl + b]);
            }
        }
    }
    Ok(builder.build())
}

/// `2μ ∫ ε(χ_j) : ε(χ_i)` on a vector space.
pub fn assemble_elasticity(space: &FeSpace, mu: f64) -> Result<SparseMatrix> {
    if space.components() != 2 {
        return Err(invalid("elasticity matrix requires a vector space"));
    }
    let rule = QuadratureRule::with_exactness(2 * space.degree() + 2);
    let tab = Tabulation::new(space, &rule);
    let nl = space.basis().len();
    let nd = 2 * nl;
    let n_el = space.mesh().n_triangles();
    let mut builder = TripletBuilder::with_capacity(space.n_dofs(), space.n_dofs(), n_el * nd * nd);
    let mut local = vec![0.0; nd * nd];
    let mut grads = Vec::with_capacity(nl);
    let mut dofs = Vec::with_capacity(nd);
    for e in 0..n_el {
        let geo = space.geometry(e);
        local.iter_mut().for_each(|v| *v = 0.0);
        for (q, w) in rule.weights.iter().enumerate() {
            let wq = 2.0 * mu * w * 2.0 * geo.area;
            tab.gradients(&geo, q, &mut grads);
            for a in 0..nl {
                for b in 0..nl {
                    let dot = grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1];
                    for c in 0..2 {
                        for d in 0..2 {
                            // ε(φ_a e_c) : ε(φ_b e_d) = ½(δ_cd ∇φ_a·∇φ_b + ∂_d φ_a ∂_c φ_b)
                            let delta = if c == d { dot } else { 0.0 };
                            let v = 0.5 * (delta + grads[a][d] * grads[b][c]);
                            local[(2 * a + c) * nd + 2 * b + d] += wq * v;
                        }
                    }
                }
            }
        }
        space.element_dofs(e, &mut dofs);
        for i in 0..nd {
            for j in 0..nd {
                builder.add(dofs[i], dofs[j], local[i * nd + j]);
            }
        }
    }
    Ok(builder.build())
}

/// `∫ (∇·χ_j) χ_i` with rows indexed by the scalar space `space_w` and
/// columns by the vector space `space_v`.
pub fn assemble_divergence(space_v: &FeSpace, space_w: &FeSpace) -> Result<SparseMatrix> {
    if space_v.components() != 2 {
        return Err(invalid("divergence pairing requires a vector trial space"));
    }
    check_scalar(space_w, "divergence pairing")?;
    check_same_mesh(space_v, space_w)?;
    let rule = QuadratureRule::with_exactness(2 * space_v.degree().max(space_w.degree()) + 2);
    let (tv, tw) = (Tabulation::new(space_v, &rule), Tabulation::new(space_w, &rule));
    let (nv, nw) = (space_v.basis().len(), space_w.basis().len());
    let nd = 2 * nv;
    let n_el = space_v.mesh().n_triangles();
    let mut builder = TripletBuilder::with_capacity(space_w.n_dofs(), space_v.n_dofs(), n_el * nw * nd);
    let mut local = vec![0.0; nw * nd];
    let mut grads = Vec::with_capacity(nv);
    let mut dofs = Vec::with_capacity(nd);
    for e in 0..n_el {
        let geo = space_v.geometry(e);
        local.iter_mut().for_each(|v| *v = 0.0);
        for (q, w) in rule.weights.iter().enumerate() {
            let wq = w * 2.0 * geo.area;
            tv.gradients(&geo, q, &mut grads);
            for (i, chi) in tw.values[q].iter().enumerate() {
                for a in 0..nv {
                    for c in 0..2 {
                        local[i * nd + 2 * a + c] += wq * grads[a][c] * chi;
                    }
                }
            }
        }
        space_v.element_dofs(e, &mut dofs);
        let rows = space_w.element_nodes(e);
        for i in 0..nw {
            for j in 0..nd {
                builder.add(rows[i], dofs[j], local[i * nd + j]);
            }
        }
    }
    Ok(builder.build())
}

/// Load vector `∫ f · χ_i` or `amplitude(t) χ_i(p₀)` at time `t`.
pub fn assemble_load(space: &FeSpace, load: Load<'_>, t: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; space.n_dofs()];
    let nl = space.basis().len();
    let nc = space.components();
    match load {
        Load::Field(f) => {
            let rule = QuadratureRule::with_exactness(2 * space.degree() + 2);
            let tab = Tabulation::new(space, &rule);
            let mesh = space.mesh();
            for e in 0..mesh.n_triangles() {
                let geo = space.geometry(e);
                let nodes = space.element_nodes(e);
                for (q, w) in rule.weights.iter().enumerate() {
                    let p = mesh.physical_point(e, rule.points[q]);
                    let fv = f(p, t);
                    let wq = w * 2.0 * geo.area;
                    for a in 0..nl {
                        for c in 0..nc {
                            out[nc * nodes[a] + c] += wq * fv[c] * tab.values[q][a];
                        }
                    }
                }
            }
        }
        Load::Point(src) => {
            check_scalar(space, "point source")?;
            let loc = space.mesh().locate_point(src.location)?;
            let mut phi = vec![0.0; nl];
            space.basis().values(loc.barycentric, &mut phi);
            let amp = src.amplitude(t);
            for (a, &k) in space.element_nodes(loc.triangle).iter().enumerate() {
                out[k] += amp * phi[a];
            }
        }
    }
    Ok(out)
}
