use std::sync::Arc;

use super::basis::LagrangeBasis;
use crate::error::{check_len, invalid, Result};
use crate::mesh::{BoundaryTag, Mesh, Point, Side};

/// Continuous Lagrange space of degree 1–3 on a structured mesh.
///
/// Scalar nodes sit on the refined lattice of spacing `1 / (degree · n)` and
/// are numbered lexicographically (`x` fastest). Vector spaces interleave
/// components: node `k` owns DOFs `2k` and `2k + 1`.
#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    degree: usize,
    components: usize,
    basis: LagrangeBasis,
    /// Scalar node indices per element, `basis.len()` per triangle.
    node_map: Vec<usize>,
    node_coords: Vec<Point>,
}

/// Element geometry of an affine triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub area: f64,
    /// Physical gradients of the barycentric coordinates.
    pub grad_bary: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(pts: [Point; 3]) -> Self {
        let [a, b, c] = pts;
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let g1 = [(c[1] - a[1]) / det, -(c[0] - a[0]) / det];
        let g2 = [-(b[1] - a[1]) / det, (b[0] - a[0]) / det];
        let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
        Self { area: 0.5 * det, grad_bary: [g0, g1, g2] }
    }

    /// Physical gradient from derivatives with respect to barycentrics.
    #[inline]
    pub fn physical_gradient(&self, d: [f64; 3]) -> [f64; 2] {
        let g = &self.grad_bary;
        [
            d[0] * g[0][0] + d[1] * g[1][0] + d[2] * g[2][0],
            d[0] * g[0][1] + d[1] * g[1][1] + d[2] * g[2][1],
        ]
    }
}

/// Builds the degree-`degree` Lagrange space with `components` components.
pub fn build_space(mesh: &Arc<Mesh>, degree: usize, components: usize) -> Result<FeSpace> {
    if !(1..=3).contains(&degree) {
        return Err(invalid(format!("unsupported polynomial degree {degree} (expected 1, 2 or 3)")));
    }
    if !(1..=2).contains(&components) {
        return Err(invalid(format!("unsupported component count {components}")));
    }
    let n = mesh.n();
    let side = degree * n + 1;
    let basis = LagrangeBasis::new(degree);

    let mut node_map = Vec::with_capacity(mesh.n_triangles() * basis.len());
    for tri in mesh.triangles() {
        let lattice = tri.map(|v| mesh.vertex_lattice(v));
        for alpha in basis.nodes() {
            let i: usize = (0..3).map(|k| alpha[k] * lattice[k].0).sum();
            let j: usize = (0..3).map(|k| alpha[k] * lattice[k].1).sum();
            node_map.push(j * side + i);
        }
    }
    let step = 1.0 / (degree * n) as f64;
    let node_coords = (0..side * side).map(|k| [(k % side) as f64 * step, (k / side) as f64 * step]).collect();

    Ok(FeSpace { mesh: Arc::clone(mesh), degree, components, basis, node_map, node_coords })
}

impl FeSpace {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    pub fn n_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.components * self.n_nodes()
    }

    /// Physical location of each scalar node.
    pub fn node_coords(&self) -> &[Point] {
        &self.node_coords
    }

    /// Scalar node indices of element `e` in local basis order.
    pub fn element_nodes(&self, e: usize) -> &[usize] {
        let nl = self.basis.len();
        &self.node_map[e * nl..(e + 1) * nl]
    }

    /// Global DOFs of element `e`; for vector spaces local DOF `2a + c` is
    /// component `c` of local node `a`.
    pub fn element_dofs(&self, e: usize, out: &mut Vec<usize>) {
        out.clear();
        let nodes = self.element_nodes(e);
        if self.components == 1 {
            out.extend_from_slice(nodes);
        } else {
            for &k in nodes {
                out.extend((0..self.components).map(|c| self.components * k + c));
            }
        }
    }

    pub fn same_mesh(&self, other: &FeSpace) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh
    }

    /// Scalar nodes lying on the given boundary side.
    pub fn nodes_on_side(&self, side: Side) -> Vec<usize> {
        let s = self.degree * self.mesh.n() + 1;
        match side {
            Side::Bottom => (0..s).collect(),
            Side::Top => (0..s).map(|i| (s - 1) * s + i).collect(),
            Side::Left => (0..s).map(|j| j * s).collect(),
            Side::Right => (0..s).map(|j| j * s + s - 1).collect(),
        }
    }

    /// Scalar nodes on every boundary edge whose tag satisfies `pred`,
    /// sorted and deduplicated.
    pub fn boundary_nodes(&self, pred: impl Fn(BoundaryTag) -> bool) -> Vec<usize> {
        let mut sides: Vec<Side> = Vec::new();
        for e in self.mesh.boundary_edges() {
            if pred(e.tag) && !sides.contains(&e.side) {
                sides.push(e.side);
            }
        }
        let mut nodes: Vec<usize> = sides.into_iter().flat_map(|s| self.nodes_on_side(s)).collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Nodal interpolant of `f`, which returns one value per component.
    pub fn interpolate(&self, f: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs()];
        for (k, &p) in self.node_coords.iter().enumerate() {
            let v = f(p);
            for c in 0..self.components {
                out[self.components * k + c] = v[c];
            }
        }
        out
    }

    pub fn interpolate_scalar(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.interpolate(|p| [f(p), 0.0])
    }

    /// Value of the discrete field at `p`, one entry per component.
    pub fn evaluate(&self, coeffs: &[f64], p: Point) -> Result<[f64; 2]> {
        check_len(self.n_dofs(), coeffs.len())?;
        let loc = self.mesh.locate_point(p)?;
        let mut phi = vec![0.0; self.basis.len()];
        self.basis.values(loc.barycentric, &mut phi);
        let mut out = [0.0; 2];
        for (a, &k) in self.element_nodes(loc.triangle).iter().enumerate() {
            for c in 0..self.components {
                out[c] += coeffs[self.components * k + c] * phi[a];
            }
        }
        Ok(out)
    }

    /// Position of every DOF on the lattice of spacing `1 / (6n)`, on which
    /// the nodes of all supported degrees lie.
    pub fn lattice_coords(&self) -> Vec<(usize, usize)> {
        let side = self.degree * self.mesh.n() + 1;
        let scale = 6 / self.degree;
        (0..self.n_dofs())
            .map(|dof| {
                let k = dof / self.components;
                (scale * (k % side), scale * (k / side))
            })
            .collect()
    }

    /// Field values at the mesh vertices, one `[f64; 2]` per vertex (the
    /// second entry is zero for scalar spaces).
    pub fn vertex_values(&self, coeffs: &[f64]) -> Result<Vec<[f64; 2]>> {
        check_len(self.n_dofs(), coeffs.len())?;
        let (n, d) = (self.mesh.n(), self.degree);
        let side = d * n + 1;
        let nc = self.components;
        Ok((0..self.mesh.n_vertices())
            .map(|v| {
                let (i, j) = (v % (n + 1), v / (n + 1));
                let k = d * j * side + d * i;
                let mut out = [0.0; 2];
                out[..nc].copy_from_slice(&coeffs[nc * k..nc * k + nc]);
                out
            })
            .collect())
    }

    pub fn geometry(&self, e: usize) -> ElementGeometry {
        ElementGeometry::new(self.mesh.triangle_points(e))
    }
}

/// The four discrete spaces: vector degree `k` for `u`, scalar degree `k − 1`
/// for `ξ` and scalar degree `l` for both `φ` and `ψ`.
#[derive(Debug, Clone)]
pub struct FieldSpaces {
    pub u: FeSpace,
    pub xi: FeSpace,
    pub phi: FeSpace,
    pub psi: FeSpace,
}

/// Builds the Taylor–Hood pair of degree `k ∈ {2, 3}` and the transport
/// spaces of degree `l ∈ {1, 2, 3}` on one mesh.
pub fn build_field_spaces(mesh: &Arc<Mesh>, k: usize, l: usize) -> Result<FieldSpaces> {
    if !(2..=3).contains(&k) {
        return Err(invalid(format!("displacement degree k must be 2 or 3, got {k}")));
    }
    let q = build_space(mesh, l, 1)?;
    Ok(FieldSpaces { u: build_space(mesh, k, 2)?, xi: build_space(mesh, k - 1, 1)?, phi: q.clone(), psi: q })
}

impl FieldSpaces {
    pub fn mesh(&self) -> &Arc<Mesh> {
        self.u.mesh()
    }

    /// DOF counts in the order `u, ξ, φ, ψ`.
    pub fn sizes(&self) -> [usize; 4] {
        [self.u.n_dofs(), self.xi.n_dofs(), self.phi.n_dofs(), self.psi.n_dofs()]
    }
}

/// Evaluates a discrete field at a point (all components).
pub fn evaluate_field(space: &FeSpace, coeffs: &[f64], p: Point) -> Result<Vec<f64>> {
    let v = space.evaluate(coeffs, p)?;
    Ok(v[..space.components()].to_vec())
}
