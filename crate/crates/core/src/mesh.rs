//! Structured triangulations of the unit square.
//!
//! The `n × n` lattice is split into squares, each cut along the diagonal
//! from its lower-left to its upper-right corner. Vertex `(i, j)` has index
//! `j * (n + 1) + i`; square `(i, j)` owns triangles `2 * (j * n + i)`
//! (below the diagonal) and `2 * (j * n + i) + 1` (above it).

use crate::error::{invalid, Error, Result};

pub type Point = [f64; 2];

const LOCATE_TOL: f64 = 1e-12;

/// One side of the unit square, listed in the order `Γ1..Γ4` of the
/// Barry–Mercer setup (right, bottom, left, top).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Right,
    Bottom,
    Left,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Right, Side::Bottom, Side::Left, Side::Top];

    /// Outward unit normal.
    pub fn normal(self) -> Point {
        match self {
            Side::Right => [1.0, 0.0],
            Side::Bottom => [0.0, -1.0],
            Side::Left => [-1.0, 0.0],
            Side::Top => [0.0, 1.0],
        }
    }

    fn contains(self, p: Point) -> bool {
        let eps = 1e-12;
        match self {
            Side::Right => (p[0] - 1.0).abs() < eps,
            Side::Bottom => p[1].abs() < eps,
            Side::Left => p[0].abs() < eps,
            Side::Top => (p[1] - 1.0).abs() < eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
    /// Per-side tag used by the Barry–Mercer scheme.
    Side(Side),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryScheme {
    AllDirichlet,
    /// `Γ_N` is the right side `x = 1`, `Γ_D` the rest.
    RightNeumann,
    /// Each side carries its own tag.
    BarryMercer,
}

impl BoundaryScheme {
    pub fn tag_for(self, side: Side) -> BoundaryTag {
        match self {
            BoundaryScheme::AllDirichlet => BoundaryTag::Dirichlet,
            BoundaryScheme::RightNeumann if side == Side::Right => BoundaryTag::Neumann,
            BoundaryScheme::RightNeumann => BoundaryTag::Dirichlet,
            BoundaryScheme::BarryMercer => BoundaryTag::Side(side),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub side: Side,
    pub tag: BoundaryTag,
}

/// Immutable triangulation of the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    n: usize,
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    scheme: BoundaryScheme,
    h: f64,
}

/// Barycentric location of a point inside the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub triangle: usize,
    pub barycentric: [f64; 3],
}

/// Builds the `n × n` diagonal-split triangulation, tagged all-Dirichlet.
pub fn build_unit_square_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(invalid("mesh resolution n must be at least 1"));
    }
    let step = 1.0 / n as f64;
    let vid = |i: usize, j: usize| j * (n + 1) + i;

    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * step, j as f64 * step]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }

    // Counter-clockwise walk: bottom, right, top, left.
    let mut boundary_edges = Vec::with_capacity(4 * n);
    for i in 0..n {
        boundary_edges.push((vid(i, 0), vid(i + 1, 0), Side::Bottom));
    }
    for j in 0..n {
        boundary_edges.push((vid(n, j), vid(n, j + 1), Side::Right));
    }
    for i in (0..n).rev() {
        boundary_edges.push((vid(i + 1, n), vid(i, n), Side::Top));
    }
    for j in (0..n).rev() {
        boundary_edges.push((vid(0, j + 1), vid(0, j), Side::Left));
    }
    let scheme = BoundaryScheme::AllDirichlet;
    let boundary_edges = boundary_edges
        .into_iter()
        .map(|(a, b, side)| BoundaryEdge { vertices: [a, b], side, tag: scheme.tag_for(side) })
        .collect();

    Ok(Mesh { n, vertices, triangles, boundary_edges, scheme, h: std::f64::consts::SQRT_2 * step })
}

/// Returns a copy of `mesh` whose boundary edges carry the tags of `scheme`.
pub fn tag_boundaries(mesh: &Mesh, scheme: BoundaryScheme) -> Result<Mesh> {
    let mut boundary_edges = Vec::with_capacity(mesh.boundary_edges.len());
    for edge in &mesh.boundary_edges {
        let [a, b] = edge.vertices.map(|v| mesh.vertices[v]);
        let side = Side::ALL
            .into_iter()
            .find(|s| s.contains(a) && s.contains(b))
            .ok_or_else(|| {
                Error::InconsistentMesh(format!(
                    "boundary edge {:?} -> {:?} does not lie on a side of the unit square",
                    a, b
                ))
            })?;
        boundary_edges.push(BoundaryEdge { vertices: edge.vertices, side, tag: scheme.tag_for(side) });
    }
    Ok(Mesh { boundary_edges, scheme, ..mesh.clone() })
}

impl Mesh {
    /// Lattice resolution: the mesh has `n × n` squares.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest element diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn scheme(&self) -> BoundaryScheme {
        self.scheme
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    /// Signed area of triangle `t` (positive for counter-clockwise ordering).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    /// Lattice coordinates `(i, j)` of a vertex.
    pub fn vertex_lattice(&self, v: usize) -> (usize, usize) {
        (v % (self.n + 1), v / (self.n + 1))
    }

    /// Finds the triangle containing `p` together with its barycentric
    /// coordinates. Points on shared edges resolve to the lowest triangle index.
    pub fn locate_point(&self, p: Point) -> Result<Location> {
        let tol = LOCATE_TOL;
        if !(p[0] >= -tol && p[0] <= 1.0 + tol && p[1] >= -tol && p[1] <= 1.0 + tol) {
            return Err(Error::OutOfDomain { x: p[0], y: p[1] });
        }
        let n = self.n;
        let cell = |c: f64| ((c * n as f64).floor().max(0.0) as usize).min(n - 1);
        let (ci, cj) = (cell(p[0]), cell(p[1]));

        let mut best: Option<Location> = None;
        for j in cj.saturating_sub(1)..=(cj + 1).min(n - 1) {
            for i in ci.saturating_sub(1)..=(ci + 1).min(n - 1) {
                for t in [2 * (j * n + i), 2 * (j * n + i) + 1] {
                    if best.is_some_and(|b| b.triangle < t) {
                        continue;
                    }
                    let bary = self.barycentric(t, p);
                    if bary.iter().all(|&l| l >= -tol) {
                        best = Some(Location { triangle: t, barycentric: bary });
                    }
                }
            }
        }
        best.ok_or(Error::OutOfDomain { x: p[0], y: p[1] })
    }

    /// Barycentric coordinates of `p` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, p: Point) -> [f64; 3] {
        let [a, b, c] = self.triangle_points(t);
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
        let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    /// Maps barycentric coordinates on triangle `t` to a physical point.
    pub fn physical_point(&self, t: usize, bary: [f64; 3]) -> Point {
        let pts = self.triangle_points(t);
        let mut x = [0.0; 2];
        for (l, q) in bary.iter().zip(pts) {
            x[0] += l * q[0];
            x[1] += l * q[1];
        }
        x
    }
}
