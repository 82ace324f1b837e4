//! Nodal Lagrange bases on triangles written in barycentric coordinates.

/// Lagrange basis of degree `d` on a triangle.
///
/// Node `α = (α₀, α₁, α₂)` with `|α| = d` sits at barycentric point `α / d`;
/// its shape function is `Π_k ℓ_{α_k}(λ_k)` with
/// `ℓ_a(λ) = Π_{m<a} (dλ − m)/(m + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagrangeBasis {
    degree: usize,
    nodes: Vec<[usize; 3]>,
}

impl LagrangeBasis {
    pub fn new(degree: usize) -> Self {
        let mut nodes = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
        // Vertices first so that P1 nodes line up with triangle vertices.
        nodes.push([degree, 0, 0]);
        if degree > 0 {
            nodes.push([0, degree, 0]);
            nodes.push([0, 0, degree]);
        }
        for a2 in 0..=degree {
            for a1 in 0..=(degree - a2) {
                let a0 = degree - a1 - a2;
                let node = [a0, a1, a2];
                if !nodes.contains(&node) {
                    nodes.push(node);
                }
            }
        }
        Self { degree, nodes }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Barycentric multi-indices of the local nodes.
    pub fn nodes(&self) -> &[[usize; 3]] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn factor(&self, a: usize, lambda: f64) -> (f64, f64) {
        let d = self.degree as f64;
        let mut value = 1.0;
        let mut deriv = 0.0;
        for m in 0..a {
            let m = m as f64;
            let f = (d * lambda - m) / (m + 1.0);
            let df = d / (m + 1.0);
            deriv = deriv * f + value * df;
            value *= f;
        }
        (value, deriv)
    }

    /// Shape function values at a barycentric point.
    pub fn values(&self, bary: [f64; 3], out: &mut [f64]) {
        for (o, node) in out.iter_mut().zip(&self.nodes) {
            *o = (0..3).map(|k| self.factor(node[k], bary[k]).0).product();
        }
    }

    /// Derivatives of each shape function with respect to `(λ₀, λ₁, λ₂)`,
    /// treating the three coordinates as independent.
    pub fn bary_gradients(&self, bary: [f64; 3], out: &mut [[f64; 3]]) {
        for (o, node) in out.iter_mut().zip(&self.nodes) {
            let f: [(f64, f64); 3] = std::array::from_fn(|k| self.factor(node[k], bary[k]));
            *o = [f[0].1 * f[1].0 * f[2].0, f[0].0 * f[1].1 * f[2].0, f[0].0 * f[1].0 * f[2].1];
        }
    }
}
