//! Smooth manufactured solution on the unit square.
//!
//! ```text
//! P(x, y) = x y (1 − x)² (1 − y)
//! u = [sin(πxt) cos(πyt), cos(πxt) sin(πyt)] P
//! φ = cos(t + x − y) P
//! ψ = sin(t + x − y) P
//! ```
//!
//! Sources follow from the three-field equations. Derivatives are taken
//! exactly with second-order jets rather than hand-expanded.

use std::f64::consts::PI;
use std::sync::Arc;

use super::jet::Jet;
use super::params::ModelParams;
use super::problem::{ExactSolution, ProblemData, ScalarSource};
use crate::mesh::{BoundaryScheme, Point};

struct Fields {
    u1: Jet,
    u2: Jet,
    phi: Jet,
    psi: Jet,
}

fn fields(p: Point, t: f64) -> Fields {
    let x = Jet::variable(0, p[0]);
    let y = Jet::variable(1, p[1]);
    let t = Jet::variable(2, t);
    let one_minus_x = -x + 1.0;
    let bubble = x * y * one_minus_x * one_minus_x * (-y + 1.0);
    let ax = (x * t).scale(PI);
    let ay = (y * t).scale(PI);
    let arg = t + x - y;
    Fields {
        u1: ax.sin() * ay.cos() * bubble,
        u2: ax.cos() * ay.sin() * bubble,
        phi: arg.cos() * bubble,
        psi: arg.sin() * bubble,
    }
}

/// Exact `u` and its Jacobian `J[c][d] = ∂_d u_c`.
pub fn exact_u(p: Point, t: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let f = fields(p, t);
    ([f.u1.v, f.u2.v], [[f.u1.dx(), f.u1.dy()], [f.u2.dx(), f.u2.dy()]])
}

pub fn exact_phi(p: Point, t: f64) -> (f64, [f64; 2]) {
    let f = fields(p, t);
    (f.phi.v, [f.phi.dx(), f.phi.dy()])
}

pub fn exact_psi(p: Point, t: f64) -> (f64, [f64; 2]) {
    let f = fields(p, t);
    (f.psi.v, [f.psi.dx(), f.psi.dy()])
}

/// `ξ = −λ∇·u + αφ + βψ`.
pub fn exact_xi(params: &ModelParams, p: Point, t: f64) -> f64 {
    let f = fields(p, t);
    -params.lambda * (f.u1.dx() + f.u2.dy()) + params.alpha * f.phi.v + params.beta * f.psi.v
}

/// Body force `f` and transport sources `g`, `h` at `(p, t)`.
pub fn manufactured_sources(params: &ModelParams, p: Point, t: f64) -> ([f64; 2], f64, f64) {
    let ModelParams { mu, lambda, alpha, beta, c1, c2, b0, gamma, k, d, .. } = *params;
    let Fields { u1, u2, phi, psi } = fields(p, t);
    let grad_div = [u1.h[0][0] + u2.h[1][0], u1.h[0][1] + u2.h[1][1]];
    let dt_div = u1.h[0][2] + u2.h[1][2];
    let f = [
        -mu * u1.laplacian() - (mu + lambda) * grad_div[0] + alpha * phi.dx() + beta * psi.dx(),
        -mu * u2.laplacian() - (mu + lambda) * grad_div[1] + alpha * phi.dy() + beta * psi.dy(),
    ];
    let g = c1 * phi.dt() - b0 * psi.dt() + alpha * dt_div - k * phi.laplacian() + gamma * (phi.v - psi.v);
    let h = c2 * psi.dt() - b0 * phi.dt() + beta * dt_div - d * psi.laplacian() + gamma * (psi.v - phi.v);
    (f, g, h)
}

/// The manufactured problem with Neumann side `x = 1`.
pub fn manufactured_problem(params: ModelParams) -> ProblemData {
    let exact = ExactSolution {
        u: Arc::new(exact_u),
        xi: Arc::new(move |p, t| exact_xi(&params, p, t)),
        phi: Arc::new(exact_phi),
        psi: Arc::new(exact_psi),
    };
    ProblemData {
        params,
        scheme: BoundaryScheme::RightNeumann,
        f: Some(Arc::new(move |p, t| manufactured_sources(&params, p, t).0)),
        g: ScalarSource::Field(Arc::new(move |p, t| manufactured_sources(&params, p, t).1)),
        h: ScalarSource::Field(Arc::new(move |p, t| manufactured_sources(&params, p, t).2)),
        u0: Arc::new(|p, _| exact_u(p, 0.0).0),
        phi0: Arc::new(|p, _| exact_phi(p, 0.0).0),
        psi0: Arc::new(|p, _| exact_psi(p, 0.0).0),
        exact: Some(exact),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_values() {
        assert!((exact_phi([0.5, 0.5], 0.0).0 - 0.03125).abs() < 1e-15);
        for p in [[0.1, 0.9], [0.5, 0.5], [0.77, 0.3]] {
            assert_eq!(exact_u(p, 0.0).0, [0.0, 0.0]);
        }
    }

    #[test]
    fn traces_vanish_on_the_boundary() {
        for s in [0.0, 0.3, 1.0] {
            for p in [[0.0, s], [1.0, s], [s, 0.0], [s, 1.0]] {
                let t = 0.7;
                assert!(exact_u(p, t).0.iter().all(|v| v.abs() < 1e-15));
                assert!(exact_phi(p, t).0.abs() < 1e-15 && exact_psi(p, t).0.abs() < 1e-15);
            }
        }
    }
}
