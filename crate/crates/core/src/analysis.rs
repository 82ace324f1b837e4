//! Error norms, convergence rates, energy functionals and cross-sections.

use crate::error::{check_len, invalid, Error, Result};
use crate::fem::assembly::Tabulation;
use crate::fem::space::ElementGeometry;
use crate::fem::{FeSpace, FieldSpaces, QuadratureRule};
use crate::mesh::Point;
use crate::model::{ExactSolution, FieldState, ModelParams};

/// Final-time errors in the norms of the convergence tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub t: f64,
    pub eu_h1: f64,
    pub exi_l2: f64,
    pub ephi_h1: f64,
    pub epsi_h1: f64,
}

impl ErrorReport {
    pub fn as_array(&self) -> [f64; 4] {
        [self.eu_h1, self.exi_l2, self.ephi_h1, self.epsi_h1]
    }
}

/// Per-quadrature-point evaluation of a discrete field on one element.
struct ElementField<'a> {
    space: &'a FeSpace,
    coeffs: &'a [f64],
    tab: Tabulation,
    grads: Vec<[f64; 2]>,
}

impl<'a> ElementField<'a> {
    fn new(space: &'a FeSpace, coeffs: &'a [f64], rule: &QuadratureRule) -> Self {
        Self { space, coeffs, tab: Tabulation::new(space, rule), grads: Vec::new() }
    }

    /// Values and gradients (`grad[c] = ∇ component c`).
    fn eval(&mut self, e: usize, geo: &ElementGeometry, q: usize) -> ([f64; 2], [[f64; 2]; 2]) {
        let nc = self.space.components();
        self.tab.gradients(geo, q, &mut self.grads);
        let mut v = [0.0; 2];
        let mut g = [[0.0; 2]; 2];
        for (a, &k) in self.space.element_nodes(e).iter().enumerate() {
            let phi = self.tab.values[q][a];
            let dphi = self.grads[a];
            for c in 0..nc {
                let x = self.coeffs[nc * k + c];
                v[c] += x * phi;
                g[c][0] += x * dphi[0];
                g[c][1] += x * dphi[1];
            }
        }
        (v, g)
    }
}

fn max_degree(spaces: &FieldSpaces) -> usize {
    [&spaces.u, &spaces.xi, &spaces.phi, &spaces.psi].iter().map(|s| s.degree()).max().unwrap_or(1)
}

/// Errors of `state` against the exact fields at `state.t`, with full `H¹`
/// norms for `u, φ, ψ` and the `L²` norm for `ξ`.
pub fn error_norms(state: &FieldState, exact: Option<&ExactSolution>, spaces: &FieldSpaces) -> Result<ErrorReport> {
    let exact = exact.ok_or_else(|| Error::Unsupported("error norms need an exact solution".into()))?;
    state.check(spaces)?;
    let rule = QuadratureRule::with_exactness(2 * max_degree(spaces) + 3);
    let mut fu = ElementField::new(&spaces.u, &state.u, &rule);
    let mut fx = ElementField::new(&spaces.xi, &state.xi, &rule);
    let mut fq = ElementField::new(&spaces.phi, &state.phi, &rule);
    let mut fs = ElementField::new(&spaces.psi, &state.psi, &rule);
    let mesh = spaces.mesh();
    let t = state.t;
    let mut acc = [0.0; 4];
    for e in 0..mesh.n_triangles() {
        let geo = spaces.u.geometry(e);
        for (q, w) in rule.weights.iter().enumerate() {
            let wq = w * 2.0 * geo.area;
            let p = mesh.physical_point(e, rule.points[q]);
            let (uh, guh) = fu.eval(e, &geo, q);
            let (u, gu) = (exact.u)(p, t);
            let mut s = 0.0;
            for c in 0..2 {
                s += (u[c] - uh[c]).powi(2);
                s += (gu[c][0] - guh[c][0]).powi(2) + (gu[c][1] - guh[c][1]).powi(2);
            }
            acc[0] += wq * s;
            acc[1] += wq * ((exact.xi)(p, t) - fx.eval(e, &geo, q).0[0]).powi(2);
            for (slot, (f, ex)) in [(&mut fq, &exact.phi), (&mut fs, &exact.psi)].into_iter().enumerate() {
                let (vh, gh) = f.eval(e, &geo, q);
                let (v, g) = ex(p, t);
                acc[2 + slot] += wq * ((v - vh[0]).powi(2) + (g[0] - gh[0][0]).powi(2) + (g[1] - gh[0][1]).powi(2));
            }
        }
    }
    Ok(ErrorReport { t, eu_h1: acc[0].sqrt(), exi_l2: acc[1].sqrt(), ephi_h1: acc[2].sqrt(), epsi_h1: acc[3].sqrt() })
}

/// Norms of a discrete state in the error-table norms: `‖u‖_{H¹}`, `‖ξ‖`,
/// `‖φ‖_{H¹}`, `‖ψ‖_{H¹}`.
pub fn field_norms(state: &FieldState, spaces: &FieldSpaces) -> Result<[f64; 4]> {
    state.check(spaces)?;
    let rule = QuadratureRule::with_exactness(2 * max_degree(spaces));
    let mut fields = [
        ElementField::new(&spaces.u, &state.u, &rule),
        ElementField::new(&spaces.xi, &state.xi, &rule),
        ElementField::new(&spaces.phi, &state.phi, &rule),
        ElementField::new(&spaces.psi, &state.psi, &rule),
    ];
    let mut acc = [0.0; 4];
    for e in 0..spaces.mesh().n_triangles() {
        let geo = spaces.u.geometry(e);
        for (q, w) in rule.weights.iter().enumerate() {
            let wq = w * 2.0 * geo.area;
            for (slot, f) in fields.iter_mut().enumerate() {
                let (v, g) = f.eval(e, &geo, q);
                let mut s = v[0] * v[0] + v[1] * v[1];
                if slot != 1 {
                    s += g.iter().flatten().map(|x| x * x).sum::<f64>();
                }
                acc[slot] += wq * s;
            }
        }
    }
    Ok(acc.map(f64::sqrt))
}

/// Per-field relative distance of `state` from `reference` in the norms of
/// [`field_norms`].
pub fn relative_errors(state: &FieldState, reference: &FieldState, spaces: &FieldSpaces) -> Result<[f64; 4]> {
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<f64>>();
    let d = FieldState {
        t: state.t,
        u: diff(&state.u, &reference.u),
        xi: diff(&state.xi, &reference.xi),
        phi: diff(&state.phi, &reference.phi),
        psi: diff(&state.psi, &reference.psi),
    };
    let num = field_norms(&d, spaces)?;
    let den = field_norms(reference, spaces)?;
    Ok(std::array::from_fn(|k| if den[k] > 0.0 { num[k] / den[k] } else { num[k] }))
}

/// `log₂(e_{k−1} / e_k)` for a halving ladder; `None` where undefined.
pub fn convergence_rates(errors: &[f64]) -> Result<Vec<Option<f64>>> {
    if errors.len() < 2 {
        return Err(invalid("convergence rates need at least two errors"));
    }
    Ok(errors
        .windows(2)
        .map(|w| {
            let ok = |v: f64| v > 0.0 && v.is_finite();
            (ok(w[0]) && ok(w[1])).then(|| (w[0] / w[1]).log2())
        })
        .collect())
}

/// `‖r − b‖ / ‖b‖`, or `‖r‖` when `b = 0`.
pub fn relative_residual(r: &[f64], b: &[f64]) -> f64 {
    let num: f64 = r.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// The energy `E` and dissipation `V` with their individual terms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyReport {
    /// `2μ‖ε(v)‖²`
    pub elastic: f64,
    /// `(1/λ)‖w − αq − βs‖²`
    pub coupling: f64,
    /// `(c₁ − b₀)‖q‖²`
    pub storage_phi: f64,
    /// `(c₂ − b₀)‖s‖²`
    pub storage_psi: f64,
    /// `b₀‖q − s‖²`
    pub dilation: f64,
    /// `K‖∇q‖²`
    pub diffusion_phi: f64,
    /// `D‖∇s‖²`
    pub diffusion_psi: f64,
    /// `γ‖q − s‖²`
    pub transfer: f64,
    pub e: f64,
    pub v: f64,
}

/// Evaluates `E(v, w, q, s)` and `V(q, s)` by element quadrature.
pub fn energy_functionals(state: &FieldState, params: &ModelParams, spaces: &FieldSpaces) -> Result<EnergyReport> {
    state.check(spaces)?;
    let rule = QuadratureRule::with_exactness(2 * max_degree(spaces));
    let mut fu = ElementField::new(&spaces.u, &state.u, &rule);
    let mut fx = ElementField::new(&spaces.xi, &state.xi, &rule);
    let mut fq = ElementField::new(&spaces.phi, &state.phi, &rule);
    let mut fs = ElementField::new(&spaces.psi, &state.psi, &rule);
    let p = params;
    let mut r = EnergyReport::default();
    let mut sq = [0.0; 6];
    for e in 0..spaces.mesh().n_triangles() {
        let geo = spaces.u.geometry(e);
        for (q, w) in rule.weights.iter().enumerate() {
            let wq = w * 2.0 * geo.area;
            let (_, gu) = fu.eval(e, &geo, q);
            let off = 0.5 * (gu[0][1] + gu[1][0]);
            let eps2 = gu[0][0].powi(2) + gu[1][1].powi(2) + 2.0 * off * off;
            let xi = fx.eval(e, &geo, q).0[0];
            let (qv, gq) = fq.eval(e, &geo, q);
            let (sv, gs) = fs.eval(e, &geo, q);
            let (qv, sv) = (qv[0], sv[0]);
            sq[0] += wq * eps2;
            sq[1] += wq * (xi - p.alpha * qv - p.beta * sv).powi(2);
            sq[2] += wq * qv * qv;
            sq[3] += wq * sv * sv;
            sq[4] += wq * (qv - sv).powi(2);
            sq[5] += wq * (gq[0][0].powi(2) + gq[0][1].powi(2));
            r.diffusion_psi += wq * (gs[0][0].powi(2) + gs[0][1].powi(2));
        }
    }
    r.elastic = 2.0 * p.mu * sq[0];
    r.coupling = sq[1] / p.lambda;
    r.storage_phi = (p.c1 - p.b0) * sq[2];
    r.storage_psi = (p.c2 - p.b0) * sq[3];
    r.dilation = p.b0 * sq[4];
    r.diffusion_phi = p.k * sq[5];
    r.diffusion_psi *= p.d;
    r.transfer = p.gamma * sq[4];
    r.e = r.elastic + r.coupling + r.storage_phi + r.storage_psi + r.dilation;
    r.v = r.diffusion_phi + r.diffusion_psi + r.transfer;
    Ok(r)
}

/// A field selectable for sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldName {
    U1,
    U2,
    Xi,
    Phi,
    Psi,
}

impl FieldName {
    pub const ALL: [FieldName; 5] = [FieldName::U1, FieldName::U2, FieldName::Xi, FieldName::Phi, FieldName::Psi];

    pub fn as_str(self) -> &'static str {
        match self {
            FieldName::U1 => "u1",
            FieldName::U2 => "u2",
            FieldName::Xi => "xi",
            FieldName::Phi => "phi",
            FieldName::Psi => "psi",
        }
    }
}

impl std::str::FromStr for FieldName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FieldName::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown field '{s}' (expected u1, u2, xi, phi or psi)")))
    }
}

/// A vertical (`x = c`) or horizontal (`y = c`) line through the square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Line {
    X(f64),
    Y(f64),
}

impl Line {
    fn point(self, s: f64) -> Point {
        match self {
            Line::X(c) => [c, s],
            Line::Y(c) => [s, c],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectionSamples {
    pub line: Line,
    pub field: FieldName,
    /// Free coordinate along the line.
    pub params: Vec<f64>,
    pub values: Vec<f64>,
}

/// Samples `field` of `state` at `n_samples` equispaced points on `line`.
pub fn cross_section(
    state: &FieldState,
    spaces: &FieldSpaces,
    field: FieldName,
    line: Line,
    n_samples: usize,
) -> Result<SectionSamples> {
    let (Line::X(c) | Line::Y(c)) = line;
    if !(0.0..=1.0).contains(&c) {
        let p = line.point(0.0);
        return Err(Error::OutOfDomain { x: p[0], y: p[1] });
    }
    if n_samples < 2 {
        return Err(invalid("a cross-section needs at least two samples"));
    }
    state.check(spaces)?;
    let (space, coeffs, comp) = match field {
        FieldName::U1 => (&spaces.u, &state.u, 0),
        FieldName::U2 => (&spaces.u, &state.u, 1),
        FieldName::Xi => (&spaces.xi, &state.xi, 0),
        FieldName::Phi => (&spaces.phi, &state.phi, 0),
        FieldName::Psi => (&spaces.psi, &state.psi, 0),
    };
    let params: Vec<f64> = (0..n_samples).map(|i| i as f64 / (n_samples - 1) as f64).collect();
    let values = params.iter().map(|&s| Ok(space.evaluate(coeffs, line.point(s))?[comp])).collect::<Result<_>>()?;
    Ok(SectionSamples { line, field, params, values })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillation {
    /// `max(0, −min v) / max |v|`.
    pub undershoot: f64,
    /// Sign changes among significant second differences.
    pub sign_flips: usize,
}

/// Undershoot and curvature sign changes of a sampled curve.
pub fn oscillation_metric(samples: &SectionSamples) -> Result<Oscillation> {
    let v = &samples.values;
    if v.len() < 3 {
        return Err(invalid("oscillation metric needs at least three samples"));
    }
    let amp = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if amp < 1e-14 {
        return Ok(Oscillation { undershoot: 0.0, sign_flips: 0 });
    }
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let undershoot = (-min).max(0.0) / amp;
    let mut last = 0.0f64;
    let mut sign_flips = 0;
    for w in v.windows(3) {
        let d2 = w[0] - 2.0 * w[1] + w[2];
        if d2.abs() > 1e-3 * amp {
            if last != 0.0 && d2.signum() != last {
                sign_flips += 1;
            }
            last = d2.signum();
        }
    }
    Ok(Oscillation { undershoot, sign_flips })
}

/// Maximum pointwise distance between two sampled curves relative to the
/// amplitude of `reference`.
pub fn relative_curve_distance(curve: &SectionSamples, reference: &SectionSamples) -> Result<f64> {
    check_len(reference.values.len(), curve.values.len())?;
    let amp = reference.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let dist = curve.values.iter().zip(&reference.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(if amp > 0.0 { dist / amp } else { dist })
}
