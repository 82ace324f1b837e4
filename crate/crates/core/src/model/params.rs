use crate::error::{invalid, Result};

/// Physical coefficients of the unified model and stabilization weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub mu: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub b0: f64,
    pub gamma: f64,
    /// Permeability (or conductivity) of the `φ` network.
    pub k: f64,
    /// Permeability (or conductivity) of the `ψ` network.
    pub d: f64,
    pub eta_phi: f64,
    pub eta_psi: f64,
}

impl Default for ModelParams {
    /// Unit coefficients with `b0 = γ = 0.1` and no stabilization.
    fn default() -> Self {
        Self {
            mu: 1.0,
            lambda: 1.0,
            alpha: 1.0,
            beta: 1.0,
            c1: 1.0,
            c2: 1.0,
            b0: 0.1,
            gamma: 0.1,
            k: 1.0,
            d: 1.0,
            eta_phi: 0.0,
            eta_psi: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Pressure and temperature: no transfer term.
    ThermoPoroelastic,
    /// Double porosity: no dilation coupling.
    BarenblattBiot,
    General,
}

impl ModelParams {
    /// Checks positivity and the structural constraints `c_i − b0 ≥ 0`.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu", self.mu),
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("K", self.k),
            ("D", self.d),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let nonnegative = [
            ("c1", self.c1),
            ("c2", self.c2),
            ("b0", self.b0),
            ("gamma", self.gamma),
            ("eta_phi", self.eta_phi),
            ("eta_psi", self.eta_psi),
        ];
        for (name, v) in nonnegative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be non-negative and finite, got {v}")));
            }
        }
        if self.c1 - self.b0 < 0.0 {
            return Err(invalid(format!("c1 - b0 must be non-negative, got {} - {}", self.c1, self.b0)));
        }
        if self.c2 - self.b0 < 0.0 {
            return Err(invalid(format!("c2 - b0 must be non-negative, got {} - {}", self.c2, self.b0)));
        }
        Ok(())
    }

    /// Same parameters with both stabilization weights set to `eta`.
    pub fn with_stabilization(self, eta: f64) -> Self {
        Self { eta_phi: eta, eta_psi: eta, ..self }
    }
}

/// `λ = Eν/((1+ν)(1−2ν))`, `μ = E/(2(1+ν))`.
pub fn lame_from_young_poisson(e: f64, nu: f64) -> Result<(f64, f64)> {
    if !(e > 0.0 && e.is_finite()) {
        return Err(invalid(format!("Young's modulus must be positive, got {e}")));
    }
    if !(0.0..0.5).contains(&nu) {
        return Err(invalid(format!("Poisson ratio must lie in [0, 0.5), got {nu}")));
    }
    Ok((e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), e / (2.0 * (1.0 + nu))))
}

/// Restricts the general coefficients to one of the model specializations.
pub fn specialize(kind: ModelKind, params: ModelParams) -> ModelParams {
    match kind {
        ModelKind::ThermoPoroelastic => ModelParams { gamma: 0.0, ..params },
        ModelKind::BarenblattBiot => ModelParams { b0: 0.0, ..params },
        ModelKind::General => params,
    }
}

/// Stabilization weight `1 / (32 (μ + 2λ) h²)`.
pub fn scaled_stabilization(mu: f64, lambda: f64, h: f64) -> f64 {
    1.0 / (32.0 * (mu + 2.0 * lambda) * h * h)
}
