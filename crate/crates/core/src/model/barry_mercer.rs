//! Point-source consolidation benchmark on the unit square.

use super::params::{lame_from_young_poisson, ModelParams};
use super::problem::{PointSource, ProblemData, ScalarSource};
use crate::error::Result;
use crate::mesh::BoundaryScheme;

/// Source location.
pub const SOURCE_LOCATION: [f64; 2] = [0.25, 0.25];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BarryMercerVariant {
    /// Stiff, nearly impermeable medium over one tiny time step.
    StabSingleStep,
    /// Soft, permeable medium over a quarter period.
    SmoothRun,
}

impl BarryMercerVariant {
    /// Coefficients of the variant, without stabilization.
    pub fn params(self) -> Result<ModelParams> {
        let (lambda, mu, k) = match self {
            BarryMercerVariant::StabSingleStep => {
                let (l, m) = lame_from_young_poisson(1e5, 0.1)?;
                (l, m, 1e-6)
            }
            BarryMercerVariant::SmoothRun => (0.2, 0.4, 1.0),
        };
        Ok(ModelParams {
            mu,
            lambda,
            alpha: 0.5,
            beta: 0.5,
            c1: 0.0,
            c2: 0.0,
            b0: 0.0,
            gamma: 0.0,
            k,
            d: k,
            eta_phi: 0.0,
            eta_psi: 0.0,
        })
    }

    /// Final time (also the single step size for `StabSingleStep`).
    pub fn final_time(self) -> f64 {
        match self {
            BarryMercerVariant::StabSingleStep => std::f64::consts::FRAC_PI_2 * 1e-9,
            BarryMercerVariant::SmoothRun => std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn steps(self) -> usize {
        match self {
            BarryMercerVariant::StabSingleStep => 1,
            BarryMercerVariant::SmoothRun => 20,
        }
    }

    /// Fixed iteration count of the decoupled scheme.
    pub fn iterations(self) -> usize {
        match self {
            BarryMercerVariant::StabSingleStep => 30,
            BarryMercerVariant::SmoothRun => 5,
        }
    }
}

/// Source frequency `ω = (λ + 2μ) K`.
pub fn source_frequency(params: &ModelParams) -> f64 {
    (params.lambda + 2.0 * params.mu) * params.k
}

/// Zero body force and initial data; both transport equations driven by
/// `2 sin(ωt) δ(p − (0.25, 0.25))`.
pub fn barry_mercer_problem(params: ModelParams) -> Result<ProblemData> {
    params.validate()?;
    let omega = source_frequency(&params);
    let src = PointSource::new(SOURCE_LOCATION, move |t| 2.0 * (omega * t).sin())?;
    Ok(ProblemData {
        g: ScalarSource::Point(src.clone()),
        h: ScalarSource::Point(src),
        ..ProblemData::homogeneous(params, BoundaryScheme::BarryMercer)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_parameters() {
        let p = BarryMercerVariant::StabSingleStep.params().unwrap();
        assert!((p.lambda - 11363.636363636364).abs() < 1e-8);
        assert!((p.mu - 45454.545454545456).abs() < 1e-8);
        assert_eq!((p.k, p.d, p.alpha, p.beta), (1e-6, 1e-6, 0.5, 0.5));
        let s = BarryMercerVariant::SmoothRun.params().unwrap();
        assert_eq!((s.mu, s.lambda, s.k), (0.4, 0.2, 1.0));
        assert!((source_frequency(&s) - 1.0).abs() < 1e-15);
        assert!((source_frequency(&p) - 0.10227272727272728).abs() < 1e-12);
    }
}
