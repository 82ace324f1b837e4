//! Coefficients, problem definitions and benchmark setups.

pub mod barry_mercer;
pub mod jet;
pub mod manufactured;
pub mod params;
pub mod problem;

pub use barry_mercer::{barry_mercer_problem, BarryMercerVariant};
pub use manufactured::manufactured_problem;
pub use params::{lame_from_young_poisson, scaled_stabilization, specialize, ModelKind, ModelParams};
pub use problem::{
    total_pressure_initial, ExactSolution, FieldState, PointSource, ProblemData, ScalarSource,
};
