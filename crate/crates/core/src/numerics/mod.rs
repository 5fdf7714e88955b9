//! Problem-independent numerical kernels.

pub mod interp;
pub mod ode;
pub mod quadrature;

pub use interp::{equispaced_nodes, BarycentricLagrange, CubicHermite, InterpMode, Interpolant, TableInterpolant};
pub use ode::{integrate_ivp, integrate_with, GuardStop, IntegrationStats, IntegratorConfig, SampledCurve, StepControl, StepView};
pub use quadrature::{
    grid_max_on_torus, grid_max_on_torus_refined, periodic_average, periodic_average_vec, segment_average,
    segment_average_vec, torus_grid,
};
