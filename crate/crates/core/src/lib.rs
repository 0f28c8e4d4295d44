//! Flux-split semi-discrete solvers for triangular conservation-law systems
//! whose solutions carry δ, δ′ and δ″ shock waves, plus the diagnostics that
//! classify those waves (weak residuals, primitive areas, delta powers).
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the common `f64` and `f32` instantiations.

pub mod cascade;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod integrator;
pub mod ladder;
pub mod mollifier;
pub mod output;
pub mod profile;
pub mod scalar;
pub mod scenario;
pub mod transport;
pub mod velocity;

pub use cascade::{
    CascadeState, Family, Operators, Polynomial, SchemeParams, Smoothing, SystemSpec,
};
pub use diagnostics::{
    characteristics_oracle, estimate_delta_power, l1_norm, shock_area, sup_error, weak_residual,
    Equation, ResidualReport,
};
pub use error::{Error, Result};
pub use grid::{integrate, primitive, Field, Grid};
pub use integrator::{Simulation, Snapshot, Trajectory};
pub use ladder::{
    run_convergence_study, run_residual_study, run_scale_study, LadderSpec, ScaleStudyReport,
};
pub use mollifier::{convolve, BumpShape, Kernel};
pub use scalar::Real;
pub use scenario::{parse_scenario, print_scenario, Scenario};
pub use transport::{transport_rhs, FluxFn};
pub use velocity::{riemann_velocity, VelocityKind, VelocitySpec};

pub type Grid64 = Grid<f64>;
pub type Field64 = Field<f64>;
pub type Kernel64 = Kernel<f64>;
pub type Simulation64 = Simulation<f64>;
pub type Grid32 = Grid<f32>;
pub type Field32 = Field<f32>;
pub type Kernel32 = Kernel<f32>;
pub type Simulation32 = Simulation<f32>;
