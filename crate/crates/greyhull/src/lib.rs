//! Grey-box ship dynamics toolkit.
//!
//! Simulates 3-DoF vessel motion from physics-based equations of motion,
//! fits eleven interpretable force-model parameters to trajectory data with
//! constrained nonlinear least squares, and scores fitted models against
//! baselines with per-dimension Manhattan distances and a nondimensional
//! vessel distance measure.
//!
//! The numeric core ([`dynamics`], [`forces`], [`identification`],
//! [`evaluation`]) is generic over the scalar type through [`real::Real`];
//! the [`workbench`] (presets, dataset files, scenario generation, CLI
//! plumbing) works in `f64` via the aliases below.

pub mod angle;
pub mod dynamics;
pub mod evaluation;
pub mod forces;
pub mod identification;
pub mod real;
pub mod workbench;

/// Double-precision aliases used by the workbench and file formats.
pub type VesselState64 = dynamics::VesselState<f64>;
pub type ControlInput64 = dynamics::ControlInput<f64>;
pub type VesselConfig64 = dynamics::VesselConfig<f64>;
pub type HydroCoefficients64 = dynamics::HydroCoefficients<f64>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
pub type KeyParams64 = forces::KeyParams<f64>;
pub type ForceTriple64 = forces::ForceTriple<f64>;
pub type EnvInput64 = forces::EnvInput<f64>;
pub type WeightSpec64 = identification::WeightSpec<f64>;
pub type ConstraintSet64 = identification::ConstraintSet<f64>;
pub type FitProblem64 = identification::FitProblem<f64>;
pub type FitResult64 = identification::FitResult<f64>;
pub type SolverOptions64 = identification::SolverOptions<f64>;
pub type EvaluationReport64 = evaluation::EvaluationReport<f64>;
