//! Very weak solutions of the 1-D wave equation with singular,
//! space-dependent coefficients.
//!
//! The singular coefficient (Heaviside, delta, `chi^alpha_+`) is regularized
//! by convolution with a scaled bump kernel, the regularized Cauchy problem is
//! reduced to a first-order system and advanced with a Lax-Friedrichs scheme,
//! and the resulting nets of solutions are compared against the piecewise
//! distributional solution of the Heaviside model.

pub mod coefficients;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod grid;
pub mod harness;
pub mod mollifier;
pub mod quadrature;
pub mod report;
pub mod solver;

pub use coefficients::{
    chi_alpha_value, gamma_function, glaeser_report, levi_constant, regularize, CoefficientKind,
    CoefficientSpec, GlaeserReport, LowerOrderTerms, RegularizedCoefficient, Scale, SmoothFn,
};
pub use diagnostics::{
    l2_error_vs_exact, l2_norm, moderateness_exponent, physical_energy, symmetriser_energy,
    SweepMetadata, SweepReport, SweepRow, ValueKind,
};
pub use config::{parse_config, CoefficientChoice, Experiment, ExperimentConfig, Preset};
pub use error::{Error, Result};
pub use exact::{check_compatibility, dalembert, default_g0, default_g1, ExactSolution, InitialData};
pub use grid::Grid1D;
pub use mollifier::{bump_value, mollifier_derivative, mollifier_mass, mollifier_value, MollifierSpec};
pub use solver::{
    build_system, cfl_dt, evolve, lax_friedrichs_step, local_lax_friedrichs_step, Dissipation,
    Evolution, Form, SolveConfig, SystemCoefficients, TimeStep, WaveState,
};
