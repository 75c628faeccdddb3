//! Stochastic collocation for neural field equations with random data.
//!
//! A problem is a [`ProblemSpec`]: kernel, firing rate, forcing and initial
//! condition, each depending on a slice of a random parameter vector with a
//! product density. It is projected onto a spatial grid
//! ([`SpatialDiscretization`]), integrated in time with an adaptive
//! Dormand–Prince scheme at every node of a Gauss tensor grid
//! ([`TensorGrid`]), and the nodal results give a Lagrange surrogate whose
//! moments are computed by the same quadrature.

pub mod error;
pub mod integrator;
pub mod linalg;
pub mod model;
pub mod param_space;
pub mod spatial;
pub mod uq_engine;

pub use error::{Error, Result};
pub use integrator::{integrate, integrate_from, IntegratorConfig, StepStats, Trajectory};
pub use model::{
    preset_problem1, preset_problem2, preset_problem3, preset_ring, Amplitude, FiringRate,
    ParamSlices, ProblemSpec, SemiDiscreteSystem,
};
pub use param_space::{
    gauss_hermite, gauss_legendre, lagrange_weights_1d, tensor_lagrange_eval, tensor_nodes,
    DataField, Dimension, Distribution, ParameterSpace, QuadratureRule1D, TensorGrid,
};
pub use spatial::{
    assemble_kernel_operator, chebyshev_grid, fem_grid, periodic_grid, project, Domain, Field,
    KernelOperator, SpatialDiscretization, SpatialKind,
};
pub use uq_engine::{
    convergence_study, error_self, error_vs_exact, mean_field, monte_carlo_mean, solve_collocation,
    spectrum_diagnostic, surrogate_eval, variance_field, CollocationSolution, ConvergenceRecord,
    ConvergenceRow, Linearization, MomentField, MonteCarloEstimate, Reference, SpectrumReport,
};
