//! The Schrödinger operators whose smallest eigenvalues control decay
//! rates: the two-point operator −Δ + λ²V on the torus (1D pinned and 2D
//! forms) and Dirichlet-box model problems with potentials (xᵐ ± yⁿ)².
//!
//! The coupling λ enters only through λ²V; callers that connect decay
//! rates to eigenvalues are responsible for passing the coupling that
//! matches their evolution's potential coefficient.

mod model;
mod operator;
mod potential;
mod scaling;

pub use model::{
    model_problem_eig, model_problem_eig_dense, model_scaling_study,
    model_scaling_study_with, recommended_box_grid, DirichletEigenResult, ModelSign,
};
pub use operator::{
    default_tol, recommended_grid, smallest_eigenvalue, smallest_eigenvalue_dense,
    EigenResult, SchrodingerOp,
};
pub use potential::{assemble_potential_1d, assemble_potential_2d, PotentialGrid};
pub use scaling::{
    log_log_fit, scaling_study, scaling_study_with, separable_sin_cos_ground,
    LogLogFit, ScalingFit, ScalingPoint,
};
