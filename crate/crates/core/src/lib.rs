//! Multilayer disk structures with vanishing generalized polarization
//! tensors (GPTs) and the near-cloaking they produce for the conductivity
//! equation.
//!
//! - [`gpt`]: transfer-matrix cascades, contracted GPTs `M_k`, layer
//!   coefficients and mode potentials.
//! - [`design`]: Gauss–Newton search for conductivities with
//!   `M_1 = … = M_N = 0` at fixed radii.
//! - [`cloaking`]: DtN perturbations of shrunken structures, decay fits,
//!   the blow-up map and the push-forward conductivity tensor.
//!
//! Everything is generic over [`Real`] (`f32`/`f64`); the aliases below fix
//! the scalar to `f64`.

// negated comparisons reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cloaking;
pub mod design;
pub mod error;
pub mod gpt;
pub mod linalg;
pub mod scalar;
pub mod structure;

pub use cloaking::{
    blowup_map, decay_rate, dtn_eigenvalue_perturbation, insulated_dtn_perturbation,
    inverse_blowup_map, operator_norm_estimate, pushforward_tensor, tail_bound,
};
pub use design::{
    default_radii, gauss_newton_step, initial_guess, jacobian, residual, solve_design,
    solve_design_from, CoreConstraint, ResidualForm, SolverOptions, Termination,
};
pub use error::{Error, Result};
pub use gpt::{
    cascade, field_value, gpt, gpt_spectrum, interface_factor, layer_coefficients, scaled_gpt,
};
pub use scalar::Real;
pub use structure::RadialLayeredStructure;

pub type Structure = structure::RadialLayeredStructure<f64>;
pub type CascadeMatrix = gpt::CascadeMatrix<f64>;
pub type GptSpectrum = gpt::GptSpectrum<f64>;
pub type LayerCoefficients = gpt::LayerCoefficients<f64>;
pub type DesignProblem = design::DesignProblem<f64>;
pub type DesignReport = design::DesignReport<f64>;
pub type Options = design::SolverOptions<f64>;
pub type Core = design::CoreConstraint<f64>;
pub type DtnPerturbationReport = cloaking::DtnPerturbationReport<f64>;
pub type DecayFit = cloaking::DecayFit<f64>;
pub type PushforwardTensor = cloaking::PushforwardTensor<f64>;
