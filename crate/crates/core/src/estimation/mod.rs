//! Bank of mode-conditioned extended Kalman filters fused by an
//! interacting multiple model estimator.

mod ekf;
mod imm;

pub use ekf::{
    ekf_propagate, ekf_update, gaussian_likelihood, linearize, log_gaussian_likelihood, measurement_jacobian, mode_rhs,
    symmetrize, Update, FD_STEP,
};
pub use imm::{
    apply_weight_floor, default_transition, dominant, imm_combine, imm_mix, imm_step, imm_weight_update,
    imm_weight_update_log, ImmBank, ImmOutput, Mixed, ModeFilter, WeightUpdate,
};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimationError {
    #[error("innovation covariance is singular")]
    SingularInnovation,
    #[error("mixing normaliser vanished")]
    NumericalDegeneracy,
    #[error(transparent)]
    Model(#[from] ModelError),
}
