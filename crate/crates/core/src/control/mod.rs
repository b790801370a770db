//! Per-mode kinematic tracking controllers, slider reconfiguration,
//! tension distribution and the weighted mixing of their joint commands.

mod bank;
mod kappa;
mod pd;
mod recovery;
mod sliders;
mod tension;

pub use bank::{
    bank_step, dominant_mode, mix_inputs, mode_controller_step, BankConfig, BankOutput, ControllerBankState,
    LostSpoolPolicy, ModeCandidate,
};
pub use kappa::{
    cofactor_null, controlled_rows, kappa_from_null_vector, manipulability_kappa, null_vector, reduce_rows,
    singular_value_ratio,
};
pub use pd::{pd_step, Gains, TrackingState};
pub use recovery::{RecoveryEvent, RecoveryPolicy, RecoveryState};
pub use sliders::{aligned_sliders, clamp_slider_step, optimal_sliders, optimize_sliders, KappaField, SliderSearch};
pub use tension::{compute_joint_angles, tension_distribution};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("no sign-uniform null vector: tensions infeasible")]
    Infeasible,
    #[error("no slider configuration with positive conditioning")]
    NoFeasibleSliders,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Bits of the per-tick status word written to the log.
pub mod flags {
    pub const INFEASIBLE: u32 = 1;
    pub const RECOVERY_HOLD: u32 = 2;
    pub const NO_FEASIBLE_SLIDERS: u32 = 4;
    pub const FK_NO_CONVERGENCE: u32 = 8;
    pub const RECOVERY_STALL: u32 = 16;
    pub const ZERO_LIKELIHOOD: u32 = 32;
}
