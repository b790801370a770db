//! Multirate closed-loop engine: stochastic plant and estimator at the plant
//! rate, controller bank at the control rate, scripted cable failures.

mod plant;
mod run;
mod scenario;
mod trajectory;

pub use crate::model::Integrator;
pub use plant::{
    diag3, diag6, measure, noise_stream, plant_step, plant_step_with, GaussianNoise, GENERATOR_ID, MEASUREMENT_STREAM,
    PROCESS_STREAM,
};
pub use run::{env_threads, estimator_bank, initial_input, run_scenario, run_scenario_with_threads, LogRecord};
pub use scenario::{ImmConfig, NoiseConfig, RunConfig, Scenario, ValidationError};
pub use trajectory::{Trajectory, TrajectorySpec};

use thiserror::Error;

use crate::control::ControlError;
use crate::estimation::EstimationError;
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("state magnitude exceeded 1e6")]
    NumericalBlowup,
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Control(#[from] ControlError),
}
