//! Geometry, elastic-cable dynamics, measurement model and failure
//! injection for the planar 4-cable reconfigurable robot.

mod dynamics;
mod fk;
mod health;
mod integrator;
mod kinematics;
mod mode;
mod params;
mod state;

pub use dynamics::{
    cable_energy, cable_tension, cable_tensions, cable_wrench, dynamics_rhs, elastic_energy, kinetic_energy,
    measurement, mechanical_energy, tensions_from_geometry,
};
pub use fk::{forward_kinematics, forward_kinematics_with, FkSettings, FkSolution};
pub use health::{inject_failure, CableHealth, FailureEvent};
pub use integrator::{drift_jacobian, Integrator};
pub use kinematics::{
    cable_geometry, cross2, inverse_kinematics, pulling_map, rotation, CableGeometry, MIN_CABLE_LENGTH,
};
pub use mode::{Cable, MotionModel, WorkingMode};
pub use params::{Rail, RobotParams};
pub use state::{wrap_angle, JointInput, PlatformState};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("cable {cable} is degenerate (free length {length:e} m)")]
    DegenerateCable { cable: usize, length: f64 },
    #[error("forward kinematics did not converge after {iterations} iterations (|grad| = {grad_norm:e})")]
    NoConvergence { iterations: usize, grad_norm: f64 },
    #[error("invalid working mode id {0}")]
    InvalidMode(u8),
    #[error("invalid robot parameters: {0}")]
    InvalidParams(String),
}
