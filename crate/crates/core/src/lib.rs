//! Simulation, failure identification and fault-tolerant control for a
//! planar reconfigurable cable-driven parallel robot with four cables on
//! moving sliders.
//!
//! * [`model`]: kinematics, elastic-cable dynamics, forward kinematics.
//! * [`estimation`]: bank of per-mode EKFs fused by an IMM estimator.
//! * [`control`]: per-mode tracking controllers with slider redundancy
//!   resolution and tension distribution, mixed by the IMM weights.
//! * [`sim`]: multirate closed-loop experiment engine.
//! * [`cli`]: scenario files, CSV logs and SVG plots.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod control;
pub mod estimation;
pub mod model;
pub mod sim;
