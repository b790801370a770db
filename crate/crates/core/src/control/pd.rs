use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Per-DOF proportional and derivative gains for `(x, y, phi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Gains {
    pub g_p: [f64; 3],
    pub g_d: [f64; 3],
}

impl Default for Gains {
    fn default() -> Self {
        // The rotational DOF is not controlled.
        Self {
            g_p: [1.0, 1.0, 0.0],
            g_d: [0.01, 0.01, 0.0],
        }
    }
}

impl Gains {
    pub fn validate(&self) -> Result<(), String> {
        if self
            .g_p
            .iter()
            .chain(self.g_d.iter())
            .all(|g| g.is_finite() && *g >= 0.0)
        {
            Ok(())
        } else {
            Err("gains must be finite and non-negative".into())
        }
    }
}

/// Per-mode tracking memory.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackingState {
    pub prev_error: Vector3<f64>,
    /// Last commanded pose; seeds the next forward-kinematics solve.
    pub last_command: Vector3<f64>,
}

impl TrackingState {
    pub fn new(pose: Vector3<f64>) -> Self {
        Self {
            prev_error: Vector3::zeros(),
            last_command: pose,
        }
    }
}

/// Discrete PD step on the task-space pose:
/// `x_next = x_fk + g_p * e_p + g_d * (e_p - e_prev) / dt`.
pub fn pd_step(
    x_ref: &Vector3<f64>,
    x_fk: &Vector3<f64>,
    tracking: &mut TrackingState,
    gains: &Gains,
    dt: f64,
) -> Vector3<f64> {
    let e_p = x_ref - x_fk;
    let e_d = (e_p - tracking.prev_error) / dt;
    let gp = Vector3::from(gains.g_p);
    let gd = Vector3::from(gains.g_d);
    let next = x_fk + gp.component_mul(&e_p) + gd.component_mul(&e_d);
    tracking.prev_error = e_p;
    tracking.last_command = next;
    next
}
