use std::f64::consts::PI;

use nalgebra::{Vector3, Vector4, Vector6};

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a % (2.0 * PI);
    if w <= -PI {
        w += 2.0 * PI;
    } else if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// End-effector pose `(x, y, phi)` and its rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlatformState {
    pub pose: Vector3<f64>,
    pub velocity: Vector3<f64>,
}

impl PlatformState {
    pub fn new(pose: Vector3<f64>, velocity: Vector3<f64>) -> Self {
        Self { pose, velocity }
    }

    pub fn at_rest(pose: Vector3<f64>) -> Self {
        Self::new(pose, Vector3::zeros())
    }

    pub fn from_vector(x: &Vector6<f64>) -> Self {
        Self {
            pose: x.fixed_rows::<3>(0).into_owned(),
            velocity: x.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        let mut x = Vector6::zeros();
        x.fixed_rows_mut::<3>(0).copy_from(&self.pose);
        x.fixed_rows_mut::<3>(3).copy_from(&self.velocity);
        x
    }

    pub fn wrapped(mut self) -> Self {
        self.pose.z = wrap_angle(self.pose.z);
        self
    }

    pub fn is_finite(&self) -> bool {
        self.pose.iter().chain(self.velocity.iter()).all(|v| v.is_finite())
    }
}

/// Joint input `q = [l_s, theta]`: slider positions along each rail and the
/// commanded spool lengths (winch radius folded in), both in metres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointInput {
    pub sliders: Vector4<f64>,
    pub spools: Vector4<f64>,
}

impl JointInput {
    pub fn new(sliders: Vector4<f64>, spools: Vector4<f64>) -> Self {
        Self { sliders, spools }
    }

    pub fn zeros() -> Self {
        Self::new(Vector4::zeros(), Vector4::zeros())
    }

    pub fn to_array(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        out[..4].copy_from_slice(self.sliders.as_slice());
        out[4..].copy_from_slice(self.spools.as_slice());
        out
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        Self::new(
            Vector4::new(a[0], a[1], a[2], a[3]),
            Vector4::new(a[4], a[5], a[6], a[7]),
        )
    }
}
