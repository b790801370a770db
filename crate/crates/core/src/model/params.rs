use nalgebra::{Matrix3, Vector2, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use super::ModelError;

/// A linear rail carrying one slider. The anchor point of the cable is
/// `origin + l_s * direction`, with `l_s` restricted to `interval`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rail {
    pub origin: [f64; 2],
    pub direction: [f64; 2],
    pub interval: [f64; 2],
}

impl Rail {
    pub fn anchor(&self, slider: f64) -> Vector2<f64> {
        let o = Vector2::from(self.origin);
        let d = Vector2::from(self.direction);
        o + d * slider
    }

    pub fn clamp(&self, slider: f64) -> f64 {
        slider.clamp(self.interval[0], self.interval[1])
    }

    pub fn contains(&self, slider: f64) -> bool {
        slider >= self.interval[0] && slider <= self.interval[1]
    }

    pub fn length(&self) -> f64 {
        self.interval[1] - self.interval[0]
    }
}

/// Geometry and physical constants of the planar 4-PRPR reconfigurable robot.
///
/// Cable `i` runs from the slider anchor on `rails[i]` to the body-frame point
/// `attachments[i]` on the platform. Stiffness is specified per unit free
/// length, so the instantaneous spring rate of cable `i` is
/// `specific_stiffness[i] / l_p,i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotParams {
    pub frame_width: f64,
    pub frame_height: f64,
    pub rails: [Rail; 4],
    pub attachments: [[f64; 2]; 4],
    pub mass: f64,
    pub inertia: f64,
    pub damping: [f64; 3],
    pub specific_stiffness: [f64; 4],
    pub tau_min: f64,
    pub v_slider_max: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        let (w, h) = (2.0, 1.5);
        let half = 0.05;
        let mass = 1.0;
        let rail = |y: f64, lo: f64, hi: f64| Rail {
            origin: [0.0, y],
            direction: [1.0, 0.0],
            interval: [lo, hi],
        };
        Self {
            frame_width: w,
            frame_height: h,
            rails: [
                rail(h, 0.0, w / 2.0),
                rail(h, w / 2.0, w),
                rail(0.0, 0.0, w / 2.0),
                rail(0.0, w / 2.0, w),
            ],
            attachments: [[-half, half], [half, half], [-half, -half], [half, -half]],
            mass,
            inertia: mass * (0.1 * 0.1 + 0.1 * 0.1) / 12.0,
            damping: [10.0, 10.0, 0.02],
            specific_stiffness: [100.0; 4],
            tau_min: 6.0,
            v_slider_max: 0.5,
        }
    }
}

impl RobotParams {
    pub fn mass_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::new(self.mass, self.mass, self.inertia))
    }

    pub fn damping_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::from(self.damping))
    }

    pub fn stiffness(&self) -> Vector4<f64> {
        Vector4::from(self.specific_stiffness)
    }

    pub fn attachment(&self, cable: usize) -> Vector2<f64> {
        Vector2::from(self.attachments[cable])
    }

    pub fn clamp_sliders(&self, sliders: &Vector4<f64>) -> Vector4<f64> {
        Vector4::from_fn(|i, _| self.rails[i].clamp(sliders[i]))
    }

    /// Slider positions at the middle of every rail interval.
    pub fn mid_sliders(&self) -> Vector4<f64> {
        Vector4::from_fn(|i, _| 0.5 * (self.rails[i].interval[0] + self.rails[i].interval[1]))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ModelError::InvalidParams(format!("{name} must be positive, got {v}")))
            }
        };
        positive("frame_width", self.frame_width)?;
        positive("frame_height", self.frame_height)?;
        positive("mass", self.mass)?;
        positive("inertia", self.inertia)?;
        for (i, d) in self.damping.iter().enumerate() {
            positive(&format!("damping[{i}]"), *d)?;
        }
        for (i, k) in self.specific_stiffness.iter().enumerate() {
            positive(&format!("specific_stiffness[{i}]"), *k)?;
        }
        positive("tau_min", self.tau_min)?;
        positive("v_slider_max", self.v_slider_max)?;
        for (i, rail) in self.rails.iter().enumerate() {
            let [lo, hi] = rail.interval;
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(ModelError::InvalidParams(format!("rails[{i}].interval is empty")));
            }
            let n = Vector2::from(rail.direction).norm();
            if (n - 1.0).abs() > 1e-9 {
                return Err(ModelError::InvalidParams(format!(
                    "rails[{i}].direction must be a unit vector"
                )));
            }
        }
        // Sliders sharing a rail line must not be able to pass each other.
        for i in 0..4 {
            for j in (i + 1)..4 {
                let (a, b) = (&self.rails[i], &self.rails[j]);
                if a.origin == b.origin && a.direction == b.direction {
                    let disjoint = a.interval[1] <= b.interval[0] || b.interval[1] <= a.interval[0];
                    if !disjoint {
                        return Err(ModelError::InvalidParams(format!(
                            "rails[{i}] and rails[{j}] overlap on the same edge"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
