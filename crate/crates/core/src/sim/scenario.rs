use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::trajectory::TrajectorySpec;
use crate::control::{Gains, LostSpoolPolicy, RecoveryPolicy};
use crate::estimation::default_transition;
use crate::model::{FailureEvent, Integrator, RobotParams, WorkingMode};

/// Invalid scenario value, located by its key path.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{path}: {message}")]
pub struct ValidationError {
    pub path: String,
    pub message: String,
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ValidationError {
    ValidationError {
        path: path.into(),
        message: message.into(),
    }
}

/// Diagonal noise variances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Process noise `Q` on `(x, y, phi, vx, vy, vphi)`, per second.
    pub process: [f64; 6],
    /// Measurement noise `R` on `(x, y, phi)`.
    pub measurement: [f64; 3],
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            process: [0.0, 0.0, 0.0, 0.05 * 0.05, 0.05 * 0.05, 0.05 * 0.05],
            measurement: [2e-3 * 2e-3, 2e-3 * 2e-3, 5e-3 * 5e-3],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImmConfig {
    /// Row-stochastic 7x7 mode transition matrix; built-in default if absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transition: Option<Vec<Vec<f64>>>,
    pub weight_floor: f64,
    /// Diagonal of the initial filter covariance.
    pub initial_covariance: [f64; 6],
    /// Lower bound on every diagonal entry of the filters' `Q` and `R`, so
    /// noise-free scenarios keep a well-posed innovation covariance.
    pub variance_floor: f64,
}

impl Default for ImmConfig {
    fn default() -> Self {
        Self {
            transition: None,
            weight_floor: 1e-6,
            initial_covariance: [1e-4; 6],
            variance_floor: 1e-10,
        }
    }
}

impl ImmConfig {
    pub fn transition_matrix(&self) -> DMatrix<f64> {
        match &self.transition {
            Some(rows) => DMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j]),
            None => default_transition(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Simulated time (s).
    pub duration: f64,
    pub plant_hz: u32,
    pub control_hz: u32,
    pub integrator: Integrator,
    pub recovery: RecoveryPolicy,
    pub lost_spools: LostSpoolPolicy,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            duration: 20.0,
            plant_hz: 100,
            control_hz: 10,
            integrator: Integrator::default(),
            recovery: RecoveryPolicy::default(),
            lost_spools: LostSpoolPolicy::default(),
        }
    }
}

impl RunConfig {
    pub fn steps(&self) -> usize {
        (self.duration * self.plant_hz as f64).round() as usize
    }

    pub fn ticks_per_control(&self) -> usize {
        (self.plant_hz / self.control_hz) as usize
    }
}

/// Complete description of one closed-loop experiment.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub robot: RobotParams,
    pub trajectory: TrajectorySpec,
    pub failures: Vec<FailureEvent>,
    pub noise: NoiseConfig,
    pub imm: ImmConfig,
    pub gains: Gains,
    pub run: RunConfig,
}

impl Scenario {
    /// Cable A at 5 s and cable C at 10 s, both with 0.1 s ramps.
    pub fn double_failure() -> Self {
        use crate::model::Cable;
        Self {
            failures: vec![
                FailureEvent::new(Cable::A, 5.0, 0.1),
                FailureEvent::new(Cable::C, 10.0, 0.1),
            ],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        self.robot.validate().map_err(|e| invalid("robot", e.to_string()))?;

        self.trajectory.validate().map_err(|e| invalid("trajectory", e))?;
        let (w, h) = (self.robot.frame_width, self.robot.frame_height);
        if self
            .trajectory
            .outline(2000)
            .iter()
            .any(|p| !(0.0..=w).contains(&p.x) || !(0.0..=h).contains(&p.y))
        {
            return Err(invalid("trajectory", "path leaves the frame"));
        }

        let mut last = f64::NEG_INFINITY;
        for (i, ev) in self.failures.iter().enumerate() {
            if !(ev.t_f.is_finite() && ev.t_f >= 0.0) {
                return Err(invalid(format!("failures[{i}].t_f"), "must be finite and non-negative"));
            }
            if !(ev.ramp.is_finite() && ev.ramp >= 0.0) {
                return Err(invalid(
                    format!("failures[{i}].ramp"),
                    "must be finite and non-negative",
                ));
            }
            if ev.t_f < last {
                return Err(invalid(format!("failures[{i}].t_f"), "events must be in time order"));
            }
            last = ev.t_f;
        }

        for (i, v) in self.noise.process.iter().enumerate() {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(invalid(
                    format!("noise.process[{i}]"),
                    "variance must be finite and non-negative",
                ));
            }
        }
        for (i, v) in self.noise.measurement.iter().enumerate() {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(invalid(
                    format!("noise.measurement[{i}]"),
                    "variance must be finite and non-negative",
                ));
            }
        }

        let m = WorkingMode::COUNT;
        if let Some(rows) = &self.imm.transition {
            if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                return Err(invalid("imm.transition", format!("must be {m}x{m}")));
            }
            for (i, r) in rows.iter().enumerate() {
                if r.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(invalid(format!("imm.transition[{i}]"), "entries must be non-negative"));
                }
                if (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(invalid(format!("imm.transition[{i}]"), "row must sum to 1"));
                }
            }
        }
        let f = self.imm.weight_floor;
        if !(f >= 0.0 && f * (m as f64) < 1.0) {
            return Err(invalid("imm.weight_floor", format!("must lie in [0, 1/{m})")));
        }
        if !(self.imm.variance_floor.is_finite() && self.imm.variance_floor > 0.0) {
            return Err(invalid("imm.variance_floor", "must be positive"));
        }
        for (i, v) in self.imm.initial_covariance.iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                return Err(invalid(format!("imm.initial_covariance[{i}]"), "must be positive"));
            }
        }

        self.gains.validate().map_err(|e| invalid("gains", e))?;

        let r = &self.run;
        if !(r.duration.is_finite() && r.duration > 0.0) {
            return Err(invalid("run.duration", "must be positive"));
        }
        if r.plant_hz == 0 {
            return Err(invalid("run.plant_hz", "must be positive"));
        }
        if r.control_hz == 0 || !r.plant_hz.is_multiple_of(r.control_hz) {
            return Err(invalid("run.control_hz", "must divide plant_hz"));
        }
        r.recovery.validate().map_err(|e| invalid("run.recovery", e))?;
        Ok(())
    }
}
