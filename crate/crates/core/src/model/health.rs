use serde::{Deserialize, Serialize};

use super::mode::{Cable, WorkingMode};

/// A scheduled cable failure: stiffness ramps linearly from nominal to zero
/// over `[t_f, t_f + ramp]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureEvent {
    pub cable: Cable,
    pub t_f: f64,
    #[serde(default = "default_ramp")]
    pub ramp: f64,
}

fn default_ramp() -> f64 {
    0.1
}

impl FailureEvent {
    pub fn new(cable: Cable, t_f: f64, ramp: f64) -> Self {
        Self { cable, t_f, ramp }
    }

    /// Stiffness multiplier contributed by this event at time `t`.
    pub fn multiplier(&self, t: f64) -> f64 {
        if t < self.t_f {
            1.0
        } else if self.ramp <= 0.0 || t >= self.t_f + self.ramp {
            0.0
        } else {
            1.0 - (t - self.t_f) / self.ramp
        }
    }

    pub fn ramp_end(&self) -> f64 {
        self.t_f + self.ramp.max(0.0)
    }
}

/// Per-cable stiffness multipliers `s_i in [0, 1]` plus the failure schedule
/// that drives them.
#[derive(Clone, Debug, PartialEq)]
pub struct CableHealth {
    pub multipliers: [f64; 4],
    pub events: Vec<FailureEvent>,
}

impl Default for CableHealth {
    fn default() -> Self {
        Self::healthy()
    }
}

impl CableHealth {
    pub fn healthy() -> Self {
        Self {
            multipliers: [1.0; 4],
            events: Vec::new(),
        }
    }

    pub fn with_events(events: Vec<FailureEvent>) -> Self {
        Self {
            multipliers: [1.0; 4],
            events,
        }
    }

    /// Model-side health of a working mode: intact cables at 1, lost at 0.
    pub fn for_mode(mode: WorkingMode) -> Self {
        let s = mode.surviving();
        Self {
            multipliers: s.map(|alive| if alive { 1.0 } else { 0.0 }),
            events: Vec::new(),
        }
    }

    pub fn multiplier(&self, cable: usize) -> f64 {
        self.multipliers[cable]
    }

    /// Surviving set as seen by logging: a cable counts as failed once its
    /// multiplier drops below one half.
    pub fn surviving(&self) -> [bool; 4] {
        self.multipliers.map(|s| s >= 0.5)
    }

    pub fn true_mode(&self) -> Option<WorkingMode> {
        WorkingMode::from_surviving(self.surviving())
    }
}

/// Evaluates the failure schedule at time `t`.
///
/// Multipliers never increase: the result is the minimum of the previous
/// value and every event's ramp at `t`, so a failed cable stays failed.
pub fn inject_failure(health: &CableHealth, t: f64) -> CableHealth {
    let mut multipliers = health.multipliers;
    for ev in &health.events {
        let i = ev.cable.index();
        multipliers[i] = multipliers[i].min(ev.multiplier(t));
    }
    CableHealth {
        multipliers,
        events: health.events.clone(),
    }
}
