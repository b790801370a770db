use serde::{Deserialize, Serialize};

use crate::model::WorkingMode;

/// Thresholds of the rewind-and-hold recovery behaviour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryPolicy {
    /// Tracking error (m) below which a held reference is released.
    pub epsilon: f64,
    /// Hold time (s) after which recovery is declared stalled.
    pub t_stall: f64,
    /// Dominant weight needed for a reference sample to count as a safe
    /// rewind anchor.
    pub confidence: f64,
}

impl Default for RecoveryPolicy {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            t_stall: 10.0,
            confidence: 0.99,
        }
    }
}

impl RecoveryPolicy {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.epsilon > 0.0 && self.t_stall > 0.0 && (0.0..=1.0).contains(&self.confidence)) {
            return Err("recovery thresholds must be positive and confidence in [0, 1]".into());
        }
        Ok(())
    }
}

/// What happened to the reference cursor on one controller tick.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RecoveryEvent {
    pub rewound: bool,
    pub holding: bool,
    pub released: bool,
    pub stalled: bool,
}

/// Reference cursor with the rewind anchor used after a mode switch.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryState {
    index: usize,
    anchor: usize,
    dominant: WorkingMode,
    hold_since: Option<f64>,
}

impl RecoveryState {
    pub fn new(dominant: WorkingMode) -> Self {
        Self {
            index: 0,
            anchor: 0,
            dominant,
            hold_since: None,
        }
    }

    /// Reference sample currently being tracked.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn is_holding(&self) -> bool {
        self.hold_since.is_some()
    }

    /// Advances the cursor for the controller tick at time `t`.
    ///
    /// A change of the dominant mode rewinds to the last sample tracked with
    /// a confident estimate and pins it there until `error` drops below
    /// `epsilon` or the hold outlasts `t_stall`.
    pub fn update(
        &mut self,
        policy: &RecoveryPolicy,
        dominant: WorkingMode,
        dominant_weight: f64,
        error: f64,
        t: f64,
    ) -> RecoveryEvent {
        let mut ev = RecoveryEvent::default();
        if dominant != self.dominant {
            self.dominant = dominant;
            self.index = self.anchor;
            if self.hold_since.is_none() {
                self.hold_since = Some(t);
            }
            ev.rewound = true;
        } else if let Some(since) = self.hold_since {
            if error < policy.epsilon {
                self.hold_since = None;
                ev.released = true;
            } else if t - since > policy.t_stall {
                self.hold_since = None;
                ev.stalled = true;
            }
            if self.hold_since.is_none() {
                self.index += 1;
            }
        } else {
            self.index += 1;
        }
        ev.holding = self.hold_since.is_some();
        if !ev.holding && dominant_weight >= policy.confidence {
            self.anchor = self.index;
        }
        ev
    }
}
