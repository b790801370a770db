use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Cable label. Index order A, B, C, D is used for every per-cable array.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cable {
    A,
    B,
    C,
    D,
}

impl Cable {
    pub const ALL: [Cable; 4] = [Cable::A, Cable::B, Cable::C, Cable::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Cable> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for Cable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MotionModel {
    /// Over-constrained, 4 cables.
    FourCable,
    /// Fully constrained, 3 cables.
    ThreeCable,
    /// Under-constrained, 2 cables on one rail column.
    TwoCable,
}

/// Which cables are intact, for each of the 7 working modes (A, B, C, D).
///
/// Mode 1 is healthy, modes 2-5 lose exactly one cable. The two-cable
/// modes keep a vertical cable pair on opposite edges so the platform stays
/// navigable: mode 6 keeps the right column (A and C lost), mode 7 keeps the
/// left column (B and D lost).
const SURVIVORS: [[bool; 4]; 7] = [
    [true, true, true, true],
    [false, true, true, true],
    [true, false, true, true],
    [true, true, false, true],
    [true, true, true, false],
    [false, true, false, true],
    [true, false, true, false],
];

/// A discrete health hypothesis, identified by its 1-based mode id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct WorkingMode(u8);

impl WorkingMode {
    pub const COUNT: usize = 7;
    pub const HEALTHY: WorkingMode = WorkingMode(1);

    pub fn new(id: u8) -> Result<Self, ModelError> {
        if (1..=7).contains(&id) {
            Ok(Self(id))
        } else {
            Err(ModelError::InvalidMode(id))
        }
    }

    pub fn all() -> impl Iterator<Item = WorkingMode> {
        (1..=7u8).map(WorkingMode)
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < Self::COUNT, "mode index out of range");
        Self(index as u8 + 1)
    }

    pub fn id(self) -> u8 {
        self.0
    }

    /// Zero-based position in mode-indexed arrays.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn surviving(self) -> [bool; 4] {
        SURVIVORS[self.index()]
    }

    pub fn is_surviving(self, cable: usize) -> bool {
        self.surviving()[cable]
    }

    pub fn surviving_cables(self) -> Vec<usize> {
        (0..4).filter(|&i| self.is_surviving(i)).collect()
    }

    pub fn surviving_count(self) -> usize {
        self.surviving().iter().filter(|&&s| s).count()
    }

    pub fn motion_model(self) -> MotionModel {
        match self.surviving_count() {
            4 => MotionModel::FourCable,
            3 => MotionModel::ThreeCable,
            _ => MotionModel::TwoCable,
        }
    }

    /// Maps a surviving-cable set back to its mode, if the set is one of the 7.
    pub fn from_surviving(surviving: [bool; 4]) -> Option<Self> {
        SURVIVORS
            .iter()
            .position(|s| *s == surviving)
            .map(WorkingMode::from_index)
    }

    /// True when `next` differs from `self` by losing exactly one more cable.
    pub fn can_degrade_to(self, next: WorkingMode) -> bool {
        let (a, b) = (self.surviving(), next.surviving());
        let lost: usize = (0..4).filter(|&i| a[i] && !b[i]).count();
        let regained = (0..4).any(|i| !a[i] && b[i]);
        lost == 1 && !regained
    }
}

impl TryFrom<u8> for WorkingMode {
    type Error = ModelError;

    fn try_from(id: u8) -> Result<Self, Self::Error> {
        Self::new(id)
    }
}

impl From<WorkingMode> for u8 {
    fn from(m: WorkingMode) -> u8 {
        m.0
    }
}

impl fmt::Display for WorkingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mode {}", self.0)
    }
}
