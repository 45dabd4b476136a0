//! Synthetic haptic exploration data: object suites, simulated traces and the on-disk format.

mod io;
mod shapes;
mod simulate;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use io::{dataset_checksum, load_dataset, save_dataset, DATASET_MAGIC, MANIFEST_FILE};
pub use shapes::{generate_object_suite, Primitive, Shape, SyntheticObject, Texture};
pub use simulate::{generate_dataset, render_frame, simulate_exploration, ExplorationParams};

use crate::geometry::Point3;

/// Rows of the tactile array.
pub const SENSOR_ROWS: usize = 14;
/// Columns of the tactile array.
pub const SENSOR_COLS: usize = 6;
pub const SENSOR_CELLS: usize = SENSOR_ROWS * SENSOR_COLS;
/// Center-to-center spacing of sensing elements, millimeters.
pub const CELL_PITCH_MM: f64 = 3.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One pressure image plus the sensor position at which it was taken.
#[derive(Debug, Clone, PartialEq)]
pub struct TactileFrame {
    /// Row-major `14×6` grid, all values non-negative.
    pub pressures: [[f64; SENSOR_COLS]; SENSOR_ROWS],
    /// Sensor center in millimeters.
    pub position: [f64; 3],
    pub timestamp_index: u64,
}

impl TactileFrame {
    pub fn flat_pressures(&self) -> impl Iterator<Item = f64> + '_ {
        self.pressures.iter().flat_map(|row| row.iter().copied())
    }

    pub fn position_point(&self) -> Point3 {
        crate::geometry::Point::from_vector(self.position.into())
    }

    pub fn is_valid(&self) -> bool {
        self.flat_pressures().all(|p| p.is_finite() && p >= 0.0)
            && self.position.iter().all(|c| c.is_finite())
    }
}

/// All frames from one exploration of one object.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationTrace {
    pub object_id: ObjectId,
    pub trial_index: usize,
    pub frames: Vec<TactileFrame>,
}

impl ExplorationTrace {
    /// The first `touches` frames.
    pub fn truncated(&self, touches: usize) -> &[TactileFrame] {
        &self.frames[..touches.min(self.frames.len())]
    }
}

/// A collection of traces, typically several trials for each of several objects.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub traces: Vec<ExplorationTrace>,
}

impl Dataset {
    pub fn new(traces: Vec<ExplorationTrace>) -> Self {
        Dataset { traces }
    }

    pub fn object_ids(&self) -> Vec<ObjectId> {
        self.traces
            .iter()
            .map(|t| t.object_id)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn trial_indices(&self) -> Vec<usize> {
        self.traces
            .iter()
            .map(|t| t.trial_index)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn trace(&self, object: ObjectId, trial: usize) -> Option<&ExplorationTrace> {
        self.traces
            .iter()
            .find(|t| t.object_id == object && t.trial_index == trial)
    }

    pub fn min_frames(&self) -> usize {
        self.traces.iter().map(|t| t.frames.len()).min().unwrap_or(0)
    }

    pub fn frame_count(&self) -> usize {
        self.traces.iter().map(|t| t.frames.len()).sum()
    }
}

/// SplitMix64 finalizer, used to derive independent per-stream seeds.
pub(crate) fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
