use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{TactileFrame, SENSOR_CELLS, SENSOR_COLS, SENSOR_ROWS};
use crate::error::{Error, Result};

/// Selects how a tactile frame is turned into a descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtractorId {
    /// Row-major 84-vector scaled so the largest pressure is 1.
    RawPatch,
    /// Mass, centroid and central moments of the pressure distribution.
    Moments,
}

pub const MOMENT_FEATURES: usize = 7;

impl ExtractorId {
    pub const ALL: [ExtractorId; 2] = [ExtractorId::RawPatch, ExtractorId::Moments];

    pub fn dimension(self) -> usize {
        match self {
            ExtractorId::RawPatch => SENSOR_CELLS,
            ExtractorId::Moments => MOMENT_FEATURES,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExtractorId::RawPatch => "raw-patch",
            ExtractorId::Moments => "moments",
        }
    }
}

impl fmt::Display for ExtractorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExtractorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExtractorId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown feature extractor {s:?} (valid: raw-patch, moments)"
                ))
            })
    }
}

/// Fixed-length real feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDescriptor(pub Vec<f64>);

impl FeatureDescriptor {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("non-finite descriptor value".into()));
        }
        Ok(FeatureDescriptor(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

pub fn extract_features(frame: &TactileFrame, extractor: ExtractorId) -> FeatureDescriptor {
    match extractor {
        ExtractorId::RawPatch => raw_patch(frame),
        ExtractorId::Moments => moments(frame),
    }
}

/// Parses the extractor name, then extracts.
pub fn extract_features_named(frame: &TactileFrame, extractor: &str) -> Result<FeatureDescriptor> {
    Ok(extract_features(frame, extractor.parse()?))
}

fn raw_patch(frame: &TactileFrame) -> FeatureDescriptor {
    let max = frame.flat_pressures().fold(0.0, f64::max);
    let values = frame
        .flat_pressures()
        .map(|p| if max > 0.0 { p / max } else { 0.0 })
        .collect();
    FeatureDescriptor(values)
}

/// `[m00, r̄, c̄, μ20/m00, μ11/m00, μ02/m00, μ22/m00]` in cell-index units, `r` along the
/// 14-element axis. A frame with no pressure reports the grid center and zero moments.
fn moments(frame: &TactileFrame) -> FeatureDescriptor {
    let center_r = (SENSOR_ROWS as f64 - 1.0) / 2.0;
    let center_c = (SENSOR_COLS as f64 - 1.0) / 2.0;
    let cells = || {
        frame.pressures.iter().enumerate().flat_map(|(r, row)| {
            row.iter().enumerate().map(move |(c, &p)| (r as f64, c as f64, p))
        })
    };
    let m00: f64 = cells().map(|(_, _, p)| p).sum();
    if m00 <= 0.0 {
        return FeatureDescriptor(vec![0.0, center_r, center_c, 0.0, 0.0, 0.0, 0.0]);
    }
    let rbar = cells().map(|(r, _, p)| r * p).sum::<f64>() / m00;
    let cbar = cells().map(|(_, c, p)| c * p).sum::<f64>() / m00;
    let central = |a: i32, b: i32| {
        cells()
            .map(|(r, c, p)| (r - rbar).powi(a) * (c - cbar).powi(b) * p)
            .sum::<f64>()
            / m00
    };
    FeatureDescriptor(vec![
        m00,
        rbar,
        cbar,
        central(2, 0),
        central(1, 1),
        central(0, 2),
        central(2, 2),
    ])
}
