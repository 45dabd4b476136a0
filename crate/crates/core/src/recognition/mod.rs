//! Reference-model libraries and the three matching pipelines: BoW on tactile words,
//! ICP on contact positions, iCLAP on labeled 4D points.

mod io;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use io::{load_library, save_library, LIBRARY_MAGIC};

use crate::codebook::{
    build_histogram, extract_features, fit_codebook, histogram_intersection_distance, Codebook,
    ExtractorId, FeatureDescriptor, WordHistogram,
};
use crate::dataset::{ExplorationTrace, ObjectId, TactileFrame};
use crate::error::{Error, Result};
use crate::geometry::Point4;
use crate::registration::{register_labeled, register_spatial, LabeledCloud, RegistrationConfig, SpatialCloud};

/// Tolerance on the unit norm of a normalized distance vector.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "ICP")]
    Icp,
    #[serde(rename = "BoW")]
    Bow,
    #[serde(rename = "iCLAP")]
    Iclap,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Icp, Method::Bow, Method::Iclap];

    pub fn name(self) -> &'static str {
        match self {
            Method::Icp => "ICP",
            Method::Bow => "BoW",
            Method::Iclap => "iCLAP",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown method {s:?} (valid: ICP, BoW, iCLAP)")))
    }
}

/// Where a distance vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceSource {
    Single(Method),
    Fused,
}

/// One distance per reference model, scaled to unit Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceVector {
    pub source: DistanceSource,
    pub object_ids: Vec<ObjectId>,
    pub distances: Vec<f64>,
}

impl DistanceVector {
    /// Normalizes `raw` to unit L2 norm. An all-zero (or non-finite) vector cannot rank
    /// anything and is rejected.
    pub fn normalized(source: DistanceSource, object_ids: Vec<ObjectId>, raw: Vec<f64>) -> Result<Self> {
        if object_ids.len() != raw.len() {
            return Err(Error::dimension(object_ids.len(), raw.len()));
        }
        if raw.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if raw.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::Classification("distances must be finite and non-negative".into()));
        }
        let norm = l2_norm(&raw);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Classification(
                "all distances are zero; the vector cannot be normalized".into(),
            ));
        }
        Ok(DistanceVector {
            source,
            object_ids,
            distances: raw.into_iter().map(|d| d / norm).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.distances)
    }
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|d| d * d).sum::<f64>().sqrt()
}

/// Object at the minimal distance; exact ties go to the smallest object id.
pub fn decide(distances: &DistanceVector) -> Result<ObjectId> {
    distances
        .object_ids
        .iter()
        .zip(&distances.distances)
        .min_by(|(ia, da), (ib, db)| da.total_cmp(db).then(ia.cmp(ib)))
        .map(|(id, _)| *id)
        .ok_or(Error::EmptyCloud)
}

/// Everything needed to match one reference object under all three pipelines.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectModel {
    pub object_id: ObjectId,
    pub spatial_cloud: SpatialCloud,
    pub labeled_cloud: LabeledCloud,
    pub histogram: WordHistogram,
}

/// Observation of an object (reference or test) encoded against a codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub spatial: SpatialCloud,
    pub labeled: LabeledCloud,
    pub histogram: WordHistogram,
}

/// Encodes frames as positions, word-labeled 4D points and a word histogram.
pub fn observe(codebook: &Codebook, frames: &[TactileFrame], object_id: Option<ObjectId>) -> Result<Observation> {
    if frames.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let descriptors: Vec<FeatureDescriptor> = frames
        .iter()
        .map(|f| extract_features(f, codebook.extractor()))
        .collect();
    let spatial: Vec<_> = frames.iter().map(TactileFrame::position_point).collect();
    let labeled = spatial
        .iter()
        .zip(&descriptors)
        .map(|(p, d)| Point4::labeled(*p, codebook.assign_label(d)? as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(Observation {
        spatial: SpatialCloud::new(spatial, object_id),
        labeled: LabeledCloud::new(labeled, object_id)?,
        histogram: build_histogram(codebook, &descriptors)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelLibrary {
    models: Vec<ObjectModel>,
    codebook: Codebook,
}

impl ModelLibrary {
    /// Validates unique ids and codebook-consistent histograms and labels; orders models by id.
    pub fn new(codebook: Codebook, mut models: Vec<ObjectModel>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::InsufficientData("model library is empty".into()));
        }
        models.sort_by_key(|m| m.object_id);
        if let Some(w) = models.windows(2).find(|w| w[0].object_id == w[1].object_id) {
            return Err(Error::Config(format!("duplicate object id {}", w[0].object_id)));
        }
        for m in &models {
            if m.histogram.k() != codebook.k() {
                return Err(Error::dimension(codebook.k(), m.histogram.k()));
            }
            m.labeled_cloud.validate_labels(codebook.k())?;
            let same_positions = m.spatial_cloud.len() == m.labeled_cloud.len()
                && m.spatial_cloud
                    .points
                    .iter()
                    .zip(&m.labeled_cloud.points)
                    .all(|(s, l)| *s == l.spatial());
            if !same_positions {
                return Err(Error::Config(format!(
                    "model {}: spatial and labeled clouds disagree",
                    m.object_id
                )));
            }
        }
        Ok(ModelLibrary { models, codebook })
    }

    /// Fits a codebook on every training frame, then encodes each object's frames as a model.
    pub fn build(training: &[&ExplorationTrace], extractor: ExtractorId, k: usize, seed: u64) -> Result<Self> {
        let mut by_object: BTreeMap<ObjectId, Vec<&TactileFrame>> = BTreeMap::new();
        for t in training {
            by_object.entry(t.object_id).or_default().extend(t.frames.iter());
        }
        let descriptors: Vec<FeatureDescriptor> = by_object
            .values()
            .flatten()
            .map(|f| extract_features(f, extractor))
            .collect();
        let codebook = fit_codebook(&descriptors, k, seed, extractor)?;
        let models = by_object
            .into_iter()
            .map(|(id, frames)| {
                let frames: Vec<TactileFrame> = frames.into_iter().cloned().collect();
                let obs = observe(&codebook, &frames, Some(id))?;
                Ok(ObjectModel {
                    object_id: id,
                    spatial_cloud: obs.spatial,
                    labeled_cloud: obs.labeled,
                    histogram: obs.histogram,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ModelLibrary::new(codebook, models)
    }

    pub fn models(&self) -> &[ObjectModel] {
        &self.models
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn object_ids(&self) -> Vec<ObjectId> {
        self.models.iter().map(|m| m.object_id).collect()
    }

    pub fn observe(&self, frames: &[TactileFrame]) -> Result<Observation> {
        observe(&self.codebook, frames, None)
    }

    pub fn model(&self, id: ObjectId) -> Option<&ObjectModel> {
        self.models.iter().find(|m| m.object_id == id)
    }
}

pub fn classify_icp(test: &SpatialCloud, library: &ModelLibrary, config: &RegistrationConfig) -> Result<DistanceVector> {
    let raw = library
        .models
        .iter()
        .map(|m| Ok(register_spatial(test, &m.spatial_cloud, config)?.final_error))
        .collect::<Result<Vec<_>>>()?;
    DistanceVector::normalized(DistanceSource::Single(Method::Icp), library.object_ids(), raw)
}

pub fn classify_bow(test_histogram: &WordHistogram, library: &ModelLibrary) -> Result<DistanceVector> {
    let raw = library
        .models
        .iter()
        .map(|m| histogram_intersection_distance(test_histogram, &m.histogram))
        .collect::<Result<Vec<_>>>()?;
    DistanceVector::normalized(DistanceSource::Single(Method::Bow), library.object_ids(), raw)
}

pub fn classify_iclap(test: &LabeledCloud, library: &ModelLibrary, config: &RegistrationConfig) -> Result<DistanceVector> {
    let raw = library
        .models
        .iter()
        .map(|m| Ok(register_labeled(test, &m.labeled_cloud, config)?.final_error))
        .collect::<Result<Vec<_>>>()?;
    DistanceVector::normalized(DistanceSource::Single(Method::Iclap), library.object_ids(), raw)
}

/// Runs one pipeline on an encoded observation.
pub fn classify(method: Method, obs: &Observation, library: &ModelLibrary, config: &RegistrationConfig) -> Result<DistanceVector> {
    match method {
        Method::Icp => classify_icp(&obs.spatial, library, config),
        Method::Bow => classify_bow(&obs.histogram, library),
        Method::Iclap => classify_iclap(&obs.labeled, library, config),
    }
}
