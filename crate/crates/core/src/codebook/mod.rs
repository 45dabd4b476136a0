//! Tactile feature extraction, k-means dictionaries, word histograms and the
//! histogram-intersection distance.

mod features;
mod histogram;
mod kmeans;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub use features::{
    extract_features, extract_features_named, ExtractorId, FeatureDescriptor, MOMENT_FEATURES,
};
pub use histogram::{build_histogram, histogram_intersection_distance, WordHistogram};
pub use kmeans::{fit_codebook, fit_codebook_detailed, KMeansFit, MAX_LLOYD_ITERATIONS};

use crate::error::{Error, Result};
use crate::util::{atomic_write, parse_field};

/// Dictionary size used throughout the experiments.
pub const DEFAULT_DICTIONARY_SIZE: usize = 50;

pub const CODEBOOK_MAGIC: &str = "ICLAP-CB-1";

/// `k` cluster centers; a descriptor's word is the 1-based index of its nearest center.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    extractor: ExtractorId,
    centers: Vec<Vec<f64>>,
}

impl Codebook {
    pub fn new(extractor: ExtractorId, centers: Vec<FeatureDescriptor>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Config("codebook needs at least one center".into()));
        }
        let dim = extractor.dimension();
        for c in &centers {
            if c.len() != dim {
                return Err(Error::dimension(dim, c.len()));
            }
            if c.values().iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalFailure("non-finite codebook center".into()));
            }
        }
        Ok(Codebook {
            extractor,
            centers: centers.into_iter().map(|c| c.0).collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn dimension(&self) -> usize {
        self.extractor.dimension()
    }

    pub fn extractor(&self) -> ExtractorId {
        self.extractor
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    /// 1-based label of the nearest center in Euclidean distance; ties go to the smaller label.
    pub fn assign_label(&self, descriptor: &FeatureDescriptor) -> Result<usize> {
        if descriptor.len() != self.dimension() {
            return Err(Error::dimension(self.dimension(), descriptor.len()));
        }
        Ok(kmeans::nearest_center(&self.centers, descriptor.values()).0 + 1)
    }

    /// Like [`Codebook::assign_label`], but also checks the descriptor came from the same extractor.
    pub fn assign_label_from(
        &self,
        extractor: ExtractorId,
        descriptor: &FeatureDescriptor,
    ) -> Result<usize> {
        if extractor != self.extractor {
            return Err(Error::Config(format!(
                "codebook was fit with {} features, got {extractor}",
                self.extractor
            )));
        }
        self.assign_label(descriptor)
    }

    /// Text form: magic line, `extractor=`, `k=`, `dim=`, then one comma-separated center per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{CODEBOOK_MAGIC}\nextractor={}\nk={}\ndim={}\n",
            self.extractor,
            self.k(),
            self.dimension()
        );
        for c in &self.centers {
            let row: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::format(origin, Some(line), msg);
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(CODEBOOK_MAGIC) {
            return Err(err(1, format!("missing {CODEBOOK_MAGIC} header")));
        }
        let mut field = |line: usize, key: &str| -> Result<String> {
            let l = lines.next().ok_or_else(|| err(line, format!("missing {key}=")))?;
            l.trim()
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .map(str::to_owned)
                .ok_or_else(|| err(line, format!("expected {key}=..., found {l:?}")))
        };
        let extractor: ExtractorId = field(2, "extractor")?
            .parse()
            .map_err(|e: Error| err(2, e.to_string()))?;
        let k: usize = parse_field(&field(3, "k")?).map_err(|m| err(3, m))?;
        let dim: usize = parse_field(&field(4, "dim")?).map_err(|m| err(4, m))?;
        if dim != extractor.dimension() {
            return Err(err(4, format!("{extractor} descriptors have dimension {}", extractor.dimension())));
        }
        let mut centers = Vec::with_capacity(k);
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let line_no = i + 5;
            let values = line
                .split(',')
                .map(|v| parse_field::<f64>(v))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|m| err(line_no, m))?;
            if values.len() != dim {
                return Err(err(line_no, format!("expected {dim} values, found {}", values.len())));
            }
            centers.push(FeatureDescriptor::new(values).map_err(|e| err(line_no, e.to_string()))?);
        }
        if centers.len() != k {
            return Err(Error::format(
                origin,
                None,
                format!("header declares k={k}, found {} centers", centers.len()),
            ));
        }
        Codebook::new(extractor, centers)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        atomic_write(path, self.to_text().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Codebook::from_text(&text, path)
    }
}
