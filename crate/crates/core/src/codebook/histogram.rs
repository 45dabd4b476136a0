use super::{Codebook, FeatureDescriptor};
use crate::error::{Error, Result};

/// Word-occurrence histogram: raw counts and the matching frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct WordHistogram {
    raw_counts: Vec<u64>,
    bins: Vec<f64>,
}

impl WordHistogram {
    pub fn from_counts(raw_counts: Vec<u64>) -> Self {
        let total: u64 = raw_counts.iter().sum();
        let bins = raw_counts
            .iter()
            .map(|&c| if total > 0 { c as f64 / total as f64 } else { 0.0 })
            .collect();
        WordHistogram { raw_counts, bins }
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn raw_counts(&self) -> &[u64] {
        &self.raw_counts
    }

    pub fn k(&self) -> usize {
        self.bins.len()
    }

    pub fn total(&self) -> u64 {
        self.raw_counts.iter().sum()
    }
}

pub fn build_histogram(codebook: &Codebook, descriptors: &[FeatureDescriptor]) -> Result<WordHistogram> {
    if descriptors.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut counts = vec![0u64; codebook.k()];
    for d in descriptors {
        counts[codebook.assign_label(d)? - 1] += 1;
    }
    Ok(WordHistogram::from_counts(counts))
}

/// `1 − Σ min(a_i, b_i)` over normalized bins, clamped to `[0, 1]`.
pub fn histogram_intersection_distance(a: &WordHistogram, b: &WordHistogram) -> Result<f64> {
    if a.k() != b.k() {
        return Err(Error::dimension(a.k(), b.k()));
    }
    let overlap: f64 = a.bins.iter().zip(&b.bins).map(|(x, y)| x.min(*y)).sum();
    Ok((1.0 - overlap).clamp(0.0, 1.0))
}
