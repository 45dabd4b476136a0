use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Codebook, ExtractorId, FeatureDescriptor};
use crate::error::{Error, Result};

pub const MAX_LLOYD_ITERATIONS: usize = 300;

/// Codebook plus diagnostics from the Lloyd iterations that produced it.
#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub codebook: Codebook,
    /// Within-cluster sum of squares after each assignment step.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest center; ties go to the smallest index.
pub(crate) fn nearest_center(centers: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.iter().enumerate() {
        let d = squared_distance(c, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn plus_plus_init(data: &[&[f64]], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut centers = vec![data[rng.random_range(0..n)].to_vec()];
    let mut nearest: Vec<f64> = data.iter().map(|x| squared_distance(x, &centers[0])).collect();
    while centers.len() < k {
        let pick = match WeightedIndex::new(&nearest) {
            Ok(w) => w.sample(rng),
            // every point coincides with a chosen center
            Err(_) => rng.random_range(0..n),
        };
        let c = data[pick].to_vec();
        for (d, x) in nearest.iter_mut().zip(data) {
            *d = d.min(squared_distance(x, &c));
        }
        centers.push(c);
    }
    centers
}

/// Lloyd's algorithm from a k-means++ start.
///
/// Stops when an assignment pass changes nothing or after [`MAX_LLOYD_ITERATIONS`] passes.
/// Clusters left empty by an update are moved onto the descriptor farthest from its
/// current center, so exactly `k` centers always remain.
pub fn fit_codebook_detailed(
    descriptors: &[FeatureDescriptor],
    k: usize,
    seed: u64,
    extractor: ExtractorId,
) -> Result<KMeansFit> {
    if k == 0 {
        return Err(Error::Config("dictionary size k must be ≥ 1".into()));
    }
    if descriptors.len() < k {
        return Err(Error::InsufficientData(format!(
            "{} descriptors cannot support k = {k}",
            descriptors.len()
        )));
    }
    let dim = extractor.dimension();
    if let Some(d) = descriptors.iter().find(|d| d.len() != dim) {
        return Err(Error::dimension(dim, d.len()));
    }

    let data: Vec<&[f64]> = descriptors.iter().map(|d| d.values()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = plus_plus_init(&data, k, &mut rng);

    let mut assignment = vec![usize::MAX; data.len()];
    let mut distances = vec![0.0; data.len()];
    let mut inertia_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_LLOYD_ITERATIONS {
        iterations += 1;
        let mut changed = false;
        let mut inertia = 0.0;
        for (i, x) in data.iter().enumerate() {
            let (c, d) = nearest_center(&centers, x);
            changed |= assignment[i] != c;
            assignment[i] = c;
            distances[i] = d;
            inertia += d;
        }
        inertia_history.push(inertia);
        if !changed {
            converged = true;
            break;
        }

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (x, &c) in data.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(x.iter()) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let n = counts[c] as f64;
                centers[c] = sums[c].iter().map(|s| s / n).collect();
            } else {
                let far = (0..data.len())
                    .max_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(b.cmp(&a)))
                    .expect("non-empty data");
                centers[c] = data[far].to_vec();
                distances[far] = 0.0;
            }
        }
    }

    Ok(KMeansFit {
        codebook: Codebook::new(extractor, centers.into_iter().map(FeatureDescriptor).collect())?,
        inertia_history,
        iterations,
        converged,
    })
}

/// Deterministic in `(descriptors, k, seed)`.
pub fn fit_codebook(
    descriptors: &[FeatureDescriptor],
    k: usize,
    seed: u64,
    extractor: ExtractorId,
) -> Result<Codebook> {
    Ok(fit_codebook_detailed(descriptors, k, seed, extractor)?.codebook)
}
