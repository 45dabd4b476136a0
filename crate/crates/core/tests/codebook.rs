mod common;

use common::gaussian;
use iclap::codebook::{
    build_histogram, fit_codebook, fit_codebook_detailed, histogram_intersection_distance, Codebook, ExtractorId,
    FeatureDescriptor, WordHistogram, MOMENT_FEATURES,
};
use iclap::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DIM: usize = MOMENT_FEATURES;

fn desc(v: Vec<f64>) -> FeatureDescriptor {
    FeatureDescriptor::new(v).unwrap()
}

fn blob(rng: &mut ChaCha8Rng, mean: &[f64; DIM], sigma: f64, n: usize) -> Vec<FeatureDescriptor> {
    (0..n)
        .map(|_| desc(mean.iter().map(|m| m + sigma * gaussian(rng)).collect()))
        .collect()
}

fn mean_of(ds: &[FeatureDescriptor]) -> Vec<f64> {
    let mut m = vec![0.0; DIM];
    for d in ds {
        for (a, b) in m.iter_mut().zip(d.values()) {
            *a += b;
        }
    }
    m.iter().map(|v| v / ds.len() as f64).collect()
}

fn random_descriptors(rng: &mut ChaCha8Rng, n: usize) -> Vec<FeatureDescriptor> {
    (0..n)
        .map(|_| desc((0..DIM).map(|_| rng.random_range(-5.0..5.0)).collect()))
        .collect()
}

#[test]
fn two_blobs_are_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (n, sigma) = (200, 1.0);
    let ma = [0.0; DIM];
    let mb = [20.0; DIM];
    let a = blob(&mut rng, &ma, sigma, n);
    let b = blob(&mut rng, &mb, sigma, n);
    let all: Vec<_> = a.iter().chain(&b).cloned().collect();
    let cb = fit_codebook(&all, 2, 9, ExtractorId::Moments).unwrap();
    let (ca, cb_) = if cb.centers()[0][0] < 10.0 {
        (&cb.centers()[0], &cb.centers()[1])
    } else {
        (&cb.centers()[1], &cb.centers()[0])
    };
    let bound = 3.0 * sigma / (n as f64).sqrt();
    for (center, truth, sample) in [(ca, &ma, mean_of(&a)), (cb_, &mb, mean_of(&b))] {
        for i in 0..DIM {
            assert!((center[i] - truth[i]).abs() < bound, "{} vs {}", center[i], truth[i]);
            assert!((center[i] - sample[i]).abs() < 1e-9);
        }
    }
}

#[test]
fn single_cluster_is_the_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ds = random_descriptors(&mut rng, 57);
    let cb = fit_codebook(&ds, 1, 0, ExtractorId::Moments).unwrap();
    for (c, m) in cb.centers()[0].iter().zip(mean_of(&ds)) {
        assert!((c - m).abs() < 1e-12);
    }
}

#[test]
fn fit_is_deterministic_per_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ds = random_descriptors(&mut rng, 400);
    let a = fit_codebook(&ds, 12, 42, ExtractorId::Moments).unwrap();
    let b = fit_codebook(&ds, 12, 42, ExtractorId::Moments).unwrap();
    assert_eq!(a, b);
    let to_bits = |c: &Codebook| -> Vec<u64> { c.centers().iter().flatten().map(|v| v.to_bits()).collect() };
    assert_eq!(to_bits(&a), to_bits(&b));
    let c = fit_codebook(&ds, 12, 43, ExtractorId::Moments).unwrap();
    assert_ne!(a, c);
}

#[test]
fn inertia_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for seed in 0..10 {
        let ds = random_descriptors(&mut rng, 300);
        let fit = fit_codebook_detailed(&ds, 20, seed, ExtractorId::Moments).unwrap();
        assert!(!fit.inertia_history.is_empty());
        for w in fit.inertia_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
        }
        assert_eq!(fit.codebook.k(), 20);
    }
}

#[test]
fn duplicates_still_give_k_centers() {
    let ds: Vec<_> = (0..30).map(|i| desc(vec![(i % 3) as f64; DIM])).collect();
    let cb = fit_codebook(&ds, 5, 1, ExtractorId::Moments).unwrap();
    assert_eq!(cb.k(), 5);
    assert!(cb.centers().iter().flatten().all(|v| v.is_finite()));
}

#[test]
fn fit_preconditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ds = random_descriptors(&mut rng, 4);
    assert!(matches!(fit_codebook(&ds, 5, 0, ExtractorId::Moments), Err(Error::InsufficientData(_))));
    assert!(matches!(fit_codebook(&ds, 0, 0, ExtractorId::Moments), Err(Error::Config(_))));
    assert!(matches!(fit_codebook(&ds, 2, 0, ExtractorId::RawPatch), Err(Error::Dimension { .. })));
}

#[test]
fn assignment_matches_linear_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let centers = random_descriptors(&mut rng, 50);
    let cb = Codebook::new(ExtractorId::Moments, centers.clone()).unwrap();
    for d in random_descriptors(&mut rng, 500) {
        let mut best = (0, f64::INFINITY);
        for (i, c) in centers.iter().enumerate() {
            let dist: f64 = c.values().iter().zip(d.values()).map(|(a, b)| (a - b).powi(2)).sum();
            if dist < best.1 {
                best = (i + 1, dist);
            }
        }
        assert_eq!(cb.assign_label(&d).unwrap(), best.0);
    }
}

#[test]
fn histogram_bins_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cb = Codebook::new(ExtractorId::Moments, random_descriptors(&mut rng, 30)).unwrap();
    let ds = random_descriptors(&mut rng, 5000);
    let h = build_histogram(&cb, &ds).unwrap();
    assert!((h.bins().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let mut direct = vec![0u64; 30];
    for d in &ds {
        direct[cb.assign_label(d).unwrap() - 1] += 1;
    }
    assert_eq!(h.raw_counts(), direct.as_slice());
    assert_eq!(h.total(), 5000);
}

#[test]
fn intersection_distance_examples() {
    let h = |v: &[u64]| WordHistogram::from_counts(v.to_vec());
    assert_eq!(histogram_intersection_distance(&h(&[2, 2, 0]), &h(&[1, 1, 2])).unwrap(), 0.5);
    assert_eq!(histogram_intersection_distance(&h(&[3, 1, 0]), &h(&[6, 2, 0])).unwrap(), 0.0);
    assert_eq!(histogram_intersection_distance(&h(&[1, 0, 0]), &h(&[0, 4, 1])).unwrap(), 1.0);
    assert!(matches!(
        histogram_intersection_distance(&h(&[1, 0]), &h(&[1, 0, 0])),
        Err(Error::Dimension { .. })
    ));
}

proptest! {
    #[test]
    fn intersection_distance_is_symmetric_and_bounded(
        a in prop::collection::vec(0u64..20, 8),
        b in prop::collection::vec(0u64..20, 8),
    ) {
        prop_assume!(a.iter().sum::<u64>() > 0 && b.iter().sum::<u64>() > 0);
        let (ha, hb) = (WordHistogram::from_counts(a), WordHistogram::from_counts(b));
        let d = histogram_intersection_distance(&ha, &hb).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, histogram_intersection_distance(&hb, &ha).unwrap());
        prop_assert!(histogram_intersection_distance(&ha, &ha).unwrap() < 1e-12);
    }
}
