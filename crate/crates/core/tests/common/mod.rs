#![allow(dead_code)]

use iclap::geometry::{Point, RigidTransform};
use nalgebra::{DMatrix, Rotation3, SMatrix, SVector, Unit, Vector3};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Haar-random proper rotation from the QR factorization of a Gaussian matrix.
pub fn random_rotation<const D: usize, R: Rng>(rng: &mut R) -> SMatrix<f64, D, D> {
    let a = DMatrix::<f64>::from_fn(D, D, |_, _| gaussian(rng));
    let qr = a.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..D {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    SMatrix::<f64, D, D>::from_column_slice(q.as_slice())
}

/// Rotation about a random axis by an angle drawn uniformly from `[0, max_angle]`.
pub fn small_rotation3<R: Rng>(rng: &mut R, max_angle: f64) -> SMatrix<f64, 3, 3> {
    let axis = Vector3::new(gaussian(rng), gaussian(rng), gaussian(rng));
    let angle = rng.random_range(0.0..=max_angle);
    *Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle).matrix()
}

pub fn random_vector<const D: usize, R: Rng>(rng: &mut R, scale: f64) -> SVector<f64, D> {
    SVector::<f64, D>::from_fn(|_, _| rng.random_range(-scale..scale))
}

pub fn random_transform<const D: usize, R: Rng>(rng: &mut R) -> RigidTransform<D> {
    RigidTransform::new(random_rotation::<D, _>(rng), random_vector::<D, _>(rng, 10.0)).unwrap()
}

/// Uniform points in the box `[-e_i, e_i]`.
pub fn random_cloud<const D: usize, R: Rng>(rng: &mut R, n: usize, extents: [f64; D]) -> Vec<Point<D>> {
    (0..n)
        .map(|_| {
            let mut c = [0.0; D];
            for (v, e) in c.iter_mut().zip(extents) {
                *v = rng.random_range(-e..e);
            }
            Point::new(c).unwrap()
        })
        .collect()
}

pub fn frobenius<const D: usize>(a: &SMatrix<f64, D, D>, b: &SMatrix<f64, D, D>) -> f64 {
    (a - b).norm()
}

use iclap::codebook::{Codebook, ExtractorId, FeatureDescriptor, WordHistogram, MOMENT_FEATURES};
use iclap::dataset::ObjectId;
use iclap::geometry::{Point3, Point4};
use iclap::recognition::{ModelLibrary, ObjectModel};
use iclap::registration::LabeledCloud;

/// Codebook whose centers are never used for assignment; only `k` matters.
pub fn dummy_codebook(k: usize) -> Codebook {
    let centers = (0..k)
        .map(|i| FeatureDescriptor::new(vec![i as f64; MOMENT_FEATURES]).unwrap())
        .collect();
    Codebook::new(ExtractorId::Moments, centers).unwrap()
}

pub fn word_histogram(points: &[Point4], k: usize) -> WordHistogram {
    let mut counts = vec![0u64; k];
    for p in points {
        counts[p.label() as usize - 1] += 1;
    }
    WordHistogram::from_counts(counts)
}

pub fn model(id: u32, points: Vec<Point4>, k: usize) -> ObjectModel {
    let histogram = word_histogram(&points, k);
    let labeled = LabeledCloud::new(points, Some(ObjectId(id))).unwrap();
    ObjectModel {
        object_id: ObjectId(id),
        spatial_cloud: labeled.spatial(),
        labeled_cloud: labeled,
        histogram,
    }
}

pub fn library(models: Vec<ObjectModel>, k: usize) -> ModelLibrary {
    ModelLibrary::new(dummy_codebook(k), models).unwrap()
}

pub fn with_labels<R: Rng>(rng: &mut R, spatial: &[Point3], k: usize) -> Vec<Point4> {
    spatial
        .iter()
        .map(|p| Point4::labeled(*p, rng.random_range(1..=k) as f64).unwrap())
        .collect()
}
