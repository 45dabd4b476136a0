use std::ops::Index;

use nalgebra::SVector;

use crate::error::{Error, Result};

/// A point in 3D space (millimeters) or in the 4D labeled space `(x, y, z, μ)`.
///
/// The dimension is a type parameter, so mixing 3D and 4D points is a compile error.
/// Only `D = 3` and `D = 4` are supported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<const D: usize>(pub(crate) SVector<f64, D>);

pub type Point3 = Point<3>;
pub type Point4 = Point<4>;

impl<const D: usize> Point<D> {
    const SUPPORTED: () = assert!(D == 3 || D == 4, "only 3D and 4D points are supported");

    /// Builds a point, rejecting non-finite coordinates.
    pub fn new(coords: [f64; D]) -> Result<Self> {
        #[allow(clippy::let_unit_value)]
        let _ = Self::SUPPORTED;
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NumericalFailure(format!(
                "non-finite coordinate in {coords:?}"
            )));
        }
        Ok(Point(SVector::from(coords)))
    }

    pub(crate) fn from_vector(v: SVector<f64, D>) -> Self {
        Point(v)
    }

    pub fn origin() -> Self {
        Point(SVector::zeros())
    }

    pub fn coords(&self) -> [f64; D] {
        self.0.into()
    }

    pub fn as_vector(&self) -> &SVector<f64, D> {
        &self.0
    }

    /// Squared Euclidean distance, summed axis by axis in index order.
    pub fn distance_squared(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for i in 0..D {
            let d = self.0[i] - other.0[i];
            acc += d * d;
        }
        acc
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.distance_squared(other).sqrt()
    }
}

impl<const D: usize> Index<usize> for Point<D> {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Point4 {
    pub fn labeled(spatial: Point3, label: f64) -> Result<Self> {
        let [x, y, z] = spatial.coords();
        Point::new([x, y, z, label])
    }

    pub fn spatial(&self) -> Point3 {
        Point(SVector::from([self.0[0], self.0[1], self.0[2]]))
    }

    pub fn label(&self) -> f64 {
        self.0[3]
    }
}

/// Componentwise arithmetic mean of a non-empty set of points.
pub fn centroid<const D: usize>(points: &[Point<D>]) -> Result<Point<D>> {
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let sum = points
        .iter()
        .fold(SVector::<f64, D>::zeros(), |acc, p| acc + p.0);
    Ok(Point(sum / points.len() as f64))
}
