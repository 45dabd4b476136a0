use nalgebra::{SMatrix, SVector};

use super::point::Point;
use crate::error::{Error, Result};

/// Elementwise tolerance for `R·Rᵀ = I` and `det(R) = 1`.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-9;

/// A proper rigid motion `p ↦ R·p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform<const D: usize> {
    rotation: SMatrix<f64, D, D>,
    translation: SVector<f64, D>,
}

impl<const D: usize> RigidTransform<D> {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: SMatrix::identity(),
            translation: SVector::zeros(),
        }
    }

    pub fn from_translation(translation: SVector<f64, D>) -> Self {
        RigidTransform {
            rotation: SMatrix::identity(),
            translation,
        }
    }

    /// Validates that `rotation` is orthogonal with unit determinant.
    pub fn new(rotation: SMatrix<f64, D, D>, translation: SVector<f64, D>) -> Result<Self> {
        if !is_proper_rotation(&rotation) {
            return Err(Error::NumericalFailure(
                "rotation is not proper orthogonal".into(),
            ));
        }
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("non-finite translation".into()));
        }
        Ok(RigidTransform {
            rotation,
            translation,
        })
    }

    pub(crate) fn from_parts_unchecked(
        rotation: SMatrix<f64, D, D>,
        translation: SVector<f64, D>,
    ) -> Self {
        RigidTransform {
            rotation,
            translation,
        }
    }

    pub fn rotation(&self) -> &SMatrix<f64, D, D> {
        &self.rotation
    }

    pub fn translation(&self) -> &SVector<f64, D> {
        &self.translation
    }

    /// `(Rᵀ, −Rᵀ·t)`
    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn apply(&self, p: &Point<D>) -> Point<D> {
        Point::from_vector(self.rotation * p.0 + self.translation)
    }

    pub fn is_proper(&self) -> bool {
        is_proper_rotation(&self.rotation)
    }
}

pub fn apply_transform<const D: usize>(tf: &RigidTransform<D>, cloud: &[Point<D>]) -> Vec<Point<D>> {
    cloud.iter().map(|p| tf.apply(p)).collect()
}

pub(crate) fn is_proper_rotation<const D: usize>(r: &SMatrix<f64, D, D>) -> bool {
    let gram = r * r.transpose();
    let identity = SMatrix::<f64, D, D>::identity();
    let orthogonal = gram
        .iter()
        .zip(identity.iter())
        .all(|(a, b)| (a - b).abs() <= ORTHOGONALITY_TOLERANCE);
    let det = nalgebra::DMatrix::from_column_slice(D, D, r.as_slice()).determinant();
    orthogonal && (det - 1.0).abs() <= ORTHOGONALITY_TOLERANCE
}
