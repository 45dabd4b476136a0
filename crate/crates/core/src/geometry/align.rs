use nalgebra::{DMatrix, SMatrix, SVD};

use super::point::{centroid, Point};
use super::transform::RigidTransform;
use crate::error::{Error, Result};

const SVD_EPS: f64 = 1e-15;
const SVD_MAX_ITERATIONS: usize = 500;

/// Closed-form least-squares rigid transform mapping each source point onto its paired target.
///
/// Pairs are `(source, target)`. With deviations `p' = p − c_p`, `q' = q − c_q` and the
/// cross-covariance `H = Σ p'·q'ᵀ = U·Σ·Vᵀ`, the rotation is `R = V·Uᵀ` and the translation
/// `t = c_q − R·c_p`. When `det(V·Uᵀ) < 0` the column of `V` belonging to the smallest singular
/// value is negated, so the result is always a proper rotation.
pub fn optimal_rigid_alignment<const D: usize>(
    pairs: &[(Point<D>, Point<D>)],
) -> Result<RigidTransform<D>> {
    if pairs.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let sources: Vec<Point<D>> = pairs.iter().map(|(p, _)| *p).collect();
    let targets: Vec<Point<D>> = pairs.iter().map(|(_, q)| *q).collect();
    let cp = centroid(&sources)?;
    let cq = centroid(&targets)?;

    let mut h = SMatrix::<f64, D, D>::zeros();
    for (p, q) in pairs {
        let dp = p.0 - cp.0;
        let dq = q.0 - cq.0;
        h += dp * dq.transpose();
    }

    let rotation = rotation_from_cross_covariance(&h)?;
    let translation = cq.0 - rotation * cp.0;
    Ok(RigidTransform::from_parts_unchecked(rotation, translation))
}

fn rotation_from_cross_covariance<const D: usize>(
    h: &SMatrix<f64, D, D>,
) -> Result<SMatrix<f64, D, D>> {
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite cross-covariance".into()));
    }
    let dynamic = DMatrix::from_column_slice(D, D, h.as_slice());
    let svd = SVD::try_new(dynamic, true, true, SVD_EPS, SVD_MAX_ITERATIONS)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let u = svd
        .u
        .ok_or_else(|| Error::NumericalFailure("SVD missing U".into()))?;
    let mut v = svd
        .v_t
        .ok_or_else(|| Error::NumericalFailure("SVD missing Vᵀ".into()))?
        .transpose();

    let mut r = &v * u.transpose();
    if r.determinant() < 0.0 {
        let smallest = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(D - 1);
        v.column_mut(smallest).neg_mut();
        r = &v * u.transpose();
    }
    Ok(SMatrix::<f64, D, D>::from_column_slice(r.as_slice()))
}
