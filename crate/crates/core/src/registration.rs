//! Point-to-point ICP in 3D and its labeled 4D extension.
//!
//! Both loops alternate nearest-neighbor matching of every (transformed) source point
//! against a k-d tree of the target with a closed-form re-alignment on the matched pairs.
//! The error is the sum of squared matched-pair distances.

use serde::{Deserialize, Serialize};

use crate::dataset::ObjectId;
use crate::error::{Error, Result};
use crate::geometry::{
    centroid, optimal_rigid_alignment, KdIndex, Point, Point3, Point4, RigidTransform,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegistrationConfig {
    pub max_iterations: usize,
    /// Stop once the error falls below this value.
    pub error_tolerance: f64,
    /// Stop once `|E_prev − E| / E_prev` falls below this value.
    pub relative_change_threshold: f64,
    /// Multiplier applied to the label axis of 4D clouds before matching. 1.0 uses raw labels.
    pub label_scale: f64,
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        RegistrationConfig {
            max_iterations: 50,
            error_tolerance: 1e-6,
            relative_change_threshold: 1e-4,
            label_scale: 1.0,
        }
    }
}

impl RegistrationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        for (name, v) in [
            ("error_tolerance", self.error_tolerance),
            ("relative_change_threshold", self.relative_change_threshold),
            ("label_scale", self.label_scale),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Tolerance,
    MaxIterations,
    Stalled,
}

#[derive(Debug, Clone)]
pub struct RegistrationResult<const D: usize> {
    /// Sum of squared matched-pair distances under `transform`.
    pub final_error: f64,
    pub transform: RigidTransform<D>,
    pub iterations_used: usize,
    pub termination_reason: TerminationReason,
    /// Error before the first iteration followed by the error after each iteration.
    pub error_history: Vec<f64>,
}

/// 3D cloud of contact positions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialCloud {
    pub points: Vec<Point3>,
    pub object_id: Option<ObjectId>,
}

impl SpatialCloud {
    pub fn new(points: Vec<Point3>, object_id: Option<ObjectId>) -> Self {
        SpatialCloud { points, object_id }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// 4D cloud `(x, y, z, μ)` with `μ` a 1-based word label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCloud {
    pub points: Vec<Point4>,
    pub object_id: Option<ObjectId>,
}

impl LabeledCloud {
    /// Rejects points whose label is not a positive integer.
    pub fn new(points: Vec<Point4>, object_id: Option<ObjectId>) -> Result<Self> {
        if let Some(p) = points
            .iter()
            .find(|p| p.label() < 1.0 || p.label().fract() != 0.0)
        {
            return Err(Error::Config(format!(
                "label {} is not a positive integer",
                p.label()
            )));
        }
        Ok(LabeledCloud { points, object_id })
    }

    /// Checks every label lies in `1..=k`.
    pub fn validate_labels(&self, k: usize) -> Result<()> {
        match self.points.iter().find(|p| p.label() > k as f64) {
            Some(p) => Err(Error::Config(format!(
                "label {} exceeds dictionary size {k}",
                p.label()
            ))),
            None => Ok(()),
        }
    }

    pub fn spatial(&self) -> SpatialCloud {
        SpatialCloud::new(
            self.points.iter().map(Point4::spatial).collect(),
            self.object_id,
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn scale_labels<const D: usize>(points: &[Point<D>], scale: f64) -> Vec<Point<D>> {
    if D != 4 || scale == 1.0 {
        return points.to_vec();
    }
    points
        .iter()
        .map(|p| {
            let mut v = p.0;
            v[3] *= scale;
            Point::from_vector(v)
        })
        .collect()
}

/// Matches every transformed source point to its nearest target point.
/// Returns the matched pairs `(source, target)` and the summed squared distance.
fn match_points<const D: usize>(
    source: &[Point<D>],
    index: &KdIndex<D>,
    tf: &RigidTransform<D>,
) -> Result<(Vec<(Point<D>, Point<D>)>, f64)> {
    let mut pairs = Vec::with_capacity(source.len());
    let mut error = 0.0;
    for p in source {
        let n = index.nearest(&tf.apply(p))?;
        error += n.distance_squared;
        pairs.push((*p, index.points()[n.ordinal]));
    }
    Ok((pairs, error))
}

/// Rigidly registers `source` onto `target`.
///
/// The loop starts from the translation taking the source centroid onto the target centroid
/// and stops at the first of: error below tolerance, relative change below threshold,
/// or `max_iterations` iterations.
pub fn register<const D: usize>(
    source: &[Point<D>],
    target: &[Point<D>],
    config: &RegistrationConfig,
) -> Result<RegistrationResult<D>> {
    config.validate()?;
    if source.is_empty() || target.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let source = scale_labels(source, config.label_scale);
    let target = scale_labels(target, config.label_scale);
    let index = KdIndex::build(&target);

    let offset = centroid(&target)?.0 - centroid(&source)?.0;
    let mut tf = RigidTransform::from_translation(offset);
    let (mut pairs, mut error) = match_points(&source, &index, &tf)?;
    let mut history = vec![error];

    let finish = |tf, error, iterations_used, reason, history| RegistrationResult {
        final_error: error,
        transform: tf,
        iterations_used,
        termination_reason: reason,
        error_history: history,
    };

    if error < config.error_tolerance {
        return Ok(finish(tf, error, 0, TerminationReason::Tolerance, history));
    }

    for iteration in 1..=config.max_iterations {
        tf = optimal_rigid_alignment(&pairs)?;
        let previous = error;
        (pairs, error) = match_points(&source, &index, &tf)?;
        history.push(error);

        let reason = if error < config.error_tolerance {
            Some(TerminationReason::Tolerance)
        } else if (previous - error).abs() / previous < config.relative_change_threshold {
            Some(TerminationReason::Stalled)
        } else if iteration == config.max_iterations {
            Some(TerminationReason::MaxIterations)
        } else {
            None
        };
        if let Some(reason) = reason {
            return Ok(finish(tf, error, iteration, reason, history));
        }
    }
    unreachable!("loop returns on the final iteration")
}

/// Sum over source points of the squared distance to the nearest target point after `tf`.
pub fn residual_error<const D: usize>(
    source: &[Point<D>],
    target: &[Point<D>],
    tf: &RigidTransform<D>,
) -> Result<f64> {
    if source.is_empty() || target.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let index = KdIndex::build(target);
    Ok(match_points(source, &index, tf)?.1)
}

pub fn register_spatial(
    source: &SpatialCloud,
    target: &SpatialCloud,
    config: &RegistrationConfig,
) -> Result<RegistrationResult<3>> {
    register(&source.points, &target.points, config)
}

pub fn register_labeled(
    source: &LabeledCloud,
    target: &LabeledCloud,
    config: &RegistrationConfig,
) -> Result<RegistrationResult<4>> {
    register(&source.points, &target.points, config)
}
