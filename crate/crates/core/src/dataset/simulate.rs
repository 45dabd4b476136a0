use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{
    generate_object_suite, mix_seed, ExplorationTrace, SyntheticObject, TactileFrame, CELL_PITCH_MM, SENSOR_COLS,
    SENSOR_ROWS,
};
use crate::error::{Error, Result};

const MAX_REJECTIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplorationParams {
    pub trials: usize,
    pub frames_per_trial: usize,
    /// Standard deviation of the additive pressure noise; also used as the z jitter in mm.
    pub noise_sigma: f64,
}

impl Default for ExplorationParams {
    fn default() -> Self {
        ExplorationParams {
            trials: 5,
            frames_per_trial: 85,
            noise_sigma: 0.05,
        }
    }
}

/// World position of the center of sensing element `(row, col)` for a sensor centered at `(x, y)`.
pub(crate) fn cell_center(x: f64, y: f64, row: usize, col: usize) -> (f64, f64) {
    let dr = (row as f64 - (SENSOR_ROWS as f64 - 1.0) / 2.0) * CELL_PITCH_MM;
    let dc = (col as f64 - (SENSOR_COLS as f64 - 1.0) / 2.0) * CELL_PITCH_MM;
    (x + dr, y + dc)
}

/// Samples the object's height-field under every sensing element, adding clipped Gaussian noise.
pub fn render_frame(
    object: &SyntheticObject,
    position: [f64; 3],
    noise_sigma: f64,
    timestamp_index: u64,
    rng: &mut impl Rng,
) -> TactileFrame {
    let noise = (noise_sigma > 0.0).then(|| Normal::new(0.0, noise_sigma).expect("positive sigma"));
    let mut pressures = [[0.0; SENSOR_COLS]; SENSOR_ROWS];
    for (r, row) in pressures.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            let (cx, cy) = cell_center(position[0], position[1], r, c);
            let mut v = object.height(cx, cy);
            if let Some(n) = &noise {
                v += n.sample(rng);
            }
            *cell = v.max(0.0);
        }
    }
    TactileFrame {
        pressures,
        position,
        timestamp_index,
    }
}

fn sample_position(
    object: &SyntheticObject,
    bounds: [f64; 4],
    rng: &mut ChaCha8Rng,
) -> Result<[f64; 2]> {
    for _ in 0..MAX_REJECTIONS {
        let x = rng.random_range(bounds[0]..=bounds[2]);
        let y = rng.random_range(bounds[1]..=bounds[3]);
        if object.in_support(x, y) {
            return Ok([x, y]);
        }
    }
    Err(Error::Config(format!(
        "object {} has no samplable support",
        object.object_id
    )))
}

/// Uninformed exploration: sensor positions uniform over the object's support.
///
/// Each trial draws from its own RNG stream derived from `(seed, object_id, trial)`,
/// so traces can be generated independently and in any order.
pub fn simulate_exploration(
    object: &SyntheticObject,
    params: &ExplorationParams,
    seed: u64,
) -> Result<Vec<ExplorationTrace>> {
    if params.trials == 0 || params.frames_per_trial == 0 {
        return Err(Error::Config("trials and frames_per_trial must be ≥ 1".into()));
    }
    if !(params.noise_sigma.is_finite() && params.noise_sigma >= 0.0) {
        return Err(Error::Config("noise_sigma must be non-negative".into()));
    }
    let bounds = object
        .bounds()
        .filter(|b| b[2] > b[0] && b[3] > b[1])
        .ok_or_else(|| {
            Error::Config(format!("object {} has degenerate support", object.object_id))
        })?;
    let z_noise = (params.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, params.noise_sigma).expect("positive sigma"));

    (0..params.trials)
        .map(|trial| {
            let stream = ((object.object_id.0 as u64) << 32) | trial as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, stream));
            let frames = (0..params.frames_per_trial)
                .map(|i| {
                    let [x, y] = sample_position(object, bounds, &mut rng)?;
                    let z = z_noise.as_ref().map_or(0.0, |n| n.sample(&mut rng));
                    Ok(render_frame(object, [x, y, z], params.noise_sigma, i as u64, &mut rng))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ExplorationTrace {
                object_id: object.object_id,
                trial_index: trial,
                frames,
            })
        })
        .collect()
}

/// Generates `objects` synthetic objects and explores each of them, all from one seed.
pub fn generate_dataset(objects: usize, params: &ExplorationParams, seed: u64) -> Result<Vec<ExplorationTrace>> {
    if objects < 2 {
        return Err(Error::Config(format!("need at least two objects, got {objects}")));
    }
    let mut traces = Vec::with_capacity(objects * params.trials);
    for object in generate_object_suite(objects, seed) {
        traces.extend(simulate_exploration(&object, params, seed)?);
    }
    Ok(traces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ObjectId, Primitive, Shape, Texture};

    fn disc(radius: f64) -> SyntheticObject {
        SyntheticObject {
            object_id: ObjectId(1),
            primitives: vec![Primitive {
                shape: Shape::Disc {
                    center: [0.0, 0.0],
                    radius,
                },
                height: 2.0,
                texture: Texture::Flat,
            }],
        }
    }

    #[test]
    fn empty_region_renders_zero_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = render_frame(&disc(10.0), [500.0, 500.0, 0.0], 0.0, 0, &mut rng);
        assert!(f.flat_pressures().all(|p| p == 0.0));
    }

    #[test]
    fn recorded_position_equals_requested() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = render_frame(&disc(10.0), [1.5, -2.0, 0.25], 0.1, 3, &mut rng);
        assert_eq!(f.position, [1.5, -2.0, 0.25]);
        assert_eq!(f.timestamp_index, 3);
    }

    #[test]
    fn degenerate_object_rejected() {
        let obj = SyntheticObject {
            object_id: ObjectId(9),
            primitives: vec![],
        };
        let err = simulate_exploration(&obj, &ExplorationParams::default(), 1).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn traces_have_requested_shape() {
        let obj = &generate_object_suite(3, 5)[2];
        let params = ExplorationParams {
            trials: 3,
            frames_per_trial: 7,
            noise_sigma: 0.02,
        };
        let traces = simulate_exploration(obj, &params, 11).unwrap();
        assert_eq!(traces.len(), 3);
        for (t, trace) in traces.iter().enumerate() {
            assert_eq!(trace.trial_index, t);
            assert_eq!(trace.frames.len(), 7);
            assert!(trace.frames.iter().all(TactileFrame::is_valid));
            let b = obj.bounds().unwrap();
            assert!(trace
                .frames
                .iter()
                .all(|f| f.position[0] >= b[0] && f.position[0] <= b[2]));
        }
    }
}
