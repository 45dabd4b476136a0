use std::fs;
use std::path::PathBuf;

use iclap::dataset::{
    dataset_checksum, generate_dataset, generate_object_suite, load_dataset, render_frame, save_dataset,
    simulate_exploration, Dataset, ExplorationParams, ObjectId, Primitive, Shape, SyntheticObject, Texture,
    CELL_PITCH_MM, SENSOR_COLS, SENSOR_ROWS,
};
use iclap::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/small_dataset")
}

fn fixture_params() -> ExplorationParams {
    ExplorationParams { trials: 5, frames_per_trial: 3, noise_sigma: 0.05 }
}

fn cell(x: f64, y: f64, r: usize, c: usize) -> (f64, f64) {
    (
        x + (r as f64 - 6.5) * CELL_PITCH_MM,
        y + (c as f64 - 2.5) * CELL_PITCH_MM,
    )
}

fn single(shape: Shape, texture: Texture) -> SyntheticObject {
    SyntheticObject {
        object_id: ObjectId(1),
        primitives: vec![Primitive { shape, height: 2.0, texture }],
    }
}

#[test]
fn suite_has_requested_ids_and_is_deterministic() {
    let a = generate_object_suite(20, 42);
    assert_eq!(a.iter().map(|o| o.object_id.0).collect::<Vec<_>>(), (1..=20).collect::<Vec<_>>());
    assert_eq!(a, generate_object_suite(20, 42));
    assert_ne!(a, generate_object_suite(20, 43));
    for i in 0..a.len() {
        for j in 0..i {
            assert_ne!(a[i].primitives, a[j].primitives, "objects {} and {} coincide", i + 1, j + 1);
        }
    }
}

#[test]
fn suite_contains_both_confusion_pairs() {
    let s = generate_object_suite(20, 7);
    let shapes = |o: &SyntheticObject| o.primitives.iter().map(|p| p.shape.clone()).collect::<Vec<_>>();
    let textures = |o: &SyntheticObject| o.primitives.iter().map(|p| p.texture.clone()).collect::<Vec<_>>();
    assert_eq!(shapes(&s[0]), shapes(&s[1]));
    assert_ne!(textures(&s[0]), textures(&s[1]));
    assert_eq!(textures(&s[2]), textures(&s[3]));
    assert_ne!(shapes(&s[2]), shapes(&s[3]));
}

#[test]
fn noiseless_frame_off_the_object_is_blank() {
    let obj = single(Shape::Disc { center: [0.0, 0.0], radius: 10.0 }, Texture::Flat);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let f = render_frame(&obj, [500.0, 500.0, 0.0], 0.0, 3, &mut rng);
    assert!(f.flat_pressures().all(|p| p == 0.0));
    assert_eq!(f.position, [500.0, 500.0, 0.0]);
    assert_eq!(f.timestamp_index, 3);
}

#[test]
fn frame_over_a_disc_matches_per_cell_geometry() {
    let disc = Shape::Disc { center: [4.0, -3.0], radius: 30.0 };
    let obj = single(disc.clone(), Texture::Flat);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for &(x, y) in &[(0.0, 0.0), (20.0, 5.0), (-18.0, -15.0), (25.0, 25.0)] {
        let f = render_frame(&obj, [x, y, 0.0], 0.0, 0, &mut rng);
        for r in 0..SENSOR_ROWS {
            for c in 0..SENSOR_COLS {
                let (cx, cy) = cell(x, y, r, c);
                let expected = if disc.contains(cx, cy) { 2.0 } else { 0.0 };
                assert_eq!(f.pressures[r][c], expected, "cell ({r},{c}) at ({cx},{cy})");
            }
        }
    }
}

#[test]
fn traces_are_deterministic_and_on_the_object() {
    let obj = &generate_object_suite(6, 3)[5];
    let params = ExplorationParams { trials: 3, frames_per_trial: 25, noise_sigma: 0.05 };
    let a = simulate_exploration(obj, &params, 9).unwrap();
    assert_eq!(a, simulate_exploration(obj, &params, 9).unwrap());
    assert_eq!(a.len(), 3);
    for (i, t) in a.iter().enumerate() {
        assert_eq!(t.trial_index, i);
        assert_eq!(t.frames.len(), 25);
        for f in &t.frames {
            assert!(obj.in_support(f.position[0], f.position[1]));
            assert!(f.is_valid());
        }
    }
    assert_ne!(a[0].frames, a[1].frames);
}

#[test]
fn uninformed_exploration_covers_the_support() {
    let params = ExplorationParams { trials: 1, frames_per_trial: 500, noise_sigma: 0.05 };
    let (half_r, half_c) = (SENSOR_ROWS as f64 / 2.0 * CELL_PITCH_MM, SENSOR_COLS as f64 / 2.0 * CELL_PITCH_MM);
    for obj in generate_object_suite(20, 2016) {
        let frames = &simulate_exploration(&obj, &params, 1).unwrap()[0].frames;
        let b = obj.bounds().unwrap();
        let (mut support, mut touched) = (0usize, 0usize);
        let mut x = b[0] + CELL_PITCH_MM / 2.0;
        while x < b[2] {
            let mut y = b[1] + CELL_PITCH_MM / 2.0;
            while y < b[3] {
                if obj.in_support(x, y) {
                    support += 1;
                    let hit = frames
                        .iter()
                        .any(|f| (x - f.position[0]).abs() <= half_r && (y - f.position[1]).abs() <= half_c);
                    touched += hit as usize;
                }
                y += CELL_PITCH_MM;
            }
            x += CELL_PITCH_MM;
        }
        let coverage = touched as f64 / support as f64;
        assert!(coverage > 0.95, "object {}: coverage {coverage:.3}", obj.object_id);
    }
}

#[test]
fn degenerate_support_and_bad_params_rejected() {
    let empty = SyntheticObject { object_id: ObjectId(1), primitives: vec![] };
    let p = ExplorationParams::default();
    assert!(matches!(simulate_exploration(&empty, &p, 0), Err(Error::Config(_))));
    let point = single(Shape::Disc { center: [0.0, 0.0], radius: 0.0 }, Texture::Flat);
    assert!(matches!(simulate_exploration(&point, &p, 0), Err(Error::Config(_))));
    let obj = &generate_object_suite(2, 0)[0];
    assert!(simulate_exploration(obj, &ExplorationParams { trials: 0, ..p }, 0).is_err());
    assert!(simulate_exploration(obj, &ExplorationParams { noise_sigma: -1.0, ..p }, 0).is_err());
    assert!(matches!(generate_dataset(1, &p, 0), Err(Error::Config(_))));
}

#[test]
fn save_load_round_trip_is_exact() {
    let traces = generate_dataset(3, &ExplorationParams { trials: 2, frames_per_trial: 7, noise_sigma: 0.05 }, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ds");
    save_dataset(&traces, &path).unwrap();
    let loaded = load_dataset(&path).unwrap();
    assert_eq!(loaded, Dataset::new(traces.clone()));
    let bits = |d: &Dataset| -> Vec<u64> {
        d.traces.iter().flat_map(|t| &t.frames).flat_map(|f| f.flat_pressures().chain(f.position)).map(f64::to_bits).collect()
    };
    assert_eq!(bits(&loaded), bits(&Dataset::new(traces.clone())));
    assert!(matches!(save_dataset(&traces, &path), Err(Error::Config(_))));
}

#[test]
fn truncated_and_missing_files_are_format_errors() {
    let traces = generate_dataset(2, &ExplorationParams { trials: 2, frames_per_trial: 4, noise_sigma: 0.05 }, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ds");
    save_dataset(&traces, &path).unwrap();
    let file = path.join("object_001_trial_00.csv");
    let text = fs::read_to_string(&file).unwrap();
    let cut = &text[..text.len() - 40];
    fs::write(&file, cut).unwrap();
    match load_dataset(&path) {
        Err(Error::Format { line: Some(_), .. }) => {}
        other => panic!("expected a format error with a line number, got {other:?}"),
    }
    assert!(matches!(load_dataset(&dir.path().join("nope")), Err(Error::Format { .. })));
}

#[test]
fn shipped_fixture_loads_and_regenerates_bitwise() {
    let ds = load_dataset(&fixture()).unwrap();
    assert_eq!(ds.object_ids().len(), 20);
    assert_eq!(ds.trial_indices(), vec![0, 1, 2, 3, 4]);
    assert_eq!(ds.traces.len(), 100);
    let regenerated = Dataset::new(generate_dataset(20, &fixture_params(), 2016).unwrap());
    assert_eq!(ds, regenerated);
}

#[test]
fn checksum_is_stable_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let params = ExplorationParams { trials: 2, frames_per_trial: 5, noise_sigma: 0.05 };
    for name in ["a", "b"] {
        save_dataset(&generate_dataset(4, &params, 77).unwrap(), &dir.path().join(name)).unwrap();
    }
    save_dataset(&generate_dataset(4, &params, 78).unwrap(), &dir.path().join("c")).unwrap();
    let sum = |n: &str| dataset_checksum(&dir.path().join(n)).unwrap();
    assert_eq!(sum("a"), sum("b"));
    assert_ne!(sum("a"), sum("c"));
}
