mod common;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;
use iclap::cli::{execute, Cli};
use iclap::codebook::{histogram_intersection_distance, WordHistogram};
use iclap::dataset::{generate_dataset, Dataset, ExplorationParams, ObjectId};
use iclap::evaluation::{score_dataset, sweep_grid, weight_sweep, EvalReport, PipelineConfig};
use iclap::fusion::FusionFamily;
use iclap::geometry::{apply_transform, nearest_neighbor, optimal_rigid_alignment, KdIndex, Point, Point3, Point4};
use iclap::recognition::{classify_iclap, classify_icp, decide, Method};
use iclap::registration::{register, LabeledCloud, RegistrationConfig};
use nalgebra::SVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{frobenius, library, model, random_cloud, random_transform, random_vector, small_rotation3, with_labels};

/// Accuracies are multiples of 1/100; comparisons allow float round-off only.
const ROUND_OFF: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn alignment_errors<const D: usize>(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let n = rng.random_range(10..=100);
    let source = random_cloud::<D, _>(rng, n, [10.0; D]);
    let tf = random_transform::<D, _>(rng);
    let target = apply_transform(&tf, &source);
    let pairs: Vec<_> = source.into_iter().zip(target).collect();
    let est = optimal_rigid_alignment(&pairs).unwrap();
    (
        frobenius(est.rotation(), tf.rotation()),
        (est.translation() - tf.translation()).norm(),
    )
}

fn alignment_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut rot, mut trans) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let (r, t) = alignment_errors::<3>(&mut rng);
        let (r4, t4) = alignment_errors::<4>(&mut rng);
        rot = rot.max(r).max(r4);
        trans = trans.max(t).max(t4);
    }
    let elapsed = start.elapsed();
    outcome(
        rot < 1e-9 && trans < 1e-9 && elapsed < Duration::from_secs(5),
        format!("1000 3d + 1000 4d transforms, max rotation err {rot:.2e}, max translation err {trans:.2e}, {elapsed:.2?}"),
    )
}

fn icp_convergence() -> Outcome {
    let cfg = RegistrationConfig::default();
    let (mut converged, mut steps, mut rises) = (0, 0, 0);
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(20_000 + seed);
        let cloud = random_cloud::<3, _>(&mut rng, 120, [30.0, 15.0, 6.0]);
        let mut order: Vec<usize> = (0..cloud.len()).collect();
        order.shuffle(&mut rng);
        let source: Vec<Point3> = order[..cloud.len() * 7 / 10].iter().map(|&i| cloud[i]).collect();
        let tf = iclap::geometry::RigidTransform::new(
            small_rotation3(&mut rng, 20f64.to_radians()),
            random_vector::<3, _>(&mut rng, 5.0),
        )
        .unwrap();
        let target = apply_transform(&tf, &cloud);
        let r = register(&source, &target, &cfg).unwrap();
        converged += (r.final_error < 1e-6) as usize;
        for w in r.error_history.windows(2) {
            steps += 1;
            rises += (w[1] > w[0]) as usize;
        }
    }
    outcome(
        converged * 100 >= 95 * 200 && rises == 0,
        format!("{converged}/200 converged below 1e-6, {rises} increases in {steps} iterations"),
    )
}

fn brute_force<const D: usize>(cloud: &[Point<D>], q: &Point<D>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, p) in cloud.iter().enumerate() {
        let d: f64 = (0..D).map(|k| (p[k] - q[k]).powi(2)).sum();
        if d < best.1 {
            best = (i, d);
        }
    }
    (best.0, best.1.sqrt())
}

fn random_point<const D: usize>(rng: &mut ChaCha8Rng, lattice: bool) -> Point<D> {
    let mut c = [0.0; D];
    for v in &mut c {
        *v = if lattice { rng.random_range(-4..=4) as f64 } else { rng.random_range(-50.0..50.0) };
    }
    Point::new(c).unwrap()
}

fn kd_mismatches<const D: usize>(rng: &mut ChaCha8Rng, instances: usize) -> usize {
    let mut bad = 0;
    for inst in 0..instances {
        let lattice = inst % 2 == 0;
        let n = rng.random_range(1..=2000);
        let cloud: Vec<Point<D>> = (0..n).map(|_| random_point(rng, lattice)).collect();
        let index = KdIndex::build(&cloud);
        for qi in 0..100 {
            let q = if qi % 4 == 0 { cloud[rng.random_range(0..n)] } else { random_point(rng, lattice) };
            let (ordinal, dist) = nearest_neighbor(&index, &q).unwrap();
            bad += ((ordinal, dist) != brute_force(&cloud, &q)) as usize;
        }
    }
    bad
}

fn kd_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bad3 = kd_mismatches::<3>(&mut rng, 100);
    let bad4 = kd_mismatches::<4>(&mut rng, 100);
    outcome(
        bad3 == 0 && bad4 == 0,
        format!("100 instances x 100 queries per dimension, mismatches 3d={bad3} 4d={bad4}"),
    )
}

fn intersection_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst, mut bounds, mut symmetric) = (0.0f64, true, true);
    for _ in 0..1000 {
        let k = rng.random_range(1..=60);
        let mut draw = || -> Vec<u64> {
            let mut c: Vec<u64> = (0..k).map(|_| if rng.random_bool(0.3) { 0 } else { rng.random_range(0..50) }).collect();
            if c.iter().all(|&x| x == 0) {
                c[0] = 1;
            }
            c
        };
        let (ca, cb) = (draw(), draw());
        let (ta, tb): (u128, u128) = (ca.iter().map(|&x| x as u128).sum(), cb.iter().map(|&x| x as u128).sum());
        // Exact rational overlap Σ min(a_i/ta, b_i/tb) = Σ min(a_i·tb, b_i·ta) / (ta·tb).
        let num: u128 = ca.iter().zip(&cb).map(|(&a, &b)| (a as u128 * tb).min(b as u128 * ta)).sum();
        let expected = 1.0 - num as f64 / (ta * tb) as f64;
        let (ha, hb) = (WordHistogram::from_counts(ca), WordHistogram::from_counts(cb));
        let d = histogram_intersection_distance(&ha, &hb).unwrap();
        worst = worst.max((d - expected).abs());
        bounds &= (0.0..=1.0).contains(&d);
        symmetric &= d == histogram_intersection_distance(&hb, &ha).unwrap();
    }
    outcome(
        worst <= 1e-12 && bounds && symmetric,
        format!("1000 pairs, max deviation {worst:.2e}, bounds {bounds}, symmetric {symmetric}"),
    )
}

fn label_discrimination() -> Outcome {
    const K: usize = 50;
    let cfg = RegistrationConfig::default();
    let (mut picked, mut ties) = (0, 0);
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let spatial = random_cloud::<3, _>(&mut rng, 30, [20.0, 10.0, 1.0]);
        let a = with_labels(&mut rng, &spatial, K);
        let b = with_labels(&mut rng, &spatial, K);
        let truth = rng.random_range(0..2usize);
        let models = if truth == 0 { vec![model(1, a.clone(), K), model(2, b, K)] } else { vec![model(1, b, K), model(2, a.clone(), K)] };
        let lib = library(models, K);
        let tf = iclap::geometry::RigidTransform::new(small_rotation3(&mut rng, 0.2), SVector::from([1.0, -2.0, 0.5])).unwrap();
        let moved: Vec<Point4> = a[..20]
            .iter()
            .map(|p| Point4::labeled(tf.apply(&p.spatial()), p.label()).unwrap())
            .collect();
        let test = LabeledCloud::new(moved, None).unwrap();
        let icp = classify_icp(&test.spatial(), &lib, &cfg).unwrap();
        ties += (icp.distances[0] == icp.distances[1]) as usize;
        let iclap = classify_iclap(&test, &lib, &cfg).unwrap();
        picked += (decide(&iclap).unwrap() == ObjectId(truth as u32 + 1)) as usize;
    }
    outcome(
        picked == 50 && ties == 50,
        format!("iCLAP picked the label-matching model in {picked}/50, ICP tied in {ties}/50"),
    )
}

fn pinned_dataset() -> Dataset {
    Dataset::new(generate_dataset(20, &ExplorationParams::default(), 2016).unwrap())
}

fn max_drop(r: &EvalReport) -> (f64, usize, usize) {
    let mut worst = (0.0, 0, 0);
    for i in 0..r.accuracies.len() {
        for j in i + 1..r.accuracies.len() {
            let drop = r.accuracies[i] - r.accuracies[j];
            if drop > worst.0 {
                worst = (drop, r.touch_counts[i], r.touch_counts[j]);
            }
        }
    }
    worst
}

fn ordering_and_fusion() -> (Outcome, Outcome) {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let ds = pinned_dataset();
    let touches: Vec<usize> = (1..=20).collect();
    let config = PipelineConfig::default();
    assert_eq!(config.k, 50);
    let (reports, sweep) = pool.install(|| {
        let table = score_dataset(&ds, &config, &touches, 2016).unwrap();
        let reports: Vec<EvalReport> = Method::ALL.iter().map(|&m| table.report(&m.into()).unwrap()).collect();
        let sweep = weight_sweep(&table, FusionFamily::All, 0.1, 15).unwrap();
        (reports, sweep)
    });
    let elapsed = start.elapsed();
    let (icp, bow, iclap) = (&reports[0], &reports[1], &reports[2]);

    let mut margin = f64::INFINITY;
    for t in 12..=20 {
        let best_single = icp.accuracy_at(t).unwrap().max(bow.accuracy_at(t).unwrap());
        margin = margin.min(iclap.accuracy_at(t).unwrap() - (best_single - 0.02));
    }
    let drops: Vec<(f64, usize, usize)> = reports.iter().map(max_drop).collect();
    let monotone = drops.iter().all(|d| d.0 <= 0.03 + ROUND_OFF);
    let ordered = margin >= -ROUND_OFF;
    let curve = |r: &EvalReport| r.accuracies.iter().map(|a| format!("{a:.2}")).collect::<Vec<_>>().join(" ");
    let drop_text: Vec<String> = reports
        .iter()
        .zip(&drops)
        .map(|(r, d)| format!("{} {:.2} ({}->{})", r.label, d.0, d.1, d.2))
        .collect();
    let criterion6 = outcome(
        ordered && monotone && elapsed < Duration::from_secs(600),
        format!(
            "ordering margin {margin:+.2} at t>=12 ({}), largest drops {} (limit 0.03), {elapsed:.1?} single-threaded\n    ICP   {}\n    BoW   {}\n    iCLAP {}",
            if ordered { "ok" } else { "violated" },
            drop_text.join(", "),
            curve(icp),
            curve(bow),
            curve(iclap)
        ),
    );

    let iclap15 = iclap.accuracy_at(15).unwrap();
    let best = sweep.best_accuracy();
    let criterion7 = outcome(
        best + ROUND_OFF >= iclap15,
        format!("{} vs iCLAP accuracy@15={iclap15:.4}", sweep.best_line()),
    );
    (criterion6, criterion7)
}

fn sweep_cardinalities() -> Outcome {
    let sizes: Vec<(FusionFamily, usize)> =
        FusionFamily::ALL.iter().map(|&f| (f, sweep_grid(f, 0.1).unwrap().len())).collect();
    let pass = sizes.iter().all(|&(f, n)| n == if f.inputs().len() == 2 { 9 } else { 36 });
    let text: Vec<String> = sizes.iter().map(|(f, n)| format!("{f}={n}")).collect();
    outcome(pass, text.join(" "))
}

fn run_cli(args: &[&str]) {
    let cli = Cli::try_parse_from(std::iter::once("iclap").chain(args.iter().copied())).unwrap();
    execute(&cli, &mut Vec::new()).unwrap();
}

fn pipeline_files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let p = |name: &str| root.join(name).to_str().unwrap().to_string();
    let (data, eval, sweep) = (p("data"), p("eval"), p("sweep"));
    run_cli(&["gen-data", "--out", &data, "--objects", "6", "--trials", "3", "--frames", "20", "--seed", "9"]);
    let fusion = "weighted_sum:ICP,BoW,iCLAP:0.2,0.3,0.5";
    run_cli(&["evaluate", "--data", &data, "--out", &eval, "--seed", "9", "--k", "20", "--fusion", fusion]);
    run_cli(&["sweep", "--data", &data, "--out", &sweep, "--seed", "9", "--k", "20", "--touches", "1-15"]);
    let mut files = Vec::new();
    for dir in ["data", "eval", "sweep"] {
        let mut names: Vec<String> = fs::read_dir(root.join(dir))
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        for n in names {
            let bytes = fs::read(root.join(dir).join(&n)).unwrap();
            files.push((format!("{dir}/{n}"), bytes));
        }
    }
    files
}

fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (fa, fb) = (pipeline_files(a.path()), pipeline_files(b.path()));
    let csvs = fa.iter().filter(|(n, _)| n.ends_with(".csv") && !n.starts_with("data/")).count();
    let differing: Vec<&str> = fa
        .iter()
        .zip(&fb)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    outcome(
        fa.len() == fb.len() && differing.is_empty(),
        format!("{} files ({csvs} result CSVs) compared, {} differ {:?}", fa.len(), differing.len(), differing),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "alignment exactness", alignment_exactness()),
        (2, "ICP convergence", icp_convergence()),
        (3, "kd-tree equals brute force", kd_oracle()),
        (4, "histogram intersection oracle", intersection_oracle()),
        (5, "label discrimination", label_discrimination()),
    ];
    let (c6, c7) = ordering_and_fusion();
    results.push((6, "recognition ordering on the pinned dataset", c6));
    results.push((7, "best triple fusion vs iCLAP", c7));
    results.push((8, "sweep cardinalities", sweep_cardinalities()));
    results.push((9, "determinism", determinism()));

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("{} criterion {n} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += (!o.pass) as usize;
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
