//! `iclap` command line: dataset generation, library fitting, single-query classification,
//! leave-one-out evaluation and weight sweeps.
//!
//! Every command takes an optional TOML config (`--config`); flags override its fields. The
//! whole configuration is validated before anything is computed or written.

mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{parse_touches, slug, RunConfig, DEFAULT_SEED, SEED_ENV};

use crate::codebook::ExtractorId;
use crate::dataset::{dataset_checksum, generate_dataset, load_dataset, save_dataset, ObjectId};
use crate::error::{Error, Result};
use crate::evaluation::{
    accuracy_csv, reports_for, score_dataset, weight_sweep, MethodDescriptor, QueryScores,
};
use crate::recognition::{load_library, save_library, ModelLibrary};
use crate::util::atomic_write;

#[derive(Debug, Parser)]
#[command(name = "iclap", version, about = "Tactile/kinesthetic object recognition with iCLAP")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Global seed [fallback: ICLAP_SEED, then 2016].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset directory.
    GenData(GenDataArgs),
    /// Fit a codebook on every trace of a dataset and store the model library.
    FitCodebook(FitArgs),
    /// Classify one trace of a dataset against a stored library.
    Classify(ClassifyArgs),
    /// Leave-one-out accuracy curves for methods and fusions.
    Evaluate(EvaluateArgs),
    /// Exhaustive weighted-sum weight search.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub objects: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Dictionary size.
    #[arg(long)]
    pub k: Option<usize>,
    /// Feature extractor: raw-patch or moments.
    #[arg(long)]
    pub extractor: Option<String>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub error_tolerance: Option<f64>,
    #[arg(long)]
    pub label_scale: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Library directory to create.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub library: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub object: u32,
    #[arg(long)]
    pub trial: usize,
    /// Number of leading frames to use; defaults to the whole trace.
    #[arg(long)]
    pub touches: Option<usize>,
    /// ICP, BoW, iCLAP or a fusion such as weighted_sum:ICP,BoW:0.7,0.3.
    #[arg(long, default_value = "iCLAP")]
    pub method: String,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory for accuracy.csv and confusion_*.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated single methods.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Fusion spec; repeatable.
    #[arg(long = "fusion")]
    pub fusions: Vec<String>,
    /// Touch counts, e.g. 1-20.
    #[arg(long)]
    pub touches: Option<String>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory for sweep_*.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fusion family such as ICP+BoW+iCLAP; repeatable.
    #[arg(long = "family")]
    pub families: Vec<String>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Touch count used to rank grid points.
    #[arg(long)]
    pub designated: Option<usize>,
    #[arg(long)]
    pub touches: Option<String>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

fn apply_pipeline(cfg: &mut RunConfig, p: &PipelineArgs) -> Result<()> {
    if let Some(k) = p.k {
        cfg.pipeline.k = k;
    }
    if let Some(e) = &p.extractor {
        cfg.pipeline.extractor = e.parse::<ExtractorId>()?;
    }
    if let Some(v) = p.max_iterations {
        cfg.pipeline.registration.max_iterations = v;
    }
    if let Some(v) = p.error_tolerance {
        cfg.pipeline.registration.error_tolerance = v;
    }
    if let Some(v) = p.label_scale {
        cfg.pipeline.registration.label_scale = v;
    }
    Ok(())
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn required<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::Config(format!("missing --{what} (or `{what}` in the config file)")))
}

/// Merges config file and flags for `command`.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    match &cli.command {
        Command::GenData(a) => {
            if a.out.is_some() {
                cfg.out = a.out.clone();
            }
            set(&mut cfg.objects, a.objects);
            set(&mut cfg.trials, a.trials);
            set(&mut cfg.frames, a.frames);
            set(&mut cfg.noise, a.noise);
        }
        Command::FitCodebook(a) => {
            if a.data.is_some() {
                cfg.data = a.data.clone();
            }
            if a.out.is_some() {
                cfg.library = a.out.clone();
            }
            apply_pipeline(&mut cfg, &a.pipeline)?;
        }
        Command::Classify(a) => {
            if a.data.is_some() {
                cfg.data = a.data.clone();
            }
            if a.library.is_some() {
                cfg.library = a.library.clone();
            }
            apply_pipeline(&mut cfg, &a.pipeline)?;
        }
        Command::Evaluate(a) => {
            if a.data.is_some() {
                cfg.data = a.data.clone();
            }
            if a.out.is_some() {
                cfg.out = a.out.clone();
            }
            set(&mut cfg.methods, a.methods.clone());
            if !a.fusions.is_empty() {
                cfg.fusions = a.fusions.clone();
            }
            set(&mut cfg.touches, a.touches.clone());
            apply_pipeline(&mut cfg, &a.pipeline)?;
        }
        Command::Sweep(a) => {
            if a.data.is_some() {
                cfg.data = a.data.clone();
            }
            if a.out.is_some() {
                cfg.out = a.out.clone();
            }
            if !a.families.is_empty() {
                cfg.families = a.families.clone();
            }
            set(&mut cfg.step, a.step);
            set(&mut cfg.designated_touches, a.designated);
            set(&mut cfg.touches, a.touches.clone());
            apply_pipeline(&mut cfg, &a.pipeline)?;
        }
    }
    Ok(cfg)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command, writing human-readable output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let cfg = resolve_config(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} worker threads: {e}", cli.jobs)))?;
    let (result, text) = pool.install(|| {
        let mut buf: Vec<u8> = Vec::new();
        let result = match &cli.command {
            Command::GenData(_) => gen_data(&cfg, &mut buf),
            Command::FitCodebook(_) => fit_codebook(&cfg, &mut buf),
            Command::Classify(a) => classify(&cfg, a, &mut buf),
            Command::Evaluate(_) => evaluate(&cfg, &mut buf),
            Command::Sweep(_) => sweep(&cfg, &mut buf),
        };
        (result, buf)
    });
    out.write_all(&text).map_err(|e| Error::io("<stdout>", e))?;
    result
}

fn emit(out: &mut dyn Write, line: impl AsRef<str>) -> Result<()> {
    writeln!(out, "{}", line.as_ref()).map_err(|e| Error::io("<stdout>", e))
}

fn gen_data(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let path = required(&cfg.out, "out")?;
    let params = cfg.exploration()?;
    let seed = cfg.resolved_seed()?;
    if cfg.objects < 2 {
        return Err(Error::Config(format!("need at least two objects, got {}", cfg.objects)));
    }
    if path.exists() {
        return Err(Error::Config(format!("{} already exists", path.display())));
    }
    let traces = generate_dataset(cfg.objects, &params, seed)?;
    save_dataset(&traces, path)?;
    emit(
        out,
        format!(
            "wrote {}: objects={} trials={} frames={} traces={} seed={seed}",
            path.display(),
            cfg.objects,
            params.trials,
            params.frames_per_trial,
            traces.len()
        ),
    )?;
    emit(out, format!("checksum {}", dataset_checksum(path)?))
}

fn fit_codebook(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let data = required(&cfg.data, "data")?;
    let lib_path = required(&cfg.library, "out")?;
    cfg.pipeline.validate()?;
    let seed = cfg.resolved_seed()?;
    if lib_path.exists() {
        return Err(Error::Config(format!("{} already exists", lib_path.display())));
    }
    let dataset = load_dataset(data)?;
    let training: Vec<_> = dataset.traces.iter().collect();
    let library = ModelLibrary::build(&training, cfg.pipeline.extractor, cfg.pipeline.k, seed)?;
    save_library(&library, lib_path)?;
    emit(
        out,
        format!(
            "wrote {}: models={} k={} extractor={}",
            lib_path.display(),
            library.models().len(),
            library.codebook().k(),
            library.codebook().extractor()
        ),
    )
}

fn classify(cfg: &RunConfig, args: &ClassifyArgs, out: &mut dyn Write) -> Result<()> {
    let data = required(&cfg.data, "data")?;
    let lib_path = required(&cfg.library, "library")?;
    cfg.pipeline.validate()?;
    let method: MethodDescriptor = match args.method.parse::<crate::recognition::Method>() {
        Ok(m) => m.into(),
        Err(single) => match args.method.parse::<crate::fusion::FusionSpec>() {
            Ok(f) => f.into(),
            Err(_) if !args.method.contains(':') => return Err(single),
            Err(e) => return Err(e),
        },
    };
    let dataset = load_dataset(data)?;
    let library = load_library(lib_path)?;
    let object = ObjectId(args.object);
    let trace = dataset.trace(object, args.trial).ok_or_else(|| {
        Error::Config(format!("dataset has no trace for object {object} trial {}", args.trial))
    })?;
    let touches = args.touches.unwrap_or(trace.frames.len());
    if touches == 0 || touches > trace.frames.len() {
        return Err(Error::Config(format!(
            "touches {touches} outside 1..={}",
            trace.frames.len()
        )));
    }
    let scores: QueryScores = crate::evaluation::score_query(&library, &cfg.pipeline, trace.truncated(touches))?;
    for m in crate::recognition::Method::ALL {
        if let crate::evaluation::MethodOutcome::Ranked(v) = scores.outcome(m) {
            let cells: Vec<String> = v.distances.iter().map(|d| format!("{d:.6}")).collect();
            emit(out, format!("{m} {}", cells.join(" ")))?;
        } else {
            emit(out, format!("{m} degenerate"))?;
        }
    }
    match scores.decide(&method)? {
        Some(id) => emit(out, format!("{} -> object {id}", method.label())),
        None => emit(out, format!("{} -> no decision", method.label())),
    }
}

fn evaluate(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let data = required(&cfg.data, "data")?;
    let dir = required(&cfg.out, "out")?;
    cfg.pipeline.validate()?;
    let methods = cfg.method_descriptors()?;
    let touches = cfg.touch_counts()?;
    let seed = cfg.resolved_seed()?;
    let dataset = load_dataset(data)?;
    let table = score_dataset(&dataset, &cfg.pipeline, &touches, seed)?;
    let reports = reports_for(&table, &methods)?;
    let mut files = vec![("accuracy.csv".to_string(), accuracy_csv(&reports)?)];
    for r in &reports {
        files.push((format!("confusion_{}.csv", slug(&r.label)), r.confusion_csv()));
    }
    write_outputs(dir, &files)?;
    for r in &reports {
        let last = r.touch_counts.last().copied().unwrap_or(0);
        emit(
            out,
            format!("{} accuracy@{last}={:.4}", r.label, r.accuracies.last().copied().unwrap_or(0.0)),
        )?;
    }
    emit(out, format!("wrote {}", dir.join("accuracy.csv").display()))
}

fn sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let data = required(&cfg.data, "data")?;
    let dir = required(&cfg.out, "out")?;
    cfg.pipeline.validate()?;
    let families = cfg.fusion_families()?;
    let touches = cfg.touch_counts()?;
    for &f in &families {
        crate::evaluation::sweep_grid(f, cfg.step)?;
    }
    if !touches.contains(&cfg.designated_touches) {
        return Err(Error::Config(format!(
            "designated touch count {} is not among the evaluated touch counts",
            cfg.designated_touches
        )));
    }
    let seed = cfg.resolved_seed()?;
    let dataset = load_dataset(data)?;
    let table = score_dataset(&dataset, &cfg.pipeline, &touches, seed)?;
    let mut files = Vec::new();
    let mut lines = Vec::new();
    for &f in &families {
        let sweep = weight_sweep(&table, f, cfg.step, cfg.designated_touches)?;
        files.push((format!("sweep_{}.csv", slug(f.name())), sweep.to_csv()));
        lines.push(sweep.best_line());
    }
    write_outputs(dir, &files)?;
    for l in lines {
        emit(out, l)?;
    }
    Ok(())
}

fn write_outputs(dir: &Path, files: &[(String, String)]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, body) in files {
        atomic_write(&dir.join(name), body.as_bytes())?;
    }
    Ok(())
}
