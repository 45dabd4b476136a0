use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::ExplorationParams;
use crate::error::{Error, Result};
use crate::evaluation::{MethodDescriptor, PipelineConfig, DEFAULT_DESIGNATED_TOUCHES, DEFAULT_GRID_STEP};
use crate::fusion::{FusionFamily, FusionSpec};
use crate::recognition::Method;

pub const SEED_ENV: &str = "ICLAP_SEED";
pub const DEFAULT_SEED: u64 = 2016;

/// Declarative run description. Loaded from TOML; command-line flags override individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Falls back to `ICLAP_SEED`, then to a fixed default.
    pub seed: Option<u64>,
    pub objects: usize,
    pub trials: usize,
    pub frames: usize,
    pub noise: f64,
    pub pipeline: PipelineConfig,
    pub methods: Vec<String>,
    /// `MODE:INPUTS[:WEIGHTS]`, e.g. `weighted_sum:ICP,BoW:0.7,0.3` or `product:ICP,BoW,iCLAP`.
    pub fusions: Vec<String>,
    /// Comma-separated counts and inclusive ranges, e.g. `1-20` or `5,10,15`.
    pub touches: String,
    pub families: Vec<String>,
    pub step: f64,
    pub designated_touches: usize,
    pub data: Option<PathBuf>,
    pub library: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let params = ExplorationParams::default();
        RunConfig {
            seed: None,
            objects: 20,
            trials: params.trials,
            frames: params.frames_per_trial,
            noise: params.noise_sigma,
            pipeline: PipelineConfig::default(),
            methods: Method::ALL.iter().map(|m| m.to_string()).collect(),
            fusions: Vec::new(),
            touches: "1-20".into(),
            families: FusionFamily::ALL.iter().map(|f| f.to_string()).collect(),
            step: DEFAULT_GRID_STEP,
            designated_touches: DEFAULT_DESIGNATED_TOUCHES,
            data: None,
            library: None,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn resolved_seed(&self) -> Result<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }

    pub fn exploration(&self) -> Result<ExplorationParams> {
        if self.trials == 0 || self.frames == 0 {
            return Err(Error::Config("trials and frames must be ≥ 1".into()));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::Config(format!("noise {} must be non-negative", self.noise)));
        }
        Ok(ExplorationParams {
            trials: self.trials,
            frames_per_trial: self.frames,
            noise_sigma: self.noise,
        })
    }

    /// Single methods followed by fusions, in the order given.
    pub fn method_descriptors(&self) -> Result<Vec<MethodDescriptor>> {
        let mut out: Vec<MethodDescriptor> = Vec::new();
        for m in &self.methods {
            out.push(m.parse::<Method>()?.into());
        }
        for f in &self.fusions {
            out.push(f.parse::<FusionSpec>()?.into());
        }
        if out.is_empty() {
            return Err(Error::Config("no methods or fusions requested".into()));
        }
        Ok(out)
    }

    pub fn fusion_families(&self) -> Result<Vec<FusionFamily>> {
        if self.families.is_empty() {
            return Err(Error::Config("no fusion families requested".into()));
        }
        self.families.iter().map(|f| f.parse()).collect()
    }

    pub fn touch_counts(&self) -> Result<Vec<usize>> {
        parse_touches(&self.touches)
    }
}

/// Parses `1-20`, `5,10,15` or mixtures into a sorted list without duplicates.
pub fn parse_touches(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("invalid touch counts {s:?} (expected e.g. 1-20 or 5,10,15)"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.contains(&0) {
        return Err(Error::Config("touch counts start at 1".into()));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// File-name-safe form of a method label.
pub fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}
