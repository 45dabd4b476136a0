//! Leave-one-out evaluation over exploration trials, accuracy-versus-touches curves and
//! exhaustive weight sweeps for weighted-sum fusion.
//!
//! Fold `f` holds out trial `f` of every object at once; the codebook and the model library
//! are rebuilt from the remaining trials only. A test trace truncated to its first `t` frames
//! is one `t`-touch query.

mod report;
mod scores;
mod sweep;

use serde::{Deserialize, Serialize};

pub use report::{accuracy_csv, ConfusionMatrix, EvalReport, FoldConfusion};
pub use scores::{score_dataset, score_query, MethodOutcome, QueryScores, ScoreTable, TestScores};
pub use sweep::{sweep_grid, weight_sweep, SweepRow, SweepTable, DEFAULT_DESIGNATED_TOUCHES, DEFAULT_GRID_STEP};

use crate::codebook::{ExtractorId, DEFAULT_DICTIONARY_SIZE};
use crate::dataset::{mix_seed, Dataset, ExplorationTrace, ObjectId};
use crate::error::{Error, Result};
use crate::fusion::FusionSpec;
use crate::recognition::Method;
use crate::registration::RegistrationConfig;

/// Touch counts used for the accuracy curves: 1 through 20.
pub fn default_touch_counts() -> Vec<usize> {
    (1..=20).collect()
}

/// Everything that determines how a fold's library is built and queried.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub extractor: ExtractorId,
    pub k: usize,
    pub registration: RegistrationConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            extractor: ExtractorId::RawPatch,
            k: DEFAULT_DICTIONARY_SIZE,
            registration: RegistrationConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be ≥ 1".into()));
        }
        self.registration.validate()
    }
}

/// A single pipeline or a fusion of pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MethodDescriptor {
    Single(Method),
    Fusion(FusionSpec),
}

impl MethodDescriptor {
    pub fn label(&self) -> String {
        match self {
            MethodDescriptor::Single(m) => m.to_string(),
            MethodDescriptor::Fusion(spec) => spec.to_string(),
        }
    }
}

impl From<Method> for MethodDescriptor {
    fn from(m: Method) -> Self {
        MethodDescriptor::Single(m)
    }
}

impl From<FusionSpec> for MethodDescriptor {
    fn from(s: FusionSpec) -> Self {
        MethodDescriptor::Fusion(s)
    }
}

/// One leave-one-out fold.
#[derive(Debug, Clone)]
pub struct Fold<'a> {
    pub index: usize,
    pub held_out_trial: usize,
    pub training: Vec<&'a ExplorationTrace>,
    /// One trace per object, ordered by object id.
    pub tests: Vec<&'a ExplorationTrace>,
}

/// Checks the dataset supports leave-one-out at the given touch counts and splits it into folds.
pub fn make_folds<'a>(dataset: &'a Dataset, touch_counts: &[usize]) -> Result<Vec<Fold<'a>>> {
    let objects = dataset.object_ids();
    let trials = dataset.trial_indices();
    if objects.len() < 2 {
        return Err(Error::InsufficientData("need at least two objects".into()));
    }
    if trials.len() < 2 {
        return Err(Error::InsufficientData(
            "leave-one-out needs at least two trials per object".into(),
        ));
    }
    for &o in &objects {
        for &t in &trials {
            if dataset.trace(o, t).is_none() {
                return Err(Error::InsufficientData(format!(
                    "object {o} is missing trial {t}"
                )));
            }
        }
    }
    if touch_counts.is_empty() {
        return Err(Error::Config("no touch counts requested".into()));
    }
    let available = dataset.min_frames();
    if let Some(&t) = touch_counts.iter().find(|&&t| t == 0 || t > available) {
        return Err(Error::Config(format!(
            "touch count {t} outside 1..={available} available frames"
        )));
    }
    Ok(trials
        .iter()
        .enumerate()
        .map(|(index, &held_out)| Fold {
            index,
            held_out_trial: held_out,
            training: dataset
                .traces
                .iter()
                .filter(|t| t.trial_index != held_out)
                .collect(),
            tests: objects
                .iter()
                .map(|&o| dataset.trace(o, held_out).expect("checked above"))
                .collect(),
        })
        .collect())
}

/// Something that can be trained on a fold and then asked to name a test object.
pub trait FoldClassifier {
    type Trained;

    fn name(&self) -> String;

    fn train(&self, training: &[&ExplorationTrace], fold_seed: u64) -> Result<Self::Trained>;

    /// `Ok(None)` means the classifier abstains, which counts as a miss.
    fn predict(
        &self,
        trained: &mut Self::Trained,
        test: &ExplorationTrace,
        touches: usize,
    ) -> Result<Option<ObjectId>>;
}

/// Seed handed to a fold's training step.
pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    mix_seed(seed, 0xF01D_0000 + fold as u64)
}

/// Leave-one-out accuracy of an arbitrary classifier, sequentially over folds.
pub fn leave_one_out<C: FoldClassifier>(
    dataset: &Dataset,
    classifier: &C,
    touch_counts: &[usize],
    seed: u64,
) -> Result<EvalReport> {
    let folds = make_folds(dataset, touch_counts)?;
    let objects = dataset.object_ids();
    let mut confusions = Vec::with_capacity(folds.len());
    for fold in &folds {
        let mut trained = classifier.train(&fold.training, fold_seed(seed, fold.index))?;
        let mut per_touch: Vec<ConfusionMatrix> =
            touch_counts.iter().map(|_| ConfusionMatrix::new(objects.clone())).collect();
        for test in &fold.tests {
            for (ti, &t) in touch_counts.iter().enumerate() {
                let predicted = classifier.predict(&mut trained, test, t)?;
                per_touch[ti].record(test.object_id, predicted);
            }
        }
        confusions.push(FoldConfusion {
            fold: fold.index,
            held_out_trial: fold.held_out_trial,
            per_touch,
        });
    }
    Ok(EvalReport::from_confusions(classifier.name(), touch_counts.to_vec(), confusions))
}

/// [`FoldClassifier`] running the recognition pipelines directly, one query at a time.
#[derive(Debug, Clone)]
pub struct PipelineClassifier {
    pub config: PipelineConfig,
    pub method: MethodDescriptor,
}

impl FoldClassifier for PipelineClassifier {
    type Trained = crate::recognition::ModelLibrary;

    fn name(&self) -> String {
        self.method.label()
    }

    fn train(&self, training: &[&ExplorationTrace], fold_seed: u64) -> Result<Self::Trained> {
        crate::recognition::ModelLibrary::build(training, self.config.extractor, self.config.k, fold_seed)
    }

    fn predict(
        &self,
        library: &mut Self::Trained,
        test: &ExplorationTrace,
        touches: usize,
    ) -> Result<Option<ObjectId>> {
        let scores = score_query(library, &self.config, test.truncated(touches))?;
        scores.decide(&self.method)
    }
}

/// Accuracy reports for several descriptors from one shared score table.
pub fn reports_for(table: &ScoreTable, methods: &[MethodDescriptor]) -> Result<Vec<EvalReport>> {
    methods.iter().map(|m| table.report(m)).collect()
}
