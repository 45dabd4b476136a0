use rayon::prelude::*;

use super::{fold_seed, make_folds, ConfusionMatrix, EvalReport, FoldConfusion, MethodDescriptor, PipelineConfig};
use crate::dataset::{Dataset, ObjectId, TactileFrame};
use crate::error::{Error, Result};
use crate::fusion::fuse_with;
use crate::recognition::{classify, decide, DistanceSource, DistanceVector, Method, ModelLibrary};

/// Result of one pipeline on one query.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodOutcome {
    Ranked(DistanceVector),
    /// Every reference matched equally well (all raw distances zero), so nothing can be ranked.
    Degenerate,
}

/// Outcomes of all three pipelines for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryScores {
    object_ids: Vec<ObjectId>,
    outcomes: [MethodOutcome; 3],
}

fn slot(m: Method) -> usize {
    match m {
        Method::Icp => 0,
        Method::Bow => 1,
        Method::Iclap => 2,
    }
}

impl QueryScores {
    pub fn outcome(&self, m: Method) -> &MethodOutcome {
        &self.outcomes[slot(m)]
    }

    /// Decision under `method`, or `None` when it cannot rank the references.
    ///
    /// Inside a fusion a degenerate input contributes a vector of zeros.
    pub fn decide(&self, method: &MethodDescriptor) -> Result<Option<ObjectId>> {
        match method {
            MethodDescriptor::Single(m) => match self.outcome(*m) {
                MethodOutcome::Ranked(v) => decide(v).map(Some),
                MethodOutcome::Degenerate => Ok(None),
            },
            MethodDescriptor::Fusion(spec) => {
                let zeros: Vec<DistanceVector> = Method::ALL
                    .iter()
                    .map(|&m| DistanceVector {
                        source: DistanceSource::Single(m),
                        object_ids: self.object_ids.clone(),
                        distances: vec![0.0; self.object_ids.len()],
                    })
                    .collect();
                let fused = fuse_with(spec, |m| match self.outcome(m) {
                    MethodOutcome::Ranked(v) => Some(v),
                    MethodOutcome::Degenerate => Some(&zeros[slot(m)]),
                });
                match fused {
                    Ok(v) => decide(&v).map(Some),
                    Err(Error::Classification(_)) => Ok(None),
                    Err(e) => Err(e),
                }
            }
        }
    }
}

/// Runs all three pipelines on `frames` against `library`.
pub fn score_query(library: &ModelLibrary, config: &PipelineConfig, frames: &[TactileFrame]) -> Result<QueryScores> {
    let obs = library.observe(frames)?;
    let run = |m: Method| match classify(m, &obs, library, &config.registration) {
        Ok(v) => Ok(MethodOutcome::Ranked(v)),
        Err(Error::Classification(_)) => Ok(MethodOutcome::Degenerate),
        Err(e) => Err(e),
    };
    Ok(QueryScores {
        object_ids: library.object_ids(),
        outcomes: [run(Method::Icp)?, run(Method::Bow)?, run(Method::Iclap)?],
    })
}

/// Per-touch-count scores for one held-out trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TestScores {
    pub object_id: ObjectId,
    pub per_touch: Vec<QueryScores>,
}

#[derive(Debug, Clone, PartialEq)]
struct FoldScores {
    fold: usize,
    held_out_trial: usize,
    tests: Vec<TestScores>,
}

/// Distance vectors of every pipeline for every fold, test object and touch count.
/// Any single method or fusion can be evaluated from it without re-running registration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    object_ids: Vec<ObjectId>,
    touch_counts: Vec<usize>,
    folds: Vec<FoldScores>,
}

/// Builds every fold's library and scores every held-out trace.
///
/// Work is spread over the current rayon pool; results are collected in fold/object order,
/// so the table does not depend on the number of threads.
pub fn score_dataset(dataset: &Dataset, config: &PipelineConfig, touch_counts: &[usize], seed: u64) -> Result<ScoreTable> {
    config.validate()?;
    let folds = make_folds(dataset, touch_counts)?;
    let libraries = folds
        .par_iter()
        .map(|f| ModelLibrary::build(&f.training, config.extractor, config.k, fold_seed(seed, f.index)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = folds
        .iter()
        .enumerate()
        .flat_map(|(fi, f)| (0..f.tests.len()).map(move |ti| (fi, ti)))
        .collect();
    let scored = jobs
        .par_iter()
        .map(|&(fi, ti)| {
            let test = folds[fi].tests[ti];
            let per_touch = touch_counts
                .iter()
                .map(|&t| score_query(&libraries[fi], config, test.truncated(t)))
                .collect::<Result<Vec<_>>>()?;
            Ok(TestScores {
                object_id: test.object_id,
                per_touch,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut scored = scored.into_iter();
    let folds = folds
        .iter()
        .map(|f| FoldScores {
            fold: f.index,
            held_out_trial: f.held_out_trial,
            tests: scored.by_ref().take(f.tests.len()).collect(),
        })
        .collect();
    Ok(ScoreTable {
        object_ids: dataset.object_ids(),
        touch_counts: touch_counts.to_vec(),
        folds,
    })
}

impl ScoreTable {
    pub fn touch_counts(&self) -> &[usize] {
        &self.touch_counts
    }

    pub fn object_ids(&self) -> &[ObjectId] {
        &self.object_ids
    }

    pub fn fold_count(&self) -> usize {
        self.folds.len()
    }

    /// Scores of the held-out trace of `object` in fold `fold`.
    pub fn test_scores(&self, fold: usize, object: ObjectId) -> Option<&TestScores> {
        self.folds.get(fold)?.tests.iter().find(|t| t.object_id == object)
    }

    pub fn report(&self, method: &MethodDescriptor) -> Result<EvalReport> {
        let confusions = self
            .folds
            .iter()
            .map(|f| {
                let mut per_touch: Vec<ConfusionMatrix> = self
                    .touch_counts
                    .iter()
                    .map(|_| ConfusionMatrix::new(self.object_ids.clone()))
                    .collect();
                for test in &f.tests {
                    for (ti, q) in test.per_touch.iter().enumerate() {
                        per_touch[ti].record(test.object_id, q.decide(method)?);
                    }
                }
                Ok(FoldConfusion {
                    fold: f.fold,
                    held_out_trial: f.held_out_trial,
                    per_touch,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EvalReport::from_confusions(method.label(), self.touch_counts.clone(), confusions))
    }
}
