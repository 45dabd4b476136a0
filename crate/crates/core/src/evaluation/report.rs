use std::fmt::Write as _;

use crate::dataset::ObjectId;
use crate::error::{Error, Result};

/// Counts of (true object, predicted object) pairs, plus abstentions per true object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    object_ids: Vec<ObjectId>,
    counts: Vec<Vec<u64>>,
    abstained: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(object_ids: Vec<ObjectId>) -> Self {
        let n = object_ids.len();
        ConfusionMatrix {
            object_ids,
            counts: vec![vec![0; n]; n],
            abstained: vec![0; n],
        }
    }

    fn index(&self, id: ObjectId) -> usize {
        self.object_ids
            .iter()
            .position(|&o| o == id)
            .unwrap_or_else(|| panic!("object {id} is not part of this confusion matrix"))
    }

    /// Records one query. `None` is an abstention and counts against accuracy.
    pub fn record(&mut self, truth: ObjectId, predicted: Option<ObjectId>) {
        let t = self.index(truth);
        match predicted {
            Some(p) => {
                let p = self.index(p);
                self.counts[t][p] += 1;
            }
            None => self.abstained[t] += 1,
        }
    }

    pub fn object_ids(&self) -> &[ObjectId] {
        &self.object_ids
    }

    pub fn count(&self, truth: ObjectId, predicted: ObjectId) -> u64 {
        self.counts[self.index(truth)][self.index(predicted)]
    }

    pub fn abstained(&self, truth: ObjectId) -> u64 {
        self.abstained[self.index(truth)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum::<u64>() + self.abstained.iter().sum::<u64>()
    }

    pub fn correct(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.correct() as f64 / n as f64,
        }
    }

    /// Adds another matrix over the same objects.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.object_ids, other.object_ids, "merging matrices over different objects");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (x, y) in self.abstained.iter_mut().zip(&other.abstained) {
            *x += y;
        }
    }
}

/// Confusion matrices of one fold, one per touch count.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldConfusion {
    pub fold: usize,
    pub held_out_trial: usize,
    pub per_touch: Vec<ConfusionMatrix>,
}

/// Leave-one-out accuracy curve of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub label: String,
    pub touch_counts: Vec<usize>,
    /// Fraction of correct decisions over every fold, aligned with `touch_counts`.
    pub accuracies: Vec<f64>,
    /// Confusion summed over folds, aligned with `touch_counts`.
    pub confusion: Vec<ConfusionMatrix>,
    pub folds: Vec<FoldConfusion>,
}

impl EvalReport {
    pub fn from_confusions(label: String, touch_counts: Vec<usize>, folds: Vec<FoldConfusion>) -> Self {
        let confusion: Vec<ConfusionMatrix> = (0..touch_counts.len())
            .map(|ti| {
                let mut iter = folds.iter().map(|f| &f.per_touch[ti]);
                let mut total = iter.next().expect("at least one fold").clone();
                for m in iter {
                    total.merge(m);
                }
                total
            })
            .collect();
        EvalReport {
            label,
            accuracies: confusion.iter().map(ConfusionMatrix::accuracy).collect(),
            touch_counts,
            confusion,
            folds,
        }
    }

    pub fn accuracy_at(&self, touches: usize) -> Option<f64> {
        let i = self.touch_counts.iter().position(|&t| t == touches)?;
        Some(self.accuracies[i])
    }

    /// Long-format confusion table: `touch_count,true_id,predicted_id,count`.
    /// Abstentions appear with predicted id `none`; zero cells are omitted.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("touch_count,true_id,predicted_id,count\n");
        for (&t, m) in self.touch_counts.iter().zip(&self.confusion) {
            for &truth in m.object_ids() {
                for &pred in m.object_ids() {
                    let c = m.count(truth, pred);
                    if c > 0 {
                        let _ = writeln!(out, "{t},{truth},{pred},{c}");
                    }
                }
                let a = m.abstained(truth);
                if a > 0 {
                    let _ = writeln!(out, "{t},{truth},none,{a}");
                }
            }
        }
        out
    }
}

/// `touch_count,<label>,...` with one accuracy column per report.
pub fn accuracy_csv(reports: &[EvalReport]) -> Result<String> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Config("no reports to tabulate".into()))?;
    if reports.iter().any(|r| r.touch_counts != first.touch_counts) {
        return Err(Error::Config("reports use different touch counts".into()));
    }
    let mut out = String::from("touch_count");
    for r in reports {
        out.push(',');
        out.push_str(&r.label);
    }
    out.push('\n');
    for (i, t) in first.touch_counts.iter().enumerate() {
        let _ = write!(out, "{t}");
        for r in reports {
            let _ = write!(out, ",{:.6}", r.accuracies[i]);
        }
        out.push('\n');
    }
    Ok(out)
}
