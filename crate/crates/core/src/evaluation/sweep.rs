use std::fmt::Write as _;

use rayon::prelude::*;

use super::{EvalReport, MethodDescriptor, ScoreTable};
use crate::error::{Error, Result};
use crate::fusion::{FusionFamily, FusionSpec};

pub const DEFAULT_GRID_STEP: f64 = 0.1;

/// Touch count at which sweep rows are ranked.
pub const DEFAULT_DESIGNATED_TOUCHES: usize = 15;

/// Interior grid of the weight simplex: every weight a positive multiple of `step`, summing to 1.
///
/// Two inputs at step 0.1 give (0.1, 0.9) through (0.9, 0.1); three inputs give the 36 triples
/// whose first two weights lie in 0.1..0.8.
pub fn sweep_grid(family: FusionFamily, step: f64) -> Result<Vec<Vec<f64>>> {
    if !(step.is_finite() && step > 0.0 && step <= 1.0) {
        return Err(Error::Config(format!("grid step {step} must lie in (0, 1]")));
    }
    let n = (1.0 / step).round() as usize;
    if (n as f64 * step - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("grid step {step} does not divide 1")));
    }
    let w = |i: usize| i as f64 / n as f64;
    let grid: Vec<Vec<f64>> = match family.inputs().len() {
        2 => (1..n).map(|i| vec![w(i), w(n - i)]).collect(),
        _ => (1..n)
            .flat_map(|i| (1..n.saturating_sub(i)).map(move |j| (i, j)))
            .map(|(i, j)| vec![w(i), w(j), w(n - i - j)])
            .collect(),
    };
    if grid.is_empty() {
        return Err(Error::Config(format!(
            "grid step {step} leaves no interior weights for {family}"
        )));
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub weights: Vec<f64>,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub family: FusionFamily,
    pub step: f64,
    pub designated_touches: usize,
    pub rows: Vec<SweepRow>,
    /// Index of the first row with the highest accuracy at `designated_touches`.
    pub best: usize,
}

impl SweepTable {
    pub fn best_row(&self) -> &SweepRow {
        &self.rows[self.best]
    }

    pub fn best_accuracy(&self) -> f64 {
        self.best_row()
            .report
            .accuracy_at(self.designated_touches)
            .expect("designated touch count checked at construction")
    }

    /// One row per grid point: the weights, then accuracy at every touch count.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let cols: Vec<String> = self
            .family
            .inputs()
            .iter()
            .map(|m| format!("w_{m}"))
            .chain(self.rows[0].report.touch_counts.iter().map(|t| format!("acc_{t}")))
            .collect();
        let _ = writeln!(out, "{}", cols.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row
                .weights
                .iter()
                .map(|w| format!("{w:.4}"))
                .chain(row.report.accuracies.iter().map(|a| format!("{a:.6}")))
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// `best <family> weights=<w1,w2,..> accuracy@<t>=<acc>`
    pub fn best_line(&self) -> String {
        let w: Vec<String> = self.best_row().weights.iter().map(|w| format!("{w:.2}")).collect();
        format!(
            "best {} weights={} accuracy@{}={:.4}",
            self.family,
            w.join(","),
            self.designated_touches,
            self.best_accuracy()
        )
    }
}

/// Evaluates every weighted-sum grid point of `family` from precomputed scores.
pub fn weight_sweep(table: &ScoreTable, family: FusionFamily, step: f64, designated_touches: usize) -> Result<SweepTable> {
    if !table.touch_counts().contains(&designated_touches) {
        return Err(Error::Config(format!(
            "designated touch count {designated_touches} was not evaluated"
        )));
    }
    let grid = sweep_grid(family, step)?;
    let rows = grid
        .into_par_iter()
        .map(|weights| {
            let spec = FusionSpec::weighted_sum(family.inputs(), weights.clone())?;
            let report = table.report(&MethodDescriptor::Fusion(spec))?;
            Ok(SweepRow { weights, report })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    let acc = |r: &SweepRow| r.report.accuracy_at(designated_touches).unwrap_or(0.0);
    for (i, r) in rows.iter().enumerate() {
        if acc(r) > acc(&rows[best]) {
            best = i;
        }
    }
    Ok(SweepTable {
        family,
        step,
        designated_touches,
        rows,
        best,
    })
}
