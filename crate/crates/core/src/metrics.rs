//! IPCW-weighted Brier score for right-censored data and its trapezoidal
//! time integral.

use std::sync::Arc;

use crate::cobra::PredictionTable;
use crate::data::TimeGrid;
use crate::error::{Error, Result};
use crate::estimators::{CensoringSurvival, StepFunction};

/// Survival probabilities on a shared grid. Between grid points the curve is
/// a right-continuous step; before the first point it is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    grid: Arc<TimeGrid>,
    values: Vec<f64>,
}

impl SurvivalCurve {
    pub fn new(grid: Arc<TimeGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Prediction(format!(
                "curve has {} values for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Prediction(
                "survival values must lie in [0,1]".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Prediction(
                "survival curve must be non-increasing".into(),
            ));
        }
        Ok(SurvivalCurve { grid, values })
    }

    /// Clips into [0,1] and applies a running minimum.
    pub fn enforced(grid: Arc<TimeGrid>, mut values: Vec<f64>) -> Result<Self> {
        let mut running = 1.0f64;
        for v in values.iter_mut() {
            let c = if v.is_nan() {
                running
            } else {
                v.clamp(0.0, 1.0)
            };
            running = running.min(c);
            *v = running;
        }
        Self::new(grid, values)
    }

    pub fn from_step(grid: Arc<TimeGrid>, f: &StepFunction) -> Result<Self> {
        let values = grid.times().iter().map(|&t| f.eval(t)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, t: f64) -> f64 {
        match self.grid.floor_index(t) {
            Some(k) => self.values[k],
            None => 1.0,
        }
    }
}

fn check_cohort(n_curves: usize, subjects: &[(f64, bool)]) -> Result<()> {
    if subjects.is_empty() {
        return Err(Error::Metric("empty subject list".into()));
    }
    if n_curves != subjects.len() {
        return Err(Error::Metric(format!(
            "{n_curves} curves for {} subjects",
            subjects.len()
        )));
    }
    Ok(())
}

/// Censored Brier score at time `t`. Subjects censored at or before `t`
/// contribute zero; event weights use the left limit `Ĝ(y_i-)`.
pub fn brier_score_censored(
    curves: &[SurvivalCurve],
    subjects: &[(f64, bool)],
    g_hat: &CensoringSurvival,
    t: f64,
) -> Result<f64> {
    check_cohort(curves.len(), subjects)?;
    let g_t = g_hat.eval(t);
    let total: f64 = curves
        .iter()
        .zip(subjects)
        .map(|(curve, &(y, event))| {
            let s = curve.at(t);
            if y <= t && event {
                s * s / g_hat.eval_left_limit(y)
            } else if y > t {
                (1.0 - s) * (1.0 - s) / g_t
            } else {
                0.0
            }
        })
        .sum();
    Ok(total / subjects.len() as f64)
}

/// Trapezoidal integral of `values` sampled at `times`.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (v[0] + v[1]) * (t[1] - t[0]))
        .sum()
}

/// Precomputed IPCW weights for one scoring cohort over one grid, so many
/// candidate predictions can be scored cheaply.
#[derive(Debug, Clone)]
pub struct IbsScorer {
    grid: TimeGrid,
    /// Per subject, per grid time: (weight, target). Zero weight when the
    /// subject was censored before the time.
    terms: Vec<Vec<(f64, f64)>>,
}

impl IbsScorer {
    pub fn new(
        subjects: &[(f64, bool)],
        g_hat: &CensoringSurvival,
        grid: &TimeGrid,
    ) -> Result<Self> {
        if subjects.is_empty() {
            return Err(Error::Metric("empty subject list".into()));
        }
        if grid.end().partial_cmp(&grid.start()) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Metric("degenerate integration interval".into()));
        }
        let g_grid: Vec<f64> = grid.times().iter().map(|&t| g_hat.eval(t)).collect();
        let terms = subjects
            .iter()
            .map(|&(y, event)| {
                let g_y = g_hat.eval_left_limit(y);
                grid.times()
                    .iter()
                    .zip(&g_grid)
                    .map(|(&t, &g_t)| {
                        if y <= t && event {
                            (1.0 / g_y, 0.0)
                        } else if y > t {
                            (1.0 / g_t, 1.0)
                        } else {
                            (0.0, 0.0)
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(IbsScorer {
            grid: grid.clone(),
            terms,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n_subjects(&self) -> usize {
        self.terms.len()
    }

    /// Brier score at every grid time for predictions given as rows of
    /// values on `curve_grid`; `row(i)` yields subject `i`'s curve.
    pub fn profile_rows<'a>(
        &self,
        curve_grid: &TimeGrid,
        row: impl Fn(usize) -> &'a [f64],
    ) -> Vec<f64> {
        let idx: Vec<Option<usize>> = self
            .grid
            .times()
            .iter()
            .map(|&t| curve_grid.floor_index(t))
            .collect();
        let mut bs = vec![0.0; self.grid.len()];
        for (i, terms) in self.terms.iter().enumerate() {
            let values = row(i);
            for ((acc, &(w, target)), k) in bs.iter_mut().zip(terms).zip(&idx) {
                if w != 0.0 {
                    let s = k.map_or(1.0, |k| values[k]);
                    *acc += w * (target - s) * (target - s);
                }
            }
        }
        let n = self.terms.len() as f64;
        bs.iter_mut().for_each(|v| *v /= n);
        bs
    }

    pub fn score_rows<'a>(&self, curve_grid: &TimeGrid, row: impl Fn(usize) -> &'a [f64]) -> f64 {
        let bs = self.profile_rows(curve_grid, row);
        trapezoid(self.grid.times(), &bs) / (self.grid.end() - self.grid.start())
    }

    pub fn score(&self, curves: &[SurvivalCurve]) -> Result<f64> {
        if curves.len() != self.terms.len() {
            return Err(Error::Metric(format!(
                "{} curves for {} subjects",
                curves.len(),
                self.terms.len()
            )));
        }
        if curves.iter().any(|c| c.grid() != curves[0].grid()) {
            let bs: Vec<f64> = (0..self.grid.len())
                .map(|j| {
                    let t = self.grid.times()[j];
                    curves
                        .iter()
                        .zip(&self.terms)
                        .map(|(c, terms)| {
                            let (w, target) = terms[j];
                            w * (target - c.at(t)).powi(2)
                        })
                        .sum::<f64>()
                        / curves.len() as f64
                })
                .collect();
            return Ok(trapezoid(self.grid.times(), &bs) / (self.grid.end() - self.grid.start()));
        }
        Ok(self.score_rows(curves[0].grid(), |i| curves[i].values()))
    }
}

/// `(1 / (t_max - t_1)) * ∫ BS(t) dt` over `grid`, trapezoidal rule.
pub fn integrated_brier_score(
    curves: &[SurvivalCurve],
    subjects: &[(f64, bool)],
    g_hat: &CensoringSurvival,
    grid: &TimeGrid,
) -> Result<f64> {
    check_cohort(curves.len(), subjects)?;
    IbsScorer::new(subjects, g_hat, grid)?.score(curves)
}

/// IBS of each machine's table rows against the table's own outcomes
/// (or any cohort aligned with the table points).
pub fn per_machine_ibs(
    table: &PredictionTable,
    subjects: &[(f64, bool)],
    g_hat: &CensoringSurvival,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    check_cohort(table.points(), subjects)?;
    let scorer = IbsScorer::new(subjects, g_hat, grid)?;
    Ok((0..table.machines())
        .map(|m| scorer.score_rows(table.grid(), |i| table.row(m, i)))
        .collect())
}
