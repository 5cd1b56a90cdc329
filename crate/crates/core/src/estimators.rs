//! Kaplan-Meier, Nelson-Aalen and censoring-survival estimators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied when evaluating the censoring survival Ĝ.
pub const CENSORING_FLOOR: f64 = 1e-8;

/// Which side of a knot the jump belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Continuity {
    /// `f(t)` takes the value of the largest knot `<= t`.
    Right,
    /// `f(t)` takes the value of the largest knot `< t`.
    Left,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
    value_before_first: f64,
    continuity: Continuity,
}

impl StepFunction {
    pub fn new(
        knots: Vec<f64>,
        values: Vec<f64>,
        value_before_first: f64,
        continuity: Continuity,
    ) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(Error::Estimation(format!(
                "{} knots but {} values",
                knots.len(),
                values.len()
            )));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Estimation(
                "knots must be strictly increasing".into(),
            ));
        }
        Ok(StepFunction {
            knots,
            values,
            value_before_first,
            continuity,
        })
    }

    pub fn constant(value: f64) -> Self {
        StepFunction {
            knots: Vec::new(),
            values: Vec::new(),
            value_before_first: value,
            continuity: Continuity::Right,
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_before_first(&self) -> f64 {
        self.value_before_first
    }

    pub fn continuity(&self) -> Continuity {
        self.continuity
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.continuity {
            Continuity::Right => self.eval_right(t),
            Continuity::Left => self.eval_left_limit(t),
        }
    }

    fn eval_right(&self, t: f64) -> f64 {
        let k = self.knots.partition_point(|&x| x <= t);
        if k == 0 {
            self.value_before_first
        } else {
            self.values[k - 1]
        }
    }

    /// `lim_{s -> t-} f(s)`: value of the largest knot strictly below `t`.
    pub fn eval_left_limit(&self, t: f64) -> f64 {
        let k = self.knots.partition_point(|&x| x < t);
        if k == 0 {
            self.value_before_first
        } else {
            self.values[k - 1]
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> StepFunction {
        StepFunction {
            knots: self.knots.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            value_before_first: f(self.value_before_first),
            continuity: self.continuity,
        }
    }
}

/// Right-continuous evaluation of a step function.
pub fn eval_step(f: &StepFunction, t: f64) -> f64 {
    f.eval(t)
}

/// Distinct event time with its event count and risk-set size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RiskPoint {
    pub time: f64,
    pub deaths: usize,
    pub at_risk: usize,
}

/// Risk table over distinct event times. Subjects whose follow-up equals an
/// event time count as at risk there, i.e. events precede censorings on ties.
pub(crate) fn risk_table(times: &[f64], events: &[bool]) -> Result<Vec<RiskPoint>> {
    if times.is_empty() {
        return Err(Error::Estimation("no observations".into()));
    }
    if times.len() != events.len() {
        return Err(Error::Estimation(format!(
            "{} times but {} event flags",
            times.len(),
            events.len()
        )));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Estimation(
            "times must be finite and nonnegative".into(),
        ));
    }
    let mut obs: Vec<(f64, bool)> = times.iter().copied().zip(events.iter().copied()).collect();
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut table = Vec::new();
    let mut at_risk = obs.len();
    let mut i = 0;
    while i < obs.len() {
        let t = obs[i].0;
        let mut j = i;
        let mut deaths = 0;
        while j < obs.len() && obs[j].0 == t {
            deaths += usize::from(obs[j].1);
            j += 1;
        }
        if deaths > 0 {
            table.push(RiskPoint {
                time: t,
                deaths,
                at_risk,
            });
        }
        at_risk -= j - i;
        i = j;
    }
    Ok(table)
}

/// Cumulative hazard `H(t) = sum_{t_i < t} d_i / n_i`. The strict inequality
/// makes the result left-continuous at event times.
pub fn nelson_aalen(times: &[f64], events: &[bool]) -> Result<StepFunction> {
    let table = risk_table(times, events)?;
    let mut h = 0.0;
    let mut knots = Vec::with_capacity(table.len());
    let mut values = Vec::with_capacity(table.len());
    for p in &table {
        h += p.deaths as f64 / p.at_risk as f64;
        knots.push(p.time);
        values.push(h);
    }
    StepFunction::new(knots, values, 0.0, Continuity::Left)
}

/// Product-limit survival `S(t) = prod_{t_i <= t} (1 - d_i / n_i)`.
pub fn kaplan_meier(times: &[f64], events: &[bool]) -> Result<StepFunction> {
    let table = risk_table(times, events)?;
    let mut s = 1.0;
    let mut knots = Vec::with_capacity(table.len());
    let mut values = Vec::with_capacity(table.len());
    for p in &table {
        s *= 1.0 - p.deaths as f64 / p.at_risk as f64;
        knots.push(p.time);
        values.push(s);
    }
    StepFunction::new(knots, values, 1.0, Continuity::Right)
}

/// Survival function of the censoring time, used for IPCW weights.
/// Evaluations are clamped below at [`CENSORING_FLOOR`].
#[derive(Debug, Clone, PartialEq)]
pub struct CensoringSurvival {
    raw: StepFunction,
}

impl CensoringSurvival {
    pub fn raw(&self) -> &StepFunction {
        &self.raw
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.raw.eval(t).max(CENSORING_FLOOR)
    }

    pub fn eval_left_limit(&self, t: f64) -> f64 {
        self.raw.eval_left_limit(t).max(CENSORING_FLOOR)
    }
}

pub fn censoring_survival(times: &[f64], events: &[bool]) -> Result<CensoringSurvival> {
    let flipped: Vec<bool> = events.iter().map(|e| !e).collect();
    Ok(CensoringSurvival {
        raw: kaplan_meier(times, &flipped)?,
    })
}

pub fn censoring_survival_of(outcomes: &[(f64, bool)]) -> Result<CensoringSurvival> {
    let (times, events): (Vec<f64>, Vec<bool>) = outcomes.iter().copied().unzip();
    censoring_survival(&times, &events)
}
