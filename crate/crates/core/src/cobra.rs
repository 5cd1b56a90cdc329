//! Survival COBRA aggregation.
//!
//! A query is passed through every machine of the pool; a point `i` of the
//! aggregation set D_l joins the query's proximity set when at least
//! `alpha * M` machines put their prediction for `i` within `epsilon` of
//! their prediction for the query (distance measured per machine on the
//! whole curve, Frobenius or sup norm).
//!
//! * **Straight** fits a Nelson-Aalen cumulative hazard to the outcomes of
//!   the proximity set and returns `exp(-H)`.
//! * **Weighted** averages each machine's curves over the proximity set and
//!   combines the machine averages with weights derived from each machine's
//!   IBS on D_l (lower IBS, larger weight).
//!
//! An empty proximity set triggers up to [`MAX_WIDENINGS`] widenings of
//! epsilon by [`WIDENING_FACTOR`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::data::{SurvivalDataset, TimeGrid};
use crate::error::{Error, Result};
use crate::estimators::{censoring_survival_of, nelson_aalen};
use crate::metrics::{per_machine_ibs, SurvivalCurve};
use crate::par::{self, Parallelism};
use crate::tree::SurvivalTree;

pub const WIDENING_FACTOR: f64 = 1.5;
pub const MAX_WIDENINGS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Frobenius,
    Sup,
}

impl NormKind {
    pub const ALL: [NormKind; 2] = [NormKind::Frobenius, NormKind::Sup];

    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            NormKind::Frobenius => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            NormKind::Sup => diffs.fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Straight,
    Weighted,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Weighted, Variant::Straight];
}

/// How machine IBS values become combination weights in the Weighted variant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    /// `(1 - IBS_k / sum IBS) / (M - 1)`: nonnegative, sums to one.
    #[default]
    Complement,
    /// `(1/M) * IBS_k / sum IBS`, taken at face value.
    Literal,
}

macro_rules! impl_text_enum {
    ($ty:ty { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($text => Ok(Self::$variant),)+
                    other => Err(Error::Params(format!(
                        "unknown {} `{other}`", stringify!($ty)
                    ))),
                }
            }
        }
    };
}

impl_text_enum!(NormKind { Frobenius => "frobenius", Sup => "sup" });
impl_text_enum!(Variant { Straight => "straight", Weighted => "weighted" });
impl_text_enum!(WeightScheme { Complement => "complement", Literal => "literal" });

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CobraParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub norm: NormKind,
    pub variant: Variant,
}

impl CobraParams {
    pub fn validate(&self, machines: usize) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(Error::Params(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        let k = self.alpha * machines as f64;
        if !k.is_finite()
            || (k - k.round()).abs() > 1e-9
            || k.round() < 1.0
            || k.round() > machines as f64
        {
            return Err(Error::Params(format!(
                "alpha * M must be an integer in [1, {machines}], got {}",
                k
            )));
        }
        Ok(())
    }

    /// Number of machines that must agree, `alpha * M`.
    pub fn required_agreement(&self, machines: usize) -> usize {
        (self.alpha * machines as f64).round() as usize
    }
}

/// Machine predictions on every D_l point, stored machine-major:
/// `values[(m * points + i) * T + t]`.
#[derive(Debug, Clone)]
pub struct PredictionTable {
    machines: usize,
    points: usize,
    grid: Arc<TimeGrid>,
    values: Vec<f64>,
    outcomes: Vec<(f64, bool)>,
}

impl PredictionTable {
    pub fn new(
        grid: Arc<TimeGrid>,
        machines: usize,
        points: usize,
        values: Vec<f64>,
        outcomes: Vec<(f64, bool)>,
    ) -> Result<Self> {
        if machines == 0 || points == 0 {
            return Err(Error::Params(
                "prediction table needs machines and points".into(),
            ));
        }
        if values.len() != machines * points * grid.len() {
            return Err(Error::Params(format!(
                "expected {} table values, got {}",
                machines * points * grid.len(),
                values.len()
            )));
        }
        if outcomes.len() != points {
            return Err(Error::Params(format!(
                "{} outcomes for {points} points",
                outcomes.len()
            )));
        }
        let table = PredictionTable {
            machines,
            points,
            grid,
            values,
            outcomes,
        };
        for m in 0..machines {
            for i in 0..points {
                table.machine_curve(m, i)?;
            }
        }
        Ok(table)
    }

    /// Evaluates every machine on every record of `d_l`.
    pub fn build(
        pool: &[SurvivalTree],
        d_l: &SurvivalDataset,
        grid: &Arc<TimeGrid>,
        mode: Parallelism,
    ) -> Result<Self> {
        let per_machine = par::try_map_indexed(pool.len(), mode, |m| {
            let mut rows = Vec::with_capacity(d_l.n() * grid.len());
            for r in d_l.records() {
                let leaf = pool[m].leaf_survival(&r.covariates)?;
                rows.extend(grid.times().iter().map(|&t| leaf.eval(t)));
            }
            Ok::<_, Error>(rows)
        })?;
        Self::new(
            grid.clone(),
            pool.len(),
            d_l.n(),
            per_machine.concat(),
            d_l.outcomes(),
        )
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn outcomes(&self) -> &[(f64, bool)] {
        &self.outcomes
    }

    pub fn row(&self, machine: usize, point: usize) -> &[f64] {
        let t = self.grid.len();
        let start = (machine * self.points + point) * t;
        &self.values[start..start + t]
    }

    pub fn machine_curve(&self, machine: usize, point: usize) -> Result<SurvivalCurve> {
        SurvivalCurve::new(self.grid.clone(), self.row(machine, point).to_vec())
    }

    /// Per-point, per-machine distances from a query, point-major:
    /// `out[i * M + m]`.
    pub fn distances<R: AsRef<[f64]>>(&self, query_rows: &[R], norm: NormKind) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.points * self.machines);
        for i in 0..self.points {
            for (m, q) in query_rows.iter().enumerate() {
                out.push(norm.distance(q.as_ref(), self.row(m, i)));
            }
        }
        out
    }
}

pub fn machine_distance(a: &SurvivalCurve, b: &SurvivalCurve, norm: NormKind) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::Distance("curves live on different grids".into()));
    }
    Ok(norm.distance(a.values(), b.values()))
}

/// Indices whose agreement count reaches `need` at radius `epsilon`, given
/// point-major distances.
pub(crate) fn members_within(
    distances: &[f64],
    machines: usize,
    epsilon: f64,
    need: usize,
) -> Vec<usize> {
    distances
        .chunks_exact(machines)
        .enumerate()
        .filter(|(_, d)| d.iter().filter(|&&x| x <= epsilon).count() >= need)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Proximity {
    pub members: Vec<usize>,
    pub epsilon_used: f64,
    pub widenings: usize,
}

/// Proximity set with the widening fallback applied.
pub(crate) fn resolve_proximity(
    distances: &[f64],
    machines: usize,
    params: &CobraParams,
) -> Result<Proximity> {
    let need = params.required_agreement(machines);
    let mut epsilon = params.epsilon;
    for widenings in 0..=MAX_WIDENINGS {
        let members = members_within(distances, machines, epsilon, need);
        if !members.is_empty() {
            return Ok(Proximity {
                members,
                epsilon_used: epsilon,
                widenings,
            });
        }
        if widenings < MAX_WIDENINGS {
            epsilon *= WIDENING_FACTOR;
        }
    }
    let mut min_distances = vec![f64::INFINITY; machines];
    for d in distances.chunks_exact(machines) {
        for (lo, &x) in min_distances.iter_mut().zip(d) {
            *lo = lo.min(x);
        }
    }
    Err(Error::NoNeighbors {
        epsilon_used: epsilon,
        min_distances,
    })
}

fn check_query(query_preds: &[SurvivalCurve], table: &PredictionTable) -> Result<()> {
    if query_preds.len() != table.machines() {
        return Err(Error::Prediction(format!(
            "{} query predictions for {} machines",
            query_preds.len(),
            table.machines()
        )));
    }
    if query_preds.iter().any(|c| c.grid() != table.grid()) {
        return Err(Error::Distance(
            "query predictions are not on the table grid".into(),
        ));
    }
    Ok(())
}

/// Points of D_l passing the epsilon/alpha agreement test (no widening).
pub fn proximity_set(
    query_preds: &[SurvivalCurve],
    table: &PredictionTable,
    params: &CobraParams,
) -> Result<Vec<usize>> {
    check_query(query_preds, table)?;
    params.validate(table.machines())?;
    let rows: Vec<&[f64]> = query_preds.iter().map(|c| c.values()).collect();
    let dist = table.distances(&rows, params.norm);
    Ok(members_within(
        &dist,
        table.machines(),
        params.epsilon,
        params.required_agreement(table.machines()),
    ))
}

/// Complement-normalised machine weights: `(1 - IBS_k / sum) / (M - 1)`.
pub fn machine_ibs_weights(ibs: &[f64]) -> Result<Vec<f64>> {
    check_ibs(ibs)?;
    let m = ibs.len();
    if m == 1 {
        return Ok(vec![1.0]);
    }
    let total: f64 = ibs.iter().sum();
    if total == 0.0 {
        return Ok(vec![1.0 / m as f64; m]);
    }
    Ok(ibs
        .iter()
        .map(|v| (1.0 - v / total) / (m - 1) as f64)
        .collect())
}

/// Weights read literally off the displayed combination rule:
/// `(1/M) * IBS_k / sum IBS`. They sum to `1/M`.
pub fn literal_ibs_weights(ibs: &[f64]) -> Result<Vec<f64>> {
    check_ibs(ibs)?;
    let m = ibs.len() as f64;
    let total: f64 = ibs.iter().sum();
    if total == 0.0 {
        return Ok(vec![1.0 / (m * m); ibs.len()]);
    }
    Ok(ibs.iter().map(|v| v / total / m).collect())
}

fn check_ibs(ibs: &[f64]) -> Result<()> {
    if ibs.is_empty() {
        return Err(Error::Params("no machine scores".into()));
    }
    if ibs.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Params(
            "machine IBS values must be finite and >= 0".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct CobraModel {
    pool: Arc<Vec<SurvivalTree>>,
    table: Arc<PredictionTable>,
    params: CobraParams,
    scheme: WeightScheme,
    machine_ibs: Vec<f64>,
    machine_weights: Vec<f64>,
    /// `sum_k w_k r_k(X_i)` per D_l point, flattened `[i * T + t]`.
    mixture: Arc<Vec<f64>>,
}

impl CobraModel {
    /// Builds the D_l prediction table and scores each machine on D_l.
    pub fn fit(
        pool: Vec<SurvivalTree>,
        d_l: &SurvivalDataset,
        grid: Arc<TimeGrid>,
        params: CobraParams,
        scheme: WeightScheme,
        mode: Parallelism,
    ) -> Result<Self> {
        let table = PredictionTable::build(&pool, d_l, &grid, mode)?;
        let outcomes = d_l.outcomes();
        let g_hat = censoring_survival_of(&outcomes)?;
        let ibs_grid = TimeGrid::from_outcomes(&outcomes, grid.len())?;
        let ibs = per_machine_ibs(&table, &outcomes, &g_hat, &ibs_grid)?;
        Self::from_parts(pool, table, params, scheme, ibs)
    }

    pub fn from_parts(
        pool: Vec<SurvivalTree>,
        table: PredictionTable,
        params: CobraParams,
        scheme: WeightScheme,
        machine_ibs: Vec<f64>,
    ) -> Result<Self> {
        if machine_ibs.len() != table.machines() {
            return Err(Error::Params(format!(
                "{} machine scores for {} machines",
                machine_ibs.len(),
                table.machines()
            )));
        }
        if !pool.is_empty() && pool.len() != table.machines() {
            return Err(Error::Params("pool size does not match table".into()));
        }
        params.validate(table.machines())?;
        let machine_weights = match scheme {
            WeightScheme::Complement => machine_ibs_weights(&machine_ibs)?,
            WeightScheme::Literal => literal_ibs_weights(&machine_ibs)?,
        };
        let t = table.grid().len();
        let mut mixture = vec![0.0; table.points() * t];
        for (m, &w) in machine_weights.iter().enumerate() {
            for i in 0..table.points() {
                for (acc, &v) in mixture[i * t..(i + 1) * t].iter_mut().zip(table.row(m, i)) {
                    *acc += w * v;
                }
            }
        }
        Ok(CobraModel {
            pool: Arc::new(pool),
            table: Arc::new(table),
            params,
            scheme,
            machine_ibs,
            machine_weights,
            mixture: Arc::new(mixture),
        })
    }

    /// Same fitted pool and table under different parameters.
    pub fn with_params(&self, params: CobraParams) -> Result<Self> {
        params.validate(self.table.machines())?;
        Ok(CobraModel {
            params,
            ..self.clone()
        })
    }

    pub fn params(&self) -> &CobraParams {
        &self.params
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    pub fn table(&self) -> &PredictionTable {
        &self.table
    }

    pub fn pool(&self) -> &[SurvivalTree] {
        &self.pool
    }

    pub fn machine_ibs(&self) -> &[f64] {
        &self.machine_ibs
    }

    pub fn machine_weights(&self) -> &[f64] {
        &self.machine_weights
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        self.table.grid()
    }

    /// Each machine's curve for `query`, on the model grid.
    pub fn machine_rows(&self, query: &[f64]) -> Result<Vec<Vec<f64>>> {
        if self.pool.is_empty() {
            return Err(Error::Prediction("model has no fitted machines".into()));
        }
        let grid = self.grid();
        self.pool
            .iter()
            .map(|tree| {
                let leaf = tree.leaf_survival(query)?;
                Ok(grid.times().iter().map(|&t| leaf.eval(t)).collect())
            })
            .collect()
    }

    pub fn query_predictions(&self, query: &[f64]) -> Result<Vec<SurvivalCurve>> {
        self.machine_rows(query)?
            .into_iter()
            .map(|v| SurvivalCurve::new(self.grid().clone(), v))
            .collect()
    }

    pub(crate) fn resolve(&self, distances: &[f64]) -> Result<Proximity> {
        resolve_proximity(distances, self.table.machines(), &self.params)
    }

    /// Straight estimate over a resolved proximity set.
    pub(crate) fn straight_curve(&self, members: &[usize]) -> Result<SurvivalCurve> {
        let outcomes = self.table.outcomes();
        let (times, events): (Vec<f64>, Vec<bool>) = members.iter().map(|&i| outcomes[i]).unzip();
        let hazard = nelson_aalen(&times, &events)?;
        let values = self
            .grid()
            .times()
            .iter()
            .map(|&t| (-hazard.eval(t)).exp())
            .collect();
        SurvivalCurve::new(self.grid().clone(), values)
    }

    /// Weighted estimate over a resolved proximity set.
    pub(crate) fn weighted_curve(&self, members: &[usize]) -> Result<SurvivalCurve> {
        let t = self.grid().len();
        let mut acc = vec![0.0; t];
        for &i in members {
            for (a, &v) in acc.iter_mut().zip(&self.mixture[i * t..(i + 1) * t]) {
                *a += v;
            }
        }
        let m = members.len() as f64;
        acc.iter_mut().for_each(|v| *v /= m);
        SurvivalCurve::enforced(self.grid().clone(), acc)
    }

    pub(crate) fn curve_for(&self, members: &[usize]) -> Result<SurvivalCurve> {
        match self.params.variant {
            Variant::Straight => self.straight_curve(members),
            Variant::Weighted => self.weighted_curve(members),
        }
    }

    fn proximity_for(&self, query: &[f64]) -> Result<Proximity> {
        let rows = self.machine_rows(query)?;
        let dist = self.table.distances(&rows, self.params.norm);
        let prox = self.resolve(&dist)?;
        if prox.widenings > 0 {
            log::warn!(
                "empty proximity set at epsilon {}; widened {} time(s) to {}",
                self.params.epsilon,
                prox.widenings,
                prox.epsilon_used
            );
        }
        Ok(prox)
    }

    pub fn predict(&self, query: &[f64]) -> Result<SurvivalCurve> {
        match self.params.variant {
            Variant::Straight => straight_predict(query, self),
            Variant::Weighted => weighted_predict(query, self),
        }
    }
}

pub fn straight_predict(query: &[f64], model: &CobraModel) -> Result<SurvivalCurve> {
    if model.params.variant != Variant::Straight {
        return Err(Error::Params(
            "model is not configured for the straight variant".into(),
        ));
    }
    let prox = model.proximity_for(query)?;
    model.straight_curve(&prox.members)
}

pub fn weighted_predict(query: &[f64], model: &CobraModel) -> Result<SurvivalCurve> {
    if model.params.variant != Variant::Weighted {
        return Err(Error::Params(
            "model is not configured for the weighted variant".into(),
        ));
    }
    let prox = model.proximity_for(query)?;
    model.weighted_curve(&prox.members)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<TimeGrid> {
        Arc::new(TimeGrid::linspace(1.0, n as f64, n).unwrap())
    }

    fn params(epsilon: f64, alpha: f64, variant: Variant) -> CobraParams {
        CobraParams {
            epsilon,
            alpha,
            norm: NormKind::Frobenius,
            variant,
        }
    }

    #[test]
    fn distance_examples() {
        let g = Arc::new(TimeGrid::new(vec![1.0, 2.0]).unwrap());
        let a = SurvivalCurve::new(g.clone(), vec![0.9, 0.8]).unwrap();
        let b = SurvivalCurve::new(g.clone(), vec![0.6, 0.4]).unwrap();
        assert_eq!(machine_distance(&a, &a, NormKind::Sup).unwrap(), 0.0);
        assert_eq!(machine_distance(&a, &a, NormKind::Frobenius).unwrap(), 0.0);
        assert!((machine_distance(&a, &b, NormKind::Frobenius).unwrap() - 0.5).abs() < 1e-15);
        assert!((machine_distance(&a, &b, NormKind::Sup).unwrap() - 0.4).abs() < 1e-15);
        let other = Arc::new(TimeGrid::new(vec![1.0, 3.0]).unwrap());
        let c = SurvivalCurve::new(other, vec![0.9, 0.8]).unwrap();
        assert!(matches!(
            machine_distance(&a, &c, NormKind::Sup),
            Err(Error::Distance(_))
        ));
    }

    #[test]
    fn hand_built_distances_count_agreement() {
        // rows: point, columns: machine
        let d = [0.1, 0.5, 0.2, 0.2, 0.6, 0.7];
        assert_eq!(members_within(&d, 2, 0.3, 2), vec![1]);
        assert_eq!(members_within(&d, 2, 0.3, 1), vec![0, 1]);
        assert_eq!(members_within(&d, 2, f64::INFINITY, 2), vec![0, 1, 2]);
    }

    #[test]
    fn widening_recovers_a_neighbour() {
        let d = [1.0, 1.0];
        let p = params(0.5, 1.0, Variant::Straight);
        let prox = resolve_proximity(&d, 2, &p).unwrap();
        assert_eq!(prox.members, vec![0]);
        assert_eq!(prox.widenings, 2);
        assert!((prox.epsilon_used - 1.125).abs() < 1e-15);

        let far = [1e6, 2e6];
        match resolve_proximity(&far, 2, &p) {
            Err(Error::NoNeighbors { min_distances, .. }) => {
                assert_eq!(min_distances, vec![1e6, 2e6])
            }
            other => panic!("expected NoNeighbors, got {other:?}"),
        }
    }

    #[test]
    fn params_validation() {
        assert!(params(0.1, 0.25, Variant::Weighted).validate(8).is_ok());
        assert!(params(0.1, 0.3, Variant::Weighted).validate(8).is_err());
        assert!(params(-0.1, 1.0, Variant::Weighted).validate(8).is_err());
        assert!(params(f64::INFINITY, 1.0, Variant::Weighted)
            .validate(8)
            .is_ok());
        assert_eq!(
            params(0.1, 0.375, Variant::Weighted).required_agreement(8),
            3
        );
    }

    #[test]
    fn weight_examples() {
        let w = machine_ibs_weights(&[0.1, 0.3]).unwrap();
        assert!((w[0] - 0.75).abs() < 1e-15 && (w[1] - 0.25).abs() < 1e-15);
        assert_eq!(machine_ibs_weights(&[0.1; 4]).unwrap(), vec![0.25; 4]);
        assert_eq!(machine_ibs_weights(&[0.0; 3]).unwrap(), vec![1.0 / 3.0; 3]);
        assert_eq!(machine_ibs_weights(&[0.2]).unwrap(), vec![1.0]);
        assert!(machine_ibs_weights(&[0.1, -0.1]).is_err());
        let lit = literal_ibs_weights(&[0.1, 0.3]).unwrap();
        assert!((lit[0] - 0.125).abs() < 1e-15 && (lit[1] - 0.375).abs() < 1e-15);
    }

    fn toy_table(
        values_per_machine: &[Vec<Vec<f64>>],
        outcomes: Vec<(f64, bool)>,
    ) -> PredictionTable {
        let t = values_per_machine[0][0].len();
        let values: Vec<f64> = values_per_machine
            .iter()
            .flatten()
            .flatten()
            .copied()
            .collect();
        PredictionTable::new(
            grid(t),
            values_per_machine.len(),
            outcomes.len(),
            values,
            outcomes,
        )
        .unwrap()
    }

    #[test]
    fn weighted_combination_hand_value() {
        let m1 = vec![vec![0.8, 0.8]];
        let m2 = vec![vec![0.4, 0.4]];
        let table = toy_table(&[m1, m2], vec![(1.5, true)]);
        // ibs (0.1, 0.3) -> weights (0.75, 0.25)
        let model = CobraModel::from_parts(
            Vec::new(),
            table,
            params(f64::INFINITY, 0.5, Variant::Weighted),
            WeightScheme::Complement,
            vec![0.1, 0.3],
        )
        .unwrap();
        let c = model.weighted_curve(&[0]).unwrap();
        assert!((c.values()[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn single_member_straight_curve() {
        let table = toy_table(
            &[vec![vec![1.0; 5], vec![1.0; 5]]],
            vec![(3.0, true), (4.0, false)],
        );
        let model = CobraModel::from_parts(
            Vec::new(),
            table,
            params(0.0, 1.0, Variant::Straight),
            WeightScheme::Complement,
            vec![0.2],
        )
        .unwrap();
        let c = model.straight_curve(&[0]).unwrap();
        // grid 1..5: S = 1 up to and including 3, exp(-1) after
        assert_eq!(&c.values()[..3], &[1.0, 1.0, 1.0]);
        assert!((c.values()[3] - (-1f64).exp()).abs() < 1e-15);
        assert!((c.values()[4] - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn straight_curve_matches_nelson_aalen_example() {
        let outcomes = vec![(1.0, true), (2.0, true), (3.0, true)];
        let g = Arc::new(TimeGrid::new(vec![0.5, 2.5, 3.5]).unwrap());
        let values = vec![1.0; 9];
        let table = PredictionTable::new(g, 1, 3, values, outcomes).unwrap();
        let model = CobraModel::from_parts(
            Vec::new(),
            table,
            params(f64::INFINITY, 1.0, Variant::Straight),
            WeightScheme::Complement,
            vec![0.1],
        )
        .unwrap();
        let c = model.straight_curve(&[0, 1, 2]).unwrap();
        assert!((c.values()[1] - (-5.0f64 / 6.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn variant_mismatch_is_rejected() {
        let table = toy_table(&[vec![vec![1.0, 0.5]]], vec![(1.0, true)]);
        let model = CobraModel::from_parts(
            Vec::new(),
            table,
            params(1.0, 1.0, Variant::Straight),
            WeightScheme::Complement,
            vec![0.1],
        )
        .unwrap();
        assert!(weighted_predict(&[0.0], &model).is_err());
        // no machines to route the query through
        assert!(straight_predict(&[0.0], &model).is_err());
    }

    #[test]
    fn text_enums_parse() {
        assert_eq!("Sup".parse::<NormKind>().unwrap(), NormKind::Sup);
        assert_eq!(
            "literal".parse::<WeightScheme>().unwrap(),
            WeightScheme::Literal
        );
        assert!("both".parse::<NormKind>().is_err());
        assert_eq!(Variant::Weighted.to_string(), "weighted");
    }
}
