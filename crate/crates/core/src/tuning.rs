//! k-fold cross-validated grid search over (epsilon, alpha, norm).

use std::cmp::Ordering;
use std::sync::Arc;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::cobra::{CobraModel, CobraParams, NormKind, PredictionTable, Variant, WeightScheme};
use crate::data::{self, SplitSpec, SurvivalDataset, TimeGrid, DEFAULT_GRID_RESOLUTION};
use crate::error::{Error, Result};
use crate::estimators::{censoring_survival_of, kaplan_meier};
use crate::metrics::{IbsScorer, SurvivalCurve};
use crate::par::{self, Parallelism};
use crate::tree::{build_machine_pool_with, POOL_SIZE};
use crate::util;

/// Lowest quantile level of the epsilon grid.
const EPSILON_LOW_QUANTILE: f64 = 0.05;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuneScheme {
    /// Tune on every record, then evaluate on splits of the same data.
    #[default]
    WholeDataset,
    /// Tune on the training part of the master-seed split only.
    TrainOnly,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormChoice {
    Frobenius,
    Sup,
    #[default]
    Both,
}

impl NormChoice {
    pub fn norms(self) -> Vec<NormKind> {
        match self {
            NormChoice::Frobenius => vec![NormKind::Frobenius],
            NormChoice::Sup => vec![NormKind::Sup],
            NormChoice::Both => NormKind::ALL.to_vec(),
        }
    }
}

impl std::str::FromStr for NormChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "frobenius" => Ok(NormChoice::Frobenius),
            "sup" => Ok(NormChoice::Sup),
            "both" => Ok(NormChoice::Both),
            other => Err(Error::Params(format!("unknown norm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuneConfig {
    pub k_folds: usize,
    pub epsilon_grid_size: usize,
    /// Defaults to `{1/M, ..., 1}`.
    pub alpha_grid: Option<Vec<f64>>,
    pub variant: Variant,
    pub norm: NormChoice,
    pub seed: u64,
    pub scheme: TuneScheme,
    /// Used by [`TuneScheme::TrainOnly`].
    pub train_fraction: f64,
    pub dl_fraction: f64,
    pub grid_resolution: usize,
    pub weights: WeightScheme,
    pub parallelism: Parallelism,
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig {
            k_folds: 5,
            epsilon_grid_size: 20,
            alpha_grid: None,
            variant: Variant::Weighted,
            norm: NormChoice::Both,
            seed: 0,
            scheme: TuneScheme::WholeDataset,
            train_fraction: 0.8,
            dl_fraction: 0.5,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
            weights: WeightScheme::Complement,
            parallelism: Parallelism::Parallel,
        }
    }
}

impl TuneConfig {
    fn validate(&self) -> Result<()> {
        if self.k_folds < 2 {
            return Err(Error::Params("k_folds must be >= 2".into()));
        }
        if self.epsilon_grid_size < 2 {
            return Err(Error::Params("epsilon_grid_size must be >= 2".into()));
        }
        Ok(())
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.alpha_grid.clone().unwrap_or_else(|| {
            (1..=POOL_SIZE)
                .map(|k| k as f64 / POOL_SIZE as f64)
                .collect()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub epsilon: f64,
    pub alpha: f64,
    pub norm: NormKind,
    pub mean_ibs: f64,
    pub sd_ibs: f64,
    pub fold_ibs: Vec<f64>,
    /// Share of held-out queries scored with the D_l Kaplan-Meier baseline
    /// because no neighbour was found even after widening.
    pub fallback_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: CobraParams,
    pub cv_scores: Vec<CvScore>,
}

/// Ranking used for the argmin: lower mean, then larger epsilon, larger
/// alpha, Frobenius before sup.
fn rank(a: &CvScore, b: &CvScore) -> Ordering {
    a.mean_ibs
        .total_cmp(&b.mean_ibs)
        .then(b.epsilon.total_cmp(&a.epsilon))
        .then(b.alpha.total_cmp(&a.alpha))
        .then(a.norm.cmp(&b.norm))
}

impl TuneResult {
    fn from_scores(cv_scores: Vec<CvScore>, variant: Variant) -> Result<Self> {
        let best = cv_scores
            .iter()
            .min_by(|a, b| rank(a, b))
            .ok_or_else(|| Error::Params("empty tuning grid".into()))?;
        let best = CobraParams {
            epsilon: best.epsilon,
            alpha: best.alpha,
            norm: best.norm,
            variant,
        };
        Ok(TuneResult { best, cv_scores })
    }

    /// Best parameters restricted to one norm.
    pub fn best_for(&self, norm: NormKind) -> Option<CobraParams> {
        self.cv_scores
            .iter()
            .filter(|s| s.norm == norm)
            .min_by(|a, b| rank(a, b))
            .map(|s| CobraParams {
                epsilon: s.epsilon,
                alpha: s.alpha,
                norm,
                variant: self.best.variant,
            })
    }

    pub fn score_of(&self, params: &CobraParams) -> Option<&CvScore> {
        self.cv_scores.iter().find(|s| {
            s.norm == params.norm && s.epsilon == params.epsilon && s.alpha == params.alpha
        })
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["epsilon", "alpha", "norm", "mean_ibs", "sd_ibs"])?;
        for s in &self.cv_scores {
            w.write_record([
                s.epsilon.to_string(),
                s.alpha.to_string(),
                s.norm.to_string(),
                s.mean_ibs.to_string(),
                s.sd_ibs.to_string(),
            ])?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Validation(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Epsilon candidates: `size` equally spaced quantile levels from the 5th to
/// the 100th percentile of the per-machine pairwise distances between table
/// points, deduplicated and ascending.
pub fn epsilon_grid(table: &PredictionTable, size: usize, norm: NormKind) -> Result<Vec<f64>> {
    epsilon_grid_pooled(&[table], size, norm)
}

/// As [`epsilon_grid`] over the pooled distances of several tables.
pub fn epsilon_grid_pooled(
    tables: &[&PredictionTable],
    size: usize,
    norm: NormKind,
) -> Result<Vec<f64>> {
    if size < 2 {
        return Err(Error::Params("epsilon grid size must be >= 2".into()));
    }
    let mut dist = Vec::new();
    for table in tables {
        if table.points() < 2 {
            return Err(Error::Params(
                "epsilon grid needs at least 2 table points".into(),
            ));
        }
        for m in 0..table.machines() {
            for i in 0..table.points() {
                for j in (i + 1)..table.points() {
                    dist.push(norm.distance(table.row(m, i), table.row(m, j)));
                }
            }
        }
    }
    if dist.is_empty() {
        return Err(Error::Params(
            "no tables to derive an epsilon grid from".into(),
        ));
    }
    dist.sort_by(f64::total_cmp);
    if dist[dist.len() - 1] == 0.0 {
        return Ok(vec![0.0]);
    }
    let mut grid: Vec<f64> = (0..size)
        .map(|k| {
            let q =
                EPSILON_LOW_QUANTILE + (1.0 - EPSILON_LOW_QUANTILE) * k as f64 / (size - 1) as f64;
            quantile_sorted(&dist, q.min(1.0))
        })
        .collect();
    grid.dedup();
    Ok(grid)
}

/// Everything a fold needs to score candidates.
struct FoldState {
    model: CobraModel,
    scorer: IbsScorer,
    /// Point-major distances per norm, one vector per held-out query.
    distances: Vec<(NormKind, Vec<Vec<f64>>)>,
    baseline: SurvivalCurve,
}

impl FoldState {
    fn score(&self, params: CobraParams) -> Result<(f64, usize)> {
        let model = self.model.with_params(params)?;
        let (_, dists) = self
            .distances
            .iter()
            .find(|(n, _)| *n == params.norm)
            .expect("distances computed for every searched norm");
        let mut curves = Vec::with_capacity(dists.len());
        let mut fallbacks = 0;
        for d in dists {
            match model.resolve(d) {
                Ok(prox) => curves.push(model.curve_for(&prox.members)?),
                Err(Error::NoNeighbors { .. }) => {
                    fallbacks += 1;
                    curves.push(self.baseline.clone());
                }
                Err(e) => return Err(e),
            }
        }
        let grid = self.model.grid().clone();
        Ok((
            self.scorer.score_rows(&grid, |i| curves[i].values()),
            fallbacks,
        ))
    }
}

fn prepare_fold(
    ordered: &SurvivalDataset,
    fold_of: &[usize],
    fold: usize,
    norms: &[NormKind],
    config: &TuneConfig,
) -> Result<FoldState> {
    let (held_idx, rest_idx): (Vec<usize>, Vec<usize>) =
        (0..ordered.n()).partition(|&p| fold_of[p] == fold);
    let held = ordered.select(&held_idx);
    let rest = ordered.select(&rest_idx);
    if held.n_events() == 0 {
        return Err(Error::Split("held-out fold contains no events".into()));
    }
    let (d_k, d_l) = data::subdivide(&rest, config.dl_fraction)?;
    let pool = build_machine_pool_with(
        &d_k,
        util::derive_seed(config.seed, fold as u64),
        Parallelism::Sequential,
    )?;
    let grid = Arc::new(data::make_time_grid(&rest, config.grid_resolution)?);
    let placeholder = CobraParams {
        epsilon: f64::INFINITY,
        alpha: 1.0,
        norm: NormKind::Frobenius,
        variant: config.variant,
    };
    let model = CobraModel::fit(
        pool,
        &d_l,
        grid.clone(),
        placeholder,
        config.weights,
        Parallelism::Sequential,
    )?;

    let held_outcomes = held.outcomes();
    let g_hat = censoring_survival_of(&held_outcomes)?;
    let score_grid = TimeGrid::from_outcomes(&held_outcomes, config.grid_resolution)?;
    let scorer = IbsScorer::new(&held_outcomes, &g_hat, &score_grid)?;

    let query_rows = held
        .records()
        .iter()
        .map(|r| model.machine_rows(&r.covariates))
        .collect::<Result<Vec<_>>>()?;
    let distances = norms
        .iter()
        .map(|&n| {
            (
                n,
                query_rows
                    .iter()
                    .map(|q| model.table().distances(q, n))
                    .collect(),
            )
        })
        .collect();

    let (t, e): (Vec<f64>, Vec<bool>) = d_l.outcomes().into_iter().unzip();
    let baseline = SurvivalCurve::from_step(grid, &kaplan_meier(&t, &e)?)?;
    Ok(FoldState {
        model,
        scorer,
        distances,
        baseline,
    })
}

pub fn cv_tune(dataset: &SurvivalDataset, config: &TuneConfig) -> Result<TuneResult> {
    config.validate()?;
    let tuning_set = match config.scheme {
        TuneScheme::WholeDataset => dataset.clone(),
        TuneScheme::TrainOnly => {
            let spec = SplitSpec {
                train_fraction: config.train_fraction,
                dl_fraction: config.dl_fraction,
                seed: config.seed,
            };
            data::split(dataset, &spec)?.train
        }
    };
    let mut order: Vec<usize> = (0..tuning_set.n()).collect();
    order.shuffle(&mut util::rng(config.seed));
    cv_tune_ordered(&tuning_set, &order, config)
}

/// Cross-validation with an explicit record order: `order[p]` is the record
/// at shuffled position `p`, and position `p` belongs to fold `p % k`.
pub fn cv_tune_ordered(
    dataset: &SurvivalDataset,
    order: &[usize],
    config: &TuneConfig,
) -> Result<TuneResult> {
    config.validate()?;
    if order.len() != dataset.n() {
        return Err(Error::Params("fold order must cover every record".into()));
    }
    let k = config.k_folds;
    if dataset.n() < 2 * k {
        return Err(Error::Params(format!(
            "{} records are too few for {k}-fold cross-validation",
            dataset.n()
        )));
    }
    let ordered = dataset.select(order);
    let fold_of: Vec<usize> = (0..ordered.n()).map(|p| p % k).collect();
    let norms = config.norm.norms();
    let alphas = config.alphas();

    let folds = par::try_map_indexed(k, config.parallelism, |f| {
        prepare_fold(&ordered, &fold_of, f, &norms, config).map_err(|e| Error::Tuning {
            fold: f,
            source: Box::new(e),
        })
    })?;

    let tables: Vec<&PredictionTable> = folds.iter().map(|f| f.model.table()).collect();
    let mut candidates = Vec::new();
    for &norm in &norms {
        for epsilon in epsilon_grid_pooled(&tables, config.epsilon_grid_size, norm)? {
            for &alpha in &alphas {
                candidates.push(CobraParams {
                    epsilon,
                    alpha,
                    norm,
                    variant: config.variant,
                });
            }
        }
    }

    let n_tasks = candidates.len() * k;
    let results = par::try_map_indexed(n_tasks, config.parallelism, |task| {
        let (c, f) = (task / k, task % k);
        folds[f].score(candidates[c]).map_err(|e| Error::Tuning {
            fold: f,
            source: Box::new(e),
        })
    })?;

    let n_queries: usize = folds.iter().map(|f| f.scorer.n_subjects()).sum();
    let cv_scores = candidates
        .iter()
        .enumerate()
        .map(|(c, p)| {
            let per_fold = &results[c * k..(c + 1) * k];
            let fold_ibs: Vec<f64> = per_fold.iter().map(|r| r.0).collect();
            let fallbacks: usize = per_fold.iter().map(|r| r.1).sum();
            let (mean_ibs, sd_ibs) = util::mean_sd(&fold_ibs);
            CvScore {
                epsilon: p.epsilon,
                alpha: p.alpha,
                norm: p.norm,
                mean_ibs,
                sd_ibs,
                fold_ibs,
                fallback_rate: fallbacks as f64 / n_queries as f64,
            }
        })
        .collect();
    TuneResult::from_scores(cv_scores, config.variant)
}
