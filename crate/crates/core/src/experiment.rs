//! Experiment harness: tune, repeated-split evaluation, curve export and the
//! four-method by three-dataset benchmark table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cobra::{CobraModel, CobraParams, NormKind, Variant, WeightScheme};
use crate::data::{
    self, load_csv_with_encoder, load_queries, DatasetSchema, FeatureEncoder, SplitSpec,
    SurvivalDataset, DEFAULT_GRID_RESOLUTION,
};
use crate::error::{Error, Result};
use crate::estimators::{censoring_survival_of, kaplan_meier};
use crate::metrics::{IbsScorer, SurvivalCurve};
use crate::par::{self, Parallelism};
use crate::tree::build_machine_pool_with;
use crate::tuning::{cv_tune, NormChoice, TuneConfig, TuneResult, TuneScheme};
use crate::util::{self, mean_sd, write_atomic};

pub const DEFAULT_REPETITIONS: usize = 20;

/// Stream offsets for [`util::derive_seed`].
const SPLIT_STREAM: u64 = 0x5_0000;
const POOL_STREAM: u64 = 0xB_0000;

fn default_repetitions() -> usize {
    DEFAULT_REPETITIONS
}

fn default_resolution() -> usize {
    DEFAULT_GRID_RESOLUTION
}

fn default_variants() -> Vec<Variant> {
    Variant::ALL.to_vec()
}

/// Split fractions; the seed is derived per repetition from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitFractions {
    pub train_fraction: f64,
    pub dl_fraction: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            train_fraction: 0.8,
            dl_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuneOptions {
    pub k_folds: usize,
    pub epsilon_grid_size: usize,
    pub alpha_grid: Option<Vec<f64>>,
    pub scheme: TuneScheme,
}

impl Default for TuneOptions {
    fn default() -> Self {
        let d = TuneConfig::default();
        TuneOptions {
            k_folds: d.k_folds,
            epsilon_grid_size: d.epsilon_grid_size,
            alpha_grid: None,
            scheme: d.scheme,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Column label in reports, e.g. "Dataset I".
    #[serde(default)]
    pub name: String,
    /// Relative paths are resolved against the config file's directory.
    pub dataset: PathBuf,
    pub schema: DatasetSchema,
    #[serde(default)]
    pub split: SplitFractions,
    #[serde(default)]
    pub tune: TuneOptions,
    #[serde(default = "default_variants")]
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub norm: NormChoice,
    #[serde(default)]
    pub weights: WeightScheme,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_resolution")]
    pub grid_resolution: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub parallelism: Parallelism,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
        if cfg.dataset.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.dataset = dir.join(&cfg.dataset);
            }
        }
        if cfg.name.is_empty() {
            cfg.name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions < 1 {
            return Err(Error::Params("repetitions must be >= 1".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::Params("at least one variant is required".into()));
        }
        Ok(())
    }

    pub fn load_dataset(&self) -> Result<(SurvivalDataset, FeatureEncoder)> {
        load_csv_with_encoder(&self.dataset, &self.schema)
    }

    pub fn tune_config(&self, variant: Variant) -> TuneConfig {
        TuneConfig {
            k_folds: self.tune.k_folds,
            epsilon_grid_size: self.tune.epsilon_grid_size,
            alpha_grid: self.tune.alpha_grid.clone(),
            variant,
            norm: self.norm,
            seed: self.seed,
            scheme: self.tune.scheme,
            train_fraction: self.split.train_fraction,
            dl_fraction: self.split.dl_fraction,
            grid_resolution: self.grid_resolution,
            weights: self.weights,
            parallelism: self.parallelism,
        }
    }

    fn split_spec(&self, repetition: usize) -> SplitSpec {
        SplitSpec {
            train_fraction: self.split.train_fraction,
            dl_fraction: self.split.dl_fraction,
            seed: util::derive_seed(self.seed, SPLIT_STREAM + repetition as u64),
        }
    }
}

/// Human-readable method label, e.g. "Weighted IBS Survival COBRA 1".
pub fn method_label(variant: Variant, norm: NormKind) -> String {
    let v = match variant {
        Variant::Weighted => "Weighted",
        Variant::Straight => "Straight",
    };
    let n = match norm {
        NormKind::Frobenius => 1,
        NormKind::Sup => 2,
    };
    format!("{v} IBS Survival COBRA {n}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneSummary {
    pub variant: Variant,
    pub best: CobraParams,
    pub best_by_norm: Vec<CobraParams>,
    pub best_mean_ibs: f64,
    pub best_sd_ibs: f64,
}

impl TuneSummary {
    pub fn from_result(result: &TuneResult) -> Self {
        let score = result.score_of(&result.best);
        let mut norms: Vec<NormKind> = result.cv_scores.iter().map(|s| s.norm).collect();
        norms.sort();
        norms.dedup();
        TuneSummary {
            variant: result.best.variant,
            best: result.best,
            best_by_norm: norms
                .into_iter()
                .filter_map(|n| result.best_for(n))
                .collect(),
            best_mean_ibs: score.map_or(f64::NAN, |s| s.mean_ibs),
            best_sd_ibs: score.map_or(f64::NAN, |s| s.sd_ibs),
        }
    }
}

/// Parameter sets accepted by `evaluate` and `curves`: one object, a list,
/// or a tune summary (its per-norm bests).
pub fn load_params(path: &Path) -> Result<Vec<CobraParams>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if let Ok(p) = serde_json::from_str::<CobraParams>(&text) {
        return Ok(vec![p]);
    }
    if let Ok(ps) = serde_json::from_str::<Vec<CobraParams>>(&text) {
        return Ok(ps);
    }
    let summary: TuneSummary = serde_json::from_str(&text)?;
    Ok(summary.best_by_norm)
}

/// Tunes each configured variant; returns the per-variant results in
/// configuration order.
pub fn tune(dataset: &SurvivalDataset, config: &ExperimentConfig) -> Result<Vec<TuneResult>> {
    config
        .variants
        .iter()
        .map(|&v| cv_tune(dataset, &config.tune_config(v)))
        .collect()
}

pub fn write_tune_outputs(results: &[TuneResult], out: &Path) -> Result<()> {
    for r in results {
        let v = r.best.variant;
        write_atomic(&out.join(format!("tune_{v}.csv")), r.to_csv()?.as_bytes())?;
        let summary = serde_json::to_string_pretty(&TuneSummary::from_result(r))?;
        write_atomic(&out.join(format!("tune_{v}_best.json")), summary.as_bytes())?;
    }
    Ok(())
}

/// Pool, D_l model and test cohort for one repetition.
struct FittedSplit {
    model: CobraModel,
    test: SurvivalDataset,
    baseline: SurvivalCurve,
}

fn fit_split(
    dataset: &SurvivalDataset,
    config: &ExperimentConfig,
    repetition: usize,
    first: CobraParams,
) -> Result<FittedSplit> {
    let spec = config.split_spec(repetition);
    let parts = data::split(dataset, &spec)?;
    let pool = build_machine_pool_with(
        &parts.d_k,
        util::derive_seed(spec.seed, POOL_STREAM),
        Parallelism::Sequential,
    )?;
    let grid = Arc::new(data::make_time_grid(&parts.train, config.grid_resolution)?);
    let model = CobraModel::fit(
        pool,
        &parts.d_l,
        grid.clone(),
        first,
        config.weights,
        Parallelism::Sequential,
    )?;
    let (t, e): (Vec<f64>, Vec<bool>) = parts.d_l.outcomes().into_iter().unzip();
    let baseline = SurvivalCurve::from_step(grid, &kaplan_meier(&t, &e)?)?;
    Ok(FittedSplit {
        model,
        test: parts.test,
        baseline,
    })
}

/// COBRA prediction; a query with no neighbours after widening gets the
/// D_l Kaplan-Meier curve and is counted as a fallback.
fn predict_or_baseline(
    model: &CobraModel,
    baseline: &SurvivalCurve,
    query: &[f64],
) -> Result<(SurvivalCurve, bool)> {
    let rows = model.machine_rows(query)?;
    let dist = model.table().distances(&rows, model.params().norm);
    match model.resolve(&dist) {
        Ok(prox) => Ok((model.curve_for(&prox.members)?, false)),
        Err(Error::NoNeighbors { .. }) => Ok((baseline.clone(), true)),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionScores {
    pub repetition: usize,
    pub split_seed: u64,
    /// One per evaluated method, in method order.
    pub method_ibs: Vec<f64>,
    pub method_fallbacks: Vec<usize>,
    pub machine_ibs: Vec<f64>,
    pub test_size: usize,
}

fn run_repetition(
    dataset: &SurvivalDataset,
    config: &ExperimentConfig,
    methods: &[CobraParams],
    repetition: usize,
) -> Result<RepetitionScores> {
    let fitted = fit_split(dataset, config, repetition, methods[0])?;
    let outcomes = fitted.test.outcomes();
    let g_hat = censoring_survival_of(&outcomes)?;
    let score_grid = data::TimeGrid::from_outcomes(&outcomes, config.grid_resolution)?;
    let scorer = IbsScorer::new(&outcomes, &g_hat, &score_grid)?;
    let grid = fitted.model.grid().clone();

    let mut method_ibs = Vec::with_capacity(methods.len());
    let mut method_fallbacks = Vec::with_capacity(methods.len());
    for &p in methods {
        let model = fitted.model.with_params(p)?;
        let mut curves = Vec::with_capacity(fitted.test.n());
        let mut fallbacks = 0;
        for r in fitted.test.records() {
            let (c, fell_back) = predict_or_baseline(&model, &fitted.baseline, &r.covariates)?;
            fallbacks += usize::from(fell_back);
            curves.push(c);
        }
        method_ibs.push(scorer.score_rows(&grid, |i| curves[i].values()));
        method_fallbacks.push(fallbacks);
    }

    let query_rows = fitted
        .test
        .records()
        .iter()
        .map(|r| fitted.model.machine_rows(&r.covariates))
        .collect::<Result<Vec<_>>>()?;
    let machine_ibs = (0..fitted.model.table().machines())
        .map(|m| scorer.score_rows(&grid, |i| query_rows[i][m].as_slice()))
        .collect();

    Ok(RepetitionScores {
        repetition,
        split_seed: config.split_spec(repetition).seed,
        method_ibs,
        method_fallbacks,
        machine_ibs,
        test_size: fitted.test.n(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub label: String,
    pub params: CobraParams,
    pub mean_ibs: f64,
    pub sd_ibs: f64,
    pub fallback_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineSummary {
    pub machine: usize,
    pub mean_ibs: f64,
    pub sd_ibs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub dataset: String,
    pub repetitions: usize,
    pub weights: WeightScheme,
    pub methods: Vec<MethodSummary>,
    pub machines: Vec<MachineSummary>,
    /// Mean over machines of each machine's mean IBS.
    pub machine_average_ibs: f64,
    /// Lowest machine mean IBS.
    pub best_machine_ibs: f64,
    pub per_repetition: Vec<RepetitionScores>,
}

impl EvaluationReport {
    pub fn method(&self, variant: Variant, norm: NormKind) -> Option<&MethodSummary> {
        self.methods
            .iter()
            .find(|m| m.params.variant == variant && m.params.norm == norm)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "method",
            "variant",
            "norm",
            "epsilon",
            "alpha",
            "mean_ibs",
            "sd_ibs",
            "fallback_rate",
        ])?;
        for m in &self.methods {
            w.write_record([
                m.label.clone(),
                m.params.variant.to_string(),
                m.params.norm.to_string(),
                m.params.epsilon.to_string(),
                m.params.alpha.to_string(),
                m.mean_ibs.to_string(),
                m.sd_ibs.to_string(),
                m.fallback_rate.to_string(),
            ])?;
        }
        for m in &self.machines {
            w.write_record([
                format!("machine {}", m.machine + 1),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                m.mean_ibs.to_string(),
                m.sd_ibs.to_string(),
                String::new(),
            ])?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Validation(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }

    pub fn write(&self, out: &Path) -> Result<()> {
        write_atomic(
            &out.join("evaluation.json"),
            serde_json::to_string_pretty(self)?.as_bytes(),
        )?;
        write_atomic(&out.join("evaluation.csv"), self.to_csv()?.as_bytes())
    }
}

/// Repeated reseeded 80/20 splits with a D_k/D_l subdivision of train;
/// every method is scored on the same test cohort per repetition.
pub fn evaluate(
    dataset: &SurvivalDataset,
    config: &ExperimentConfig,
    methods: &[CobraParams],
) -> Result<EvaluationReport> {
    config.validate()?;
    if methods.is_empty() {
        return Err(Error::Params("no methods to evaluate".into()));
    }
    let reps = par::try_map_indexed(config.repetitions, config.parallelism, |r| {
        run_repetition(dataset, config, methods, r)
    })?;

    let total_queries: usize = reps.iter().map(|r| r.test_size).sum();
    let methods_summary = methods
        .iter()
        .enumerate()
        .map(|(k, &params)| {
            let scores: Vec<f64> = reps.iter().map(|r| r.method_ibs[k]).collect();
            let (mean_ibs, sd_ibs) = mean_sd(&scores);
            let fallbacks: usize = reps.iter().map(|r| r.method_fallbacks[k]).sum();
            MethodSummary {
                label: method_label(params.variant, params.norm),
                params,
                mean_ibs,
                sd_ibs,
                fallback_rate: fallbacks as f64 / total_queries as f64,
            }
        })
        .collect();
    let n_machines = reps[0].machine_ibs.len();
    let machines: Vec<MachineSummary> = (0..n_machines)
        .map(|m| {
            let scores: Vec<f64> = reps.iter().map(|r| r.machine_ibs[m]).collect();
            let (mean_ibs, sd_ibs) = mean_sd(&scores);
            MachineSummary {
                machine: m,
                mean_ibs,
                sd_ibs,
            }
        })
        .collect();
    let machine_average_ibs = machines.iter().map(|m| m.mean_ibs).sum::<f64>() / n_machines as f64;
    let best_machine_ibs = machines
        .iter()
        .map(|m| m.mean_ibs)
        .fold(f64::INFINITY, f64::min);
    Ok(EvaluationReport {
        dataset: config.name.clone(),
        repetitions: config.repetitions,
        weights: config.weights,
        methods: methods_summary,
        machines,
        machine_average_ibs,
        best_machine_ibs,
        per_repetition: reps,
    })
}

/// Predicted curves for `queries`, one column per query, on the grid of the
/// first repetition's training split. Queries without neighbours get the
/// D_l Kaplan-Meier curve, as in evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub times: Vec<f64>,
    pub curves: Vec<SurvivalCurve>,
}

impl CurveTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["time".to_string()];
        header.extend((1..=self.curves.len()).map(|q| format!("query_{q}")));
        w.write_record(&header)?;
        for (j, t) in self.times.iter().enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(self.curves.iter().map(|c| c.values()[j].to_string()));
            w.write_record(&row)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Validation(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }
}

pub fn curves(
    dataset: &SurvivalDataset,
    config: &ExperimentConfig,
    params: CobraParams,
    queries: &[Vec<f64>],
) -> Result<CurveTable> {
    let fitted = fit_split(dataset, config, 0, params)?;
    let mut curves = Vec::with_capacity(queries.len());
    for (k, q) in queries.iter().enumerate() {
        let (curve, fell_back) = predict_or_baseline(&fitted.model, &fitted.baseline, q)?;
        if fell_back {
            log::warn!("query {} has no neighbours; emitting the D_l Kaplan-Meier curve", k + 1);
        }
        curves.push(curve);
    }
    Ok(CurveTable {
        times: fitted.model.grid().times().to_vec(),
        curves,
    })
}

pub fn curves_from_file(
    config: &ExperimentConfig,
    params: CobraParams,
    query_file: &Path,
) -> Result<CurveTable> {
    let (dataset, encoder) = config.load_dataset()?;
    let queries = load_queries(query_file, &encoder)?;
    curves(&dataset, config, params, &queries)
}

/// Tunes every configured variant and evaluates the per-norm best
/// parameters, in the order Weighted/Frobenius, Weighted/Sup,
/// Straight/Frobenius, Straight/Sup (restricted to what is configured).
pub fn tune_and_evaluate(
    dataset: &SurvivalDataset,
    config: &ExperimentConfig,
) -> Result<(Vec<TuneResult>, EvaluationReport)> {
    let mut variants = config.variants.clone();
    variants.sort_by_key(|v| match v {
        Variant::Weighted => 0,
        Variant::Straight => 1,
    });
    variants.dedup();
    let ordered = ExperimentConfig {
        variants,
        ..config.clone()
    };
    let tuned = tune(dataset, &ordered)?;
    let methods: Vec<CobraParams> = tuned
        .iter()
        .flat_map(|r| {
            config
                .norm
                .norms()
                .into_iter()
                .filter_map(move |n| r.best_for(n))
        })
        .collect();
    let report = evaluate(dataset, &ordered, &methods)?;
    Ok((tuned, report))
}

/// Check derived from the benchmark claims, evaluated on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub claim: String,
    pub dataset: String,
    pub passed: bool,
    pub detail: String,
}

fn claim_checks(report: &EvaluationReport) -> Vec<ClaimCheck> {
    let mut out = Vec::new();
    let ds = &report.dataset;
    for v in Variant::ALL {
        if let (Some(f), Some(s)) = (
            report.method(v, NormKind::Frobenius),
            report.method(v, NormKind::Sup),
        ) {
            let gap = (f.mean_ibs - s.mean_ibs).abs();
            out.push(ClaimCheck {
                claim: format!("norm equivalence ({v})"),
                dataset: ds.clone(),
                passed: gap <= 0.02,
                detail: format!("|frobenius - sup| = {gap:.4}"),
            });
        }
    }
    for w in NormKind::ALL {
        let Some(m) = report.method(Variant::Weighted, w) else {
            continue;
        };
        let below_avg = m.mean_ibs <= report.machine_average_ibs;
        let near_best = m.mean_ibs <= report.best_machine_ibs + 0.01;
        out.push(ClaimCheck {
            claim: format!("weighted ({w}) vs weak learners"),
            dataset: ds.clone(),
            passed: below_avg && near_best,
            detail: format!(
                "cobra {:.4}, machine average {:.4}, best machine {:.4}",
                m.mean_ibs, report.machine_average_ibs, report.best_machine_ibs
            ),
        });
        out.push(ClaimCheck {
            claim: format!("weighted ({w}) strictly below every weak learner"),
            dataset: ds.clone(),
            passed: m.mean_ibs < report.best_machine_ibs,
            detail: format!(
                "cobra {:.4}, best machine {:.4}",
                m.mean_ibs, report.best_machine_ibs
            ),
        });
        if let Some(s) = report.method(Variant::Straight, w) {
            out.push(ClaimCheck {
                claim: format!("weighted vs straight ({w})"),
                dataset: ds.clone(),
                passed: m.mean_ibs <= s.mean_ibs + 0.01,
                detail: format!("weighted {:.4}, straight {:.4}", m.mean_ibs, s.mean_ibs),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStatus {
    pub dataset: String,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceReport {
    pub datasets: Vec<String>,
    pub evaluations: Vec<EvaluationReport>,
    pub tuning: BTreeMap<String, Vec<TuneSummary>>,
    pub checks: Vec<ClaimCheck>,
}

impl ReproduceReport {
    pub fn table_rows() -> [(Variant, NormKind); 4] {
        [
            (Variant::Weighted, NormKind::Frobenius),
            (Variant::Weighted, NormKind::Sup),
            (Variant::Straight, NormKind::Frobenius),
            (Variant::Straight, NormKind::Sup),
        ]
    }

    pub fn cell(&self, dataset: usize, variant: Variant, norm: NormKind) -> Option<&MethodSummary> {
        self.evaluations.get(dataset)?.method(variant, norm)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# Integrated Brier Score by method and dataset\n");
        let _ = write!(s, "| Method |");
        for d in &self.datasets {
            let _ = write!(s, " {d} mean | {d} sd |");
        }
        let _ = write!(s, "\n|---|");
        for _ in &self.datasets {
            let _ = write!(s, "---:|---:|");
        }
        s.push('\n');
        for (v, n) in Self::table_rows() {
            let _ = write!(s, "| {} |", method_label(v, n));
            for k in 0..self.datasets.len() {
                match self.cell(k, v, n) {
                    Some(m) => {
                        let _ = write!(s, " {:.3} | {:.2} |", m.mean_ibs, m.sd_ibs);
                    }
                    None => s.push_str(" - | - |"),
                }
            }
            s.push('\n');
        }
        let _ = write!(s, "| Weak learners (average) |");
        for e in &self.evaluations {
            let _ = write!(s, " {:.3} | |", e.machine_average_ibs);
        }
        let _ = write!(s, "\n| Weak learners (best) |");
        for e in &self.evaluations {
            let _ = write!(s, " {:.3} | |", e.best_machine_ibs);
        }
        s.push_str("\n\n## Checks\n\n| Dataset | Check | Result | Detail |\n|---|---|---|---|\n");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} |",
                c.dataset,
                c.claim,
                if c.passed { "pass" } else { "FLAG" },
                c.detail
            );
        }
        s
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["method".to_string()];
        for d in &self.datasets {
            header.push(format!("{d} mean"));
            header.push(format!("{d} sd"));
        }
        w.write_record(&header)?;
        for (v, n) in Self::table_rows() {
            let mut row = vec![method_label(v, n)];
            for k in 0..self.datasets.len() {
                match self.cell(k, v, n) {
                    Some(m) => {
                        row.push(m.mean_ibs.to_string());
                        row.push(m.sd_ibs.to_string());
                    }
                    None => {
                        row.push(String::new());
                        row.push(String::new());
                    }
                }
            }
            w.write_record(&row)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Validation(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }

    pub fn write(&self, out: &Path) -> Result<()> {
        write_atomic(&out.join("table.md"), self.to_markdown().as_bytes())?;
        write_atomic(&out.join("table.csv"), self.to_csv()?.as_bytes())?;
        write_atomic(
            &out.join("report.json"),
            serde_json::to_string_pretty(self)?.as_bytes(),
        )
    }
}

/// Experiment configs (`*.json`) in a directory, sorted by file name.
pub fn load_config_dir(dir: &Path) -> Result<Vec<ExperimentConfig>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Params(format!(
            "no experiment configs in {}",
            dir.display()
        )));
    }
    paths.iter().map(|p| ExperimentConfig::load(p)).collect()
}

/// Runs tune + evaluate for every config. Every dataset is loaded before
/// anything is written, so an unreadable input leaves `out` untouched. If a
/// later stage fails, a `status.json` is written and the error is returned.
pub fn reproduce(configs: &[ExperimentConfig], out: &Path) -> Result<ReproduceReport> {
    let datasets = configs
        .iter()
        .map(|c| {
            c.load_dataset()
                .map(|(ds, _)| ds)
                .map_err(|e| Error::Dataset {
                    name: c.name.clone(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut statuses: Vec<DatasetStatus> = configs
        .iter()
        .map(|c| DatasetStatus {
            dataset: c.name.clone(),
            status: "not run".into(),
        })
        .collect();
    let mut evaluations = Vec::new();
    let mut tuning = BTreeMap::new();
    let mut checks = Vec::new();
    for (k, cfg) in configs.iter().enumerate() {
        match tune_and_evaluate(&datasets[k], cfg) {
            Ok((tuned, report)) => {
                statuses[k].status = "ok".into();
                tuning.insert(
                    cfg.name.clone(),
                    tuned.iter().map(TuneSummary::from_result).collect(),
                );
                checks.extend(claim_checks(&report));
                evaluations.push(report);
            }
            Err(e) => {
                statuses[k].status = format!("failed: {e}");
                write_atomic(
                    &out.join("status.json"),
                    serde_json::to_string_pretty(&statuses)?.as_bytes(),
                )?;
                return Err(Error::Dataset {
                    name: cfg.name.clone(),
                    source: Box::new(e),
                });
            }
        }
    }
    let report = ReproduceReport {
        datasets: configs.iter().map(|c| c.name.clone()).collect(),
        evaluations,
        tuning,
        checks,
    };
    report.write(out)?;
    write_atomic(
        &out.join("status.json"),
        serde_json::to_string_pretty(&statuses)?.as_bytes(),
    )?;
    Ok(report)
}
