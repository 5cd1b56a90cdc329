//! Survival COBRA: conditional survival prediction from right-censored data
//! by aggregating survival-tree machines over proximity sets, with both
//! the Nelson-Aalen ("straight") and IBS-weighted aggregators, censored
//! Brier-score metrics, and cross-validated tuning.

pub mod cobra;
pub mod data;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod metrics;
pub mod par;
pub mod tree;
pub mod tuning;
pub mod util;

pub use cobra::{
    machine_distance, machine_ibs_weights, proximity_set, straight_predict, weighted_predict,
    CobraModel, CobraParams, NormKind, PredictionTable, Variant, WeightScheme,
};
pub use data::{
    load_csv, make_time_grid, split, DatasetSchema, SplitSpec, SurvivalDataset, SurvivalRecord,
    TimeGrid,
};
pub use error::{Error, Result};
pub use estimators::{censoring_survival, eval_step, kaplan_meier, nelson_aalen, StepFunction};
pub use metrics::{brier_score_censored, integrated_brier_score, per_machine_ibs, SurvivalCurve};
pub use par::Parallelism;
pub use tree::{
    build_machine_pool, fit_tree, logrank_statistic, predict_tree, SurvivalTree, TreeConfig,
};
pub use tuning::{cv_tune, epsilon_grid, TuneConfig, TuneResult};
