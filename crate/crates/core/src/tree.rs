//! Survival trees grown by log-rank splitting with Kaplan-Meier leaves, and
//! the eight-tree machine pool the ensemble aggregates over.

use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::{SurvivalDataset, TimeGrid};
use crate::error::{Error, Result};
use crate::estimators::{kaplan_meier, StepFunction};
use crate::metrics::SurvivalCurve;
use crate::par::{self, Parallelism};
use crate::util;

/// Number of machines in the default pool.
pub const POOL_SIZE: usize = 8;

const POOL_DEPTHS: [usize; 4] = [3, 4, 5, 6];
const POOL_LEAF_SIZES: [usize; 2] = [10, 20];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    All,
    Count(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf_size: usize,
    pub bootstrap: bool,
    pub seed: u64,
    pub max_features: MaxFeatures,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 4,
            min_leaf_size: 10,
            bootstrap: false,
            seed: 0,
            max_features: MaxFeatures::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        survival: StepFunction,
        members: usize,
    },
}

impl Node {
    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalTree {
    pub config: TreeConfig,
    pub n_features: usize,
    pub root: Node,
}

impl SurvivalTree {
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn n_leaves(&self) -> usize {
        self.root.leaves()
    }

    /// Kaplan-Meier curve of the leaf `covariates` routes to (`<=` goes left).
    pub fn leaf_survival(&self, covariates: &[f64]) -> Result<&StepFunction> {
        if covariates.len() != self.n_features {
            return Err(Error::Prediction(format!(
                "expected {} covariates, got {}",
                self.n_features,
                covariates.len()
            )));
        }
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { survival, .. } => return Ok(survival),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if covariates[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Log-rank chi-square over time-sorted `(time, event, in_first_group)`.
fn logrank_sorted(obs: &[(f64, bool, bool)]) -> f64 {
    let mut at_risk = obs.len() as f64;
    let mut at_risk_1 = obs.iter().filter(|o| o.2).count() as f64;
    let mut o_minus_e = 0.0;
    let mut var = 0.0;
    let mut i = 0;
    while i < obs.len() {
        let t = obs[i].0;
        let (mut d, mut d1, mut size, mut size1) = (0.0, 0.0, 0.0, 0.0);
        while i < obs.len() && obs[i].0 == t {
            let (_, event, first) = obs[i];
            size += 1.0;
            if first {
                size1 += 1.0;
            }
            if event {
                d += 1.0;
                if first {
                    d1 += 1.0;
                }
            }
            i += 1;
        }
        if d > 0.0 {
            let p = at_risk_1 / at_risk;
            o_minus_e += d1 - d * p;
            if at_risk > 1.0 {
                var += d * p * (1.0 - p) * (at_risk - d) / (at_risk - 1.0);
            }
        }
        at_risk -= size;
        at_risk_1 -= size1;
    }
    if var <= 0.0 {
        0.0
    } else {
        o_minus_e * o_minus_e / var
    }
}

/// Two-sample log-rank statistic. Returns 0 when the pooled variance
/// vanishes (including an empty side).
pub fn logrank_statistic(left: &[(f64, bool)], right: &[(f64, bool)]) -> f64 {
    let mut obs: Vec<(f64, bool, bool)> = left
        .iter()
        .map(|&(t, e)| (t, e, true))
        .chain(right.iter().map(|&(t, e)| (t, e, false)))
        .collect();
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));
    logrank_sorted(&obs)
}

struct Grower<'a> {
    x: Vec<&'a [f64]>,
    time: Vec<f64>,
    event: Vec<bool>,
    config: TreeConfig,
    n_features: usize,
}

impl Grower<'_> {
    fn leaf(&self, members: &[usize]) -> Result<Node> {
        let times: Vec<f64> = members.iter().map(|&i| self.time[i]).collect();
        let events: Vec<bool> = members.iter().map(|&i| self.event[i]).collect();
        Ok(Node::Leaf {
            survival: kaplan_meier(&times, &events)?,
            members: members.len(),
        })
    }

    fn features(&self, rng: &mut util::Rng) -> Vec<usize> {
        match self.config.max_features {
            MaxFeatures::Count(k) if k < self.n_features => {
                let mut f = rand::seq::index::sample(rng, self.n_features, k.max(1)).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..self.n_features).collect(),
        }
    }

    fn best_split(&self, members: &[usize], rng: &mut util::Rng) -> Option<(usize, f64)> {
        let min_leaf = self.config.min_leaf_size;
        // node members in time order; the mask marks the left child
        let mut by_time = members.to_vec();
        by_time.sort_by(|&a, &b| self.time[a].total_cmp(&self.time[b]));
        let mut pos_in_time = vec![0usize; self.time.len()];
        for (p, &i) in by_time.iter().enumerate() {
            pos_in_time[i] = p;
        }
        let mut obs: Vec<(f64, bool, bool)> = by_time
            .iter()
            .map(|&i| (self.time[i], self.event[i], false))
            .collect();

        let mut best: Option<(f64, usize, f64)> = None;
        for feature in self.features(rng) {
            let mut by_value = members.to_vec();
            by_value.sort_by(|&a, &b| self.x[a][feature].total_cmp(&self.x[b][feature]));
            obs.iter_mut().for_each(|o| o.2 = false);
            let mut k = 0;
            while k < by_value.len() {
                let v = self.x[by_value[k]][feature];
                while k < by_value.len() && self.x[by_value[k]][feature] == v {
                    obs[pos_in_time[by_value[k]]].2 = true;
                    k += 1;
                }
                if k == by_value.len() {
                    break;
                }
                let (n_left, n_right) = (k, by_value.len() - k);
                if n_left < min_leaf {
                    continue;
                }
                if n_right < min_leaf {
                    break;
                }
                let stat = logrank_sorted(&obs);
                if stat > 0.0 && best.is_none_or(|(b, _, _)| stat > b) {
                    let next = self.x[by_value[k]][feature];
                    best = Some((stat, feature, 0.5 * (v + next)));
                }
            }
        }
        best.map(|(_, f, thr)| (f, thr))
    }

    fn grow(&self, members: Vec<usize>, depth: usize, rng: &mut util::Rng) -> Result<Node> {
        if depth >= self.config.max_depth || members.len() < 2 * self.config.min_leaf_size {
            return self.leaf(&members);
        }
        let Some((feature, threshold)) = self.best_split(&members, rng) else {
            return self.leaf(&members);
        };
        let (left, right): (Vec<usize>, Vec<usize>) = members
            .iter()
            .partition(|&&i| self.x[i][feature] <= threshold);
        Ok(Node::Split {
            feature,
            threshold,
            left: Box::new(self.grow(left, depth + 1, rng)?),
            right: Box::new(self.grow(right, depth + 1, rng)?),
        })
    }
}

pub fn fit_tree(data: &SurvivalDataset, config: &TreeConfig) -> Result<SurvivalTree> {
    if config.max_depth < 1 {
        return Err(Error::Fit("max_depth must be >= 1".into()));
    }
    if config.min_leaf_size < 2 {
        return Err(Error::Fit("min_leaf_size must be >= 2".into()));
    }
    if data.n() < config.min_leaf_size {
        return Err(Error::Fit(format!(
            "{} records cannot fill a leaf of minimum size {}",
            data.n(),
            config.min_leaf_size
        )));
    }
    let mut rng = util::rng(config.seed);
    let rows: Vec<usize> = if config.bootstrap {
        (0..data.n())
            .map(|_| rng.random_range(0..data.n()))
            .collect()
    } else {
        (0..data.n()).collect()
    };
    let records = data.records();
    let grower = Grower {
        x: rows
            .iter()
            .map(|&i| records[i].covariates.as_slice())
            .collect(),
        time: rows.iter().map(|&i| records[i].time).collect(),
        event: rows.iter().map(|&i| records[i].event).collect(),
        config: *config,
        n_features: data.d(),
    };
    let root = grower.grow((0..rows.len()).collect(), 0, &mut rng)?;
    Ok(SurvivalTree {
        config: *config,
        n_features: data.d(),
        root,
    })
}

pub fn predict_tree(
    tree: &SurvivalTree,
    covariates: &[f64],
    grid: &Arc<TimeGrid>,
) -> Result<SurvivalCurve> {
    SurvivalCurve::from_step(grid.clone(), tree.leaf_survival(covariates)?)
}

/// The eight pool configurations: depth {3,4,5,6} x minimum leaf {10,20},
/// bootstrapped, `ceil(sqrt(d))` candidate features per node.
pub fn pool_configs(n_features: usize, seed: u64) -> Vec<TreeConfig> {
    let k = (n_features as f64).sqrt().ceil() as usize;
    let mut out = Vec::with_capacity(POOL_SIZE);
    for depth in POOL_DEPTHS {
        for leaf in POOL_LEAF_SIZES {
            out.push(TreeConfig {
                max_depth: depth,
                min_leaf_size: leaf,
                bootstrap: true,
                seed: seed.wrapping_add(out.len() as u64),
                max_features: MaxFeatures::Count(k.max(1)),
            });
        }
    }
    out
}

pub fn build_machine_pool(d_k: &SurvivalDataset, seed: u64) -> Result<Vec<SurvivalTree>> {
    build_machine_pool_with(d_k, seed, Parallelism::default())
}

pub fn build_machine_pool_with(
    d_k: &SurvivalDataset,
    seed: u64,
    mode: Parallelism,
) -> Result<Vec<SurvivalTree>> {
    let configs = pool_configs(d_k.d(), seed);
    par::try_map_indexed(configs.len(), mode, |m| fit_tree(d_k, &configs[m]))
}
