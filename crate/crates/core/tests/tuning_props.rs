mod common;

use std::sync::Arc;

use rand::seq::SliceRandom;
use survcobra::data::subdivide;
use survcobra::estimators::censoring_survival_of;
use survcobra::tuning::{cv_tune_ordered, CvScore};
use survcobra::util::derive_seed;
use survcobra::{
    build_machine_pool, cv_tune, integrated_brier_score, kaplan_meier, make_time_grid, CobraModel,
    CobraParams, Error, Parallelism, SurvivalCurve, SurvivalDataset, TimeGrid, TuneConfig, Variant,
};

fn small_config(variant: Variant) -> TuneConfig {
    TuneConfig {
        variant,
        seed: 31,
        grid_resolution: 30,
        ..TuneConfig::default()
    }
}

#[test]
fn grid_has_the_expected_cardinality() {
    let ds = common::synthetic_dataset(160, 1);
    let result = cv_tune(&ds, &small_config(Variant::Weighted)).unwrap();
    let mut per_norm = std::collections::BTreeMap::new();
    for s in &result.cv_scores {
        per_norm
            .entry(s.norm)
            .or_insert_with(Vec::new)
            .push((s.epsilon, s.alpha));
        assert_eq!(s.fold_ibs.len(), 5);
        assert!((0.0..=1.0).contains(&s.fallback_rate));
    }
    assert_eq!(per_norm.len(), 2);
    for pairs in per_norm.values() {
        let mut eps: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        eps.dedup();
        assert!(eps.len() <= 20 && !eps.is_empty());
        assert_eq!(pairs.len(), eps.len() * 8);
    }
    assert!(result.cv_scores.len() <= 20 * 8 * 2);
}

#[test]
fn best_is_the_exhaustive_argmin() {
    let ds = common::synthetic_dataset(160, 2);
    for variant in Variant::ALL {
        let result = cv_tune(&ds, &small_config(variant)).unwrap();
        let min = result
            .cv_scores
            .iter()
            .map(|s| s.mean_ibs)
            .fold(f64::INFINITY, f64::min);
        let best = result.score_of(&result.best).unwrap();
        assert_eq!(best.mean_ibs, min);
        assert_eq!(result.best.variant, variant);
        // ties go to the larger epsilon
        for s in &result.cv_scores {
            if s.mean_ibs == min && s.norm == best.norm {
                assert!(s.epsilon <= best.epsilon);
            }
        }
        for s in &result.cv_scores {
            let mean = s.fold_ibs.iter().sum::<f64>() / s.fold_ibs.len() as f64;
            assert!((s.mean_ibs - mean).abs() < 1e-12);
        }
    }
}

#[test]
fn tuning_is_deterministic_across_modes() {
    let ds = common::synthetic_dataset(140, 3);
    let mut config = small_config(Variant::Weighted);
    let a = cv_tune(&ds, &config).unwrap();
    let b = cv_tune(&ds, &config).unwrap();
    assert_eq!(a, b);
    config.parallelism = Parallelism::Sequential;
    assert_eq!(cv_tune(&ds, &config).unwrap(), a);
}

#[test]
fn result_depends_only_on_the_fold_order_not_the_row_order() {
    let ds = common::synthetic_dataset(130, 4);
    let config = small_config(Variant::Straight);
    let mut order: Vec<usize> = (0..ds.n()).collect();
    order.shuffle(&mut common::rng(5));
    let base = cv_tune_ordered(&ds, &order, &config).unwrap();

    // permute the stored rows and carry the fold order along
    let mut perm: Vec<usize> = (0..ds.n()).collect();
    perm.shuffle(&mut common::rng(6));
    let permuted = ds.select(&perm);
    let mut inverse = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    let carried: Vec<usize> = order.iter().map(|&o| inverse[o]).collect();
    assert_eq!(cv_tune_ordered(&permuted, &carried, &config).unwrap(), base);
}

/// Re-scores fold 0 of the best candidate by hand, including the Kaplan-Meier
/// fallback for queries with no neighbours.
#[test]
fn fold_score_matches_a_manual_rebuild() {
    let ds = common::synthetic_dataset(150, 8);
    for variant in Variant::ALL {
        let config = small_config(variant);
        let mut order: Vec<usize> = (0..ds.n()).collect();
        order.shuffle(&mut common::rng(config.seed));
        let result = cv_tune(&ds, &config).unwrap();

        let ordered = ds.select(&order);
        let held_idx: Vec<usize> = (0..ordered.n()).filter(|p| p % 5 == 0).collect();
        let rest_idx: Vec<usize> = (0..ordered.n()).filter(|p| p % 5 != 0).collect();
        let held = ordered.select(&held_idx);
        let rest = ordered.select(&rest_idx);
        let (d_k, d_l) = subdivide(&rest, 0.5).unwrap();
        let pool = build_machine_pool(&d_k, derive_seed(config.seed, 0)).unwrap();
        let grid = Arc::new(make_time_grid(&rest, 30).unwrap());
        let (t, e): (Vec<f64>, Vec<bool>) = d_l.outcomes().into_iter().unzip();
        let fallback =
            SurvivalCurve::from_step(grid.clone(), &kaplan_meier(&t, &e).unwrap()).unwrap();

        let most_fallbacks = result
            .cv_scores
            .iter()
            .max_by(|a, b| a.fallback_rate.total_cmp(&b.fallback_rate))
            .unwrap();
        let as_params = |c: &CvScore| CobraParams {
            epsilon: c.epsilon,
            alpha: c.alpha,
            norm: c.norm,
            variant,
        };
        for s in [
            result.best,
            as_params(&result.cv_scores[0]),
            as_params(most_fallbacks),
        ] {
            let model = CobraModel::fit(
                pool.clone(),
                &d_l,
                grid.clone(),
                s,
                config.weights,
                Parallelism::Sequential,
            )
            .unwrap();
            let curves: Vec<SurvivalCurve> = held
                .records()
                .iter()
                .map(|r| match model.predict(&r.covariates) {
                    Ok(c) => c,
                    Err(Error::NoNeighbors { .. }) => fallback.clone(),
                    Err(e) => panic!("{e}"),
                })
                .collect();
            let outcomes = held.outcomes();
            let g = censoring_survival_of(&outcomes).unwrap();
            let score_grid = TimeGrid::from_outcomes(&outcomes, 30).unwrap();
            let ibs = integrated_brier_score(&curves, &outcomes, &g, &score_grid).unwrap();
            let reported = result.score_of(&s).unwrap().fold_ibs[0];
            assert!(
                (ibs - reported).abs() < 1e-12,
                "{variant}: {ibs} vs {reported}"
            );
        }
    }
}

#[test]
fn too_few_records_is_rejected() {
    let ds: SurvivalDataset = common::synthetic_dataset(9, 1);
    assert!(matches!(
        cv_tune(&ds, &TuneConfig::default()),
        Err(Error::Params(_))
    ));
}
