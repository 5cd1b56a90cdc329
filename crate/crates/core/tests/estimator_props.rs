mod common;

use proptest::prelude::*;
use survcobra::estimators::{censoring_survival, kaplan_meier, nelson_aalen, CENSORING_FLOOR};

fn arb_sample() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    proptest::collection::vec((0u32..30, any::<bool>()), 1..40).prop_map(|v| {
        // integer-valued times to force ties
        v.into_iter().map(|(t, e)| (t as f64 * 0.5, e)).unzip()
    })
}

fn probes(times: &[f64]) -> Vec<f64> {
    let mut p: Vec<f64> = times
        .iter()
        .flat_map(|&t| [t - 0.25, t, t + 0.25])
        .collect();
    p.push(-1.0);
    p.push(1e9);
    p.sort_by(f64::total_cmp);
    p
}

proptest! {
    #[test]
    fn nelson_aalen_is_nondecreasing_from_zero((times, events) in arb_sample()) {
        let h = nelson_aalen(&times, &events).unwrap();
        let mut prev = 0.0;
        prop_assert_eq!(h.eval(-1.0), 0.0);
        for t in probes(&times) {
            let v = h.eval(t);
            prop_assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn kaplan_meier_is_a_survival_function((times, events) in arb_sample()) {
        let s = kaplan_meier(&times, &events).unwrap();
        let mut prev = 1.0;
        for t in probes(&times) {
            let v = s.eval(t);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn exp_of_negative_hazard_dominates_kaplan_meier((times, events) in arb_sample()) {
        let h = nelson_aalen(&times, &events).unwrap();
        let s = kaplan_meier(&times, &events).unwrap();
        for t in probes(&times) {
            prop_assert!((-h.eval(t)).exp() >= s.eval(t) - 1e-15);
        }
    }

    #[test]
    fn censoring_survival_is_flipped_kaplan_meier((times, events) in arb_sample()) {
        let g = censoring_survival(&times, &events).unwrap();
        let flipped: Vec<bool> = events.iter().map(|e| !e).collect();
        let km = kaplan_meier(&times, &flipped).unwrap();
        prop_assert_eq!(g.raw(), &km);
        for t in probes(&times) {
            prop_assert_eq!(g.eval(t), km.eval(t).max(CENSORING_FLOOR));
            prop_assert!(g.eval(t) >= CENSORING_FLOOR);
        }
    }

    #[test]
    fn estimators_match_brute_force_on_random_samples((times, events) in arb_sample()) {
        let h = nelson_aalen(&times, &events).unwrap();
        let s = kaplan_meier(&times, &events).unwrap();
        for t in probes(&times) {
            prop_assert!((h.eval(t) - common::brute_nelson_aalen(&times, &events, t)).abs() < 1e-10);
            prop_assert!((s.eval(t) - common::brute_kaplan_meier(&times, &events, t)).abs() < 1e-10);
        }
    }
}
