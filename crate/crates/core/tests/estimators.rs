//! Statistical behaviour of the estimators and the learner on seeded oracles.

mod common;

use common::{e2e_params, oracles};
use junta_core::fourier::biased_coefficient;
use junta_core::learner::{check_constant, find_one_relevant, learn_junta, LearnStatus, LearnerParams};
use junta_core::sampling::{
    estimate_bias, estimate_coefficient, estimate_coefficient_unknown_bias, ExampleSource, Oracle,
};
use junta_core::{BiasVector, Error, Junta, Sign};

const PAR3_AT_HALF: f64 = 0.216_506_350_946_109_66;

#[test]
fn par3_level_one_truth() {
    let f = Junta::parity(10, vec![1, 4, 7]).unwrap();
    let c = biased_coefficient(&f, &[1], &BiasVector::uniform(10, 0.5).unwrap()).unwrap();
    assert!((c - PAR3_AT_HALF).abs() < 1e-12, "{c}");
}

#[test]
fn mean_estimate_is_unbiased() {
    let f = Junta::random(6, 4, 99, true).unwrap();
    let s = vec![f.relevant()[0], f.relevant()[2]];
    let r = 0.35;
    let truth = biased_coefficient(&f, &s, &BiasVector::uniform(6, r).unwrap()).unwrap();
    let estimates: Vec<f64> = (0..200)
        .map(|seed| {
            let mut o = Oracle::new(f.clone(), r, seed, 0).unwrap();
            estimate_coefficient(&o.draw_many(2_000).unwrap(), &s, r).unwrap()
        })
        .collect();
    let mean = estimates.iter().sum::<f64>() / 200.0;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / 199.0;
    let se = (var / 200.0).sqrt();
    assert!((mean - truth).abs() <= 3.0 * se, "mean {mean} truth {truth} se {se}");
}

#[test]
fn hoeffding_sizes_are_calibrated() {
    for card in 1..=2 {
        let failures = common::calibration_failures(card, 0.1, 0.1, 200, 7 + card as u64);
        assert!(failures <= 20, "|S| = {card}: {failures} failures");
    }
}

#[test]
fn pooled_bias_estimate() {
    let f = Junta::parity(20, vec![0, 1]).unwrap();
    let hits = (0..100)
        .filter(|&seed| {
            let mut o = Oracle::new(f.clone(), 0.3, seed, 0).unwrap();
            (estimate_bias(&o.draw_many(14_023).unwrap()).unwrap() - 0.3).abs() <= 0.05
        })
        .count();
    assert!(hits >= 95, "{hits}");
}

#[test]
fn unknown_bias_par3() {
    let f = Junta::parity(10, vec![2, 5, 8]).unwrap();
    let hits = (0..40)
        .filter(|&seed| {
            let mut o = Oracle::new(f.clone(), 0.5, seed, 0).unwrap().hidden();
            let est = estimate_coefficient_unknown_bias(&mut o, &[2], 0.4, 0.05, 0.1).unwrap();
            assert_eq!(o.draws(), est.bias_draws + est.coefficient_draws);
            (est.value - PAR3_AT_HALF).abs() <= 0.05
        })
        .count();
    assert!(hits >= 36, "{hits}");
}

#[test]
fn unknown_bias_constant_target() {
    let f = Junta::constant(6, Sign::Plus).unwrap();
    let mut o = Oracle::new(f, -0.2, 3, 0).unwrap().hidden();
    let est = estimate_coefficient_unknown_bias(&mut o, &[0, 3], 0.5, 0.1, 0.1).unwrap();
    assert!(est.value.abs() <= 0.1, "{}", est.value);
}

#[test]
fn unknown_bias_outside_the_margin_does_not_crash() {
    let f = Junta::parity(6, vec![0, 1]).unwrap();
    let mut o = Oracle::new(f, 0.9, 3, 0).unwrap().hidden();
    let _ = estimate_coefficient_unknown_bias(&mut o, &[0], 0.5, 0.2, 0.2);
}

#[test]
fn nonconstant_targets_are_detected() {
    let p = LearnerParams::new(2, 1, 0.5, 0.4, 0.05);
    for f in [
        Junta::and(8, vec![2, 6]).unwrap(),
        Junta::parity(8, vec![0, 3, 5]).unwrap(),
    ] {
        let absent = (0..60)
            .filter(|&seed| {
                let mut o = Oracle::new(f.clone(), 0.0, seed, 0).unwrap();
                check_constant(&mut o, &p).unwrap().is_none()
            })
            .count();
        assert!(absent >= 57, "{absent}");
    }
}

#[test]
fn three_oracles_find_a_parity_variable() {
    let f = Junta::parity(30, vec![4, 13, 27]).unwrap();
    let p = e2e_params(3, 1, 0.5, 0.5, 50_000, 0.05);
    let found = (0..20)
        .filter(|&seed| {
            let mut os = oracles(&f, &[-0.5, 0.0, 0.5], seed);
            match find_one_relevant(&mut os, &p) {
                Ok(d) => f.relevant().contains(&d.index),
                Err(Error::NoCoefficientFound) => false,
                Err(e) => panic!("{e}"),
            }
        })
        .count();
    assert!(found >= 18, "{found}");
}

#[test]
fn and2_discoveries_are_sound() {
    let f = Junta::and(50, vec![0, 31]).unwrap();
    let p = e2e_params(2, 1, 0.7, 0.6, 20_000, 0.05);
    let mut found = 0;
    for seed in 0..20 {
        let mut os = oracles(&f, &[-0.3, 0.3], seed);
        if let Ok(d) = find_one_relevant(&mut os, &p) {
            assert!(f.relevant().contains(&d.index), "seed {seed}: {d:?}");
            found += 1;
        }
    }
    assert!(found >= 19, "{found}");
}

#[test]
fn learns_and2_exactly() {
    let f = Junta::and(50, vec![8, 42]).unwrap();
    let p = e2e_params(2, 1, 0.7, 0.6, 20_000, 0.05);
    let exact = (0..20)
        .filter(|&seed| {
            let mut os = oracles(&f, &[-0.3, 0.3], seed);
            let report = learn_junta(&mut os, &p).unwrap();
            report.status == LearnStatus::ExactSuccess && report.relevant == f.relevant() && report.table == f.core()
        })
        .count();
    assert!(exact >= 18, "{exact}");
}

#[test]
fn cross_coefficient_closed_form() {
    let err = common::cross_coefficient_max_error(300, 11);
    assert!(err <= 1e-10, "{err}");
}

#[test]
fn l2_distance_within_bound() {
    let (checked, violations) = common::l2_bound_violations(100, 5);
    assert_eq!(checked, 500);
    assert_eq!(violations, 0);
}

#[test]
fn elementary_facts() {
    assert_eq!(common::fact1_violations(), 0);
    assert_eq!(common::fact2_violations(), 0);
}
