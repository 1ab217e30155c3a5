//! Independent reference routes shared by the integration suites.
#![allow(dead_code)]

use junta_core::boolfn::index_to_assignment;
use junta_core::fourier::biased_coefficient;
use junta_core::learner::LearnerParams;
use junta_core::measure::{chi, density, sigma};
use junta_core::sampling::{
    chi_cross_coefficient, chi_l2_bound, chi_l2_distance, estimate_coefficient, estimate_coefficient_unknown_bias,
    hoeffding_sample_size, ExampleSource, Oracle,
};
use junta_core::subsets::combinations;
use junta_core::{BiasVector, Junta};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn oracles(f: &Junta, biases: &[f64], seed: u64) -> Vec<Oracle> {
    biases
        .iter()
        .enumerate()
        .map(|(j, &r)| Oracle::new(f.clone(), r, seed, j as u64).unwrap())
        .collect()
}

pub fn random_bias_vector(rng: &mut impl Rng, n: usize, bound: f64) -> BiasVector {
    BiasVector::new((0..n).map(|_| rng.random_range(-bound..bound)).collect()).unwrap()
}

/// `⟨χ_S(·, r'), χ_T(·, r)⟩_r` by summing over the whole cube.
pub fn cross_coefficient_bruteforce(s: &[usize], t: &[usize], r: &BiasVector, r_prime: &BiasVector) -> f64 {
    let n = r.len();
    (0..1usize << n)
        .map(|idx| {
            let x = index_to_assignment(idx, n);
            density(r, &x).unwrap() * chi(s, &x, r_prime) * chi(t, &x, r)
        })
        .sum()
}

fn random_subset(rng: &mut impl Rng, n: usize, max: usize) -> Vec<usize> {
    let size = rng.random_range(0..=max.min(n));
    let mut s = index::sample(rng, n, size).into_vec();
    s.sort_unstable();
    s
}

/// Largest deviation of the closed-form cross coefficient from the cube sum.
pub fn cross_coefficient_max_error(cases: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases)
        .map(|_| {
            let n = rng.random_range(1..=8);
            let r = random_bias_vector(&mut rng, n, 0.9);
            let rp = random_bias_vector(&mut rng, n, 0.9);
            let s = random_subset(&mut rng, n, n);
            // half the time take T ⊆ S so the nonzero branch is exercised
            let t = if rng.random_bool(0.5) {
                s.iter().copied().filter(|_| rng.random_bool(0.5)).collect()
            } else {
                random_subset(&mut rng, n, n)
            };
            let fast = chi_cross_coefficient(&s, &t, &r, &rp).unwrap();
            (fast - cross_coefficient_bruteforce(&s, &t, &r, &rp)).abs()
        })
        .fold(0.0, f64::max)
}

/// Pairs `(r, r')` with `|r| <= 0.8`, `|r - r'| <= 0.2`, every `|S| <= 4` and
/// `n <= 8`; counts cases where the exact distance exceeds the bound.
pub fn l2_bound_violations(pairs: usize, seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let mut violations = 0;
    for _ in 0..pairs {
        let r: f64 = rng.random_range(-0.8..=0.8);
        let rp = (r + rng.random_range(-0.2..=0.2)).clamp(-0.99, 0.99);
        let gamma = (r - rp).abs();
        // the bound is stated for |r'| <= 1 - alpha
        let alpha = 1.0 - rp.abs().max(r.abs());
        let n = rng.random_range(4..=8);
        for card in 0..=4 {
            let s: Vec<usize> = (0..card).collect();
            let d = chi_l2_distance(&s, r, rp, n).unwrap();
            let bound = chi_l2_bound(card, alpha, sigma(rp).unwrap(), gamma);
            checked += 1;
            if d > bound * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    (checked, violations)
}

/// `|a^s - b^s| <= s |a - b|` on a grid of `[0, 1]^2`, `s <= 10`.
pub fn fact1_violations() -> usize {
    let grid: Vec<f64> = (0..=100).map(|i| f64::from(i) / 100.0).collect();
    let mut bad = 0;
    for &a in &grid {
        for &b in &grid {
            for s in 1..=10 {
                if (a.powi(s) - b.powi(s)).abs() > f64::from(s) * (a - b).abs() + 1e-15 {
                    bad += 1;
                }
            }
        }
    }
    bad
}

/// `|σ(r') - σ(r)| <= |r' - r| / σ(r)` on a grid of `[-0.9, 0.9]^2`.
pub fn fact2_violations() -> usize {
    let grid: Vec<f64> = (-90..=90).map(|i| f64::from(i) / 100.0).collect();
    let mut bad = 0;
    for &r in &grid {
        for &rp in &grid {
            let (s, sp) = (sigma(r).unwrap(), sigma(rp).unwrap());
            if (sp - s).abs() > (rp - r).abs() / s + 1e-15 {
                bad += 1;
            }
        }
    }
    bad
}

/// One calibration trial target: a random junta with `k <= 5` in `n = 8`,
/// a level-`card` subset of its relevant variables,
/// and a uniform bias in `[-bound, bound]`.
fn calibration_case(rng: &mut ChaCha8Rng, card: usize, bound: f64) -> (Junta, Vec<usize>, f64) {
    let k = rng.random_range(card.max(1)..=5);
    let f = Junta::random(8, k, rng.random(), true).unwrap();
    let pos = combinations(k, card);
    let pick = &pos[rng.random_range(0..pos.len())];
    let s: Vec<usize> = pick.iter().map(|&p| f.relevant()[p]).collect();
    (f, s, rng.random_range(-bound..=bound))
}

/// Trials whose estimate from `hoeffding_sample_size` draws misses the exact
/// coefficient by more than `epsilon`.
pub fn calibration_failures(card: usize, epsilon: f64, delta: f64, trials: u64, seed: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .filter(|&trial| {
            let (f, s, r) = calibration_case(&mut rng, card, 0.8);
            let truth = biased_coefficient(&f, &s, &BiasVector::uniform(f.n(), r).unwrap()).unwrap();
            let m = hoeffding_sample_size(card, sigma(r).unwrap(), epsilon, delta).unwrap();
            let mut o = Oracle::new(f, r, seed ^ 0x5eed, trial).unwrap();
            let sample = o.draw_many(m as usize).unwrap();
            (estimate_coefficient(&sample, &s, r).unwrap() - truth).abs() > epsilon
        })
        .count() as u64
}

/// As [`calibration_failures`] with the bias hidden and `α = 0.4`.
pub fn unknown_bias_failures(card: usize, epsilon: f64, delta: f64, trials: u64, seed: u64) -> u64 {
    let alpha = 0.4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .filter(|&trial| {
            let (f, s, r) = calibration_case(&mut rng, card, 1.0 - alpha);
            let truth = biased_coefficient(&f, &s, &BiasVector::uniform(f.n(), r).unwrap()).unwrap();
            let mut o = Oracle::new(f, r, seed ^ 0xb1a5, trial).unwrap().hidden();
            let est = estimate_coefficient_unknown_bias(&mut o, &s, alpha, epsilon, delta).unwrap();
            (est.value - truth).abs() > epsilon
        })
        .count() as u64
}

/// Learner settings of the end-to-end runs: explicit per-coefficient budget
/// and threshold.
pub fn e2e_params(k: usize, s: usize, alpha: f64, gamma: f64, samples: u64, threshold: f64) -> LearnerParams {
    let mut p = LearnerParams::new(k, s, alpha, gamma, 0.05);
    p.samples_per_coefficient = Some(samples);
    p.threshold = Some(threshold);
    p
}
