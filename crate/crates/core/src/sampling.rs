//! Example oracles for `μ_r`, calibrated coefficient estimators, and estimation
//! when the bias is not known in advance.

use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::boolfn::{Junta, Sign};
use crate::error::{domain, invalid, Error, Result};
use crate::measure::{check_bias, sample_uniform_into, sigma, stream_rng, BiasVector};
use crate::subsets::combinations;

/// A labeled example `(x, f(x))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub x: Vec<Sign>,
    pub label: Sign,
}

/// Anything that hands out labeled examples one at a time.
pub trait ExampleSource {
    /// Number of input coordinates.
    fn n(&self) -> usize;

    fn draw(&mut self) -> Result<Example>;

    /// The bias, unless it is hidden from the consumer.
    fn known_bias(&self) -> Option<f64>;

    /// Draws served so far.
    fn draws(&self) -> u64;

    fn draw_many(&mut self, m: usize) -> Result<Vec<Example>> {
        (0..m).map(|_| self.draw()).collect()
    }
}

impl<S: ExampleSource + ?Sized> ExampleSource for &mut S {
    fn n(&self) -> usize {
        (**self).n()
    }

    fn draw(&mut self) -> Result<Example> {
        (**self).draw()
    }

    fn known_bias(&self) -> Option<f64> {
        (**self).known_bias()
    }

    fn draws(&self) -> u64 {
        (**self).draws()
    }
}

impl<S: ExampleSource + ?Sized> ExampleSource for Box<S> {
    fn n(&self) -> usize {
        (**self).n()
    }

    fn draw(&mut self) -> Result<Example> {
        (**self).draw()
    }

    fn known_bias(&self) -> Option<f64> {
        (**self).known_bias()
    }

    fn draws(&self) -> u64 {
        (**self).draws()
    }
}

/// `EX(f, μ_r)` backed by a seeded stream.
#[derive(Clone, Debug)]
pub struct Oracle {
    target: Junta,
    bias: f64,
    hide_bias: bool,
    rng: ChaCha8Rng,
    draws: u64,
}

impl Oracle {
    /// The stream is derived from `(master_seed, oracle_id)` alone.
    pub fn new(target: Junta, bias: f64, master_seed: u64, oracle_id: u64) -> Result<Self> {
        check_bias(bias)?;
        Ok(Oracle {
            target,
            bias,
            hide_bias: false,
            rng: stream_rng(master_seed, oracle_id),
            draws: 0,
        })
    }

    /// Withhold the bias from consumers.
    pub fn hidden(mut self) -> Self {
        self.hide_bias = true;
        self
    }

    /// The true bias, for harnesses that hold ground truth.
    pub fn true_bias(&self) -> f64 {
        self.bias
    }
}

impl ExampleSource for Oracle {
    fn n(&self) -> usize {
        self.target.n()
    }

    fn draw(&mut self) -> Result<Example> {
        let mut x = vec![Sign::Minus; self.target.n()];
        sample_uniform_into(self.bias, &mut self.rng, &mut x);
        let label = self.target.eval_unchecked(&x);
        self.draws += 1;
        Ok(Example { x, label })
    }

    fn known_bias(&self) -> Option<f64> {
        (!self.hide_bias).then_some(self.bias)
    }

    fn draws(&self) -> u64 {
        self.draws
    }
}

/// Serves a fixed list of examples in order.
#[derive(Clone, Debug)]
pub struct ReplayOracle {
    n: usize,
    examples: Vec<Example>,
    bias: Option<f64>,
    id: usize,
    next: usize,
}

impl ReplayOracle {
    pub fn new(n: usize, examples: Vec<Example>, bias: Option<f64>, id: usize) -> Result<Self> {
        if let Some(e) = examples.iter().find(|e| e.x.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: e.x.len(),
            });
        }
        if let Some(r) = bias {
            check_bias(r)?;
        }
        Ok(ReplayOracle {
            n,
            examples,
            bias,
            id,
            next: 0,
        })
    }

    pub fn from_csv(path: &Path, bias: Option<f64>, id: usize) -> Result<Self> {
        let (n, examples) = read_examples_csv(path)?;
        Self::new(n, examples, bias, id)
    }

    pub fn remaining(&self) -> usize {
        self.examples.len() - self.next
    }
}

impl ExampleSource for ReplayOracle {
    fn n(&self) -> usize {
        self.n
    }

    fn draw(&mut self) -> Result<Example> {
        let e = self
            .examples
            .get(self.next)
            .cloned()
            .ok_or(Error::OracleExhausted(self.id))?;
        self.next += 1;
        Ok(e)
    }

    fn known_bias(&self) -> Option<f64> {
        self.bias
    }

    fn draws(&self) -> u64 {
        self.next as u64
    }
}

/// Passes draws through and keeps a copy of each.
#[derive(Debug)]
pub struct Recorder<S> {
    inner: S,
    log: Vec<Example>,
}

impl<S: ExampleSource> Recorder<S> {
    pub fn new(inner: S) -> Self {
        Recorder { inner, log: Vec::new() }
    }

    pub fn log(&self) -> &[Example] {
        &self.log
    }

    pub fn into_parts(self) -> (S, Vec<Example>) {
        (self.inner, self.log)
    }
}

impl<S: ExampleSource> ExampleSource for Recorder<S> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn draw(&mut self) -> Result<Example> {
        let e = self.inner.draw()?;
        self.log.push(e.clone());
        Ok(e)
    }

    fn known_bias(&self) -> Option<f64> {
        self.inner.known_bias()
    }

    fn draws(&self) -> u64 {
        self.inner.draws()
    }
}

/// One row per example: `x0..x{n-1}` as `-1`/`1`, then `label`.
pub fn write_examples_csv(path: &Path, n: usize, examples: &[Example]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    for e in examples {
        let row =
            e.x.iter()
                .chain(std::iter::once(&e.label))
                .map(|s| s.to_i8().to_string());
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_examples_csv(path: &Path) -> Result<(usize, Vec<Example>)> {
    let mut r = csv::Reader::from_path(path)?;
    let width = r.headers()?.len();
    if width == 0 {
        return Err(Error::Parse("example file has no columns".into()));
    }
    let n = width - 1;
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let signs = rec
            .iter()
            .map(|v| match v.trim() {
                "1" | "+1" => Ok(Sign::Plus),
                "-1" => Ok(Sign::Minus),
                other => Err(Error::Parse(format!("row {}: bad sign {other:?}", line + 1))),
            })
            .collect::<Result<Vec<Sign>>>()?;
        let (label, x) = signs.split_last().expect("csv enforces the header width");
        out.push(Example {
            x: x.to_vec(),
            label: *label,
        });
    }
    Ok((n, out))
}

/// Accuracy and confidence knobs of the estimators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorParams {
    pub epsilon: f64,
    pub delta: f64,
    /// Bias margin: `|r| <= 1 - alpha`.
    pub alpha: f64,
    pub gamma: f64,
}

impl EstimatorParams {
    pub fn new(epsilon: f64, delta: f64, alpha: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [
            ("epsilon", epsilon),
            ("delta", delta),
            ("alpha", alpha),
            ("gamma", gamma),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(domain(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        Ok(EstimatorParams {
            epsilon,
            delta,
            alpha,
            gamma,
        })
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(domain(format!("{name} = {v} must be positive and finite")))
    }
}

fn ceil_count(v: f64) -> Result<u64> {
    if v > 0.0 && v < u64::MAX as f64 {
        Ok(v.ceil() as u64)
    } else {
        Err(domain(format!("sample size {v} is not representable")))
    }
}

/// `ceil(2 ln(2/δ) (2^|S| / ε)^2 σ^(-2|S|))`.
pub fn hoeffding_sample_size(card_s: usize, sigma: f64, epsilon: f64, delta: f64) -> Result<u64> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(domain(format!("sigma = {sigma} must lie in (0, 1]")));
    }
    positive("epsilon", epsilon)?;
    let log = positive("ln(2/delta)", (2.0 / positive("delta", delta)?).ln())?;
    let range = 2f64.powi(card_s as i32) / epsilon;
    ceil_count(2.0 * log * range * range / sigma.powi(2 * card_s as i32))
}

/// `ceil(8 ln(4/δ) / γ^2)`.
pub fn bias_sample_size(gamma: f64, delta: f64) -> Result<u64> {
    positive("gamma", gamma)?;
    let log = positive("ln(4/delta)", (4.0 / positive("delta", delta)?).ln())?;
    ceil_count(8.0 * log / (gamma * gamma))
}

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(self) -> f64 {
        self.sum + self.carry
    }
}

/// Empirical `⟨f, χ_S(·, r)⟩`. Shared by the single and batch paths so both
/// produce identical bits.
fn coefficient_kernel(examples: &[Example], s: &[usize], r: f64, sig: f64) -> f64 {
    let plus = (1.0 - r) / sig;
    let minus = (-1.0 - r) / sig;
    let mut acc = CompensatedSum::default();
    for e in examples {
        let mut v = e.label.to_f64();
        for &i in s {
            v *= if e.x[i].is_plus() { plus } else { minus };
        }
        acc.add(v);
    }
    acc.total() / examples.len() as f64
}

fn check_subset(s: &[usize], n: usize) -> Result<()> {
    match s.iter().find(|&&i| i >= n) {
        Some(&index) => Err(Error::InvalidIndex { index, n }),
        None => Ok(()),
    }
}

/// `(1/m) Σ_t f(x^t) χ_S(x^t, r)`.
pub fn estimate_coefficient(examples: &[Example], s: &[usize], r: f64) -> Result<f64> {
    let first = examples.first().ok_or(Error::EmptySample)?;
    check_subset(s, first.x.len())?;
    let sig = sigma(r)?;
    Ok(coefficient_kernel(examples, s, r, sig))
}

/// One estimate per `S` with `1 <= |S| <= s_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelEstimate {
    pub subset: Vec<usize>,
    pub value: f64,
}

/// Estimates of every coefficient at levels `1..=s_max`, ordered by level
/// and then lexicographically.
pub fn estimate_level_batch(examples: &[Example], s_max: usize, r: f64) -> Result<Vec<LevelEstimate>> {
    let n = examples.first().ok_or(Error::EmptySample)?.x.len();
    estimate_level_batch_over(examples, &(0..n).collect::<Vec<_>>(), s_max, r)
}

/// As [`estimate_level_batch`], over subsets of `universe` only (which must be
/// sorted); order is by level, then lexicographic in index.
pub fn estimate_level_batch_over(
    examples: &[Example],
    universe: &[usize],
    s_max: usize,
    r: f64,
) -> Result<Vec<LevelEstimate>> {
    let n = examples.first().ok_or(Error::EmptySample)?.x.len();
    check_subset(universe, n)?;
    let sig = sigma(r)?;
    let subsets: Vec<Vec<usize>> = (1..=s_max.min(universe.len()))
        .flat_map(|l| combinations(universe.len(), l))
        .map(|pos| pos.iter().map(|&p| universe[p]).collect())
        .collect();
    Ok(subsets
        .into_par_iter()
        .map(|subset| {
            let value = coefficient_kernel(examples, &subset, r, sig);
            LevelEstimate { subset, value }
        })
        .collect())
}

/// Pooled mean over every coordinate of every example.
pub fn estimate_bias(examples: &[Example]) -> Result<f64> {
    let n = examples.first().ok_or(Error::EmptySample)?.x.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let plus: u64 = examples
        .iter()
        .map(|e| e.x.iter().filter(|s| s.is_plus()).count() as u64)
        .sum();
    let total = (examples.len() * n) as f64;
    Ok((2.0 * plus as f64 - total) / total)
}

/// `⟨χ_S(·, r'), χ_T(·, r)⟩` under `μ_r`: zero unless `T ⊆ S`, otherwise
/// `σ_T / σ'_S · Π_{i ∈ S \ T} (r_i - r'_i)`.
pub fn chi_cross_coefficient(s: &[usize], t: &[usize], r: &BiasVector, r_prime: &BiasVector) -> Result<f64> {
    if r.len() != r_prime.len() {
        return Err(Error::LengthMismatch {
            expected: r.len(),
            actual: r_prime.len(),
        });
    }
    check_subset(s, r.len())?;
    check_subset(t, r.len())?;
    if !t.iter().all(|i| s.contains(i)) {
        return Ok(0.0);
    }
    let mut v = 1.0;
    for &i in t {
        v *= r.sigma()[i];
    }
    for &i in s {
        v /= r_prime.sigma()[i];
        if !t.contains(&i) {
            v *= r.r()[i] - r_prime.r()[i];
        }
    }
    Ok(v)
}

/// Largest `n` accepted by [`chi_l2_distance`].
pub const MAX_L2_VARS: usize = 14;

/// `‖χ_S(·, r') - χ_S(·, r)‖` in `L²(μ_r)`, by enumerating `{-1,1}^n`.
pub fn chi_l2_distance(s: &[usize], r: f64, r_prime: f64, n: usize) -> Result<f64> {
    if n > MAX_L2_VARS {
        return Err(Error::SizeLimit {
            what: "n",
            value: n,
            limit: MAX_L2_VARS,
        });
    }
    check_subset(s, n)?;
    let (sig, sig_p) = (sigma(r)?, sigma(r_prime)?);
    let p_plus = (1.0 + r) / 2.0;
    let mut acc = CompensatedSum::default();
    for idx in 0..1usize << n {
        let mut weight = 1.0;
        for i in 0..n {
            weight *= if idx >> i & 1 == 1 { p_plus } else { 1.0 - p_plus };
        }
        let (mut a, mut b) = (1.0, 1.0);
        for &i in s {
            let x = if idx >> i & 1 == 1 { 1.0 } else { -1.0 };
            a *= (x - r_prime) / sig_p;
            b *= (x - r) / sig;
        }
        acc.add(weight * (a - b) * (a - b));
    }
    Ok(acc.total().max(0.0).sqrt())
}

/// `(|S| + 1) γ / (α^(1/2) σ'^|S|)`.
pub fn chi_l2_bound(card_s: usize, alpha: f64, sigma_prime: f64, gamma: f64) -> f64 {
    (card_s as f64 + 1.0) * gamma / (alpha.sqrt() * sigma_prime.powi(card_s as i32))
}

/// Bias accuracy used when estimating a level-`card_s` coefficient without
/// knowing the bias: `α^((|S|+1)/2) / (2(|S|+1))`.
pub fn unknown_bias_gamma(card_s: usize, alpha: f64) -> f64 {
    let c = card_s.max(1) as f64 + 1.0;
    alpha.powf(c / 2.0) / (2.0 * c)
}

/// Outcome of [`estimate_coefficient_unknown_bias`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnknownBiasEstimate {
    pub value: f64,
    pub bias_estimate: f64,
    pub bias_draws: u64,
    pub coefficient_draws: u64,
}

/// Estimates the bias from `m₁ = bias_sample_size(γ, δ)` draws, then the
/// coefficient to `ε/2` with confidence `δ/2` from fresh draws using the
/// estimated bias in place of the true one.
pub fn estimate_coefficient_unknown_bias<O: ExampleSource + ?Sized>(
    oracle: &mut O,
    s: &[usize],
    alpha: f64,
    epsilon: f64,
    delta: f64,
) -> Result<UnknownBiasEstimate> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain(format!("alpha = {alpha} must lie in (0, 1]")));
    }
    check_subset(s, oracle.n())?;
    let gamma = unknown_bias_gamma(s.len(), alpha);
    let m1 = bias_sample_size(gamma, delta)?;
    let bias_sample = oracle.draw_many(m1 as usize)?;
    let r_est = estimate_bias(&bias_sample)?;
    let sig = sigma(r_est).map_err(|_| domain(format!("estimated bias {r_est} is degenerate")))?;
    let m2 = hoeffding_sample_size(s.len(), sig, epsilon / 2.0, delta / 2.0)?;
    let sample = oracle.draw_many(m2 as usize)?;
    Ok(UnknownBiasEstimate {
        value: coefficient_kernel(&sample, s, r_est, sig),
        bias_estimate: r_est,
        bias_draws: m1,
        coefficient_draws: m2,
    })
}

/// Draw count for estimating a bias well enough for level-`s` estimates.
pub fn unknown_bias_draws(s: usize, alpha: f64, delta: f64) -> Result<u64> {
    if s == 0 {
        return Err(invalid("level must be at least 1"));
    }
    bias_sample_size(unknown_bias_gamma(s, alpha), delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::Sign::{Minus as M, Plus as P};
    use crate::fourier::biased_coefficient;

    fn par3_in(n: usize) -> Junta {
        Junta::parity(n, vec![1, 4, 7]).unwrap()
    }

    #[test]
    fn sample_size_examples() {
        assert_eq!(hoeffding_sample_size(1, 1.0, 0.1, 0.01).unwrap(), 4239);
        assert_eq!(hoeffding_sample_size(0, 1.0, 0.1, 0.01).unwrap(), 1060);
        assert_eq!(hoeffding_sample_size(0, 1.0, 1.0, 1.0 - 1e-12).unwrap(), 2);
        assert!(hoeffding_sample_size(1, 0.0, 0.1, 0.1).is_err());
        assert!(hoeffding_sample_size(1, 1.0, 0.1, 2.0).is_err());
        assert_eq!(bias_sample_size(0.05, 0.05).unwrap(), 14023);
        assert_eq!(bias_sample_size(1.0, 0.05).unwrap(), 36);
        assert!(bias_sample_size(0.1, 4.0).is_err());
        assert!(bias_sample_size(0.0, 0.1).is_err());
    }

    #[test]
    fn oracle_streams() {
        let f = par3_in(10);
        let mut a = Oracle::new(f.clone(), 0.2, 9, 0).unwrap();
        let mut b = Oracle::new(f.clone(), 0.2, 9, 0).unwrap();
        let mut c = Oracle::new(f.clone(), 0.2, 9, 1).unwrap();
        let ea = a.draw_many(50).unwrap();
        assert_eq!(ea, b.draw_many(50).unwrap());
        assert_ne!(ea, c.draw_many(50).unwrap());
        assert!(ea.iter().all(|e| e.label == f.eval(&e.x).unwrap()));
        assert_eq!(a.draws(), 50);
        assert!(Oracle::new(f.clone(), 1.0, 0, 0).is_err());
        assert_eq!(Oracle::new(f, 0.3, 0, 0).unwrap().hidden().known_bias(), None);
    }

    #[test]
    fn empty_and_trivial_estimates() {
        assert!(matches!(estimate_coefficient(&[], &[0], 0.0), Err(Error::EmptySample)));
        let ex = vec![
            Example {
                x: vec![P, M],
                label: P,
            },
            Example {
                x: vec![M, M],
                label: P,
            },
            Example {
                x: vec![P, P],
                label: M,
            },
        ];
        assert!((estimate_coefficient(&ex, &[], 0.3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let all_plus = vec![
            Example {
                x: vec![P; 4],
                label: M
            };
            3
        ];
        assert_eq!(estimate_bias(&all_plus).unwrap(), 1.0);
        let alternating = vec![
            Example {
                x: vec![P, M, P, M],
                label: M
            };
            5
        ];
        assert_eq!(estimate_bias(&alternating).unwrap(), 0.0);
    }

    #[test]
    fn batch_matches_single() {
        let f = Junta::and(5, vec![0, 2]).unwrap();
        let ex = Oracle::new(f, 0.25, 3, 0).unwrap().draw_many(500).unwrap();
        let batch = estimate_level_batch(&ex, 2, 0.25).unwrap();
        assert_eq!(batch.len(), 15);
        for e in &batch {
            assert_eq!(
                e.value.to_bits(),
                estimate_coefficient(&ex, &e.subset, 0.25).unwrap().to_bits()
            );
        }
        assert_eq!(batch[0].subset, vec![0]);
        assert_eq!(batch[5].subset, vec![0, 1]);
        assert_eq!(estimate_level_batch(&ex, 1, 0.25).unwrap().len(), 5);
    }

    #[test]
    fn estimator_lands_near_truth() {
        let f = par3_in(10);
        let truth = biased_coefficient(&f, &[1], &BiasVector::uniform(10, 0.5).unwrap()).unwrap();
        assert!((truth - 0.216_506_350_946_109_66).abs() < 1e-12);
        let ex = Oracle::new(f, 0.5, 11, 0).unwrap().draw_many(50_000).unwrap();
        assert!((estimate_coefficient(&ex, &[1], 0.5).unwrap() - truth).abs() < 0.02);
    }

    #[test]
    fn chi_examples() {
        let z = BiasVector::uniform(2, 0.0).unwrap();
        let p = BiasVector::uniform(2, 0.1).unwrap();
        assert_eq!(chi_cross_coefficient(&[0], &[1], &z, &p).unwrap(), 0.0);
        assert!((chi_cross_coefficient(&[0], &[], &z, &p).unwrap() + 0.100_503_781_525_921_1).abs() < 1e-12);
        assert!((chi_cross_coefficient(&[0], &[0], &z, &p).unwrap() - 1.005_037_815_259_212).abs() < 1e-12);

        let d = chi_l2_distance(&[0], 0.0, 0.1, 1).unwrap();
        assert!((d - 0.100_630).abs() < 1e-5, "{d}");
        let bound = chi_l2_bound(1, 1.0, sigma(0.1).unwrap(), 0.1);
        assert!((bound - 0.201_007_5).abs() < 1e-6 && d <= bound);
        assert_eq!(chi_l2_distance(&[0, 1], 0.3, 0.3, 3).unwrap(), 0.0);
        assert_eq!(chi_l2_distance(&[], 0.3, -0.2, 3).unwrap(), 0.0);
        assert!(chi_l2_distance(&[0], 0.0, 0.1, 15).is_err());
    }

    #[test]
    fn replay_and_csv_round_trip() {
        let f = Junta::and(4, vec![1, 3]).unwrap();
        let mut rec = Recorder::new(Oracle::new(f, -0.2, 5, 2).unwrap());
        let drawn = rec.draw_many(20).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ex.csv");
        write_examples_csv(&path, 4, rec.log()).unwrap();
        let mut replay = ReplayOracle::from_csv(&path, Some(-0.2), 2).unwrap();
        assert_eq!(replay.draw_many(20).unwrap(), drawn);
        assert!(matches!(replay.draw(), Err(Error::OracleExhausted(2))));
    }

    #[test]
    fn unknown_bias_constant_target() {
        let f = Junta::constant(6, P).unwrap();
        let mut o = Oracle::new(f, 0.2, 1, 0).unwrap().hidden();
        let est = estimate_coefficient_unknown_bias(&mut o, &[2], 0.5, 0.2, 0.1).unwrap();
        assert!(est.value.abs() <= 0.2);
        assert_eq!(o.draws(), est.bias_draws + est.coefficient_draws);
    }
}
