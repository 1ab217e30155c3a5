//! Exact junta learning from several biased example oracles.
//!
//! The learner sees the target only through [`ExampleSource`] draws. It grows
//! a set `V` of relevant variables one at a time. For every assignment of `V`,
//! it checks the restricted function for constancy on rejection-sampled
//! restricted draws. It stops once every restriction is constant; those
//! constants form the truth table.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Serialize, Serializer};

use crate::boolfn::{sign_string, PartialAssignment, Sign};
use crate::error::{domain, invalid, Error, Result};
use crate::measure::{check_bias, sigma};
use crate::sampling::{
    bias_sample_size, estimate_bias, estimate_level_batch_over, hoeffding_sample_size, unknown_bias_gamma, Example,
    ExampleSource,
};

/// Default per-coefficient sample sizes above this are refused; pass an
/// explicit budget instead.
pub const MAX_DEFAULT_SAMPLES: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct LearnerParams {
    /// Bound on the number of relevant variables.
    pub k: usize,
    /// Highest coefficient level searched.
    pub s: usize,
    /// Bias margin: every oracle has `|r| <= 1 - alpha`.
    pub alpha: f64,
    /// Separation between oracle biases.
    pub gamma: f64,
    pub delta: f64,
    pub threshold: Option<f64>,
    pub samples_per_coefficient: Option<u64>,
    pub unknown_biases: bool,
    /// Rejection attempts allowed per restricted draw.
    pub attempt_budget: Option<u64>,
}

impl LearnerParams {
    pub fn new(k: usize, s: usize, alpha: f64, gamma: f64, delta: f64) -> Self {
        LearnerParams {
            k,
            s,
            alpha,
            gamma,
            delta,
            threshold: None,
            samples_per_coefficient: None,
            unknown_biases: false,
            attempt_budget: None,
        }
    }

    /// Checks the parameters against `t` supplied oracles, including `s * t >= k`.
    pub fn validate(&self, t: usize) -> Result<()> {
        self.validate_values(t)?;
        if self.s * t < self.k {
            return Err(invalid(format!("s * t = {} is below k = {}", self.s * t, self.k)));
        }
        Ok(())
    }

    /// As [`LearnerParams::validate`] without the `s * t >= k` requirement.
    pub fn validate_values(&self, t: usize) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("gamma", self.gamma), ("delta", self.delta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(domain(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        if t == 0 {
            return Err(invalid("at least one oracle is required"));
        }
        if self.s == 0 {
            return Err(invalid("s must be at least 1"));
        }
        if let Some(x) = self.threshold {
            if !(x > 0.0 && x.is_finite()) {
                return Err(domain(format!("threshold = {x} must be positive")));
            }
        }
        if self.samples_per_coefficient == Some(0) {
            return Err(invalid("samples per coefficient must be positive"));
        }
        if self.attempt_budget == Some(0) {
            return Err(invalid("attempt budget must be positive"));
        }
        Ok(())
    }
}

/// `α^(level/2) (γ/4)^k / 2`: half the guaranteed coefficient floor.
pub fn default_threshold(params: &LearnerParams, level: usize) -> f64 {
    params.alpha.powf(level as f64 / 2.0) * (params.gamma / 4.0).powi(params.k as i32) / 2.0
}

fn threshold(params: &LearnerParams) -> f64 {
    params.threshold.unwrap_or_else(|| default_threshold(params, params.s))
}

/// `ceil((2/α)^k ln(2/δ))`.
pub fn constancy_sample_size(k: usize, alpha: f64, delta: f64) -> Result<u64> {
    let v = (2.0 / alpha).powi(k as i32) * (2.0 / delta).ln();
    if v > 0.0 && v < u64::MAX as f64 {
        Ok(v.ceil() as u64)
    } else {
        Err(domain(format!("constancy sample size {v} is not representable")))
    }
}

/// Draws `ceil((2/α)^k ln(2/δ))` examples from `oracle`; the common label if
/// they all agree.
pub fn check_constant<O: ExampleSource + ?Sized>(oracle: &mut O, params: &LearnerParams) -> Result<Option<Sign>> {
    check_constant_with(oracle, params.k, params.alpha, params.delta)
}

fn check_constant_with<O: ExampleSource + ?Sized>(
    oracle: &mut O,
    k: usize,
    alpha: f64,
    delta: f64,
) -> Result<Option<Sign>> {
    let m = constancy_sample_size(k, alpha, delta)?;
    let first = oracle.draw()?.label;
    for _ in 1..m {
        if oracle.draw()?.label != first {
            return Ok(None);
        }
    }
    Ok(Some(first))
}

/// First draw from `oracle` that agrees with `rho`, within `attempt_budget` tries.
pub fn simulate_restricted_draw<O: ExampleSource + ?Sized>(
    oracle: &mut O,
    rho: &PartialAssignment,
    attempt_budget: u64,
) -> Result<Example> {
    for _ in 0..attempt_budget {
        let e = oracle.draw()?;
        if rho.iter().all(|(&i, &v)| e.x[i] == v) {
            return Ok(e);
        }
    }
    Err(Error::BudgetExhausted(attempt_budget))
}

/// `EX(f|ρ, μ_r)` simulated by rejection on an unrestricted source.
pub struct RestrictedView<'a, O: ?Sized> {
    inner: &'a mut O,
    rho: &'a PartialAssignment,
    attempt_budget: u64,
    served: u64,
}

impl<'a, O: ExampleSource + ?Sized> RestrictedView<'a, O> {
    pub fn new(inner: &'a mut O, rho: &'a PartialAssignment, attempt_budget: u64) -> Self {
        RestrictedView {
            inner,
            rho,
            attempt_budget,
            served: 0,
        }
    }
}

impl<O: ExampleSource + ?Sized> ExampleSource for RestrictedView<'_, O> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn draw(&mut self) -> Result<Example> {
        let e = simulate_restricted_draw(self.inner, self.rho, self.attempt_budget)?;
        self.served += 1;
        Ok(e)
    }

    fn known_bias(&self) -> Option<f64> {
        self.inner.known_bias()
    }

    fn draws(&self) -> u64 {
        self.served
    }
}

/// A coefficient estimate that crossed the threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discovery {
    /// Reported variable: the smallest free index of `subset`.
    pub index: usize,
    pub oracle: usize,
    pub level: usize,
    pub subset: Vec<usize>,
    pub estimate: f64,
    /// Restriction in force, as `(index, sign)` pairs.
    pub restriction: Vec<(usize, Sign)>,
}

/// Per-coefficient sample size for oracle `sigma` at confidence `delta_coef`.
fn coefficient_samples(params: &LearnerParams, sig: f64, thr: f64, delta_coef: f64) -> Result<u64> {
    if let Some(m) = params.samples_per_coefficient {
        return Ok(m);
    }
    let m = hoeffding_sample_size(params.s, sig, thr, delta_coef)?;
    if m > MAX_DEFAULT_SAMPLES {
        return Err(invalid(format!(
            "default sample size {m} per coefficient exceeds {MAX_DEFAULT_SAMPLES}; set an explicit budget or threshold"
        )));
    }
    Ok(m)
}

/// Scans oracles in order, levels `1..=s`, subsets of `free` lexicographically;
/// the first estimate above the threshold wins.
fn search_relevant<O: ExampleSource>(
    oracles: &mut [O],
    params: &LearnerParams,
    biases: &[f64],
    free: &[usize],
    delta: f64,
) -> Result<Option<Discovery>> {
    let thr = threshold(params);
    let t = oracles.len();
    let n = oracles[0].n() as f64;
    let delta_coef = delta / (t as f64 * n.powi(params.s as i32));
    // biases estimated from samples carry their own sigma
    let margin_sigma = sigma(1.0 - params.alpha)?;
    for (j, oracle) in oracles.iter_mut().enumerate() {
        let r = biases[j];
        let sig = if params.unknown_biases { margin_sigma } else { sigma(r)? };
        let m = coefficient_samples(params, sig, thr, delta_coef)?;
        let sample = oracle.draw_many(m as usize)?;
        let batch = estimate_level_batch_over(&sample, free, params.s, r)?;
        if let Some(hit) = batch.into_iter().find(|e| e.value.abs() > thr) {
            return Ok(Some(Discovery {
                index: hit.subset[0],
                oracle: j,
                level: hit.subset.len(),
                subset: hit.subset,
                estimate: hit.value,
                restriction: Vec::new(),
            }));
        }
    }
    Ok(None)
}

fn resolve_biases<O: ExampleSource>(oracles: &mut [O], params: &LearnerParams) -> Result<Vec<f64>> {
    if params.unknown_biases {
        let t = oracles.len() as f64;
        let m1 = bias_sample_size(unknown_bias_gamma(params.s, params.alpha), params.delta / t)?;
        return oracles
            .iter_mut()
            .map(|o| {
                let r = estimate_bias(&o.draw_many(m1 as usize)?)?;
                check_bias(r)?;
                Ok(r)
            })
            .collect();
    }
    oracles
        .iter()
        .enumerate()
        .map(|(j, o)| {
            o.known_bias()
                .ok_or_else(|| invalid(format!("oracle {j} hides its bias; enable unknown-bias mode")))
        })
        .collect()
}

/// One relevant variable of the target, from level-`1..=s` estimates.
///
/// `s * t >= k` is not enforced here; without it the search may legitimately
/// end in [`Error::NoCoefficientFound`].
pub fn find_one_relevant<O: ExampleSource>(oracles: &mut [O], params: &LearnerParams) -> Result<Discovery> {
    params.validate_values(oracles.len())?;
    let biases = resolve_biases(oracles, params)?;
    let free: Vec<usize> = (0..oracles[0].n()).collect();
    search_relevant(oracles, params, &biases, &free, params.delta)?.ok_or(Error::NoCoefficientFound)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LearnStatus {
    ExactSuccess,
    ConstantFunction,
    BudgetExhausted,
    Inconsistent,
    /// A restriction of all `k` found variables still had a relevant variable.
    KBoundExceeded,
    /// A non-constant restriction showed no coefficient above the threshold.
    NoCoefficientFound,
}

impl LearnStatus {
    pub fn is_success(self) -> bool {
        matches!(self, LearnStatus::ExactSuccess | LearnStatus::ConstantFunction)
    }
}

fn table_string<S: Serializer>(table: &[Sign], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&sign_string(table))
}

/// Example counts per oracle (`oracle_j` keys).
pub type SampleCounts = BTreeMap<String, u64>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnReport {
    pub status: LearnStatus,
    /// Found variables, increasing.
    pub relevant: Vec<usize>,
    /// Truth table over `relevant` (bit `b` of the index is `relevant[b]`).
    /// Empty unless the status is a success.
    #[serde(serialize_with = "table_string")]
    pub table: Vec<Sign>,
    pub samples: SampleCounts,
    /// Counts per phase: `bias`, `constancy`, `search`.
    pub phase_samples: BTreeMap<String, SampleCounts>,
    pub discoveries: Vec<Discovery>,
    pub bias_estimates: Option<Vec<f64>>,
    pub wall_ms: u64,
}

fn oracle_key(j: usize) -> String {
    format!("oracle_{j}")
}

struct Ledger {
    phases: BTreeMap<String, SampleCounts>,
}

impl Ledger {
    fn charge<O: ExampleSource>(&mut self, phase: &str, oracles: &[O], before: &[u64]) {
        let entry = self.phases.entry(phase.to_string()).or_default();
        for (j, o) in oracles.iter().enumerate() {
            *entry.entry(oracle_key(j)).or_default() += o.draws() - before[j];
        }
    }
}

fn draw_counts<O: ExampleSource>(oracles: &[O]) -> Vec<u64> {
    oracles.iter().map(|o| o.draws()).collect()
}

/// `ceil((2/α)^|ρ| ln(m k 2^k / δ)) * 4`.
pub fn default_attempt_budget(alpha: f64, fixed: usize, m: u64, k: usize, delta: f64) -> u64 {
    let runs = k.max(1) as f64 * 2f64.powi(k as i32);
    let v = (2.0 / alpha).powi(fixed as i32) * (m.max(1) as f64 * runs / delta).ln();
    (v.max(1.0).ceil() as u64).saturating_mul(4)
}

fn assignment(vars: &[usize], idx: usize) -> PartialAssignment {
    vars.iter()
        .enumerate()
        .map(|(b, &i)| (i, Sign::from_bool(idx >> b & 1 == 1)))
        .collect()
}

enum Scan {
    AllConstant(Vec<Sign>),
    Open(PartialAssignment),
}

/// Constancy check of every restriction fixing `vars`, in table order; stops
/// at the first non-constant one.
fn scan_restrictions<O: ExampleSource + ?Sized>(
    oracle: &mut O,
    vars: &[usize],
    budget: u64,
    k: usize,
    alpha: f64,
    delta: f64,
) -> Result<Scan> {
    let mut table = Vec::with_capacity(1 << vars.len());
    for idx in 0..1usize << vars.len() {
        let rho = assignment(vars, idx);
        let mut view = RestrictedView::new(&mut *oracle, &rho, budget);
        match check_constant_with(&mut view, k, alpha, delta)? {
            Some(v) => table.push(v),
            None => return Ok(Scan::Open(rho)),
        }
    }
    Ok(Scan::AllConstant(table))
}

enum Outcome {
    Done(Vec<Sign>),
    Status(LearnStatus),
}

fn status_of(e: Error) -> Result<LearnStatus> {
    match e {
        Error::BudgetExhausted(_) | Error::OracleExhausted(_) => Ok(LearnStatus::BudgetExhausted),
        other => Err(other),
    }
}

/// Learns all relevant variables and the truth table of a `k`-junta.
pub fn learn_junta<O: ExampleSource>(oracles: &mut [O], params: &LearnerParams) -> Result<LearnReport> {
    let start = Instant::now();
    params.validate(oracles.len())?;
    let n = oracles[0].n();
    if let Some(j) = oracles.iter().position(|o| o.n() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: oracles[j].n(),
        });
    }
    let mut ledger = Ledger {
        phases: BTreeMap::new(),
    };
    let before = draw_counts(oracles);
    let biases = resolve_biases(oracles, params)?;
    if params.unknown_biases {
        ledger.charge("bias", oracles, &before);
    }

    let k = params.k;
    let delta_run = params.delta / (k.max(1) as f64 * 2f64.powi(k as i32));
    let m_hint = params.samples_per_coefficient.unwrap_or_else(|| {
        let sig = sigma(1.0 - params.alpha).unwrap_or(1.0);
        coefficient_samples(params, sig, threshold(params), delta_run).unwrap_or(MAX_DEFAULT_SAMPLES)
    });
    let mut found: Vec<usize> = Vec::new();
    let mut discoveries: Vec<Discovery> = Vec::new();

    let outcome = loop {
        let budget = params
            .attempt_budget
            .unwrap_or_else(|| default_attempt_budget(params.alpha, found.len(), m_hint, k, delta_run));
        let before = draw_counts(oracles);
        let scan = scan_restrictions(&mut oracles[0], &found, budget, k, params.alpha, delta_run);
        ledger.charge("constancy", oracles, &before);
        let rho = match scan {
            Ok(Scan::AllConstant(table)) => break Outcome::Done(table),
            Ok(Scan::Open(rho)) => rho,
            Err(e) => break Outcome::Status(status_of(e)?),
        };

        let free: Vec<usize> = (0..n).filter(|i| !rho.contains_key(i)).collect();
        let before = draw_counts(oracles);
        let mut views: Vec<RestrictedView<'_, O>> = oracles
            .iter_mut()
            .map(|o| RestrictedView::new(o, &rho, budget))
            .collect();
        let res = search_relevant(&mut views, params, &biases, &free, delta_run);
        drop(views);
        ledger.charge("search", oracles, &before);
        match res {
            Ok(Some(mut d)) => {
                d.restriction = rho.iter().map(|(&i, &v)| (i, v)).collect();
                let index = d.index;
                discoveries.push(d);
                if found.len() == k {
                    break Outcome::Status(LearnStatus::KBoundExceeded);
                }
                let pos = found.partition_point(|&i| i < index);
                found.insert(pos, index);
            }
            Ok(None) if found.len() == k => break Outcome::Status(LearnStatus::Inconsistent),
            Ok(None) => break Outcome::Status(LearnStatus::NoCoefficientFound),
            Err(e) => break Outcome::Status(status_of(e)?),
        }
    };

    let (status, table) = match outcome {
        Outcome::Done(table) if found.is_empty() => (LearnStatus::ConstantFunction, table),
        Outcome::Done(table) => (LearnStatus::ExactSuccess, table),
        Outcome::Status(s) => (s, Vec::new()),
    };
    let samples = oracles
        .iter()
        .enumerate()
        .map(|(j, o)| (oracle_key(j), o.draws()))
        .collect();
    Ok(LearnReport {
        status,
        relevant: found,
        table,
        samples,
        phase_samples: ledger.phases,
        discoveries,
        bias_estimates: params.unknown_biases.then_some(biases),
        wall_ms: start.elapsed().as_millis() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::Junta;
    use crate::sampling::Oracle;

    fn oracles(f: &Junta, biases: &[f64], seed: u64) -> Vec<Oracle> {
        biases
            .iter()
            .enumerate()
            .map(|(j, &r)| Oracle::new(f.clone(), r, seed, j as u64).unwrap())
            .collect()
    }

    #[test]
    fn threshold_examples() {
        let p = LearnerParams::new(3, 1, 0.5, 0.4, 0.1);
        assert!((default_threshold(&p, 1) - 0.000_353_553_390_593_273_8).abs() < 1e-15);
        let p = LearnerParams::new(1, 1, 1.0, 4.0, 0.1);
        assert_eq!(default_threshold(&p, 1), 0.5);
        let p = LearnerParams::new(1, 2, 0.25, 4.0, 0.1);
        assert_eq!(default_threshold(&p, 2), 0.5 * 0.25);
    }

    #[test]
    fn validation() {
        let p = LearnerParams::new(3, 1, 0.5, 0.4, 0.1);
        assert!(p.validate(3).is_ok());
        assert!(p.validate(2).is_err());
        assert!(LearnerParams::new(3, 1, 1.5, 0.4, 0.1).validate(3).is_err());
    }

    #[test]
    fn constancy() {
        let one = Junta::constant(8, Sign::Plus).unwrap();
        let p = LearnerParams::new(2, 1, 0.5, 0.4, 0.05);
        let mut o = Oracle::new(one, 0.3, 1, 0).unwrap();
        assert_eq!(check_constant(&mut o, &p).unwrap(), Some(Sign::Plus));
        assert_eq!(o.draws(), constancy_sample_size(2, 0.5, 0.05).unwrap());

        let and2 = Junta::and(6, vec![1, 4]).unwrap();
        let hits = (0..40)
            .filter(|&seed| {
                let mut o = Oracle::new(and2.clone(), 0.0, seed, 0).unwrap();
                check_constant(&mut o, &p).unwrap().is_none()
            })
            .count();
        assert!(hits >= 38, "{hits}");
    }

    #[test]
    fn restricted_draws() {
        let f = Junta::parity(6, vec![0, 1]).unwrap();
        let mut o = Oracle::new(f, 0.0, 4, 0).unwrap();
        let empty = PartialAssignment::new();
        let e = simulate_restricted_draw(&mut o, &empty, 1).unwrap();
        assert_eq!(o.draws(), 1);
        assert_eq!(e.x.len(), 6);

        let rho: PartialAssignment = [(2, Sign::Plus), (5, Sign::Minus)].into_iter().collect();
        for _ in 0..1000 {
            let e = simulate_restricted_draw(&mut o, &rho, 1000).unwrap();
            assert!(e.x[2].is_plus() && !e.x[5].is_plus());
        }
        let per_draw = (o.draws() - 1) as f64 / 1000.0;
        assert!(per_draw < 4.5, "{per_draw}");

        let many: PartialAssignment = (0..6).map(|i| (i, Sign::Plus)).collect();
        let starved = (0..20)
            .filter(|_| {
                matches!(
                    simulate_restricted_draw(&mut o, &many, 1),
                    Err(Error::BudgetExhausted(1))
                )
            })
            .count();
        assert!(starved >= 15);
    }

    #[test]
    fn constant_target() {
        let f = Junta::constant(10, Sign::Minus).unwrap();
        let p = LearnerParams::new(2, 1, 0.5, 0.5, 0.05);
        let mut os = oracles(&f, &[-0.3, 0.3], 2);
        let report = learn_junta(&mut os, &p).unwrap();
        assert_eq!(report.status, LearnStatus::ConstantFunction);
        assert!(report.relevant.is_empty());
        assert_eq!(report.table, vec![Sign::Minus]);
    }

    #[test]
    fn learns_and2() {
        let f = Junta::and(20, vec![3, 11]).unwrap();
        let mut p = LearnerParams::new(2, 1, 0.7, 0.6, 0.05);
        p.samples_per_coefficient = Some(20_000);
        p.threshold = Some(0.05);
        let mut os = oracles(&f, &[-0.3, 0.3], 17);
        let report = learn_junta(&mut os, &p).unwrap();
        assert_eq!(report.status, LearnStatus::ExactSuccess, "{report:?}");
        assert_eq!(report.relevant, vec![3, 11]);
        assert_eq!(sign_string(&report.table), "0001");
        assert_eq!(report.samples["oracle_0"], os[0].draws());
    }

    #[test]
    fn single_uniform_oracle_misses_parity() {
        let f = Junta::parity(30, vec![2, 9, 20]).unwrap();
        let mut p = LearnerParams::new(3, 1, 0.5, 0.5, 0.05);
        p.samples_per_coefficient = Some(20_000);
        p.threshold = Some(0.05);
        let mut os = oracles(&f, &[0.0], 3);
        assert!(matches!(find_one_relevant(&mut os, &p), Err(Error::NoCoefficientFound)));
    }
}
