//! Fourier spectra of juntas with respect to product measures.
//!
//! The uniform spectrum `f^(S, 0)` is exact: integer numerators over `2^k`.
//! Biased coefficients come from the change-of-measure identity
//! `f^(S, r) = sigma_S * sum_{T ⊇ S} f^(T, 0) r_{T \ S}` and are evaluated in
//! double precision. The brute-force inner products in this module are the
//! independent reference for that identity.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::boolfn::{DenseFunction, Junta};
use crate::error::{invalid, Error, Result};
use crate::measure::{check_bias, sigma, BiasVector};
use crate::poly::DyadicPolynomial;
use crate::subsets::{binomial, mask_to_subset, subset_to_mask};

/// Largest ambient dimension for full enumeration.
pub const MAX_BRUTEFORCE_VARS: usize = 14;

/// Exact uniform-measure spectrum of a junta, indexed by subsets of its relevant set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformSpectrum {
    relevant: Vec<usize>,
    /// `num[mask]` is `2^k * f^(S, 0)` for `S = mask` over `relevant`.
    num: Vec<i64>,
}

impl UniformSpectrum {
    pub fn k(&self) -> usize {
        self.relevant.len()
    }

    pub fn relevant(&self) -> &[usize] {
        &self.relevant
    }

    pub fn numerators(&self) -> &[i64] {
        &self.num
    }

    /// Numerator of `f^(S, 0)` over `2^k`; zero for `S` outside the relevant set.
    pub fn numerator(&self, s: &[usize]) -> i64 {
        subset_to_mask(s, &self.relevant).map_or(0, |m| self.num[m])
    }

    pub fn coefficient(&self, s: &[usize]) -> BigRational {
        BigRational::new(self.numerator(s).into(), BigInt::from(1u64) << self.k())
    }

    pub fn value(&self, s: &[usize]) -> f64 {
        self.numerator(s) as f64 / (1u64 << self.k()) as f64
    }

    /// Nonzero coefficients as `(S, value)`, in mask order.
    pub fn nonzero(&self) -> Vec<(Vec<usize>, f64)> {
        let scale = (1u64 << self.k()) as f64;
        self.num
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(m, &c)| (mask_to_subset(m, &self.relevant), c as f64 / scale))
            .collect()
    }

    pub fn degree(&self) -> usize {
        self.num
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(m, _)| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    /// `sum_S f^(S,0)^2`, exactly (as a numerator over `4^k`).
    pub fn parseval_numerator(&self) -> i128 {
        self.num.iter().map(|&c| i128::from(c) * i128::from(c)).sum()
    }
}

/// Exact `f^(S, 0)` for all `S ⊆ relevant(f)` by an integer Walsh–Hadamard pass.
pub fn uniform_coefficients(f: &Junta) -> UniformSpectrum {
    let mut num: Vec<i64> = f.core().iter().map(|s| i64::from(s.to_i8())).collect();
    let len = num.len();
    let mut half = 1;
    while half < len {
        for block in (0..len).step_by(2 * half) {
            for lo in block..block + half {
                // lo has x_i = -1, hi has x_i = +1
                let (a, b) = (num[lo], num[lo + half]);
                num[lo] = a + b;
                num[lo + half] = b - a;
            }
        }
        half *= 2;
    }
    UniformSpectrum {
        relevant: f.relevant().to_vec(),
        num,
    }
}

fn check_len(f: &Junta, r: &BiasVector) -> Result<()> {
    if r.len() != f.n() {
        return Err(Error::LengthMismatch {
            expected: f.n(),
            actual: r.len(),
        });
    }
    Ok(())
}

/// `f^(S, r)` via the change-of-measure sum over `T ⊆ relevant(f)`, `T ⊇ S`.
pub fn biased_coefficient(f: &Junta, s: &[usize], r: &BiasVector) -> Result<f64> {
    check_len(f, r)?;
    let spectrum = uniform_coefficients(f);
    Ok(biased_coefficient_from(&spectrum, s, r))
}

/// Same as [`biased_coefficient`] with a precomputed uniform spectrum.
pub fn biased_coefficient_from(spectrum: &UniformSpectrum, s: &[usize], r: &BiasVector) -> f64 {
    let Some(smask) = subset_to_mask(s, &spectrum.relevant) else {
        return 0.0;
    };
    let scale = (1u64 << spectrum.k()) as f64;
    let rel = &spectrum.relevant;
    let free = !smask & ((1usize << rel.len()) - 1);
    // enumerate T = S ∪ U over subsets U of the complement
    let mut total = 0.0;
    let mut u = free;
    loop {
        let c = spectrum.num[smask | u];
        if c != 0 {
            let rprod: f64 = (0..rel.len())
                .filter(|b| u >> b & 1 == 1)
                .map(|b| r.r()[rel[b]])
                .product();
            total += c as f64 * rprod;
        }
        if u == 0 {
            break;
        }
        u = (u - 1) & free;
    }
    let sigma_s: f64 = s.iter().map(|&i| r.sigma()[i]).product();
    sigma_s * total / scale
}

/// All `f^(S, r)` for `S ⊆ relevant(f)`, indexed by mask, in `O(k 2^k)`.
pub fn biased_spectrum(f: &Junta, r: &BiasVector) -> Result<Vec<f64>> {
    check_len(f, r)?;
    let spectrum = uniform_coefficients(f);
    let rel = f.relevant();
    let scale = (1u64 << rel.len()) as f64;
    let mut a: Vec<f64> = spectrum.num.iter().map(|&c| c as f64 / scale).collect();
    // superset-sum transform weighted by r_i
    for (b, &i) in rel.iter().enumerate() {
        let bit = 1usize << b;
        let ri = r.r()[i];
        for mask in 0..a.len() {
            if mask & bit == 0 {
                a[mask] += ri * a[mask | bit];
            }
        }
    }
    for (mask, v) in a.iter_mut().enumerate() {
        for (b, &i) in rel.iter().enumerate() {
            if mask >> b & 1 == 1 {
                *v *= r.sigma()[i];
            }
        }
    }
    Ok(a)
}

/// `<f, chi_S>_r` by enumeration of all `2^n` inputs.
pub fn biased_coefficient_bruteforce(f: &DenseFunction, s: &[usize], r: &BiasVector) -> Result<f64> {
    check_dense(f, r)?;
    if let Some(&i) = s.iter().find(|&&i| i >= f.n()) {
        return Err(Error::InvalidIndex { index: i, n: f.n() });
    }
    let n = f.n();
    let mut total = 0.0;
    for idx in 0..1usize << n {
        let mut w = f.value_at_index(idx);
        for i in 0..n {
            let plus = idx >> i & 1 == 1;
            w *= if plus {
                (1.0 + r.r()[i]) / 2.0
            } else {
                (1.0 - r.r()[i]) / 2.0
            };
        }
        let chi: f64 = s
            .iter()
            .map(|&i| {
                let x = if idx >> i & 1 == 1 { 1.0 } else { -1.0 };
                (x - r.r()[i]) / r.sigma()[i]
            })
            .product();
        total += w * chi;
    }
    Ok(total)
}

/// `<f, chi_S>_r` for every `S ⊆ universe` by enumeration, indexed by mask
/// over `universe`. The `chi_S(x)` products for one `x` are shared across `S`.
pub fn bruteforce_spectrum(f: &DenseFunction, universe: &[usize], r: &BiasVector) -> Result<Vec<f64>> {
    check_dense(f, r)?;
    if let Some(&i) = universe.iter().find(|&&i| i >= f.n()) {
        return Err(Error::InvalidIndex { index: i, n: f.n() });
    }
    let n = f.n();
    let size = 1usize << universe.len();
    let mut acc = vec![0.0; size];
    let mut chi = vec![1.0; size];
    for idx in 0..1usize << n {
        let mut w = f.value_at_index(idx);
        for i in 0..n {
            let plus = idx >> i & 1 == 1;
            w *= if plus {
                (1.0 + r.r()[i]) / 2.0
            } else {
                (1.0 - r.r()[i]) / 2.0
            };
        }
        for mask in 1..size {
            let low = mask.trailing_zeros() as usize;
            let i = universe[low];
            let x = if idx >> i & 1 == 1 { 1.0 } else { -1.0 };
            chi[mask] = chi[mask & (mask - 1)] * (x - r.r()[i]) / r.sigma()[i];
        }
        for (a, c) in acc.iter_mut().zip(&chi) {
            *a += w * c;
        }
    }
    Ok(acc)
}

fn check_dense(f: &DenseFunction, r: &BiasVector) -> Result<()> {
    if f.n() > MAX_BRUTEFORCE_VARS {
        return Err(Error::SizeLimit {
            what: "n",
            value: f.n(),
            limit: MAX_BRUTEFORCE_VARS,
        });
    }
    if r.len() != f.n() {
        return Err(Error::LengthMismatch {
            expected: f.n(),
            actual: r.len(),
        });
    }
    Ok(())
}

/// `E_r[f] = sum_t w_t(f, 0) r^t`, exact.
pub fn expectation_polynomial(f: &Junta) -> DyadicPolynomial {
    expectation_polynomial_from(&uniform_coefficients(f))
}

pub fn expectation_polynomial_from(spectrum: &UniformSpectrum) -> DyadicPolynomial {
    let mut level = vec![0i64; spectrum.k() + 1];
    for (mask, &c) in spectrum.num.iter().enumerate() {
        level[mask.count_ones() as usize] += c;
    }
    DyadicPolynomial::from_i64(&level, spectrum.k() as u32)
}

/// `w_s(f, r) = sigma^s sum_{t >= s} C(t, s) w_t(f, 0) r^(t - s)`.
pub fn level_weight(f: &Junta, s: usize, r: f64) -> Result<f64> {
    if s > f.n() {
        return Err(invalid(format!("level {s} exceeds n = {}", f.n())));
    }
    level_weight_from(&expectation_polynomial(f), s, r)
}

/// [`level_weight`] from a precomputed expectation polynomial.
pub fn level_weight_from(expectation: &DyadicPolynomial, s: usize, r: f64) -> Result<f64> {
    let sig = sigma(r)?;
    let w = expectation.coefficients_f64();
    let mut total = 0.0;
    for t in (s..w.len()).rev() {
        total = total * r + binomial(t, s) as f64 * w[t];
    }
    Ok(sig.powi(s as i32) * total)
}

/// `sum_S f^(S, r)^2` for a junta, through [`biased_spectrum`].
pub fn parseval_sum(f: &Junta, r: &BiasVector) -> Result<f64> {
    Ok(biased_spectrum(f, r)?.iter().map(|c| c * c).sum())
}

/// `sum_S <f, chi_S>_r^2` over all `S ⊆ [n]`, by enumeration.
pub fn parseval_sum_dense(f: &DenseFunction, r: &BiasVector) -> Result<f64> {
    let all: Vec<usize> = (0..f.n()).collect();
    Ok(bruteforce_spectrum(f, &all, r)?.iter().map(|c| c * c).sum())
}

/// `E_r[f]` for a uniform bias, from the expectation polynomial.
pub fn expectation(f: &Junta, r: f64) -> Result<f64> {
    check_bias(r)?;
    Ok(expectation_polynomial(f).eval(r))
}
