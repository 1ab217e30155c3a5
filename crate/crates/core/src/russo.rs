//! Derivatives of `E_r[f]`, the generalized Russo formula
//! `d^s/dr^s E_r[f] = s! / (1 - r^2)^(s/2) * w_s(f, r)`, critical-bias root
//! sets, and exact nonzero-coefficient witnesses.
//!
//! `R_s(f)` is the set of real parts (inside `(-1, 1)`) of complex roots of
//! `h = d/dr E_r[f]` with multiplicity at least `s`. Only the real roots among
//! them make the level weights `1..=s` vanish; real parts of complex roots are
//! included anyway and flagged with `real = false`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::boolfn::Junta;
use crate::error::{domain, invalid, Error, Result};
use crate::fourier::{self, biased_coefficient_from, expectation_polynomial, level_weight_from};
use crate::measure::{check_bias, sigma, BiasVector};
use crate::poly::{durand_kerner, rational_from_f64, DyadicPolynomial, RationalPoly};
use crate::subsets::{combinations, subset_to_mask};

/// Convergence tolerance of the simultaneous root iteration.
pub const ROOT_TOL: f64 = 1e-12;
/// Iteration cap of the simultaneous root iteration.
pub const ROOT_MAX_ITER: u32 = 500;
/// Real parts closer than this are reported as one point.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Roots whose imaginary part is at most this are treated as real.
pub const REAL_TOL: f64 = 1e-9;

pub fn poly_derivative(p: &DyadicPolynomial, order: usize) -> DyadicPolynomial {
    p.derivative(order)
}

fn check_order(s: usize) -> Result<()> {
    if s == 0 {
        Err(invalid("derivative order s must be at least 1"))
    } else {
        Ok(())
    }
}

/// `s! * sigma^(-s) * w_s(f, r)`.
pub fn russo_rhs(f: &Junta, s: usize, r: f64) -> Result<f64> {
    check_order(s)?;
    russo_rhs_from(&expectation_polynomial(f), s, r)
}

fn russo_rhs_from(expectation: &DyadicPolynomial, s: usize, r: f64) -> Result<f64> {
    let sig = sigma(r)?;
    let w = level_weight_from(expectation, s, r)?;
    let fact: f64 = (1..=s).map(|i| i as f64).product();
    Ok(fact * w / sig.powi(s as i32))
}

/// `d^s/dr^s E_r[f]` at `r`, from the exact derivative polynomial.
pub fn russo_lhs(f: &Junta, s: usize, r: f64) -> Result<f64> {
    check_order(s)?;
    check_bias(r)?;
    Ok(expectation_polynomial(f).derivative(s).eval(r))
}

/// One row of a Russo identity check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RussoRow {
    pub s: usize,
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

pub fn russo_row(f: &Junta, s: usize, r: f64) -> Result<RussoRow> {
    check_order(s)?;
    check_bias(r)?;
    let e = expectation_polynomial(f);
    let lhs = e.derivative(s).eval(r);
    let rhs = russo_rhs_from(&e, s, r)?;
    Ok(RussoRow {
        s,
        r,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

pub fn russo_residual(f: &Junta, s: usize, r: f64) -> Result<f64> {
    Ok(russo_row(f, s, r)?.residual)
}

/// A point of `R_s(f)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RootPoint {
    pub re: f64,
    /// Multiplicity of the root as a root of `d/dr E_r[f]`.
    pub multiplicity: usize,
    /// Whether the point comes from a real root.
    pub real: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootSet {
    pub s: usize,
    pub points: Vec<RootPoint>,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance from `r` to the nearest point, `None` for an empty set.
    pub fn distance(&self, r: f64) -> Option<f64> {
        self.points.iter().map(|p| (p.re - r).abs()).reduce(f64::min)
    }

    /// Distance from `r` to the set together with the endpoints `-1` and `1`.
    ///
    /// `d/dr E_r[f]` may vanish at an endpoint, which `R_s` excludes; the
    /// coefficient floor [`threshold_floor`] only holds at this distance.
    pub fn distance_with_boundary(&self, r: f64) -> f64 {
        let edge = 1.0 - r.abs();
        self.distance(r).map_or(edge, |d| d.min(edge))
    }
}

/// Exact multiplicity structure of `h = d/dr E_r[f]`.
///
/// `gcd_chain[m - 1]` is `g_m = gcd(h, h', ..., h^(m-1))` (monic), whose roots are
/// exactly the roots of `h` of multiplicity at least `m`. `exact_factors[m - 1]`
/// is the monic squarefree polynomial whose roots have multiplicity exactly `m`.
#[derive(Clone, Debug)]
pub struct MultiplicityChain {
    pub derivative: RationalPoly,
    pub gcd_chain: Vec<RationalPoly>,
    pub exact_factors: Vec<RationalPoly>,
}

impl MultiplicityChain {
    pub fn new(f: &Junta) -> Result<Self> {
        let h = expectation_polynomial(f).derivative(1).to_rational();
        if h.is_zero() {
            return Err(Error::ConstantFunction);
        }
        let mut gcd_chain = vec![h.monic()];
        let mut hd = h.clone();
        loop {
            let last = gcd_chain.last().unwrap();
            if last.degree() == Some(0) {
                break;
            }
            hd = hd.derivative();
            gcd_chain.push(last.gcd(&hd));
        }
        // drop the trailing constant
        gcd_chain.pop();
        let sqf: Vec<RationalPoly> = gcd_chain.iter().map(RationalPoly::squarefree_part).collect();
        let exact_factors = (0..sqf.len())
            .map(|m| match sqf.get(m + 1) {
                Some(next) => sqf[m].div_rem(next).0.monic(),
                None => sqf[m].clone(),
            })
            .collect();
        Ok(MultiplicityChain {
            derivative: h,
            gcd_chain,
            exact_factors,
        })
    }

    /// `g_s`, or the constant one if `h` has no root of multiplicity `>= s`.
    pub fn gcd_at(&self, s: usize) -> RationalPoly {
        self.gcd_chain
            .get(s - 1)
            .cloned()
            .unwrap_or_else(|| RationalPoly::from_i64(&[1]))
    }
}

/// `R_s(f)` with per-point multiplicities.
pub fn root_set(f: &Junta, s: usize) -> Result<RootSet> {
    check_order(s)?;
    let chain = MultiplicityChain::new(f)?;
    Ok(root_set_from(&chain, s))
}

pub fn root_set_from(chain: &MultiplicityChain, s: usize) -> RootSet {
    let mut raw: Vec<RootPoint> = Vec::new();
    for (m, factor) in chain.exact_factors.iter().enumerate().skip(s - 1) {
        let roots = durand_kerner(&factor.coefficients_f64(), ROOT_TOL, ROOT_MAX_ITER);
        for z in roots.roots {
            if z.re > -1.0 && z.re < 1.0 {
                raw.push(RootPoint {
                    re: z.re,
                    multiplicity: m + 1,
                    real: z.im.abs() <= REAL_TOL,
                });
            }
        }
    }
    raw.sort_by(|a, b| a.re.total_cmp(&b.re));
    let mut points: Vec<RootPoint> = Vec::new();
    for p in raw {
        match points.last_mut() {
            Some(last) if (p.re - last.re).abs() <= CLUSTER_TOL => {
                if p.real && !last.real {
                    last.re = p.re;
                }
                last.real |= p.real;
                last.multiplicity = last.multiplicity.max(p.multiplicity);
            }
            _ => points.push(p),
        }
    }
    RootSet { s, points }
}

/// A nonzero coefficient `f^(S, r_j)` with `1 <= |S| <= s`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub bias_index: usize,
    pub bias: f64,
    pub subset: Vec<usize>,
    pub value: f64,
}

/// `D^k * sum_{T ⊇ S} 2^k f^(T,0) r^|T \ S|` for every `S ⊆ relevant(f)`, where
/// `r = a / D` exactly. Zero exactly when `f^(S, r) = 0`.
pub fn exact_scaled_spectrum(spectrum: &fourier::UniformSpectrum, r: f64) -> Vec<BigInt> {
    let q = rational_from_f64(r);
    let (a, d) = (q.numer().clone(), q.denom().clone());
    let mut acc: Vec<BigInt> = spectrum.numerators().iter().map(|&c| BigInt::from(c)).collect();
    for b in 0..spectrum.k() {
        let bit = 1usize << b;
        for lo in 0..acc.len() {
            if lo & bit == 0 {
                let hi = lo | bit;
                let carried = &a * &acc[hi];
                acc[lo] = &d * &acc[lo] + carried;
                acc[hi] = &d * &acc[hi];
            }
        }
    }
    acc
}

/// First `(j, S)` in scan order (bias order, then level `1..=s`, then
/// lexicographic `S`) whose biased coefficient is exactly nonzero.
pub fn theorem1_witness(f: &Junta, s: usize, biases: &[f64]) -> Result<Witness> {
    check_order(s)?;
    if f.is_constant_exact().is_some() {
        return Err(Error::ConstantFunction);
    }
    for &r in biases {
        check_bias(r)?;
    }
    for (i, a) in biases.iter().enumerate() {
        if biases[..i].contains(a) {
            return Err(domain(format!("bias {a} listed twice")));
        }
    }
    let spectrum = fourier::uniform_coefficients(f);
    let degree = spectrum.degree();
    if s * biases.len() < degree {
        return Err(invalid(format!(
            "s * t = {} is below deg(f) = {degree}",
            s * biases.len()
        )));
    }
    let rel = spectrum.relevant().to_vec();
    for (j, &r) in biases.iter().enumerate() {
        let exact = exact_scaled_spectrum(&spectrum, r);
        for level in 1..=s.min(rel.len()) {
            for pos in combinations(rel.len(), level) {
                let subset: Vec<usize> = pos.iter().map(|&p| rel[p]).collect();
                let mask = subset_to_mask(&subset, &rel).unwrap();
                if !exact[mask].is_zero() {
                    let bv = BiasVector::uniform(f.n(), r)?;
                    let value = biased_coefficient_from(&spectrum, &subset, &bv);
                    return Ok(Witness {
                        bias_index: j,
                        bias: r,
                        subset,
                        value,
                    });
                }
            }
        }
    }
    Err(Error::NoWitness)
}

/// Largest `|f^(S, r)|` over `1 <= |S| <= s`, from the change-of-measure spectrum.
pub fn max_low_level_coefficient(f: &Junta, s: usize, r: f64) -> Result<f64> {
    let bv = BiasVector::uniform(f.n(), r)?;
    let spec = fourier::biased_spectrum(f, &bv)?;
    Ok(spec
        .iter()
        .enumerate()
        .filter(|(m, _)| (1..=s).contains(&(m.count_ones() as usize)))
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max))
}

/// `sigma^s (gamma/4)^k`, the guaranteed low-level coefficient size at
/// distance `gamma` from `R_s(f)`.
pub fn threshold_floor(r: f64, gamma: f64, s: usize, k: usize) -> Result<f64> {
    Ok(sigma(r)?.powi(s as i32) * (gamma / 4.0).powi(k as i32))
}

/// Exact sign test: does `p` change sign over `[lo, hi]`?
pub fn brackets_root(p: &RationalPoly, lo: f64, hi: f64) -> bool {
    let a = p.eval(&rational_from_f64(lo));
    let b = p.eval(&rational_from_f64(hi));
    a.is_zero() || b.is_zero() || a.is_negative() != b.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::Sign::{Minus as M, Plus as P};

    fn and2() -> Junta {
        Junta::new(5, vec![0, 2], vec![M, M, M, P]).unwrap()
    }

    fn par3() -> Junta {
        Junta::parity(3, vec![0, 1, 2]).unwrap()
    }

    #[test]
    fn derivative_examples() {
        let p = DyadicPolynomial::from_i64(&[-1, 2, 1], 1);
        assert_eq!(poly_derivative(&p, 1), DyadicPolynomial::from_i64(&[1, 1], 0));
        assert_eq!(poly_derivative(&p, 0), p);
        let c = DyadicPolynomial::from_i64(&[0, 0, 0, 1], 0);
        assert_eq!(poly_derivative(&c, 3), DyadicPolynomial::from_i64(&[6], 0));
    }

    #[test]
    fn rhs_examples() {
        assert!((russo_rhs(&and2(), 1, 0.5).unwrap() - 1.5).abs() < 1e-14);
        assert!((russo_rhs(&and2(), 2, 0.5).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(russo_rhs(&and2(), 3, 0.2).unwrap(), 0.0);
        assert_eq!(russo_rhs(&par3(), 5, -0.4).unwrap(), 0.0);
        assert!(russo_rhs(&and2(), 1, 1.0).is_err());
        assert!(russo_rhs(&and2(), 0, 0.1).is_err());
    }

    #[test]
    fn residual_examples() {
        for i in 0..100 {
            let r = -0.99 + 1.98 * i as f64 / 99.0;
            for s in 1..=2 {
                assert!(russo_residual(&and2(), s, r).unwrap() <= 1e-10);
            }
        }
        let row = russo_row(&par3(), 3, 0.0).unwrap();
        assert_eq!((row.lhs, row.rhs, row.residual), (6.0, 6.0, 0.0));
        let one = Junta::constant(4, P).unwrap();
        for s in 1..4 {
            assert_eq!(russo_residual(&one, s, 0.3).unwrap(), 0.0);
        }
    }

    #[test]
    fn root_set_examples() {
        let r1 = root_set(&par3(), 1).unwrap();
        assert_eq!(r1.points.len(), 1);
        assert!(r1.points[0].re.abs() < 1e-12);
        assert_eq!(r1.points[0].multiplicity, 2);
        assert!(r1.points[0].real);
        assert_eq!(root_set(&par3(), 2).unwrap().points.len(), 1);
        assert!(root_set(&par3(), 3).unwrap().is_empty());
        assert!(root_set(&and2(), 1).unwrap().is_empty());
        assert!(matches!(
            root_set(&Junta::constant(3, M).unwrap(), 1),
            Err(Error::ConstantFunction)
        ));
    }

    #[test]
    fn witness_examples() {
        let w = theorem1_witness(&par3(), 1, &[-0.5, 0.0, 0.5]).unwrap();
        assert_eq!(w.bias_index, 0);
        assert_eq!(w.subset, vec![0]);
        assert!((w.value.abs() - 0.216_506_350_946_109_66).abs() < 1e-12);

        let w = theorem1_witness(&and2(), 1, &[0.0, 0.5]).unwrap();
        assert_eq!((w.bias_index, w.subset.clone(), w.value), (0, vec![0], 0.5));

        let w = theorem1_witness(&par3(), 3, &[0.0]).unwrap();
        assert_eq!((w.subset.clone(), w.value), (vec![0, 1, 2], 1.0));

        // level 1 at the uniform bias alone is not enough for parity
        assert!(matches!(
            theorem1_witness(&par3(), 1, &[0.0]),
            Err(Error::InvalidParams(_))
        ));
        assert!(theorem1_witness(&par3(), 1, &[0.1, 0.1, 0.2]).is_err());
        assert!(matches!(
            theorem1_witness(&Junta::constant(3, P).unwrap(), 1, &[0.0]),
            Err(Error::ConstantFunction)
        ));
    }

    #[test]
    fn exact_spectrum_zero_pattern_matches_float() {
        let f = par3();
        let spec = fourier::uniform_coefficients(&f);
        let exact = exact_scaled_spectrum(&spec, 0.0);
        let nonzero: Vec<usize> = (0..8).filter(|&m| !exact[m].is_zero()).collect();
        assert_eq!(nonzero, vec![7]);
        let exact = exact_scaled_spectrum(&spec, 0.5);
        assert!(exact.iter().all(|v| !v.is_zero()));
    }
}
