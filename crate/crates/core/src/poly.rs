//! Exact univariate polynomials.
//!
//! [`DyadicPolynomial`] holds integer numerators over a shared power of two,
//! which is the natural home of `E_r[f]` for a `k`-junta. [`RationalPoly`]
//! supports the gcd/division work needed for multiplicity analysis.
//! Coefficients are stored lowest degree first.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// `sum_t (num[t] / 2^shift) r^t`, normalized: no trailing zero numerators and
/// `shift` as small as possible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicPolynomial {
    num: Vec<BigInt>,
    shift: u32,
}

impl DyadicPolynomial {
    pub fn zero() -> Self {
        DyadicPolynomial {
            num: Vec::new(),
            shift: 0,
        }
    }

    pub fn new(num: Vec<BigInt>, shift: u32) -> Self {
        let mut p = DyadicPolynomial { num, shift };
        p.normalize();
        p
    }

    pub fn from_i64(num: &[i64], shift: u32) -> Self {
        DyadicPolynomial::new(num.iter().map(|&c| BigInt::from(c)).collect(), shift)
    }

    fn normalize(&mut self) {
        while self.num.last().is_some_and(Zero::is_zero) {
            self.num.pop();
        }
        if self.num.is_empty() {
            self.shift = 0;
            return;
        }
        while self.shift > 0 && self.num.iter().all(|c| c.is_even()) {
            for c in &mut self.num {
                *c >>= 1;
            }
            self.shift -= 1;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.num.len().checked_sub(1)
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    /// Coefficients are `numerators / 2^shift`.
    pub fn shift(&self) -> u32 {
        self.shift
    }

    pub fn coefficient(&self, t: usize) -> BigRational {
        match self.num.get(t) {
            Some(c) => BigRational::new(c.clone(), BigInt::one() << self.shift),
            None => BigRational::zero(),
        }
    }

    pub fn coefficients(&self) -> Vec<BigRational> {
        (0..self.num.len()).map(|t| self.coefficient(t)).collect()
    }

    pub fn coefficients_f64(&self) -> Vec<f64> {
        let scale = 2f64.powi(-(self.shift as i32));
        self.num
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN) * scale)
            .collect()
    }

    /// Horner evaluation in double precision.
    pub fn eval(&self, r: f64) -> f64 {
        self.coefficients_f64().iter().rev().fold(0.0, |acc, c| acc * r + c)
    }

    pub fn eval_exact(&self, r: &BigRational) -> BigRational {
        self.to_rational().eval(r)
    }

    /// Exact `order`-th derivative; stays dyadic since only integer factors appear.
    pub fn derivative(&self, order: usize) -> Self {
        if order >= self.num.len() {
            return DyadicPolynomial::zero();
        }
        let num = (order..self.num.len())
            .map(|t| &self.num[t] * falling_factorial(t, order))
            .collect();
        DyadicPolynomial::new(num, self.shift)
    }

    pub fn to_rational(&self) -> RationalPoly {
        RationalPoly::new(self.coefficients())
    }
}

/// `t (t-1) ... (t-order+1)`.
pub fn falling_factorial(t: usize, order: usize) -> BigInt {
    (0..order).fold(BigInt::one(), |acc, j| acc * BigInt::from(t - j))
}

/// Dense polynomial with rational coefficients, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPoly {
    c: Vec<BigRational>,
}

impl RationalPoly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        RationalPoly { c }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        RationalPoly::new(c.iter().map(|&v| BigRational::from_integer(v.into())).collect())
    }

    pub fn zero() -> Self {
        RationalPoly { c: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.c
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.c.last()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.c.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        RationalPoly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(t, c)| c * BigRational::from_integer(t.into()))
                .collect(),
        )
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            None => RationalPoly::zero(),
            Some(lead) => RationalPoly::new(self.c.iter().map(|c| c / lead).collect()),
        }
    }

    /// Polynomial long division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &RationalPoly) -> (RationalPoly, RationalPoly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.leading().unwrap();
        let mut rem = self.c.clone();
        let Some(nd) = self.degree().filter(|&nd| nd >= dd) else {
            return (RationalPoly::zero(), self.clone());
        };
        let mut quot = vec![BigRational::zero(); nd - dd + 1];
        for pos in (0..=nd - dd).rev() {
            let coef = &rem[pos + dd] / lead;
            if coef.is_zero() {
                continue;
            }
            for (j, dc) in divisor.c.iter().enumerate() {
                rem[pos + j] -= &coef * dc;
            }
            quot[pos] = coef;
        }
        rem.truncate(dd);
        (RationalPoly::new(quot), RationalPoly::new(rem))
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn gcd(&self, other: &RationalPoly) -> RationalPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Product of the distinct irreducible factors (monic).
    pub fn squarefree_part(&self) -> RationalPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    pub fn coefficients_f64(&self) -> Vec<f64> {
        self.c.iter().map(rational_to_f64).collect()
    }
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite double.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Outcome of a simultaneous root iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexRoots {
    pub roots: Vec<Complex64>,
    pub iterations: u32,
    pub converged: bool,
}

/// All complex roots of the polynomial with the given coefficients
/// (lowest degree first) by Durand–Kerner simultaneous iteration.
///
/// Iteration stops once every correction is below `tol` (relative to the
/// root magnitude, floored at one), or after `max_iter` sweeps.
pub fn durand_kerner(coeffs: &[f64], tol: f64, max_iter: u32) -> ComplexRoots {
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.last() == Some(&0.0) {
        c.pop();
    }
    let degree = c.len().saturating_sub(1);
    if degree == 0 {
        return ComplexRoots {
            roots: Vec::new(),
            iterations: 0,
            converged: true,
        };
    }
    let lead = c[degree];
    let monic: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v / lead, 0.0)).collect();
    if degree == 1 {
        return ComplexRoots {
            roots: vec![-monic[0]],
            iterations: 0,
            converged: true,
        };
    }
    // Cauchy bound keeps the starting circle around all roots.
    let radius = 1.0 + monic[..degree].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..degree)
        .map(|j| seed.powu(j as u32 + 1) / seed.norm().powi(j as i32 + 1) * radius * 0.5)
        .collect();
    let eval = |x: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * x + a);

    for iter in 1..=max_iter {
        let mut max_step = 0.0f64;
        for j in 0..degree {
            let zj = z[j];
            let denom = (0..degree)
                .filter(|&m| m != j)
                .fold(Complex64::new(1.0, 0.0), |acc, m| acc * (zj - z[m]));
            let step = if denom.norm() == 0.0 {
                Complex64::new(tol, tol)
            } else {
                eval(zj) / denom
            };
            z[j] = zj - step;
            max_step = max_step.max(step.norm() / zj.norm().max(1.0));
        }
        if max_step < tol {
            return ComplexRoots {
                roots: z,
                iterations: iter,
                converged: true,
            };
        }
    }
    ComplexRoots {
        roots: z,
        iterations: max_iter,
        converged: false,
    }
}
