//! Juntas and small dense Boolean functions.
//!
//! Variables are 0-based. A junta stores its relevant coordinates in
//! increasing order together with a core truth table of `2^k` signs. Bit `b`
//! (least significant first) of a core-table index corresponds to
//! `relevant[b]`, and a set bit means that variable is `+1`.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fourier;

/// Largest number of relevant variables for which a core table is materialized.
pub const MAX_CORE_VARS: usize = 20;

/// Largest ambient dimension accepted by [`DenseFunction`].
pub const MAX_DENSE_VARS: usize = 20;

/// A value in `{-1, +1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(i8)]
pub enum Sign {
    Minus = -1,
    Plus = 1,
}

impl Sign {
    #[inline]
    pub fn to_i8(self) -> i8 {
        self as i8
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        f64::from(self as i8)
    }

    #[inline]
    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }

    #[inline]
    pub fn from_bool(plus: bool) -> Self {
        if plus {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn from_i64(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::Parse(format!("{v} is not a sign (expected -1 or 1)"))),
        }
    }

    #[inline]
    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_bool(self == rhs)
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => f.write_str("+1"),
            Sign::Minus => f.write_str("-1"),
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.to_i8())
    }
}

/// Signs as a `'0'/'1'` string (`'1'` is `+1`).
pub fn sign_string(signs: &[Sign]) -> String {
    signs.iter().map(|s| if s.is_plus() { '1' } else { '0' }).collect()
}

/// Partial assignment `rho`: a map from variable index to a fixed sign.
pub type PartialAssignment = BTreeMap<usize, Sign>;

/// A Boolean function on `n` variables that depends on at most the listed coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "JuntaFile", into = "JuntaFile")]
pub struct Junta {
    n: usize,
    relevant: Vec<usize>,
    core: Vec<Sign>,
}

impl Junta {
    pub fn new(n: usize, relevant: Vec<usize>, core: Vec<Sign>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("ambient dimension n must be positive"));
        }
        for (pos, &i) in relevant.iter().enumerate() {
            if i >= n {
                return Err(Error::InvalidIndex { index: i, n });
            }
            if pos > 0 && relevant[pos - 1] >= i {
                return Err(invalid("relevant indices must be distinct and increasing"));
            }
        }
        if relevant.len() > MAX_CORE_VARS {
            return Err(Error::SizeLimit {
                what: "k",
                value: relevant.len(),
                limit: MAX_CORE_VARS,
            });
        }
        let expected = 1usize << relevant.len();
        if core.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: core.len(),
            });
        }
        Ok(Junta { n, relevant, core })
    }

    pub fn constant(n: usize, value: Sign) -> Result<Self> {
        Junta::new(n, Vec::new(), vec![value])
    }

    /// Builds a junta from a predicate on the values of the relevant variables
    /// (listed in the order of `relevant`).
    pub fn from_fn(n: usize, relevant: Vec<usize>, f: impl Fn(&[Sign]) -> Sign) -> Result<Self> {
        let k = relevant.len();
        if k > MAX_CORE_VARS {
            return Err(Error::SizeLimit {
                what: "k",
                value: k,
                limit: MAX_CORE_VARS,
            });
        }
        let mut vals = vec![Sign::Minus; k];
        let core = (0..1usize << k)
            .map(|idx| {
                for (b, v) in vals.iter_mut().enumerate() {
                    *v = Sign::from_bool(idx >> b & 1 == 1);
                }
                f(&vals)
            })
            .collect();
        Junta::new(n, relevant, core)
    }

    /// Parity of the given coordinates.
    pub fn parity(n: usize, relevant: Vec<usize>) -> Result<Self> {
        Junta::from_fn(n, relevant, |v| v.iter().fold(Sign::Plus, |a, &b| a * b))
    }

    /// AND in the `+1 = true` convention.
    pub fn and(n: usize, relevant: Vec<usize>) -> Result<Self> {
        Junta::from_fn(n, relevant, |v| Sign::from_bool(v.iter().all(|s| s.is_plus())))
    }

    /// Random junta: relevant set drawn without replacement, core signs i.i.d. fair.
    pub fn random(n: usize, k: usize, seed: u64, require_nonconstant: bool) -> Result<Self> {
        if k > n {
            return Err(invalid(format!("k = {k} exceeds n = {n}")));
        }
        if k > MAX_CORE_VARS {
            return Err(invalid(format!("k = {k} exceeds the core-table cap {MAX_CORE_VARS}")));
        }
        if require_nonconstant && k == 0 {
            return Err(invalid("a 0-junta is constant"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut relevant = index::sample(&mut rng, n, k).into_vec();
        relevant.sort_unstable();
        loop {
            let core: Vec<Sign> = (0..1usize << k)
                .map(|_| Sign::from_bool(rng.random::<bool>()))
                .collect();
            let constant = core.iter().all(|&s| s == core[0]);
            if !require_nonconstant || !constant {
                return Junta::new(n, relevant, core);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of listed relevant coordinates (the `k` of the junta).
    pub fn k(&self) -> usize {
        self.relevant.len()
    }

    pub fn relevant(&self) -> &[usize] {
        &self.relevant
    }

    pub fn core(&self) -> &[Sign] {
        &self.core
    }

    /// Core-table index of a full assignment.
    #[inline]
    pub fn core_index(&self, x: &[Sign]) -> usize {
        self.relevant
            .iter()
            .enumerate()
            .fold(0, |idx, (b, &i)| idx | (usize::from(x[i].is_plus()) << b))
    }

    pub fn eval(&self, x: &[Sign]) -> Result<Sign> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluates without checking `x.len()`; panics if `x` is too short.
    #[inline]
    pub fn eval_unchecked(&self, x: &[Sign]) -> Sign {
        self.core[self.core_index(x)]
    }

    /// Fixes the variables in `rho`. Fixing a non-relevant variable is a no-op.
    pub fn restrict(&self, rho: &PartialAssignment) -> Result<Junta> {
        if let Some((&i, _)) = rho.iter().find(|(&i, _)| i >= self.n) {
            return Err(Error::InvalidIndex { index: i, n: self.n });
        }
        let mut fixed_bits = 0usize;
        let mut kept_bits = Vec::new();
        let mut relevant = Vec::new();
        for (b, &i) in self.relevant.iter().enumerate() {
            match rho.get(&i) {
                Some(s) => fixed_bits |= usize::from(s.is_plus()) << b,
                None => {
                    kept_bits.push(b);
                    relevant.push(i);
                }
            }
        }
        let core = (0..1usize << kept_bits.len())
            .map(|idx| {
                let full = kept_bits
                    .iter()
                    .enumerate()
                    .fold(fixed_bits, |acc, (j, &b)| acc | ((idx >> j & 1) << b));
                self.core[full]
            })
            .collect();
        Junta::new(self.n, relevant, core)
    }

    /// Exact relevant set: indices with a core-table flip witness.
    pub fn relevant_variables_bruteforce(&self) -> Vec<usize> {
        self.relevant
            .iter()
            .enumerate()
            .filter(|&(b, _)| {
                let bit = 1usize << b;
                (0..self.core.len()).any(|idx| idx & bit == 0 && self.core[idx] != self.core[idx | bit])
            })
            .map(|(_, &i)| i)
            .collect()
    }

    /// `deg(f)`: the largest `|S|` with a nonzero uniform Fourier coefficient.
    pub fn degree(&self) -> usize {
        fourier::uniform_coefficients(self).degree()
    }

    pub fn is_constant_exact(&self) -> Option<Sign> {
        let first = self.core[0];
        self.core.iter().all(|&s| s == first).then_some(first)
    }

    /// Core table as a `'0'/'1'` string (`'1'` is `+1`).
    pub fn core_string(&self) -> String {
        sign_string(&self.core)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("junta serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Dense real-valued table of this junta over all `2^n` inputs.
    pub fn to_dense(&self) -> Result<DenseFunction> {
        if self.n > MAX_DENSE_VARS {
            return Err(Error::SizeLimit {
                what: "n",
                value: self.n,
                limit: MAX_DENSE_VARS,
            });
        }
        let values = (0..1usize << self.n)
            .map(|x| {
                let idx = self
                    .relevant
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (b, &i)| acc | ((x >> i & 1) << b));
                self.core[idx].to_f64()
            })
            .collect();
        Ok(DenseFunction { n: self.n, values })
    }
}

/// On-disk JSON shape of a junta: `{"n", "relevant", "core"}`.
#[derive(Serialize, Deserialize)]
struct JuntaFile {
    n: usize,
    relevant: Vec<usize>,
    core: String,
}

impl TryFrom<JuntaFile> for Junta {
    type Error = Error;

    fn try_from(file: JuntaFile) -> Result<Self> {
        let core = file
            .core
            .chars()
            .map(|c| match c {
                '1' => Ok(Sign::Plus),
                '0' => Ok(Sign::Minus),
                other => Err(Error::Parse(format!("invalid core character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Junta::new(file.n, file.relevant, core)
    }
}

impl From<Junta> for JuntaFile {
    fn from(f: Junta) -> Self {
        JuntaFile {
            n: f.n,
            core: f.core_string(),
            relevant: f.relevant,
        }
    }
}

/// A real-valued function on `{-1,1}^n` stored as a full table.
///
/// Table index bit `i` is set iff `x_i = +1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseFunction {
    n: usize,
    values: Vec<f64>,
}

impl DenseFunction {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > MAX_DENSE_VARS {
            return Err(Error::SizeLimit {
                what: "n",
                value: n,
                limit: MAX_DENSE_VARS,
            });
        }
        if values.len() != 1 << n {
            return Err(Error::LengthMismatch {
                expected: 1 << n,
                actual: values.len(),
            });
        }
        Ok(DenseFunction { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(&[Sign]) -> f64) -> Result<Self> {
        if n > MAX_DENSE_VARS {
            return Err(Error::SizeLimit {
                what: "n",
                value: n,
                limit: MAX_DENSE_VARS,
            });
        }
        let values = (0..1usize << n).map(|idx| f(&index_to_assignment(idx, n))).collect();
        Ok(DenseFunction { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at_index(&self, idx: usize) -> f64 {
        self.values[idx]
    }
}

/// Full assignment encoded by a table index (bit `i` set iff `x_i = +1`).
pub fn index_to_assignment(idx: usize, n: usize) -> Vec<Sign> {
    (0..n).map(|i| Sign::from_bool(idx >> i & 1 == 1)).collect()
}
