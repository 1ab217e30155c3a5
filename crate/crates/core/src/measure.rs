//! Biased product measures on `{-1,1}^n` and the orthonormal `chi` basis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boolfn::Sign;
use crate::error::{domain, Error, Result};

/// `sqrt(1 - r^2)`, evaluated as `sqrt((1-r)(1+r))`.
pub fn sigma(r: f64) -> Result<f64> {
    check_bias(r)?;
    Ok(((1.0 - r) * (1.0 + r)).sqrt())
}

pub(crate) fn check_bias(r: f64) -> Result<()> {
    if r.is_finite() && r.abs() < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("bias {r} is not in (-1, 1)")))
    }
}

/// Per-coordinate biases `r_i in (-1,1)` with their standard deviations.
#[derive(Clone, Debug, PartialEq)]
pub struct BiasVector {
    r: Vec<f64>,
    sigma: Vec<f64>,
}

impl BiasVector {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        let sigma = r.iter().map(|&ri| sigma(ri)).collect::<Result<Vec<_>>>()?;
        Ok(BiasVector { r, sigma })
    }

    /// The all-equal vector `(r, ..., r)`.
    pub fn uniform(n: usize, r: f64) -> Result<Self> {
        BiasVector::new(vec![r; n])
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Largest `alpha` with `|r_i| <= 1 - alpha` for all `i`.
    pub fn margin(&self) -> f64 {
        self.r.iter().fold(1.0, |a, r| f64::min(a, 1.0 - r.abs()))
    }
}

/// Probability mass of `x` under the product measure.
pub fn density(r: &BiasVector, x: &[Sign]) -> Result<f64> {
    if x.len() != r.len() {
        return Err(Error::LengthMismatch {
            expected: r.len(),
            actual: x.len(),
        });
    }
    Ok(x.iter()
        .zip(&r.r)
        .map(|(xi, ri)| (1.0 + ri * xi.to_f64()) / 2.0)
        .product())
}

/// Draws one assignment: coordinate `i` is `+1` with probability `(1 + r_i)/2`.
///
/// Exactly one stream draw per coordinate, in index order.
pub fn sample<R: Rng + ?Sized>(r: &BiasVector, rng: &mut R) -> Vec<Sign> {
    r.r.iter()
        .map(|ri| Sign::from_bool(rng.random::<f64>() < (1.0 + ri) / 2.0))
        .collect()
}

/// Same as [`sample`] for the uniform bias `r`, writing into `out`.
pub fn sample_uniform_into<R: Rng + ?Sized>(r: f64, rng: &mut R, out: &mut [Sign]) {
    let p = (1.0 + r) / 2.0;
    for xi in out.iter_mut() {
        *xi = Sign::from_bool(rng.random::<f64>() < p);
    }
}

/// `chi_S(x, r) = prod_{i in S} (x_i - r_i)/sigma_i`; `chi_{} = 1`.
pub fn chi(s: &[usize], x: &[Sign], r: &BiasVector) -> f64 {
    s.iter().map(|&i| (x[i].to_f64() - r.r[i]) / r.sigma[i]).product()
}

/// Independent stream for `(master_seed, stream_id)`.
pub fn stream_rng(master_seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::index_to_assignment;
    use crate::subsets::all_subsets;
    use rand::Rng;
    use Sign::{Minus as M, Plus as P};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(0.0).unwrap(), 1.0);
        assert!(close(sigma(0.5).unwrap(), 0.866_025_403_784_438_6, 1e-15));
        assert!(sigma(1.0).is_err());
        assert!(sigma(-1.0).is_err());
        assert!(sigma(f64::NAN).is_err());
    }

    #[test]
    fn density_examples() {
        let z = BiasVector::uniform(6, 0.0).unwrap();
        assert_eq!(density(&z, &[P, M, M, P, P, M]).unwrap(), 1.0 / 64.0);
        let r1 = BiasVector::uniform(1, 0.5).unwrap();
        assert_eq!(density(&r1, &[P]).unwrap(), 0.75);
        let r2 = BiasVector::uniform(2, 0.5).unwrap();
        assert_eq!(density(&r2, &[P, P]).unwrap(), 0.5625);
        assert!(density(&r2, &[P]).is_err());
    }

    #[test]
    fn sample_examples() {
        let near_one = BiasVector::uniform(1, 1.0 - 1e-12).unwrap();
        let mut rng = stream_rng(3, 0);
        let mean: f64 = (0..1000).map(|_| sample(&near_one, &mut rng)[0].to_f64()).sum::<f64>() / 1000.0;
        assert!(mean > 0.999);

        let zero = BiasVector::uniform(1, 0.0).unwrap();
        let mut rng = stream_rng(4, 0);
        let m = 100_000;
        let mean: f64 = (0..m).map(|_| sample(&zero, &mut rng)[0].to_f64()).sum::<f64>() / m as f64;
        assert!(mean.abs() <= 0.02, "{mean}");

        let r = BiasVector::uniform(5, 0.3).unwrap();
        let a: Vec<_> = {
            let mut rng = stream_rng(9, 2);
            (0..10).map(|_| sample(&r, &mut rng)).collect()
        };
        let b: Vec<_> = {
            let mut rng = stream_rng(9, 2);
            (0..10).map(|_| sample(&r, &mut rng)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn chi_examples() {
        let r = BiasVector::uniform(2, 0.5).unwrap();
        assert_eq!(chi(&[], &[P, M], &r), 1.0);
        assert!(close(chi(&[0], &[P, M], &r), 0.577_350_269_189_625_8, 1e-15));
        let z = BiasVector::uniform(2, 0.0).unwrap();
        assert_eq!(chi(&[0, 1], &[P, M], &z), -1.0);
    }

    fn random_bias(n: usize, rng: &mut impl Rng) -> BiasVector {
        BiasVector::new((0..n).map(|_| rng.random_range(-0.95..0.95)).collect()).unwrap()
    }

    #[test]
    fn normalization_and_mean() {
        let mut rng = stream_rng(17, 0);
        for n in 1..=12 {
            let r = random_bias(n, &mut rng);
            let total: f64 = (0..1usize << n)
                .map(|idx| density(&r, &index_to_assignment(idx, n)).unwrap())
                .sum();
            assert!(close(total, 1.0, 1e-12));
            if n <= 8 {
                for i in 0..n {
                    let mean: f64 = (0..1usize << n)
                        .map(|idx| {
                            let x = index_to_assignment(idx, n);
                            density(&r, &x).unwrap() * x[i].to_f64()
                        })
                        .sum();
                    assert!(close(mean, r.r()[i], 1e-12));
                }
            }
        }
    }

    #[test]
    fn orthonormality() {
        let mut rng = stream_rng(18, 0);
        for n in 1..=6 {
            let r = random_bias(n, &mut rng);
            let subsets = all_subsets(&(0..n).collect::<Vec<_>>());
            let points: Vec<(f64, Vec<Sign>)> = (0..1usize << n)
                .map(|idx| {
                    let x = index_to_assignment(idx, n);
                    (density(&r, &x).unwrap(), x)
                })
                .collect();
            for s in &subsets {
                for t in &subsets {
                    let ip: f64 = points.iter().map(|(w, x)| w * chi(s, x, &r) * chi(t, x, &r)).sum();
                    let expected = if s == t { 1.0 } else { 0.0 };
                    assert!(close(ip, expected, 1e-10), "S={s:?} T={t:?} ip={ip}");
                }
            }
        }
    }

    #[test]
    fn streams_differ_by_id() {
        let mut a = stream_rng(5, 0);
        let mut b = stream_rng(5, 1);
        let xa: Vec<u64> = (0..8).map(|_| a.random()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.random()).collect();
        assert_ne!(xa, xb);
    }
}
