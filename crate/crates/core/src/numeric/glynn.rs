//! Glynn's unbiased permanent estimator and its Monte-Carlo mean (Gurvits).

use rand::Rng;

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// A vector over {−1, +1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument("sign vector entries must be ±1".into()));
        }
        Ok(SignVector(signs))
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        SignVector((0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
    }

    /// The `index`-th of the 2ⁿ sign vectors (bit i set → entry i is −1).
    pub fn from_index(n: usize, index: u64) -> Self {
        SignVector((0..n).map(|i| if index >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn product(&self) -> f64 {
        if self.0.iter().filter(|&&s| s < 0).count() % 2 == 0 { 1.0 } else { -1.0 }
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&s| s as f64).collect()
    }
}

/// Gly_x(A) = x₁⋯xₙ ∏ᵢ (aᵢ·x).
pub fn glynn_sample(a: &ComplexMatrix, x: &SignVector) -> Result<C64> {
    if !a.is_square() || a.rows() != x.len() {
        return Err(Error::Shape(format!(
            "sign vector of length {} for a {}x{} matrix",
            x.len(),
            a.rows(),
            a.cols()
        )));
    }
    Ok(glynn_unchecked(a, &x.as_f64()))
}

#[inline]
pub(crate) fn glynn_unchecked(a: &ComplexMatrix, x: &[f64]) -> C64 {
    let n = x.len();
    let mut prod = ONE;
    let mut parity = 1.0;
    for (i, &xi) in x.iter().enumerate() {
        let row = a.row(i);
        let mut dot = ZERO;
        for j in 0..n {
            dot += row[j] * x[j];
        }
        prod *= dot;
        parity *= xi;
    }
    prod * parity
}

/// Monte-Carlo permanent estimate and its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PermanentEstimate {
    pub estimate: C64,
    pub std_error: f64,
}

/// Mean of `samples` Glynn draws over uniform sign vectors, with the standard
/// error of that mean (Bessel-corrected sample variance).
pub fn gurvits_permanent_mc(
    a: &ComplexMatrix,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<PermanentEstimate> {
    if !a.is_square() {
        return Err(Error::Shape("matrix is not square".into()));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {samples}")));
    }
    let n = a.rows();
    let draws: Vec<C64> = (0..samples)
        .map(|_| glynn_unchecked(a, &SignVector::random(n, rng).as_f64()))
        .collect();
    let mean = draws.iter().sum::<C64>() / samples as f64;
    let var = draws.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (samples - 1) as f64;
    Ok(PermanentEstimate { estimate: mean, std_error: (var / samples as f64).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::permanent::permanent_exact;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_disk_matrix(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| {
            let r: f64 = rng.random::<f64>().sqrt();
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            C64::from_polar(r, t)
        })
    }

    #[test]
    fn identity_gives_one_for_every_sign_vector() {
        for n in 1..5 {
            for idx in 0..(1u64 << n) {
                let x = SignVector::from_index(n, idx);
                assert_eq!(glynn_sample(&ComplexMatrix::identity(n), &x).unwrap(), ONE);
            }
        }
    }

    #[test]
    fn exhaustive_mean_is_the_permanent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            for _ in 0..10 {
                let a = unit_disk_matrix(n, &mut rng);
                let total: C64 = (0..1u64 << n)
                    .map(|i| glynn_sample(&a, &SignVector::from_index(n, i)).unwrap())
                    .sum();
                let mean = total / (1u64 << n) as f64;
                assert!((mean - permanent_exact(&a).unwrap()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn two_by_two_mean_is_ad_plus_bc() {
        let a = ComplexMatrix::from_row_major(
            2,
            2,
            vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.0), C64::new(0.3, -1.0), C64::new(2.0, 0.5)],
        )
        .unwrap();
        let mean: C64 =
            (0..4).map(|i| glynn_sample(&a, &SignVector::from_index(2, i)).unwrap()).sum::<C64>() / 4.0;
        let expected = a[(0, 0)] * a[(1, 1)] + a[(0, 1)] * a[(1, 0)];
        assert!((mean - expected).norm() < 1e-14);
    }

    #[test]
    fn shape_and_sample_errors() {
        let x = SignVector::new(vec![1, -1, 1]).unwrap();
        assert!(glynn_sample(&ComplexMatrix::identity(2), &x).is_err());
        assert!(SignVector::new(vec![1, 0]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(gurvits_permanent_mc(&ComplexMatrix::identity(2), 1, &mut rng).is_err());
    }

    #[test]
    fn identity_estimate_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = gurvits_permanent_mc(&ComplexMatrix::identity(5), 50, &mut rng).unwrap();
        assert_eq!(e.estimate, ONE);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn estimate_is_seeded() {
        let a = unit_disk_matrix(4, &mut ChaCha8Rng::seed_from_u64(9));
        let e1 = gurvits_permanent_mc(&a, 1000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let e2 = gurvits_permanent_mc(&a, 1000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn estimate_within_three_standard_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = unit_disk_matrix(4, &mut rng);
        // scale so that ‖A‖ ≤ 1 (Frobenius bounds the spectral norm)
        let s = 1.0 / a.frobenius_norm();
        let a = ComplexMatrix::from_fn(4, 4, |r, c| a[(r, c)] * s);
        let e = gurvits_permanent_mc(&a, 100_000, &mut rng).unwrap();
        let exact = permanent_exact(&a).unwrap();
        assert!((e.estimate - exact).norm() < 3.0 * e.std_error, "{e:?} vs {exact}");
    }
}
