//! Classical comparison models and the test-to-test reference value.

pub mod rbm;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::mmd::{mmd_unbiased_samples, Kernel};
use crate::numeric::OccupationVector;

pub use rbm::{rbm_sample, rbm_train, RbmConfig, RbmModel, RbmSamples, RbmTraining, RBM_RETRY_CAP};

/// Uniform draws over the C(m, n) binary strings of weight `n`.
pub fn uniform_fixed_hw_sample(m: usize, n: usize, count: usize, rng: &mut impl Rng) -> Result<Vec<OccupationVector>> {
    if n > m {
        return Err(Error::InvalidArgument(format!("weight {n} exceeds length {m}")));
    }
    Ok((0..count)
        .map(|_| {
            let mut c = vec![0u8; m];
            for i in sample(rng, m, n) {
                c[i] = 1;
            }
            OccupationVector::new(c)
        })
        .collect())
}

/// Mean and sample standard deviation of the MMD² between the two halves of
/// the shuffled test set, over `repeats` shuffles (Gaussian kernel).
pub fn test_to_test_mmd(
    test_set: &[OccupationVector],
    sigma: f64,
    repeats: usize,
    rng: &mut impl Rng,
) -> Result<(f64, f64)> {
    test_to_test_mmd_with(test_set, &Kernel::gaussian(sigma)?, repeats, rng)
}

/// [`test_to_test_mmd`] with an arbitrary kernel.
pub fn test_to_test_mmd_with(
    test_set: &[OccupationVector],
    kernel: &Kernel,
    repeats: usize,
    rng: &mut impl Rng,
) -> Result<(f64, f64)> {
    if test_set.len() < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 test points, got {}", test_set.len())));
    }
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be positive".into()));
    }
    let mut pool = test_set.to_vec();
    let mut values = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        pool.shuffle(rng);
        let (a, b) = pool.split_at(pool.len() / 2);
        values.push(mmd_unbiased_samples(a, b, kernel)?);
    }
    Ok(mean_std(&values))
}

/// Mean and Bessel-corrected standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
