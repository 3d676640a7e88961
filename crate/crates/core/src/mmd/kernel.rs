use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::OccupationVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    /// exp(−‖x−y‖²/2σ²)
    Gaussian,
    /// exp(−Σᵢ((xᵢ+yᵢ) mod 2)/2σ²); equal to the Gaussian kernel on 0/1 vectors.
    Mod2,
}

/// A kernel with its bandwidth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kernel {
    pub kind: KernelKind,
    pub sigma: f64,
}

impl Kernel {
    pub fn new(kind: KernelKind, sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(Kernel { kind, sigma })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(KernelKind::Gaussian, sigma)
    }

    pub fn mod2(sigma: f64) -> Result<Self> {
        Self::new(KernelKind::Mod2, sigma)
    }

    pub fn eval(&self, x: &OccupationVector, y: &OccupationVector) -> Result<f64> {
        match self.kind {
            KernelKind::Gaussian => gaussian_kernel(x, y, self.sigma),
            KernelKind::Mod2 => mod2_kernel(x, y, self.sigma),
        }
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[u8], y: &[u8]) -> f64 {
        let d: u32 = match self.kind {
            KernelKind::Gaussian => x.iter().zip(y).map(|(&a, &b)| (a as i32 - b as i32).pow(2) as u32).sum(),
            KernelKind::Mod2 => x.iter().zip(y).map(|(&a, &b)| ((a + b) % 2) as u32).sum(),
        };
        (-(d as f64) / (2.0 * self.sigma * self.sigma)).exp()
    }
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("bandwidth must be positive and finite, got {sigma}")));
    }
    Ok(())
}

fn check_lengths(x: &OccupationVector, y: &OccupationVector) -> Result<()> {
    if x.modes() != y.modes() {
        return Err(Error::Shape(format!("vectors of length {} and {}", x.modes(), y.modes())));
    }
    Ok(())
}

pub fn gaussian_kernel(x: &OccupationVector, y: &OccupationVector, sigma: f64) -> Result<f64> {
    check_lengths(x, y)?;
    check_sigma(sigma)?;
    Ok(Kernel { kind: KernelKind::Gaussian, sigma }.eval_unchecked(x.counts(), y.counts()))
}

pub fn mod2_kernel(x: &OccupationVector, y: &OccupationVector, sigma: f64) -> Result<f64> {
    check_lengths(x, y)?;
    check_sigma(sigma)?;
    Ok(Kernel { kind: KernelKind::Mod2, sigma }.eval_unchecked(x.counts(), y.counts()))
}

/// Per-mode Bernoulli probability p_σ = (1 − e^{−1/2σ²})/2 of the mask distribution.
pub fn p_sigma(sigma: f64) -> f64 {
    // −expm1 keeps precision for large σ
    -(-1.0 / (2.0 * sigma * sigma)).exp_m1() / 2.0
}

/// A mask k ∈ {0,1}^m selecting the modes where W^k flips sign.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MaskVector(Vec<bool>);

impl MaskVector {
    pub fn new(bits: Vec<bool>) -> Self {
        MaskVector(bits)
    }

    /// Mask number `index` of the 2^m masks (bit i ↔ mode i).
    pub fn from_index(m: usize, index: u64) -> Self {
        MaskVector((0..m).map(|i| index >> i & 1 == 1).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn set_modes(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    /// Diagonal of W^k: (−1)^{kᵢ}.
    pub fn signs(&self) -> Vec<f64> {
        self.0.iter().map(|&b| if b { -1.0 } else { 1.0 }).collect()
    }

    /// P_σ(k) = (1−p)^{m−|k|} p^{|k|}.
    pub fn probability(&self, sigma: f64) -> f64 {
        let p = p_sigma(sigma);
        let w = self.weight() as i32;
        (1.0 - p).powi(self.len() as i32 - w) * p.powi(w)
    }
}

/// A mask with i.i.d. bits, each set with probability p_σ.
pub fn sample_mask(m: usize, sigma: f64, rng: &mut impl Rng) -> MaskVector {
    let p = p_sigma(sigma);
    MaskVector((0..m).map(|_| rng.random::<f64>() < p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ov(d: &str) -> OccupationVector {
        OccupationVector::from_digits(d).unwrap()
    }

    #[test]
    fn gaussian_values() {
        assert_eq!(gaussian_kernel(&ov("0110"), &ov("0110"), 1.0).unwrap(), 1.0);
        let k = gaussian_kernel(&ov("0110"), &ov("0111"), 1.0).unwrap();
        assert!((k - (-0.5f64).exp()).abs() < 1e-15);
        assert!((k - 0.60653).abs() < 1e-5);
        assert!(gaussian_kernel(&ov("1100"), &ov("0011"), 1e6).unwrap() > 1.0 - 1e-11);
        assert!(gaussian_kernel(&ov("11"), &ov("110"), 1.0).is_err());
        assert!(gaussian_kernel(&ov("11"), &ov("11"), 0.0).is_err());
    }

    #[test]
    fn mod2_values() {
        assert_eq!(mod2_kernel(&ov("20"), &ov("02"), 1.0).unwrap(), 1.0);
        assert_eq!(mod2_kernel(&ov("21"), &ov("21"), 0.3).unwrap(), 1.0);
        for (a, b) in [("0110", "1010"), ("1111", "0000"), ("0101", "0101")] {
            assert_eq!(mod2_kernel(&ov(a), &ov(b), 0.7).unwrap(), gaussian_kernel(&ov(a), &ov(b), 0.7).unwrap());
        }
    }

    #[test]
    fn p_sigma_values() {
        // (1 − e^{−1/18})/2
        assert!((p_sigma(3.0) - 0.027_020_27).abs() < 1e-8);
        assert!(p_sigma(1e9) < 1e-18 && p_sigma(1e9) >= 0.0);
        assert!((p_sigma(1e-3) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mask_probabilities_sum_to_one() {
        let total: f64 = (0..1u64 << 6).map(|i| MaskVector::from_index(6, i).probability(1.3)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mask_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..100).all(|_| sample_mask(10, 1e6, &mut rng).weight() == 0));
        let a = sample_mask(10, 1.0, &mut ChaCha8Rng::seed_from_u64(3));
        let b = sample_mask(10, 1.0, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_bit_frequency_matches_p_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (draws, m) = (100_000, 10);
        let ones: usize = (0..draws).map(|_| sample_mask(m, 3.0, &mut rng).weight()).sum();
        let trials = (draws * m) as f64;
        let p = p_sigma(3.0);
        let se = (p * (1.0 - p) / trials).sqrt();
        assert!((ones as f64 / trials - p).abs() < 3.0 * se);
    }
}
