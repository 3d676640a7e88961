//! Exact MMD quantities on enumerable domains, and the sample estimator.

use rayon::prelude::*;

use super::kernel::{check_sigma, Kernel, MaskVector};
use crate::boson::output_distribution;
use crate::error::{Error, Result};
use crate::numeric::permanent::ryser;
use crate::numeric::{build_submatrix, ComplexMatrix, OccupationVector, DEFAULT_ORACLE_CAP};

/// Largest mode count for exhaustive mask enumeration.
pub const MASK_ENUMERATION_CAP: usize = 16;

/// Σ_{x,y} p(x) q(y) K(x,y) over a shared domain.
pub fn kernel_expectation(domain: &[OccupationVector], p: &[f64], q: &[f64], kernel: &Kernel) -> Result<f64> {
    if p.len() != domain.len() || q.len() != domain.len() {
        return Err(Error::Shape("probability vectors must match the domain".into()));
    }
    if let Some(x) = domain.iter().find(|x| x.modes() != domain[0].modes()) {
        return Err(Error::Shape(format!("domain element {x} has a different length")));
    }
    let rows: Vec<f64> = domain
        .par_iter()
        .zip(p.par_iter())
        .map(|(x, &px)| {
            if px == 0.0 {
                return 0.0;
            }
            let inner: f64 = domain
                .iter()
                .zip(q)
                .filter(|(_, &qy)| qy != 0.0)
                .map(|(y, &qy)| qy * kernel.eval_unchecked(x.counts(), y.counts()))
                .sum();
            px * inner
        })
        .collect();
    Ok(rows.iter().sum())
}

/// MMD²(p, q) from the three double sums.
pub fn mmd_exact(domain: &[OccupationVector], p: &[f64], q: &[f64], kernel: &Kernel) -> Result<f64> {
    for d in [p, q] {
        let total: f64 = d.iter().sum();
        if (total - 1.0).abs() > 1e-9 || d.iter().any(|&v| v < 0.0) {
            return Err(Error::Unnormalized(total));
        }
    }
    Ok(kernel_expectation(domain, p, p, kernel)? - 2.0 * kernel_expectation(domain, p, q, kernel)?
        + kernel_expectation(domain, q, q, kernel)?)
}

/// Unbiased two-sample MMD² estimate: i≠j within each batch, all pairs across.
pub fn mmd_unbiased_samples(xs: &[OccupationVector], ys: &[OccupationVector], kernel: &Kernel) -> Result<f64> {
    if xs.len() < 2 || ys.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "each batch needs at least 2 samples, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let m = xs[0].modes();
    if xs.iter().chain(ys).any(|v| v.modes() != m) {
        return Err(Error::Shape("samples differ in length".into()));
    }
    let within = |s: &[OccupationVector]| -> f64 {
        let rows: Vec<f64> = (0..s.len())
            .into_par_iter()
            .map(|i| {
                (i + 1..s.len()).map(|j| kernel.eval_unchecked(s[i].counts(), s[j].counts())).sum::<f64>()
            })
            .collect();
        2.0 * rows.iter().sum::<f64>() / (s.len() * (s.len() - 1)) as f64
    };
    let cross_rows: Vec<f64> = xs
        .par_iter()
        .map(|x| ys.iter().map(|y| kernel.eval_unchecked(x.counts(), y.counts())).sum::<f64>())
        .collect();
    let cross = cross_rows.iter().sum::<f64>() / (xs.len() * ys.len()) as f64;
    Ok(within(xs) - 2.0 * cross + within(ys))
}

/// ⟨s| Ũ† W̃^k Ũ |s⟩ = Perm((U†W^kU)^{s,s}) / ∏ sᵢ!.
pub fn expectation_wk_exact(u: &ComplexMatrix, s: &OccupationVector, k: &MaskVector) -> Result<f64> {
    if !u.is_square() || u.rows() != s.modes() || k.len() != s.modes() {
        return Err(Error::Shape(format!(
            "{}x{} matrix, state of length {}, mask of length {}",
            u.rows(),
            u.cols(),
            s.modes(),
            k.len()
        )));
    }
    if s.total() > DEFAULT_ORACLE_CAP {
        return Err(Error::OracleCap { dim: s.total(), cap: DEFAULT_ORACLE_CAP });
    }
    let q = u.conjugate_diagonal(&k.signs());
    let e = ryser(&build_submatrix(&q, s, s)?) / s.factorial_product();
    if e.im.abs() > 1e-8 {
        return Err(Error::NonRealExpectation(e.im));
    }
    Ok(e.re)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoKernelMode {
    /// Single-permanent expectations of W̃^k; certifies the mod-2 kernel at every collision level.
    Mod2,
    /// Expectations restricted to collision-free outcomes; certifies the Gaussian kernel there.
    GaussianCollisionFree,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoExact {
    /// Σ_k P_σ(k) ⟨W̃^k⟩².
    pub value: f64,
    /// Probability of collision outcomes (GaussianCollisionFree mode only).
    pub collision_mass: Option<f64>,
}

/// Model-model MMD term through the linear-optical observable, summed over all 2^m masks.
pub fn mmd_lo_exact(u: &ComplexMatrix, s: &OccupationVector, sigma: f64, mode: LoKernelMode) -> Result<LoExact> {
    check_sigma(sigma)?;
    let m = s.modes();
    if m > MASK_ENUMERATION_CAP {
        return Err(Error::OracleCap { dim: m, cap: MASK_ENUMERATION_CAP });
    }
    match mode {
        LoKernelMode::Mod2 => {
            let terms = (0..1u64 << m)
                .into_par_iter()
                .map(|idx| {
                    let k = MaskVector::from_index(m, idx);
                    let e = expectation_wk_exact(u, s, &k)?;
                    Ok(k.probability(sigma) * e * e)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(LoExact { value: terms.iter().sum(), collision_mass: None })
        }
        LoKernelMode::GaussianCollisionFree => {
            let dist = output_distribution(u, s)?;
            let support: Vec<(&OccupationVector, f64)> = dist
                .domain()
                .iter()
                .zip(dist.probabilities())
                .filter(|(x, _)| x.is_collision_free())
                .map(|(x, &p)| (x, p))
                .collect();
            let terms: Vec<f64> = (0..1u64 << m)
                .into_par_iter()
                .map(|idx| {
                    let k = MaskVector::from_index(m, idx);
                    let e: f64 = support.iter().map(|(x, p)| x.mask_sign(k.bits()) * p).sum();
                    k.probability(sigma) * e * e
                })
                .collect();
            Ok(LoExact { value: terms.iter().sum(), collision_mass: Some(dist.collision_mass()) })
        }
    }
}
