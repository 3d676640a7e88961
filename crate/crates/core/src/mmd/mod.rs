//! Kernels, mask distributions, exact MMD oracles and the sampled estimator.

pub mod estimator;
pub mod exact;
pub mod kernel;

pub use estimator::{draw_batches, mmd_hat_figure1, EstimatorBatches, MmdConfig};
pub use exact::{
    expectation_wk_exact, kernel_expectation, mmd_exact, mmd_lo_exact, mmd_unbiased_samples, LoExact,
    LoKernelMode, MASK_ENUMERATION_CAP,
};
pub use kernel::{gaussian_kernel, mod2_kernel, p_sigma, sample_mask, Kernel, KernelKind, MaskVector};
