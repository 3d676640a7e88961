//! Photonic quantum circuit Born machines trained on the maximum mean
//! discrepancy.
//!
//! A circuit is a parametrized interferometer ([`circuits`]) fed with single
//! photons. Its loss against a dataset of photon-count patterns is the MMD²
//! under a Gaussian kernel, estimated from Bernoulli masks and Glynn sign
//! vectors ([`mmd`]) and differentiated exactly ([`grad`]). The [`trainer`]
//! runs Adam on that loss; [`boson`] simulates boson sampling exactly for
//! data generation and evaluation, and [`baselines`] holds the classical
//! comparison models.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baselines;
pub mod boson;
pub mod circuits;
pub mod data;
pub mod error;
pub mod grad;
pub mod mmd;
pub mod numeric;
pub mod rng;
pub mod trainer;

pub use circuits::{CircuitSpec, InitStrategy, MeshKind};
pub use data::Dataset;
pub use error::{Error, Result};
pub use grad::GradientVector;
pub use mmd::{EstimatorBatches, Kernel, KernelKind, MaskVector, MmdConfig};
pub use numeric::{ComplexMatrix, OccupationVector, SignVector, C64};
pub use rng::{StreamSeed, StreamTag};
pub use trainer::{LossTrace, TrainConfig};
