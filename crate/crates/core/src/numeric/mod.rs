//! Complex linear algebra, permanents and Fock-space combinatorics.

pub mod fock;
pub mod glynn;
pub mod matrix;
pub mod permanent;

pub use fock::{binomial, enumerate_fock_space, factorial, fock_space_size, OccupationVector};
pub use glynn::{glynn_sample, gurvits_permanent_mc, PermanentEstimate, SignVector};
pub use matrix::{ComplexMatrix, C64};
pub use permanent::{
    build_submatrix, permanent_exact, permanent_exact_capped, permanent_naive, DEFAULT_ORACLE_CAP,
};
