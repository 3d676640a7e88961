use std::f64::consts::FRAC_1_SQRT_2;

use crate::numeric::matrix::{ComplexMatrix, C64};

/// The 2×2 MZI transfer matrix
/// `[[e^{iθ} cos(θ'/2), −sin(θ'/2)], [e^{iθ} sin(θ'/2), cos(θ'/2)]]`.
pub fn mzi_block(theta: f64, theta_prime: f64) -> ComplexMatrix {
    let [a, b, c, d] = mzi_entries(theta, theta_prime);
    ComplexMatrix::from_row_major(2, 2, vec![a, b, c, d]).expect("2x2")
}

#[inline]
pub(crate) fn mzi_entries(theta: f64, theta_prime: f64) -> [C64; 4] {
    let e = C64::from_polar(1.0, theta);
    let (s, c) = (theta_prime / 2.0).sin_cos();
    [e * c, C64::new(-s, 0.0), e * s, C64::new(c, 0.0)]
}

/// ∂T/∂θ and ∂T/∂θ'.
#[inline]
pub(crate) fn mzi_derivatives(theta: f64, theta_prime: f64) -> ([C64; 4], [C64; 4]) {
    let e = C64::from_polar(1.0, theta);
    let ie = C64::new(0.0, 1.0) * e;
    let (s, c) = (theta_prime / 2.0).sin_cos();
    let zero = C64::new(0.0, 0.0);
    (
        [ie * c, zero, ie * s, zero],
        [-e * (s / 2.0), C64::new(-c / 2.0, 0.0), e * (c / 2.0), C64::new(-s / 2.0, 0.0)],
    )
}

/// Symmetric 50:50 beam splitter `(1/√2)[[1, i], [i, 1]]`.
pub(crate) fn beam_splitter_entries() -> [C64; 4] {
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    let t = C64::new(0.0, FRAC_1_SQRT_2);
    [r, t, t, r]
}
