//! Haar-compatible parametrization: 2m² reals → X + iY → modified Gram-Schmidt.
//!
//! Gram-Schmidt produces an R factor with a real positive diagonal, so the
//! map is the phase-fixed QR that sends isotropic Gaussian parameters to
//! Haar-distributed unitaries.

use crate::error::{Error, Result};
use crate::numeric::matrix::{ComplexMatrix, C64, ZERO};

/// Intermediate values kept for the reverse pass.
#[derive(Clone, Debug)]
pub(crate) struct GramSchmidtRecord {
    /// Projection coefficients r_ij (i < j), row-major m×m, lower part unused.
    pub r: Vec<C64>,
    /// Column norms r_jj before normalization.
    pub norms: Vec<f64>,
}

pub(crate) fn params_to_matrix(params: &[f64], m: usize) -> ComplexMatrix {
    let (re, im) = params.split_at(m * m);
    ComplexMatrix::from_fn(m, m, |r, c| C64::new(re[r * m + c], im[r * m + c]))
}

/// Column-wise modified Gram-Schmidt. Returns Q and the record.
pub(crate) fn gram_schmidt(a: &ComplexMatrix) -> Result<(ComplexMatrix, GramSchmidtRecord)> {
    let m = a.rows();
    let mut q = ComplexMatrix::zeros(m, m);
    let mut r = vec![ZERO; m * m];
    let mut norms = vec![0.0; m];
    let mut v = vec![ZERO; m];
    for j in 0..m {
        for k in 0..m {
            v[k] = a[(k, j)];
        }
        for i in 0..j {
            let mut rij = ZERO;
            for k in 0..m {
                rij += q[(k, i)].conj() * v[k];
            }
            for k in 0..m {
                v[k] -= rij * q[(k, i)];
            }
            r[i * m + j] = rij;
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-300) {
            return Err(Error::InvalidArgument(format!("parameter matrix is rank-deficient at column {j}")));
        }
        norms[j] = norm;
        for k in 0..m {
            q[(k, j)] = v[k] / norm;
        }
    }
    Ok((q, GramSchmidtRecord { r, norms }))
}
