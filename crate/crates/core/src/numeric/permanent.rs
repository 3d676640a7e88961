//! Exact permanents and the repeated-row/column submatrix.

use super::fock::OccupationVector;
use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Largest dimension the exact permanent routines accept by default.
pub const DEFAULT_ORACLE_CAP: usize = 14;

/// Perm(A) by Ryser's formula with Gray-code subset ordering, O(2ⁿ n).
pub fn permanent_exact(a: &ComplexMatrix) -> Result<C64> {
    permanent_exact_capped(a, DEFAULT_ORACLE_CAP)
}

pub fn permanent_exact_capped(a: &ComplexMatrix, cap: usize) -> Result<C64> {
    check_square(a)?;
    let n = a.rows();
    if n > cap {
        return Err(Error::OracleCap { dim: n, cap });
    }
    Ok(ryser(a))
}

pub(crate) fn ryser(a: &ComplexMatrix) -> C64 {
    let n = a.rows();
    if n == 0 {
        return ONE;
    }
    let mut row_sums = vec![ZERO; n];
    let mut total = ZERO;
    let mut in_set = vec![false; n];
    let mut odd = false;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        in_set[j] = !in_set[j];
        odd = !odd;
        if in_set[j] {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[(i, j)];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[(i, j)];
            }
        }
        let prod = row_sums.iter().fold(ONE, |acc, &s| acc * s);
        if odd {
            total -= prod;
        } else {
            total += prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

/// Perm(A) by summing over all n! permutations. Cross-check oracle only.
pub fn permanent_naive(a: &ComplexMatrix) -> Result<C64> {
    check_square(a)?;
    let n = a.rows();
    if n > 10 {
        return Err(Error::OracleCap { dim: n, cap: 10 });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = ZERO;
    // Heap's algorithm
    let mut c = vec![0usize; n];
    let term = |p: &[usize]| p.iter().enumerate().fold(ONE, |acc, (i, &j)| acc * a[(i, j)]);
    total += term(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            total += term(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(total)
}

/// The n×n matrix made by repeating row i of `q` `s_out[i]` times, then
/// column j of that intermediate `s_in[j]` times.
pub fn build_submatrix(
    q: &ComplexMatrix,
    s_in: &OccupationVector,
    s_out: &OccupationVector,
) -> Result<ComplexMatrix> {
    check_square(q)?;
    let m = q.rows();
    if s_in.modes() != m || s_out.modes() != m {
        return Err(Error::Shape(format!(
            "occupation vectors of length {} and {} for a {m}-mode matrix",
            s_in.modes(),
            s_out.modes()
        )));
    }
    if s_in.total() != s_out.total() {
        return Err(Error::Shape(format!(
            "photon totals differ: {} in, {} out",
            s_in.total(),
            s_out.total()
        )));
    }
    let rows = s_out.occupied_modes();
    let cols = s_in.occupied_modes();
    Ok(ComplexMatrix::from_fn(rows.len(), cols.len(), |r, c| q[(rows[r], cols[c])]))
}

fn check_square(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Shape(format!("{}x{} matrix is not square", a.rows(), a.cols())));
    }
    Ok(())
}
