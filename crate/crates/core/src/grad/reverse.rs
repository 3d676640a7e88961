//! Reverse passes from ∂L/∂U back to circuit parameters.
//!
//! Adjoints of complex quantities use the convention x̄ = ∂L/∂Re x + i ∂L/∂Im x,
//! under which dL = Re Σ conj(x̄)·dx.

use crate::circuits::mesh::{apply_two_mode, permute_rows, scale_row, two_mode_entries, Element, MeshProgram};
use crate::circuits::mzi::mzi_derivatives;
use crate::circuits::qr::GramSchmidtRecord;
use crate::numeric::matrix::{ComplexMatrix, C64, ZERO};

/// Σ_c a[r1,c]·conj(b[r2,c])
fn row_inner(a: &ComplexMatrix, r1: usize, b: &ComplexMatrix, r2: usize) -> C64 {
    a.row(r1).iter().zip(b.row(r2)).map(|(x, y)| x * y.conj()).sum()
}

fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// Gradient of L with respect to the program parameters, given U = program(I)
/// and Ū. Intermediate products are recovered by applying inverse elements,
/// which is exact up to rounding because every element is unitary.
pub(crate) fn mesh_backward(
    program: &MeshProgram,
    params: &[f64],
    u: &ComplexMatrix,
    ubar: &ComplexMatrix,
) -> Vec<f64> {
    let mut grad = vec![0.0; params.len()];
    let mut state = u.clone();
    let mut adj = ubar.clone();
    for el in program.elements.iter().rev() {
        if let Some((top, bottom, t)) = two_mode_entries(el, params) {
            let tinv = [t[0].conj(), t[2].conj(), t[1].conj(), t[3].conj()];
            apply_two_mode(&mut state, top, bottom, &tinv);
            if let Element::Mzi { theta, theta_prime, .. } = *el {
                let rows = [top, bottom];
                let mut ebar = [ZERO; 4];
                for a in 0..2 {
                    for b in 0..2 {
                        ebar[a * 2 + b] = row_inner(&adj, rows[a], &state, rows[b]);
                    }
                }
                let (dt, dtp) = mzi_derivatives(params[theta], params[theta_prime]);
                grad[theta] += (0..4).map(|i| (ebar[i].conj() * dt[i]).re).sum::<f64>();
                grad[theta_prime] += (0..4).map(|i| (ebar[i].conj() * dtp[i]).re).sum::<f64>();
            }
            apply_two_mode(&mut adj, top, bottom, &tinv);
            continue;
        }
        match el {
            Element::Phase { mode, param } => {
                let e = C64::from_polar(1.0, params[*param]);
                scale_row(&mut state, *mode, e.conj());
                let ebar = row_inner(&adj, *mode, &state, *mode);
                grad[*param] += (ebar.conj() * C64::new(0.0, 1.0) * e).re;
                scale_row(&mut adj, *mode, e.conj());
            }
            Element::Permute(perm) => {
                let inv = inverse(perm);
                state = permute_rows(&state, &inv);
                adj = permute_rows(&adj, &inv);
            }
            _ => unreachable!(),
        }
    }
    grad
}

/// Gradient with respect to the 2m² qr_haar parameters (real parts row-major,
/// then imaginary parts), given Q = gram_schmidt(X + iY), its record and Q̄.
pub(crate) fn gram_schmidt_backward(q: &ComplexMatrix, rec: &GramSchmidtRecord, qbar: &ComplexMatrix) -> Vec<f64> {
    let m = q.rows();
    let col = |mat: &ComplexMatrix, j: usize| -> Vec<C64> { (0..m).map(|k| mat[(k, j)]).collect() };
    let qs: Vec<Vec<C64>> = (0..m).map(|j| col(q, j)).collect();
    let mut qbars: Vec<Vec<C64>> = (0..m).map(|j| col(qbar, j)).collect();
    let mut grad = vec![0.0; 2 * m * m];
    for j in (0..m).rev() {
        let rho = rec.norms[j];
        let qj = &qs[j];
        // q = v/ρ with ρ = ‖v‖
        let proj: f64 = qbars[j].iter().zip(qj).map(|(a, b)| (a.conj() * b).re).sum();
        let mut vbar: Vec<C64> = qbars[j].iter().zip(qj).map(|(a, b)| (a - b * proj) / rho).collect();
        let mut v: Vec<C64> = qj.iter().map(|x| x * rho).collect();
        for i in (0..j).rev() {
            // v_out = v_in − r q_i with r = q_iᴴ v_in
            let r = rec.r[i * m + j];
            let qi = &qs[i];
            for k in 0..m {
                v[k] += r * qi[k];
            }
            let rbar: C64 = -qi.iter().zip(&vbar).map(|(a, b)| a.conj() * b).sum::<C64>();
            for k in 0..m {
                qbars[i][k] += -r.conj() * vbar[k] + rbar.conj() * v[k];
                vbar[k] += rbar * qi[k];
            }
        }
        for k in 0..m {
            grad[k * m + j] = vbar[k].re;
            grad[m * m + k * m + j] = vbar[k].im;
        }
    }
    grad
}
