//! One-sided Jacobi SVD.
//!
//! Slow, simple, and very accurate: columns are repeatedly orthogonalized by
//! complex plane rotations until every pairwise inner product is negligible,
//! at which point the column norms are the singular values. This is the
//! reference path the Gram-eigendecomposition kernels are cross-checked
//! against; it shares no code with `hermitian_eigen`. Use it for modest
//! dimensions only (cost grows like sweeps * rows * cols^2).

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::{cdotc, vec_norm};

const MAX_SWEEPS: usize = 60;
const TOL: f64 = 1e-15;

/// Singular values of `m`, descending. Works for any shape.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    svd(m).0
}

/// One-sided Jacobi SVD: returns (singular values descending, left vectors U,
/// right vectors V) with `m = U diag(s) V^H`. When `m` is rank-deficient the
/// U columns past the rank are zero.
pub fn svd(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix, ComplexMatrix) {
    // Work on the tall orientation; transposing swaps the roles of U and V.
    if m.rows() < m.cols() {
        let (s, u, v) = svd(&m.adjoint());
        return (s, v, u);
    }
    let rows = m.rows();
    let cols = m.cols();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(cols);

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for j in 1..cols {
            for i in 0..j {
                let aii = vec_norm(a.col(i)).powi(2);
                let ajj = vec_norm(a.col(j)).powi(2);
                let g = cdotc(a.col(i), a.col(j));
                let gn = g.norm();
                if gn <= TOL * (aii * ajj).sqrt() || aii == 0.0 || ajj == 0.0 {
                    continue;
                }
                off = off.max(gn / (aii * ajj).sqrt());
                let phase = g / gn;
                let tau = (ajj - aii) / (2.0 * gn);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // Right-multiply columns (i, j) by
                //   [[ c,            s*phase ],
                //    [ -s*conj(phase), c     ]]
                rotate_columns(&mut a, i, j, c, s, phase);
                rotate_columns(&mut v, i, j, c, s, phase);
            }
        }
        if off <= TOL {
            break;
        }
    }

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols).map(|j| vec_norm(a.col(j))).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut s = Vec::with_capacity(cols);
    let mut u = ComplexMatrix::zeros(rows, cols);
    let mut vr = ComplexMatrix::zeros(cols, cols);
    for (new_j, &old_j) in order.iter().enumerate() {
        let norm = norms[old_j];
        s.push(norm);
        if norm > 0.0 {
            for r in 0..rows {
                u.set(r, new_j, a.get(r, old_j) / norm);
            }
        }
        for r in 0..cols {
            vr.set(r, new_j, v.get(r, old_j));
        }
    }
    (s, u, vr)
}

fn rotate_columns(a: &mut ComplexMatrix, i: usize, j: usize, c: f64, s: f64, phase: Complex64) {
    let rows = a.rows();
    for r in 0..rows {
        let x = a.get(r, i);
        let y = a.get(r, j);
        a.set(r, i, c * x - s * phase.conj() * y);
        a.set(r, j, s * phase * x + c * y);
    }
}
