//! Dense complex linear algebra.
//!
//! [`ComplexMatrix`] is a column-major dense matrix of `Complex64`; columns
//! are contiguous, which is what the hot kernels (Gram matrices, stacked
//! applications) are built around. Everything here is single-threaded and
//! allocation-explicit: batch parallelism belongs to the caller, which keeps
//! per-instance arithmetic bit-reproducible regardless of worker count.

mod eigh;
pub mod jacobi;
mod matrix;
mod spectral;

pub use eigh::{hermitian_eigen, re_hermitize};
pub use matrix::ComplexMatrix;
pub use spectral::{
    approx_isometry_report, isometrize, op_norm, partial_isometry_round, singular_extrema,
    IsometryReport, SingularExtrema, RANK_TOLERANCE,
};

use num_complex::Complex64;

/// conj(a) . b over equal-length slices.
#[inline]
pub fn cdotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let mut re = 0.0f64;
    let mut im = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    Complex64::new(re, im)
}

/// Euclidean norm of a complex vector.
#[inline]
pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// y += alpha * x.
#[inline]
pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
