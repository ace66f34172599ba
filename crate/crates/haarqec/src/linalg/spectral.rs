//! Singular spectra and the SVD-derived operations built from the Gram
//! eigendecomposition.
//!
//! Every routine here reduces to a Hermitian eigenproblem on the smaller Gram
//! matrix of its input. For the tall `N x L` matrices this library works with
//! (`L = K m << N`), that is the dominant cost saver over a rectangular SVD:
//! the `L x L` Gram is built in one pass over the columns and everything else
//! is `O(N L^2)` or cheaper.

use num_complex::Complex64;
use serde::Serialize;

use super::eigh::{hermitian_eigen, re_hermitize};
use super::matrix::ComplexMatrix;
use crate::{Error, Result};

/// Relative rank tolerance: a singular value counts as nonzero when it
/// exceeds `RANK_TOLERANCE * s_max`.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Extreme singular values of a matrix.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SingularExtrema {
    pub s_min: f64,
    pub s_max: f64,
}

/// How far a tall matrix is from being an isometry: `delta` is the smallest
/// value such that every singular value lies in `[1 - delta, 1 + delta]`,
/// clamped at zero so exact isometries report 0 despite round-off.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IsometryReport {
    pub extrema: SingularExtrema,
    pub delta: f64,
    pub rows: usize,
    pub cols: usize,
}

impl IsometryReport {
    pub fn from_extrema(extrema: SingularExtrema, rows: usize, cols: usize) -> Self {
        let delta = (extrema.s_max - 1.0).max(1.0 - extrema.s_min).max(0.0);
        IsometryReport {
            extrema,
            delta,
            rows,
            cols,
        }
    }
}

fn extrema_from_gram_eigenvalues(vals: &[f64]) -> SingularExtrema {
    let lam_min = vals.first().copied().unwrap_or(0.0);
    let lam_max = vals.last().copied().unwrap_or(0.0);
    SingularExtrema {
        s_min: lam_min.max(0.0).sqrt(),
        s_max: lam_max.max(0.0).sqrt(),
    }
}

/// Extreme singular values via the eigenvalues of the `cols x cols` Gram
/// matrix. Requires `rows >= cols`.
pub fn singular_extrema(m: &ComplexMatrix) -> Result<SingularExtrema> {
    if m.rows() < m.cols() {
        return Err(Error::ShapeMismatch(format!(
            "singular_extrema needs rows >= cols, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if m.cols() == 0 {
        return Err(Error::InvalidParameter("matrix with zero columns".into()));
    }
    m.ensure_finite()?;
    let gram = re_hermitize(&m.gram());
    let (vals, _) = hermitian_eigen(&gram, false)?;
    Ok(extrema_from_gram_eigenvalues(&vals))
}

/// Largest singular value, computed on the smaller Gram side.
pub fn op_norm(m: &ComplexMatrix) -> Result<f64> {
    let tall = if m.rows() >= m.cols() {
        m.clone()
    } else {
        m.adjoint()
    };
    Ok(singular_extrema(&tall)?.s_max)
}

/// Certifies how close `m` is to an isometry (requires `rows >= cols`):
/// `m` is a `delta'`-approximate isometry exactly when `delta' >= delta`.
pub fn approx_isometry_report(m: &ComplexMatrix) -> Result<IsometryReport> {
    let extrema = singular_extrema(m)?;
    Ok(IsometryReport::from_extrema(extrema, m.rows(), m.cols()))
}

/// Nearest isometry to a full-column-rank tall matrix: with thin SVD
/// `m = W S U`, returns `W U`, equivalently `m (m^H m)^{-1/2}`.
pub fn isometrize(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.rows() < m.cols() {
        return Err(Error::ShapeMismatch(format!(
            "isometrize needs rows >= cols, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    m.ensure_finite()?;
    let k = m.cols();
    let gram = re_hermitize(&m.gram());
    let (vals, vecs) = hermitian_eigen(&gram, true)?;
    let u = vecs.expect("vectors requested");
    let s_max = vals.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    let threshold = RANK_TOLERANCE * s_max;
    let s_min = vals.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    if s_min <= threshold || s_max == 0.0 {
        return Err(Error::RankDeficient {
            s_min,
            threshold,
        });
    }
    // (m^H m)^{-1/2} = U diag(1/s) U^H
    let mut inv_sqrt = ComplexMatrix::zeros(k, k);
    for (a, &lam) in vals.iter().enumerate() {
        let ua = u.col(a);
        let w = 1.0 / lam.sqrt();
        for i in 0..k {
            for j in 0..k {
                let cur = inv_sqrt.get(i, j);
                inv_sqrt.set(i, j, cur + ua[i] * ua[j].conj() * w);
            }
        }
    }
    Ok(m.mul(&inv_sqrt))
}

/// Rounds every singular value above the rank tolerance to exactly 1 and the
/// rest to 0: with SVD `m = U1 S U2`, returns `(U1 S' U2, rank)` where `S'`
/// is the rounded diagonal and `rank` counts the kept values. The result is
/// always a partial isometry; when all singular values of `m` lie in
/// `[1 - d, 1 + d]` with `d < 1`, it satisfies `||m - result|| <= d`.
pub fn partial_isometry_round(m: &ComplexMatrix) -> Result<(ComplexMatrix, usize)> {
    m.ensure_finite()?;
    if m.rows() < m.cols() {
        let (d, rank) = partial_isometry_round(&m.adjoint())?;
        return Ok((d.adjoint(), rank));
    }
    let gram = re_hermitize(&m.gram());
    let (vals, vecs) = hermitian_eigen(&gram, true)?;
    let u = vecs.expect("vectors requested");
    let s_max = vals.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    let threshold = RANK_TOLERANCE * s_max;
    let mut d = ComplexMatrix::zeros(m.rows(), m.cols());
    let mut rank = 0usize;
    if s_max == 0.0 {
        return Ok((d, 0));
    }
    // D = sum over kept values of (m u_a / s_a) u_a^H
    for (a, &lam) in vals.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        if s <= threshold {
            continue;
        }
        rank += 1;
        let mut left = m.apply_vec(u.col(a));
        let inv = 1.0 / s;
        for z in left.iter_mut() {
            *z *= inv;
        }
        let ua = u.col(a);
        for (j, uaj) in ua.iter().enumerate() {
            let coeff = uaj.conj();
            if coeff != Complex64::ZERO {
                let col = d.col_mut(j);
                for (r, l) in col.iter_mut().zip(&left) {
                    *r += l * coeff;
                }
            }
        }
    }
    Ok((d, rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::jacobi;
    use crate::seeding::{complex_gaussian, rng_from_seed};

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut rng = rng_from_seed(seed);
        ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(&mut rng, 1.0))
    }

    fn diag(entries: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_fn(entries.len(), entries.len(), |i, j| {
            if i == j {
                Complex64::new(entries[i], 0.0)
            } else {
                Complex64::ZERO
            }
        })
    }

    #[test]
    fn identity_extrema() {
        let e = singular_extrema(&ComplexMatrix::identity(4)).unwrap();
        assert!((e.s_min - 1.0).abs() < 1e-14);
        assert!((e.s_max - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_extrema() {
        let e = singular_extrema(&diag(&[2.0, 0.5])).unwrap();
        assert!((e.s_min - 0.5).abs() < 1e-14);
        assert!((e.s_max - 2.0).abs() < 1e-14);
    }

    #[test]
    fn shear_extrema_golden_ratio() {
        // [[1,1],[0,1]]: Gram eigenvalues (3 +- sqrt 5)/2, so the singular
        // values are 1/phi and phi.
        let mut m = ComplexMatrix::identity(2);
        m.set(0, 1, Complex64::ONE);
        let e = singular_extrema(&m).unwrap();
        assert!((e.s_min - 0.618_033_988_749_894_9).abs() < 1e-12);
        assert!((e.s_max - 1.618_033_988_749_895).abs() < 1e-12);
    }

    #[test]
    fn extrema_match_jacobi_oracle() {
        for (rows, cols, seed) in [(7usize, 4usize, 1u64), (20, 9, 2), (33, 17, 3), (12, 12, 4)] {
            let m = random_matrix(rows, cols, seed);
            let e = singular_extrema(&m).unwrap();
            let sv = jacobi::singular_values(&m);
            let (smax, smin) = (sv[0], sv[cols - 1]);
            assert!((e.s_max - smax).abs() <= 1e-10 * smax.max(1.0));
            assert!((e.s_min - smin).abs() <= 1e-10 * smax.max(1.0));
        }
    }

    #[test]
    fn wrong_shape_is_rejected() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            singular_extrema(&m),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn report_on_exact_isometry_is_zero() {
        // First two columns of a rotation-like construction.
        let mut m = ComplexMatrix::zeros(3, 2);
        m.set(0, 0, Complex64::new(0.6, 0.0));
        m.set(1, 0, Complex64::new(0.0, 0.8));
        m.set(2, 1, Complex64::ONE);
        let r = approx_isometry_report(&m).unwrap();
        assert_eq!(r.delta, 0.0);
    }

    #[test]
    fn report_on_scaled_diagonal() {
        let r = approx_isometry_report(&diag(&[1.2, 0.9])).unwrap();
        assert!((r.delta - 0.2).abs() < 1e-12);
    }

    #[test]
    fn overlapping_columns_family() {
        // l columns v_i = sqrt(1-d)|i> + sqrt(d)|0> in dimension l+1: pairwise
        // overlaps are d but s_max = sqrt(1 + d(l-1)).
        let l = 5usize;
        let d = 0.1f64;
        let mut m = ComplexMatrix::zeros(l + 1, l);
        for i in 0..l {
            m.set(0, i, Complex64::new(d.sqrt(), 0.0));
            m.set(i + 1, i, Complex64::new((1.0 - d).sqrt(), 0.0));
        }
        let e = singular_extrema(&m).unwrap();
        let want_max = (1.0 + d * (l as f64 - 1.0)).sqrt();
        let want_min = (1.0 - d).sqrt();
        assert!((e.s_max - want_max).abs() < 1e-12);
        assert!((e.s_min - want_min).abs() < 1e-12);
    }

    #[test]
    fn isometrize_fixes_nothing_on_isometries() {
        let g = random_matrix(10, 4, 7);
        let v = isometrize(&g).unwrap();
        let again = isometrize(&v).unwrap();
        assert!(v.max_abs_diff(&again) < 1e-12);
        let gram = v.gram();
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn isometrize_diagonal_and_scaling() {
        let v = isometrize(&diag(&[2.0, 0.5])).unwrap();
        assert!(v.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);

        let g = random_matrix(8, 3, 9);
        let w = isometrize(&g).unwrap();
        let scaled = w.scaled(Complex64::new(3.7, 0.0));
        let w2 = isometrize(&scaled).unwrap();
        assert!(w.max_abs_diff(&w2) < 1e-12);
    }

    #[test]
    fn isometrize_idempotent_on_random_inputs() {
        for seed in 0..8u64 {
            let g = random_matrix(12, 5, 100 + seed);
            let v = isometrize(&g).unwrap();
            let v2 = isometrize(&v).unwrap();
            assert!(v.max_abs_diff(&v2) < 1e-10);
        }
    }

    #[test]
    fn isometrize_rejects_rank_deficiency() {
        let mut m = random_matrix(6, 3, 11);
        let c0 = m.col(0).to_vec();
        m.col_mut(2).copy_from_slice(&c0);
        assert!(matches!(isometrize(&m), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn rounding_leaves_partial_isometries_alone() {
        let v = isometrize(&random_matrix(9, 4, 13)).unwrap();
        let (d, rank) = partial_isometry_round(&v).unwrap();
        assert_eq!(rank, 4);
        assert!(d.max_abs_diff(&v) < 1e-10);
    }

    #[test]
    fn rounding_diagonal() {
        let (d, rank) = partial_isometry_round(&diag(&[1.1, 0.9])).unwrap();
        assert_eq!(rank, 2);
        assert!(d.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn rounding_zeroes_small_singulars_and_bounds_distance() {
        for seed in 0..6u64 {
            let m = random_matrix(11, 5, 200 + seed);
            let (d, _rank) = partial_isometry_round(&m).unwrap();
            // All singular values of d are 0 or 1.
            for s in jacobi::singular_values(&d) {
                assert!(s < 1e-10 || (s - 1.0).abs() < 1e-10);
            }
            // ||m - d|| <= max_s |s - round(s)|
            let sv = jacobi::singular_values(&m);
            let bound = sv
                .iter()
                .map(|s| if *s >= 0.5 { (s - 1.0).abs() } else { *s })
                .fold(0.0f64, f64::max);
            let dist = op_norm(&m.sub(&d)).unwrap();
            assert!(dist <= bound + 1e-9, "dist {dist} bound {bound}");
        }
    }

    #[test]
    fn rounding_wide_matrices_matches_adjoint_route() {
        let m = random_matrix(4, 9, 17);
        let (d, rank) = partial_isometry_round(&m).unwrap();
        assert_eq!(rank, 4);
        let dd = d.mul(&d.adjoint());
        assert!(dd.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-9);
    }
}
