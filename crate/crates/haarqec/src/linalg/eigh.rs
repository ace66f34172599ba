//! Hermitian eigendecomposition.
//!
//! The classic dense route: unitary Householder reflections reduce the
//! Hermitian matrix to a real symmetric tridiagonal form with a real
//! subdiagonal, implicit-shift QL iteration diagonalizes the tridiagonal
//! (accumulating the real rotations when eigenvectors are requested), and the
//! stored reflectors are applied back to produce complex eigenvectors.
//!
//! Eigenvalues are returned in ascending order. With vectors, `A v_k =
//! lambda_k v_k` holds to roughly `eps * ||A||` and the vectors are
//! orthonormal to machine precision.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::{axpy, cdotc};
use crate::{Error, Result};

/// (A + adjoint(A)) / 2. Gram matrices are re-symmetrized through this before
/// eigendecomposition so round-off asymmetry cannot leak into the spectrum.
pub fn re_hermitize(a: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.rows(), a.cols(), "re_hermitize needs a square matrix");
    let n = a.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let v = (a.get(i, j) + a.get(j, i).conj()) * 0.5;
            out.set(i, j, if i == j { Complex64::new(v.re, 0.0) } else { v });
        }
    }
    out
}

struct Reflector {
    /// Column the reflector was generated for; it acts on rows `k+1..n`.
    k: usize,
    tau: Complex64,
    /// Householder vector with implicit leading 1 (stored in full).
    v: Vec<Complex64>,
}

/// Elementary reflector H = I - tau v v^H with v[0] = 1 mapping x to
/// beta * e_1 with real beta. Returns (tau, v, beta); tau = 0 means H = I.
fn make_reflector(x: &[Complex64]) -> (Complex64, Vec<Complex64>, f64) {
    let alpha = x[0];
    let tail_norm_sqr: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
    if tail_norm_sqr == 0.0 && alpha.im == 0.0 {
        // Already in the desired form.
        let mut v = vec![Complex64::ZERO; x.len()];
        v[0] = Complex64::ONE;
        return (Complex64::ZERO, v, alpha.re);
    }
    let norm = (alpha.norm_sqr() + tail_norm_sqr).sqrt();
    if norm == 0.0 {
        let mut v = vec![Complex64::ZERO; x.len()];
        v[0] = Complex64::ONE;
        return (Complex64::ZERO, v, 0.0);
    }
    // Sign choice avoids cancellation in alpha - beta.
    let beta = if alpha.re >= 0.0 { -norm } else { norm };
    let gamma = alpha - beta;
    let tau = Complex64::new((beta - alpha.re) / beta, alpha.im / beta);
    let inv_gamma = Complex64::ONE / gamma;
    let mut v = Vec::with_capacity(x.len());
    v.push(Complex64::ONE);
    v.extend(x[1..].iter().map(|z| z * inv_gamma));
    (tau, v, beta)
}

/// Reduces Hermitian `a` (consumed as a working copy) to real symmetric
/// tridiagonal form, returning (diagonal, subdiagonal, reflectors). The
/// subdiagonal entry `e[k]` couples positions `k` and `k+1`; `e[n-1]` is 0.
fn tridiagonalize(mut w: ComplexMatrix) -> (Vec<f64>, Vec<f64>, Vec<Reflector>) {
    let n = w.rows();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut reflectors = Vec::new();

    for (k, ek) in e.iter_mut().enumerate().take(n.saturating_sub(1)) {
        let len = n - k - 1;
        let x: Vec<Complex64> = (0..len).map(|i| w.get(k + 1 + i, k)).collect();
        let (tau, v, beta) = make_reflector(&x);
        *ek = beta;
        if tau != Complex64::ZERO && len > 1 {
            // Trailing block update B <- H B H^H with
            //   p = B v, c = |tau|^2 Re(v^H p) / 2, w_vec = conj(tau) p - c v,
            //   B <- B - w_vec v^H - v w_vec^H.
            let mut p = vec![Complex64::ZERO; len];
            for (col, &vc) in v.iter().enumerate() {
                if vc != Complex64::ZERO {
                    // p += B[:, col] * v[col]
                    for (row, pr) in p.iter_mut().enumerate() {
                        *pr += w.get(k + 1 + row, k + 1 + col) * vc;
                    }
                }
            }
            let tau_conj = tau.conj();
            let vhp = cdotc(&v, &p);
            let c = tau.norm_sqr() * vhp.re * 0.5;
            let wv: Vec<Complex64> = p
                .iter()
                .zip(&v)
                .map(|(pi, vi)| tau_conj * pi - c * vi)
                .collect();
            for col in 0..len {
                let vc_conj = v[col].conj();
                let wc_conj = wv[col].conj();
                for row in 0..len {
                    let delta = wv[row] * vc_conj + v[row] * wc_conj;
                    let cur = w.get(k + 1 + row, k + 1 + col);
                    w.set(k + 1 + row, k + 1 + col, cur - delta);
                }
            }
        }
        if tau != Complex64::ZERO {
            reflectors.push(Reflector { k, tau, v });
        }
    }
    for (i, di) in d.iter_mut().enumerate() {
        *di = w.get(i, i).re;
    }
    (d, e, reflectors)
}

/// Implicit-shift QL on a real symmetric tridiagonal, optionally accumulating
/// the orthogonal transform into `z` (n x n, column-major, starts as I).
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>, n: usize) -> Result<()> {
    const MAX_ITER: usize = 60;
    let eps = f64::EPSILON;
    // Absolute deflation floor: without it, exact zeros on the diagonal
    // (common for structured rank-deficient inputs) can keep a subdiagonal
    // entry of size ~1e-300 "non-negligible" forever. Dropping entries below
    // eps * scale perturbs eigenvalues by no more than eps * ||A||.
    let scale = d
        .iter()
        .chain(e.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * (dd + scale) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_ITER {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(if g >= 0.0 { 1.0 } else { -1.0 }));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(zz) = z.as_deref_mut() {
                    let (zi, zi1) = zz.split_at_mut((i + 1) * n);
                    let zi = &mut zi[i * n..(i + 1) * n];
                    let zi1 = &mut zi1[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and, when requested, the matrix
/// whose columns are the matching orthonormal eigenvectors. The input is
/// treated as exactly Hermitian (only one triangle participates after the
/// internal symmetrization); callers holding near-Hermitian data should pass
/// it through [`re_hermitize`] first.
pub fn hermitian_eigen(
    a: &ComplexMatrix,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<ComplexMatrix>)> {
    if a.rows() != a.cols() {
        return Err(Error::ShapeMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    a.ensure_finite()?;
    let n = a.rows();
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| ComplexMatrix::zeros(0, 0))));
    }
    if n == 1 {
        let vals = vec![a.get(0, 0).re];
        return Ok((vals, want_vectors.then(|| ComplexMatrix::identity(1))));
    }

    let (mut d, mut e, reflectors) = tridiagonalize(a.clone());

    // Real accumulation matrix for the tridiagonal stage.
    let mut z_real = if want_vectors {
        let mut z = vec![0.0f64; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        Some(z)
    } else {
        None
    };
    tridiagonal_ql(&mut d, &mut e, z_real.as_deref_mut(), n)?;

    // Sort ascending, carrying columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let sorted_d: Vec<f64> = order.iter().map(|&i| d[i]).collect();

    let vectors = match z_real {
        None => None,
        Some(z) => {
            let mut q = ComplexMatrix::zeros(n, n);
            for (new_col, &old_col) in order.iter().enumerate() {
                for row in 0..n {
                    q.set(row, new_col, Complex64::new(z[old_col * n + row], 0.0));
                }
            }
            // Back-transform: apply the adjoint reflectors last-to-first.
            for refl in reflectors.iter().rev() {
                let tau_conj = refl.tau.conj();
                let lo = refl.k + 1;
                for col in 0..n {
                    let colslice = &mut q.col_mut(col)[lo..];
                    let inner = cdotc(&refl.v, colslice);
                    axpy(-tau_conj * inner, &refl.v, colslice);
                }
            }
            Some(q)
        }
    };

    Ok((sorted_d, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::jacobi;
    use crate::seeding::{complex_gaussian, rng_from_seed};

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = rng_from_seed(seed);
        let raw = ComplexMatrix::from_fn(n, n, |_, _| complex_gaussian(&mut rng, 1.0));
        re_hermitize(&raw)
    }

    #[test]
    fn reflector_maps_to_real_multiple_of_e1() {
        let mut rng = rng_from_seed(11);
        for len in [1usize, 2, 5, 9] {
            let x: Vec<Complex64> = (0..len).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            let (tau, v, beta) = make_reflector(&x);
            // H x = x - tau v (v^H x)
            let inner = cdotc(&v, &x);
            let mut hx = x.clone();
            axpy(-tau * inner, &v, &mut hx);
            assert!((hx[0] - Complex64::new(beta, 0.0)).norm() < 1e-12 * (1.0 + beta.abs()));
            for z in &hx[1..] {
                assert!(z.norm() < 1e-12);
            }
            // Unitarity: tau + conj(tau) == |tau|^2 ||v||^2
            let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert!((2.0 * tau.re - tau.norm_sqr() * vn).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_matrix_round_trip() {
        let diag = [3.0, -1.0, 0.5, 0.5];
        let a = ComplexMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::ZERO
            }
        });
        let (vals, vecs) = hermitian_eigen(&a, true).unwrap();
        assert_eq!(vals, vec![-1.0, 0.5, 0.5, 3.0]);
        let q = vecs.unwrap();
        let qtq = q.adjoint_mul(&q);
        assert!(qtq.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn two_by_two_analytic() {
        // [[0, -i], [i, 0]] has eigenvalues -1, 1.
        let mut a = ComplexMatrix::zeros(2, 2);
        a.set(0, 1, Complex64::new(0.0, -1.0));
        a.set(1, 0, Complex64::new(0.0, 1.0));
        let (vals, _) = hermitian_eigen(&a, false).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn residuals_and_orthonormality_on_random_inputs() {
        for (n, seed) in [(3usize, 1u64), (8, 2), (17, 3), (40, 4), (65, 5)] {
            let a = random_hermitian(n, seed);
            let (vals, vecs) = hermitian_eigen(&a, true).unwrap();
            let q = vecs.unwrap();
            let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
            // A q_k = lambda_k q_k
            for (k, &val) in vals.iter().enumerate() {
                let aq = a.apply_vec(q.col(k));
                for (i, entry) in aq.iter().enumerate() {
                    let want = q.get(i, k) * val;
                    assert!(
                        (entry - want).norm() < 1e-10 * scale,
                        "residual too large at n={n} k={k}"
                    );
                }
            }
            let qtq = q.adjoint_mul(&q);
            assert!(qtq.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-11);
            // Trace and Frobenius identities.
            let tr: f64 = (0..n).map(|i| a.get(i, i).re).sum();
            assert!((vals.iter().sum::<f64>() - tr).abs() < 1e-10 * scale * n as f64);
            let fro2: f64 = a.data().iter().map(|z| z.norm_sqr()).sum();
            let sum2: f64 = vals.iter().map(|v| v * v).sum();
            assert!((fro2 - sum2).abs() < 1e-9 * scale * scale * n as f64);
        }
    }

    #[test]
    fn eigenvalue_magnitudes_match_jacobi_singular_values() {
        for (n, seed) in [(6usize, 21u64), (13, 22), (24, 23)] {
            let a = random_hermitian(n, seed);
            let (vals, _) = hermitian_eigen(&a, false).unwrap();
            let mut mags: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
            mags.sort_by(f64::total_cmp);
            let mut sv = jacobi::singular_values(&a);
            sv.sort_by(f64::total_cmp);
            for (m, s) in mags.iter().zip(&sv) {
                assert!((m - s).abs() < 1e-10 * (1.0 + s), "n={n}: {m} vs {s}");
            }
        }
    }

    #[test]
    fn clustered_eigenvalues_converge() {
        // Nearly degenerate spectrum built from a known construction:
        // B^H B with B having two almost-equal columns.
        let mut rng = rng_from_seed(77);
        let mut b = ComplexMatrix::from_fn(12, 6, |_, _| complex_gaussian(&mut rng, 1.0));
        let c0: Vec<Complex64> = b.col(0).to_vec();
        for (i, z) in b.col_mut(1).iter_mut().enumerate() {
            *z = c0[i] * Complex64::new(1.0 + 1e-13, 0.0);
        }
        let g = b.gram();
        let (vals, vecs) = hermitian_eigen(&g, true).unwrap();
        let q = vecs.unwrap();
        let qtq = q.adjoint_mul(&q);
        assert!(qtq.max_abs_diff(&ComplexMatrix::identity(6)) < 1e-11);
        assert!(vals.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    }
}
