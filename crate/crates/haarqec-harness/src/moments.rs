//! Monte Carlo moment checks of the shifted Gaussian ensemble.
//!
//! Draw `G` with i.i.d. complex Gaussian entries of variance `1/N` and form
//! `X = [E_1 G | ... | E_m G]`. The exact first moments are
//! `E[X^H X] = I_{Km}` (trace orthogonality of the set) and
//! `E[X X^H] = (Km/N) I_N` (unitarity of the members), and the covariance
//! operator `E[|X><X|]` of the column-major vectorization has operator norm
//! `m / N`. Sample means converge to these at the usual `1/sqrt(samples)`
//! rate, which the report attaches for calibration.

use haarqec::codes::{sample_gaussian, shifted_basis_from_matrix};
use haarqec::errorset::UnitaryErrorSet;
use haarqec::linalg::{hermitian_eigen, re_hermitize, ComplexMatrix};
use haarqec::seeding::task_seed;
use haarqec::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub n_dim: usize,
    pub code_dim: usize,
    pub set_size: usize,
    pub samples: usize,
    /// `|| mean(X^H X) - I_{Km} ||`.
    pub dev_gram_identity: f64,
    /// `|| mean(X X^H) - (Km/N) I_N ||`.
    pub dev_outer_scaled: f64,
    /// `|| mean(|X><X|) ||` when the vectorized covariance was accumulated.
    pub cov_norm: Option<f64>,
    /// Its exact value, `m / N`.
    pub cov_target: f64,
    /// `1 / sqrt(samples)`, the scale the deviations live on.
    pub sampling_scale: f64,
}

pub fn moment_check(
    n: usize,
    k: usize,
    set: &UnitaryErrorSet,
    samples: usize,
    seed: u64,
    include_cov: bool,
) -> Result<MomentReport> {
    if samples < 100 {
        return Err(Error::InvalidParameter(
            "moment check needs at least 100 samples".into(),
        ));
    }
    if set.dim() != n {
        return Err(Error::ShapeMismatch(format!(
            "error set dimension {} vs N = {n}",
            set.dim()
        )));
    }
    let m = set.len();
    let km = k * m;
    let mut sum_gram = ComplexMatrix::zeros(km, km);
    let mut sum_outer = ComplexMatrix::zeros(n, n);
    let mut sum_cov = include_cov.then(|| ComplexMatrix::zeros(n * km, n * km));

    for s in 0..samples {
        let g = sample_gaussian(n, k, task_seed(seed, s as u64))?;
        let x = shifted_basis_from_matrix(&g, set)?;
        accumulate(&mut sum_gram, &x.gram());
        accumulate(&mut sum_outer, &x.adjoint().gram());
        if let Some(cov) = sum_cov.as_mut() {
            // Column-major vectorization outer product.
            let v = x.data();
            for (j, vj) in v.iter().enumerate() {
                let cj = vj.conj();
                for (i, vi) in v.iter().enumerate() {
                    let cur = cov.get(i, j);
                    cov.set(i, j, cur + vi * cj);
                }
            }
        }
    }

    let inv = 1.0 / samples as f64;
    let mut mean_gram = sum_gram.scaled(Complex64::new(inv, 0.0));
    for i in 0..km {
        let cur = mean_gram.get(i, i);
        mean_gram.set(i, i, cur - Complex64::ONE);
    }
    let dev_gram_identity = op_norm_hermitian(&mean_gram)?;

    let target = km as f64 / n as f64;
    let mut mean_outer = sum_outer.scaled(Complex64::new(inv, 0.0));
    for i in 0..n {
        let cur = mean_outer.get(i, i);
        mean_outer.set(i, i, cur - Complex64::new(target, 0.0));
    }
    let dev_outer_scaled = op_norm_hermitian(&mean_outer)?;

    let cov_norm = match sum_cov {
        None => None,
        Some(cov) => Some(op_norm_hermitian(&cov.scaled(Complex64::new(inv, 0.0)))?),
    };

    Ok(MomentReport {
        n_dim: n,
        code_dim: k,
        set_size: m,
        samples,
        dev_gram_identity,
        dev_outer_scaled,
        cov_norm,
        cov_target: m as f64 / n as f64,
        sampling_scale: 1.0 / (samples as f64).sqrt(),
    })
}

fn accumulate(acc: &mut ComplexMatrix, term: &ComplexMatrix) {
    for (a, t) in acc.data_mut().iter_mut().zip(term.data()) {
        *a += t;
    }
}

fn op_norm_hermitian(a: &ComplexMatrix) -> Result<f64> {
    let (vals, _) = hermitian_eigen(&re_hermitize(a), false)?;
    Ok(vals
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs())))
}
