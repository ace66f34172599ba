//! The rounded decoding map.
//!
//! For a code `V` and error set `{E_i}`, the raw diagnosis map is
//! `Dhat = Y^H` where `Y` is the shifted-basis matrix: it sends `E_i |v_j>`
//! towards `|j>|i>` but is not a physical operation unless the shifted basis
//! is exactly orthonormal. Rounding every singular value of `Dhat` to 1
//! yields the partial isometry `D` actually used for decoding; when the
//! certified delta is below 1 the rounding is well defined, `D D^H = I` on
//! the `Km`-dimensional syndrome space, and `||Dhat - D|| <= delta`.
//!
//! The full decode channel measures `{D^H D, I - D^H D}`, applies `D` on
//! success and substitutes the maximally mixed state on failure, then traces
//! out the error-index register.

use num_complex::Complex64;
use serde::Serialize;

use crate::codes::CodeSample;
use crate::errorset::UnitaryErrorSet;
use crate::linalg::{hermitian_eigen, re_hermitize, ComplexMatrix, RANK_TOLERANCE};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct Decoder {
    /// `Km x N` partial isometry.
    d: ComplexMatrix,
    delta_cert: f64,
    n_dim: usize,
    code_dim: usize,
    set_size: usize,
}

/// Dimensions and the certified delta, serialized alongside reports.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecoderInfo {
    pub n_dim: usize,
    pub code_dim: usize,
    pub set_size: usize,
    pub delta_cert: f64,
}

impl Decoder {
    /// Builds the decoder for `(sample, set)`: assembles the shifted basis,
    /// certifies it, and rounds. Fails with [`Error::NondegenerateRank`]
    /// when any singular value of the diagnosis map falls below the rank
    /// tolerance (the certified delta is then at least 1).
    pub fn build(sample: &CodeSample, set: &UnitaryErrorSet) -> Result<Self> {
        let y = crate::codes::shifted_basis_matrix(sample, set)?;
        Self::from_shifted_basis(&y, sample.big_dim(), sample.code_dim(), set.len())
    }

    /// Same construction starting from a prebuilt shifted-basis matrix.
    pub fn from_shifted_basis(
        y: &ComplexMatrix,
        n: usize,
        k: usize,
        m: usize,
    ) -> Result<Self> {
        let gram = re_hermitize(&y.gram());
        let (vals, vecs) = hermitian_eigen(&gram, true)?;
        let u = vecs.expect("vectors requested");
        Self::from_gram_eigen(y, &vals, &u, n, k, m)
    }

    /// Core construction sharing the Gram eigendecomposition with the
    /// certification path: `D = (Y^H Y)^{-1/2} Y^H`, assembled as
    /// `D^H = Y U diag(1/s) U^H`.
    pub fn from_gram_eigen(
        y: &ComplexMatrix,
        gram_eigenvalues: &[f64],
        gram_eigenvectors: &ComplexMatrix,
        n: usize,
        k: usize,
        m: usize,
    ) -> Result<Self> {
        let km = k * m;
        if y.rows() != n || y.cols() != km {
            return Err(Error::ShapeMismatch(format!(
                "shifted basis is {}x{}, expected {}x{}",
                y.rows(),
                y.cols(),
                n,
                km
            )));
        }
        let s: Vec<f64> = gram_eigenvalues
            .iter()
            .map(|&l| l.max(0.0).sqrt())
            .collect();
        let s_max = s.last().copied().unwrap_or(0.0);
        let s_min = s.first().copied().unwrap_or(0.0);
        let threshold = RANK_TOLERANCE * s_max;
        if s_min <= threshold || s_max == 0.0 {
            return Err(Error::NondegenerateRank {
                s_min,
                threshold,
            });
        }
        let delta_cert = (s_max - 1.0).max(1.0 - s_min).max(0.0);

        // T = Y U, columns scaled by 1/s, then D^H = T U^H.
        let mut t = y.mul(gram_eigenvectors);
        for (a, &sv) in s.iter().enumerate() {
            let inv = Complex64::new(1.0 / sv, 0.0);
            for z in t.col_mut(a) {
                *z *= inv;
            }
        }
        let d_adj = t.mul(&gram_eigenvectors.adjoint());
        Ok(Decoder {
            d: d_adj.adjoint(),
            delta_cert,
            n_dim: n,
            code_dim: k,
            set_size: m,
        })
    }

    /// The partial isometry itself (`Km x N`).
    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.d
    }

    #[inline]
    pub fn delta_cert(&self) -> f64 {
        self.delta_cert
    }

    #[inline]
    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    #[inline]
    pub fn code_dim(&self) -> usize {
        self.code_dim
    }

    #[inline]
    pub fn set_size(&self) -> usize {
        self.set_size
    }

    pub fn info(&self) -> DecoderInfo {
        DecoderInfo {
            n_dim: self.n_dim,
            code_dim: self.code_dim,
            set_size: self.set_size,
            delta_cert: self.delta_cert,
        }
    }

    /// The domain projector `D^H D` (`N x N`), materialized on demand.
    pub fn domain_projector(&self) -> ComplexMatrix {
        self.d.adjoint().mul(&self.d)
    }

    /// Decodes a density operator on the full space: project onto the
    /// decodable domain, apply `D`, trace out the error-index register, and
    /// route the failed branch to the maximally mixed state. Trace is
    /// preserved exactly up to round-off.
    pub fn decode_density(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.n_dim;
        if rho.rows() != n || rho.cols() != n {
            return Err(Error::ShapeMismatch(format!(
                "density operator is {}x{}, decoder space is {}",
                rho.rows(),
                rho.cols(),
                n
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::NotDensity(format!("trace is {tr}")));
        }
        let herm = re_hermitize(rho);
        if herm.max_abs_diff(rho) > 1e-8 {
            return Err(Error::NotDensity("not Hermitian".into()));
        }
        let (vals, _) = hermitian_eigen(&herm, false)?;
        if vals.first().copied().unwrap_or(0.0) < -1e-8 {
            return Err(Error::NotDensity(format!(
                "negative eigenvalue {:.3e}",
                vals[0]
            )));
        }

        // D rho D^H; since D annihilates the complement of the domain, the
        // projective step is implicit in D itself.
        let m = self.d.mul(rho).mul(&self.d.adjoint());
        let k = self.code_dim;
        let mut out = ComplexMatrix::zeros(k, k);
        for i in 0..self.set_size {
            for a in 0..k {
                for b in 0..k {
                    let cur = out.get(a, b);
                    out.set(a, b, cur + m.get(i * k + a, i * k + b));
                }
            }
        }
        let success_weight = out.trace().re;
        let fail_weight = (1.0 - success_weight).max(0.0);
        let fill = Complex64::new(fail_weight / k as f64, 0.0);
        for a in 0..k {
            let cur = out.get(a, a);
            out.set(a, a, cur + fill);
        }
        Ok(out)
    }

    /// Applies `D ⊗ I` to a pure state on the full space stacked with any
    /// ancilla registers, skipping the projective step; the output norm
    /// equals the weight of the state inside the decodable domain.
    pub fn decode_pure_with_syndrome(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        if psi.is_empty() || !psi.len().is_multiple_of(self.n_dim) {
            return Err(Error::ShapeMismatch(format!(
                "state length {} is not a multiple of N = {}",
                psi.len(),
                self.n_dim
            )));
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::NotNormalized(norm));
        }
        let chunks = psi.len() / self.n_dim;
        let mut out = vec![Complex64::ZERO; self.code_dim * self.set_size * chunks];
        self.d.apply_stacked(psi, &mut out);
        Ok(out)
    }
}
