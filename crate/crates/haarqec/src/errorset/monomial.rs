//! Explicit monomial (generalized permutation) operators.
//!
//! A monomial operator has exactly one nonzero entry per column:
//! `M[perm[j], j] = phases[j]`. Application costs O(dim) per vector, and
//! composition/adjoint stay inside the representation.

use num_complex::Complex64;

use crate::linalg::ComplexMatrix;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct MonomialOperator {
    perm: Vec<usize>,
    phases: Vec<Complex64>,
}

impl MonomialOperator {
    /// Builds from a column-to-row permutation and per-column phases.
    /// Rejects non-bijective permutations and non-finite phases.
    pub fn new(perm: Vec<usize>, phases: Vec<Complex64>) -> Result<Self> {
        if perm.len() != phases.len() {
            return Err(Error::ShapeMismatch(
                "permutation and phase vectors differ in length".into(),
            ));
        }
        let dim = perm.len();
        let mut seen = vec![false; dim];
        for &p in &perm {
            if p >= dim || seen[p] {
                return Err(Error::Format(
                    "monomial permutation is not a bijection".into(),
                ));
            }
            seen[p] = true;
        }
        if phases.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(MonomialOperator { perm, phases })
    }

    pub fn identity(dim: usize) -> Self {
        MonomialOperator {
            perm: (0..dim).collect(),
            phases: vec![Complex64::ONE; dim],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    #[inline]
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    #[inline]
    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }

    pub fn apply_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::ZERO; self.dim()];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    /// out = M v without allocating.
    pub fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        if v.len() != self.dim() || out.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "monomial of dimension {} applied to length-{} input",
                self.dim(),
                v.len()
            )));
        }
        for j in 0..self.dim() {
            out[self.perm[j]] = self.phases[j] * v[j];
        }
        Ok(())
    }

    /// Applies the operator to every column of a matrix.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.rows() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "monomial of dimension {} applied to a {}-row matrix",
                self.dim(),
                m.rows()
            )));
        }
        let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
        for j in 0..m.cols() {
            self.apply_into(m.col(j), out.col_mut(j))?;
        }
        Ok(out)
    }

    /// self * rhs, exact in the monomial representation.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::ShapeMismatch(format!(
                "monomial dimensions {} vs {}",
                self.dim(),
                rhs.dim()
            )));
        }
        let dim = self.dim();
        let mut perm = vec![0usize; dim];
        let mut phases = vec![Complex64::ZERO; dim];
        for j in 0..dim {
            let mid = rhs.perm[j];
            perm[j] = self.perm[mid];
            phases[j] = self.phases[mid] * rhs.phases[j];
        }
        Ok(MonomialOperator { perm, phases })
    }

    pub fn adjoint(&self) -> Self {
        let dim = self.dim();
        let mut perm = vec![0usize; dim];
        let mut phases = vec![Complex64::ZERO; dim];
        for j in 0..dim {
            perm[self.perm[j]] = j;
            phases[self.perm[j]] = self.phases[j].conj();
        }
        MonomialOperator { perm, phases }
    }

    /// tr(adjoint(self) * rhs): only columns where the permutations agree
    /// contribute.
    pub fn trace_overlap(&self, rhs: &Self) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for j in 0..self.dim() {
            if self.perm[j] == rhs.perm[j] {
                acc += self.phases[j].conj() * rhs.phases[j];
            }
        }
        acc
    }

    /// Largest deviation of |phase|^2 from 1; equals the operator norm of
    /// `M^H M - I`.
    pub fn unitarity_defect(&self) -> f64 {
        self.phases
            .iter()
            .map(|z| (z.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn densify(&self) -> ComplexMatrix {
        let dim = self.dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for j in 0..dim {
            m.set(self.perm[j], j, self.phases[j]);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(MonomialOperator::new(vec![0, 0], vec![Complex64::ONE; 2]).is_err());
        assert!(MonomialOperator::new(vec![0, 2], vec![Complex64::ONE; 2]).is_err());
    }

    #[test]
    fn compose_then_adjoint_is_identity() {
        let m = MonomialOperator::new(vec![2, 0, 1], vec![c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)])
            .unwrap();
        let prod = m.adjoint().compose(&m).unwrap();
        let id = MonomialOperator::identity(3);
        assert_eq!(prod.perm(), id.perm());
        for (a, b) in prod.phases().iter().zip(id.phases()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn densify_agrees_with_apply() {
        let m = MonomialOperator::new(vec![1, 2, 0], vec![c(0.6, 0.8), c(1.0, 0.0), c(0.0, 1.0)])
            .unwrap();
        let dense = m.densify();
        let v: Vec<Complex64> = (0..3).map(|i| c(i as f64, -1.0)).collect();
        let a = m.apply_vec(&v).unwrap();
        let b = dense.apply_vec(&v);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn matrix_application_is_columnwise() {
        let m = MonomialOperator::new(vec![2, 0, 1], vec![c(0.0, 1.0), c(1.0, 0.0), c(-1.0, 0.0)])
            .unwrap();
        let input = ComplexMatrix::from_fn(3, 2, |i, j| c(i as f64, j as f64));
        let out = m.apply_matrix(&input).unwrap();
        for j in 0..2 {
            let want = m.apply_vec(input.col(j)).unwrap();
            assert_eq!(out.col(j), want.as_slice());
        }
        assert!(m.apply_matrix(&ComplexMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn trace_overlap_matches_dense_trace() {
        let m1 = MonomialOperator::new(vec![1, 0, 2], vec![c(0.0, 1.0), c(1.0, 0.0), c(-1.0, 0.0)])
            .unwrap();
        let m2 = MonomialOperator::new(vec![1, 2, 0], vec![c(0.5, 0.5), c(1.0, 0.0), c(0.0, -1.0)])
            .unwrap();
        let sparse = m1.trace_overlap(&m2);
        let dense = m1.densify().adjoint().mul(&m2.densify()).trace();
        assert!((sparse - dense).norm() < 1e-14);
    }
}
