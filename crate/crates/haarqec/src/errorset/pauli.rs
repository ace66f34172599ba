//! Compact generalized Pauli operators on `n` qudits of local dimension `q`.
//!
//! A [`PauliString`] stores per-site shift/clock exponents plus a global
//! phase exponent, all as integers mod `q`, so composition and adjoints are
//! exact. Site 0 is the most significant digit of the computational-basis
//! index (the string `X Z` on two qubits maps `|00>` to `|10>`, i.e. index 0
//! to index 2).
//!
//! Per site, the operator is `X^a Z^b` with the shift `X|j> = |j+1 mod q>`
//! and clock `Z|j> = w^j |j>`, `w = exp(2 pi i / q)`. Phases are only turned
//! into floats at application time, through a table of the `q` roots of
//! unity computed once.

use num_complex::Complex64;

use super::monomial::MonomialOperator;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString {
    q: u8,
    /// Shift exponents per site (length n).
    x: Vec<u8>,
    /// Clock exponents per site (length n).
    z: Vec<u8>,
    /// Global phase exponent: the operator carries a factor w^phase.
    phase: u8,
}

/// Table of the q-th roots of unity, `root[k] = exp(2 pi i k / q)`.
pub fn root_table(q: u8) -> Vec<Complex64> {
    let qf = q as f64;
    (0..q)
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / qf))
        .collect()
}

/// `S(d) = sum_j w^{d j}` over one site; exactly `q` at `d = 0` and a
/// round-off-sized residue otherwise. Traces of Pauli strings factor into
/// products of these per-site sums.
pub fn clock_column_sums(q: u8) -> Vec<Complex64> {
    let roots = root_table(q);
    (0..q)
        .map(|d| (0..q).map(|j| roots[(d as usize * j as usize) % q as usize]).sum())
        .collect()
}

impl PauliString {
    pub fn new(q: u8, x: Vec<u8>, z: Vec<u8>) -> Result<Self> {
        Self::with_phase(q, x, z, 0)
    }

    pub fn with_phase(q: u8, x: Vec<u8>, z: Vec<u8>, phase: u8) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter("local dimension must be >= 2".into()));
        }
        if x.len() != z.len() {
            return Err(Error::ShapeMismatch(
                "shift and clock exponent vectors differ in length".into(),
            ));
        }
        if x.iter().chain(&z).any(|&e| e >= q) || phase >= q {
            return Err(Error::InvalidParameter("exponent out of range".into()));
        }
        Ok(PauliString { q, x, z, phase })
    }

    pub fn identity(q: u8, n: usize) -> Self {
        PauliString {
            q,
            x: vec![0; n],
            z: vec![0; n],
            phase: 0,
        }
    }

    #[inline]
    pub fn q(&self) -> u8 {
        self.q
    }

    #[inline]
    pub fn sites(&self) -> usize {
        self.x.len()
    }

    pub fn dim(&self) -> usize {
        (self.q as usize).pow(self.sites() as u32)
    }

    #[inline]
    pub fn x_exponents(&self) -> &[u8] {
        &self.x
    }

    #[inline]
    pub fn z_exponents(&self) -> &[u8] {
        &self.z
    }

    #[inline]
    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    /// Number of sites carrying a non-identity factor.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .filter(|(&a, &b)| a != 0 || b != 0)
            .count()
    }

    pub fn support(&self) -> Vec<usize> {
        self.x
            .iter()
            .zip(&self.z)
            .enumerate()
            .filter(|(_, (&a, &b))| a != 0 || b != 0)
            .map(|(l, _)| l)
            .collect()
    }

    /// self * rhs with the exact composition phase
    /// (per site, `Z^b X^a = w^{ab} X^a Z^b`).
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        let q = self.q as u16;
        let n = self.sites();
        let mut x = vec![0u8; n];
        let mut z = vec![0u8; n];
        let mut phase = (self.phase as u16 + rhs.phase as u16) % q;
        for l in 0..n {
            x[l] = ((self.x[l] as u16 + rhs.x[l] as u16) % q) as u8;
            z[l] = ((self.z[l] as u16 + rhs.z[l] as u16) % q) as u8;
            phase = (phase + self.z[l] as u16 * rhs.x[l] as u16) % q;
        }
        Ok(PauliString {
            q: self.q,
            x,
            z,
            phase: phase as u8,
        })
    }

    /// Hermitian adjoint: `(w^p X^a Z^b)^† = w^{-p + a.b} X^{-a} Z^{-b}`.
    pub fn adjoint(&self) -> Self {
        let q = self.q as u16;
        let n = self.sites();
        let mut x = vec![0u8; n];
        let mut z = vec![0u8; n];
        let mut phase = (q - self.phase as u16) % q;
        for l in 0..n {
            x[l] = ((q - self.x[l] as u16) % q) as u8;
            z[l] = ((q - self.z[l] as u16) % q) as u8;
            phase = (phase + self.x[l] as u16 * self.z[l] as u16) % q;
        }
        PauliString {
            q: self.q,
            x,
            z,
            phase: phase as u8,
        }
    }

    fn check_compatible(&self, rhs: &Self) -> Result<()> {
        if self.q != rhs.q || self.sites() != rhs.sites() {
            return Err(Error::ShapeMismatch(format!(
                "pauli mismatch: q={} n={} vs q={} n={}",
                self.q,
                self.sites(),
                rhs.q,
                rhs.sites()
            )));
        }
        Ok(())
    }

    /// Basis index reached from `index`, and the phase exponent picked up.
    #[inline]
    fn step(&self, index: usize) -> (usize, usize) {
        let q = self.q as usize;
        let n = self.sites();
        let mut rem = index;
        let mut out = 0usize;
        let mut exp = self.phase as usize;
        // Big-endian digit scan: site 0 first.
        let mut place = q.pow((n - 1) as u32);
        for (&xl, &zl) in self.x.iter().zip(&self.z) {
            let digit = rem / place;
            rem %= place;
            exp += zl as usize * digit;
            let mut shifted = digit + xl as usize;
            if shifted >= q {
                shifted -= q;
            }
            out += shifted * place;
            place /= q;
        }
        (out, exp % q)
    }

    /// Applies the operator to a state vector in O(dim).
    pub fn apply_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let dim = self.dim();
        if v.len() != dim {
            return Err(Error::ShapeMismatch(format!(
                "state has length {}, operator dimension is {}",
                v.len(),
                dim
            )));
        }
        let roots = root_table(self.q);
        let mut out = vec![Complex64::ZERO; dim];
        for (j, &amp) in v.iter().enumerate() {
            let (target, exp) = self.step(j);
            out[target] = roots[exp] * amp;
        }
        Ok(out)
    }

    /// Explicit (permutation, phases) form.
    pub fn to_monomial(&self) -> MonomialOperator {
        let dim = self.dim();
        let roots = root_table(self.q);
        let mut perm = vec![0usize; dim];
        let mut phases = vec![Complex64::ZERO; dim];
        for j in 0..dim {
            let (target, exp) = self.step(j);
            perm[j] = target;
            phases[j] = roots[exp];
        }
        MonomialOperator::new(perm, phases).expect("pauli strings are bijective by construction")
    }

    /// Human-readable site tokens, e.g. `I.X.Z` or `X2Z.I.I`; exponents > 1
    /// are written as digits.
    pub fn label(&self) -> String {
        let tokens: Vec<String> = self
            .x
            .iter()
            .zip(&self.z)
            .map(|(&a, &b)| {
                if a == 0 && b == 0 {
                    "I".to_string()
                } else {
                    let mut t = String::new();
                    if a > 0 {
                        t.push('X');
                        if a > 1 {
                            t.push_str(&a.to_string());
                        }
                    }
                    if b > 0 {
                        t.push('Z');
                        if b > 1 {
                            t.push_str(&b.to_string());
                        }
                    }
                    t
                }
            })
            .collect();
        tokens.join(".")
    }

    /// Exact trace via the tensor factorization: zero unless every shift
    /// exponent vanishes, otherwise the product of per-site clock sums times
    /// the global phase.
    pub fn trace(&self) -> Complex64 {
        if self.x.iter().any(|&a| a != 0) {
            return Complex64::ZERO;
        }
        let roots = root_table(self.q);
        let sums = clock_column_sums(self.q);
        let mut acc = roots[self.phase as usize];
        for &b in &self.z {
            acc *= sums[b as usize];
        }
        acc
    }
}
