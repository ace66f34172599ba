//! Unitary error sets: collections of pairwise trace-orthogonal unitaries.
//!
//! Members come in three representations: compact generalized Paulis (the
//! generated families), explicit monomial operators, and dense matrices (for
//! arbitrary unitaries loaded from interchange files). Validation measures
//! the worst unitarity defect `||E^H E - I||` and the worst normalized trace
//! overlap `|tr(E_i^H E_j)| / N` over all pairs; both must fall below the
//! caller's tolerance.
//!
//! Pairwise traces between Pauli members are evaluated through the tensor
//! factorization: the trace vanishes identically unless the shift exponents
//! agree, and within a matching class it is the product of per-site clock
//! sums. That keeps validation of the large generated families (hundreds of
//! thousands of operators) within interactive budgets.

mod io;
mod monomial;
mod pauli;

pub use io::{read_error_set, write_error_set};
pub use monomial::MonomialOperator;
pub use pauli::{clock_column_sums, root_table, PauliString};

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::linalg::{op_norm, ComplexMatrix};
use crate::{Error, Result};

/// One member of an error set.
#[derive(Clone, Debug)]
pub enum ErrorOp {
    Pauli(PauliString),
    Monomial(MonomialOperator),
    Dense(ComplexMatrix),
}

impl ErrorOp {
    pub fn dim(&self) -> usize {
        match self {
            ErrorOp::Pauli(p) => p.dim(),
            ErrorOp::Monomial(m) => m.dim(),
            ErrorOp::Dense(d) => d.rows(),
        }
    }

    pub fn apply_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        match self {
            ErrorOp::Pauli(p) => p.apply_vec(v),
            ErrorOp::Monomial(m) => m.apply_vec(v),
            ErrorOp::Dense(d) => {
                if v.len() != d.cols() {
                    return Err(Error::ShapeMismatch(format!(
                        "operator of dimension {} applied to length-{} vector",
                        d.cols(),
                        v.len()
                    )));
                }
                Ok(d.apply_vec(v))
            }
        }
    }

    /// Monomial form when one exists without densification.
    pub fn as_monomial(&self) -> Option<MonomialOperator> {
        match self {
            ErrorOp::Pauli(p) => Some(p.to_monomial()),
            ErrorOp::Monomial(m) => Some(m.clone()),
            ErrorOp::Dense(_) => None,
        }
    }

    pub fn densify(&self) -> ComplexMatrix {
        match self {
            ErrorOp::Pauli(p) => p.to_monomial().densify(),
            ErrorOp::Monomial(m) => m.densify(),
            ErrorOp::Dense(d) => d.clone(),
        }
    }

    pub fn label(&self) -> Option<String> {
        match self {
            ErrorOp::Pauli(p) => Some(p.label()),
            _ => None,
        }
    }
}

/// Outcome of validating a candidate error set.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub dim: usize,
    pub size: usize,
    /// max over members of ||E^H E - I||.
    pub max_unitarity_defect: f64,
    /// max over pairs of |tr(E_i^H E_j)| / N.
    pub max_overlap: f64,
    /// Pair achieving the worst overlap (0-based indices).
    pub worst_pair: Option<(usize, usize)>,
    pub tolerance: f64,
    pub passes: bool,
}

#[derive(Clone, Debug)]
pub struct UnitaryErrorSet {
    dim: usize,
    ops: Vec<ErrorOp>,
    labels: Option<Vec<String>>,
}

impl UnitaryErrorSet {
    /// Assembles a set, checking only dimensional consistency; orthogonality
    /// and unitarity are the validator's business.
    pub fn new(ops: Vec<ErrorOp>, labels: Option<Vec<String>>) -> Result<Self> {
        let dim = ops
            .first()
            .map(ErrorOp::dim)
            .ok_or_else(|| Error::InvalidParameter("error set must be non-empty".into()))?;
        if let Some(bad) = ops.iter().position(|op| op.dim() != dim) {
            return Err(Error::ShapeMismatch(format!(
                "operator {bad} has dimension {} but the set dimension is {dim}",
                ops[bad].dim()
            )));
        }
        if let Some(l) = &labels {
            if l.len() != ops.len() {
                return Err(Error::ShapeMismatch(
                    "label count differs from operator count".into(),
                ));
            }
        }
        Ok(UnitaryErrorSet { dim, ops, labels })
    }

    /// The single-member identity set.
    pub fn identity_only(dim: usize) -> Self {
        UnitaryErrorSet {
            dim,
            ops: vec![ErrorOp::Monomial(MonomialOperator::identity(dim))],
            labels: Some(vec!["I".into()]),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    #[inline]
    pub fn op(&self, i: usize) -> &ErrorOp {
        &self.ops[i]
    }

    pub fn ops(&self) -> &[ErrorOp] {
        &self.ops
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Measures unitarity and pairwise trace orthogonality; `passes` is set
    /// when both defects fall below `tol`.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let n = self.dim as f64;
        let mut max_defect = 0.0f64;
        for op in &self.ops {
            let defect = match op {
                ErrorOp::Pauli(p) => {
                    // Every phase is a root-table entry, so the worst table
                    // entry bounds (and achieves) the defect.
                    root_table(p.q())
                        .iter()
                        .map(|w| (w.norm_sqr() - 1.0).abs())
                        .fold(0.0, f64::max)
                }
                ErrorOp::Monomial(m) => m.unitarity_defect(),
                ErrorOp::Dense(d) => {
                    let gram = d.gram();
                    let diff = gram.sub(&ComplexMatrix::identity(d.cols()));
                    op_norm(&diff).unwrap_or(f64::INFINITY)
                }
            };
            max_defect = max_defect.max(defect);
        }

        let (raw_overlap, worst_pair) = self.max_pairwise_overlap();
        let max_overlap = raw_overlap / n;
        ValidationReport {
            dim: self.dim,
            size: self.ops.len(),
            max_unitarity_defect: max_defect,
            max_overlap,
            worst_pair,
            tolerance: tol,
            passes: max_defect <= tol && max_overlap <= tol,
        }
    }

    /// Worst |tr(E_i^H E_j)| over pairs, un-normalized.
    fn max_pairwise_overlap(&self) -> (f64, Option<(usize, usize)>) {
        let mut best = 0.0f64;
        let mut pair = None;
        let note = |best: &mut f64, pair: &mut Option<(usize, usize)>, v: f64, i: usize, j: usize| {
            if pair.is_none() || v > *best {
                *best = v;
                *pair = Some((i, j));
            }
        };
        if self.ops.len() < 2 {
            return (0.0, None);
        }

        // Pauli members of a uniform local dimension: group by shift
        // exponents; cross-group traces vanish identically (empty diagonal
        // support). Mixed-q Pauli members fall through to the explicit path.
        let paulis: Vec<(usize, &PauliString)> = self
            .ops
            .iter()
            .enumerate()
            .filter_map(|(i, op)| match op {
                ErrorOp::Pauli(p) => Some((i, p)),
                _ => None,
            })
            .collect();
        let uniform_q = !paulis.is_empty()
            && paulis
                .iter()
                .all(|(_, p)| p.q() == paulis[0].1.q() && p.sites() == paulis[0].1.sites());
        if uniform_q {
            let q = usize::from(paulis[0].1.q());
            // Doubled magnitude table: index b + q - a lies in [1, 2q-1]
            // without reduction; the 512 mask makes the hot index provably
            // in range (q <= 255).
            let sums = clock_column_sums(paulis[0].1.q());
            let mut table = [0.0f64; 512];
            for (i, t) in table.iter_mut().enumerate().take(2 * q) {
                *t = sums[i % q].norm();
            }
            let mut groups: HashMap<&[u8], Vec<usize>> = HashMap::new();
            for (pos, (_, p)) in paulis.iter().enumerate() {
                groups.entry(p.x_exponents()).or_default().push(pos);
            }
            for members in groups.values() {
                let zs: Vec<&[u8]> = members
                    .iter()
                    .map(|&pos| paulis[pos].1.z_exponents())
                    .collect();
                for a_pos in 0..members.len() {
                    let zi = zs[a_pos];
                    for b_pos in a_pos + 1..members.len() {
                        // |trace| = prod over sites of |S((zj - zi) mod q)|;
                        // the exact phase factor has unit magnitude.
                        let mut mag = 1.0f64;
                        for (&a, &b) in zi.iter().zip(zs[b_pos]) {
                            mag *= table[(usize::from(b) + q - usize::from(a)) & 511];
                        }
                        note(
                            &mut best,
                            &mut pair,
                            mag,
                            paulis[members[a_pos]].0,
                            paulis[members[b_pos]].0,
                        );
                    }
                }
            }
        }

        // Everything involving an explicit (monomial or dense) member; with
        // mixed-q Pauli members every pair routes through here.
        let explicit: Vec<usize> = self
            .ops
            .iter()
            .enumerate()
            .filter(|(_, op)| !uniform_q || !matches!(op, ErrorOp::Pauli(_)))
            .map(|(i, _)| i)
            .collect();
        if !explicit.is_empty() {
            // Materialized monomial forms (Pauli members included) cached once.
            let cached: Vec<Option<MonomialOperator>> = self
                .ops
                .iter()
                .map(|op| match op {
                    ErrorOp::Dense(_) => None,
                    other => other.as_monomial(),
                })
                .collect();
            for (pos, &i) in explicit.iter().enumerate() {
                let mut partners: Vec<usize> = explicit[pos + 1..].to_vec();
                if uniform_q {
                    partners.extend(paulis.iter().map(|(k, _)| *k));
                }
                for j in partners {
                    let v = self.pair_overlap(i, j, &cached);
                    note(&mut best, &mut pair, v, i.min(j), i.max(j));
                }
            }
        }

        (best, pair)
    }

    fn pair_overlap(&self, i: usize, j: usize, cached: &[Option<MonomialOperator>]) -> f64 {
        let tr = match (&self.ops[i], &self.ops[j]) {
            (ErrorOp::Dense(a), ErrorOp::Dense(b)) => {
                let mut acc = Complex64::ZERO;
                for (x, y) in a.data().iter().zip(b.data()) {
                    acc += x.conj() * y;
                }
                acc
            }
            (_, ErrorOp::Dense(b)) => {
                let m = cached[i].as_ref().expect("non-dense member is cached");
                monomial_dense_overlap(m, b)
            }
            (ErrorOp::Dense(a), _) => {
                let m = cached[j].as_ref().expect("non-dense member is cached");
                monomial_dense_overlap(m, a).conj()
            }
            _ => {
                let a = cached[i].as_ref().expect("non-dense member is cached");
                let b = cached[j].as_ref().expect("non-dense member is cached");
                a.trace_overlap(b)
            }
        };
        tr.norm()
    }
}

/// tr(adjoint(M) D) for monomial M and dense D.
fn monomial_dense_overlap(m: &MonomialOperator, d: &ComplexMatrix) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for j in 0..m.dim() {
        acc += m.phases()[j].conj() * d.get(m.perm()[j], j);
    }
    acc
}

/// Number of weight-at-most-t generalized Paulis on n qudits:
/// `sum_{i<=t} C(n,i) (q^2-1)^i`. Saturates at `u64::MAX` on overflow.
pub fn weight_set_size(n: usize, t: usize, q: u8) -> u64 {
    let q2m1 = u64::from(q) * u64::from(q) - 1;
    let mut total: u64 = 0;
    for i in 0..=t.min(n) {
        let mut term: u64 = 1;
        for k in 0..i {
            term = match term.checked_mul((n - k) as u64) {
                Some(v) => v / (k as u64 + 1),
                None => return u64::MAX,
            };
        }
        for _ in 0..i {
            term = match term.checked_mul(q2m1) {
                Some(v) => v,
                None => return u64::MAX,
            };
        }
        total = match total.checked_add(term) {
            Some(v) => v,
            None => return u64::MAX,
        };
    }
    total
}

/// All generalized Paulis of weight at most `t` on `n` qudits of local
/// dimension `q`, ordered by (weight, support, per-site exponents).
pub fn gen_weight_set(n: usize, t: usize, q: u8, element_cap: usize) -> Result<UnitaryErrorSet> {
    if n == 0 || q < 2 {
        return Err(Error::InvalidParameter(
            "need at least one site and local dimension >= 2".into(),
        ));
    }
    if t > n {
        return Err(Error::InvalidParameter(format!(
            "weight bound {t} exceeds the number of sites {n}"
        )));
    }
    check_space_budget(n, q, element_cap)?;
    let m = weight_set_size(n, t, q);
    if m > element_cap as u64 {
        return Err(Error::BudgetExceeded {
            needed: usize::try_from(m).unwrap_or(usize::MAX),
            cap: element_cap,
        });
    }

    let mut ops = Vec::with_capacity(m as usize);
    for w in 0..=t {
        for support in combinations(n, w) {
            for assignment in site_assignments(q, w, false) {
                let mut x = vec![0u8; n];
                let mut z = vec![0u8; n];
                for (pos, &site) in support.iter().enumerate() {
                    x[site] = assignment[pos].0;
                    z[site] = assignment[pos].1;
                }
                ops.push(ErrorOp::Pauli(PauliString::new(q, x, z)?));
            }
        }
    }
    debug_assert_eq!(ops.len() as u64, m);
    // Labels stay implicit; the file writer derives them from the members.
    UnitaryErrorSet::new(ops, None)
}

/// All generalized Paulis supported inside `sites` (the erasure family for
/// that subset): `q^{2 |sites|}` operators including the identity, ordered
/// by per-site exponents. Site indices are 0-based.
pub fn gen_erasure_set(
    n: usize,
    sites: &[usize],
    q: u8,
    element_cap: usize,
) -> Result<UnitaryErrorSet> {
    if n == 0 || q < 2 {
        return Err(Error::InvalidParameter(
            "need at least one site and local dimension >= 2".into(),
        ));
    }
    let mut sorted: Vec<usize> = sites.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != sites.len() {
        return Err(Error::InvalidParameter("duplicate site index".into()));
    }
    if let Some(&bad) = sorted.iter().find(|&&s| s >= n) {
        return Err(Error::InvalidParameter(format!(
            "site index {bad} out of range for {n} sites"
        )));
    }
    check_space_budget(n, q, element_cap)?;
    let t = sorted.len();
    let m = (q as u64)
        .checked_pow(2 * t as u32)
        .filter(|&m| m <= element_cap as u64)
        .ok_or(Error::BudgetExceeded {
            needed: usize::MAX,
            cap: element_cap,
        })?;

    let mut ops = Vec::with_capacity(m as usize);
    for assignment in site_assignments(q, t, true) {
        let mut x = vec![0u8; n];
        let mut z = vec![0u8; n];
        for (pos, &site) in sorted.iter().enumerate() {
            x[site] = assignment[pos].0;
            z[site] = assignment[pos].1;
        }
        ops.push(ErrorOp::Pauli(PauliString::new(q, x, z)?));
    }
    UnitaryErrorSet::new(ops, None)
}

fn check_space_budget(n: usize, q: u8, element_cap: usize) -> Result<()> {
    let dim = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if dim > element_cap as u128 {
        return Err(Error::BudgetExceeded {
            needed: usize::try_from(dim).unwrap_or(usize::MAX),
            cap: element_cap,
        });
    }
    Ok(())
}

/// k-subsets of {0..n-1} in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for s in start..n {
            if n - s < k - cur.len() {
                break;
            }
            cur.push(s);
            rec(s + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Per-site exponent assignments of length `w`, each site running over the
/// pairs (a, b) in lexicographic order; `include_identity_pair` keeps (0,0)
/// as a choice (erasure families let sites idle; weight supports may not).
fn site_assignments(q: u8, w: usize, include_identity_pair: bool) -> Vec<Vec<(u8, u8)>> {
    let mut pairs = Vec::new();
    for a in 0..q {
        for b in 0..q {
            if include_identity_pair || a != 0 || b != 0 {
                pairs.push((a, b));
            }
        }
    }
    let mut out: Vec<Vec<(u8, u8)>> = vec![Vec::new()];
    for _ in 0..w {
        let mut next = Vec::with_capacity(out.len() * pairs.len());
        for prefix in &out {
            for &p in &pairs {
                let mut v = prefix.clone();
                v.push(p);
                next.push(v);
            }
        }
        out = next;
    }
    out
}
