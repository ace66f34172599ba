//! JSON interchange format for error sets.
//!
//! ```json
//! {
//!   "dim": 4,
//!   "kind": "monomial",            // or "dense"
//!   "ops": [ {"perm": [...], "phases": [[re, im], ...]} ],
//!   "labels": ["I.I", "..."]       // optional
//! }
//! ```
//!
//! Dense entries are column-major `[re, im]` pairs. Pauli members are
//! materialized to the explicit monomial form on write; reading never
//! reconstructs the compact form (the file is the dumb interchange layer).

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ErrorOp, MonomialOperator, UnitaryErrorSet};
use crate::linalg::ComplexMatrix;
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct ErrorSetFile {
    dim: usize,
    kind: String,
    ops: Vec<OpEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct OpEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    perm: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phases: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<[f64; 2]>>,
}

pub fn write_error_set(path: &Path, set: &UnitaryErrorSet, element_cap: usize) -> Result<()> {
    let dim = set.dim();
    let all_monomial = set
        .ops()
        .iter()
        .all(|op| !matches!(op, ErrorOp::Dense(_)));
    let needed = set
        .len()
        .saturating_mul(if all_monomial { dim } else { dim * dim });
    if needed > element_cap {
        return Err(Error::BudgetExceeded {
            needed,
            cap: element_cap,
        });
    }

    let (kind, ops) = if all_monomial {
        let ops = set
            .ops()
            .iter()
            .map(|op| {
                let m = op.as_monomial().expect("checked all-monomial above");
                OpEntry {
                    perm: Some(m.perm().to_vec()),
                    phases: Some(m.phases().iter().map(|z| [z.re, z.im]).collect()),
                    entries: None,
                }
            })
            .collect();
        ("monomial", ops)
    } else {
        let ops = set
            .ops()
            .iter()
            .map(|op| {
                let d = op.densify();
                OpEntry {
                    perm: None,
                    phases: None,
                    entries: Some(d.data().iter().map(|z| [z.re, z.im]).collect()),
                }
            })
            .collect();
        ("dense", ops)
    };

    // Prefer stored labels; otherwise derive from members that have one.
    let labels = match set.labels() {
        Some(l) => Some(l.to_vec()),
        None => set
            .ops()
            .iter()
            .map(ErrorOp::label)
            .collect::<Option<Vec<_>>>(),
    };
    let file = ErrorSetFile {
        dim,
        kind: kind.to_string(),
        ops,
        labels,
    };
    fs::write(path, serde_json::to_vec_pretty(&file)?)?;
    Ok(())
}

pub fn read_error_set(path: &Path) -> Result<UnitaryErrorSet> {
    let raw = fs::read(path)?;
    let file: ErrorSetFile = serde_json::from_slice(&raw)?;
    if file.ops.is_empty() {
        return Err(Error::Format("error set file has no operators".into()));
    }
    let dim = file.dim;
    let mut ops = Vec::with_capacity(file.ops.len());
    match file.kind.as_str() {
        "monomial" => {
            for (idx, entry) in file.ops.iter().enumerate() {
                let perm = entry
                    .perm
                    .as_ref()
                    .ok_or_else(|| Error::Format(format!("op {idx}: missing perm")))?;
                let phases = entry
                    .phases
                    .as_ref()
                    .ok_or_else(|| Error::Format(format!("op {idx}: missing phases")))?;
                if perm.len() != dim || phases.len() != dim {
                    return Err(Error::Format(format!(
                        "op {idx}: expected {dim} perm/phase entries"
                    )));
                }
                let phases: Vec<Complex64> =
                    phases.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                let m = MonomialOperator::new(perm.clone(), phases)
                    .map_err(|e| Error::Format(format!("op {idx}: {e}")))?;
                ops.push(ErrorOp::Monomial(m));
            }
        }
        "dense" => {
            for (idx, entry) in file.ops.iter().enumerate() {
                let entries = entry
                    .entries
                    .as_ref()
                    .ok_or_else(|| Error::Format(format!("op {idx}: missing entries")))?;
                if entries.len() != dim * dim {
                    return Err(Error::Format(format!(
                        "op {idx}: expected {} entries, got {}",
                        dim * dim,
                        entries.len()
                    )));
                }
                let data: Vec<Complex64> =
                    entries.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                let m = ComplexMatrix::from_vec(dim, dim, data)
                    .map_err(|e| Error::Format(format!("op {idx}: {e}")))?;
                ops.push(ErrorOp::Dense(m));
            }
        }
        other => {
            return Err(Error::Format(format!(
                "unknown error-set kind {other:?} (expected \"monomial\" or \"dense\")"
            )));
        }
    }
    UnitaryErrorSet::new(ops, file.labels)
}
