//! Sweep configuration: the JSON schema the CLI consumes.
//!
//! ```json
//! {
//!   "grid": [
//!     {"N": 256, "K": 4, "errorset": {"kind": "erasure", "n": 8, "q": 2, "sites": [0]}},
//!     {"N": 256, "K": 4, "errorset": {"kind": "weight", "n": 8, "t": 1, "q": 2}}
//!   ],
//!   "seeds_per_point": 20,
//!   "master_seed": 7,
//!   "checks": ["nondegeneracy", "decode"],
//!   "element_cap": 268435456
//! }
//! ```

use haarqec::errorset::{gen_erasure_set, gen_weight_set, UnitaryErrorSet};
use haarqec::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ErrorSetSpec {
    /// All generalized Paulis of weight at most `t`.
    Weight { n: usize, t: usize, q: u8 },
    /// All generalized Paulis supported on `sites` (0-based).
    Erasure { n: usize, q: u8, sites: Vec<usize> },
    /// The single-member identity set.
    Identity,
}

impl ErrorSetSpec {
    pub fn build(&self, dim: usize, element_cap: usize) -> Result<UnitaryErrorSet> {
        let set = match self {
            ErrorSetSpec::Weight { n, t, q } => gen_weight_set(*n, *t, *q, element_cap)?,
            ErrorSetSpec::Erasure { n, q, sites } => gen_erasure_set(*n, sites, *q, element_cap)?,
            ErrorSetSpec::Identity => UnitaryErrorSet::identity_only(dim),
        };
        if set.dim() != dim {
            return Err(Error::InvalidParameter(format!(
                "error set lives on dimension {} but the grid point says N = {dim}",
                set.dim()
            )));
        }
        Ok(set)
    }

    /// Number of members the built set will have.
    pub fn size(&self) -> usize {
        match self {
            ErrorSetSpec::Weight { n, t, q } => {
                usize::try_from(haarqec::errorset::weight_set_size(*n, *t, *q)).unwrap_or(usize::MAX)
            }
            ErrorSetSpec::Erasure { q, sites, .. } => {
                (*q as usize).pow(2 * sites.len() as u32)
            }
            ErrorSetSpec::Identity => 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridPoint {
    #[serde(rename = "N")]
    pub n_dim: usize,
    #[serde(rename = "K")]
    pub code_dim: usize,
    pub errorset: ErrorSetSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// Certify the shifted basis (always meaningful; implied by default).
    Nondegeneracy,
    /// Build the decoder and record the worst decode residual over a few
    /// seeded (state, channel) pairs.
    Decode,
    /// Per grid point, Monte Carlo means of the shifted Gaussian ensemble.
    Moments,
    /// Per grid point, verify the rounding-stability bound
    /// `delta_Y <= 2 delta_X / (1 - delta_X)` on sampled instances.
    #[serde(alias = "isometrize-lemma")]
    IsometrizeStability,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub grid: Vec<GridPoint>,
    pub seeds_per_point: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub checks: Vec<Check>,
    /// Cap on complex entries per dense materialization; defaults to
    /// [`haarqec::DEFAULT_ELEMENT_CAP`].
    #[serde(default)]
    pub element_cap: Option<usize>,
    /// Advisory wall-clock budget; logged, never enforced.
    #[serde(default)]
    pub wall_clock_hint_secs: Option<u64>,
    /// Samples per point for the `moments` check.
    #[serde(default)]
    pub moment_samples: Option<usize>,
    /// Trials per point for the `isometrize-stability` check.
    #[serde(default)]
    pub stability_trials: Option<usize>,
}

impl SweepConfig {
    pub fn element_cap(&self) -> usize {
        self.element_cap.unwrap_or(haarqec::DEFAULT_ELEMENT_CAP)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidParameter("sweep grid is empty".into()));
        }
        if self.seeds_per_point == 0 {
            return Err(Error::InvalidParameter("seeds_per_point must be positive".into()));
        }
        for (i, p) in self.grid.iter().enumerate() {
            if p.n_dim == 0 || p.code_dim == 0 || p.code_dim > p.n_dim {
                return Err(Error::InvalidParameter(format!(
                    "grid point {i}: need 1 <= K <= N, got N={}, K={}",
                    p.n_dim, p.code_dim
                )));
            }
            let spec_dim = match &p.errorset {
                ErrorSetSpec::Weight { n, q, .. } | ErrorSetSpec::Erasure { n, q, .. } => {
                    (*q as u128).checked_pow(*n as u32)
                }
                ErrorSetSpec::Identity => Some(p.n_dim as u128),
            };
            if spec_dim != Some(p.n_dim as u128) {
                return Err(Error::InvalidParameter(format!(
                    "grid point {i}: error set dimension {spec_dim:?} does not match N = {}",
                    p.n_dim
                )));
            }
        }
        Ok(())
    }

    pub fn has_check(&self, c: Check) -> bool {
        self.checks.contains(&c)
    }
}
