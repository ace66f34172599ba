//! End-to-end erasure experiment.
//!
//! Per trial: erase a random subset `S` of `t` qudits, build the erasure
//! family on `S`, sample a fresh Haar code, build its decoder, hit the
//! maximally entangled input with complete depolarization on `S` (the
//! canonical erasure channel), and record the certified delta, the
//! entangled-input disturbance, and the worst decode residual over random
//! states.

use std::sync::Arc;
use std::time::Instant;

use haarqec::codes::sample_haar_isometry;
use haarqec::decoder::Decoder;
use haarqec::errorset::gen_erasure_set;
use haarqec::metrics::{decode_residual, entangled_disturbance};
use haarqec::noise::uniform_mixture_channel;
use haarqec::seeding::{random_unit_vector, rng_from_seed, task_seed};
use haarqec::{Error, Result};
use rand::seq::SliceRandom;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct ErasureTrial {
    pub erased_sites: Vec<usize>,
    pub code_seed: u64,
    pub delta_cert: f64,
    pub entangled_disturbance: f64,
    pub residual_max: f64,
    pub elapsed_ms: u64,
    /// Set when the decoder could not be built (delta >= 1).
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErasureReport {
    pub n_qudits: usize,
    pub code_qudits: usize,
    pub erased: usize,
    pub q: u8,
    pub big_dim: usize,
    pub code_dim: usize,
    pub set_size: usize,
    /// Leading prediction `sqrt(Km/N)` for the certified delta.
    pub delta_pred_leading: f64,
    pub trials: Vec<ErasureTrial>,
    pub worst_delta: f64,
    pub worst_disturbance: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn erasure_experiment(
    n: usize,
    k: usize,
    t: usize,
    q: u8,
    seed: u64,
    trials: usize,
    states_per_trial: usize,
    element_cap: usize,
) -> Result<ErasureReport> {
    if k > n || t > n {
        return Err(Error::InvalidParameter(format!(
            "need k <= n and t <= n, got n={n}, k={k}, t={t}"
        )));
    }
    let big_dim = (q as usize)
        .checked_pow(n as u32)
        .filter(|&d| d <= element_cap)
        .ok_or(Error::BudgetExceeded {
            needed: usize::MAX,
            cap: element_cap,
        })?;
    let code_dim = (q as usize).pow(k as u32);
    let set_size = (q as usize).pow(2 * t as u32);
    if code_dim * set_size > big_dim {
        return Err(Error::InvalidParameter(format!(
            "K * m = {} exceeds N = {big_dim}; no erasure decoder can exist",
            code_dim * set_size
        )));
    }

    let mut out_trials = Vec::with_capacity(trials);
    let mut worst_delta = 0.0f64;
    let mut worst_disturbance = 0.0f64;
    for trial in 0..trials {
        let start = Instant::now();
        let trial_seed = task_seed(seed, trial as u64);
        let mut rng = rng_from_seed(trial_seed);
        let mut sites: Vec<usize> = (0..n).collect();
        sites.shuffle(&mut rng);
        sites.truncate(t);
        sites.sort_unstable();

        let code_seed = task_seed(trial_seed, 1);
        let mut run = || -> Result<(f64, f64, f64)> {
            let set = Arc::new(gen_erasure_set(n, &sites, q, element_cap)?);
            let code = sample_haar_isometry(big_dim, code_dim, code_seed)?;
            let dec = Decoder::build(&code, &set)?;
            let ch = uniform_mixture_channel(set)?;
            let disturbance = entangled_disturbance(&dec, &code, &ch)?;
            let mut residual_max = 0.0f64;
            for _ in 0..states_per_trial {
                let phi = random_unit_vector(&mut rng, code_dim * code_dim);
                residual_max = residual_max.max(decode_residual(&dec, &code, &ch, &phi)?);
            }
            Ok((dec.delta_cert(), disturbance, residual_max))
        };
        let trial_record = match run() {
            Ok((delta, disturbance, residual_max)) => {
                worst_delta = worst_delta.max(delta);
                worst_disturbance = worst_disturbance.max(disturbance);
                ErasureTrial {
                    erased_sites: sites,
                    code_seed,
                    delta_cert: delta,
                    entangled_disturbance: disturbance,
                    residual_max,
                    elapsed_ms: start.elapsed().as_millis() as u64,
                    error: None,
                }
            }
            Err(e) => {
                worst_delta = f64::INFINITY;
                ErasureTrial {
                    erased_sites: sites,
                    code_seed,
                    delta_cert: f64::NAN,
                    entangled_disturbance: f64::NAN,
                    residual_max: f64::NAN,
                    elapsed_ms: start.elapsed().as_millis() as u64,
                    error: Some(e.to_string()),
                }
            }
        };
        out_trials.push(trial_record);
    }

    Ok(ErasureReport {
        n_qudits: n,
        code_qudits: k,
        erased: t,
        q,
        big_dim,
        code_dim,
        set_size,
        delta_pred_leading: ((code_dim * set_size) as f64 / big_dim as f64).sqrt(),
        trials: out_trials,
        worst_delta,
        worst_disturbance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_erasure_means_exact_recovery() {
        let rep = erasure_experiment(4, 1, 0, 2, 7, 2, 3, haarqec::DEFAULT_ELEMENT_CAP).unwrap();
        assert_eq!(rep.set_size, 1);
        for t in &rep.trials {
            assert!(t.error.is_none());
            assert!(t.delta_cert < 1e-10);
            assert!(t.entangled_disturbance < 1e-10);
            assert!(t.residual_max < 1e-10);
        }
    }

    #[test]
    fn small_erasure_instance_is_bracketed() {
        // n=8, k=1, t=1: N=256, K=2, m=4.
        let rep = erasure_experiment(8, 1, 1, 2, 21, 3, 5, haarqec::DEFAULT_ELEMENT_CAP).unwrap();
        assert!((rep.delta_pred_leading - (8.0 / 256.0f64).sqrt()).abs() < 1e-12);
        for t in &rep.trials {
            assert!(t.error.is_none(), "{:?}", t.error);
            assert!(t.entangled_disturbance <= t.delta_cert + 1e-8);
            assert!(t.residual_max <= t.delta_cert + 1e-8);
        }
    }

    #[test]
    fn fixed_seed_reproduces_the_report() {
        let a = erasure_experiment(6, 1, 1, 2, 5, 2, 2, haarqec::DEFAULT_ELEMENT_CAP).unwrap();
        let b = erasure_experiment(6, 1, 1, 2, 5, 2, 2, haarqec::DEFAULT_ELEMENT_CAP).unwrap();
        for (x, y) in a.trials.iter().zip(&b.trials) {
            assert_eq!(x.erased_sites, y.erased_sites);
            assert_eq!(x.delta_cert, y.delta_cert);
            assert_eq!(x.entangled_disturbance, y.entangled_disturbance);
            assert_eq!(x.residual_max, y.residual_max);
        }
    }

    #[test]
    fn impossible_parameters_are_rejected() {
        // K * m = 2^3 * 2^4 = 128 > N = 8.
        assert!(erasure_experiment(3, 3, 2, 2, 0, 1, 1, haarqec::DEFAULT_ELEMENT_CAP).is_err());
    }
}
