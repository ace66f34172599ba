//! The sweep engine: one record per (grid point, seed).

use std::sync::Arc;
use std::time::Instant;

use haarqec::codes::{report_from_sample, sample_haar_isometry, shifted_basis_matrix};
use haarqec::decoder::Decoder;
use haarqec::metrics::decode_residual;
use haarqec::noise::mixture_channel;
use haarqec::seeding::{random_unit_vector, rng_from_seed, task_seed};
use haarqec::Result;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Check, SweepConfig};
use crate::moments::{moment_check, MomentReport};
use crate::stability::{isometrize_stability_run, StabilityReport};
use crate::fmt_g17;

/// Number of seeded (state, channel) pairs behind `decode_residual_max`.
const DECODE_CHECK_PAIRS: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct SweepRecord {
    pub n_dim: usize,
    pub code_dim: usize,
    pub set_size: usize,
    pub seed: u64,
    pub s_min: f64,
    pub s_max: f64,
    pub delta_emp: f64,
    pub delta_pred: f64,
    pub decode_residual_max: Option<f64>,
    /// K at least (log2 N)^3, the regime where the leading prediction
    /// dominates.
    pub regime_big_k: bool,
    pub elapsed_ms: u64,
    /// Set when the task failed; metric columns then render as NaN.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    /// (grid point index, report) for each point when the check was on.
    pub moment_reports: Vec<(usize, MomentReport)>,
    pub stability_reports: Vec<(usize, StabilityReport)>,
}

fn failed_record(
    n: usize,
    k: usize,
    m: usize,
    seed: u64,
    elapsed_ms: u64,
    message: String,
) -> SweepRecord {
    SweepRecord {
        n_dim: n,
        code_dim: k,
        set_size: m,
        seed,
        s_min: f64::NAN,
        s_max: f64::NAN,
        delta_emp: f64::NAN,
        delta_pred: f64::NAN,
        decode_residual_max: None,
        regime_big_k: big_k_regime(n, k),
        elapsed_ms,
        error: Some(message),
    }
}

fn big_k_regime(n: usize, k: usize) -> bool {
    let log2n = (n as f64).log2();
    (k as f64) >= log2n.powi(3)
}

fn run_task(cfg: &SweepConfig, point_idx: usize, seed_idx: usize) -> SweepRecord {
    let start = Instant::now();
    let point = &cfg.grid[point_idx];
    let (n, k) = (point.n_dim, point.code_dim);
    let m = point.errorset.size();
    let ordinal = (point_idx * cfg.seeds_per_point + seed_idx) as u64;
    let seed = task_seed(cfg.master_seed, ordinal);
    let elapsed = |s: &Instant| s.elapsed().as_millis() as u64;

    let inner = || -> Result<SweepRecord> {
        let set = Arc::new(point.errorset.build(n, cfg.element_cap())?);
        let code = sample_haar_isometry(n, k, task_seed(seed, 0))?;
        let do_decode = cfg.has_check(Check::Decode);

        let (report, decoder) = if do_decode {
            // Decoder construction shares the Gram eigendecomposition with
            // certification.
            let y = shifted_basis_matrix(&code, &set)?;
            let gram = haarqec::linalg::re_hermitize(&y.gram());
            let (vals, vecs) = haarqec::linalg::hermitian_eigen(&gram, true)?;
            let report = report_from_sample(&vals, &code, &set);
            let decoder = Decoder::from_gram_eigen(
                &y,
                &vals,
                vecs.as_ref().expect("vectors requested"),
                n,
                k,
                set.len(),
            );
            (report, Some(decoder))
        } else {
            let gram = haarqec::codes::shifted_gram(code.matrix(), &set, cfg.element_cap())?;
            let (vals, _) = haarqec::linalg::hermitian_eigen(&gram, false)?;
            (report_from_sample(&vals, &code, &set), None)
        };

        let mut decode_residual_max = None;
        let mut error = None;
        if let Some(dec_result) = decoder {
            match dec_result {
                Ok(dec) => {
                    let mut worst = 0.0f64;
                    let mut rng = rng_from_seed(task_seed(seed, 1));
                    for _ in 0..DECODE_CHECK_PAIRS {
                        // Random mixture channel over the set (uniform on the
                        // simplex) and a random state with reference.
                        let raw: Vec<f64> =
                            (0..set.len()).map(|_| -rng.random::<f64>().ln()).collect();
                        let total: f64 = raw.iter().sum();
                        let probs: Vec<f64> = raw.iter().map(|v| v / total).collect();
                        let ch = mixture_channel(set.clone(), &probs)?;
                        let phi = random_unit_vector(&mut rng, k * k);
                        worst = worst.max(decode_residual(&dec, &code, &ch, &phi)?);
                    }
                    decode_residual_max = Some(worst);
                }
                Err(e) => {
                    // delta >= 1: the certification columns are still data;
                    // only the decode check is unavailable.
                    error = Some(e.to_string());
                }
            }
        }

        Ok(SweepRecord {
            n_dim: n,
            code_dim: k,
            set_size: set.len(),
            seed,
            s_min: report.report.extrema.s_min,
            s_max: report.report.extrema.s_max,
            delta_emp: report.delta_emp,
            delta_pred: report.delta_pred_leading,
            decode_residual_max,
            regime_big_k: big_k_regime(n, k),
            elapsed_ms: 0,
            error,
        })
    };

    match inner() {
        Ok(mut rec) => {
            rec.elapsed_ms = elapsed(&start);
            rec
        }
        Err(e) => failed_record(n, k, m, seed, elapsed(&start), e.to_string()),
    }
}

/// Runs the whole grid on a dedicated pool of `workers` threads. Output is a
/// pure function of the config: task seeds are counter-derived and each task
/// is single-threaded, so scheduling cannot reorder arithmetic.
pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<SweepOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| haarqec::Error::InvalidParameter(format!("thread pool: {e}")))?;

    let tasks: Vec<(usize, usize)> = (0..cfg.grid.len())
        .flat_map(|p| (0..cfg.seeds_per_point).map(move |s| (p, s)))
        .collect();
    let records: Vec<SweepRecord> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(p, s)| run_task(cfg, p, s))
            .collect()
    });

    let mut moment_reports = Vec::new();
    if cfg.has_check(Check::Moments) {
        let samples = cfg.moment_samples.unwrap_or(1000);
        for (idx, point) in cfg.grid.iter().enumerate() {
            let set = point.errorset.build(point.n_dim, cfg.element_cap())?;
            let include_cov = point.n_dim * point.code_dim * set.len() <= 1 << 12;
            let report = moment_check(
                point.n_dim,
                point.code_dim,
                &set,
                samples,
                task_seed(cfg.master_seed, u64::MAX - idx as u64),
                include_cov,
            )?;
            moment_reports.push((idx, report));
        }
    }
    let mut stability_reports = Vec::new();
    if cfg.has_check(Check::IsometrizeStability) {
        let trials = cfg.stability_trials.unwrap_or(100);
        for (idx, point) in cfg.grid.iter().enumerate() {
            let set = point.errorset.build(point.n_dim, cfg.element_cap())?;
            let report = isometrize_stability_run(
                &set,
                point.code_dim,
                trials,
                task_seed(cfg.master_seed, u64::MAX / 2 - idx as u64),
            )?;
            stability_reports.push((idx, report));
        }
    }

    Ok(SweepOutput {
        records,
        moment_reports,
        stability_reports,
    })
}

/// Renders records in the fixed CSV schema. Floats carry 17 significant
/// digits; the optional decode column is empty when the check was off and
/// NaN when the decoder could not be built.
pub fn records_to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 160 + 96);
    out.push_str(
        "N,K,m,seed,s_min,s_max,delta_emp,delta_pred,decode_residual_max,regime_bigK,elapsed_ms\n",
    );
    for r in records {
        let decode = match (&r.decode_residual_max, &r.error) {
            (Some(v), _) => fmt_g17(*v),
            (None, Some(_)) => "NaN".to_string(),
            (None, None) => String::new(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n_dim,
            r.code_dim,
            r.set_size,
            r.seed,
            fmt_g17(r.s_min),
            fmt_g17(r.s_max),
            fmt_g17(r.delta_emp),
            fmt_g17(r.delta_pred),
            decode,
            u8::from(r.regime_big_k),
            r.elapsed_ms,
        ));
    }
    out
}

/// CSV with the volatile elapsed-ms column removed; two runs of the same
/// config compare equal through this view.
pub fn csv_without_elapsed(csv: &str) -> String {
    csv.lines()
        .map(|line| match line.rfind(',') {
            Some(pos) => &line[..pos],
            None => line,
        })
        .map(|l| format!("{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ErrorSetSpec, GridPoint};
    use haarqec::codes::nondegeneracy_report;
    use haarqec::DEFAULT_ELEMENT_CAP;

    fn small_config(checks: Vec<Check>) -> SweepConfig {
        SweepConfig {
            grid: vec![
                GridPoint {
                    n_dim: 64,
                    code_dim: 2,
                    errorset: ErrorSetSpec::Erasure {
                        n: 6,
                        q: 2,
                        sites: vec![1],
                    },
                },
                GridPoint {
                    n_dim: 32,
                    code_dim: 2,
                    errorset: ErrorSetSpec::Weight { n: 5, t: 1, q: 2 },
                },
            ],
            seeds_per_point: 3,
            master_seed: 424242,
            checks,
            element_cap: None,
            wall_clock_hint_secs: None,
            moment_samples: Some(200),
            stability_trials: Some(10),
        }
    }

    #[test]
    fn single_point_matches_direct_certification() {
        let cfg = SweepConfig {
            grid: vec![GridPoint {
                n_dim: 32,
                code_dim: 2,
                errorset: ErrorSetSpec::Erasure {
                    n: 5,
                    q: 2,
                    sites: vec![0],
                },
            }],
            seeds_per_point: 1,
            master_seed: 5,
            checks: vec![Check::Nondegeneracy],
            element_cap: None,
            wall_clock_hint_secs: None,
            moment_samples: None,
            stability_trials: None,
        };
        let out = run_sweep(&cfg, 1).unwrap();
        assert_eq!(out.records.len(), 1);
        let rec = &out.records[0];
        assert!(rec.error.is_none());

        // Reproduce by hand.
        let seed = task_seed(5, 0);
        let set = haarqec::errorset::gen_erasure_set(5, &[0], 2, DEFAULT_ELEMENT_CAP).unwrap();
        let code = sample_haar_isometry(32, 2, task_seed(seed, 0)).unwrap();
        let rep = nondegeneracy_report(&code, &set, DEFAULT_ELEMENT_CAP).unwrap();
        assert_eq!(rec.delta_emp, rep.delta_emp);
        assert_eq!(rec.s_min, rep.report.extrema.s_min);
        assert_eq!(rec.s_max, rep.report.extrema.s_max);
    }

    #[test]
    fn reruns_are_identical_across_worker_counts() {
        let cfg = small_config(vec![Check::Nondegeneracy, Check::Decode]);
        let a = run_sweep(&cfg, 1).unwrap();
        let b = run_sweep(&cfg, 4).unwrap();
        let ca = csv_without_elapsed(&records_to_csv(&a.records));
        let cb = csv_without_elapsed(&records_to_csv(&b.records));
        assert_eq!(ca, cb);
    }

    #[test]
    fn decode_checks_fill_the_residual_column() {
        let cfg = small_config(vec![Check::Decode]);
        let out = run_sweep(&cfg, 2).unwrap();
        for rec in &out.records {
            assert!(rec.error.is_none(), "{:?}", rec.error);
            let res = rec.decode_residual_max.expect("decode check on");
            assert!(res <= rec.delta_emp + 1e-8, "{res} vs {}", rec.delta_emp);
        }
    }

    #[test]
    fn auxiliary_checks_attach_reports() {
        let cfg = small_config(vec![Check::Moments, Check::IsometrizeStability]);
        let out = run_sweep(&cfg, 2).unwrap();
        assert_eq!(out.moment_reports.len(), 2);
        assert_eq!(out.stability_reports.len(), 2);
        for (_, rep) in &out.stability_reports {
            assert_eq!(rep.violations, 0);
        }
    }

    #[test]
    fn over_complete_points_are_recorded_not_fatal() {
        // Km = 4 * 16 > N = 16: certification still yields a record with
        // delta >= 1; the decode check reports NaN plus an error note.
        let cfg = SweepConfig {
            grid: vec![GridPoint {
                n_dim: 16,
                code_dim: 4,
                errorset: ErrorSetSpec::Erasure {
                    n: 4,
                    q: 2,
                    sites: vec![0, 1],
                },
            }],
            seeds_per_point: 2,
            master_seed: 3,
            checks: vec![Check::Decode],
            element_cap: None,
            wall_clock_hint_secs: None,
            moment_samples: None,
            stability_trials: None,
        };
        let out = run_sweep(&cfg, 1).unwrap();
        assert_eq!(out.records.len(), 2);
        for rec in &out.records {
            assert!(rec.delta_emp >= 1.0 - 1e-9);
            assert!(rec.decode_residual_max.is_none());
            assert!(rec.error.is_some());
        }
        let csv = records_to_csv(&out.records);
        assert!(csv.lines().nth(1).unwrap().contains("NaN"));
    }

    #[test]
    fn record_metrics_are_internally_consistent() {
        let cfg = small_config(vec![Check::Nondegeneracy]);
        let out = run_sweep(&cfg, 1).unwrap();
        for rec in &out.records {
            let want = (rec.s_max - 1.0).max(1.0 - rec.s_min).max(0.0);
            assert!(
                (rec.delta_emp - want).abs() < 1e-15,
                "delta {} vs extrema-derived {want}",
                rec.delta_emp
            );
            let pred = ((rec.code_dim * rec.set_size) as f64 / rec.n_dim as f64).sqrt();
            assert_eq!(rec.delta_pred, pred);
        }
    }

    #[test]
    fn csv_schema_is_stable() {
        let cfg = small_config(vec![Check::Nondegeneracy]);
        let out = run_sweep(&cfg, 1).unwrap();
        let csv = records_to_csv(&out.records);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "N,K,m,seed,s_min,s_max,delta_emp,delta_pred,decode_residual_max,regime_bigK,elapsed_ms"
        );
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 11);
        assert!(first.starts_with("64,2,4,"));
    }
}
