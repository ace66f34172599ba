//! Command-line front end: generate and validate error sets, sample and
//! certify codes, simulate decoding, and drive sweep campaigns.
//!
//! Exit codes: 0 on success, 1 on a domain failure (validation or
//! certification failed, decoder not buildable), 2 on usage or config
//! errors. Human-readable output goes to stderr; machine-readable JSON/CSV
//! goes to the path given with `-o` or to stdout.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use haarqec::codes::{
    nondegeneracy_report, read_code_file, sample_haar_isometry, sample_haar_qr, write_code_file,
};
use haarqec::decoder::Decoder;
use haarqec::errorset::{
    gen_erasure_set, gen_weight_set, read_error_set, write_error_set, MonomialOperator,
    UnitaryErrorSet,
};
use haarqec::metrics::disturbance_report;
use haarqec::noise::{
    mixture_channel, random_local_channel, read_channel, uniform_mixture_channel, KrausOp,
    NoiseChannel,
};
use haarqec_harness::{
    erasure_experiment, fit_scaling, isometrize_stability_run, moment_check,
    records_to_csv, run_sweep, scaling_plot_svg, SweepConfig,
};
use rand::Rng;

#[derive(Parser)]
#[command(
    name = "haarqec",
    version,
    about = "Haar random quantum codes: error sets, certification, decoding, sweeps"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate or validate unitary error sets.
    Errorset {
        #[command(subcommand)]
        cmd: ErrorsetCmd,
    },
    /// Sample or certify Haar random codes.
    Code {
        #[command(subcommand)]
        cmd: CodeCmd,
    },
    /// Build a decoder, run a channel, and report the disturbance bracket.
    DecodeSim(DecodeSimArgs),
    /// Run a sweep campaign from a JSON config.
    Sweep(SweepArgs),
    /// Stand-alone statistical experiments.
    Experiment {
        #[command(subcommand)]
        cmd: ExperimentCmd,
    },
}

#[derive(Subcommand)]
enum ErrorsetCmd {
    /// Generate a weight-bounded or erasure family of generalized Paulis.
    Gen {
        /// Family kind: "weight" or "erasure".
        #[arg(long)]
        kind: String,
        /// Number of qudits.
        #[arg(long)]
        n: usize,
        /// Maximum weight (weight families).
        #[arg(long)]
        t: Option<usize>,
        /// Local dimension.
        #[arg(long, default_value_t = 2)]
        q: u8,
        /// Erased sites, 0-based (erasure families).
        #[arg(long, value_delimiter = ',')]
        sites: Option<Vec<usize>>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Validate an error-set file: unitarity and pairwise trace
    /// orthogonality within the tolerance.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CodeCmd {
    /// Sample a Haar random encoding isometry and write the code file.
    Sample {
        #[arg(long = "N")]
        n_dim: usize,
        #[arg(long = "K")]
        code_dim: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// "gaussian-isometrize" (default) or "qr-haar".
        #[arg(long, default_value = "gaussian-isometrize")]
        method: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Certify a code file against an error-set file.
    Certify {
        code: PathBuf,
        errorset: PathBuf,
        /// Include every singular value of the shifted basis, not just the
        /// extremes.
        #[arg(long)]
        full_spectrum: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DecodeSimArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    errorset: PathBuf,
    /// "identity", "uniform", "mixture", "local", or "file".
    #[arg(long, default_value = "uniform")]
    channel_kind: String,
    /// Mixture probabilities (channel-kind mixture).
    #[arg(long, value_delimiter = ',')]
    probs: Option<Vec<f64>>,
    /// Channel JSON path (channel-kind file).
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Kraus rank (channel-kind local).
    #[arg(long)]
    kraus_rank: Option<usize>,
    /// Support sites, 0-based (channel-kind local).
    #[arg(long, value_delimiter = ',')]
    sites: Option<Vec<usize>>,
    /// Qudit local dimension for site arithmetic (channel-kind local).
    #[arg(long, default_value_t = 2)]
    q: u8,
    /// Number of random test states (each with a K-dim reference register).
    #[arg(long, default_value_t = 100)]
    states: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the decoder matrix (Km x N) in the code-file byte layout.
    #[arg(long)]
    dump_decoder: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    config: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Emit a log-log scatter of mean delta against Km/N with the fit line.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Fit the scaling slope and report it.
    #[arg(long)]
    fit: bool,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Monte Carlo moment identities of the shifted Gaussian ensemble.
    Moments {
        #[arg(long = "K")]
        code_dim: usize,
        #[arg(long)]
        errorset: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Also accumulate the vectorized covariance (small dimensions only).
        #[arg(long)]
        cov: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Rounding-stability trials of the shifted basis.
    Stability {
        #[arg(long = "K")]
        code_dim: usize,
        #[arg(long)]
        errorset: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// End-to-end erasure recovery experiment.
    Erasure {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 2)]
        q: u8,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 20)]
        states: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<haarqec::Error> for Failure {
    fn from(e: haarqec::Error) -> Self {
        let code = match &e {
            haarqec::Error::Io(_) | haarqec::Error::Format(_) | haarqec::Error::Json(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 2,
            message: e.to_string(),
        }
    }
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::ExitCode::from(f.code)
        }
    }
}

fn element_cap() -> usize {
    match std::env::var("HAARQEC_ELEMENT_CAP") {
        Ok(v) => v.parse().unwrap_or(haarqec::DEFAULT_ELEMENT_CAP),
        Err(_) => haarqec::DEFAULT_ELEMENT_CAP,
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => s,
        None => {
            let s: u64 = rand::rng().random();
            eprintln!("seed: {s}");
            s
        }
    }
}

fn emit(output: Option<&Path>, content: &str) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.cmd {
        Cmd::Errorset { cmd } => errorset_cmd(cmd),
        Cmd::Code { cmd } => code_cmd(cmd),
        Cmd::DecodeSim(args) => decode_sim(args),
        Cmd::Sweep(args) => sweep_cmd(args),
        Cmd::Experiment { cmd } => experiment_cmd(cmd),
    }
}

fn errorset_cmd(cmd: ErrorsetCmd) -> Result<u8, Failure> {
    match cmd {
        ErrorsetCmd::Gen {
            kind,
            n,
            t,
            q,
            sites,
            output,
        } => {
            let set = match kind.as_str() {
                "weight" => {
                    let t = t.ok_or_else(|| Failure::usage("--t is required for --kind weight"))?;
                    gen_weight_set(n, t, q, element_cap())?
                }
                "erasure" => {
                    let sites = sites
                        .ok_or_else(|| Failure::usage("--sites is required for --kind erasure"))?;
                    gen_erasure_set(n, &sites, q, element_cap())?
                }
                other => {
                    return Err(Failure::usage(format!(
                        "unknown kind {other:?} (expected \"weight\" or \"erasure\")"
                    )))
                }
            };
            write_error_set(&output, &set, element_cap())?;
            eprintln!(
                "wrote {} operators on dimension {} to {}",
                set.len(),
                set.dim(),
                output.display()
            );
            Ok(0)
        }
        ErrorsetCmd::Validate { file, tol, output } => {
            let set = read_error_set(&file)?;
            let report = set.validate(tol);
            let json = serde_json::to_string_pretty(&report).map_err(haarqec::Error::from)?;
            emit(output.as_deref(), &format!("{json}\n"))?;
            if report.passes {
                eprintln!(
                    "valid: {} operators, defect {:.2e}, overlap {:.2e}",
                    report.size, report.max_unitarity_defect, report.max_overlap
                );
                Ok(0)
            } else {
                if let Some((i, j)) = report.worst_pair {
                    eprintln!(
                        "INVALID: worst pair ({i}, {j}) with overlap {:.3e} (tol {:.1e})",
                        report.max_overlap, tol
                    );
                } else {
                    eprintln!(
                        "INVALID: unitarity defect {:.3e} (tol {:.1e})",
                        report.max_unitarity_defect, tol
                    );
                }
                Ok(1)
            }
        }
    }
}

fn code_cmd(cmd: CodeCmd) -> Result<u8, Failure> {
    match cmd {
        CodeCmd::Sample {
            n_dim,
            code_dim,
            seed,
            method,
            output,
        } => {
            let seed = resolve_seed(seed);
            let code = match method.as_str() {
                "gaussian-isometrize" => sample_haar_isometry(n_dim, code_dim, seed)?,
                "qr-haar" => sample_haar_qr(n_dim, code_dim, seed)?,
                other => {
                    return Err(Failure::usage(format!(
                        "unknown method {other:?} (expected \"gaussian-isometrize\" or \"qr-haar\")"
                    )))
                }
            };
            write_code_file(&output, &code)?;
            eprintln!(
                "wrote {}x{} code (seed {seed}) to {}",
                n_dim,
                code_dim,
                output.display()
            );
            Ok(0)
        }
        CodeCmd::Certify {
            code,
            errorset,
            full_spectrum,
            output,
        } => {
            let sample = read_code_file(&code)?;
            let set = read_error_set(&errorset)?;
            let report = nondegeneracy_report(&sample, &set, element_cap())?;
            if report.hamming_violated() {
                eprintln!(
                    "warning: K*m = {} exceeds N = {}; delta >= 1 is forced by rank",
                    report.km,
                    sample.big_dim()
                );
            }
            let mut json = serde_json::json!({
                "report": report,
                "provenance": {
                    "code_seed": sample.seed(),
                    "sampling_method": sample.method(),
                    "N": sample.big_dim(),
                    "K": sample.code_dim(),
                    "m": set.len(),
                    "errorset": errorset.display().to_string(),
                }
            });
            if full_spectrum {
                let spectrum =
                    haarqec::codes::shifted_singular_spectrum(&sample, &set, element_cap())?;
                json["spectrum"] = serde_json::json!(spectrum);
            }
            emit(
                output.as_deref(),
                &format!(
                    "{}\n",
                    serde_json::to_string_pretty(&json).map_err(haarqec::Error::from)?
                ),
            )?;
            eprintln!(
                "delta_emp = {:.6}, leading prediction sqrt(Km/N) = {:.6}",
                report.delta_emp, report.delta_pred_leading
            );
            Ok(0)
        }
    }
}

fn build_channel(
    args: &DecodeSimArgs,
    set: &Arc<UnitaryErrorSet>,
    seed: u64,
) -> Result<NoiseChannel, Failure> {
    let ch = match args.channel_kind.as_str() {
        "identity" => NoiseChannel::from_kraus(
            set.clone(),
            vec![KrausOp::Monomial {
                scale: num_complex::Complex64::ONE,
                op: MonomialOperator::identity(set.dim()),
            }],
        )?,
        "uniform" => uniform_mixture_channel(set.clone())?,
        "mixture" => {
            let probs = args
                .probs
                .as_ref()
                .ok_or_else(|| Failure::usage("--probs is required for --channel-kind mixture"))?;
            mixture_channel(set.clone(), probs)?
        }
        "local" => {
            let sites = args
                .sites
                .as_ref()
                .ok_or_else(|| Failure::usage("--sites is required for --channel-kind local"))?;
            let rank = args.kraus_rank.unwrap_or(2);
            let q = args.q;
            let n_sites = (set.dim() as f64).log(q as f64).round() as usize;
            if (q as usize).pow(n_sites as u32) != set.dim() {
                return Err(Failure::usage(format!(
                    "set dimension {} is not a power of q = {q}",
                    set.dim()
                )));
            }
            let local = random_local_channel(n_sites, sites, q, rank, seed, element_cap())?;
            // Re-express against the loaded set: coefficients and residuals
            // are recomputed, so operators outside its span are rejected.
            NoiseChannel::from_kraus(set.clone(), local.kraus().to_vec())?
        }
        "file" => {
            let path = args
                .channel
                .as_ref()
                .ok_or_else(|| Failure::usage("--channel is required for --channel-kind file"))?;
            read_channel(path)?
        }
        other => {
            return Err(Failure::usage(format!(
                "unknown channel kind {other:?}"
            )))
        }
    };
    Ok(ch)
}

fn decode_sim(args: DecodeSimArgs) -> Result<u8, Failure> {
    let sample = read_code_file(&args.code)?;
    let set = Arc::new(read_error_set(&args.errorset)?);
    if set.dim() != sample.big_dim() {
        return Err(Failure::usage(format!(
            "error set dimension {} does not match code dimension {}",
            set.dim(),
            sample.big_dim()
        )));
    }
    let seed = resolve_seed(args.seed);
    let dec = Decoder::build(&sample, &set)?;
    if let Some(dump) = &args.dump_decoder {
        haarqec::codes::write_matrix_file(dump, dec.matrix())?;
        eprintln!("wrote decoder matrix to {}", dump.display());
    }
    let ch = build_channel(&args, &set, haarqec::seeding::task_seed(seed, 1))?;
    let report = disturbance_report(
        &dec,
        &sample,
        &ch,
        args.states,
        haarqec::seeding::task_seed(seed, 2),
    )?;
    let json = serde_json::json!({
        "report": report,
        "decoder": dec.info(),
        "provenance": {
            "code_seed": sample.seed(),
            "sampling_method": sample.method(),
            "N": sample.big_dim(),
            "K": sample.code_dim(),
            "m": set.len(),
            "errorset": args.errorset.display().to_string(),
            "channel_kind": args.channel_kind,
            "kraus_count": ch.kraus_count(),
            "seed": seed,
        }
    });
    emit(
        args.output.as_deref(),
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&json).map_err(haarqec::Error::from)?
        ),
    )?;
    eprintln!(
        "residual_max = {:.6e}, entangled = {:.6e}, upper bound (delta) = {:.6e}",
        report.residual_max, report.entangled_trace_dist, report.upper_bound
    );
    Ok(0)
}

fn sweep_cmd(args: SweepArgs) -> Result<u8, Failure> {
    let raw = std::fs::read(&args.config)?;
    let cfg: SweepConfig = serde_json::from_slice(&raw).map_err(|e| {
        Failure::usage(format!(
            "{}: line {}, column {}: {e}",
            args.config.display(),
            e.line(),
            e.column()
        ))
    })?;
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    if let Some(hint) = cfg.wall_clock_hint_secs {
        eprintln!("wall-clock hint: {hint} s (advisory)");
    }
    let out = run_sweep(&cfg, args.workers)?;
    let csv = records_to_csv(&out.records);
    emit(args.output.as_deref(), &csv)?;

    for (idx, rep) in &out.moment_reports {
        eprintln!(
            "moments[point {idx}]: |mean(X^H X)-I| = {:.3e}, |mean(X X^H)-(Km/N)I| = {:.3e} (scale {:.1e})",
            rep.dev_gram_identity, rep.dev_outer_scaled, rep.sampling_scale
        );
    }
    for (idx, rep) in &out.stability_reports {
        eprintln!(
            "stability[point {idx}]: {} checked, {} skipped, {} violations",
            rep.checked, rep.skipped_high_delta, rep.violations
        );
    }
    let anomalies = out.records.iter().filter(|r| r.error.is_some()).count();
    if anomalies > 0 {
        eprintln!("warning: {anomalies} records carry errors (see NaN rows)");
    }
    // delta >= 1 while Km <= N/16 is far outside expected behavior.
    let unexpected = out
        .records
        .iter()
        .filter(|r| {
            r.delta_emp >= 1.0 && r.code_dim * r.set_size * 16 <= r.n_dim
        })
        .count();
    if unexpected > 0 {
        eprintln!(
            "ANOMALY: {unexpected} records certified delta >= 1 despite Km <= N/16"
        );
    }

    if args.fit || args.plot.is_some() {
        let fit = fit_scaling(&out.records)?;
        if args.fit {
            let fit_json =
                serde_json::to_string_pretty(&fit).map_err(haarqec::Error::from)?;
            if args.output.is_some() {
                println!("{fit_json}");
            }
            eprintln!(
                "fit: slope = {:.4}, intercept = {:.4}, residual = {:.3e} over {} points",
                fit.slope, fit.intercept, fit.residual, fit.points
            );
        }
        if let Some(plot_path) = &args.plot {
            // Per-point means for the scatter.
            let mut groups: std::collections::BTreeMap<(usize, usize, usize), (f64, usize)> =
                std::collections::BTreeMap::new();
            for r in &out.records {
                if r.error.is_none() && r.delta_emp.is_finite() {
                    let e = groups
                        .entry((r.n_dim, r.code_dim, r.set_size))
                        .or_insert((0.0, 0));
                    e.0 += r.delta_emp;
                    e.1 += 1;
                }
            }
            let points: Vec<(f64, f64)> = groups
                .iter()
                .map(|(&(n, k, m), &(sum, cnt))| {
                    ((k * m) as f64 / n as f64, sum / cnt as f64)
                })
                .collect();
            std::fs::write(plot_path, scaling_plot_svg(&points, &fit))?;
            eprintln!("wrote plot to {}", plot_path.display());
        }
    }
    Ok(0)
}

fn experiment_cmd(cmd: ExperimentCmd) -> Result<u8, Failure> {
    match cmd {
        ExperimentCmd::Moments {
            code_dim,
            errorset,
            samples,
            cov,
            seed,
            output,
        } => {
            let set = read_error_set(&errorset)?;
            let seed = resolve_seed(seed);
            let rep = moment_check(set.dim(), code_dim, &set, samples, seed, cov)?;
            emit(
                output.as_deref(),
                &format!(
                    "{}\n",
                    serde_json::to_string_pretty(&rep).map_err(haarqec::Error::from)?
                ),
            )?;
            Ok(0)
        }
        ExperimentCmd::Stability {
            code_dim,
            errorset,
            trials,
            seed,
            output,
        } => {
            let set = read_error_set(&errorset)?;
            let seed = resolve_seed(seed);
            let rep = isometrize_stability_run(&set, code_dim, trials, seed)?;
            emit(
                output.as_deref(),
                &format!(
                    "{}\n",
                    serde_json::to_string_pretty(&rep).map_err(haarqec::Error::from)?
                ),
            )?;
            eprintln!(
                "{} checked, {} skipped, {} violations",
                rep.checked, rep.skipped_high_delta, rep.violations
            );
            if rep.violations == 0 {
                Ok(0)
            } else {
                Ok(1)
            }
        }
        ExperimentCmd::Erasure {
            n,
            k,
            t,
            q,
            trials,
            states,
            seed,
            output,
        } => {
            let seed = resolve_seed(seed);
            let rep = erasure_experiment(n, k, t, q, seed, trials, states, element_cap())?;
            emit(
                output.as_deref(),
                &format!(
                    "{}\n",
                    serde_json::to_string_pretty(&rep).map_err(haarqec::Error::from)?
                ),
            )?;
            eprintln!(
                "worst delta = {:.6}, worst disturbance = {:.6e}, prediction sqrt(Km/N) = {:.6}",
                rep.worst_delta, rep.worst_disturbance, rep.delta_pred_leading
            );
            let failed = rep.trials.iter().any(|tr| tr.error.is_some());
            if failed {
                Ok(1)
            } else {
                Ok(0)
            }
        }
    }
}
