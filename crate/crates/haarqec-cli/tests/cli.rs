//! End-to-end tests of the binary: exit codes, file outputs, and the
//! thin-wrapper property (CLI output equals the library call byte for byte).

use std::path::Path;
use std::process::{Command, Output};

use haarqec::codes::{sample_haar_isometry, write_code_file, CodeSample, SamplingMethod};
use haarqec::errorset::{write_error_set, ErrorOp, MonomialOperator, PauliString, UnitaryErrorSet};
use haarqec::linalg::ComplexMatrix;
use haarqec::DEFAULT_ELEMENT_CAP;
use num_complex::Complex64;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_haarqec"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn errorset_gen_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "errorset", "gen", "--kind", "weight", "--n", "3", "--t", "1", "--q", "2", "-o",
            "set.json",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);
    let parsed: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("set.json")).unwrap()).unwrap();
    assert_eq!(parsed["ops"].as_array().unwrap().len(), 10);
    assert_eq!(parsed["dim"], 8);
    assert_eq!(parsed["kind"], "monomial");

    let out = run(&["errorset", "validate", "set.json"], dir.path());
    assert_exit(&out, 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passes"], true);
    assert_eq!(report["size"], 10);
}

#[test]
fn duplicated_identity_reports_the_pair_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let set = UnitaryErrorSet::new(
        vec![
            ErrorOp::Monomial(MonomialOperator::identity(2)),
            ErrorOp::Monomial(MonomialOperator::identity(2)),
        ],
        None,
    )
    .unwrap();
    write_error_set(&dir.path().join("dup.json"), &set, DEFAULT_ELEMENT_CAP).unwrap();
    let out = run(&["errorset", "validate", "dup.json"], dir.path());
    assert_exit(&out, 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("(0, 1)"), "stderr: {stderr}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passes"], false);
}

#[test]
fn code_sample_is_the_library_call_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "code", "sample", "--N", "64", "--K", "3", "--seed", "7", "-o", "cli.bin",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);
    let direct = sample_haar_isometry(64, 3, 7).unwrap();
    write_code_file(&dir.path().join("lib.bin"), &direct).unwrap();
    let a = std::fs::read(dir.path().join("cli.bin")).unwrap();
    let b = std::fs::read(dir.path().join("lib.bin")).unwrap();
    assert_eq!(a, b, "CLI code file differs from the library output");
}

#[test]
fn certify_reports_delta_and_warns_on_overfull_sets() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(
        &run(
            &[
                "code", "sample", "--N", "64", "--K", "2", "--seed", "5", "-o", "code.bin",
            ],
            dir.path(),
        ),
        0,
    );
    // Identity-only set: delta is exactly zero.
    assert_exit(
        &run(
            &[
                "errorset", "gen", "--kind", "weight", "--n", "6", "--t", "0", "-o", "id.json",
            ],
            dir.path(),
        ),
        0,
    );
    let out = run(&["code", "certify", "code.bin", "id.json"], dir.path());
    assert_exit(&out, 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // delta of the code matrix itself: zero up to sampler round-off.
    assert!(report["report"]["delta_emp"].as_f64().unwrap() < 1e-12);

    // K * m = 2 * 64 > 64: rank forces delta >= 1 and a warning.
    assert_exit(
        &run(
            &[
                "errorset", "gen", "--kind", "erasure", "--n", "6", "--sites", "0,1,2", "-o",
                "big.json",
            ],
            dir.path(),
        ),
        0,
    );
    let out = run(&["code", "certify", "code.bin", "big.json"], dir.path());
    assert_exit(&out, 0);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("warning"), "stderr: {stderr}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["report"]["delta_emp"].as_f64().unwrap() >= 1.0 - 1e-9);
}

fn toy_exact_instance(dir: &Path) {
    // V = |0> on a qubit with the set {I, X}: exactly nondegenerate.
    let mut v = ComplexMatrix::zeros(2, 1);
    v.set(0, 0, Complex64::ONE);
    let code = CodeSample::from_parts(v, 0, SamplingMethod::GaussianIsometrize).unwrap();
    write_code_file(&dir.join("toy.bin"), &code).unwrap();
    let set = UnitaryErrorSet::new(
        vec![
            ErrorOp::Pauli(PauliString::identity(2, 1)),
            ErrorOp::Pauli(PauliString::new(2, vec![1], vec![0]).unwrap()),
        ],
        None,
    )
    .unwrap();
    write_error_set(&dir.join("toy_set.json"), &set, DEFAULT_ELEMENT_CAP).unwrap();
}

#[test]
fn decode_sim_toy_code_identity_channel_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    toy_exact_instance(dir.path());
    let out = run(
        &[
            "decode-sim",
            "--code",
            "toy.bin",
            "--errorset",
            "toy_set.json",
            "--channel-kind",
            "identity",
            "--states",
            "20",
            "--seed",
            "1",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["report"]["residual_max"].as_f64().unwrap() < 1e-10);
    assert!(report["report"]["entangled_trace_dist"].as_f64().unwrap() < 1e-10);
    assert_eq!(report["report"]["upper_bound"], 0.0);
}

#[test]
fn decode_sim_haar_instance_respects_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(
        &run(
            &[
                "code", "sample", "--N", "256", "--K", "4", "--seed", "11", "-o", "code.bin",
            ],
            dir.path(),
        ),
        0,
    );
    assert_exit(
        &run(
            &[
                "errorset", "gen", "--kind", "erasure", "--n", "8", "--sites", "2", "-o",
                "set.json",
            ],
            dir.path(),
        ),
        0,
    );
    let out = run(
        &[
            "decode-sim",
            "--code",
            "code.bin",
            "--errorset",
            "set.json",
            "--channel-kind",
            "local",
            "--sites",
            "2",
            "--kraus-rank",
            "3",
            "--states",
            "100",
            "--seed",
            "9",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let residual = report["report"]["residual_max"].as_f64().unwrap();
    let delta = report["report"]["upper_bound"].as_f64().unwrap();
    assert!(residual <= delta + 1e-8, "residual {residual} delta {delta}");
}

#[test]
fn decode_sim_rejects_overfull_instances_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(
        &run(
            &[
                "code", "sample", "--N", "16", "--K", "4", "--seed", "2", "-o", "code.bin",
            ],
            dir.path(),
        ),
        0,
    );
    assert_exit(
        &run(
            &[
                "errorset", "gen", "--kind", "erasure", "--n", "4", "--sites", "0,1", "-o",
                "set.json",
            ],
            dir.path(),
        ),
        0,
    );
    let out = run(
        &[
            "decode-sim",
            "--code",
            "code.bin",
            "--errorset",
            "set.json",
            "--seed",
            "1",
        ],
        dir.path(),
    );
    assert_exit(&out, 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("rank"), "stderr: {stderr}");
}

#[test]
fn sweep_minimal_config_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sweep.json"),
        r#"{
            "grid": [{"N": 64, "K": 2, "errorset": {"kind": "erasure", "n": 6, "q": 2, "sites": [3]}}],
            "seeds_per_point": 1,
            "master_seed": 77,
            "checks": ["nondegeneracy"]
        }"#,
    )
    .unwrap();
    let out = run(&["sweep", "sweep.json", "-o", "a.csv"], dir.path());
    assert_exit(&out, 0);
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(a.lines().count(), 2, "header plus one record:\n{a}");
    assert!(a.starts_with("N,K,m,seed,"));

    let out = run(
        &["sweep", "sweep.json", "-o", "b.csv", "--workers", "4"],
        dir.path(),
    );
    assert_exit(&out, 0);
    let b = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let strip = |s: &str| -> Vec<String> {
        s.lines()
            .map(|l| l.rsplit_once(',').map(|(h, _)| h.to_string()).unwrap())
            .collect()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn sweep_with_fit_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let mut grid = Vec::new();
    for (n_exp, n) in [(6usize, 64usize), (7, 128), (8, 256), (9, 512), (10, 1024)] {
        grid.push(format!(
            r#"{{"N": {n}, "K": 2, "errorset": {{"kind": "erasure", "n": {n_exp}, "q": 2, "sites": [0]}}}}"#
        ));
    }
    std::fs::write(
        dir.path().join("scale.json"),
        format!(
            r#"{{"grid": [{}], "seeds_per_point": 4, "master_seed": 3, "checks": ["nondegeneracy"]}}"#,
            grid.join(",")
        ),
    )
    .unwrap();
    let out = run(
        &[
            "sweep",
            "scale.json",
            "-o",
            "out.csv",
            "--fit",
            "--plot",
            "plot.svg",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);
    let fit: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let slope = fit["slope"].as_f64().unwrap();
    assert!((0.3..0.7).contains(&slope), "slope {slope}");
    let svg = std::fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn malformed_config_exits_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\n  \"grid\": [,]\n}").unwrap();
    let out = run(&["sweep", "bad.json"], dir.path());
    assert_exit(&out, 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");

    let out = run(&["sweep", "missing.json"], dir.path());
    assert_exit(&out, 2);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // clap-level parse failure.
    let out = run(&["errorset", "gen", "--kind"], dir.path());
    assert_exit(&out, 2);
    // Unknown kind.
    let out = run(
        &["errorset", "gen", "--kind", "nope", "--n", "2", "-o", "x.json"],
        dir.path(),
    );
    assert_exit(&out, 2);
}

#[test]
fn omitted_seed_is_drawn_and_printed() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["code", "sample", "--N", "8", "--K", "1", "-o", "c.bin"],
        dir.path(),
    );
    assert_exit(&out, 0);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("seed:"), "stderr: {stderr}");
}

#[test]
fn full_spectrum_and_decoder_dump() {
    let dir = tempfile::tempdir().unwrap();
    toy_exact_instance(dir.path());
    let out = run(
        &[
            "code",
            "certify",
            "toy.bin",
            "toy_set.json",
            "--full-spectrum",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let spectrum = report["spectrum"].as_array().unwrap();
    assert_eq!(spectrum.len(), 2);
    for s in spectrum {
        assert!((s.as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    let out = run(
        &[
            "decode-sim",
            "--code",
            "toy.bin",
            "--errorset",
            "toy_set.json",
            "--channel-kind",
            "uniform",
            "--states",
            "3",
            "--seed",
            "1",
            "--dump-decoder",
            "dec.bin",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);
    let bytes = std::fs::read(dir.path().join("dec.bin")).unwrap();
    assert_eq!(&bytes[0..8], b"HAARQEC1");
    // Km = 2, N = 2, 2*2*2 doubles of payload.
    assert_eq!(bytes.len(), 8 + 16 + 2 * 2 * 16);
}

#[test]
fn experiment_erasure_small() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "experiment", "erasure", "--n", "6", "--k", "1", "--t", "1", "--trials", "2",
            "--states", "3", "--seed", "4",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["trials"].as_array().unwrap().len(), 2);
    assert!(report["worst_delta"].as_f64().unwrap() < 1.0);
}

#[test]
fn element_cap_env_var_limits_generation() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "errorset", "gen", "--kind", "weight", "--n", "8", "--t", "2", "--q", "3", "-o",
            "set.json",
        ])
        .env("HAARQEC_ELEMENT_CAP", "100")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_exit(&out, 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("budget"), "stderr: {stderr}");
}
