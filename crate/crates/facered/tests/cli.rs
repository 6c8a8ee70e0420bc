//! End-to-end checks of the command-line layer: file formats, exit codes,
//! and determinism under a fixed seed.

use facered::cli;
use std::path::Path;

fn run(args: &[&str]) -> (i32, Option<cli::RunReport>) {
    let mut full = vec!["facered".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    cli::execute(&full)
}

fn metric_u64(report: &cli::RunReport, key: &str) -> u64 {
    report.metrics[key]
        .as_u64()
        .unwrap_or_else(|| panic!("metric {key} missing"))
}

fn metric_f64(report: &cli::RunReport, key: &str) -> f64 {
    report.metrics[key]
        .as_f64()
        .unwrap_or_else(|| panic!("metric {key} missing"))
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn fixture_export_then_reduce_gives_trace_length_two() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("sing2.sdpa");
    let (code, _) = run(&[
        "fixtures",
        "--name",
        "sing-two",
        "--out",
        path_str(&problem),
    ]);
    assert_eq!(code, 0);

    let reduced = dir.path().join("reduced.sdpa");
    let trace = dir.path().join("trace.txt");
    let (code, report) = run(&[
        "reduce",
        "--input",
        path_str(&problem),
        "--out",
        path_str(&reduced),
        "--trace",
        path_str(&trace),
    ]);
    assert_eq!(code, 0);
    let report = report.unwrap();
    assert_eq!(metric_u64(&report, "witness_degree"), 2);

    let trace_text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(trace_text.matches("step ").count(), 2);

    // The emitted reduced problem re-parses.
    let text = std::fs::read_to_string(&reduced).unwrap();
    let parsed = facered::formats::parse_sdpa(&text).unwrap();
    assert_eq!(parsed.order(), 1);
}

#[test]
fn strictly_feasible_reduces_in_zero_steps() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("feasible.sdpa");
    // {X >= 0 : <I, X> = 1} is strictly feasible.
    let text = "1\n1\n3\n1\n1 1 1 1 1\n1 1 2 2 1\n1 1 3 3 1\n";
    std::fs::write(&problem, text).unwrap();
    let (code, report) = run(&["reduce", "--input", path_str(&problem)]);
    assert_eq!(code, 0);
    assert_eq!(metric_u64(&report.unwrap(), "witness_degree"), 0);
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.sdpa");
    std::fs::write(&bad, "this is not a problem file\n").unwrap();
    let (code, _) = run(&["reduce", "--input", path_str(&bad)]);
    assert_eq!(code, 2);
    // Missing files also fail at the parse stage.
    let (code, _) = run(&["reduce", "--input", path_str(&dir.path().join("missing"))]);
    assert_eq!(code, 2);
}

#[test]
fn emitted_problem_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (name, extra) in [
        ("positive-gap", None),
        ("zero-gap", None),
        ("nested", Some("5")),
    ] {
        let out = dir.path().join(format!("{name}.sdpa"));
        let mut args = vec!["fixtures", "--name", name, "--out", path_str(&out)];
        if let Some(n) = extra {
            args.extend(["--n", n]);
        }
        let (code, _) = run(&args);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&out).unwrap();
        let parsed = facered::formats::parse_sdpa(&text).unwrap();
        let again = facered::formats::format_sdpa(&parsed);
        assert_eq!(text, again, "{name} round trip");
    }
    let (code, _) = run(&["fixtures", "--name", "does-not-exist"]);
    assert_eq!(code, 3);
}

#[test]
fn snl_generated_noiseless_run() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("points.csv");
    let (code, report) = run(&[
        "snl",
        "--gen",
        "n=50,anchors=4,range=0.5,seed=1",
        "--out",
        path_str(&csv),
    ]);
    assert_eq!(code, 0);
    let report = report.unwrap();
    assert!(metric_f64(&report, "rmsd") < 1e-9);

    // Same seed: identical CSV bytes.
    let csv2 = dir.path().join("points2.csv");
    let (code, _) = run(&[
        "snl",
        "--gen",
        "n=50,anchors=4,range=0.5,seed=1",
        "--out",
        path_str(&csv2),
    ]);
    assert_eq!(code, 0);
    let a = std::fs::read(&csv).unwrap();
    let b = std::fs::read(&csv2).unwrap();
    assert_eq!(a, b);
}

#[test]
fn snl_disconnected_exits_4() {
    // A tiny range leaves the graph with no usable cliques.
    let (code, _) = run(&["snl", "--gen", "n=8,anchors=1,range=0.001,seed=3"]);
    assert_eq!(code, 4);
}

#[test]
fn lift_reports_reduced_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let mat3 = dir.path().join("m3.txt");
    std::fs::write(&mat3, "3\n0 1 2\n1 0 1\n2 1 0\n").unwrap();
    let out = dir.path().join("qap.sdpa");
    let (code, report) = run(&[
        "lift",
        "qap",
        "--flow",
        path_str(&mat3),
        "--dist",
        path_str(&mat3),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code, 0);
    let report = report.unwrap();
    assert_eq!(metric_u64(&report, "constraints"), 10);
    assert_eq!(metric_u64(&report, "reduced_order"), 5);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(facered::formats::parse_sdpa(&text).is_ok());

    let (code, report) = run(&["lift", "maxcut", "--weights", path_str(&mat3)]);
    assert_eq!(code, 0);
    assert_eq!(metric_u64(&report.unwrap(), "lifted_order"), 7);

    // Mismatched orders are invalid data.
    let mat2 = dir.path().join("m2.txt");
    std::fs::write(&mat2, "2\n0 1\n1 0\n").unwrap();
    let (code, _) = run(&[
        "lift",
        "qap",
        "--flow",
        path_str(&mat3),
        "--dist",
        path_str(&mat2),
    ]);
    assert_eq!(code, 3);
}

#[test]
fn complete_psd_and_failure_modes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("worked.psdc");
    let worked = facered::completion_psd::worked_example();
    std::fs::write(&input, facered::formats::format_psdc(&worked)).unwrap();
    let out = dir.path().join("completed.txt");
    let (code, report) = run(&[
        "complete-psd",
        "--input",
        path_str(&input),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code, 0);
    let report = report.unwrap();
    assert_eq!(metric_u64(&report, "face_dim"), 2);
    assert!(metric_f64(&report, "max_entry_residual") < 1e-8);
    let completed =
        facered::numerics::parse_sym_text(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!((completed.get(0, 2) - 1.0).abs() < 1e-8);

    // An infeasible 4-cycle instance is a pipeline diagnostic.
    let infeasible = facered::completion_psd::slater_nonchordal_family(0.2).unwrap();
    let bad = dir.path().join("infeasible.psdc");
    std::fs::write(&bad, facered::formats::format_psdc(&infeasible)).unwrap();
    let (code, _) = run(&["complete-psd", "--input", path_str(&bad)]);
    assert_eq!(code, 4);
}

#[test]
fn lrmc_roundtrip_run() {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = facered::numerics::Mat::from_fn(12, 2, |_, _| rng.random_range(-1.0..1.0));
    let q = facered::numerics::Mat::from_fn(15, 2, |_, _| rng.random_range(-1.0..1.0));
    let z = p.matmul(&q.transpose());
    let pairs: Vec<(usize, usize)> = (0..12)
        .flat_map(|i| (0..15).map(move |j| (i, j)))
        .filter(|_| rng.random_bool(0.7))
        .collect();
    let obs = facered::lrmc::BipartiteObservations::observe(&z, pairs, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("obs.lrmc");
    std::fs::write(&input, facered::formats::format_lrmc(&obs)).unwrap();
    let out = dir.path().join("z.csv");
    let (code, report) = run(&["lrmc", "--input", path_str(&input), "--out", path_str(&out)]);
    assert_eq!(code, 0);
    let report = report.unwrap();
    assert_eq!(metric_u64(&report, "recovered_rank"), 2);
    assert!(metric_f64(&report, "observed_relative_residual") < 1e-8);
}

#[test]
fn sos_eliminate_reports_final_basis() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("poly.txt");
    // x^4 + x^2.
    std::fs::write(&input, "poly 1\nn 1\n1 4\n1 2\n").unwrap();
    let gram = dir.path().join("gram.sdpa");
    let (code, report) = run(&[
        "sos-eliminate",
        "--input",
        path_str(&input),
        "--gram-out",
        path_str(&gram),
    ]);
    assert_eq!(code, 0);
    let report = report.unwrap();
    assert_eq!(metric_u64(&report, "final_basis_size"), 2);
    let text = std::fs::read_to_string(&gram).unwrap();
    let parsed = facered::formats::parse_sdpa(&text).unwrap();
    assert_eq!(parsed.order(), 2);
}
