//! Batch command-line front end tying the pipelines together.
//!
//! Subcommands: `reduce`, `complete-psd`, `snl`, `lrmc`, `lift`,
//! `sos-eliminate`, `fixtures`. Every command writes its primary artifact
//! to `--out` and a machine-readable JSON report to stdout. Exit codes:
//! 0 ok, 2 parse error, 3 invalid data, 4 pipeline diagnostic.

use crate::completion_edm::{snl_generate, snl_localize};
use crate::completion_psd::{combined_face, complete, maximal_cliques};
use crate::conic::{facially_reduce, ConicProblem, FinderKind};
use crate::formats;
use crate::lifts;
use crate::lrmc::lrmc_recover;
use crate::numerics::{self, SymMatrix};
use crate::pathologies;
use crate::sos;
use crate::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

const EXIT_OK: i32 = 0;
const EXIT_PARSE: i32 = 2;
const EXIT_INVALID: i32 = 3;
const EXIT_DIAGNOSTIC: i32 = 4;

/// Machine-readable run summary; everything except `wall_time_ms` is
/// deterministic for a fixed seed.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub input_digest: String,
    pub steps: Vec<String>,
    pub metrics: BTreeMap<String, serde_json::Value>,
    pub wall_time_ms: f64,
}

struct CliFailure {
    code: i32,
    message: String,
}

impl CliFailure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliFailure {
            code,
            message: message.into(),
        }
    }
}

fn code_for(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => EXIT_PARSE,
        Error::FaceTooBig { .. } => EXIT_DIAGNOSTIC,
        _ => EXIT_INVALID,
    }
}

impl From<Error> for CliFailure {
    fn from(e: Error) -> Self {
        CliFailure::new(code_for(&e), e.to_string())
    }
}

/// FNV-1a digest of the input bytes; recorded in reports.
fn digest(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    format!("{h:016x}")
}

fn read_input(path: &Path) -> Result<String, CliFailure> {
    std::fs::read_to_string(path)
        .map_err(|e| CliFailure::new(EXIT_PARSE, format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: &Path, content: &str) -> Result<(), CliFailure> {
    std::fs::write(path, content).map_err(|e| {
        CliFailure::new(
            EXIT_INVALID,
            format!("cannot write {}: {e}", path.display()),
        )
    })
}

#[derive(Parser, Debug)]
#[command(
    name = "facered",
    version,
    about = "Facial reduction preprocessing for conic optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FinderArg {
    /// Diagonal inner approximation of the PSD cone.
    Diag,
    /// Diagonally dominant inner approximation.
    Dd,
}

impl From<FinderArg> for FinderKind {
    fn from(f: FinderArg) -> FinderKind {
        match f {
            FinderArg::Diag => FinderKind::Diag,
            FinderArg::Dd => FinderKind::DiagDominant,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Facially reduce a problem file and emit the reduced problem.
    Reduce(ReduceArgs),
    /// Complete a partial PSD matrix via clique facial reduction.
    CompletePsd(CompletePsdArgs),
    /// Sensor network localization from distances.
    Snl(SnlArgs),
    /// Low-rank matrix completion from observed entries.
    Lrmc(LrmcArgs),
    /// Emit facially reduced SDP lifts of combinatorial problems.
    #[command(subcommand)]
    Lift(LiftCommand),
    /// Eliminate monomials from an SOS program's basis.
    SosEliminate(SosArgs),
    /// Export a pathology fixture as a problem file.
    Fixtures(FixturesArgs),
}

#[derive(Args, Debug)]
struct ReduceArgs {
    /// Problem file in the SDPA-like format.
    #[arg(long)]
    input: PathBuf,
    /// Reduced problem output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reduction trace output path.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "diag")]
    finder: FinderArg,
    #[arg(long, default_value_t = 64)]
    max_steps: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args, Debug)]
struct CompletePsdArgs {
    /// Partial matrix in the psdc format.
    #[arg(long)]
    input: PathBuf,
    /// Completed matrix output path (dense text format).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_steps: usize,
}

#[derive(Args, Debug)]
struct SnlArgs {
    /// Instance file in the snl format.
    #[arg(long, conflicts_with = "gen")]
    input: Option<PathBuf>,
    /// Generate an instance: `n=50,anchors=4,range=0.5,seed=1[,r=2]`.
    #[arg(long)]
    gen: Option<String>,
    /// Multiplicative distance noise factor for generated instances.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Recovered positions output path (CSV).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Seed used when the generator spec does not carry one.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct LrmcArgs {
    /// Observations in the lrmc format.
    #[arg(long)]
    input: PathBuf,
    /// Recovered matrix output path (CSV).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
}

#[derive(Subcommand, Debug)]
enum LiftCommand {
    /// Gangster-reduced QAP relaxation from flow, distance, and linear
    /// cost matrices (dense text format).
    Qap {
        #[arg(long)]
        flow: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        cost: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Second lift of max-cut from a weight matrix (dense text format).
    Maxcut {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SosArgs {
    /// Polynomial in the poly format.
    #[arg(long)]
    input: PathBuf,
    /// Optional Gram-system output in the SDPA-like format.
    #[arg(long)]
    gram_out: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    max_steps: usize,
}

#[derive(Args, Debug)]
struct FixturesArgs {
    /// One of: infinite-gap, positive-gap, zero-gap, sing-two, nested.
    #[arg(long)]
    name: String,
    /// Order parameter for the nested family.
    #[arg(long)]
    n: Option<usize>,
    /// Problem file output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Entry point for the binary: parses `std::env::args`.
pub fn run_from_env() -> i32 {
    let args: Vec<String> = std::env::args().collect();
    run(&args)
}

/// Runs the CLI on explicit arguments and returns the exit code; reports
/// go to stdout, errors to stderr.
pub fn run(args: &[String]) -> i32 {
    let (code, report) = execute(args);
    if let Some(report) = report {
        match serde_json::to_string_pretty(&report) {
            Ok(json) => println!("{json}"),
            Err(e) => {
                eprintln!("facered: cannot serialize report: {e}");
                return EXIT_INVALID;
            }
        }
    }
    code
}

/// Runs the CLI and hands back the report instead of printing it; error
/// messages still go to stderr.
pub fn execute(args: &[String]) -> (i32, Option<RunReport>) {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not failures.
            use clap::error::ErrorKind;
            let benign = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return (if benign { EXIT_OK } else { EXIT_PARSE }, None);
        }
    };
    let start = Instant::now();
    let result = match cli.command {
        Command::Reduce(args) => cmd_reduce(args),
        Command::CompletePsd(args) => cmd_complete_psd(args),
        Command::Snl(args) => cmd_snl(args),
        Command::Lrmc(args) => cmd_lrmc(args),
        Command::Lift(args) => cmd_lift(args),
        Command::SosEliminate(args) => cmd_sos(args),
        Command::Fixtures(args) => cmd_fixtures(args),
    };
    match result {
        Ok(mut report) => {
            report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            (EXIT_OK, Some(report))
        }
        Err(failure) => {
            eprintln!("facered: {}", failure.message);
            (failure.code, None)
        }
    }
}

fn new_report(command: &str, input: &str) -> RunReport {
    RunReport {
        command: command.to_string(),
        input_digest: digest(input.as_bytes()),
        steps: Vec::new(),
        metrics: BTreeMap::new(),
        wall_time_ms: 0.0,
    }
}

fn metric(report: &mut RunReport, key: &str, value: impl Into<serde_json::Value>) {
    report.metrics.insert(key.to_string(), value.into());
}

fn cmd_reduce(args: ReduceArgs) -> Result<RunReport, CliFailure> {
    let text = read_input(&args.input)?;
    let problem = formats::parse_sdpa(&text)?;
    let mut report = new_report("reduce", &text);
    let trace = facially_reduce(&problem, args.finder.into(), args.max_steps, args.tol)?;
    for (k, step) in trace.steps.iter().enumerate() {
        report.steps.push(format!(
            "step {}: exposing rank {}, cone order {} -> {}",
            k + 1,
            step.exposing_rank,
            step.face_basis.rows(),
            step.reduced.order()
        ));
    }
    metric(&mut report, "witness_degree", trace.witness_degree());
    metric(&mut report, "original_order", trace.original.order());
    metric(&mut report, "final_order", trace.final_problem.order());
    metric(
        &mut report,
        "final_constraints",
        trace.final_problem.num_constraints(),
    );
    if let Some(out) = &args.out {
        write_output(out, &formats::format_sdpa(&trace.final_problem))?;
    }
    if let Some(path) = &args.trace {
        write_output(path, &formats::format_trace(&trace))?;
    }
    Ok(report)
}

fn cmd_complete_psd(args: CompletePsdArgs) -> Result<RunReport, CliFailure> {
    let text = read_input(&args.input)?;
    let partial = formats::parse_psdc(&text)?;
    let mut report = new_report("complete-psd", &text);
    let cliques = maximal_cliques(partial.graph());
    let face = combined_face(&partial, &cliques, args.tol)?;
    metric(&mut report, "cliques", cliques.len());
    metric(&mut report, "face_dim", face.dim());
    let Some(x) = complete(&partial, &face, args.max_steps, args.tol)? else {
        return Err(CliFailure::new(
            EXIT_DIAGNOSTIC,
            "no completion found on the reduced face within tolerance",
        ));
    };
    let residual = crate::completion_psd::project_e(&x, partial.graph())?
        .iter()
        .zip(partial.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    metric(&mut report, "max_entry_residual", residual);
    metric(&mut report, "min_eigenvalue", x.min_eig());
    if let Some(out) = &args.out {
        write_output(out, &numerics::format_square_text(&x.to_mat()))?;
    }
    Ok(report)
}

fn parse_gen_spec(
    spec: &str,
    default_seed: u64,
) -> Result<(usize, usize, f64, usize, u64), CliFailure> {
    let mut n = None;
    let mut anchors = None;
    let mut range = None;
    let mut r = 2usize;
    let mut seed = default_seed;
    for part in spec.split(',') {
        let Some((key, value)) = part.split_once('=') else {
            return Err(CliFailure::new(
                EXIT_PARSE,
                format!("bad generator field {part:?}"),
            ));
        };
        let bad = |k: &str| CliFailure::new(EXIT_PARSE, format!("bad generator value for {k}"));
        match key.trim() {
            "n" => n = Some(value.trim().parse().map_err(|_| bad("n"))?),
            "anchors" => anchors = Some(value.trim().parse().map_err(|_| bad("anchors"))?),
            "range" => range = Some(value.trim().parse().map_err(|_| bad("range"))?),
            "r" => r = value.trim().parse().map_err(|_| bad("r"))?,
            "seed" => seed = value.trim().parse().map_err(|_| bad("seed"))?,
            other => {
                return Err(CliFailure::new(
                    EXIT_PARSE,
                    format!("unknown generator key {other:?}"),
                ))
            }
        }
    }
    let n = n.ok_or_else(|| CliFailure::new(EXIT_PARSE, "generator spec needs n=<count>"))?;
    let anchors = anchors
        .ok_or_else(|| CliFailure::new(EXIT_PARSE, "generator spec needs anchors=<count>"))?;
    let range =
        range.ok_or_else(|| CliFailure::new(EXIT_PARSE, "generator spec needs range=<radius>"))?;
    Ok((n, anchors, range, r, seed))
}

fn cmd_snl(args: SnlArgs) -> Result<RunReport, CliFailure> {
    let (inst, mut report) = match (&args.input, &args.gen) {
        (Some(path), None) => {
            let text = read_input(path)?;
            (formats::parse_snl(&text)?, new_report("snl", &text))
        }
        (None, Some(spec)) => {
            let (n, anchors, range, r, seed) = parse_gen_spec(spec, args.seed)?;
            let inst = snl_generate(n, anchors, range, r, seed, args.noise)?;
            let canonical = format!(
                "n={n},anchors={anchors},range={range},r={r},seed={seed},noise={}",
                args.noise
            );
            (inst, new_report("snl", &canonical))
        }
        _ => {
            return Err(CliFailure::new(
                EXIT_PARSE,
                "provide exactly one of --input or --gen",
            ));
        }
    };
    let result = snl_localize(&inst, args.tol).map_err(|e| match e {
        Error::FaceTooBig { dim } => CliFailure::new(
            EXIT_DIAGNOSTIC,
            format!("reduced face dimension {dim} is too large; the graph is not localizable"),
        ),
        Error::Invalid(msg) => CliFailure::new(EXIT_DIAGNOSTIC, msg),
        other => other.into(),
    })?;
    metric(&mut report, "nodes", inst.edm.node_count());
    metric(&mut report, "edges", inst.edm.edges().len());
    metric(&mut report, "cliques", result.cliques_used);
    metric(&mut report, "face_dim", result.face_dim);
    metric(&mut report, "max_edge_residual", result.max_edge_residual);
    if let Some(rmsd) = result.rmsd {
        metric(&mut report, "rmsd", rmsd);
    }
    if let Some(out) = &args.out {
        write_output(out, &formats::format_points_csv(&result.points))?;
    }
    Ok(report)
}

fn cmd_lrmc(args: LrmcArgs) -> Result<RunReport, CliFailure> {
    let text = read_input(&args.input)?;
    let obs = formats::parse_lrmc(&text)?;
    let mut report = new_report("lrmc", &text);
    let Some((z, info)) = lrmc_recover(&obs, args.tol)? else {
        return Err(CliFailure::new(
            EXIT_DIAGNOSTIC,
            "recovery failed: not enough fully observed blocks or residual above tolerance",
        ));
    };
    let sigma = numerics::singular_values(&z);
    metric(&mut report, "blocks", info.blocks_found);
    metric(&mut report, "face_dim", info.face_dim);
    metric(
        &mut report,
        "observed_relative_residual",
        info.observed_relative_residual,
    );
    metric(
        &mut report,
        "recovered_rank",
        numerics::numerical_rank(&sigma, Some(1e-9)),
    );
    if let Some(out) = &args.out {
        write_output(out, &formats::format_matrix_csv(&z))?;
    }
    Ok(report)
}

fn lifted_to_problem(
    lift: &lifts::LiftedProblem,
    include_exposing: bool,
) -> Result<ConicProblem, CliFailure> {
    let mut a_mats: Vec<SymMatrix> = Vec::new();
    let mut b = Vec::new();
    if include_exposing {
        a_mats.push(lift.exposing.clone());
        b.push(0.0);
    }
    for (m, rhs) in &lift.constraints {
        a_mats.push(m.clone());
        b.push(*rhs);
    }
    ConicProblem::new(a_mats, b, lift.objective.clone()).map_err(CliFailure::from)
}

fn cmd_lift(cmd: LiftCommand) -> Result<RunReport, CliFailure> {
    match cmd {
        LiftCommand::Qap {
            flow,
            dist,
            cost,
            out,
        } => {
            let ftext = read_input(&flow)?;
            let dtext = read_input(&dist)?;
            let f = SymMatrix::from_mat(&numerics::parse_square_text(&ftext)?);
            let d = SymMatrix::from_mat(&numerics::parse_square_text(&dtext)?);
            let (c, digest_src) = match cost {
                Some(path) => {
                    let ctext = read_input(&path)?;
                    (
                        numerics::parse_square_text(&ctext)?,
                        format!("{ftext}{dtext}{ctext}"),
                    )
                }
                None => (
                    numerics::Mat::zeros(f.order(), f.order()),
                    format!("{ftext}{dtext}"),
                ),
            };
            let mut report = new_report("lift-qap", &digest_src);
            let n = f.order();
            let reduced = lifts::qap_reduced(&f, &d, &c)?;
            let (m_full, gangster) = lifts::qap_constraint_counts(n);
            metric(&mut report, "n", n);
            metric(&mut report, "reduced_order", reduced.order);
            metric(&mut report, "constraints", reduced.constraints.len());
            metric(&mut report, "gangster_cardinality", gangster);
            metric(&mut report, "full_formulation_constraints", m_full);
            let problem = lifted_to_problem(&reduced, false)?;
            if let Some(out) = &out {
                write_output(out, &formats::format_sdpa(&problem))?;
            }
            Ok(report)
        }
        LiftCommand::Maxcut { weights, out } => {
            let wtext = read_input(&weights)?;
            let w = SymMatrix::from_mat(&numerics::parse_square_text(&wtext)?);
            let mut report = new_report("lift-maxcut", &wtext);
            let n = w.order();
            let lift = lifts::maxcut_second_lift(n, &w)?;
            metric(&mut report, "n", n);
            metric(&mut report, "lifted_order", lift.order);
            metric(&mut report, "index_constraints", lift.constraints.len());
            metric(&mut report, "face_dim", lift.face_basis.cols());
            let problem = lifted_to_problem(&lift, true)?;
            if let Some(out) = &out {
                write_output(out, &formats::format_sdpa(&problem))?;
            }
            Ok(report)
        }
    }
}

fn cmd_sos(args: SosArgs) -> Result<RunReport, CliFailure> {
    let text = read_input(&args.input)?;
    let poly = formats::parse_poly(&text)?;
    let mut report = new_report("sos-eliminate", &text);
    let (final_m, log) = sos::eliminate(&poly, &[], args.max_steps)?;
    for (k, step) in log.iter().enumerate() {
        report.steps.push(format!(
            "step {}: removed {}",
            k + 1,
            step.removed
                .iter()
                .map(|m| format!("{m:?}"))
                .collect::<Vec<_>>()
                .join(" ")
        ));
    }
    metric(
        &mut report,
        "eliminated",
        log.iter().map(|s| s.removed.len()).sum::<usize>(),
    );
    metric(&mut report, "final_basis_size", final_m.len());
    let basis: Vec<String> = final_m
        .iter()
        .map(|m| {
            m.iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    metric(&mut report, "final_basis", serde_json::json!(basis));
    if let Some(path) = &args.gram_out {
        let system = sos::gram_sdp_problem(&poly, &final_m)?;
        write_output(path, &formats::format_sdpa(&system))?;
    }
    Ok(report)
}

fn cmd_fixtures(args: FixturesArgs) -> Result<RunReport, CliFailure> {
    let inst = match args.name.as_str() {
        "infinite-gap" => pathologies::infinite_gap(),
        "positive-gap" => pathologies::positive_gap(),
        "zero-gap" => pathologies::zero_gap_unattained(),
        "sing-two" => pathologies::sing_two_instance(),
        "nested" => {
            let n = args.n.ok_or_else(|| {
                CliFailure::new(EXIT_INVALID, "the nested fixture needs --n <order>")
            })?;
            if n < 2 {
                return Err(CliFailure::new(EXIT_INVALID, "nested fixture needs n >= 2"));
            }
            pathologies::nested_sing_instance(n)
        }
        other => {
            return Err(CliFailure::new(
                EXIT_INVALID,
                format!(
                    "unknown fixture {other:?}; try infinite-gap, positive-gap, zero-gap, sing-two, nested"
                ),
            ))
        }
    };
    let mut report = new_report("fixtures", inst.name);
    metric(&mut report, "name", inst.name);
    metric(&mut report, "order", inst.problem.order());
    metric(&mut report, "constraints", inst.problem.num_constraints());
    if let Some(v) = inst.known.primal_value {
        metric(&mut report, "known_primal_value", v);
    }
    if let Some(v) = inst.known.dual_value {
        metric(&mut report, "known_dual_value", v);
    }
    if let Some(d) = inst.known.expected_witness_degree {
        metric(&mut report, "expected_witness_degree", d);
    }
    if inst.known.dual_infeasible {
        metric(&mut report, "dual_infeasible", true);
    }
    if let Some(out) = &args.out {
        write_output(out, &formats::format_sdpa(&inst.problem))?;
    }
    Ok(report)
}
