//! Stable text formats: the SDPA-like problem file, partial-matrix, SNL,
//! low-rank observation, and polynomial inputs, plus trace and CSV outputs.
//!
//! Numbers are printed with Rust's shortest-round-trip formatting and
//! parsed with the locale-independent `.` decimal separator, so every
//! emitted file re-parses to an entrywise-identical problem.

use crate::completion_edm::{EdmInstance, SnlInstance};
use crate::completion_psd::{ObservationGraph, PartialMatrix};
use crate::conic::{ConicProblem, ReductionTrace};
use crate::lrmc::BipartiteObservations;
use crate::numerics::{Mat, SymMatrix};
use crate::sos::Poly;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Numbered, non-empty, non-comment lines.
fn content_lines(s: &str) -> Vec<(usize, &str)> {
    s.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

fn parse_tokens<T: std::str::FromStr>(line: usize, raw: &str, want: usize) -> Result<Vec<T>> {
    let toks: Vec<&str> = raw.split_whitespace().collect();
    if toks.len() != want {
        return Err(parse_err(
            line,
            format!("expected {want} fields, got {}", toks.len()),
        ));
    }
    toks.into_iter()
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| parse_err(line, format!("bad field {t:?}")))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// SDPA-like problem format
// ---------------------------------------------------------------------------

/// Emits the SDPA-like format: `m`, block count `1`, block order `n`, the
/// `m` right-hand sides, then entry lines `mat blk i j val` with `mat = 0`
/// for the objective and 1-based upper-triangle indices.
pub fn format_sdpa(p: &ConicProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", p.num_constraints());
    let _ = writeln!(out, "1");
    let _ = writeln!(out, "{}", p.order());
    let rhs: Vec<String> = p.rhs().iter().map(|v| format!("{v}")).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));
    let write_mat = |mat_idx: usize, m: &SymMatrix, out: &mut String| {
        for i in 0..m.order() {
            for j in i..m.order() {
                let v = m.get(i, j);
                if v != 0.0 {
                    let _ = writeln!(out, "{} 1 {} {} {}", mat_idx, i + 1, j + 1, v);
                }
            }
        }
    };
    write_mat(0, p.objective(), &mut out);
    for (k, a) in p.constraints().iter().enumerate() {
        write_mat(k + 1, a, &mut out);
    }
    out
}

/// Parses the SDPA-like format.
pub fn parse_sdpa(s: &str) -> Result<ConicProblem> {
    let lines = content_lines(s);
    if lines.len() < 3 {
        return Err(parse_err(1, "SDPA file needs at least 3 header lines"));
    }
    let m: usize = parse_tokens(lines[0].0, lines[0].1, 1)?[0];
    let blocks: usize = parse_tokens(lines[1].0, lines[1].1, 1)?[0];
    if blocks != 1 {
        return Err(parse_err(lines[1].0, "exactly one PSD block is supported"));
    }
    let n: usize = parse_tokens(lines[2].0, lines[2].1, 1)?[0];
    // The rhs line is absent entirely when m = 0 and blank lines are
    // stripped, so only consume one when constraints exist.
    let mut cursor = 3;
    let b: Vec<f64> = if m == 0 {
        Vec::new()
    } else {
        if lines.len() < 4 {
            return Err(parse_err(lines[2].0, "missing right-hand side line"));
        }
        cursor = 4;
        parse_tokens(lines[3].0, lines[3].1, m)?
    };
    let mut c = SymMatrix::zeros(n);
    let mut a_mats = vec![SymMatrix::zeros(n); m];
    for &(lineno, raw) in &lines[cursor..] {
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(parse_err(lineno, "entry lines are `mat blk i j val`"));
        }
        let mat: usize = toks[0]
            .parse()
            .map_err(|_| parse_err(lineno, "bad matrix index"))?;
        let blk: usize = toks[1]
            .parse()
            .map_err(|_| parse_err(lineno, "bad block index"))?;
        let i: usize = toks[2]
            .parse()
            .map_err(|_| parse_err(lineno, "bad row index"))?;
        let j: usize = toks[3]
            .parse()
            .map_err(|_| parse_err(lineno, "bad column index"))?;
        let val: f64 = toks[4]
            .parse()
            .map_err(|_| parse_err(lineno, "bad value"))?;
        if blk != 1 {
            return Err(parse_err(lineno, "exactly one PSD block is supported"));
        }
        if mat > m {
            return Err(parse_err(
                lineno,
                format!("matrix index {mat} out of range"),
            ));
        }
        if i == 0 || j == 0 || i > n || j > n || i > j {
            return Err(parse_err(lineno, "indices must satisfy 1 <= i <= j <= n"));
        }
        let target = if mat == 0 {
            &mut c
        } else {
            &mut a_mats[mat - 1]
        };
        target.set(i - 1, j - 1, val);
    }
    ConicProblem::new(a_mats, b, c)
}

/// Structured text for a reduction trace: one record per step carrying the
/// certificate vector, the exposing rank, and the new cone order.
pub fn format_trace(trace: &ReductionTrace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "trace 1");
    let _ = writeln!(out, "original-order {}", trace.original.order());
    let _ = writeln!(out, "steps {}", trace.witness_degree());
    for (k, step) in trace.steps.iter().enumerate() {
        let _ = writeln!(out, "step {}", k + 1);
        let y: Vec<String> = step.certificate.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "certificate {}", y.join(" "));
        let _ = writeln!(out, "exposing-rank {}", step.exposing_rank);
        let _ = writeln!(out, "order {}", step.reduced.order());
    }
    let _ = writeln!(out, "final-order {}", trace.final_problem.order());
    out
}

// ---------------------------------------------------------------------------
// Partial matrix (psdc) format
// ---------------------------------------------------------------------------

/// Emits `psdc 1`, `n <n>`, then `i j value` per edge (1-based, `i <= j`).
pub fn format_psdc(p: &PartialMatrix) -> String {
    let mut out = String::from("psdc 1\n");
    let _ = writeln!(out, "n {}", p.graph().node_count());
    for (&(i, j), v) in p.graph().edges().iter().zip(p.values()) {
        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, v);
    }
    out
}

/// Parses the partial-matrix format; self-loops are mandatory.
pub fn parse_psdc(s: &str) -> Result<PartialMatrix> {
    let lines = content_lines(s);
    if lines.len() < 2 {
        return Err(parse_err(1, "psdc file needs a header"));
    }
    if lines[0].1 != "psdc 1" {
        return Err(parse_err(lines[0].0, "expected header `psdc 1`"));
    }
    let toks: Vec<&str> = lines[1].1.split_whitespace().collect();
    if toks.len() != 2 || toks[0] != "n" {
        return Err(parse_err(lines[1].0, "expected `n <count>`"));
    }
    let n: usize = toks[1]
        .parse()
        .map_err(|_| parse_err(lines[1].0, "bad node count"))?;
    let mut edges = Vec::new();
    let mut values = BTreeMap::new();
    for &(lineno, raw) in &lines[2..] {
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(lineno, "entry lines are `i j value`"));
        }
        let i: usize = toks[0]
            .parse()
            .map_err(|_| parse_err(lineno, "bad index"))?;
        let j: usize = toks[1]
            .parse()
            .map_err(|_| parse_err(lineno, "bad index"))?;
        let v: f64 = toks[2]
            .parse()
            .map_err(|_| parse_err(lineno, "bad value"))?;
        if i == 0 || j == 0 || i > j || j > n {
            return Err(parse_err(lineno, "indices must satisfy 1 <= i <= j <= n"));
        }
        edges.push((i - 1, j - 1));
        values.insert((i - 1, j - 1), v);
    }
    let graph = ObservationGraph::new(n, edges)?;
    let vals: Vec<f64> = graph.edges().iter().map(|e| values[e]).collect();
    PartialMatrix::new(graph, vals)
}

// ---------------------------------------------------------------------------
// SNL format
// ---------------------------------------------------------------------------

/// Emits the SNL format: header, `edge i j dsq` lines, `anchor` lines, and
/// optional `truth` lines (all 1-based).
pub fn format_snl(inst: &SnlInstance) -> String {
    let mut out = String::from("snl 1\n");
    let edm = &inst.edm;
    let _ = writeln!(
        out,
        "n {} r {} anchors {}",
        edm.node_count(),
        edm.embedding_dim(),
        inst.anchors.len()
    );
    for (&(i, j), d) in edm.edges().iter().zip(edm.distances()) {
        let _ = writeln!(out, "edge {} {} {}", i + 1, j + 1, d);
    }
    for (&id, pos) in &inst.anchors {
        let coords: Vec<String> = pos.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "anchor {} {}", id + 1, coords.join(" "));
    }
    if let Some(truth) = &inst.truth {
        for i in 0..truth.rows() {
            let coords: Vec<String> = (0..truth.cols())
                .map(|t| format!("{}", truth[(i, t)]))
                .collect();
            let _ = writeln!(out, "truth {} {}", i + 1, coords.join(" "));
        }
    }
    out
}

/// Parses the SNL format.
pub fn parse_snl(s: &str) -> Result<SnlInstance> {
    let lines = content_lines(s);
    if lines.len() < 2 {
        return Err(parse_err(1, "snl file needs a header"));
    }
    if lines[0].1 != "snl 1" {
        return Err(parse_err(lines[0].0, "expected header `snl 1`"));
    }
    let head: Vec<&str> = lines[1].1.split_whitespace().collect();
    if head.len() != 6 || head[0] != "n" || head[2] != "r" || head[4] != "anchors" {
        return Err(parse_err(lines[1].0, "expected `n <n> r <r> anchors <m>`"));
    }
    let n: usize = head[1]
        .parse()
        .map_err(|_| parse_err(lines[1].0, "bad n"))?;
    let r: usize = head[3]
        .parse()
        .map_err(|_| parse_err(lines[1].0, "bad r"))?;
    let anchor_count: usize = head[5]
        .parse()
        .map_err(|_| parse_err(lines[1].0, "bad anchor count"))?;
    let mut edges = Vec::new();
    let mut d = Vec::new();
    let mut anchors = BTreeMap::new();
    let mut truth_rows: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &(lineno, raw) in &lines[2..] {
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.first().copied() {
            Some("edge") => {
                if toks.len() != 4 {
                    return Err(parse_err(lineno, "edge lines are `edge i j dsq`"));
                }
                let i: usize = toks[1]
                    .parse()
                    .map_err(|_| parse_err(lineno, "bad index"))?;
                let j: usize = toks[2]
                    .parse()
                    .map_err(|_| parse_err(lineno, "bad index"))?;
                let v: f64 = toks[3]
                    .parse()
                    .map_err(|_| parse_err(lineno, "bad distance"))?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(parse_err(lineno, "edge index out of range"));
                }
                edges.push((i - 1, j - 1));
                d.push(v);
            }
            Some("anchor") => {
                if toks.len() != 2 + r {
                    return Err(parse_err(
                        lineno,
                        format!("anchor lines carry {r} coordinates"),
                    ));
                }
                let id: usize = toks[1].parse().map_err(|_| parse_err(lineno, "bad id"))?;
                if id == 0 || id > n {
                    return Err(parse_err(lineno, "anchor id out of range"));
                }
                let pos = toks[2..]
                    .iter()
                    .map(|t| t.parse().map_err(|_| parse_err(lineno, "bad coordinate")))
                    .collect::<Result<Vec<f64>>>()?;
                anchors.insert(id - 1, pos);
            }
            Some("truth") => {
                if toks.len() != 2 + r {
                    return Err(parse_err(
                        lineno,
                        format!("truth lines carry {r} coordinates"),
                    ));
                }
                let id: usize = toks[1].parse().map_err(|_| parse_err(lineno, "bad id"))?;
                if id == 0 || id > n {
                    return Err(parse_err(lineno, "truth id out of range"));
                }
                let pos = toks[2..]
                    .iter()
                    .map(|t| t.parse().map_err(|_| parse_err(lineno, "bad coordinate")))
                    .collect::<Result<Vec<f64>>>()?;
                truth_rows.insert(id - 1, pos);
            }
            _ => return Err(parse_err(lineno, "expected `edge`, `anchor`, or `truth`")),
        }
    }
    if anchors.len() != anchor_count {
        return Err(parse_err(
            lines[1].0,
            format!(
                "header declares {anchor_count} anchors but {} given",
                anchors.len()
            ),
        ));
    }
    let edm = EdmInstance::new(n, edges, d, r)?;
    let truth = if truth_rows.is_empty() {
        None
    } else {
        if truth_rows.len() != n {
            return Err(parse_err(lines[1].0, "truth must cover every node"));
        }
        let mut mat = Mat::zeros(n, r);
        for (id, pos) in truth_rows {
            for (t, &v) in pos.iter().enumerate() {
                mat[(id, t)] = v;
            }
        }
        Some(mat)
    };
    Ok(SnlInstance {
        edm,
        anchors,
        truth,
    })
}

// ---------------------------------------------------------------------------
// LRMC observation format
// ---------------------------------------------------------------------------

/// Emits `lrmc 1`, `m <m> n <n> r <r>`, then `i j value` lines (1-based).
pub fn format_lrmc(obs: &BipartiteObservations) -> String {
    let mut out = String::from("lrmc 1\n");
    let _ = writeln!(
        out,
        "m {} n {} r {}",
        obs.num_rows(),
        obs.num_cols(),
        obs.target_rank()
    );
    for &(i, j, v) in obs.entries() {
        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, v);
    }
    out
}

/// Parses the LRMC observation format.
pub fn parse_lrmc(s: &str) -> Result<BipartiteObservations> {
    let lines = content_lines(s);
    if lines.len() < 2 {
        return Err(parse_err(1, "lrmc file needs a header"));
    }
    if lines[0].1 != "lrmc 1" {
        return Err(parse_err(lines[0].0, "expected header `lrmc 1`"));
    }
    let head: Vec<&str> = lines[1].1.split_whitespace().collect();
    if head.len() != 6 || head[0] != "m" || head[2] != "n" || head[4] != "r" {
        return Err(parse_err(lines[1].0, "expected `m <m> n <n> r <r>`"));
    }
    let m: usize = head[1]
        .parse()
        .map_err(|_| parse_err(lines[1].0, "bad m"))?;
    let n: usize = head[3]
        .parse()
        .map_err(|_| parse_err(lines[1].0, "bad n"))?;
    let r: usize = head[5]
        .parse()
        .map_err(|_| parse_err(lines[1].0, "bad r"))?;
    let mut entries = Vec::new();
    for &(lineno, raw) in &lines[2..] {
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(lineno, "entry lines are `i j value`"));
        }
        let i: usize = toks[0].parse().map_err(|_| parse_err(lineno, "bad row"))?;
        let j: usize = toks[1]
            .parse()
            .map_err(|_| parse_err(lineno, "bad column"))?;
        let v: f64 = toks[2]
            .parse()
            .map_err(|_| parse_err(lineno, "bad value"))?;
        if i == 0 || j == 0 || i > m || j > n {
            return Err(parse_err(lineno, "entry index out of range"));
        }
        entries.push((i - 1, j - 1, v));
    }
    BipartiteObservations::new(m, n, r, entries)
}

// ---------------------------------------------------------------------------
// Polynomial format
// ---------------------------------------------------------------------------

/// Emits `poly 1`, `n <vars>`, then `coeff e1 ... en` per term.
pub fn format_poly(p: &Poly) -> String {
    let mut out = String::from("poly 1\n");
    let _ = writeln!(out, "n {}", p.n_vars());
    for (mono, coeff) in p.terms() {
        let exps: Vec<String> = mono.iter().map(|e| format!("{e}")).collect();
        let _ = writeln!(out, "{} {}", coeff, exps.join(" "));
    }
    out
}

/// Parses the polynomial format.
pub fn parse_poly(s: &str) -> Result<Poly> {
    let lines = content_lines(s);
    if lines.len() < 2 {
        return Err(parse_err(1, "poly file needs a header"));
    }
    if lines[0].1 != "poly 1" {
        return Err(parse_err(lines[0].0, "expected header `poly 1`"));
    }
    let toks: Vec<&str> = lines[1].1.split_whitespace().collect();
    if toks.len() != 2 || toks[0] != "n" {
        return Err(parse_err(lines[1].0, "expected `n <vars>`"));
    }
    let n_vars: usize = toks[1]
        .parse()
        .map_err(|_| parse_err(lines[1].0, "bad var count"))?;
    let mut terms = Vec::new();
    for &(lineno, raw) in &lines[2..] {
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.len() != 1 + n_vars {
            return Err(parse_err(
                lineno,
                format!("term lines carry {n_vars} exponents"),
            ));
        }
        let coeff: f64 = toks[0]
            .parse()
            .map_err(|_| parse_err(lineno, "bad coefficient"))?;
        let mono = toks[1..]
            .iter()
            .map(|t| t.parse().map_err(|_| parse_err(lineno, "bad exponent")))
            .collect::<Result<Vec<u32>>>()?;
        terms.push((mono, coeff));
    }
    Poly::from_terms(n_vars, terms)
}

// ---------------------------------------------------------------------------
// CSV outputs
// ---------------------------------------------------------------------------

/// Points as CSV `id,x1,...,xr` with a header row.
pub fn format_points_csv(points: &Mat) -> String {
    let mut out = String::from("id");
    for t in 0..points.cols() {
        let _ = write!(out, ",x{}", t + 1);
    }
    out.push('\n');
    for i in 0..points.rows() {
        let _ = write!(out, "{}", i + 1);
        for t in 0..points.cols() {
            let _ = write!(out, ",{}", points[(i, t)]);
        }
        out.push('\n');
    }
    out
}

/// Dense matrix as plain CSV rows.
pub fn format_matrix_csv(z: &Mat) -> String {
    let mut out = String::new();
    for i in 0..z.rows() {
        let row: Vec<String> = (0..z.cols()).map(|j| format!("{}", z[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
