//! Text formats.
//!
//! Graphs: a header `n d` (`d` is the maximum degree), then one `u v mult`
//! line per edge record. Port order follows from the canonical rule, so a
//! write/read round trip reproduces the graph exactly. Corruption sets are
//! `edge copy` lines; dumps are `round vertex edge copy sent received`
//! lines with `-` for `⊥`. Blank lines and `#` comments are skipped.

use std::fmt::Write as _;
use std::str::FromStr;

use relaynet::adversary::{CorruptionSet, DumpLine};
use relaynet::composition::CorruptionAnalysis;
use relaynet::graph::{Edge, MultiGraph};

use crate::LabError;

pub fn write_graph(g: &MultiGraph) -> String {
    let mut s = format!("{} {}\n", g.n(), g.max_degree());
    for e in g.edges() {
        let _ = writeln!(s, "{} {} {}", e.u, e.v, e.mult);
    }
    s
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        (!l.is_empty() && !l.starts_with('#')).then(|| (i + 1, l.split_whitespace().collect()))
    })
}

fn field<T: FromStr>(origin: &str, line: usize, tok: &str, what: &str) -> Result<T, LabError> {
    tok.parse().map_err(|_| LabError::parse(origin, line, format!("bad {what} `{tok}`")))
}

fn expect_fields(origin: &str, line: usize, toks: &[&str], n: usize) -> Result<(), LabError> {
    if toks.len() != n {
        return Err(LabError::parse(origin, line, format!("expected {n} fields, found {}", toks.len())));
    }
    Ok(())
}

/// Parse a graph file; `origin` names it in error messages.
pub fn read_graph(text: &str, origin: &str) -> Result<MultiGraph, LabError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| LabError::parse(origin, 1, "missing `n d` header"))?;
    expect_fields(origin, hl, &header, 2)?;
    let n: usize = field(origin, hl, header[0], "vertex count")?;
    let d: usize = field(origin, hl, header[1], "degree")?;
    let mut edges = Vec::new();
    for (line, toks) in lines {
        expect_fields(origin, line, &toks, 3)?;
        let u = field(origin, line, toks[0], "vertex")?;
        let v = field(origin, line, toks[1], "vertex")?;
        let mult = field(origin, line, toks[2], "multiplicity")?;
        if mult == 0 {
            return Err(LabError::parse(origin, line, "multiplicity must be positive"));
        }
        edges.push(Edge { u, v, mult });
    }
    let g = MultiGraph::new(n, edges).map_err(|e| LabError::parse(origin, hl, e.to_string()))?;
    if g.max_degree() != d {
        return Err(LabError::parse(origin, hl, format!("header degree {d}, edges give {}", g.max_degree())));
    }
    Ok(g)
}

pub fn write_corruption(g: &MultiGraph, set: &CorruptionSet) -> String {
    let mut s = String::new();
    for (e, c) in set.pairs(g) {
        let _ = writeln!(s, "{e} {c}");
    }
    s
}

pub fn read_corruption(g: &MultiGraph, text: &str, origin: &str) -> Result<CorruptionSet, LabError> {
    let mut pairs = Vec::new();
    for (line, toks) in content_lines(text) {
        expect_fields(origin, line, &toks, 2)?;
        let e: usize = field(origin, line, toks[0], "edge")?;
        let c: u32 = field(origin, line, toks[1], "copy")?;
        if e >= g.edges().len() || c >= g.edge(e).mult {
            return Err(LabError::parse(origin, line, format!("no copy {c} of edge {e}")));
        }
        pairs.push((e, c));
    }
    CorruptionSet::from_pairs(g, &pairs).map_err(|e| LabError::parse(origin, 1, e.to_string()))
}

pub fn write_dump(lines: &[DumpLine]) -> String {
    let mut s = String::new();
    for d in lines {
        let _ = writeln!(s, "{} {} {} {} {} {}", d.round, d.vertex, d.edge, d.copy, d.sent, d.received);
    }
    s
}

/// The analysis as sectioned text.
pub fn write_analysis(a: &CorruptionAnalysis, outcomes: Option<&[(usize, usize, bool)]>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "[corruption]\ncorrupted {} of {} copies (epsilon {:.6})", a.corrupted, a.copies, a.epsilon());
    let bad: Vec<String> = a.bad_clouds.iter().enumerate().filter(|(_, &b)| b).map(|(v, _)| v.to_string()).collect();
    let _ = writeln!(s, "\n[bad clouds]\ncount {} fraction {:.6}\n{}", bad.len(), a.bad_cloud_fraction(), bad.join(" "));
    let _ = writeln!(s, "\n[doomed]\nmenu-relative{}", if a.doomed_exact { "" } else { ", greedy covers" });
    for (v, d) in a.doomed.iter().enumerate().filter(|(_, d)| !d.is_empty()) {
        let list: Vec<String> = d.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "cloud {v}: size {} [{}]", d.len(), list.join(" "));
    }
    let hit: Vec<String> = a.corrupted_super_edges.iter().enumerate().filter(|(_, &b)| b).map(|(e, _)| e.to_string()).collect();
    let _ = writeln!(s, "\n[corrupted super-edges]\ncount {} fraction {:.6}\n{}", hit.len(), a.super_edge_fraction(), hit.join(" "));
    if let Some(out) = outcomes {
        let _ = writeln!(s, "\n[pairs]");
        for &(x, y, ok) in out {
            let _ = writeln!(s, "{x} {y} {}", if ok { "ok" } else { "fail" });
        }
    }
    s
}
