//! Readers and writers for the on-disk formats.
//!
//! Floating-point values are written with Rust's shortest round-trip
//! representation, so reading a file back yields bit-identical numbers.

use std::{
    collections::BTreeMap,
    fmt::Write as _,
    io::{BufRead, Read, Write},
};

use lpcoh_core::{
    cocycle::SublinearityProfile,
    dirichlet::{EdgeChain, EnergyReport, VertexFunction},
    folner::ControlCertificate,
    hyperbolic::NonvanishingCertificate,
    Element, Graph, GroupSpec, Vertex,
};
use serde::Serialize;

use crate::{CliError, Result};

fn format_error(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Format(format!("line {line}: {msg}"))
}

fn float(x: f64) -> String {
    format!("{x:?}")
}

/// Writes `graph <n> <base>`, one `u v` line per edge and one `wl v value`
/// line per vertex.
pub fn write_graph<W: Write>(mut w: W, g: &Graph) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "graph {} {}", g.num_vertices(), g.base()).unwrap();
    for (u, v) in g.edges() {
        writeln!(s, "{u} {v}").unwrap();
    }
    for (v, wl) in g.word_lengths().iter().enumerate() {
        writeln!(s, "wl {v} {wl}").unwrap();
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

/// Reads the graph format. Blank lines and lines starting with `#` are
/// ignored. Word lengths must be given for every vertex or for none; in the
/// latter case they are computed by BFS from the base vertex.
pub fn read_graph<R: BufRead>(r: R) -> Result<Graph> {
    let mut header: Option<(usize, Vertex)> = None;
    let mut edges = Vec::new();
    let mut wl: BTreeMap<Vertex, u32> = BTreeMap::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num =
            |s: &str| s.parse::<usize>().map_err(|_| format_error(lineno, format!("expected an integer, got {s:?}")));
        match fields.as_slice() {
            ["graph", n, base] => {
                if header.is_some() {
                    return Err(format_error(lineno, "duplicate header"));
                }
                header = Some((num(n)?, num(base)?));
            }
            _ if header.is_none() => return Err(format_error(lineno, "expected `graph <num_vertices> <base>`")),
            ["wl", v, value] => {
                let value =
                    value.parse::<u32>().map_err(|_| format_error(lineno, format!("bad word length {value:?}")))?;
                if wl.insert(num(v)?, value).is_some() {
                    return Err(format_error(lineno, format!("word length of {v} given twice")));
                }
            }
            [u, v] => edges.push((num(u)?, num(v)?)),
            _ => return Err(format_error(lineno, format!("unrecognised line {line:?}"))),
        }
    }
    let (n, base) = header.ok_or_else(|| CliError::Format("missing `graph` header".into()))?;
    let word_length = if wl.is_empty() {
        None
    } else {
        if wl.len() != n || wl.keys().next_back() != Some(&(n - 1)) {
            return Err(CliError::Format(format!("word lengths given for {} of {n} vertices", wl.len())));
        }
        Some(wl.into_values().collect())
    };
    Ok(Graph::from_edges(n, base, &edges, word_length, None)?)
}

/// `vertex,label` rows for a Cayley ball.
pub fn write_labels<W: Write>(w: W, labels: &[Element]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["vertex", "label"])?;
    for (v, x) in labels.iter().enumerate() {
        out.write_record([v.to_string(), x.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_vertex_function<W: Write>(w: W, f: &VertexFunction) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["vertex", "value"])?;
    for (v, &x) in f.values().iter().enumerate() {
        out.write_record([v.to_string(), float(x)])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads `vertex,value` rows into a map; duplicate vertices are rejected.
pub fn read_vertex_values<R: Read>(r: R) -> Result<BTreeMap<Vertex, f64>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    check_header(&mut rdr, &["vertex", "value"])?;
    let mut out = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let v: Vertex = parse_field(&rec, 0, line)?;
        let x: f64 = parse_field(&rec, 1, line)?;
        if out.insert(v, x).is_some() {
            return Err(format_error(line, format!("vertex {v} listed twice")));
        }
    }
    Ok(out)
}

/// Reads a function defined on every vertex `0..n`.
pub fn read_vertex_function<R: Read>(r: R, n: usize) -> Result<VertexFunction> {
    let map = read_vertex_values(r)?;
    if map.len() != n || map.keys().next_back() != Some(&(n.wrapping_sub(1))) {
        return Err(CliError::Format(format!("expected values for vertices 0..{n}, got {} rows", map.len())));
    }
    Ok(VertexFunction::new(map.into_values().collect())?)
}

/// One row per undirected edge with `u < v`; the reverse arc carries the
/// negated value.
pub fn write_edge_chain<W: Write>(w: W, c: &EdgeChain, g: &Graph) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["u", "v", "value"])?;
    for (u, v) in g.edges() {
        let x = c.get(g, u, v).expect("edge of the graph");
        out.write_record([u.to_string(), v.to_string(), float(x)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_edge_chain<R: Read>(r: R, g: &Graph) -> Result<EdgeChain> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    check_header(&mut rdr, &["u", "v", "value"])?;
    let mut entries = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        entries.push((parse_field(&rec, 0, line)?, parse_field(&rec, 1, line)?, parse_field(&rec, 2, line)?));
    }
    Ok(EdgeChain::from_oriented(g, &entries)?)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(format_error(1, format!("expected header {}", expected.join(","))));
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    let raw = rec.get(idx).ok_or_else(|| format_error(line, "missing field"))?;
    raw.parse().map_err(|_| format_error(line, format!("cannot parse {raw:?}")))
}

#[derive(Debug, Serialize)]
pub struct EnergyReportJson {
    pub p: f64,
    pub energy: f64,
    pub max_residual: Option<f64>,
    pub iterations: usize,
    pub ill_conditioned: bool,
}

impl From<&EnergyReport> for EnergyReportJson {
    fn from(r: &EnergyReport) -> Self {
        EnergyReportJson {
            p: r.p,
            energy: r.energy,
            max_residual: r.max_residual,
            iterations: r.iterations,
            ill_conditioned: r.ill_conditioned,
        }
    }
}

/// One line per `n`: the index followed by the members' normal forms.
pub fn write_folner_sets<W: Write>(mut w: W, sets: &[Vec<Element>]) -> Result<()> {
    let mut s = String::new();
    for (i, set) in sets.iter().enumerate() {
        write!(s, "{}", i + 1).unwrap();
        for x in set {
            write!(s, " {x}").unwrap();
        }
        s.push('\n');
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

/// Reads sets written by [`write_folner_sets`]; the indices must run
/// `1, 2, …` in order.
pub fn read_folner_sets<R: BufRead>(r: R, spec: &GroupSpec) -> Result<Vec<Vec<Element>>> {
    let mut sets = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let n: usize =
            fields.next().and_then(|s| s.parse().ok()).ok_or_else(|| format_error(i + 1, "expected the set index"))?;
        if n != sets.len() + 1 {
            return Err(format_error(i + 1, format!("expected set {}, found {n}", sets.len() + 1)));
        }
        let set = fields.map(|s| spec.parse_element(s)).collect::<lpcoh_core::Result<Vec<_>>>()?;
        sets.push(set);
    }
    Ok(sets)
}

#[derive(Debug, Serialize)]
pub struct FolnerRow {
    pub n: usize,
    pub max_ratio: String,
    pub containment: bool,
    pub controlled: bool,
}

/// Certificate with exact rationals written as `a/b` strings.
#[derive(Debug, Serialize)]
pub struct CertificateJson {
    #[serde(rename = "C")]
    pub c: String,
    pub pass: bool,
    pub per_n: Vec<FolnerRow>,
}

impl From<&ControlCertificate> for CertificateJson {
    fn from(cert: &ControlCertificate) -> Self {
        CertificateJson {
            c: cert.constant.to_string(),
            pass: cert.pass,
            per_n: cert
                .per_n
                .iter()
                .map(|row| FolnerRow {
                    n: row.n,
                    max_ratio: row.max_ratio.to_string(),
                    containment: row.containment,
                    controlled: row.controlled,
                })
                .collect(),
        }
    }
}

pub fn write_profile<W: Write>(w: W, profile: &SublinearityProfile) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "max_norm", "ratio", "tail_bound"])?;
    for row in &profile.rows {
        out.write_record([row.n.to_string(), float(row.max_norm), float(row.ratio), float(row.tail_bound)])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct HyperbolicCertificateJson {
    pub p: f64,
    pub q: f64,
    pub depth: u32,
    pub coupling: f64,
    pub flow_norm_q: f64,
    pub lower_bound: f64,
}

impl From<&NonvanishingCertificate> for HyperbolicCertificateJson {
    fn from(c: &NonvanishingCertificate) -> Self {
        HyperbolicCertificateJson {
            p: c.p,
            q: c.q,
            depth: c.depth,
            coupling: c.coupling,
            flow_norm_q: c.flow_norm_q,
            lower_bound: c.lower_bound,
        }
    }
}
