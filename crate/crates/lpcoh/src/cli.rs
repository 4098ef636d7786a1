//! Subcommands.
//!
//! Every command resolves its parameters through [`Resolver`] and embeds the
//! result, seed included, in the JSON it prints. Nothing time- or
//! environment-dependent goes into a report, so repeated invocations produce
//! identical bytes.

use std::{
    collections::BTreeMap,
    fs::File,
    io::{BufReader, BufWriter, Write},
    path::{Path, PathBuf},
};

use clap::{Args, Parser, Subcommand};
use lpcoh_core::{
    build_cayley_ball,
    cocycle::{sublinearity_profile, Cocycle, GroupFunction, RegularRepVector, DEFAULT_TRUNCATION},
    dirichlet::{conjugate_exponent, solve_p_harmonic_with, sphere_boundary, SolveOptions, SolverMethod},
    folner::{folner_lamplighter, folner_zd, verify_controlled, FolnerSequence},
    func::ClosedForm,
    graph::estimate_hyperbolicity,
    hyperbolic::{build_tree_ball, nonvanishing_certificate, unit_flow_cycle},
    Element, GroupKind, GroupSpec, DEFAULT_VERTEX_BUDGET,
};
use num_rational::Ratio;
use serde::Serialize;
use serde_json::Value;

use crate::{
    config::{ConfigFile, Resolver},
    io, CliError, Result,
};

#[derive(Debug, Parser)]
#[command(name = "lpcoh", version, about = "Experiments on discrete L^p-cohomology of Cayley graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    /// Flat key=value file; explicit flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Largest number of vertices any constructed ball may have.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Seed recorded in the report; required by sampled estimators.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output path for the command's main artifact (stdout if omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a Cayley ball and write it in the graph file format.
    Cayley {
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        radius: Option<u32>,
        /// Also write a `vertex,label` CSV of normal forms.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Solve a Dirichlet problem for the p-Laplacian on a graph file.
    Harmonic {
        #[arg(long)]
        graph: Option<PathBuf>,
        /// `vertex,value` CSV of fixed values.
        #[arg(long)]
        boundary: Option<PathBuf>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// auto, coordinate or irls.
        #[arg(long)]
        method: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Solve on growing balls and report how much the solution oscillates
    /// near the identity.
    Liouville {
        #[arg(long)]
        group: Option<String>,
        /// Largest radius.
        #[arg(long)]
        radius: Option<u32>,
        #[arg(long)]
        min_radius: Option<u32>,
        #[arg(long)]
        step: Option<u32>,
        /// Radius of the inner ball whose oscillation is measured.
        #[arg(long)]
        inner: Option<u32>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// angle or constant.
        #[arg(long)]
        boundary: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Construct (or read) a Følner sequence and certify its control constant.
    Folner {
        #[arg(long)]
        group: Option<String>,
        /// Number of sets N.
        #[arg(long)]
        max_n: Option<usize>,
        /// Constant to certify, as an integer or fraction; defaults to the
        /// construction's own.
        #[arg(long)]
        c: Option<String>,
        /// Read the sets from a Følner file instead of constructing them.
        #[arg(long)]
        from: Option<PathBuf>,
        /// Also write the sets as a Følner file.
        #[arg(long)]
        sets: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Norm profile of a coboundary cocycle, as CSV.
    Sublinearity {
        #[arg(long)]
        group: Option<String>,
        /// delta, radial:ALPHA or signed-power:ALPHA.
        #[arg(long)]
        function: Option<String>,
        #[arg(long)]
        max_n: Option<u32>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        truncation: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Non-vanishing certificate on a ball of the 3-regular tree.
    Certificate {
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        p: Option<f64>,
        /// Also write the tree ball in the graph file format.
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Also write the unit flow as an edge-chain CSV.
        #[arg(long)]
        flow: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Sampled four-point hyperbolicity of a Cayley ball.
    Hyperbolicity {
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        radius: Option<u32>,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    config: BTreeMap<String, Value>,
    #[serde(flatten)]
    result: T,
}

/// Resolves the shared flags and holds the output target.
struct Context {
    resolver: Resolver,
    budget: usize,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

impl Context {
    fn new(common: Common, seed_required: bool) -> Result<Self> {
        let file = match &common.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let mut resolver = Resolver::new(file);
        let budget = resolver.value("budget", common.budget, DEFAULT_VERTEX_BUDGET)?;
        if budget == 0 {
            return Err(CliError::Invalid("budget must be positive".into()));
        }
        let seed = if seed_required {
            Some(resolver.required("seed", common.seed)?)
        } else {
            Some(resolver.value("seed", common.seed, 0)?)
        };
        let out = resolver.optional("out", common.out)?;
        Ok(Context { resolver, budget, seed, out })
    }

    fn report<T: Serialize>(self, command: &str, result: T) -> Result<(Vec<u8>, Option<PathBuf>)> {
        let report = Report { command, config: self.resolver.finish()?, result };
        let mut bytes = serde_json::to_vec_pretty(&report).expect("reports serialise");
        bytes.push(b'\n');
        Ok((bytes, self.out))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Writes `artifact` to `out` (or `stdout`); if it went to a file, the JSON
/// summary is printed instead.
fn emit(stdout: &mut dyn Write, out: Option<&Path>, artifact: &[u8], summary: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            write_file(path, |w| Ok(w.write_all(artifact)?))?;
            stdout.write_all(summary)?;
        }
        None => stdout.write_all(artifact)?,
    }
    Ok(())
}

fn emit_json(stdout: &mut dyn Write, out: Option<&Path>, report: &[u8]) -> Result<()> {
    match out {
        Some(path) => write_file(path, |w| Ok(w.write_all(report)?)),
        None => Ok(stdout.write_all(report)?),
    }
}

/// Parses `z<d>`, `lamplighter` or `free<k>`.
pub fn parse_group(s: &str) -> Result<GroupSpec> {
    let bad = || CliError::Invalid(format!("unknown group {s:?}; expected z<d>, lamplighter or free<k>"));
    let kind = if s == "lamplighter" {
        GroupKind::Lamplighter
    } else if let Some(d) = s.strip_prefix('z') {
        GroupKind::Zd(d.parse().map_err(|_| bad())?)
    } else if let Some(k) = s.strip_prefix("free") {
        GroupKind::FreeGroup(k.parse().map_err(|_| bad())?)
    } else {
        return Err(bad());
    };
    Ok(GroupSpec::new(kind)?)
}

fn check_exponent(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("p = {p} must satisfy 1 < p < ∞")))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("tolerance {tol} must be positive")))
    }
}

fn parse_method(s: &str) -> Result<SolverMethod> {
    match s {
        "auto" => Ok(SolverMethod::Auto),
        "coordinate" => Ok(SolverMethod::CoordinateDescent),
        "irls" => Ok(SolverMethod::DampedIrls),
        _ => Err(CliError::Invalid(format!("unknown method {s:?}; expected auto, coordinate or irls"))),
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Cayley { group, radius, labels, common } => {
            let mut cx = Context::new(common, false)?;
            let group_name: String = cx.resolver.required("group", group)?;
            let radius: u32 = cx.resolver.required("radius", radius)?;
            let labels = cx.resolver.optional("labels", labels)?;
            let spec = parse_group(&group_name)?;
            let ball = build_cayley_ball(&spec, radius, cx.budget)?;
            if let Some(path) = &labels {
                write_file(path, |w| io::write_labels(w, &ball.labels))?;
            }
            let mut graph = Vec::new();
            io::write_graph(&mut graph, &ball.graph)?;
            #[derive(Serialize)]
            struct Summary {
                vertices: usize,
                edges: usize,
            }
            let summary = Summary { vertices: ball.len(), edges: ball.graph.num_edges() };
            let (json, out) = cx.report("cayley", summary)?;
            emit(stdout, out.as_deref(), &graph, &json)
        }
        Command::Harmonic { graph, boundary, p, tol, max_iter, method, common } => {
            let mut cx = Context::new(common, false)?;
            let graph_path: PathBuf = cx.resolver.required("graph", graph)?;
            let boundary_path: PathBuf = cx.resolver.required("boundary", boundary)?;
            let p: f64 = cx.resolver.value("p", p, 2.0)?;
            check_exponent(p)?;
            let tol: f64 = cx.resolver.value("tol", tol, SolveOptions::default_tol(p))?;
            check_tol(tol)?;
            let max_iter: usize = cx.resolver.value("max-iter", max_iter, SolveOptions::default().max_iter)?;
            let method: String = cx.resolver.value("method", method, "auto".to_string())?;
            let method = parse_method(&method)?;
            let g = io::read_graph(open(&graph_path)?)?;
            let values = io::read_vertex_values(open(&boundary_path)?)?;
            let (f, report) =
                solve_p_harmonic_with(&g, &values, p, &SolveOptions { tol: Some(tol), max_iter, method })?;
            let mut csv = Vec::new();
            io::write_vertex_function(&mut csv, &f)?;
            let (json, out) = cx.report("harmonic", io::EnergyReportJson::from(&report))?;
            match out {
                Some(path) => emit(stdout, Some(&path), &csv, &json),
                None => {
                    // keep stdout a clean CSV; the report goes to stderr
                    std::io::stderr().write_all(&json)?;
                    emit(stdout, None, &csv, &json)
                }
            }
        }
        Command::Liouville { group, radius, min_radius, step, inner, p, tol, max_iter, boundary, common } => {
            let mut cx = Context::new(common, false)?;
            let group_name: String = cx.resolver.required("group", group)?;
            let max_r: u32 = cx.resolver.value("radius", radius, 16)?;
            let min_r: u32 = cx.resolver.value("min-radius", min_radius, 4)?;
            let step: u32 = cx.resolver.value("step", step, 2)?;
            let inner: u32 = cx.resolver.value("inner", inner, 2)?;
            let p: f64 = cx.resolver.value("p", p, 2.0)?;
            check_exponent(p)?;
            let tol: f64 = cx.resolver.value("tol", tol, SolveOptions::default_tol(p))?;
            check_tol(tol)?;
            let max_iter: usize = cx.resolver.value("max-iter", max_iter, SolveOptions::default().max_iter)?;
            let data: String = cx.resolver.value("boundary", boundary, "angle".to_string())?;
            let spec = parse_group(&group_name)?;
            if step == 0 || min_r > max_r || inner >= min_r {
                return Err(CliError::Invalid(format!(
                    "need inner < min-radius ≤ radius and step ≥ 1 (got {inner}, {min_r}, {max_r}, {step})"
                )));
            }
            let data = BoundaryData::parse(&data)?;
            let mut rows = Vec::new();
            for r in (min_r..=max_r).step_by(step as usize) {
                let ball = build_cayley_ball(&spec, r, cx.budget)?;
                let values = sphere_boundary(&ball.graph, |v| data.eval(ball.label(v)))?;
                let opts = SolveOptions { tol: Some(tol), max_iter, method: SolverMethod::Auto };
                let (f, report) = solve_p_harmonic_with(&ball.graph, &values, p, &opts)?;
                let boundary_osc = oscillation(values.values().copied());
                let interior_osc =
                    oscillation((0..ball.len()).filter(|&v| ball.graph.word_length(v) <= inner).map(|v| f.get(v)));
                rows.push(LiouvilleRow {
                    radius: r,
                    vertices: ball.len(),
                    iterations: report.iterations,
                    energy: report.energy,
                    boundary_oscillation: boundary_osc,
                    interior_oscillation: interior_osc,
                    normalized: if boundary_osc > 0.0 { interior_osc / boundary_osc } else { 0.0 },
                });
            }
            #[derive(Serialize)]
            struct Result {
                rows: Vec<LiouvilleRow>,
            }
            let (json, out) = cx.report("liouville", Result { rows })?;
            emit_json(stdout, out.as_deref(), &json)
        }
        Command::Folner { group, max_n, c, from, sets, common } => {
            let mut cx = Context::new(common, false)?;
            let group_name: String = cx.resolver.required("group", group)?;
            let max_n: usize = cx.resolver.value("max-n", max_n, 16)?;
            let c: Option<String> = cx.resolver.optional("c", c)?;
            let from: Option<PathBuf> = cx.resolver.optional("from", from)?;
            let sets_out: Option<PathBuf> = cx.resolver.optional("sets", sets)?;
            let spec = parse_group(&group_name)?;
            let c = c
                .map(|s| s.parse::<Ratio<u64>>().map_err(|_| CliError::Invalid(format!("cannot parse constant {s:?}"))))
                .transpose()?;
            let seq = match &from {
                Some(path) => {
                    let sets = io::read_folner_sets(open(path)?, &spec)?;
                    let c = c.ok_or_else(|| CliError::Invalid("--c is required with --from".into()))?;
                    FolnerSequence::new(spec, sets, c)?
                }
                None => match spec.kind() {
                    GroupKind::Zd(d) => folner_zd(d, max_n, cx.budget)?,
                    GroupKind::Lamplighter => folner_lamplighter(max_n, cx.budget)?,
                    GroupKind::FreeGroup(_) => {
                        return Err(CliError::Invalid("free groups are not amenable: no Følner sequence".into()))
                    }
                },
            };
            if let Some(path) = &sets_out {
                write_file(path, |w| io::write_folner_sets(w, &seq.sets))?;
            }
            let cert = verify_controlled(&seq, c.unwrap_or(seq.constant))?;
            let (json, out) = cx.report("folner", io::CertificateJson::from(&cert))?;
            emit_json(stdout, out.as_deref(), &json)
        }
        Command::Sublinearity { group, function, max_n, p, truncation, common } => {
            let mut cx = Context::new(common, false)?;
            let group_name: String = cx.resolver.required("group", group)?;
            let function: String = cx.resolver.required("function", function)?;
            let max_n: u32 = cx.resolver.value("max-n", max_n, 64)?;
            let p: f64 = cx.resolver.value("p", p, 2.0)?;
            check_exponent(p)?;
            let truncation: u32 = cx.resolver.value("truncation", truncation, DEFAULT_TRUNCATION)?;
            let spec = parse_group(&group_name)?;
            let f = parse_function(&function, &spec)?;
            let b = Cocycle::coboundary(&spec, f)?;
            let profile = sublinearity_profile(&b, max_n, p, truncation)?;
            let mut csv = Vec::new();
            io::write_profile(&mut csv, &profile)?;
            #[derive(Serialize)]
            struct Summary {
                rows: usize,
                final_ratio: Option<f64>,
                max_tail_bound: f64,
            }
            let summary = Summary {
                rows: profile.rows.len(),
                final_ratio: profile.rows.last().map(|r| r.ratio),
                max_tail_bound: profile.rows.iter().map(|r| r.tail_bound).fold(0.0, f64::max),
            };
            let (json, out) = cx.report("sublinearity", summary)?;
            emit(stdout, out.as_deref(), &csv, &json)
        }
        Command::Certificate { depth, p, tree, flow, common } => {
            let mut cx = Context::new(common, false)?;
            let depth: u32 = cx.resolver.value("depth", depth, 10)?;
            let p: f64 = cx.resolver.value("p", p, 4.0)?;
            check_exponent(p)?;
            let tree_out: Option<PathBuf> = cx.resolver.optional("tree", tree)?;
            let flow_out: Option<PathBuf> = cx.resolver.optional("flow", flow)?;
            let t = build_tree_ball(depth, cx.budget)?;
            let cert = nonvanishing_certificate(&t, p)?;
            if let Some(path) = &tree_out {
                write_file(path, |w| io::write_graph(w, &t.graph))?;
            }
            if let Some(path) = &flow_out {
                let s = unit_flow_cycle(&t, conjugate_exponent(p)?)?;
                write_file(path, |w| io::write_edge_chain(w, &s.chain, &t.graph))?;
            }
            let (json, out) = cx.report("certificate", io::HyperbolicCertificateJson::from(&cert))?;
            emit_json(stdout, out.as_deref(), &json)
        }
        Command::Hyperbolicity { group, radius, samples, common } => {
            let mut cx = Context::new(common, true)?;
            let group_name: String = cx.resolver.required("group", group)?;
            let radius: u32 = cx.resolver.required("radius", radius)?;
            let samples: usize = cx.resolver.value("samples", samples, 10_000)?;
            let spec = parse_group(&group_name)?;
            let seed = cx.seed.expect("seed resolved as required");
            let ball = build_cayley_ball(&spec, radius, cx.budget)?;
            let delta = estimate_hyperbolicity(&ball.graph, samples, seed)?;
            #[derive(Serialize)]
            struct Summary {
                vertices: usize,
                delta: f64,
            }
            let (json, out) = cx.report("hyperbolicity", Summary { vertices: ball.len(), delta })?;
            emit_json(stdout, out.as_deref(), &json)
        }
    }
}

#[derive(Debug, Serialize)]
struct LiouvilleRow {
    radius: u32,
    vertices: usize,
    iterations: usize,
    energy: f64,
    boundary_oscillation: f64,
    interior_oscillation: f64,
    normalized: f64,
}

fn oscillation(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo <= hi {
        hi - lo
    } else {
        0.0
    }
}

/// Boundary data for the Liouville experiment, as a function on the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BoundaryData {
    /// Degree-zero data. On ℤ^d this is `x₁/|x|₁`; on the lamplighter the
    /// cursor divided by the largest `|position|` among lamps and cursor; on
    /// free groups the indicator of words starting with `a`.
    Angle,
    Constant,
}

impl BoundaryData {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "angle" => Ok(BoundaryData::Angle),
            "constant" => Ok(BoundaryData::Constant),
            _ => Err(CliError::Invalid(format!("unknown boundary data {s:?}; expected angle or constant"))),
        }
    }

    fn eval(self, x: &Element) -> f64 {
        if self == BoundaryData::Constant {
            return 1.0;
        }
        match x {
            Element::Lattice(v) => {
                let r: i64 = v.iter().map(|c| c.abs()).sum();
                if r == 0 {
                    0.0
                } else {
                    v[0] as f64 / r as f64
                }
            }
            Element::Lamplighter { lamps, cursor } => {
                let reach = lamps.iter().chain([cursor, &0]).map(|c| c.abs()).max().unwrap_or(0);
                if reach == 0 {
                    0.0
                } else {
                    *cursor as f64 / reach as f64
                }
            }
            Element::Word(w) => f64::from(u8::from(w.first() == Some(&1))),
        }
    }
}

fn parse_function(s: &str, spec: &GroupSpec) -> Result<GroupFunction> {
    let exponent =
        |a: &str| a.parse::<f64>().map_err(|_| CliError::Invalid(format!("cannot parse exponent {a:?} in {s:?}")));
    match s.split_once(':') {
        None if s == "delta" => Ok(GroupFunction::Finite(RegularRepVector::delta(spec.identity()))),
        Some(("radial", a)) => Ok(GroupFunction::Closed(ClosedForm::radial(1.0, exponent(a)?)?)),
        Some(("signed-power", a)) => Ok(GroupFunction::Closed(ClosedForm::signed_power(1.0, exponent(a)?)?)),
        _ => Err(CliError::Invalid(format!(
            "unknown function {s:?}; expected delta, radial:ALPHA or signed-power:ALPHA"
        ))),
    }
}
