//! `kcut`: bounds, exact values, the Kravchuk conjecture grid and the
//! acceptance suite from the command line.
//!
//! Exit codes: 0 success, 1 failed acceptance checks, 2 invalid input,
//! 3 solver failure, 4 work cap exceeded.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kcut_core::bounds::{self, BoundReport, SrgParameters};
use kcut_core::hamming;
use kcut_core::io::{read_graph, GraphFormat};
use kcut_core::oracle;
use kcut_core::relax::{self, CutOptions, RelaxationKind};
use kcut_core::reproduce::{self, ReproduceOptions};
use kcut_core::sdp::{self, Residuals, SolverOptions};
use kcut_core::{catalogue, Error, Graph};
use serde::Deserialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "kcut", version, about = "Eigenvalue and SDP bounds for max-k-cut and the chromatic number")]
struct Cli {
    /// TOML file with solver settings (tol_eq, tol_psd, tol_gap, max_iter, ...).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one bound for a graph.
    Bound {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        json: bool,
    },
    /// Exact max-k-cut by enumeration.
    Exact {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        k: usize,
        /// Refuse enumerations larger than this many partitions.
        #[arg(long, default_value_t = oracle::DEFAULT_WORK_CAP)]
        cap: f64,
        #[arg(long)]
        json: bool,
    },
    /// Check min_i K_j(i) = K_j(1) over a grid of Hamming schemes.
    Conjecture {
        #[arg(long)]
        dmax: usize,
        #[arg(long)]
        qmax: usize,
        /// Write the per-(d, q, j) rows as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Reproduce {
        /// Run only these criteria (by name or number).
        #[arg(long)]
        only: Vec<String>,
        /// Time budget for the Hamming SDP solves, in seconds.
        #[arg(long, default_value_t = 120.0)]
        hamming_budget: f64,
        /// Print each check, not just the summary lines.
        #[arg(long, short)]
        verbose: bool,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct GraphArgs {
    /// Graph file.
    #[arg(conflicts_with = "family")]
    file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FileFormat::EdgeList)]
    format: FileFormat,
    /// Named family followed by its integer parameters, e.g. `--family kneser 6 2`.
    #[arg(long, num_args = 1.., value_name = "NAME PARAMS")]
    family: Option<Vec<String>>,
    /// Delete the lexicographically first edge.
    #[arg(long)]
    minus_edge: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FileFormat {
    EdgeList,
    Dimacs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Eig,
    Perturbed,
    Sdp,
    #[value(name = "sdp+triangles")]
    SdpTriangles,
    #[value(name = "sdp+indep")]
    SdpIndep,
    Chromatic,
    Hoffman,
    Srg,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Eig => "eig",
            Method::Perturbed => "perturbed",
            Method::Sdp => "sdp",
            Method::SdpTriangles => "sdp+triangles",
            Method::SdpIndep => "sdp+indep",
            Method::Chromatic => "chromatic",
            Method::Hoffman => "hoffman",
            Method::Srg => "srg",
        }
    }
}

/// Solver settings readable from the config file; absent keys keep defaults.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverConfig {
    max_iter: Option<usize>,
    tol_eq: Option<f64>,
    tol_psd: Option<f64>,
    tol_gap: Option<f64>,
    rho: Option<f64>,
    sigma: Option<f64>,
    relaxation: Option<f64>,
    adaptive_rho: Option<bool>,
    check_every: Option<usize>,
    max_order: Option<usize>,
    time_limit: Option<f64>,
}

impl SolverConfig {
    fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }

    fn apply(&self, mut o: SolverOptions) -> SolverOptions {
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { o.$field = v; } )* };
        }
        set!(max_iter, tol_eq, tol_psd, tol_gap, rho, sigma, relaxation, adaptive_rho, check_every, max_order);
        if self.time_limit.is_some() {
            o.time_limit = self.time_limit;
        }
        o
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn solver(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded { .. } => 4,
            Error::Solver(_) | Error::NoConvergence { .. } => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn load_graph(args: &GraphArgs) -> Result<(Graph, String), Failure> {
    let (mut g, mut label) = match (&args.family, &args.file) {
        (Some(family), _) => {
            let (name, rest) = family.split_first().ok_or_else(|| Failure::input("--family needs a name"))?;
            let params = rest
                .iter()
                .map(|p| p.parse::<usize>().map_err(|_| Failure::input(format!("invalid family parameter `{p}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            (catalogue::named_graph(name, &params)?, family.join(" "))
        }
        (None, Some(path)) => {
            let file = File::open(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            let format = match args.format {
                FileFormat::EdgeList => GraphFormat::EdgeList,
                FileFormat::Dimacs => GraphFormat::Dimacs,
            };
            (read_graph(BufReader::new(file), format)?, path.display().to_string())
        }
        (None, None) => return Err(Failure::input("give a graph file or --family")),
    };
    if args.minus_edge {
        let (i, j, _) = g.edges().next().ok_or_else(|| Failure::input("--minus-edge on an edgeless graph"))?;
        g = g.without_edge(i, j)?;
        label.push_str(" minus an edge");
    }
    Ok((g, label))
}

fn require_k(k: Option<usize>, method: Method) -> Result<usize, Failure> {
    k.ok_or_else(|| Failure::input(format!("--k is required for method {}", method.name())))
}

struct Computed {
    value: f64,
    report: Option<BoundReport>,
    residuals: Option<Residuals>,
    status: Option<String>,
}

fn compute_bound(g: &Graph, k: Option<usize>, method: Method, solver: &SolverOptions) -> Result<Computed, Failure> {
    let closed =
        |report: BoundReport| Computed { value: report.value, report: Some(report), residuals: None, status: None };
    let solved = |sol: sdp::SdpSolution| Computed {
        value: sol.objective_value,
        report: None,
        status: Some(format!("{:?}", sol.status).to_lowercase()),
        residuals: Some(sol.residuals),
    };
    match method {
        Method::Eig => Ok(closed(bounds::eigenvalue_bound(g, require_k(k, method)?)?)),
        Method::Chromatic => Ok(closed(bounds::chromatic_lower_bound(g)?)),
        Method::Hoffman => Ok(closed(bounds::hoffman_bound(g)?)),
        Method::Srg => {
            let params = SrgParameters::from_graph(g).ok_or_else(|| Failure::input("graph is not strongly regular"))?;
            Ok(closed(bounds::srg_sdp_bound(&params, require_k(k, method)?)?))
        }
        Method::Perturbed | Method::Sdp => {
            let kind = if method == Method::Sdp { RelaxationKind::MainSdp } else { RelaxationKind::PerturbedSdp };
            Ok(solved(sdp::solve(&relax::build(g, require_k(k, method)?, kind)?, solver)?))
        }
        Method::SdpTriangles | Method::SdpIndep => {
            let cuts = if method == Method::SdpTriangles {
                CutOptions::all_triangles()
            } else {
                CutOptions::all_triangles().with_independent_sets()
            };
            let result = relax::cutting_plane_loop(g, require_k(k, method)?, RelaxationKind::MainSdp, &cuts, solver)?;
            Ok(solved(result.solution))
        }
    }
}

fn run_bound(
    graph: &GraphArgs,
    k: Option<usize>,
    method: Method,
    json: bool,
    solver: &SolverOptions,
) -> Result<(), Failure> {
    let (g, label) = load_graph(graph)?;
    let started = Instant::now();
    let computed = compute_bound(&g, k, method, solver)?;
    let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
    let k_out = if matches!(method, Method::Chromatic | Method::Hoffman) { None } else { k };
    if json {
        let mut out = json!({
            "graph": label,
            "k": k_out,
            "method": method.name(),
            "value": computed.value,
            "residuals": computed.residuals,
            "runtime_ms": runtime_ms,
        });
        if let Some(report) = &computed.report {
            out["report"] = serde_json::to_value(report).expect("report serialises");
        }
        if let Some(status) = &computed.status {
            out["status"] = json!(status);
        }
        println!("{}", serde_json::to_string_pretty(&out).expect("json serialises"));
    } else {
        println!("graph:   {label} (n = {})", g.n());
        if let Some(k) = k_out {
            println!("k:       {k}");
        }
        println!("method:  {}", method.name());
        println!("value:   {:.4}", computed.value);
        if let Some(report) = &computed.report {
            if let Some(int) = report.integer_value {
                println!("integer: {int}");
            }
            for flag in &report.flags {
                println!("flag:    {flag}");
            }
        }
        if let Some(status) = &computed.status {
            println!("status:  {status}");
        }
        if let Some(r) = &computed.residuals {
            println!(
                "residuals: equality {:.1e}, cone min eigenvalue {:.1e}, lower bound {:.1e}, cuts {:.1e}",
                r.equality, r.cone_min_eigenvalue, r.lower_bound, r.cuts
            );
            if let Some(ub) = r.dual_bound {
                println!("certified upper bound: {ub:.4}");
            }
        }
        println!("runtime: {runtime_ms:.1} ms");
    }
    match computed.status.as_deref() {
        Some("optimal") | None => Ok(()),
        Some(other) => Err(Failure::solver(format!("solver stopped with status {other}"))),
    }
}

fn run_exact(graph: &GraphArgs, k: usize, cap: f64, json: bool) -> Result<(), Failure> {
    let (g, label) = load_graph(graph)?;
    let started = Instant::now();
    let exact = oracle::brute_force_maxkcut_with_cap(&g, k, cap)?;
    let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
    if json {
        let out = json!({
            "graph": label,
            "k": k,
            "method": "exact",
            "value": exact.value,
            "partition": exact.partition,
            "residuals": null,
            "runtime_ms": runtime_ms,
        });
        println!("{}", serde_json::to_string_pretty(&out).expect("json serialises"));
    } else {
        println!("graph:     {label} (n = {})", g.n());
        println!("k:         {k}");
        println!("value:     {:.4}", exact.value);
        let parts: Vec<String> = exact.partition.iter().map(usize::to_string).collect();
        println!("partition: {}", parts.join(" "));
        println!("runtime:   {runtime_ms:.1} ms");
    }
    Ok(())
}

fn run_conjecture(dmax: usize, qmax: usize, out: Option<&Path>) -> Result<(), Failure> {
    if dmax == 0 || qmax < 2 {
        return Err(Failure::input("need --dmax ≥ 1 and --qmax ≥ 2"));
    }
    let grid = hamming::conjecture_grid(dmax, qmax, reproduce::default_threads());
    if let Some(path) = out {
        let file = File::create(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        let io_err = |e: std::io::Error| Failure::input(format!("{}: {e}", path.display()));
        writeln!(w, "d,q,j,K_j(1),min_i K_j(i),argmin i,pass").map_err(io_err)?;
        for report in &grid {
            for row in report.rows.iter().filter(|r| r.in_hypothesis) {
                writeln!(w, "{},{},{},{},{},{},{}", row.d, row.q, row.j, row.k_j1, row.min_value, row.argmin, row.pass)
                    .map_err(io_err)?;
            }
        }
        w.flush().map_err(io_err)?;
    }
    match grid.iter().find_map(|r| r.first_counterexample()) {
        None => println!("PASS d≤{dmax} q≤{qmax}"),
        Some(row) => println!(
            "FAIL at (d, q, j) = ({}, {}, {}): K_j(1) = {} but min K_j(i) = {} at i = {}",
            row.d, row.q, row.j, row.k_j1, row.min_value, row.argmin
        ),
    }
    Ok(())
}

fn run_reproduce(
    only: &[String],
    budget: f64,
    verbose: bool,
    json: bool,
    solver: SolverOptions,
) -> Result<bool, Failure> {
    let opts = ReproduceOptions { solver, hamming_sdp_budget: budget, ..ReproduceOptions::default() };
    let selected: Vec<String> = if only.is_empty() {
        reproduce::CRITERIA.iter().map(|(_, name)| name.to_string()).collect()
    } else {
        only.to_vec()
    };
    let mut reports = Vec::new();
    for name in &selected {
        let report = reproduce::run_criterion_by_name(name, &opts)?;
        if !json {
            if verbose {
                print!("{}", report.render());
            } else {
                println!("{}", report.summary_line());
            }
        }
        reports.push(report);
    }
    let passed = reports.iter().all(|r| r.passed());
    if json {
        println!("{}", serde_json::to_string_pretty(&reports).expect("json serialises"));
    } else {
        let ok = reports.iter().filter(|r| r.passed()).count();
        println!("{ok}/{} criteria pass", reports.len());
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.config.as_deref().map(SolverConfig::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(f) => {
            eprintln!("error: {}", f.message);
            return ExitCode::from(f.code);
        }
    };
    let outcome = match &cli.command {
        Command::Bound { graph, k, method, json } => {
            run_bound(graph, *k, *method, *json, &config.apply(SolverOptions::default())).map(|()| true)
        }
        Command::Exact { graph, k, cap, json } => run_exact(graph, *k, *cap, *json).map(|()| true),
        Command::Conjecture { dmax, qmax, out } => run_conjecture(*dmax, *qmax, out.as_deref()).map(|()| true),
        Command::Reproduce { only, hamming_budget, verbose, json } => {
            run_reproduce(only, *hamming_budget, *verbose, *json, config.apply(reproduce::acceptance_solver()))
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
