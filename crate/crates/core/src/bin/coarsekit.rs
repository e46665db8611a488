use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use coarsekit::config::{RunConfig, Stage, SweepRange, OUT_DIR_ENV};
use coarsekit::control::{classify_growth, ControlFunction, DEFAULT_GROWTH_TOLERANCE};
use coarsekit::error::{Error, Result};
use coarsekit::homology::{min_control_constant, ponzi_feasible, ponzi_sweep, verify_certificate, KSearch, Region};
use coarsekit::inequalities::{
    iso_constant, iso_sobolev_crosscheck, sobolev_constant, Method, SearchOptions, WeightMode,
};
use coarsekit::io;
use coarsekit::metric::{estimate_delta, generate_space_with, DeltaOptions, GenerateOptions, SpaceSpec};
use coarsekit::net::PointedNet;
use coarsekit::pipeline::{certificate_checks, measure_partition, partition_checks, run_pipeline, write_outputs};
use coarsekit::report::{Check, SpaceSummary};
use coarsekit::rips::RipsGraph;

const AFTER_HELP: &str = "\
Exit codes: 0 success, 1 usage, 2 I/O or malformed file, 3 size cap exceeded, 4 assertion failed.

Files:
  space, net, graph, certificate and report documents are JSON.
  edge CSV (rips build --edges): p,q,dist with p < q space point ids and their distance.
  sweep CSV (ponzi sweep, pipeline): R,K*,feasible_at_cap,runtime where R is the region radius,
    K* the minimal control constant (inf when infeasible at the cap), feasible_at_cap whether
    any K up to the cap was feasible, and runtime the wall-clock seconds of that radius.";

/// Coarse-geometric invariants of finite truncations of metric spaces.
#[derive(Parser)]
#[command(name = "coarsekit", version, after_help = AFTER_HELP)]
struct Cli {
    /// Directory for outputs written without an explicit path.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or inspect spaces.
    #[command(subcommand)]
    Space(SpaceCommand),
    /// Maximal ε-nets.
    #[command(subcommand)]
    Net(NetCommand),
    /// Rips graphs of nets.
    #[command(subcommand)]
    Rips(RipsCommand),
    /// Partition of unity checks.
    #[command(subcommand)]
    Partition(PartitionCommand),
    /// Constants of a control function, or a growth fit of a sweep.
    Control(ControlArgs),
    /// Controlled Ponzi schemes.
    #[command(subcommand)]
    Ponzi(PonziCommand),
    /// Weighted isoperimetric constant C* of a graph.
    Iso(IsoArgs),
    /// Weighted Sobolev constant D* of a graph.
    Sobolev(SobolevArgs),
    /// Gromov δ estimate of a space.
    Delta(DeltaArgs),
    /// Isoperimetric against Sobolev constants on one graph.
    Crosscheck(CrosscheckArgs),
    /// Run the space → net → rips → {partition, ponzi, iso, sobolev, delta, crosscheck} pipeline.
    Pipeline(PipelineArgs),
}

#[derive(Subcommand)]
enum SpaceCommand {
    /// Generate a built-in space and write its document.
    Gen {
        #[command(flatten)]
        space: SpaceArgs,
        /// Store the distance matrix in the document.
        #[arg(long)]
        distances: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Summarise a space document.
    Info { file: PathBuf },
}

#[derive(Args, Clone, Default)]
struct SpaceArgs {
    /// zn, free-group, tree, heisenberg-z, heisenberg-r-cloud, hyperbolic-disk, fan, ladder.
    #[arg(long)]
    kind: Option<String>,
    /// Full space descriptor as JSON, instead of --kind.
    #[arg(long, conflicts_with = "kind")]
    spec: Option<String>,
    /// Word radius; half width for heisenberg-r-cloud; disk radius for hyperbolic-disk.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 1)]
    dims: usize,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long, default_value_t = 3)]
    valency: usize,
    /// Sample size of the random kinds.
    #[arg(long, default_value_t = 500)]
    count: usize,
    #[arg(long, default_value_t = 4)]
    arms: usize,
    #[arg(long, default_value_t = 10)]
    points_per_arm: usize,
    #[arg(long, default_value_t = 4)]
    rungs: usize,
    #[arg(long, default_value_t = 4)]
    subdivisions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Refuse to generate more points than this.
    #[arg(long, default_value_t = GenerateOptions::default().max_points)]
    max_points: usize,
}

impl SpaceArgs {
    fn given(&self) -> bool {
        self.kind.is_some() || self.spec.is_some()
    }

    fn to_spec(&self) -> Result<SpaceSpec> {
        if let Some(json) = &self.spec {
            return serde_json::from_str(json).map_err(|e| usage(format!("malformed --spec: {e}")));
        }
        let kind = self
            .kind
            .as_deref()
            .ok_or_else(|| usage("--kind or --spec is required"))?;
        let radius = || self.radius.ok_or_else(|| usage(format!("{kind} needs --radius")));
        let word = || -> Result<u32> {
            let r = radius()?;
            if r < 0.0 || r.fract() != 0.0 || r > u32::MAX as f64 {
                return Err(usage(format!("{kind} needs a nonnegative integer --radius")));
            }
            Ok(r as u32)
        };
        Ok(match kind {
            "zn" => SpaceSpec::Zn {
                dims: self.dims,
                radius: word()?,
            },
            "free-group" => SpaceSpec::FreeGroup {
                rank: self.rank,
                radius: word()?,
            },
            "tree" => SpaceSpec::Tree {
                valency: self.valency,
                radius: word()?,
            },
            "heisenberg-z" => SpaceSpec::HeisenbergZ { radius: word()? },
            "heisenberg-r-cloud" => SpaceSpec::HeisenbergRCloud {
                count: self.count,
                half_width: radius()?,
                seed: self.seed,
            },
            "hyperbolic-disk" => SpaceSpec::HyperbolicDisk {
                count: self.count,
                max_radius: radius()?,
                seed: self.seed,
            },
            "fan" => SpaceSpec::Fan {
                arms: self.arms,
                points_per_arm: self.points_per_arm,
            },
            "ladder" => SpaceSpec::Ladder {
                rungs: self.rungs,
                subdivisions: self.subdivisions,
            },
            other => return Err(Error::UnknownKind(other.to_string())),
        })
    }

    fn generate(&self) -> Result<coarsekit::metric::FiniteMetricSpace> {
        generate_space_with(
            &self.to_spec()?,
            GenerateOptions {
                max_points: self.max_points,
            },
        )
    }
}

#[derive(Subcommand)]
enum NetCommand {
    /// Build the greedy maximal ε-net of a space, basepoint first.
    Build {
        #[arg(long)]
        eps: f64,
        space_file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum RipsCommand {
    /// Build the Rips graph of a net: edges between members at distance in (0, 3ε].
    Build {
        net_file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the edge list as CSV `p,q,dist`.
        #[arg(long)]
        edges: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PartitionCommand {
    /// Check Σφ = 1, the supports, and the Lipschitz bounds of the partition.
    Check {
        #[arg(long)]
        eps: f64,
        /// Sampled points for the sums, and near pairs for the Lipschitz bounds.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        space_file: PathBuf,
        net_file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ControlArgs {
    /// constant | affine:C | power:C,p | log:C | table:t1=r1;t2=r2;...
    #[arg(long, default_value = "constant")]
    rho: ControlFunction,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    /// Classify the growth of K*(R) in a sweep CSV instead.
    #[arg(long)]
    fit: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_GROWTH_TOLERANCE)]
    tolerance: f64,
}

#[derive(Subcommand)]
enum PonziCommand {
    /// K*(R) for ball regions R = rmin, rmin + step, ..., rmax; writes the sweep CSV.
    Sweep {
        #[arg(long, default_value = "constant")]
        rho: ControlFunction,
        #[arg(long)]
        rmin: f64,
        #[arg(long)]
        rmax: f64,
        #[arg(long)]
        step: f64,
        #[command(flatten)]
        search: KArgs,
        graph_file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the certificate at the largest radius with finite K*.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Verify a certificate against a graph.
    Verify { cert_file: PathBuf, graph_file: PathBuf },
}

#[derive(Args)]
struct KArgs {
    /// Relative bisection tolerance on K*.
    #[arg(long, default_value_t = KSearch::default().tol)]
    k_tol: f64,
    /// Largest K tried.
    #[arg(long, default_value_t = KSearch::default().cap)]
    k_cap: f64,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value = "constant")]
    rho: ControlFunction,
    /// Distance kept inside the truncation; 3ε when unset.
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long, default_value_t = coarsekit::inequalities::DEFAULT_MAX_EXACT_VERTICES)]
    max_exact: usize,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 10_000)]
    eta_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl SearchArgs {
    fn options(&self) -> SearchOptions {
        SearchOptions {
            margin: self.margin,
            max_exact_vertices: self.max_exact,
            restarts: self.restarts,
            eta_samples: self.eta_samples,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct IsoArgs {
    /// auto | exact | greedy
    #[arg(long, default_value = "auto")]
    mode: Method,
    #[command(flatten)]
    search: SearchArgs,
    graph_file: PathBuf,
}

#[derive(Args)]
struct SobolevArgs {
    /// counting | measure
    #[arg(long, default_value = "counting")]
    weights: WeightMode,
    /// auto | exact | parametric | greedy
    #[arg(long, default_value = "auto")]
    method: Method,
    #[command(flatten)]
    search: SearchArgs,
    graph_file: PathBuf,
}

#[derive(Args)]
struct DeltaArgs {
    #[arg(long, default_value_t = DeltaOptions::default().triples)]
    triples: usize,
    #[arg(long, default_value_t = DeltaOptions::default().exhaustive_threshold)]
    exhaustive_threshold: usize,
    /// Restrict to this many random points.
    #[arg(long)]
    subsample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    space_file: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CrosscheckArgs {
    #[command(flatten)]
    search: SearchArgs,
    graph_file: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    /// JSON run configuration; the flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    space: SpaceArgs,
    /// A space document, instead of --kind or --spec.
    #[arg(long, conflicts_with_all = ["kind", "spec"])]
    space_file: Option<PathBuf>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    rho: Option<ControlFunction>,
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Comma-separated stages to run.
    #[arg(long, value_delimiter = ',')]
    stages: Option<Vec<Stage>>,
    #[arg(long)]
    threads: Option<usize>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    dump_config: bool,
}

/// Envelope of the reports printed by single commands.
#[derive(Serialize)]
struct Output<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    result: &'a T,
    checks: &'a [Check],
    holds: bool,
}

/// Print a line to stdout; a closed pipe is not an error.
fn say(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn out_path(explicit: &Option<PathBuf>, out_dir: &Option<PathBuf>, default: &str) -> PathBuf {
    explicit
        .clone()
        .unwrap_or_else(|| out_dir.clone().unwrap_or_else(|| PathBuf::from(".")).join(default))
}

fn absolute(path: &Path) -> Result<PathBuf> {
    std::fs::canonicalize(path).map_err(|e| Error::io(path, e))
}

/// Print a report as JSON, also writing it when a path is given. Returns
/// the assertion error when a check fails.
fn emit<T: Serialize>(command: &str, result: &T, checks: &[Check], output: &Option<PathBuf>) -> Result<()> {
    let holds = checks.iter().all(|c| c.holds);
    let doc = Output {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        result,
        checks,
        holds,
    };
    if let Some(path) = output {
        io::write_json(path, &doc)?;
    }
    say(&serde_json::to_string_pretty(&doc).expect("report serializes"));
    if holds {
        Ok(())
    } else {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.holds).map(|c| c.name.as_str()).collect();
        Err(Error::Assertion(failed.join("; ")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("coarsekit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Pipeline(args) => pipeline(args, cli.out_dir),
        other => command(other, cli.out_dir).map(|()| 0),
    }
}

fn command(command: Command, out_dir: Option<PathBuf>) -> Result<()> {
    match command {
        Command::Space(SpaceCommand::Gen {
            space,
            distances,
            output,
        }) => {
            let s = space.generate()?;
            let path = out_path(&output, &out_dir, "space.json");
            io::write_space(&s, &path, distances)?;
            eprintln!("wrote {} ({} points)", path.display(), s.len());
            Ok(())
        }
        Command::Space(SpaceCommand::Info { file }) => {
            let s = io::read_space(&file)?;
            emit("space info", &SpaceSummary::of(&s), &[], &None)
        }
        Command::Net(NetCommand::Build {
            eps,
            space_file,
            output,
        }) => {
            let space = Arc::new(io::read_space(&space_file)?);
            let net = PointedNet::build(&space, eps)?;
            let path = out_path(&output, &out_dir, "net.json");
            io::write_net(&net, Some(&absolute(&space_file)?), &path)?;
            eprintln!("wrote {} ({} members)", path.display(), net.len());
            Ok(())
        }
        Command::Rips(RipsCommand::Build {
            net_file,
            output,
            edges,
        }) => {
            let net = io::read_net(&net_file)?;
            let doc: io::NetDocument = io::read_json(&net_file)?;
            let space_file = match doc.space.file {
                Some(f) if f.is_relative() => Some(absolute(&net_file.parent().unwrap_or(Path::new(".")).join(f))?),
                other => other,
            };
            let graph = RipsGraph::build(&net);
            let path = out_path(&output, &out_dir, "graph.json");
            io::write_graph(&graph, space_file.as_deref(), &path)?;
            if let Some(e) = edges {
                io::write_edge_csv(&graph, &e)?;
            }
            eprintln!(
                "wrote {} ({} vertices, {} edges, max valency {})",
                path.display(),
                graph.len(),
                graph.edge_count(),
                graph.max_valency()
            );
            Ok(())
        }
        Command::Partition(PartitionCommand::Check {
            eps,
            samples,
            seed,
            space_file,
            net_file,
            output,
        }) => {
            let space = Arc::new(io::read_space(&space_file)?);
            let net = io::read_net_for(&space, &net_file)?;
            if (net.eps() - eps).abs() > coarsekit::TOL {
                return Err(usage(format!("--eps {eps} differs from the net's ε = {}", net.eps())));
            }
            let stage = measure_partition(&net, samples, samples, seed)?;
            emit("partition check", &stage, &partition_checks(&stage), &output)
        }
        Command::Control(args) => control(args),
        Command::Ponzi(PonziCommand::Sweep {
            rho,
            rmin,
            rmax,
            step,
            search,
            graph_file,
            output,
            certificate,
        }) => {
            let range = SweepRange { rmin, rmax, step };
            range.validate()?;
            let k = KSearch {
                tol: search.k_tol,
                cap: search.k_cap,
            };
            let graph = io::read_graph(&graph_file)?;
            let rows = ponzi_sweep(&graph, &rho, &range.radii(), k)?;
            let path = out_path(&output, &out_dir, "sweep.csv");
            let mut out = io::create_file(&path)?;
            coarsekit::homology::write_sweep_csv(&rows, &mut out)
                .and_then(|_| std::io::Write::flush(&mut out))
                .map_err(|e| Error::io(&path, e))?;
            eprintln!("wrote {} ({} radii)", path.display(), rows.len());
            if let Some(cert_path) = certificate {
                let last = rows
                    .iter()
                    .rev()
                    .find(|r| r.k_star.is_finite())
                    .ok_or_else(|| Error::Assertion("no radius has a finite K*".into()))?;
                let region = Region::ball(&graph, last.radius)?;
                let ks = min_control_constant(&graph, &region, &rho, k)?;
                let outcome = ponzi_feasible(&graph, &region, &rho, ks.k)?;
                let cert = outcome
                    .certificate
                    .ok_or_else(|| Error::Assertion(format!("no scheme at K* = {}", ks.k)))?;
                io::write_json(&cert_path, &cert)?;
                eprintln!("wrote {} (R = {}, K = {})", cert_path.display(), last.radius, cert.k);
            }
            Ok(())
        }
        Command::Ponzi(PonziCommand::Verify { cert_file, graph_file }) => {
            let cert: coarsekit::homology::PonziCertificate = io::read_json(&cert_file)?;
            let graph = io::read_graph(&graph_file)?;
            let report = verify_certificate(&cert, &graph);
            emit("ponzi verify", &report, &certificate_checks(&report), &None)
        }
        Command::Iso(args) => {
            if args.mode == Method::Parametric {
                return Err(usage("iso --mode must be auto, exact or greedy"));
            }
            let graph = io::read_graph(&args.graph_file)?;
            let r = iso_constant(&graph, &args.search.rho, args.mode, &args.search.options())?;
            emit("iso", &r, &[], &args.search.output)
        }
        Command::Sobolev(args) => {
            let graph = io::read_graph(&args.graph_file)?;
            let r = sobolev_constant(
                &graph,
                &args.search.rho,
                args.weights,
                args.method,
                &args.search.options(),
            )?;
            let checks: Vec<Check> = match (&r.validation, r.certified) {
                (Some(v), true) => vec![Check::le("random η ratio <= D*", v.max_ratio, r.value)],
                _ => Vec::new(),
            };
            emit("sobolev", &r, &checks, &args.search.output)
        }
        Command::Delta(args) => {
            let space = io::read_space(&args.space_file)?;
            let opts = DeltaOptions {
                triples: args.triples,
                exhaustive_threshold: args.exhaustive_threshold,
                subsample: args.subsample,
                seed: args.seed,
            };
            let r = estimate_delta(&space, &opts)?;
            emit("delta", &r, &[], &args.output)
        }
        Command::Crosscheck(args) => {
            let graph = io::read_graph(&args.graph_file)?;
            let r = iso_sobolev_crosscheck(&graph, &args.search.rho, &args.search.options())?;
            emit("crosscheck", &r, &r.checks, &args.search.output)
        }
        Command::Pipeline(_) => unreachable!("handled by run"),
    }
}

fn control(args: ControlArgs) -> Result<()> {
    match &args.fit {
        None => {
            let c = args.rho.constants(args.eps)?;
            let checks = vec![
                Check::le("sampled L ratio <= L", c.check.l_sup, c.l),
                Check::le("sampled M ratio <= M", c.check.m_sup, c.m),
            ];
            emit("control", &c, &checks, &None)
        }
        Some(path) => {
            let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Format {
                path: path.clone(),
                message: e.to_string(),
            })?;
            let headers = reader.headers().map_err(|e| Error::Format {
                path: path.clone(),
                message: e.to_string(),
            })?;
            let col = |name: &str| {
                headers
                    .iter()
                    .position(|h| h.trim() == name)
                    .ok_or_else(|| Error::Format {
                        path: path.clone(),
                        message: format!("missing column {name}"),
                    })
            };
            let (ri, ki) = (col("R")?, col("K*")?);
            let mut samples = Vec::new();
            for rec in reader.records() {
                let rec = rec.map_err(|e| Error::Format {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                let num = |i: usize| -> Result<f64> {
                    rec.get(i)
                        .and_then(|v| v.trim().parse::<f64>().ok())
                        .ok_or_else(|| Error::Format {
                            path: path.clone(),
                            message: format!("unreadable number in row {:?}", rec),
                        })
                };
                let (r, k) = (num(ri)?, num(ki)?);
                if k.is_finite() {
                    samples.push((r, k));
                }
            }
            let fit = classify_growth(&samples, args.tolerance)?;
            emit("control fit", &fit, &[], &None)
        }
    }
}

fn pipeline(args: PipelineArgs, out_dir: Option<PathBuf>) -> Result<i32> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let eps = args.eps.ok_or_else(|| usage("pipeline needs --config or --eps"))?;
            let spec = match &args.space_file {
                Some(f) => SpaceSpec::File { path: f.clone() },
                None if args.space.given() => args.space.to_spec()?,
                None => return Err(usage("pipeline needs --config, --space-file, --kind or --spec")),
            };
            let mut c = RunConfig::new(spec, eps);
            c.max_points = args.space.max_points;
            c.seed = args.space.seed;
            c
        }
    };
    if args.config.is_some() {
        if let Some(f) = &args.space_file {
            cfg.space = SpaceSpec::File { path: f.clone() };
        } else if args.space.given() {
            cfg.space = args.space.to_spec()?;
        }
        if let Some(e) = args.eps {
            cfg.eps = e;
        }
    }
    if let Some(r) = args.rho {
        cfg.rho = r;
    }
    match (args.rmin, args.rmax, args.step) {
        (Some(rmin), Some(rmax), Some(step)) => cfg.sweep = Some(SweepRange { rmin, rmax, step }),
        (None, None, None) => {}
        _ => return Err(usage("--rmin, --rmax and --step go together")),
    }
    if let Some(s) = args.stages {
        cfg.stages = s;
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    if out_dir.is_some() {
        cfg.output_dir = out_dir;
    }
    cfg.validate()?;
    if args.dump_config {
        say(&cfg.to_json());
        return Ok(0);
    }
    let report = run_pipeline(&cfg)?;
    let dir = cfg.resolved_output_dir();
    for p in write_outputs(&report, &dir)? {
        eprintln!("wrote {}", p.display());
    }
    let passed = report.checks.iter().filter(|c| c.check.holds).count();
    say(&format!(
        "{} checks passed, {} failed, {} skipped",
        passed,
        report.checks.len() - passed,
        report.skipped.len()
    ));
    if let Some(p) = &report.stages.ponzi {
        say("R,K*");
        for row in &p.sweep {
            say(&format!("{},{}", row.radius, row.k_star));
        }
        if let Some(g) = &p.growth {
            say(&format!("growth: {}", g.label));
        }
    }
    if let coarsekit::report::Status::Failed { stage, message, .. } = &report.status {
        eprintln!("coarsekit: stage {stage} failed: {message}");
    }
    Ok(report.exit_code())
}
