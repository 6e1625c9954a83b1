//! Command-line front end. [`run`] parses arguments, dispatches a command and maps the
//! outcome to an exit code: 0 on success, 1 when a verification finds a violation, 2 on
//! usage errors and unusable inputs.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rand::Rng;

use lodense::density::{density_lower_bound, recount, spread, DensitySampler, WitnessKind};
use lodense::graph::{all_pairs_shortest_paths, dijkstra, format_graph, parse_graph};
use lodense::graph_wspd::verify_pairs;
use lodense::io::{load_oracle, save_oracle, write_atomic, WspdFile};
use lodense::rng::{stream, stream_rng};
use lodense::{build_graph_wspd, generate, AdoSet, EmbeddedGraph, GraphKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Header row of `bench` output.
pub const CSV_HEADER: &str = "instance,n,m,eps,lambda_lb,pairs,build_ms,q_p50_ns,q_p99_ns,max_ratio";

/// Relative slack on the approximation check.
const RATIO_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "lodense", version, about = "WSPDs and approximate distance oracles for low-density plane graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated graph in the text format.
    Generate(GenerateArgs),
    /// Certified lower bounds on the density of a graph, with witness discs.
    Density(DensityArgs),
    /// Build a graph WSPD and save it.
    BuildWspd(BuildWspdArgs),
    /// Check a saved graph WSPD against exact distances.
    VerifyWspd(VerifyWspdArgs),
    /// Build an approximate distance oracle and save it.
    BuildAdo(BuildAdoArgs),
    /// Answer one distance query from a saved oracle.
    Query(QueryArgs),
    /// Check a saved oracle against exact distances.
    VerifyAdo(VerifyAdoArgs),
    /// Build oracles for a list of instances and emit one CSV row per instance and eps.
    Bench(BenchArgs),
    /// Print sizes of a saved oracle or WSPD.
    Stats(StatsArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Grid,
    Comb,
    Path,
    Selg,
    Pgrid,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Side length (grid, comb, selg, pgrid).
    #[arg(long)]
    k: Option<usize>,
    /// Vertex count (path).
    #[arg(long)]
    n: Option<usize>,
    /// Longest candidate edge (selg).
    #[arg(long, default_value_t = 2.0)]
    ell: f64,
    /// Displacement bound (pgrid).
    #[arg(long, default_value_t = 0.25)]
    noise: f64,
    #[arg(long, env = "LODENSE_SEED")]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, env = "LODENSE_SEED")]
    seed: Option<u64>,
    /// Number of candidate discs.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args, Debug)]
struct BuildWspdArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    out: PathBuf,
    /// Density used by the cluster-count check; estimated from `--seed` when absent.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, env = "LODENSE_SEED")]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct VerifyWspdArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    wspd: PathBuf,
}

#[derive(Args, Debug)]
struct BuildAdoArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    out: PathBuf,
    /// Separator size target; estimated from `--seed` when absent.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, env = "LODENSE_SEED")]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct QueryArgs {
    #[arg(long)]
    oracle: PathBuf,
    #[arg(long)]
    u: usize,
    #[arg(long)]
    v: usize,
}

#[derive(Args, Debug)]
struct VerifyAdoArgs {
    #[arg(long)]
    oracle: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    /// Check from this many random sources instead of all vertices.
    #[arg(long)]
    sources: Option<usize>,
    #[arg(long, env = "LODENSE_SEED")]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// `grid:K`, `comb:K`, `path:N`, `selg:K[:ELL]`, `pgrid:K[:NOISE]` or a graph file.
    #[arg(long = "instance")]
    instances: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    eps: Vec<f64>,
    #[arg(long, env = "LODENSE_SEED")]
    seed: Option<u64>,
    /// Query sources per instance (one Dijkstra each for the ratio column).
    #[arg(long, default_value_t = 20)]
    sources: usize,
    /// Query targets per source.
    #[arg(long, default_value_t = 50)]
    targets: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("file").required(true).args(["oracle", "wspd"])))]
struct StatsArgs {
    #[arg(long)]
    oracle: Option<PathBuf>,
    #[arg(long)]
    wspd: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Verify(String),
    Input(String),
}

impl From<lodense::Error> for Failure {
    fn from(e: lodense::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs the CLI with the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

/// Runs the CLI writing to the given streams; returns the exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{text}");
                EXIT_OK
            } else {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            };
        }
    };
    let result = match cli.cmd {
        Command::Generate(a) => cmd_generate(a, out),
        Command::Density(a) => cmd_density(a, out),
        Command::BuildWspd(a) => cmd_build_wspd(a, out),
        Command::VerifyWspd(a) => cmd_verify_wspd(a, out),
        Command::BuildAdo(a) => cmd_build_ado(a, out),
        Command::Query(a) => cmd_query(a, out),
        Command::VerifyAdo(a) => cmd_verify_ado(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Stats(a) => cmd_stats(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Verify(msg)) => {
            let _ = writeln!(err, "verification failed: {msg}");
            EXIT_VERIFY
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "usage error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn need_seed(seed: Option<u64>, what: &str) -> std::result::Result<u64, Failure> {
    seed.ok_or_else(|| Failure::Usage(format!("{what} requires --seed (or LODENSE_SEED)")))
}

fn check_eps(eps: f64) -> Outcome {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--eps must lie in (0, 1), got {eps}")))
    }
}

fn read_graph(path: &Path) -> std::result::Result<EmbeddedGraph, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(parse_graph(&text)?)
}

fn lambda_lb(g: &EmbeddedGraph, seed: u64) -> usize {
    density_lower_bound(g, &DensitySampler::new(seed)).lambda_lower_bound
}

fn resolve_lambda(g: &EmbeddedGraph, lambda: Option<f64>, seed: Option<u64>) -> std::result::Result<f64, Failure> {
    match lambda {
        Some(l) if l > 0.0 && l.is_finite() => Ok(l),
        Some(l) => Err(Failure::Usage(format!("--lambda must be positive, got {l}"))),
        None => {
            let seed = seed.ok_or_else(|| Failure::Usage("give --lambda or --seed (or LODENSE_SEED) to estimate it".into()))?;
            Ok(lambda_lb(g, seed).max(1) as f64)
        }
    }
}

fn kind_of(a: &GenerateArgs) -> std::result::Result<GraphKind, Failure> {
    let k = || a.k.ok_or_else(|| Failure::Usage("--k is required for this kind".into()));
    Ok(match a.kind {
        Kind::Grid => GraphKind::Grid { k: k()? },
        Kind::Comb => GraphKind::Comb { k: k()? },
        Kind::Path => GraphKind::Path { n: a.n.ok_or_else(|| Failure::Usage("--n is required for path".into()))? },
        Kind::Selg => GraphKind::Selg { k: k()?, ell: a.ell, seed: need_seed(a.seed, "selg")? },
        Kind::Pgrid => GraphKind::PerturbedGrid { k: k()?, noise: a.noise, seed: need_seed(a.seed, "pgrid")? },
    })
}

fn cmd_generate(a: GenerateArgs, out: &mut dyn Write) -> Outcome {
    let kind = kind_of(&a)?;
    let g = generate(&kind).map_err(|e| Failure::Usage(e.to_string()))?;
    let text = format_graph(&g);
    match &a.out {
        Some(p) => {
            write_atomic(p, text.as_bytes())?;
            writeln!(out, "{} n={} m={}", kind.name(), g.n(), g.m())?;
        }
        None => write!(out, "{text}")?,
    }
    Ok(())
}

fn cmd_density(a: DensityArgs, out: &mut dyn Write) -> Outcome {
    let seed = need_seed(a.seed, "density")?;
    let g = read_graph(&a.input)?;
    let mut sampler = DensitySampler::new(seed);
    if let Some(b) = a.budget {
        sampler.budget = b;
    }
    let rep = density_lower_bound(&g, &sampler);
    writeln!(out, "lambda_lb {}", rep.lambda_lower_bound)?;
    writeln!(out, "tau_lb {}", rep.tau_lower_bound)?;
    if g.n() >= 2 {
        writeln!(out, "spread {}", spread(g.points())?.phi)?;
    }
    let mut bad = 0;
    for w in &rep.witness_discs {
        let kind = match w.kind {
            WitnessKind::Low => "low",
            WitnessKind::Lanky => "lanky",
        };
        writeln!(out, "witness {kind} {:?} {:?} {:?} {}", w.center.x, w.center.y, w.radius, w.count)?;
        if recount(&g, w) != w.count {
            bad += 1;
        }
    }
    if bad > 0 {
        return Err(Failure::Verify(format!("{bad} witness discs do not replay")));
    }
    Ok(())
}

fn cmd_build_wspd(a: BuildWspdArgs, out: &mut dyn Write) -> Outcome {
    check_eps(a.eps)?;
    let g = read_graph(&a.input)?;
    let lambda = resolve_lambda(&g, a.lambda, a.seed)?;
    let t = Instant::now();
    let w = build_graph_wspd(&g, a.eps)?;
    let ms = t.elapsed().as_secs_f64() * 1e3;
    WspdFile::from_wspd(&w, lambda, a.seed.unwrap_or(0)).save(&a.out)?;
    writeln!(out, "pairs {} euclidean_pairs {} build_ms {ms:.1}", w.pair_count(), w.euclidean.pairs.len())?;
    Ok(())
}

fn cmd_verify_wspd(a: VerifyWspdArgs, out: &mut dyn Write) -> Outcome {
    let g = read_graph(&a.input)?;
    let f = WspdFile::load(&a.wspd)?;
    if f.quadtree.points() != g.points() {
        return Err(Failure::Input("WSPD was built for a different vertex set".into()));
    }
    let d = all_pairs_shortest_paths(&g)?;
    let lambda = f.manifest.lambda_hint.max(1.0);
    let rep = verify_pairs(&g, &f.quadtree, &f.net, &f.pairs, &d, 1.0 / f.manifest.eps, lambda);
    writeln!(out, "pairs {}", rep.pairs)?;
    writeln!(out, "coverage missing {} duplicated {}", rep.missing, rep.duplicated)?;
    writeln!(out, "empty_handles {}", rep.empty_handles)?;
    writeln!(out, "separation {}", rep.separation)?;
    writeln!(out, "diameter {}", rep.diameter)?;
    writeln!(out, "packing {}", rep.packing)?;
    writeln!(out, "cluster_count {} max_ratio {:.4}", rep.cluster_count, rep.max_cluster_ratio)?;
    for m in &rep.messages {
        writeln!(out, "  {m}")?;
    }
    if rep.violations() > 0 {
        let kind = if rep.missing + rep.duplicated > 0 { "coverage violation" } else { "invariant violation" };
        return Err(Failure::Verify(format!("{kind}: {} problems", rep.violations())));
    }
    writeln!(out, "ok")?;
    Ok(())
}

fn cmd_build_ado(a: BuildAdoArgs, out: &mut dyn Write) -> Outcome {
    check_eps(a.eps)?;
    let seed = need_seed(a.seed, "build-ado")?;
    let g = read_graph(&a.input)?;
    let lambda = resolve_lambda(&g, a.lambda, Some(seed))?;
    let t = Instant::now();
    let (set, _) = AdoSet::build(&g, a.eps, lambda, seed)?;
    let ms = t.elapsed().as_secs_f64() * 1e3;
    save_oracle(&a.out, &set, lambda, seed)?;
    let pairs: u64 = set.oracles().iter().filter_map(|o| o.wspd()).map(|w| w.pair_count()).sum();
    writeln!(out, "components {} pairs {pairs} lambda {lambda} build_ms {ms:.1}", set.components().len())?;
    Ok(())
}

fn cmd_query(a: QueryArgs, out: &mut dyn Write) -> Outcome {
    let (set, _) = load_oracle(&a.oracle)?;
    match set.query(a.u, a.v).map_err(|e| Failure::Usage(e.to_string()))? {
        Some(d) => writeln!(out, "{d}")?,
        None => writeln!(out, "unreachable")?,
    }
    Ok(())
}

fn cmd_verify_ado(a: VerifyAdoArgs, out: &mut dyn Write) -> Outcome {
    let g = read_graph(&a.input)?;
    let (set, m) = load_oracle(&a.oracle)?;
    if set.n() != g.n() {
        return Err(Failure::Input("oracle was built for a different graph".into()));
    }
    let n = g.n();
    let sources: Vec<usize> = match a.sources {
        Some(k) if k < n => {
            let mut rng = stream_rng(need_seed(a.seed, "sampled verification")?, stream::QUERIES);
            (0..k).map(|_| rng.gen_range(0..n)).collect()
        }
        _ => (0..n).collect(),
    };
    let eps = m.eps;
    let (mut checked, mut violations, mut worst) = (0u64, 0u64, 1.0f64);
    for &u in &sources {
        let d = dijkstra(&g, u);
        for v in 0..n {
            let q = set.query(u, v)?;
            checked += 1;
            let ok = match q {
                None => !d[v].is_finite(),
                Some(x) if u == v => x == 0.0,
                Some(x) if d[v].is_finite() => {
                    let r = x / d[v];
                    worst = worst.max(r).max(1.0 / r);
                    r <= (1.0 + eps) * (1.0 + RATIO_TOL) && r >= 1.0 / ((1.0 + eps) * (1.0 + RATIO_TOL))
                }
                Some(_) => false,
            };
            if !ok {
                if violations < 10 {
                    writeln!(out, "  pair ({u}, {v}): oracle {q:?} exact {}", d[v])?;
                }
                violations += 1;
            }
        }
    }
    writeln!(out, "checked {checked} max_ratio {worst:.6} violations {violations}")?;
    if violations > 0 {
        return Err(Failure::Verify(format!("{violations} pairs outside the (1 + {eps}) bound")));
    }
    writeln!(out, "ok")?;
    Ok(())
}

/// A bench instance: a generator spec or a graph file.
fn resolve_instance(spec: &str, seed: u64) -> std::result::Result<(String, EmbeddedGraph), Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |i: usize| -> std::result::Result<usize, Failure> {
        parts.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| Failure::Usage(format!("bad instance spec {spec}")))
    };
    let real = |i: usize, default: f64| -> std::result::Result<f64, Failure> {
        match parts.get(i) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| Failure::Usage(format!("bad instance spec {spec}"))),
        }
    };
    let kind = match parts[0] {
        "grid" => Some(GraphKind::Grid { k: num(1)? }),
        "comb" => Some(GraphKind::Comb { k: num(1)? }),
        "path" => Some(GraphKind::Path { n: num(1)? }),
        "selg" => Some(GraphKind::Selg { k: num(1)?, ell: real(2, 2.0)?, seed }),
        "pgrid" => Some(GraphKind::PerturbedGrid { k: num(1)?, noise: real(2, 0.25)?, seed }),
        _ => None,
    };
    match kind {
        Some(kind) => {
            let g = generate(&kind).map_err(|e| Failure::Usage(e.to_string()))?;
            Ok((kind.name(), g))
        }
        None => {
            let p = Path::new(spec);
            if !p.is_file() {
                return Err(Failure::Input(format!("missing instance file {spec}")));
            }
            let name = p.file_stem().map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
            Ok((name, read_graph(p)?))
        }
    }
}

fn percentile(sorted: &[u64], p: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// One CSV row for an instance and eps.
fn bench_row(name: &str, g: &EmbeddedGraph, eps: f64, seed: u64, sources: usize, targets: usize) -> std::result::Result<String, Failure> {
    let lam = lambda_lb(g, seed);
    let t = Instant::now();
    let (set, _) = AdoSet::build(g, eps, lam.max(1) as f64, seed)?;
    let build_ms = t.elapsed().as_secs_f64() * 1e3;
    let pairs: u64 = set.oracles().iter().filter_map(|o| o.wspd()).map(|w| w.pair_count()).sum();
    let n = g.n();
    let mut rng = stream_rng(seed, stream::QUERIES);
    let mut times = Vec::with_capacity(sources * targets);
    let mut worst = 1.0f64;
    for _ in 0..sources {
        let u = rng.gen_range(0..n);
        let d = dijkstra(g, u);
        for _ in 0..targets {
            let v = rng.gen_range(0..n);
            let t = Instant::now();
            let q = set.query(u, v)?;
            times.push(t.elapsed().as_nanos() as u64);
            if let Some(x) = q {
                if u != v {
                    let r = x / d[v];
                    worst = worst.max(r).max(1.0 / r);
                }
            }
        }
    }
    times.sort_unstable();
    Ok(format!(
        "{name},{n},{},{eps},{lam},{pairs},{build_ms:.1},{},{},{worst:.6}",
        g.m(),
        percentile(&times, 0.5),
        percentile(&times, 0.99)
    ))
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Outcome {
    for &e in &a.eps {
        check_eps(e)?;
    }
    let mut rows = vec![CSV_HEADER.to_string()];
    if !a.instances.is_empty() {
        let seed = need_seed(a.seed, "bench")?;
        for spec in &a.instances {
            let (name, g) = resolve_instance(spec, seed)?;
            for &eps in &a.eps {
                rows.push(bench_row(&name, &g, eps, seed, a.sources, a.targets)?);
            }
        }
    }
    let mut text = rows.join("\n");
    text.push('\n');
    match &a.out {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => write!(out, "{text}")?,
    }
    Ok(())
}

fn cmd_stats(a: StatsArgs, out: &mut dyn Write) -> Outcome {
    if let Some(p) = &a.oracle {
        let (set, m) = load_oracle(p)?;
        let wspds: Vec<_> = set.oracles().iter().filter_map(|o| o.wspd()).collect();
        writeln!(out, "n {}", set.n())?;
        writeln!(out, "components {}", set.components().len())?;
        writeln!(out, "eps {}", m.eps)?;
        writeln!(out, "lambda_hint {}", m.lambda_hint)?;
        writeln!(out, "seed {}", m.seed)?;
        writeln!(out, "pairs {}", wspds.iter().map(|w| w.pair_count()).sum::<u64>())?;
        writeln!(out, "euclidean_pairs {}", wspds.iter().map(|w| w.euclidean.pairs.len()).sum::<usize>())?;
        writeln!(out, "quadtree_nodes {}", wspds.iter().map(|w| w.quadtree.node_count()).sum::<usize>())?;
        let semi: usize = set.oracles().iter().filter_map(|o| o.membership()).map(|m| m.semi.node_count()).sum();
        writeln!(out, "semi_net_nodes {semi}")?;
        writeln!(out, "max_clusters_per_cell {}", wspds.iter().map(|w| w.max_clusters_per_cell()).max().unwrap_or(0))?;
        writeln!(out, "size_words {}", set.size_words())?;
        let diam = set.oracles().iter().map(|o| o.approx_diameter()).fold(0.0, f64::max);
        writeln!(out, "approx_diameter {diam}")?;
    } else if let Some(p) = &a.wspd {
        let f = WspdFile::load(p)?;
        writeln!(out, "n {}", f.manifest.n)?;
        writeln!(out, "eps {}", f.manifest.eps)?;
        writeln!(out, "lambda_hint {}", f.manifest.lambda_hint)?;
        writeln!(out, "pairs {}", f.pairs.len())?;
        writeln!(out, "euclidean_pairs {}", f.euclidean.len())?;
        writeln!(out, "quadtree_nodes {}", f.quadtree.node_count())?;
        writeln!(out, "net_nodes {}", f.net.node_count())?;
    }
    Ok(())
}
