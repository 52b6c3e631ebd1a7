use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use camcast::analytics::{expected_psi, rates, RhoMode};
use camcast::codec::DecodeMode;
use camcast::coloring::{ca_hgc, channel_uses, group_sizes, Growth};
use camcast::config::parse_config;
use camcast::delivery::deliver;
use camcast::exact::ca_cic_exact;
use camcast::experiment::{emit, prepare_point, run_scheme, ExperimentSpec, OutputFormat};
use camcast::graph::{ConflictGraph, PacketId};
use camcast::rng::{Component, Streams};
use camcast::{worked, Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Channel-aware caching-aided coded multicast simulator.
#[derive(Parser, Debug)]
#[command(name = "camcast", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo load sweep for every configured scheme.
    Simulate(RunArgs),
    /// Closed-form normalized length, rates and load over the sweep.
    Analytic(RunArgs),
    /// Replay the three-receiver worked example with a full trace.
    Example(ExampleArgs),
    /// Exact minimum GIS cover of a dumped conflict graph.
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the Monte Carlo trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct ExampleArgs {
    /// Seed of the random description contents.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = GrowthArg::Greedy)]
    growth: GrowthArg,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the conflict graph in the oracle's input format.
    #[arg(long)]
    graph_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Conflict graph dump.
    graph: PathBuf,
    /// Per-receiver caps, comma separated; defaults to the cluster sizes.
    #[arg(long, value_delimiter = ',')]
    caps: Option<Vec<usize>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Csv,
    PlotData,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::PlotData => OutputFormat::PlotData,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GrowthArg {
    Greedy,
    FillOnJoin,
}

impl From<GrowthArg> for Growth {
    fn from(g: GrowthArg) -> Self {
        match g {
            GrowthArg::Greedy => Growth::Greedy,
            GrowthArg::FillOnJoin => Growth::FillOnJoin,
        }
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
    let result = match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Analytic(a) => analytic(&a),
        Command::Example(a) => example(&a),
        Command::Oracle(a) => oracle(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("camcast: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for broken runtime contracts, 1 for everything the user can fix.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Contract(_) => 2,
        _ => 1,
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(args: &RunArgs) -> Result<ExperimentSpec> {
    let mut file = parse_config(&read(&args.config)?)?;
    if let Some(seed) = args.seed {
        file.system.seed = seed;
    }
    if let Some(trials) = args.trials {
        file.experiment.trials = trials;
    }
    file.into_spec()
}

fn simulate(args: &RunArgs) -> Result<()> {
    let spec = load(args)?;
    let rows = run_scheme(&spec)?;
    for r in &rows {
        eprintln!(
            "{:<16} M={:<6} load={:.4} se={:.4} trials={} {:.2}s",
            r.scheme.label(),
            r.cache_files,
            r.load_mean,
            r.load_se,
            r.trials,
            r.wall_time.as_secs_f64()
        );
    }
    write_out(&args.out, &emit(&rows, args.format.into())?)
}

#[derive(Serialize)]
struct AnalyticRow {
    #[serde(rename = "M")]
    cache_files: f64,
    phi: f64,
    m_bar: f64,
    expected_psi: f64,
    load: f64,
    network_rate: f64,
    distortion: f64,
}

fn analytic(args: &RunArgs) -> Result<()> {
    let spec = load(args)?;
    let mut rows = Vec::new();
    for &mc in &spec.sweep {
        let point = prepare_point(&spec, mc)?;
        let mut rng = Streams::new(spec.system.seed).stream(Component::Estimator, mc.to_bits());
        let psi = expected_psi(&point.params, RhoMode::ClosedForm, &mut rng)?;
        let report = rates(&point.params, &psi)?;
        rows.push(AnalyticRow {
            cache_files: mc,
            phi: psi.phi,
            m_bar: psi.m_bar,
            expected_psi: psi.value,
            load: report.load,
            network_rate: report.network,
            distortion: report.distortion,
        });
    }
    let text = match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Error::Config(e.to_string()))?).expect("utf-8")
        }
        Format::PlotData => {
            let mut s = String::from("# M expected_psi load network_rate distortion\n");
            for r in &rows {
                writeln!(s, "{} {} {} {} {}", r.cache_files, r.expected_psi, r.load, r.network_rate, r.distortion)
                    .unwrap();
            }
            s
        }
    };
    write_out(&args.out, &text)
}

fn label(p: PacketId) -> String {
    let file = char::from(b'a' + p.file as u8);
    format!("{file}{}", p.packet + 1)
}

fn example(args: &ExampleArgs) -> Result<()> {
    let system = worked::system(args.seed);
    let cache = worked::cache();
    let requests = worked::requests();
    let growth: Growth = args.growth.into();
    let t =
        deliver(&system, &worked::channels(), &cache, &requests, worked::EXPECTED_PSI, growth, DecodeMode::Ideal, 0)?;
    let g = &t.graph;
    let mut s = String::new();
    writeln!(s, "slot {} channel uses, expected normalized length {}", system.slot(), worked::EXPECTED_PSI).unwrap();
    writeln!(s, "rates {:?}", worked::RATES).unwrap();
    writeln!(s, "\ncaches").unwrap();
    for u in 0..cache.receivers() {
        let held: Vec<String> = (0..cache.files())
            .flat_map(|f| cache.packets(u, f).iter().map(move |&k| label(PacketId { file: f as u32, packet: k })))
            .collect();
        writeln!(s, "  receiver {}: {}", u + 1, held.join(" ")).unwrap();
    }
    writeln!(s, "\nschedule").unwrap();
    for u in 0..requests.receivers() {
        let want: Vec<String> = t.schedule.scheduled.packets[u]
            .iter()
            .map(|&k| label(PacketId { file: requests.file(u) as u32, packet: k }))
            .collect();
        let file = char::from(b'a' + requests.file(u) as u8);
        writeln!(s, "  receiver {} requests {file}: d = {}, sends {}", u + 1, t.schedule.d[u], want.join(" ")).unwrap();
    }
    writeln!(s, "\nconflict graph").unwrap();
    for v in 0..g.len() {
        let vx = g.vertex(v);
        let ks: Vec<String> = g.kv(v).iter().map(|u| (u + 1).to_string()).collect();
        writeln!(s, "  v{} = {} for receiver {}, K = {{{}}}", v + 1, label(vx.packet), vx.receiver + 1, ks.join(","))
            .unwrap();
    }
    let edges: Vec<String> = g.edges().map(|(a, b)| format!("v{}-v{}", a + 1, b + 1)).collect();
    writeln!(s, "  edges: {}", edges.join(" ")).unwrap();
    let clusters: Vec<String> = g
        .clusters()
        .iter()
        .map(|c| format!("{{{}}}", c.iter().map(|v| format!("v{}", v + 1)).collect::<Vec<_>>().join(",")))
        .collect();
    writeln!(s, "  clusters: {}", clusters.join(" ")).unwrap();
    writeln!(s, "\ncoloring ({:?}): {} colors", growth, t.coloring.len()).unwrap();
    for (i, gis) in t.coloring.canonical().iter().enumerate() {
        let names: Vec<String> = gis.iter().map(|v| format!("v{}", v + 1)).collect();
        writeln!(s, "  GIS {}: {{{}}} sizes {:?}", i + 1, names.join(","), group_sizes(g, gis)).unwrap();
    }
    writeln!(s, "  variable-length channel uses: {}", channel_uses(g, &t.coloring, &worked::RATES, 1)).unwrap();
    writeln!(s, "\ncodeword: block length n = {}", t.n).unwrap();
    for (i, b) in t.codeword.blocks.iter().enumerate() {
        let carried: Vec<String> = b.header.iter().map(|&(p, u)| format!("{} for {}", label(p), u + 1)).collect();
        let bits: String = b.symbols.iter().map(|x| char::from(b'0' + x)).collect();
        writeln!(s, "  block {}: {} [{bits}]", i + 1, carried.join(", ")).unwrap();
    }
    writeln!(s, "  total channel uses: {}", t.codeword.total_len()).unwrap();
    writeln!(s, "\ndecoding").unwrap();
    for (u, o) in t.outcomes.iter().enumerate() {
        let got: Vec<String> = o.recovered.iter().map(|&p| label(p)).collect();
        writeln!(s, "  receiver {}: {} ({})", u + 1, got.join(" "), if o.success { "ok" } else { "failed" }).unwrap();
    }
    if let Some(p) = &args.graph_out {
        std::fs::write(p, g.to_text()).map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display())))?;
    }
    write_out(&args.out, &s)
}

fn oracle(args: &OracleArgs) -> Result<()> {
    let g = ConflictGraph::from_text(&read(&args.graph)?)?;
    let caps = args.caps.clone().unwrap_or_else(|| g.cluster_sizes());
    if caps.len() != g.receivers() {
        return Err(Error::Config(format!("{} caps given for {} receivers", caps.len(), g.receivers())));
    }
    let (chi, best) = ca_cic_exact(&g, &caps)?;
    let greedy = ca_hgc(&g, &caps, Growth::Greedy);
    let mut s = format!("exact {chi}\nheuristic {}\n", greedy.len());
    for (i, gis) in best.canonical().iter().enumerate() {
        let names: Vec<String> = gis.iter().map(|v| (v + 1).to_string()).collect();
        writeln!(s, "gis {} {}", i + 1, names.join(" ")).unwrap();
    }
    write_out(&args.out, &s)
}
