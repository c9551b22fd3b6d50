use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use irmwpm::decoder::{DecoderConfig, StoppingMode};
use irmwpm::experiments::{
    fit_scaling, run_lifetime, run_memory_on, threshold_scan, to_csv, DecoderKind, PointResult, ScanPoint, SimConfig,
    SCHEMA_VERSION,
};
use irmwpm::graph::{build_pair, Weighting};
use irmwpm::noise::enumerate_single_faults;
use irmwpm::{CodeLayout, Error, SeCircuit};

mod verify;

#[derive(Parser, Debug)]
#[command(name = "irmwpm", version, about = "Surface-code decoding lab", args_override_self = true)]
struct Cli {
    /// Worker threads for trial execution (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat `key = value` file mirroring the long flags; flags on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Memory experiment at one (L, p) point.
    Simulate(SimulateArgs),
    /// Mean lifetime under windowed decoding with periodic ideal checks.
    Lifetime(LifetimeArgs),
    /// Scan a p-grid over several distances and locate curve crossings.
    Threshold(ThresholdArgs),
    /// Fit the scaling model to rates from a results CSV.
    Fit(FitArgs),
    /// Every single fault of a T-round experiment and its detection events.
    EnumerateFaults(EnumerateArgs),
    /// Both decoding graphs with weights, labels and correlations.
    DumpGraph(GraphArgs),
    /// Qubit coordinates, stabilizer supports and the extraction schedule.
    DumpLayout(LayoutArgs),
    /// Reproduce the bulk conditional probabilities and run the simulator oracles.
    Verify,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "irmwpm")]
    decoder: DecoderKind,
    #[arg(long, default_value_t = 10)]
    max_iters: usize,
    #[arg(long, default_value = "consecutive")]
    stopping: StoppingMode,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    idle_noise: bool,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    reweight_boundary: bool,
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    clamp_to_base: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    distance: usize,
    /// Noisy rounds per decode (default: distance).
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    p: f64,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct LifetimeArgs {
    #[command(flatten)]
    sim: SimulateArgs,
    /// Rounds between ideal checks (default: distance).
    #[arg(long)]
    check_period: Option<usize>,
    #[arg(long)]
    virtual_decoder: Option<DecoderKind>,
    #[arg(long, default_value_t = 1_000_000)]
    round_cap: u64,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    distances: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    p_grid: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    /// Scan both decoders instead of only `--decoder`.
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    both: bool,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// CSV written by `simulate` or `threshold`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(long)]
    distance: usize,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    idle_noise: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GraphArgs {
    #[command(flatten)]
    faults: EnumerateArgs,
    #[arg(long, default_value_t = 0.001)]
    p: f64,
}

#[derive(Args, Debug)]
struct LayoutArgs {
    #[arg(long)]
    distance: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

const SUBCOMMANDS: [&str; 8] =
    ["simulate", "lifetime", "threshold", "fit", "enumerate-faults", "dump-graph", "dump-layout", "verify"];

/// Splice `--key value` pairs from a config file in right after the
/// subcommand, so that flags given later on the command line override them.
fn expand_config(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let path = match argv[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => argv.get(pos + 1).cloned().ok_or("--config needs a path")?,
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let mut extra = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{path}:{}: expected `key = value`", n + 1))?;
        extra.push(format!("--{}", key.trim()));
        extra.push(value.trim().to_string());
    }
    let at = argv
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.as_str()))
        .map_or(argv.len(), |i| i + 1);
    let mut out = argv[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[at..]);
    Ok(out)
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidRate(_) | Error::InvalidDistance(_) | Error::RateTooLarge { .. } => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Internal(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

fn main() -> ExitCode {
    let argv = match expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Lifetime(a) => lifetime(a),
        Command::Threshold(a) => threshold(a),
        Command::Fit(a) => fit(a),
        Command::EnumerateFaults(a) => enumerate(a),
        Command::DumpGraph(a) => dump_graph(a),
        Command::DumpLayout(a) => dump_layout(a),
        Command::Verify => {
            if verify::run()? {
                Ok(())
            } else {
                Err(Failure::Internal("verification failed".into()))
            }
        }
    }
}

fn sim_config(distance: usize, rounds: Option<usize>, p: f64, run: &RunArgs) -> SimConfig {
    let mut c = SimConfig::new(distance, p);
    c.rounds = rounds.unwrap_or(distance);
    c.check_period = distance;
    c.trials = run.trials;
    c.seed = run.seed;
    c.decoder = run.decoder;
    c.idle_noise = run.idle_noise;
    c.decoder_config = DecoderConfig {
        max_iters: run.max_iters,
        stopping: run.stopping,
        reweight_boundary: run.reweight_boundary,
        clamp_to_base: run.clamp_to_base,
        strict_monotonicity: false,
    };
    c
}

fn is_json(out: &Option<PathBuf>) -> bool {
    out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "json"))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn memory_point(config: &SimConfig) -> Result<PointResult, Failure> {
    config.validate()?;
    let setup = irmwpm::experiments::Setup::<f64>::new(config.distance, config.rounds, config.p, config.idle_noise, true)?;
    let r = run_memory_on(&setup, config)?;
    eprintln!(
        "L={} T={} p={} {}: {}/{} failures, mean iterations {:.3}",
        r.distance,
        r.rounds,
        r.p,
        r.decoder.name(),
        r.rate.failures,
        r.rate.trials,
        r.iterations.mean
    );
    Ok(r)
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let config = sim_config(a.distance, a.rounds, a.p, &a.run);
    config.validate()?;
    let r = memory_point(&config)?;
    let text = if is_json(&a.run.out) {
        to_json(&json!({ "schema_version": SCHEMA_VERSION, "config": config, "results": [r] }))
    } else {
        to_csv(&[r])
    };
    emit(&a.run.out, &text)
}

fn lifetime(a: LifetimeArgs) -> Result<(), Failure> {
    let mut config = sim_config(a.sim.distance, a.sim.rounds, a.sim.p, &a.sim.run);
    config.check_period = a.check_period.unwrap_or(a.sim.distance);
    config.virtual_decoder = a.virtual_decoder;
    config.round_cap = a.round_cap;
    config.validate()?;
    let r = run_lifetime(&config)?;
    eprintln!(
        "L={} p={} {}: mean lifetime {:.1} ± {:.1} rounds, {} capped",
        r.distance,
        r.p,
        r.decoder.name(),
        r.mean_rounds,
        r.std_error,
        r.capped
    );
    let text = if is_json(&a.sim.run.out) {
        to_json(&json!({ "schema_version": SCHEMA_VERSION, "config": config, "result": r }))
    } else {
        format!(
            "distance,rounds,check_period,p,decoder,virtual_decoder,trials,mean_rounds,std_error,capped,mean_iters_per_window\n{},{},{},{},{},{},{},{},{},{},{}\n",
            r.distance,
            r.rounds,
            r.check_period,
            r.p,
            r.decoder.name(),
            r.virtual_decoder.name(),
            r.trials,
            r.mean_rounds,
            r.std_error,
            r.capped,
            r.mean_iterations_per_window
        )
    };
    emit(&a.sim.run.out, &text)
}

fn threshold(a: ThresholdArgs) -> Result<(), Failure> {
    let decoders = if a.both { vec![DecoderKind::Mwpm, DecoderKind::Irmwpm] } else { vec![a.run.decoder] };
    let mut configs = Vec::new();
    for &l in &a.distances {
        for &p in &a.p_grid {
            let c = sim_config(l, None, p, &a.run);
            c.validate()?;
            configs.push(c);
        }
    }
    let mut points = Vec::new();
    for c in &configs {
        let setup = irmwpm::experiments::Setup::<f64>::new(c.distance, c.rounds, c.p, c.idle_noise, true)?;
        for &d in &decoders {
            let config = SimConfig { decoder: d, ..*c };
            let r = run_memory_on(&setup, &config)?;
            eprintln!("L={} p={} {}: {}/{} failures", r.distance, r.p, d.name(), r.rate.failures, r.rate.trials);
            points.push(r);
        }
    }
    let mut estimates = serde_json::Map::new();
    for &d in &decoders {
        let scan: Vec<ScanPoint> = points.iter().filter(|r| r.decoder == d).map(ScanPoint::from).collect();
        let est = threshold_scan(&scan, a.bootstrap, a.run.seed)?;
        match (est.crossing, est.bootstrap_std) {
            (Some(c), Some(s)) => eprintln!("{}: crossing p = {:.5} ± {:.5}", d.name(), c, s),
            (Some(c), None) => eprintln!("{}: crossing p = {:.5}", d.name(), c),
            _ => eprintln!("{}: no crossing in range", d.name()),
        }
        estimates.insert(d.name().to_string(), serde_json::to_value(est).expect("serializable"));
    }
    let text = if is_json(&a.run.out) {
        to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "distances": a.distances,
            "p_grid": a.p_grid,
            "config": configs.first(),
            "points": points,
            "thresholds": estimates,
        }))
    } else {
        to_csv(&points)
    };
    emit(&a.run.out, &text)
}

fn fit(a: FitArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.input)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let col = |name: &str| {
        header.iter().position(|h| *h == name).ok_or_else(|| Failure::Usage(format!("input lacks column `{name}`")))
    };
    let (cl, cp, cd, cr) = (col("distance")?, col("p")?, col("decoder")?, col("rate")?);
    let mut by_decoder: Vec<(String, Vec<(f64, usize, f64)>)> = Vec::new();
    let mut skipped = 0;
    for (n, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Failure::Usage(format!("{}: malformed row {}", a.input.display(), n + 2));
        let l: usize = f.get(cl).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let p: f64 = f.get(cp).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let rate: f64 = f.get(cr).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let d = f.get(cd).ok_or_else(bad)?.to_string();
        if rate <= 0.0 {
            skipped += 1;
            continue;
        }
        match by_decoder.iter_mut().find(|(k, _)| *k == d) {
            Some((_, v)) => v.push((p, l, rate)),
            None => by_decoder.push((d, vec![(p, l, rate)])),
        }
    }
    if skipped > 0 {
        eprintln!("skipped {skipped} rows with zero observed rate");
    }
    let mut fits = Vec::new();
    for (decoder, data) in &by_decoder {
        let r = fit_scaling(data)?;
        let extrapolated = r.params.predict(0.001, 31);
        eprintln!("{decoder}: rms {:.4}, P_L(p=0.001, L=31) ≈ {:.3e}", r.rms, extrapolated);
        fits.push(json!({
            "decoder": decoder,
            "points": data.len(),
            "fit": r,
            "extrapolation": { "distance": 31, "p": 0.001, "rate": extrapolated },
        }));
    }
    emit(&a.out, &to_json(&json!({ "schema_version": SCHEMA_VERSION, "fits": fits })))
}

fn enumerate(a: EnumerateArgs) -> Result<(), Failure> {
    let rounds = a.rounds.unwrap_or(a.distance);
    let layout = CodeLayout::new(a.distance)?;
    let circuit = SeCircuit::new(&layout);
    let en = enumerate_single_faults(&layout, &circuit, rounds, a.idle_noise, true)?;
    let (gx, gz) = build_pair::<f64>(&layout, &en, Weighting::Unit)?;
    let mut edges = serde_json::Map::new();
    for g in [&gx, &gz] {
        let list: Vec<_> = g
            .edges
            .iter()
            .map(|e| {
                let mut locations: Vec<(usize, usize)> =
                    e.faults.iter().map(|&i| (en.faults[i].fault.round, en.faults[i].fault.op)).collect();
                locations.dedup();
                json!({
                    "nodes": [e.nodes.0, e.nodes.1],
                    "label": e.label,
                    "coefficient": e.coefficient.to_string(),
                    "locations": locations.len(),
                    "faults": e.faults,
                })
            })
            .collect();
        edges.insert(format!("{:?}", g.lattice).to_lowercase(), json!(list));
    }
    eprintln!("{} faults at {} locations", en.faults.len(), en.sites.len());
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "distance": a.distance,
        "rounds": rounds,
        "idle_noise": a.idle_noise,
        "enumeration": en,
        "edges": edges,
    });
    emit(&a.out, &to_json(&doc))
}

fn dump_graph(a: GraphArgs) -> Result<(), Failure> {
    let f = &a.faults;
    let rounds = f.rounds.unwrap_or(f.distance);
    let layout = CodeLayout::new(f.distance)?;
    let circuit = SeCircuit::new(&layout);
    let en = enumerate_single_faults(&layout, &circuit, rounds, f.idle_noise, true)?;
    let (gx, gz) = build_pair::<f64>(&layout, &en, Weighting::LogProbability { p: a.p })?;
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "distance": f.distance,
        "rounds": rounds,
        "p": a.p,
        "x": gx,
        "z": gz,
    });
    emit(&f.out, &to_json(&doc))
}

fn dump_layout(a: LayoutArgs) -> Result<(), Failure> {
    let layout = CodeLayout::new(a.distance)?;
    let circuit = SeCircuit::new(&layout);
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "layout": layout,
        "logical_x": layout.logical_x.to_string(),
        "logical_z": layout.logical_z.to_string(),
        "circuit": circuit,
    });
    emit(&a.out, &to_json(&doc))
}
