use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use causal_averaging::config::{ConfigBuilder, DEFAULT_MASTER_SEED};
use causal_averaging::error::{Result, RunnerError};
use causal_averaging::harness::{aggregate, run_grid, Factor};
use causal_averaging::io::{
    create, open, read_runs, read_sample, write_runs, write_summary, Manifest,
};
use causal_averaging::report::write_report;
use causal_averaging_core::decide::{estimate_effect, ma_action, ms_action};
use causal_averaging_core::discovery::{bootstrap_posterior, score, Method};
use causal_averaging_core::synth::{BivariateSample, DgpKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Minimum rows accepted by `discover` and `decide`.
const MIN_ROWS: usize = 8;

#[derive(Parser)]
#[command(
    name = "causal-averaging",
    version,
    about = "Causal discovery under uncertainty: model selection versus model averaging"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation grid and write runs.csv, summary.csv and manifest.json.
    Simulate(SimulateArgs),
    /// Estimate P(x -> y) for a two-column CSV file.
    Discover(DiscoverArgs),
    /// Discovery plus per-point MS and MA actions for a two-column CSV file.
    Decide(DecideArgs),
    /// Tables, tests and figures from a runs.csv file.
    Report(ReportArgs),
}

/// Settings are layered: built-in defaults, then `--config`, then `--set`,
/// then the dedicated flags.
#[derive(Args)]
struct SimulateArgs {
    /// JSON config with keys mirroring the simulation settings, or a manifest.json.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Sample sizes, comma separated.
    #[arg(long)]
    n: Option<String>,
    /// Data generating processes: heteroskedastic, nonlinear.
    #[arg(long)]
    dgp: Option<String>,
    /// Effect sizes: small, large.
    #[arg(long)]
    effect: Option<String>,
    /// Intervention costs.
    #[arg(long)]
    lambda: Option<String>,
    /// Discovery methods: ANM, Regression.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    /// Bootstrap resamples per run.
    #[arg(long)]
    m: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Anm,
    Regression,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Anm => Method::Anm,
            MethodArg::Regression => Method::Regression,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DgpArg {
    Heteroskedastic,
    Nonlinear,
}

impl From<DgpArg> for DgpKind {
    fn from(d: DgpArg) -> Self {
        match d {
            DgpArg::Heteroskedastic => DgpKind::Heteroskedastic,
            DgpArg::Nonlinear => DgpKind::Nonlinear,
        }
    }
}

#[derive(Args)]
struct DiscoverArgs {
    /// CSV file with header `x,y`.
    data: PathBuf,
    #[arg(long, value_enum, default_value = "anm")]
    method: MethodArg,
    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
    seed: u64,
}

#[derive(Args)]
struct DecideArgs {
    #[command(flatten)]
    discover: DiscoverArgs,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    /// Effect model used for the estimate: heteroskedastic or nonlinear.
    #[arg(long, value_enum)]
    dgp_kind: Option<DgpArg>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    runs: PathBuf,
    #[arg(long, default_value = "report")]
    out: PathBuf,
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut builder = ConfigBuilder::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| RunnerError::io(path, e))?;
        builder.merge_json(&text)?;
    }
    for o in &args.overrides {
        builder.set_str(o)?;
    }
    let lists = [
        ("sample_sizes", &args.n),
        ("dgp_kinds", &args.dgp),
        ("effect_sizes", &args.effect),
        ("lambdas", &args.lambda),
        ("methods", &args.method),
    ];
    for (key, value) in lists {
        if let Some(v) = value {
            builder.set_str(&format!("{key}={v}"))?;
        }
    }
    if let Some(v) = args.reps {
        builder.set("reps", json!(v));
    }
    if let Some(v) = args.m {
        builder.set("bootstrap_m", json!(v));
    }
    if let Some(v) = args.seed {
        builder.set("master_seed", json!(v));
    }
    if let Some(v) = args.threads {
        builder.set("threads", json!(v));
    }
    let config = builder.build()?;

    fs::create_dir_all(&args.out).map_err(|e| RunnerError::io(&args.out, e))?;
    let start = Instant::now();
    let records = run_grid(&config)?;
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    write_runs(create(&args.out.join("runs.csv"))?, &records)?;
    match aggregate(&records, &Factor::ALL) {
        Ok(summary) => write_summary(create(&args.out.join("summary.csv"))?, &summary)?,
        Err(_) => eprintln!("warning: no successful runs, summary.csv not written"),
    }
    let manifest = serde_json::to_string_pretty(&Manifest::new(&config))
        .map_err(|e| RunnerError::Data(e.to_string()))?;
    let path = args.out.join("manifest.json");
    fs::write(&path, manifest + "\n").map_err(|e| RunnerError::io(&path, e))?;
    eprintln!(
        "{} runs ({failed} failed) in {:.1}s, written to {}",
        records.len(),
        start.elapsed().as_secs_f64(),
        args.out.display()
    );
    Ok(())
}

fn load_sample(path: &Path) -> Result<BivariateSample> {
    let sample = read_sample(open(path)?)?;
    if sample.len() < MIN_ROWS {
        return Err(RunnerError::Data(format!(
            "{}: need at least {MIN_ROWS} rows, found {}",
            path.display(),
            sample.len()
        )));
    }
    Ok(sample)
}

fn discovery_json(
    sample: &BivariateSample,
    args: &DiscoverArgs,
) -> Result<(f64, serde_json::Value)> {
    let method = Method::from(args.method);
    let posterior = bootstrap_posterior(sample, method, args.m, args.seed)?;
    let full = score(sample, method)?;
    let value = json!({
        "p_forward": posterior.p_forward,
        "method": method.as_str(),
        "m": args.m,
        "n": sample.len(),
        "degenerate_iterations": posterior.degenerate_iterations,
        "scores_on_full_sample": {
            "forward": full.forward,
            "backward": full.backward,
            "favors_forward": full.favors_forward,
        },
    });
    Ok((posterior.p_forward, value))
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| RunnerError::Data(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn discover(args: &DiscoverArgs) -> Result<()> {
    let sample = load_sample(&args.data)?;
    print_json(&discovery_json(&sample, args)?.1)
}

fn decide(args: &DecideArgs) -> Result<()> {
    if !(args.lambda.is_finite() && args.lambda >= 0.0) {
        return Err(RunnerError::Config(format!(
            "lambda must be finite and non-negative, got {}",
            args.lambda
        )));
    }
    let Some(kind) = args.dgp_kind else {
        let valid: Vec<String> = DgpArg::value_variants()
            .iter()
            .filter_map(|v| v.to_possible_value().map(|p| p.get_name().to_string()))
            .collect();
        return Err(RunnerError::Config(format!(
            "--dgp-kind is required; valid values: {}",
            valid.join(", ")
        )));
    };
    let kind = DgpKind::from(kind);
    let sample = load_sample(&args.discover.data)?;
    let (p, mut value) = discovery_json(&sample, &args.discover)?;
    let effect = estimate_effect(&sample, kind)?;
    let points: Vec<serde_json::Value> = sample
        .x()
        .iter()
        .map(|&x| {
            json!({
                "x": x,
                "effect_hat": effect.eval(x),
                "a_ms": ms_action(p, &effect, args.lambda, x),
                "a_ma": ma_action(p, &effect, args.lambda, x),
            })
        })
        .collect();
    value["lambda"] = json!(args.lambda);
    value["dgp_kind"] = json!(kind.as_str());
    value["points"] = json!(points);
    print_json(&value)
}

fn report(args: &ReportArgs) -> Result<()> {
    let records = read_runs(open(&args.runs)?)?;
    let r = write_report(&args.out, &records)?;
    eprintln!(
        "{} runs ({} failed) summarised into {}",
        r.tests.runs.total,
        r.tests.runs.failed,
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Discover(a) => discover(a),
        Command::Decide(a) => decide(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
