use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eix_core::{gen_stream, ClassSchedule, MergeGate, MergeMethod, RuleKind, TNorm, TwinGaussians};
use fuzzy_eix::config::{parse_gate, parse_merge, parse_tnorm, Settings};
use fuzzy_eix::rules::RuleFormat;
use fuzzy_eix::{atomic, csvio, rules, run, snapshot, sweep, Error, Result};

/// Evolving granular classifier for numerical data streams.
#[derive(Parser)]
#[command(name = "eix", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream a CSV file through the model, test-then-train.
    Run(RunArgs),
    /// Write a rotating twin-Gaussians stream.
    Gen(GenArgs),
    /// Turn a saved model into a rule base.
    ExportRules(ExportArgs),
    /// Evaluate a grid of (epsilon, rho) pairs over several seeds.
    Sweep(SweepArgs),
}

#[derive(Args, Default)]
struct EngineFlags {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// weighted-mean or convex-hull
    #[arg(long, value_parser = parse_merge)]
    merge: Option<MergeMethod>,
    /// min or product
    #[arg(long, value_parser = parse_tnorm)]
    tnorm: Option<TNorm>,
    /// distance or core-overlap
    #[arg(long, value_parser = parse_gate)]
    merge_gate: Option<MergeGate>,
    /// First step of the second evaluation stage; 0 for a single stage.
    #[arg(long)]
    stage_split: Option<u64>,
}

impl EngineFlags {
    /// Flags layered over the `EIX_CONFIG` file.
    fn settings(&self, seed: Option<u64>) -> Result<Settings> {
        let flags = Settings {
            epsilon: self.epsilon,
            rho: self.rho,
            alpha: self.alpha,
            beta: self.beta,
            merge: self.merge,
            tnorm: self.tnorm,
            merge_gate: self.merge_gate,
            seed,
            stage_split: self.stage_split,
        };
        Ok(flags.or(Settings::from_env()?))
    }
}

#[derive(Args)]
struct RunArgs {
    /// CSV with attribute columns and an optional `label` column.
    #[arg(long)]
    input: PathBuf,
    /// Per-step metrics CSV.
    #[arg(long)]
    output: PathBuf,
    /// Where to save the final model.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Decision-boundary samples on a lattice over the unit square (two attributes only).
    #[arg(long)]
    boundary: Option<PathBuf>,
    #[arg(long, default_value_t = 101)]
    resolution: usize,
    #[command(flatten)]
    engine: EngineFlags,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 400)]
    steps: u64,
    /// Rotation per step in degrees once drift starts.
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    drift_start: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Class order: alternate (odd steps class 1) or random.
    #[arg(long, value_enum, default_value = "alternate")]
    schedule: ScheduleArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Alternate,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum TypeArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "type", value_enum, default_value = "1")]
    kind: TypeArg,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Defaults to standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// CSV with header `epsilon,rho`; the built-in six-cell grid when omitted.
    #[arg(long)]
    grid_file: Option<PathBuf>,
    /// `a..b` (end exclusive) or a comma-separated list.
    #[arg(long, default_value = "0..10")]
    seeds: String,
    /// Summary CSV, one row per cell and stage.
    #[arg(long)]
    out: PathBuf,
    /// Per-step granule counts for every cell and seed.
    #[arg(long)]
    series: Option<PathBuf>,
    #[arg(long, default_value_t = 400)]
    steps: u64,
    #[arg(long)]
    phi: Option<f64>,
    #[command(flatten)]
    engine: EngineFlags,
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let settings = args.engine.settings(None)?;
    let cfg = settings.engine_config()?;
    let loaded = csvio::read_stream(&args.input)?;
    if args.boundary.is_some() && loaded.attributes.len() != 2 {
        return Err(Error::Config(
            "--boundary needs exactly two attributes".into(),
        ));
    }
    let (metrics, engine) = run::timed_run(cfg, &loaded.instances, settings.stage_split())?;

    let metrics_text = run::metrics_csv(&metrics);
    let snap = args.snapshot.as_ref().map(|_| snapshot::snapshot(&engine));
    let boundary = args
        .boundary
        .as_ref()
        .map(|_| run::boundary_csv(&engine, args.resolution));
    let mut files: Vec<(&Path, &[u8])> = vec![(&args.output, metrics_text.as_bytes())];
    if let (Some(p), Some(t)) = (&args.snapshot, &snap) {
        files.push((p, t.as_bytes()));
    }
    if let (Some(p), Some(t)) = (&args.boundary, &boundary) {
        files.push((p, t.as_bytes()));
    }
    atomic::write_all(&files)?;

    println!("instances: {}", metrics.steps.len());
    println!("granules: {}", engine.state().len());
    for (i, s) in metrics.stages.iter().enumerate() {
        let acc = s.accuracy.map_or("-".to_string(), |a| format!("{a:.2}%"));
        println!(
            "stage {} (h {}..={}): acc {acc}, avg granules {:.2}, creations {}, rejected {}",
            i + 1,
            s.first_h,
            s.last_h,
            s.avg_granules,
            s.creations,
            s.rejected
        );
    }
    println!("wall time: {:.4} s", metrics.wall_time_s);
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let settings = Settings {
        seed: args.seed,
        ..Default::default()
    }
    .or(Settings::from_env()?);
    let defaults = TwinGaussians::default();
    let spec = TwinGaussians {
        steps: args.steps,
        phi_deg: args.phi.unwrap_or(defaults.phi_deg),
        drift_start: args.drift_start.unwrap_or(defaults.drift_start),
        schedule: match args.schedule {
            ScheduleArg::Alternate => ClassSchedule::Alternate,
            ScheduleArg::Random => ClassSchedule::Random,
        },
        ..defaults
    };
    let stream =
        gen_stream(&spec, settings.seed.unwrap_or(0)).map_err(|e| Error::Config(e.to_string()))?;
    csvio::write_stream(&args.out, &stream, 2)
}

fn cmd_export(args: ExportArgs) -> Result<()> {
    let engine = snapshot::read_snapshot(&args.model)?;
    let kind = match args.kind {
        TypeArg::One => RuleKind::Type1,
        TypeArg::Two => RuleKind::Type2,
    };
    let format = match args.format {
        FormatArg::Json => RuleFormat::Json,
        FormatArg::Text => RuleFormat::Text,
    };
    let mut text = rules::render(&rules::rulebase(&engine, kind)?, format);
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &args.output {
        Some(p) => atomic::write_file(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let settings = args.engine.settings(None)?;
    let base = settings.engine_config()?;
    let grid = match &args.grid_file {
        Some(p) => sweep::read_grid(p)?,
        None => sweep::default_grid(),
    };
    let defaults = TwinGaussians::default();
    let opts = sweep::SweepOptions {
        base,
        stream: TwinGaussians {
            steps: args.steps,
            phi_deg: args.phi.unwrap_or(defaults.phi_deg),
            ..defaults
        },
        seeds: sweep::parse_seeds(&args.seeds)?,
        stage_split: settings.stage_split(),
    };
    let started = Instant::now();
    let results = sweep::run_sweep(&grid, &opts)?;
    let summary = sweep::sweep_csv(&results);
    let series = args.series.as_ref().map(|_| sweep::series_csv(&results));
    let mut files: Vec<(&Path, &[u8])> = vec![(&args.out, summary.as_bytes())];
    if let (Some(p), Some(t)) = (&args.series, &series) {
        files.push((p, t.as_bytes()));
    }
    atomic::write_all(&files)?;
    print!("{summary}");
    eprintln!(
        "{} cells x {} seeds in {:.2} s",
        grid.len(),
        opts.seeds.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Gen(a) => cmd_gen(a),
        Command::ExportRules(a) => cmd_export(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eix: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
