use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use idnc_core::net::{TransmissionPlan, Transmitter};
use idnc_core::sim::config::PRESETS;
use idnc_core::sim::sweep::{episode_rngs, instance, write_episode_csv};
use idnc_core::sim::{run_episode, run_sweep, write_csv, EpisodeOptions, ExperimentConfig, SweepParam, SweepSpec};
use idnc_core::verify;
use idnc_core::SchedulerKind;

#[derive(Parser)]
#[command(name = "idnc", version, about = "Cooperative IDNC scheduling over D2D networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode per scheduler on a single random instance.
    Run(RunArgs),
    /// Sweep one parameter and write mean completion times as CSV.
    Sweep(SweepArgs),
    /// Check the solvers against exhaustive oracles.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Overrides {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    devices: Option<usize>,
    #[arg(long)]
    files: Option<usize>,
    #[arg(long)]
    connectivity: Option<f64>,
    #[arg(long)]
    erasure: Option<f64>,
    #[arg(long)]
    jitter: Option<f64>,
    /// Base-station erasure as a multiple of the mean erasure.
    #[arg(long)]
    pmp_factor: Option<f64>,
    #[arg(long)]
    max_cluster: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Schedulers to run, comma separated.
    #[arg(long, value_delimiter = ',')]
    scheduler: Vec<SchedulerKind>,
    /// Run the single-transmitter baseline on a fully connected overlay.
    #[arg(long)]
    complete_overlay: bool,
}

impl Overrides {
    fn apply(&self, mut cfg: ExperimentConfig) -> idnc_core::Result<ExperimentConfig> {
        if let Some(v) = self.devices {
            cfg.num_devices = v;
        }
        if let Some(v) = self.files {
            cfg.num_files = v;
        }
        if let Some(v) = self.connectivity {
            cfg.connectivity = v;
        }
        if let Some(v) = self.erasure {
            cfg.mean_erasure = v;
        }
        if let Some(v) = self.jitter {
            cfg.erasure_jitter = v;
        }
        if let Some(v) = self.pmp_factor {
            cfg.pmp_factor = v;
        }
        if let Some(v) = self.max_cluster {
            cfg.max_cluster_size = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if !self.scheduler.is_empty() {
            cfg.schedulers = self.scheduler.clone();
        }
        cfg.baseline_complete_overlay |= self.complete_overlay;
        cfg.validate()?;
        Ok(cfg)
    }

    fn base(&self) -> idnc_core::Result<ExperimentConfig> {
        match &self.config {
            Some(p) => ExperimentConfig::from_path(p),
            None => Ok(ExperimentConfig::default()),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Print every round's transmissions.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Named sweep (ignored with --config).
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    preset: Option<String>,
    /// Swept parameter, overriding the config's sweep.
    #[arg(long, requires = "values")]
    param: Option<SweepParam>,
    #[arg(long, value_delimiter = ',', requires = "param")]
    values: Vec<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
    /// Aggregated CSV output (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-episode CSV output.
    #[arg(long)]
    episodes: Option<PathBuf>,
    /// Print the resolved config as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    graphs: usize,
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long, default_value_t = 100)]
    bijection: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn describe(plan: &TransmissionPlan) -> String {
    let parts: Vec<String> = plan
        .entries
        .iter()
        .map(|e| {
            let who = match e.transmitter {
                Transmitter::Device(a) => format!("{a}"),
                Transmitter::BaseStation { .. } => "bs".into(),
            };
            let files: Vec<String> = e.combination.files().iter().map(|f| f.to_string()).collect();
            format!("{who}:[{}]->{:?}", files.join("^"), e.targets)
        })
        .collect();
    parts.join(" ")
}

fn run(args: RunArgs) -> idnc_core::Result<()> {
    let cfg = args.overrides.apply(args.overrides.base()?)?;
    let base = instance(&cfg, 0, 0)?;
    println!(
        "U={} F={} C={:.3} (target {}) E={} seed={} wants={}",
        cfg.num_devices,
        cfg.num_files,
        base.connectivity_index(),
        cfg.connectivity,
        cfg.mean_erasure,
        cfg.seed,
        base.total_wants()
    );
    let opts = EpisodeOptions { log_plans: args.trace, ..Default::default() };
    for &kind in &cfg.schedulers {
        let state = if cfg.baseline_complete_overlay && kind == SchedulerKind::SingleTransmitter {
            base.with_complete_topology()
        } else {
            base.clone()
        };
        let (_, mut channel) = episode_rngs(cfg.seed, 0, 0);
        let start = Instant::now();
        let result = run_episode(state, kind, &cfg.scheduler_options(), &opts, &mut channel)?;
        let elapsed = start.elapsed();
        if args.trace {
            for (r, plan) in result.plans.iter().enumerate() {
                println!("  {kind} round {r}: {}", describe(plan));
            }
        }
        println!("{kind:>20}: completion {:>4} rounds ({:.2?})", result.completion_time, elapsed);
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> idnc_core::Result<()> {
    let base = match (&args.overrides.config, &args.preset) {
        (Some(_), _) | (None, None) => args.overrides.base()?,
        (None, Some(name)) => ExperimentConfig::preset(name)?,
    };
    let mut cfg = args.overrides.apply(base)?;
    if let Some(param) = args.param {
        cfg.sweep = Some(SweepSpec { param, values: args.values.clone() });
    }
    if let Some(n) = args.iterations {
        cfg.iterations = n;
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    cfg.validate()?;
    if args.print_config {
        print!("{}", cfg.to_toml_string()?);
        return Ok(());
    }
    let result = run_sweep(&cfg)?;
    let rows = result.rows();
    match &args.out {
        Some(p) => write_csv(&rows, BufWriter::new(File::create(p)?))?,
        None => write_csv(&rows, io::stdout().lock())?,
    }
    if let Some(p) = &args.episodes {
        write_episode_csv(&result.episode_rows(), BufWriter::new(File::create(p)?))?;
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> idnc_core::Result<bool> {
    let suites = [
        verify::fixture_suite()?,
        verify::clique_suite(args.graphs, args.seed)?,
        verify::objective_suite(args.instances, args.seed)?,
        verify::bijection_suite(args.bijection, args.seed)?,
    ];
    let mut out = io::stdout().lock();
    let mut ok = true;
    for s in &suites {
        let status = if s.passed() { "PASS" } else { "FAIL" };
        writeln!(out, "{status} {} ({} checks, {} failed)", s.name, s.checked, s.failures.len())?;
        for f in s.failures.iter().take(10) {
            writeln!(out, "    {f}")?;
        }
        ok &= s.passed();
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a).map(|_| true),
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
