use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use bddl_cli::commands::{self, BenchArgs, ReplayArgs, SampleArgs, EXIT_DOMAIN};
use bddl_cli::config::EngineConfig;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bddl", version, about = "Parse, instantiate, and evaluate BDDL household activities")]
struct Cli {
    /// Engine config file; defaults to $ENGINE_CONFIG, then ./engine.toml.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse BDDL files and report the first error in each.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Report which activities use only supported kinematic predicates.
    Classify {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Comma-separated supported predicate names.
        #[arg(long, value_delimiter = ',')]
        supported: Option<Vec<String>>,
    },
    /// Sample an activity instance into scene and scope files.
    Sample {
        #[arg(long)]
        activity: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_scene: PathBuf,
        #[arg(long)]
        out_scope: PathBuf,
    },
    /// Score the goal (or, with --init, the init conditions) on a scene.
    Evaluate {
        #[arg(long)]
        activity: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        scope: PathBuf,
        #[arg(long)]
        init: bool,
    },
    /// Score the goal on every frame of a pose trajectory.
    Replay {
        #[arg(long)]
        activity: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        scope: PathBuf,
        #[arg(long)]
        trajectory: PathBuf,
    },
    /// Measure goal-scoring throughput across worker counts.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        workers: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        frames: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, requires = "scene")]
        activity: Option<PathBuf>,
        #[arg(long, requires = "activity")]
        scene: Option<PathBuf>,
        #[arg(long, requires = "activity")]
        scope: Option<PathBuf>,
        /// Table count of the synthetic scene (five objects per table).
        #[arg(long, default_value_t = 20)]
        tables: usize,
        #[arg(long, default_value_t = 600.0)]
        duration_cap: f64,
        /// Write the JSON report here.
        #[arg(long)]
        json_out: Option<PathBuf>,
        /// Earlier JSON report to compute speedups against.
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Render an asset manifest as a comparison table.
    Stats {
        manifest: PathBuf,
        #[arg(long)]
        markdown: bool,
    },
}

fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let cfg = || EngineConfig::resolve(cli.config.as_deref());
    match &cli.command {
        Command::Validate { paths } => commands::validate(paths, out, err),
        Command::Classify { paths, supported } => commands::classify(paths, supported.as_deref(), out, err),
        Command::Sample { activity, scene, seed, out_scene, out_scope } => commands::sample(
            SampleArgs { activity, scene, seed: *seed, out_scene, out_scope },
            &cfg()?,
            out,
        ),
        Command::Evaluate { activity, scene, scope, init } => {
            commands::evaluate(activity, scene, scope, *init, &cfg()?, out, err)
        }
        Command::Replay { activity, scene, scope, trajectory } => {
            commands::replay(ReplayArgs { activity, scene, scope, trajectory }, &cfg()?, out, err)
        }
        Command::Bench { workers, frames, seed, activity, scene, scope, tables, duration_cap, json_out, baseline } => {
            let cfg = if activity.is_some() { cfg()? } else { EngineConfig::default() };
            let args = BenchArgs {
                workers: workers.clone(),
                frames: *frames,
                seed: *seed,
                activity: activity.as_deref(),
                scene: scene.as_deref(),
                scope: scope.as_deref(),
                tables: *tables,
                duration_cap: Duration::try_from_secs_f64(*duration_cap)
                    .map_err(|e| anyhow::anyhow!("--duration-cap: {e}"))?,
                json_out: json_out.as_deref(),
                baseline: baseline.as_deref(),
            };
            commands::bench(args, &cfg, out)
        }
        Command::Stats { manifest, markdown } => commands::stats(manifest, *markdown, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stdout, stderr) = (io::stdout(), io::stderr());
    let (mut out, mut err) = (stdout.lock(), stderr.lock());
    let code = match run(cli, &mut out, &mut err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_DOMAIN
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
