//! `graspforge`: synthesize demonstrations, extract reward parameters, train
//! DDPG agents and run the evaluation protocols.
//!
//! Log verbosity is read from `GRASPFORGE_LOG` (`error`, `warn`, `info`,
//! `debug`, `trace`; default `warn`).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};
use graspforge_core::config::RunConfig;
use graspforge_core::harness::cmd;
use graspforge_core::mocap::DemoKind;
use graspforge_core::par::Exec;
use graspforge_core::Error;

#[derive(Parser)]
#[command(name = "graspforge", version, about = "Learn hand-interaction policies from motion-capture rewards")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Checkpoint written by `train`.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Evaluate on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic demonstration in the mocap text format.
    Synth {
        #[command(flatten)]
        common: Common,
        /// handshake, clap or touch.
        #[arg(long, default_value = "handshake")]
        kind: String,
    },
    /// Extract interaction goals from demonstration files.
    Extract {
        #[command(flatten)]
        common: Common,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Train an agent; writes metrics.csv and checkpoint.json.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Train every ablation arm for every configured seed.
    Ablate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sequential: bool,
    },
    /// Success rate over a grid of target yaw/pitch offsets.
    Robust(EvalArgs),
    /// Success rate against a randomly moving target, per speed.
    Moving(EvalArgs),
    /// Render CSV outputs as SVG figures plus a text summary.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Dump the resolved scene and a sampled episode start as JSON.
    DumpScene {
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(path: Option<&Path>) -> anyhow::Result<RunConfig> {
    Ok(match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    })
}

fn exec(sequential: bool) -> Exec {
    if sequential {
        Exec::Sequential
    } else {
        Exec::default()
    }
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Synth { common, kind } => {
            let kind: DemoKind = kind.parse()?;
            let cfg = load_config(common.config.as_deref())?;
            report(&[cmd::cmd_synth(kind, &cfg.scene, common.seed.unwrap_or(0), &common.out)?]);
        }
        Command::Extract { common, files } => {
            let cfg = load_config(common.config.as_deref())?;
            report(&cmd::cmd_extract(&cfg, &files, &common.out)?);
        }
        Command::Train { common } => {
            let cfg = load_config(common.config.as_deref())?;
            let seed = common.seed.unwrap_or(0);
            let out = cmd::cmd_train(&cfg, seed, &common.out).with_context(|| format!("training with seed {seed}"))?;
            if let Some(row) = out.metrics.last() {
                println!("final eval success {:.4} after {} steps", row.eval_success_rate, row.env_steps);
            }
        }
        Command::Ablate { common, sequential } => {
            let cfg = load_config(common.config.as_deref())?;
            let res = cmd::cmd_ablate(&cfg, &common.out, exec(sequential))?;
            for arm in &cfg.ablation.arms {
                let f = res.final_successes(*arm);
                let mean = f.iter().sum::<f64>() / f.len().max(1) as f64;
                println!("{arm}: mean final success {mean:.4} over {} seeds", f.len());
            }
        }
        Command::Robust(a) => {
            let spec = match a.common.config.as_deref() {
                Some(p) => Some(RunConfig::load(p)?.robustness),
                None => None,
            };
            report(&cmd::cmd_robust(&a.checkpoint, spec.as_ref(), a.common.seed, &a.common.out, exec(a.sequential))?);
        }
        Command::Moving(a) => {
            let spec = match a.common.config.as_deref() {
                Some(p) => Some(RunConfig::load(p)?.robustness),
                None => None,
            };
            report(&cmd::cmd_moving(&a.checkpoint, spec.as_ref(), a.common.seed, &a.common.out, exec(a.sequential))?);
        }
        Command::Report { common, files } => report(&cmd::cmd_report(&files, &common.out)?),
        Command::DumpScene { common } => {
            let cfg = load_config(common.config.as_deref())?;
            report(&[cmd::cmd_dump_scene(&cfg, common.seed.unwrap_or(0), &common.out)?]);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GRASPFORGE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.chain().find_map(|c| c.downcast_ref::<Error>()).map_or(2, cmd::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
