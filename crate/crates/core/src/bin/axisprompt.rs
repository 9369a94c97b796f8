use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use axisprompt::cli::{
    cmd_ablate, cmd_convert, cmd_eval, cmd_render, cmd_synth, CliError, EvalMode, PipelineConfig,
    Sweep,
};

#[derive(Parser)]
#[command(name = "axisprompt", version, about = "3D axis visual prompts for multimodal models")]
struct Args {
    /// Pipeline config (TOML). Defaults apply when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set rig.n_views=4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Mock,
    Live,
}

impl From<Mode> for EvalMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Mock => EvalMode::Mock,
            Mode::Live => EvalMode::Live,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    Views,
    AxisElements,
    MarkStyle,
}

impl From<SweepArg> for Sweep {
    fn from(s: SweepArg) -> Self {
        match s {
            SweepArg::Views => Sweep::Views,
            SweepArg::AxisElements => Sweep::AxisElements,
            SweepArg::MarkStyle => Sweep::MarkStyle,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write prompt bundles for every scene.
    Render,
    /// Query the model (or the offline oracle) and score the answers.
    Eval {
        #[arg(long, value_enum, default_value = "mock")]
        mode: Mode,
    },
    /// Run one ablation sweep and write its comparison table.
    Ablate {
        #[arg(long, value_enum)]
        sweep: SweepArg,
        #[arg(long, value_enum, default_value = "mock")]
        mode: Mode,
    },
    /// Back-project an RGB-D frame into a PLY point cloud.
    Convert {
        #[arg(long)]
        color: PathBuf,
        /// 16-bit depth PNG.
        #[arg(long)]
        depth: PathBuf,
        /// JSON with fx, fy, cx, cy, width, height.
        #[arg(long)]
        intrinsics: PathBuf,
        /// Depth units per meter.
        #[arg(long, default_value_t = 1000.0)]
        depth_scale: f64,
        #[arg(long, default_value_t = 1)]
        stride: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write generated test scenes as PLY files.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(args: Args) -> Result<serde_json::Value, CliError> {
    let load = || PipelineConfig::load(args.config.as_deref(), &args.overrides);
    Ok(match args.command {
        Command::Render => {
            let dirs = cmd_render(&load()?)?;
            json!({ "bundles": dirs })
        }
        Command::Eval { mode } => {
            let out = cmd_eval(&load()?, mode.into())?;
            json!({
                "summary": out.summary,
                "failed_scenes": out.failed_scenes,
                "isolation_violations": out.isolation_violations,
            })
        }
        Command::Ablate { sweep, mode } => {
            let rows = cmd_ablate(&load()?, sweep.into(), mode.into())?;
            let rows: Vec<_> = rows
                .into_iter()
                .map(|(arm, summary)| json!({ "arm": arm, "summary": summary }))
                .collect();
            json!({ "arms": rows })
        }
        Command::Convert {
            color,
            depth,
            intrinsics,
            depth_scale,
            stride,
            out,
        } => {
            let n = cmd_convert(&color, &depth, &intrinsics, depth_scale, stride, &out)?;
            json!({ "points": n, "out": out })
        }
        Command::Synth { out, count, seed } => json!({ "scenes": cmd_synth(&out, count, seed)? }),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
