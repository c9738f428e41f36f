use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dynocc::pipeline::{run_pipeline, FlowSource, PipelineConfig};
use dynocc::Error;

/// Extract relative depth pairs from a directory of video frames.
#[derive(Parser, Debug)]
#[command(name = "dynocc", version)]
struct Args {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Frame directory; overrides the config.
    #[arg(long)]
    frames: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory of `<stem>.prev.flo` / `<stem>.next.flo` files.
    #[arg(long, conflicts_with = "internal_flow")]
    flow_dir: Option<PathBuf>,
    /// Estimate flow by block matching.
    #[arg(long)]
    internal_flow: bool,
    /// Annotation output (JSON Lines).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    overlay_dir: Option<PathBuf>,
    #[arg(long)]
    keep_rate: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
}

fn build_config(args: Args) -> Result<PipelineConfig, Error> {
    let flow_override = match (args.flow_dir, args.internal_flow) {
        (Some(dir), _) => Some(FlowSource::FloDir { dir }),
        (None, true) => Some(FlowSource::internal()),
        (None, false) => None,
    };
    let mut cfg = match args.config {
        Some(path) => PipelineConfig::from_toml_file(path)?,
        None => {
            let frames = args
                .frames
                .clone()
                .ok_or_else(|| Error::Config("either --config or --frames is required".into()))?;
            let flow = flow_override.clone().ok_or_else(|| {
                Error::Config("either --flow-dir or --internal-flow is required".into())
            })?;
            let out = args
                .out
                .clone()
                .ok_or_else(|| Error::Config("--out is required without --config".into()))?;
            PipelineConfig::new(frames, flow, out)
        }
    };
    if let Some(f) = args.frames {
        cfg.frames_dir = f;
    }
    if let Some(flow) = flow_override {
        cfg.flow = flow;
    }
    if let Some(out) = args.out {
        cfg.out = out;
    }
    if let Some(dir) = args.overlay_dir {
        cfg.overlay_dir = Some(dir);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(k) = args.keep_rate {
        cfg.sampling.keep_rate = k;
    }
    if let Some(d) = args.delta {
        cfg.order.delta = d;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cfg = match build_config(Args::parse()) {
        Ok(cfg) => cfg,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(2);
        }
    };
    match run_pipeline(&cfg) {
        Ok(summary) if summary.processed.is_empty() => {
            log::error!("no frames were processed");
            ExitCode::from(3)
        }
        Ok(summary) => {
            println!(
                "{}",
                serde_json::to_string(&summary).expect("summary serializes")
            );
            ExitCode::SUCCESS
        }
        Err(e @ Error::Config(_)) => {
            log::error!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(1)
        }
    }
}
