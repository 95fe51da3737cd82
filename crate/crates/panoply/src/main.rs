//! Thin CLI over the pipeline stages.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use panoply::config::{Overrides, PipelineConfig};
use panoply::{pipeline, Result};

#[derive(Parser)]
#[command(
    name = "panoply",
    version,
    about = "Panoramic scan-to-model toolkit: convert 360° captures, fuse masks, \
             label point clouds, and inventory mounted equipment."
)]
struct Cli {
    #[command(subcommand)]
    command: Stage,
}

#[derive(Args)]
struct Common {
    /// Pipeline configuration file (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Worker threads (overrides run.workers; 0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
    /// Random seed (overrides run.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Projection radius in meters (overrides projection.radius).
    #[arg(long)]
    radius: Option<f64>,
    /// Evaluation matching gate in meters (overrides evaluation.max_dist).
    #[arg(long)]
    max_dist: Option<f64>,
}

#[derive(Subcommand)]
enum Stage {
    /// Split capture frames into rectilinear face views.
    Convert(Common),
    /// Run the external segmentation backend and validate its masks.
    Segment(Common),
    /// Merge face masks into per-frame panoramic masks.
    Fuse(Common),
    /// Label the point cloud from the merged masks.
    Project(Common),
    /// Cluster labeled points into the asset inventory.
    Cluster(Common),
    /// Sample the building model into a synthetic cloud.
    Sample(Common),
    /// Fit the capture-to-model transform from picked pairs.
    Register(Common),
    /// Compare the inventory against ground truth.
    Evaluate(Common),
    /// Run every configured stage in order.
    Pipeline(Common),
}

impl Stage {
    fn common(&self) -> &Common {
        match self {
            Stage::Convert(c)
            | Stage::Segment(c)
            | Stage::Fuse(c)
            | Stage::Project(c)
            | Stage::Cluster(c)
            | Stage::Sample(c)
            | Stage::Register(c)
            | Stage::Evaluate(c)
            | Stage::Pipeline(c) => c,
        }
    }
}

fn run(stage: &Stage) -> Result<()> {
    let common = stage.common();
    let mut config = PipelineConfig::load(&common.config)?;
    config.apply_overrides(&Overrides {
        workers: common.workers,
        seed: common.seed,
        radius: common.radius,
        max_dist: common.max_dist,
    });
    config.validate()?;

    match stage {
        Stage::Convert(_) => {
            let s = pipeline::convert(&config)?;
            println!("convert: {} frames -> {} faces", s.frames, s.faces);
            for (file, reason) in &s.skipped {
                println!("  skipped {file}: {reason}");
            }
        }
        Stage::Segment(_) => {
            let s = pipeline::segment(&config)?;
            println!("segment: {} masks validated", s.masks);
        }
        Stage::Fuse(_) => {
            let s = pipeline::fuse(&config)?;
            println!("fuse: {} frames merged", s.frames);
        }
        Stage::Project(_) => {
            let s = pipeline::project(&config)?;
            println!(
                "project: {} points over {} frames, {} labeled",
                s.points, s.frames, s.labeled_points
            );
        }
        Stage::Cluster(_) => {
            let s = pipeline::cluster(&config)?;
            println!("cluster: {} instances", s.instances);
        }
        Stage::Sample(_) => {
            let s = pipeline::sample(&config)?;
            println!("sample: {} points", s.points);
        }
        Stage::Register(_) => {
            let s = pipeline::register(&config)?;
            println!(
                "register: scale {:.6}, rms residual {:.6} m{}",
                s.scale,
                s.rms_residual,
                if s.registered_inventory {
                    ", inventory registered"
                } else {
                    ""
                }
            );
        }
        Stage::Evaluate(_) => {
            let report = pipeline::evaluate(&config)?;
            print!(
                "{}",
                panoply::io::report::render_table(&report)
            );
        }
        Stage::Pipeline(_) => {
            let s = pipeline::run_pipeline(&config)?;
            println!("pipeline: {}", s.stages.join(" -> "));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
