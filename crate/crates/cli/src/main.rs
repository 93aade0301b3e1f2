use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use drivekit_cli::cluster::cmd_cluster;
use drivekit_cli::config::{RunConfig, OUT_DIR_ENV};
use drivekit_cli::evaluate::cmd_evaluate;
use drivekit_cli::generate::{cmd_generate, MANIFEST_FILE};
use drivekit_cli::plan::{cmd_plan, PLANS_MANIFEST_FILE, PLAN_DIR};
use drivekit_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "drivekit", version, about = "Synthetic driving scenarios, planning and open-loop evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

/// Run configuration: a JSON file, then per-field overrides.
#[derive(Args, Debug, Default)]
struct ConfigArgs {
    /// JSON run configuration; flags below take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    num_scenarios: Option<usize>,
    #[arg(long)]
    num_frames: Option<usize>,
    #[arg(long)]
    num_agents: Option<usize>,
    #[arg(long)]
    sigma_pos: Option<f64>,
    #[arg(long)]
    sigma_yaw: Option<f64>,
    #[arg(long)]
    drop_prob: Option<f64>,
    /// Mean false positives per frame.
    #[arg(long)]
    fp_rate: Option<f64>,
    #[arg(long)]
    miss_threshold: Option<f64>,
    #[arg(long)]
    epa_alpha: Option<f64>,
    #[arg(long)]
    grid_resolution: Option<f64>,
    #[arg(long)]
    match_dist: Option<f64>,
    #[arg(long)]
    plan_modes: Option<usize>,
    #[arg(long)]
    plan_steps: Option<usize>,
    #[arg(long)]
    top_k_modes: Option<usize>,
    #[arg(long)]
    track_threshold: Option<f64>,
    /// Select by raw score, skipping the collision check.
    #[arg(long)]
    no_rescore: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field.clone() { $target = v; })*
            };
        }
        set! {
            out_dir => c.out_dir,
            seed => c.seed,
            num_scenarios => c.num_scenarios,
            num_frames => c.scenario.num_frames,
            num_agents => c.scenario.num_agents,
            sigma_pos => c.noise.sigma_pos,
            sigma_yaw => c.noise.sigma_yaw,
            drop_prob => c.noise.drop_prob,
            fp_rate => c.noise.fp_rate,
            miss_threshold => c.metrics.miss_threshold,
            epa_alpha => c.metrics.epa_alpha,
            grid_resolution => c.metrics.grid_resolution,
            match_dist => c.metrics.match_dist,
            plan_modes => c.planner.plan_modes,
            plan_steps => c.planner.plan_steps,
            top_k_modes => c.planner.top_k_modes,
            track_threshold => c.planner.track_threshold,
        }
        if self.no_rescore {
            c.planner.rescore = false;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Write seeded scenario files and a manifest.
    Generate {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Plan every frame of every scenario in a manifest.
    Plan {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Scenario manifest (default: <out-dir>/manifest.json).
        #[arg(long)]
        scenarios: Option<PathBuf>,
        /// Plan twice, with and without collision-aware rescoring.
        #[arg(long)]
        ablate_rescore: bool,
    },
    /// Score plans against their scenarios.
    Evaluate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        scenarios: Option<PathBuf>,
        /// Plans manifest (default: <out-dir>/plans/manifest.json).
        #[arg(long)]
        plans: Option<PathBuf>,
        /// Add the constructed OBB-vs-grid divergence scenes to the report.
        #[arg(long)]
        divergence: bool,
    },
    /// K-means anchors from a corpus of box centres and polylines.
    Cluster {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Number of box anchors.
        #[arg(long, default_value_t = 900)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        k_polylines: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn json(v: &impl serde::Serialize) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Data(e.to_string()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Cmd::Generate { cfg } => {
            let config = cfg.resolve()?;
            let (manifest, _) = cmd_generate(&config)?;
            println!("{}", json(&manifest)?);
        }
        Cmd::Plan { cfg, scenarios, ablate_rescore } => {
            let config = cfg.resolve()?;
            let scenarios = scenarios.unwrap_or_else(|| config.out_dir.join(MANIFEST_FILE));
            let (plans, path) = cmd_plan(&config, &scenarios, ablate_rescore)?;
            for v in &plans.variants {
                println!("{}: {} plan files", v.name, v.files.len());
            }
            println!("manifest: {}", path.display());
        }
        Cmd::Evaluate { cfg, scenarios, plans, divergence } => {
            let config = cfg.resolve()?;
            let scenarios = scenarios.unwrap_or_else(|| config.out_dir.join(MANIFEST_FILE));
            let plans = plans.unwrap_or_else(|| config.out_dir.join(PLAN_DIR).join(PLANS_MANIFEST_FILE));
            let (_, text, path) = cmd_evaluate(&config, &scenarios, &plans, divergence)?;
            print!("{text}");
            println!("report: {}", path.display());
        }
        Cmd::Cluster { corpus, out, k, k_polylines, seed } => {
            let s = cmd_cluster(&corpus, &out, k, k_polylines, seed)?;
            if let Some(o) = s.box_objective {
                println!("box objective: {o}");
            }
            if let Some(o) = s.polyline_objective {
                println!("polyline objective: {o}");
            }
            println!("sha256: {}", s.sha256);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
