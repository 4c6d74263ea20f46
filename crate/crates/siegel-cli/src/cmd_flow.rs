//! height-flow, classify and loglaw subcommands.

use clap::Args;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use siegel_core::reduction::{
    classify_diophantine, height_flow, height_flow_g1_exact, loglaw_mc, ClassifyOptions,
    HeightTrajectory, ReduceOptions,
};
use siegel_core::symplectic::{matrix_from_rows, BlockSymplectic, CartanDirection};

use crate::util::{config_error, fmt_f64, parse_exact_q, CliError, RunDir};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowConfig {
    pub g: usize,
    /// Scalar `q` as a decimal string (exact for g = 1), or a full symmetric
    /// matrix in `q_matrix`.
    pub q: Option<String>,
    pub q_matrix: Option<Vec<Vec<f64>>>,
    /// Cartan weights δ̂ (defaults to all ones).
    pub delta: Option<Vec<f64>>,
    pub t_max: f64,
    pub samples: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            g: 1,
            q: None,
            q_matrix: None,
            delta: None,
            t_max: 25.0,
            samples: 101,
        }
    }
}

#[derive(Args)]
pub struct HeightFlowArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    g: Option<usize>,
    /// Scalar q (decimal string, exact for g = 1).
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    delta: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    flow: HeightFlowArgs,
    /// Acting dimension d (number of unit weights in δ̂(d)).
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Args)]
pub struct LoglawArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    g: Option<usize>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

fn load_config<T: serde::de::DeserializeOwned + Default>(
    path: &Option<PathBuf>,
) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| config_error(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| config_error(format!("config schema error: {e}")))
        }
    }
}

fn resolve_flow(args: &HeightFlowArgs) -> Result<FlowConfig, CliError> {
    let mut cfg: FlowConfig = load_config(&args.config)?;
    if let Some(g) = args.g {
        cfg.g = g;
    }
    if let Some(q) = &args.q {
        cfg.q = Some(q.clone());
    }
    if let Some(t) = args.t_max {
        cfg.t_max = t;
    }
    if let Some(s) = args.samples {
        cfg.samples = s;
    }
    if let Some(d) = &args.delta {
        cfg.delta = Some(d.clone());
    }
    if cfg.samples < 2 {
        return Err(config_error("need at least 2 samples"));
    }
    if !(cfg.t_max > 0.0) {
        return Err(config_error("t_max must be positive"));
    }
    Ok(cfg)
}

pub(crate) fn trajectory_for(cfg: &FlowConfig) -> Result<HeightTrajectory, CliError> {
    let grid: Vec<f64> = (1..=cfg.samples)
        .map(|k| cfg.t_max * k as f64 / cfg.samples as f64)
        .collect();
    let delta = cfg
        .delta
        .clone()
        .unwrap_or_else(|| vec![1.0; cfg.g]);
    if delta.len() != cfg.g {
        return Err(config_error("delta length must equal g"));
    }
    let dir = CartanDirection::new(delta.clone()).map_err(CliError::from)?;

    if cfg.g == 1 && delta == [1.0] {
        if let Some(qs) = &cfg.q {
            let q = parse_exact_q(qs)?;
            return height_flow_g1_exact(&q, &grid).map_err(CliError::from);
        }
    }
    let alpha = match (&cfg.q_matrix, &cfg.q) {
        (Some(rows), _) => {
            let m = matrix_from_rows(rows).map_err(CliError::from)?;
            BlockSymplectic::lower_unipotent(&m).map_err(CliError::from)?
        }
        (None, Some(qs)) => {
            if cfg.g != 1 {
                return Err(config_error("scalar q requires g = 1; use q_matrix"));
            }
            let q = parse_exact_q(qs)?;
            BlockSymplectic::lower_unipotent(&nalgebra::DMatrix::from_element(1, 1, q.to_f64()))
                .map_err(CliError::from)?
        }
        (None, None) => BlockSymplectic::identity(cfg.g),
    };
    if alpha.genus() != cfg.g {
        return Err(config_error("q_matrix size must equal g"));
    }
    height_flow(&alpha, &dir, &grid, &ReduceOptions::default()).map_err(CliError::from)
}

pub(crate) fn write_trajectory(run: &RunDir, traj: &HeightTrajectory) -> Result<(), CliError> {
    let rows: Vec<String> = traj
        .samples
        .iter()
        .map(|&(t, lh)| format!("{},{}", fmt_f64(t), fmt_f64(lh)))
        .collect();
    run.write_csv("trajectory.csv", "t,log_hgt", &rows)
}

pub fn run_height_flow(args: HeightFlowArgs) -> Result<(), CliError> {
    let cfg = resolve_flow(&args)?;
    let run = RunDir::create(&args.out, &cfg)?;
    let traj = trajectory_for(&cfg)?;
    write_trajectory(&run, &traj)?;
    run.finish("height-flow")
}

pub fn run_classify(args: ClassifyArgs) -> Result<(), CliError> {
    let cfg = resolve_flow(&args.flow)?;
    let d = args.d.unwrap_or(cfg.g);
    let run = RunDir::create(&args.flow.out, &cfg)?;
    let traj = trajectory_for(&cfg)?;
    write_trajectory(&run, &traj)?;
    let report = classify_diophantine(&traj, d, &ClassifyOptions::default())
        .map_err(CliError::from)?;
    run.write_json("report.json", &report)?;
    run.finish("classify")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoglawConfig {
    pub g: usize,
    pub n_samples: usize,
    pub t_max: f64,
    pub seed: u64,
}

impl Default for LoglawConfig {
    fn default() -> Self {
        Self {
            g: 1,
            n_samples: 100,
            t_max: 20.0,
            seed: 42,
        }
    }
}

pub fn run_loglaw(args: LoglawArgs) -> Result<(), CliError> {
    let mut cfg: LoglawConfig = load_config(&args.config)?;
    if let Some(g) = args.g {
        cfg.g = g;
    }
    if let Some(n) = args.n_samples {
        cfg.n_samples = n;
    }
    if let Some(t) = args.t_max {
        cfg.t_max = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if cfg.n_samples == 0 {
        return Err(config_error("n_samples must be positive"));
    }
    let run = RunDir::create(&args.out, &cfg)?;
    let dir = CartanDirection::new(vec![1.0; cfg.g]).map_err(CliError::from)?;
    let summary = loglaw_mc(cfg.g, &dir, cfg.n_samples, cfg.t_max, cfg.seed)
        .map_err(CliError::from)?;
    let rows: Vec<String> = summary
        .per_sample
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{i},{}", fmt_f64(*v)))
        .collect();
    run.write_csv("loglaw.csv", "sample,statistic", &rows)?;
    run.write_json("loglaw.json", &summary)?;
    run.finish("loglaw")
}
