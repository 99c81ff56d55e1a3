//! Command-line front end: `ground-state → solve → verify / expand → evolve`.
//!
//! Exit codes: 0 when every verdict passes, 2 when a checked estimate fails,
//! 1 on runtime errors (bad config, missing upstream artifact, solver error).

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("missing artifact: {0}")]
    MissingArtifact(String),
    #[error(transparent)]
    Core(#[from] zakharov::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Parser)]
#[command(name = "zakharov", version, about = "Travelling solitary waves of the 2D Zakharov system")]
pub struct Cli {
    /// Flat `key = value` config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one config key (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Output directory
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "box")]
    pub box_length: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct SolveArgs {
    /// Speed, `c1` or `c1,c2`
    #[arg(long = "c", allow_hyphen_values = true)]
    pub c: Option<String>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Fixed-point tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub dealias: bool,
    #[arg(long)]
    pub newton: bool,
}

#[derive(Debug, Default, Args)]
pub struct EvolveArgs {
    /// Directory holding a solved profile (default: the output directory)
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Steps between snapshots (0: none)
    #[arg(long = "snap-every")]
    pub snap_every: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute Q and write Q.zkf
    GroundState {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Solve for the travelling profile
    Solve(SolveArgs),
    /// Check the estimates on a solved profile
    Verify,
    /// Far-field expansion of N
    Expand {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long = "r-min")]
        r_min: Option<f64>,
        #[arg(long = "r-max")]
        r_max: Option<f64>,
    },
    /// Time-integrate the full system from a solved profile
    Evolve(EvolveArgs),
    /// Every stage in order
    All {
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        evolve: EvolveArgs,
    },
}

fn apply_grid(cfg: &mut RunConfig, g: &GridArgs) {
    if let Some(n) = g.n {
        cfg.n = n;
    }
    if let Some(b) = g.box_length {
        cfg.box_length = b;
    }
}

fn apply_solve(cfg: &mut RunConfig, s: &SolveArgs) -> Result<(), CliError> {
    if let Some(c) = &s.c {
        cfg.c = config::parse_speed(c)?;
    }
    if let Some(w) = s.omega {
        cfg.omega = w;
    }
    apply_grid(cfg, &s.grid);
    if let Some(t) = s.tol {
        cfg.tol_fixed_point = t;
    }
    if let Some(m) = s.max_iter {
        cfg.max_iter = m;
    }
    cfg.dealias |= s.dealias;
    cfg.newton_accel |= s.newton;
    Ok(())
}

fn apply_evolve(cfg: &mut RunConfig, e: &EvolveArgs) {
    if let Some(t) = e.t_end {
        cfg.evolve_t = t;
    }
    if let Some(dt) = e.dt {
        cfg.evolve_dt = dt;
    }
    if let Some(s) = e.snap_every {
        cfg.snap_every = s;
    }
}

/// Defaults, then the config file, then `--set`, then subcommand flags.
pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for a in &cli.set {
        cfg.apply_assignment(a)?;
    }
    if let Some(o) = &cli.output {
        cfg.output = o.clone();
    }
    match &cli.command {
        Command::GroundState { grid, tol } => {
            apply_grid(&mut cfg, grid);
            if let Some(t) = tol {
                cfg.tol_ground_state = *t;
            }
        }
        Command::Solve(s) => apply_solve(&mut cfg, s)?,
        Command::Verify => {}
        Command::Expand { k, r_min, r_max } => {
            if let Some(k) = k {
                cfg.expand_k = *k;
            }
            if let Some(r) = r_min {
                cfg.expand_r_min = *r;
            }
            if let Some(r) = r_max {
                cfg.expand_r_max = *r;
            }
        }
        Command::Evolve(e) => apply_evolve(&mut cfg, e),
        Command::All { solve, evolve } => {
            apply_solve(&mut cfg, solve)?;
            apply_evolve(&mut cfg, evolve);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn limit_threads() {
    if let Some(n) = std::env::var("ZSF_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

pub fn execute(cli: &Cli) -> Result<bool, CliError> {
    let cfg = resolve(cli)?;
    std::fs::create_dir_all(&cfg.output)?;
    std::fs::write(cfg.output.join("config.txt"), cfg.render())?;
    match &cli.command {
        Command::GroundState { .. } => commands::ground_state(&cfg),
        Command::Solve(_) => commands::solve(&cfg),
        Command::Verify => commands::verify(&cfg),
        Command::Expand { .. } => commands::expand(&cfg),
        Command::Evolve(e) => commands::evolve(&cfg, e.profile.as_deref()),
        Command::All { .. } => commands::all(&cfg),
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    limit_threads();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("verification failed; see the JSON report for the failing estimates");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
