mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{FileConfig, RunConfig};

/// Direct and inverse scattering for the third-order operator with
/// potentials `p`, `q`.
#[derive(Parser)]
#[command(name = "trioscatter", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Decay rate of the potentials.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    n_x: Option<usize>,
    #[arg(long)]
    n_tau: Option<usize>,
    /// Tolerance override, `name=value`; may be repeated.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Scattering data and bound states of a potential pair.
    Direct {
        #[command(flatten)]
        common: Common,
        /// Potential CSV with header `x,p,dp,q` or `x,p,q`.
        #[arg(long)]
        potential: Option<PathBuf>,
    },
    /// Recover p, q on both half-axes from scattering data.
    Inverse {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scattering: Option<PathBuf>,
        #[arg(long)]
        bound_states: Option<PathBuf>,
        /// Recovery interval half-width.
        #[arg(long)]
        recover_x: Option<f64>,
        #[arg(long)]
        recover_points: Option<usize>,
        #[arg(long)]
        lambda_ray_angle: Option<f64>,
        #[arg(long)]
        fit_lambda_min: Option<f64>,
        #[arg(long)]
        fit_lambda_count: Option<usize>,
    },
    /// Write the reflectionless fixture for one bound state of each family.
    Reflectionless {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        mu1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        nu1: Option<f64>,
    },
    /// Run the invariant suite and write report.txt.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        potential: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum Failure {
    /// Malformed input or configuration, exit code 2.
    Input(String),
    /// A numerical stage failed, exit code 3.
    Solver(String),
    /// Output could not be written, exit code 1.
    Io(String),
}

fn set<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

fn base(common: &Common) -> Result<FileConfig, Failure> {
    let mut f = match &common.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    set(&mut f.output_dir, common.output_dir.clone());
    set(&mut f.a, common.a);
    set(&mut f.x_max, common.x_max);
    set(&mut f.t_max, common.t_max);
    set(&mut f.n_x, common.n_x);
    set(&mut f.n_tau, common.n_tau);
    Ok(f)
}

fn threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("TRIOSCATTER_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Input(format!("TRIOSCATTER_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Input(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    threads()?;
    let (cfg, cmd) = match cli.cmd {
        Cmd::Direct { common, potential } => {
            let mut f = base(&common)?;
            set(&mut f.potential_file, potential);
            (RunConfig::resolve(f, &common.tol)?, "direct")
        }
        Cmd::Inverse {
            common,
            scattering,
            bound_states,
            recover_x,
            recover_points,
            lambda_ray_angle,
            fit_lambda_min,
            fit_lambda_count,
        } => {
            let mut f = base(&common)?;
            set(&mut f.scattering_file, scattering);
            set(&mut f.bound_states_file, bound_states);
            set(&mut f.recover_x, recover_x);
            set(&mut f.recover_points, recover_points);
            set(&mut f.lambda_ray_angle, lambda_ray_angle);
            set(&mut f.fit_lambda_min, fit_lambda_min);
            set(&mut f.fit_lambda_count, fit_lambda_count);
            (RunConfig::resolve(f, &common.tol)?, "inverse")
        }
        Cmd::Reflectionless { common, mu1, nu1 } => {
            let mut f = base(&common)?;
            set(&mut f.mu1, mu1);
            set(&mut f.nu1, nu1);
            (RunConfig::resolve(f, &common.tol)?, "reflectionless")
        }
        Cmd::Verify { common, potential } => {
            let mut f = base(&common)?;
            set(&mut f.potential_file, potential);
            (RunConfig::resolve(f, &common.tol)?, "verify")
        }
    };
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Failure::Io(format!("{}: {e}", cfg.output_dir.display())))?;
    let result = match cmd {
        "direct" => commands::direct(&cfg).map(|_| true),
        "inverse" => commands::inverse(&cfg).map(|_| true),
        "reflectionless" => commands::reflectionless(&cfg).map(|_| true),
        _ => commands::verify(&cfg),
    };
    if let Err(Failure::Solver(msg)) = &result {
        let dump = io::diagnostics(&[
            ("command".into(), cmd.into()),
            ("error".into(), msg.clone()),
            ("config".into(), format!("{cfg:?}")),
        ]);
        eprint!("{dump}");
        // best effort: the solver error is what gets reported
        let _ = io::write_file(&cfg.output_dir.join("diagnostics.txt"), &dump);
    }
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver failure: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
