//! Command-line front end for the averaging error envelopes.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use orbavg::kepler::{apsides_and_period, elements_from_state, state_from_elements, KeplerElements, PlanarState, PlanetModel};
use orbavg::runner::{run_compare, run_l_operation, run_n_operation};
use thiserror::Error;

use config::{resolve, CliConfig, Preset};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] orbavg::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("envelope check failed: {0}")]
    NotDominated(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Numerical(orbavg::Error::InvalidArgument(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "orbavg", version, about = "Error envelopes for averaged J2 satellite orbits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[command(rename_all = "snake_case")]
pub enum Command {
    /// Compute the error envelopes (N-operation).
    Estimate(RunArgs),
    /// Integrate the rescaled error directly (L-operation).
    Validate(RunArgs),
    /// Run both operations and check envelope dominance.
    Compare(RunArgs),
    /// Convert between states, elements and orbit geometry.
    Elements {
        #[command(subcommand)]
        action: ElementsAction,
    },
    /// Print a preset as a config file.
    Preset {
        #[arg(value_enum)]
        name: Preset,
        /// Also write it to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
#[command(rename_all = "snake_case")]
pub struct RunArgs {
    /// Starting data set; default polar.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// `key=value` file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub p0: Option<f64>,
    #[arg(long)]
    pub e0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y0: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Horizon in orbits.
    #[arg(long)]
    pub orbits: Option<f64>,
    #[arg(long)]
    pub theta_grid: Option<usize>,
    #[arg(long)]
    pub tau_grid: Option<usize>,
    #[arg(long)]
    pub rk_abs_tol: Option<f64>,
    #[arg(long)]
    pub rk_rel_tol: Option<f64>,
    /// approx or exact.
    #[arg(long)]
    pub inverse_mode: Option<String>,
    /// cubic or lagrange.
    #[arg(long)]
    pub interp_mode: Option<String>,
    #[arg(long)]
    pub theta_refine: Option<bool>,
    #[arg(long)]
    pub sample_count: Option<usize>,
    #[arg(long)]
    pub compare_points: Option<usize>,
    #[arg(long)]
    pub slack: Option<f64>,
    /// Largest horizon in orbits the L-operation may attempt.
    #[arg(long)]
    pub l_orbit_budget: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        fn f(v: Option<f64>) -> Option<String> {
            v.map(|x| format!("{x:?}"))
        }
        fn u(v: Option<usize>) -> Option<String> {
            v.map(|x| x.to_string())
        }
        let all = [
            ("p0", f(self.p0)),
            ("e0", f(self.e0)),
            ("y0", f(self.y0)),
            ("epsilon", f(self.epsilon)),
            ("orbits", f(self.orbits)),
            ("theta_grid", u(self.theta_grid)),
            ("tau_grid", u(self.tau_grid)),
            ("rk_abs_tol", f(self.rk_abs_tol)),
            ("rk_rel_tol", f(self.rk_rel_tol)),
            ("inverse_mode", self.inverse_mode.clone()),
            ("interp_mode", self.interp_mode.clone()),
            ("theta_refine", self.theta_refine.map(|b| b.to_string())),
            ("sample_count", u(self.sample_count)),
            ("compare_points", u(self.compare_points)),
            ("slack", f(self.slack)),
            ("l_orbit_budget", f(self.l_orbit_budget)),
            ("out_dir", self.out_dir.as_ref().map(|p| p.display().to_string())),
        ];
        all.into_iter().filter_map(|(k, v)| v.map(|v| (k, v))).collect()
    }

    pub fn resolve(&self) -> Result<CliConfig, CliError> {
        let cfg = resolve(self.preset, self.config.as_deref(), &self.overrides())?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
#[command(rename_all = "snake_case")]
pub enum ElementsAction {
    /// Polar state (SI units) to elements `P, E, Y` and angle.
    FromState {
        #[arg(long, allow_negative_numbers = true)]
        rho_dot: f64,
        #[arg(long)]
        theta_dot: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
    },
    /// Elements and angle to the polar state.
    ToState {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        e: f64,
        #[arg(long, allow_negative_numbers = true)]
        y: f64,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
    },
    /// Apocenter, pericenter (km) and period (h).
    Geometry {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        e: f64,
    },
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn estimate(cfg: &CliConfig) -> Result<(), CliError> {
    prepare_dir(&cfg.out_dir)?;
    output::write_file(&cfg.out_dir.join("manifest.txt"), &cfg.manifest("estimate"))?;
    let n = run_n_operation(&cfg.run)?;
    output::write_estimator(&cfg.out_dir.join("estimator.csv"), &n.curves)?;
    let report = output::n_report(&n);
    output::write_file(&cfg.out_dir.join("report.txt"), &report)?;
    print!("{report}");
    if !n.hypotheses_hold() {
        eprintln!("warning: fixed-point hypotheses not all verified; see report.txt");
    }
    Ok(())
}

fn validate(cfg: &CliConfig) -> Result<(), CliError> {
    prepare_dir(&cfg.out_dir)?;
    output::write_file(&cfg.out_dir.join("manifest.txt"), &cfg.manifest("validate"))?;
    let l = run_l_operation(&cfg.run)?;
    output::write_l_curve(&cfg.out_dir.join("l_curve.csv"), &l.curve, cfg.run.compare_points)?;
    let report = format!("l_operation_seconds={}\nl_steps={}\n", l.elapsed.as_secs_f64(), l.curve.nodes().len() - 1);
    output::write_file(&cfg.out_dir.join("report.txt"), &report)?;
    print!("{report}");
    Ok(())
}

fn compare(cfg: &CliConfig) -> Result<(), CliError> {
    prepare_dir(&cfg.out_dir)?;
    output::write_file(&cfg.out_dir.join("manifest.txt"), &cfg.manifest("compare"))?;
    let run = run_compare(&cfg.run)?;
    output::write_estimator(&cfg.out_dir.join("estimator.csv"), &run.n.curves)?;
    output::write_comparison(&cfg.out_dir.join("comparison.csv"), &run.report)?;
    let mut report = output::n_report(&run.n);
    report.push_str(&output::comparison_report(&run.report, run.l.elapsed.as_secs_f64()));
    output::write_file(&cfg.out_dir.join("report.txt"), &report)?;
    print!("{report}");
    if run.report.all_dominated() {
        Ok(())
    } else {
        Err(CliError::NotDominated(format!("max ratios {:?}", run.report.max_ratio)))
    }
}

/// Conversions reject inputs outside the element domain as usage errors.
fn elements(action: &ElementsAction) -> Result<(), CliError> {
    convert(action).map_err(|e| CliError::Usage(e.to_string()))
}

fn convert(action: &ElementsAction) -> Result<(), orbavg::Error> {
    let planet = PlanetModel::EARTH;
    match *action {
        ElementsAction::FromState {
            rho_dot,
            theta_dot,
            rho,
            theta,
        } => {
            let k = elements_from_state(
                &PlanarState {
                    rho_dot,
                    theta_dot,
                    rho,
                    theta,
                },
                &planet,
            )?;
            println!("p={:?}\ne={:?}\ny={:?}\ntheta={:?}", k.p, k.e, k.y, k.theta);
        }
        ElementsAction::ToState { p, e, y, theta } => {
            let s = state_from_elements(&KeplerElements::new(p, e, y, theta)?, &planet);
            println!("rho_dot={:?}\ntheta_dot={:?}\nrho={:?}\ntheta={:?}", s.rho_dot, s.theta_dot, s.rho, s.theta);
        }
        ElementsAction::Geometry { p, e } => {
            let g = apsides_and_period(p, e, &planet)?;
            println!(
                "rho_plus_km={:?}\nrho_minus_km={:?}\nperiod_h={:?}",
                g.rho_plus / 1e3,
                g.rho_minus / 1e3,
                g.t_orb / 3600.0
            );
        }
    }
    Ok(())
}

fn preset(name: Preset, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = CliConfig::from_preset(name);
    let planet = PlanetModel::EARTH;
    let text = format!(
        "# preset {}, GM={:?} m^3/s^2, R={:?} m\n{}",
        name.as_str(),
        planet.gm,
        planet.r,
        cfg.manifest(&format!("preset {}", name.as_str()))
    );
    if let Some(path) = out {
        output::write_file(path, &text)?;
    }
    print!("{text}");
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Estimate(a) => estimate(&a.resolve()?),
        Command::Validate(a) => validate(&a.resolve()?),
        Command::Compare(a) => compare(&a.resolve()?),
        Command::Elements { action } => elements(action),
        Command::Preset { name, out } => preset(*name, out.as_deref()),
    }
}

/// Parse `argv`, run, and return the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
