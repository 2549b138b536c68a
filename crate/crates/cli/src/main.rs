//! `acmoduli`: solve, continue, classify and inspect four-ended Allen-Cahn solutions.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use acmoduli::solver::SolveOptions;
use acmoduli::spectra::SymmetrySector;
use acmoduli::Error;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

const DEFAULT_THETA_GUARD: f64 = 0.15;

#[derive(Debug, Parser)]
#[command(
    name = "acmoduli",
    version,
    about = "Four-ended Allen-Cahn solutions and their end data"
)]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "AC_JOBS")]
    jobs: Option<usize>,

    /// CSV table `u,F,F',F''` of a tabulated potential (default: quartic).
    #[arg(long, global = true, env = "AC_POTENTIAL")]
    potential: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct GridArgs {
    /// Half width of the square [0, L]^2.
    #[arg(long = "L", env = "AC_L", default_value_t = 24.0)]
    half_width: f64,

    /// Grid spacing; L/h must be an integer.
    #[arg(long, env = "AC_H", default_value_t = 0.1)]
    h: f64,
}

#[derive(Debug, Clone, Args)]
struct SolverArgs {
    /// Residual sup norm at which Newton stops.
    #[arg(long, env = "AC_TOLERANCE", default_value_t = SolveOptions::default().tolerance)]
    tolerance: f64,

    #[arg(long, env = "AC_MAX_NEWTON", default_value_t = SolveOptions::default().max_newton)]
    max_newton: usize,

    /// Offset change at which the offset loop stops.
    #[arg(long, env = "AC_R_TOLERANCE", default_value_t = SolveOptions::default().r_tolerance)]
    r_tolerance: f64,

    #[arg(long, env = "AC_MAX_R_ITERATIONS", default_value_t = SolveOptions::default().max_r_iterations)]
    max_r_iterations: usize,

    /// Newton step halvings before a step fails.
    #[arg(long, env = "AC_MAX_HALVINGS", default_value_t = SolveOptions::default().max_halvings)]
    max_halvings: usize,

    #[arg(long, env = "AC_MAX_LINEAR_ITERATIONS", default_value_t = SolveOptions::default().max_linear_iterations)]
    max_linear_iterations: usize,

    /// Angles within this distance of 0 or pi/2 are refused.
    #[arg(long, env = "AC_THETA_GUARD", default_value_t = DEFAULT_THETA_GUARD)]
    theta_guard: f64,
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            tolerance: self.tolerance,
            max_newton: self.max_newton,
            r_tolerance: self.r_tolerance,
            max_r_iterations: self.max_r_iterations,
            max_halvings: self.max_halvings,
            max_linear_iterations: self.max_linear_iterations,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve at one end angle and write the solution file.
    Solve {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        /// Initial offset of the ends.
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        r0: f64,
        #[arg(long)]
        out: PathBuf,
        /// Largest angle step when falling back to continuation from the saddle.
        #[arg(long, default_value_t = 0.05)]
        max_step: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Trace the branch through the saddle over a range of angles.
    Continue {
        #[arg(long, allow_negative_numbers = true, default_value_t = std::f64::consts::FRAC_PI_4 - 0.5)]
        theta_min: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = std::f64::consts::FRAC_PI_4 + 0.5)]
        theta_max: f64,
        #[arg(long, default_value_t = 21)]
        steps: usize,
        /// Directory receiving one solution file per sample.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Curve table; standard output when absent.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Disc radius for the even-sector margin.
        #[arg(long, default_value_t = 20.0)]
        margin_radius: f64,
        /// Eigenvalues computed for the margin.
        #[arg(long, default_value_t = 12)]
        k: usize,
        /// Also compute the Morse index on the margin disc.
        #[arg(long)]
        index: bool,
        /// Angle-step halvings before a direction is abandoned.
        #[arg(long, default_value_t = 6)]
        step_halvings: usize,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Balancing integrals and closed-contour fluxes of a solution file.
    Balance {
        file: PathBuf,
        /// Rectangle `i0,j0,i1,j1` in grid indices (default: the middle half).
        #[arg(long)]
        contour: Option<String>,
    },
    /// Lowest eigenvalues of the linearization per symmetry sector.
    Spectrum {
        file: PathBuf,
        #[arg(long = "R", default_value_t = 20.0)]
        radius: f64,
        #[arg(long, default_value_t = 8)]
        k: usize,
        /// One of even-even, odd-even, even-odd, odd-odd (default: all four).
        #[arg(long)]
        sector: Option<SymmetrySector>,
        /// Spectrum table; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the end data `(theta - pi/4, r)` read off a solution file.
    Classify { file: PathBuf },
    /// Write the ansatz for given end data as a solution file.
    Ansatz {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
        r: f64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
}

/// Why a command failed; decides the exit code.
#[derive(Debug)]
enum Failure {
    Usage(Error),
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Parse { .. } | Error::Io(_) | Error::Construction(_) => {
                Failure::Usage(e)
            }
            _ => Failure::Numerical(e),
        }
    }
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn report(e: &Error) {
    eprintln!("error: {}: {}", e.kind(), one_line(&e.to_string()));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{}", e.render());
                return ExitCode::SUCCESS;
            }
            let rendered = e.render().to_string();
            let (head, rest) = rendered.split_once("\n\n").unwrap_or((&rendered, ""));
            eprintln!(
                "error: usage: {}",
                one_line(head.trim_start_matches("error:"))
            );
            if !rest.is_empty() {
                eprint!("\n{rest}");
            }
            return ExitCode::from(1);
        }
    };
    if let Some(jobs) = cli.jobs {
        let built = if jobs == 0 {
            Err("--jobs must be at least 1".to_string())
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build_global()
                .map_err(|e| e.to_string())
        };
        if let Err(msg) = built {
            report(&Error::Domain(msg));
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            report(&e);
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            report(&e);
            ExitCode::from(2)
        }
    }
}
