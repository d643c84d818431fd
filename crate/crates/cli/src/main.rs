mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::{ClassifyArgs, ExampleArgs, FlowArgs, Output};
use config::{parse_angles, parse_list, CliError, Status};
use diskflow::generator::TOL_POLE;
use diskflow::scenarios::fixtures::DEFAULT_SEED;
use std::path::PathBuf;
use std::process::ExitCode;

/// Boundary behavior of holomorphic semigroups of the unit disk.
///
/// Exit status: 0 success, 1 input error, 2 numerically inconclusive,
/// 3 internal invariant violated.
#[derive(Debug, Parser)]
#[command(name = "diskflow", version)]
struct Cli {
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify boundary points of a generator as poles, null points or other.
    Classify {
        #[arg(long)]
        spec: PathBuf,
        /// Probe count N (angles 2πk/N) or a comma-separated list such as `0,pi/2`.
        #[arg(long, default_value = "360")]
        angles: String,
        #[arg(long, default_value_t = TOL_POLE, allow_hyphen_values = true)]
        tol_pole: f64,
        /// Finest radial offset 2^-kmax; defaults depend on the generator.
        #[arg(long)]
        eps_kmin: Option<u32>,
        #[arg(long)]
        eps_kmax: Option<u32>,
    },
    /// Integrate the semigroup from a starting point; CSV trajectory.
    Flow {
        #[arg(long)]
        spec: PathBuf,
        /// Starting point `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        z0: String,
        #[arg(long, allow_hyphen_values = true)]
        t_end: Option<f64>,
        /// Extra checkpoint times, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
        /// Skip the variational equation.
        #[arg(long)]
        no_variational: bool,
        #[arg(long, default_value_t = 1e-10)]
        rel_tol: f64,
        #[arg(long, default_value_t = 1e-10)]
        abs_tol: f64,
    },
    /// Boundary argument and modulus of the Koenigs map; CSV.
    Koenigs {
        #[arg(long)]
        spec: PathBuf,
        /// Number of equally spaced boundary angles.
        #[arg(long, default_value_t = 360)]
        angles: usize,
    },
    /// Radial multi-slit generator from pole atoms or tip angles; JSON report.
    Multislit {
        #[arg(long)]
        spec: PathBuf,
        /// Rescale pole masses to sum to 1.
        #[arg(long)]
        normalize: bool,
    },
    /// Run a named scenario: step_measure, cusp, no_tip, koebe_suite.
    Example {
        name: String,
        /// Cusp exponents, comma separated.
        #[arg(long)]
        alpha: Option<String>,
        /// Tip angle rule for no_tip: harmonic or geometric.
        #[arg(long, default_value = "harmonic")]
        theta_rule: String,
        /// Truncation levels for no_tip, comma separated.
        #[arg(long)]
        levels: Option<String>,
        /// Radial offsets for the no_tip D_m table, comma separated.
        #[arg(long)]
        probe_eps: Option<String>,
    },
    /// Structural invariants on seeded random generators.
    Selftest {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        count: usize,
    },
}

fn levels(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| CliError::input(format!("bad level '{t}'"))))
        .collect()
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Classify { spec, angles, tol_pole, eps_kmin, eps_kmax } => commands::classify(&ClassifyArgs {
            spec,
            angles: parse_angles(angles)?,
            tol_pole: *tol_pole,
            eps_kmin: *eps_kmin,
            eps_kmax: *eps_kmax,
        }),
        Command::Flow { spec, z0, t_end, t, no_variational, rel_tol, abs_tol } => commands::flow(&FlowArgs {
            spec,
            z0,
            t_end: *t_end,
            times: t.as_deref().map(parse_list).transpose()?.unwrap_or_default(),
            variational: !no_variational,
            rel_tol: *rel_tol,
            abs_tol: *abs_tol,
        }),
        Command::Koenigs { spec, angles } => {
            if *angles == 0 || *angles > config::MAX_PROBES {
                return Err(CliError::input(format!("--angles must be in 1..={}", config::MAX_PROBES)));
            }
            commands::koenigs_csv(spec, *angles)
        }
        Command::Multislit { spec, normalize } => commands::multislit(spec, *normalize),
        Command::Example { name, alpha, theta_rule, levels: lv, probe_eps } => commands::example(&ExampleArgs {
            name: name.clone(),
            alphas: alpha.as_deref().map(parse_list).transpose()?,
            theta_rule: theta_rule.clone(),
            levels: lv.as_deref().map(levels).transpose()?,
            probe_eps: probe_eps.as_deref().map(parse_list).transpose()?,
        }),
        Command::Selftest { seed, count } => commands::selftest(*seed, *count),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::Input as u8 } else { 0 });
        }
    };
    let result = run(&cli).and_then(|out| {
        match &cli.out {
            Some(path) => std::fs::write(path, &out.text)
                .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?,
            None => print!("{}", out.text),
        }
        Ok(out.status)
    });
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status as u8)
        }
    }
}
