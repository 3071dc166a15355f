//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::commands::{self, GridRequest, Outcome, ReferenceKind};
use crate::config::{RunConfig, OUTPUT_DIR_ENV};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "wigner", version, about = "Ground and excited states in Wigner phase space")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub command: Command,
}

/// Accepted both before and after the subcommand. Clap's global arguments
/// keep only one of the two `--set` lists, so each level has its own copy.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Config file with [system], [solver], [scf] and [output] sections.
    #[arg(short, long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Override one config key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Reference {
    Exact,
    Finest,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Imaginary-time Wigner solve of the configured system.
    Solve(Overrides),
    /// Self-consistent Kohn-Sham run (contact_hooke).
    Scf(Overrides),
    /// Finite-element Schrodinger solve of the same system.
    Reference(Overrides),
    /// Error and order table over element sizes and truncations.
    Converge {
        /// Element sizes, e.g. 0.2,0.1,0.05.
        #[arg(long, value_delimiter = ',', required = true)]
        h_list: Vec<f64>,
        /// Truncation orders K.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        k_list: Vec<usize>,
        #[arg(long, value_enum, default_value = "exact")]
        reference: Reference,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Evaluate f(x, p) on a grid and emit a gnuplot script.
    WignerGrid {
        /// LO,HI
        #[arg(long, allow_hyphen_values = true, value_parser = parse_range, default_value = "-5,5")]
        x_range: (f64, f64),
        /// LO,HI
        #[arg(long, allow_hyphen_values = true, value_parser = parse_range, default_value = "-5,5")]
        p_range: (f64, f64),
        /// Points per axis.
        #[arg(long, allow_hyphen_values = true, default_value_t = 101)]
        resolution: i64,
        /// Use a state.csv from an earlier `solve` instead of solving.
        #[arg(long, value_name = "FILE")]
        state: Option<PathBuf>,
        /// Which state of the file or run.
        #[arg(long, default_value_t = 0)]
        state_index: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print every config key with its default value.
    Defaults,
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got `{s}`"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad number `{lo}`"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad number `{hi}`"))?;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err("range ends must be finite".into());
    }
    Ok((lo, hi))
}

impl Cli {
    /// Config file and overrides from both sides of the subcommand; the
    /// subcommand's file wins and its `--set` values apply last.
    pub fn merged_overrides(&self) -> Overrides {
        let local = match &self.command {
            Command::Solve(o) | Command::Scf(o) | Command::Reference(o) => o,
            Command::Converge { overrides, .. } | Command::WignerGrid { overrides, .. } => overrides,
            Command::Defaults => return self.overrides.clone(),
        };
        Overrides {
            config: local.config.clone().or_else(|| self.overrides.config.clone()),
            set: self.overrides.set.iter().chain(&local.set).cloned().collect(),
        }
    }
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli, env_output_dir: Option<String>) -> Result<Option<Outcome>> {
    if let Command::Defaults = cli.command {
        print!("{}", RunConfig::default().to_ini(true));
        return Ok(None);
    }
    let overrides = cli.merged_overrides();
    let config = RunConfig::resolve(overrides.config.as_deref(), env_output_dir, &overrides.set)?;
    let outcome = match &cli.command {
        Command::Solve(_) => commands::cmd_solve(&config)?,
        Command::Scf(_) => commands::cmd_scf(&config)?,
        Command::Reference(_) => commands::cmd_reference(&config)?,
        Command::Converge {
            h_list,
            k_list,
            reference,
            ..
        } => {
            let kind = match reference {
                Reference::Exact => ReferenceKind::Exact,
                Reference::Finest => ReferenceKind::Finest,
            };
            commands::cmd_converge(&config, h_list, k_list, kind)?
        }
        Command::WignerGrid {
            x_range,
            p_range,
            resolution,
            state,
            state_index,
            ..
        } => commands::cmd_wigner_grid(
            &config,
            &GridRequest {
                x_range: *x_range,
                p_range: *p_range,
                resolution: *resolution,
                state_file: state.clone(),
                state_index: *state_index,
            },
        )?,
        Command::Defaults => unreachable!(),
    };
    Ok(Some(outcome))
}

/// Parses, runs and returns the process exit code: 0 success, 1 usage or
/// config error, 2 non-convergence, 3 internal or IO error.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, std::env::var(OUTPUT_DIR_ENV).ok()) {
        Ok(None) => 0,
        Ok(Some(outcome)) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.converged {
                0
            } else {
                eprintln!("error: not converged; results were written and marked in the manifest");
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            if code == 1 {
                eprintln!("\n{}", Cli::command().render_usage());
                eprintln!("Run `wigner defaults` for all config keys.");
            }
            code
        }
    }
}
