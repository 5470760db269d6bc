//! `coxlim`: root systems, limit sets and gaskets from Coxeter diagram files.
//!
//! Results are printed on stdout as JSON; diagnostics and errors go to stderr.
//! Exit status: 0 success, 1 input error, 2 numeric failure, 3 budget exhausted.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lorentz_coxeter::{Error, ErrorClass};

#[derive(Debug, Parser)]
#[command(
    name = "coxlim",
    version,
    about = "Limit roots and limit sets of Lorentzian Coxeter groups"
)]
struct Cli {
    /// Indent JSON output.
    #[arg(long, global = true)]
    pretty: bool,

    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Maximum number of roots, orbit points or circles a command may produce.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GasketMode {
    Intrinsic,
    Rank4,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Signature and type of the root system.
    Classify {
        diagram: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Positive roots up to a depth.
    Roots {
        diagram: PathBuf,
        #[arg(long)]
        max_depth: usize,
    },
    /// Normalized roots with depth in a window.
    Limits {
        diagram: PathBuf,
        #[arg(long, value_parser = parse_window)]
        window: [usize; 2],
    },
    /// Normalized orbit points of the imaginary point with word length in a window.
    Orbit {
        diagram: PathBuf,
        #[arg(long, value_parser = parse_window)]
        window: [usize; 2],
    },
    /// Compare limit roots with the limit set over several windows.
    Verify {
        diagram: PathBuf,
        /// Comma-separated windows, e.g. `8:10,12:14`.
        #[arg(long, value_parser = parse_levels)]
        levels: Levels,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Apollonian gasket from horocycles or from the rank-4 universal system.
    Gasket {
        #[arg(long, value_enum)]
        mode: GasketMode,
        #[arg(long)]
        gen: usize,
        /// Also write an SVG picture.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Boundary points of the intrinsic construction, in degrees.
        #[arg(long, value_delimiter = ',', default_values_t = [90.0, 210.0, 330.0])]
        angles: Vec<f64>,
        #[arg(long, default_value_t = 800)]
        size: u32,
    },
    /// Draw normalized roots in the chart as SVG.
    Render {
        diagram: PathBuf,
        #[arg(long, value_parser = parse_window)]
        window: [usize; 2],
        #[arg(long)]
        out: PathBuf,
        /// Draw the region K.
        #[arg(long)]
        k: bool,
        /// Draw the simple hyperplanes.
        #[arg(long)]
        hyperplanes: bool,
        #[arg(long, default_value_t = 800)]
        size: u32,
    },
}

#[derive(Debug, Clone)]
pub struct Levels(pub Vec<[usize; 2]>);

fn parse_window(s: &str) -> Result<[usize; 2], String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got `{s}`"))?;
    let lo: usize = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad window start `{lo}`"))?;
    let hi: usize = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad window end `{hi}`"))?;
    if lo > hi {
        return Err(format!("window {lo}:{hi} is empty"));
    }
    Ok([lo, hi])
}

fn parse_levels(s: &str) -> Result<Levels, String> {
    let levels = s
        .split(',')
        .map(parse_window)
        .collect::<Result<Vec<_>, _>>()?;
    if levels.is_empty() {
        return Err("no levels".into());
    }
    Ok(Levels(levels))
}

pub struct Settings {
    pub pretty: bool,
    pub budget: usize,
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Input => 1,
        ErrorClass::Numeric => 2,
        ErrorClass::Budget => 3,
    }
}

fn class_name(class: ErrorClass) -> &'static str {
    match class {
        ErrorClass::Input => "input",
        ErrorClass::Numeric => "numeric",
        ErrorClass::Budget => "budget",
    }
}

fn report(err: &Error) -> ExitCode {
    let class = err.class();
    let body =
        serde_json::json!({ "error": { "class": class_name(class), "message": err.to_string() } });
    eprintln!("{body}");
    ExitCode::from(exit_code(class))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return report(&Error::InvalidArgument("--threads must be positive".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            return report(&Error::InvalidArgument(format!("thread pool: {e}")));
        }
    }
    let settings = Settings {
        pretty: cli.pretty,
        budget: cli.budget,
    };
    match commands::run(&cli.command, &settings) {
        Ok(value) => {
            let text = if settings.pretty {
                serde_json::to_string_pretty(&value)
            } else {
                serde_json::to_string(&value)
            };
            println!("{}", text.expect("JSON values serialize"));
            ExitCode::SUCCESS
        }
        Err(e) => report(&e),
    }
}
