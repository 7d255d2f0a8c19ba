//! The `propagate` command: reads a CSP file, runs one consistency
//! algorithm and prints the reduced CSP in canonical form.
//!
//! Exit status: 0 on success, 1 when the result has an empty domain or an
//! empty constraint, 2 on bad input or usage.

use std::io::Write;

use clap::{Parser, ValueEnum};
use propagation::arc::{ac3_with, hyper_arc_with, Ac3Options};
use propagation::csp::{standardize, Csp};
use propagation::directional::{dac, darc_with, dpath_with, dpc, VariableOrder};
use propagation::format::{parse_csp, print_csp};
use propagation::iterate::{RunOptions, RunStats, UpdateMode};
use propagation::path::{path_with, pc2_with, Pc2Options};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Hyperarc,
    Ac3,
    Path,
    Pc2,
    Dac,
    Dpc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Tsv,
}

#[derive(Debug, Parser)]
#[command(name = "propagate", about = "Run a constraint propagation algorithm on a CSP file")]
pub struct Cli {
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Comma-separated variable ordering; required for dac and dpc.
    #[arg(long, value_delimiter = ',')]
    pub order: Option<Vec<String>>,
    /// Print applications, additions and peak worklist size.
    #[arg(long)]
    pub stats: bool,
    /// Check loop invariants and update assumptions while running.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    pub file: std::path::PathBuf,
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

/// Runs the chosen algorithm; returns the reduced CSP and its stats.
pub fn run_algo(cli: &Cli, p: &Csp) -> Result<(Csp, RunStats), Failure> {
    let err = |e: propagation::Error| input_error(e.to_string());
    let order = || -> Result<VariableOrder, Failure> {
        let names = cli
            .order
            .as_ref()
            .ok_or_else(|| input_error(format!("--order is required for {:?}", cli.algo).to_lowercase()))?;
        VariableOrder::from_names(p, names).map_err(err)
    };
    let options = RunOptions {
        verify: cli.verify,
        ..RunOptions::default()
    };
    match cli.algo {
        Algo::Hyperarc => hyper_arc_with(p, UpdateMode::Idempotent, &options).map_err(err),
        Algo::Ac3 => ac3_with(
            p,
            &Ac3Options {
                verify: cli.verify,
                ..Ac3Options::default()
            },
        )
        .map_err(err),
        Algo::Path => path_with(&standardize(p).map_err(err)?, UpdateMode::Idempotent, &options).map_err(err),
        Algo::Pc2 => pc2_with(
            &standardize(p).map_err(err)?,
            &Pc2Options {
                verify: cli.verify,
                ..Pc2Options::default()
            },
        )
        .map_err(err),
        Algo::Dac | Algo::Dpc => {
            let ord = order()?;
            let s = standardize(p).map_err(err)?;
            let literal = if cli.algo == Algo::Dac { dac(&s, &ord) } else { dpc(&s, &ord) }.map_err(err)?;
            if cli.verify {
                let (si, _) = if cli.algo == Algo::Dac {
                    darc_with(&s, &ord, true)
                } else {
                    dpath_with(&s, &ord, true)
                }
                .map_err(err)?;
                if si != literal.0 {
                    return Err(input_error("loop result differs from the single-pass iteration result"));
                }
            }
            Ok(literal)
        }
    }
}

fn render_stats(format: Format, s: &RunStats) -> String {
    match format {
        Format::Text => format!(
            "# applications={} additions={} peak={}\n",
            s.applications, s.additions, s.peak
        ),
        Format::Tsv => format!("applications\tadditions\tpeak\n{}\t{}\t{}\n", s.applications, s.additions, s.peak),
    }
}

/// Parses `args` (including the program name), runs, and writes the report.
/// Returns the exit status.
pub fn run_command<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(&cli) {
        Ok((report, code)) => {
            let _ = out.write_all(report.as_bytes());
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: &Cli) -> Result<(String, i32), Failure> {
    let text = std::fs::read_to_string(&cli.file)
        .map_err(|e| input_error(format!("{}: {e}", cli.file.display())))?;
    let p = parse_csp(&text).map_err(|e| input_error(format!("{}:{e}", cli.file.display())))?;
    let (q, stats) = run_algo(cli, &p)?;
    let mut report = print_csp(&q);
    if cli.stats {
        report.push_str(&render_stats(cli.format, &stats));
    }
    let code = if q.has_empty_domain() || q.has_empty_constraint() { 1 } else { 0 };
    Ok((report, code))
}
