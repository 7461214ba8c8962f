use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nsfd::MidpointWeights;
use nsfd_cli::config::parse_map;
use nsfd_cli::{commands, CliError, ConfigPatch, Format, Report, RunConfig, RunOptions};

/// Solve the MHD boundary-layer problem on a quasi-uniform grid.
///
/// Settings come from built-in defaults, then `--config`, then flags.
/// Exit status: 0 success, 1 non-convergence, 2 configuration error.
#[derive(Parser)]
#[command(name = "nsfd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve at one β and write the profile (n, xi, x, u1, u2, u3).
    Solve(Flags),
    /// Wall shear over a β range.
    Sweep(Flags),
    /// Richardson ladder of the wall shear over doubled meshes.
    Extrapolate(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum Weights {
    /// Midpoint weights from the quarter nodes of the map.
    Quarter,
    /// Midpoint weights from linear interpolation between nodes.
    Nodal,
}

#[derive(Args)]
struct Flags {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid map: log or alg.
    #[arg(long, value_parser = parse_map)]
    map: Option<nsfd::MapKind>,
    /// Map control parameter.
    #[arg(long)]
    c: Option<f64>,
    /// Number of intervals.
    #[arg(short = 'N', long = "intervals")]
    n: Option<usize>,
    /// Newton tolerance on the mean absolute update.
    #[arg(long)]
    tol: Option<f64>,
    /// Single β; sets both ends of the range.
    #[arg(long, conflicts_with_all = ["beta_start", "beta_stop"])]
    beta: Option<f64>,
    #[arg(long)]
    beta_start: Option<f64>,
    #[arg(long)]
    beta_stop: Option<f64>,
    #[arg(long)]
    beta_step: Option<f64>,
    /// Intervals on the coarsest extrapolation mesh.
    #[arg(long)]
    richardson_n0: Option<usize>,
    /// Number of doublings after the coarsest mesh.
    #[arg(long)]
    richardson_levels: Option<usize>,
    /// Comma-separated exponents p_k (default 2, 4, 6, ...).
    #[arg(long, value_delimiter = ',', num_args = 1)]
    richardson_orders: Option<Vec<f64>>,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Print 17 significant digits instead of the fixed table precision.
    #[arg(long)]
    full_precision: bool,
    /// Newton iteration cap.
    #[arg(long, default_value_t = RunOptions::default().max_iter)]
    max_iter: usize,
    #[arg(long, value_enum, default_value = "quarter")]
    weights: Weights,
}

impl Flags {
    fn patch(&self) -> ConfigPatch {
        ConfigPatch {
            map: self.map,
            c: self.c,
            n: self.n,
            tol: self.tol,
            beta_start: self.beta.or(self.beta_start),
            beta_stop: self.beta.or(self.beta_stop),
            beta_step: self.beta_step,
            richardson_n0: self.richardson_n0,
            richardson_levels: self.richardson_levels,
            richardson_orders: self.richardson_orders.clone(),
            output: self.output.clone(),
            format: self.format,
        }
    }

    fn options(&self) -> RunOptions {
        RunOptions {
            full_precision: self.full_precision,
            max_iter: self.max_iter,
            weights: match self.weights {
                Weights::Quarter => MidpointWeights::QuarterNodes,
                Weights::Nodal => MidpointWeights::NodeInterpolation,
            },
        }
    }

    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut patches = Vec::new();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            patches.push(ConfigPatch::parse(&text)?);
        }
        patches.push(self.patch());
        RunConfig::resolve(patches)
    }
}

/// Writes the table to the output file, or to stdout. The summary goes to
/// stdout when the table has a file of its own and to stderr otherwise.
fn emit(cfg: &RunConfig, report: &Report) -> Result<(), CliError> {
    let body = report.table.render(cfg.format);
    let summary: String = report.summary.iter().map(|l| format!("{l}\n")).collect();
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, body).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            print!("{summary}");
        }
        None => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(body.as_bytes());
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (flags, cmd): (&Flags, fn(&RunConfig, &RunOptions) -> Result<Report, CliError>) = match &cli.command {
        Command::Solve(f) => (f, commands::solve),
        Command::Sweep(f) => (f, commands::sweep),
        Command::Extrapolate(f) => (f, commands::extrapolate),
    };
    let cfg = flags.resolve()?;
    let report = cmd(&cfg, &flags.options())?;
    emit(&cfg, &report)?;
    match report.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nsfd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
