use clap::{Parser, Subcommand, ValueEnum};
use qfrict::DopplerMode;
use qfrict_cli::commands::fit_records;
use qfrict_cli::report::{write_rows, write_table};
use qfrict_cli::*;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qfrict", version, about = "Quantum friction observables as CSV")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// key = value configuration file
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for sweep points
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write CSV here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override models.doppler
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Full,
    Leading,
}

#[derive(Subcommand)]
enum Cmd {
    /// One row per model at the configured point
    Compute(Common),
    /// One row per model and sweep point
    Sweep(Common),
    /// Log-log slope of each model along the sweep
    FitExponent(Common),
    /// Models side by side with derived power ratios
    CompareModels(Common),
    /// Closed-form and invariant cross-checks
    OracleCheck(Common),
}

fn load(c: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(&c.config)?;
    if let Some(t) = env_rel_tol()? {
        cfg.quad = cfg.quad.with_rel_tol(t);
    }
    if let Some(m) = c.mode {
        cfg.options.doppler = match m {
            Mode::Full => DopplerMode::Full,
            Mode::Leading => DopplerMode::Leading,
        };
    }
    if c.output.is_some() {
        cfg.output_path = c.output.clone();
    }
    if c.jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    Ok(cfg)
}

fn sink(cfg: &RunConfig) -> Result<Box<dyn Write>, CliError> {
    Ok(match &cfg.output_path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Compute(c) => {
            let cfg = load(&c)?;
            let rows = cmd_compute(&cfg, c.jobs)?;
            write_rows(sink(&cfg)?, "compute", &rows)
        }
        Cmd::Sweep(c) => {
            let cfg = load(&c)?;
            let rows = cmd_sweep(&cfg, c.jobs)?;
            write_rows(sink(&cfg)?, "sweep", &rows)
        }
        Cmd::FitExponent(c) => {
            let cfg = load(&c)?;
            let fits = cmd_fit_exponent(&cfg, c.jobs)?;
            let (h, r) = fit_records(&fits);
            write_table(sink(&cfg)?, "fit-exponent", &h, &r)
        }
        Cmd::CompareModels(c) => {
            let cfg = load(&c)?;
            let t = cmd_compare_models(&cfg, c.jobs)?;
            let (h, r) = t.records();
            write_table(sink(&cfg)?, "compare-models", &h, &r)
        }
        Cmd::OracleCheck(c) => {
            let cfg = load(&c)?;
            let (rows, err) = match cmd_oracle_check(&cfg, c.jobs) {
                Ok(rows) => (rows, None),
                Err((rows, e)) => (rows, Some(e)),
            };
            let recs: Vec<Vec<String>> = rows.iter().map(CheckRow::record).collect();
            write_table(sink(&cfg)?, "oracle-check", &CheckRow::header(), &recs)?;
            err.map_or(Ok(()), Err)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qfrict: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
