mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Format, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "cayley-roe", version, about = "Spectral gaps, Cayley-topology limits and sum-of-squares certificates for finite marked groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral gap of each selected group.
    Gap(Common),
    /// Gaps along a family plus a fitted decay verdict.
    Family(Common),
    /// Ball-signature stabilization and the limit ball.
    Converge(Common),
    /// Assign groups to the first relator set they satisfy.
    Partition(Common),
    /// Certified spectral gap with a sum-of-squares certificate.
    SosCertify(Common),
    /// Averaging of random Roe-algebra sums of squares into the group algebra.
    RoeAvg(Common),
    /// First cohomology dimensions over small disjoint unions.
    Cohomology(Common),
    /// Spectral gap of a disjoint union of Cayley graphs.
    Union(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Family name (cyclic, dihedral, symmetric, sl2, cyclic-square), `standard`, or a JSON catalog path.
    #[arg(long)]
    catalog: Option<String>,
    #[arg(long)]
    m: Option<u64>,
    /// Inclusive index range `a..b`.
    #[arg(long)]
    range: Option<String>,
    #[arg(long)]
    radius: Option<u32>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Eigensolver: auto, dense or sparse.
    #[arg(long)]
    method: Option<String>,
    /// Comma-separated relator words; repeat for several sets.
    #[arg(long)]
    relators: Vec<String>,
    /// Number of random samples (roe-avg).
    #[arg(long)]
    samples: Option<usize>,
    /// Squares per sample (roe-avg).
    #[arg(long)]
    terms: Option<usize>,
    /// Size cap for cohomology linear algebra.
    #[arg(long)]
    cap: Option<usize>,
    /// JSON config; its keys override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report errors on stderr as JSON.
    #[arg(long)]
    json_errors: bool,
}

impl Common {
    fn to_config(&self, command: &str) -> Result<RunConfig, CliError> {
        let d = RunConfig::default();
        let c = RunConfig {
            command: command.to_string(),
            catalog: self.catalog.clone(),
            m: self.m,
            range: self.range.clone(),
            radius: self.radius,
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            tol: self.tol.unwrap_or(d.tol),
            jobs: self.jobs.unwrap_or(d.jobs),
            seed: self.seed.unwrap_or(d.seed),
            out: self.out.clone(),
            format: self.format.unwrap_or(d.format),
            method: self.method.clone().unwrap_or(d.method),
            relators: self.relators.clone(),
            samples: self.samples.unwrap_or(d.samples),
            terms: self.terms.unwrap_or(d.terms),
            cap: self.cap.unwrap_or(d.cap),
        };
        match &self.config {
            Some(path) => c.overlay_file(path),
            None => Ok(c),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, common, f): (&str, &Common, fn(&RunConfig) -> Result<output::Report, CliError>) = match &cli.command {
        Command::Gap(c) => ("gap", c, commands::gap),
        Command::Family(c) => ("family", c, commands::family),
        Command::Converge(c) => ("converge", c, commands::converge),
        Command::Partition(c) => ("partition", c, commands::partition),
        Command::SosCertify(c) => ("sos-certify", c, commands::sos_certify),
        Command::RoeAvg(c) => ("roe-avg", c, commands::roe_avg),
        Command::Cohomology(c) => ("cohomology", c, commands::cohomology),
        Command::Union(c) => ("union", c, commands::union),
    };
    let config = common.to_config(name)?;
    f(&config)?.emit(&config)
}

fn report_error(err: &CliError, json: bool) {
    if json {
        let v = serde_json::json!({
            "error": err.kind(),
            "message": err.to_string(),
            "exit_code": err.exit_code(),
        });
        eprintln!("{v}");
    } else {
        eprintln!("error: {err}");
    }
}

fn main() -> ExitCode {
    let json = std::env::args().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if json {
                report_error(&CliError::Usage(e.kind().to_string()), true);
            } else {
                let _ = e.print();
            }
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(&e, json);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
