//! The `lowcut` command line.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use crate::error::Error;
use crate::experiments::{
    run_experiment, write_records, write_summary, ExperimentConfig, RunOptions,
};

const DEFAULT_OUT: &str = "results";

/// Shipped desk-scale configs: `(demo name, description, config documents)`.
pub const DEMOS: &[(&str, &str, &[&str])] = &[
    (
        "convergence-1d",
        "bucketing and hard-margin on the V-shaped density",
        &[
            include_str!("../configs/convergence-1d-bucketing.json"),
            include_str!("../configs/convergence-1d-hard1d.json"),
        ],
    ),
    (
        "convergence-nd",
        "soft margin on a two-component planar mixture",
        &[include_str!("../configs/convergence-nd.json")],
    ),
    (
        "failure",
        "bucketing with k = m against k = ceil(m^(1/3))",
        &[include_str!("../configs/failure.json")],
    ),
    (
        "coupon",
        "coupon-collector tail against its limit",
        &[include_str!("../configs/coupon.json")],
    ),
    (
        "gaps",
        "largest uniform spacing against ln m / m",
        &[include_str!("../configs/gaps.json")],
    ),
    (
        "lowerbound",
        "two densities no finite sample tells apart",
        &[include_str!("../configs/lowerbound.json")],
    ),
];

#[derive(Debug, Parser)]
#[command(
    name = "lowcut",
    version,
    about = "Low-density hyperplane estimators and their experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a config file
    Run {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a shipped config
    Demo {
        name: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// List the shipped demos
    List,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output directory (default: the config's `output`, else `results`)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Override the master seed
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub parallel: Option<u64>,
    /// Overwrite existing record files
    #[arg(long)]
    pub force: bool,
    /// Fill the wall_ms column (makes output non-reproducible)
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Refused(String),
    Run(Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Run(Error::Config { .. }) => 2,
            Failure::Run(Error::DegenerateOracle { .. }) => 3,
            Failure::Refused(_) | Failure::Run(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Refused(m) => f.write_str(m),
            Failure::Run(e) => e.fmt(f),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

fn parse_demo(name: &str) -> Result<&'static [&'static str], Failure> {
    DEMOS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, _, docs)| *docs)
        .ok_or_else(|| {
            let names: Vec<&str> = DEMOS.iter().map(|(n, _, _)| *n).collect();
            Failure::Usage(format!(
                "unknown demo `{name}`; expected one of: {}",
                names.join(", ")
            ))
        })
}

fn record_paths(out: &Path, id: &str) -> (PathBuf, PathBuf) {
    (
        out.join(format!("{id}.csv")),
        out.join(format!("{id}.summary.json")),
    )
}

fn execute(mut config: ExperimentConfig, args: &OutputArgs) -> Result<(), Failure> {
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let (csv, summary) = record_paths(&out, config.id());
    if !args.force {
        if let Some(existing) = [&csv, &summary].into_iter().find(|p| p.exists()) {
            return Err(Failure::Refused(format!(
                "{} exists; pass --force to overwrite",
                existing.display()
            )));
        }
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.parallel {
        pool = pool.num_threads(n as usize);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure::Refused(format!("cannot start worker pool: {e}")))?;
    info!(
        "{}: running on {} threads",
        config.id(),
        pool.current_num_threads()
    );
    let output = pool.install(|| {
        run_experiment(
            &config,
            RunOptions {
                timing: args.timing,
            },
        )
    })?;

    fs::create_dir_all(&out).map_err(Error::from)?;
    let mut w = BufWriter::new(File::create(&csv).map_err(Error::from)?);
    write_records(&mut w, &output.records)?;
    w.flush().map_err(Error::from)?;
    let mut w = BufWriter::new(File::create(&summary).map_err(Error::from)?);
    write_summary(&mut w, &output, &config)?;
    w.flush().map_err(Error::from)?;
    info!(
        "{}: wrote {} records to {}",
        config.id(),
        output.records.len(),
        csv.display()
    );
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, output } => execute(ExperimentConfig::load(&config)?, &output),
        Command::Demo { name, output } => {
            for doc in parse_demo(&name)? {
                execute(ExperimentConfig::from_json_str(doc)?, &output)?;
            }
            Ok(())
        }
        Command::List => {
            for (name, about, _) in DEMOS {
                println!("{name:<16}{about}");
            }
            Ok(())
        }
    }
}

/// Parses arguments, runs, and maps failures to exit codes:
/// 2 for invalid configs or demo names, 3 for a degenerate oracle, 1 otherwise.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LOWCUT_LOG", "error"))
        .target(env_logger::Target::Stderr)
        .init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn shipped_configs_validate() {
        for (name, _, docs) in DEMOS {
            for doc in *docs {
                ExperimentConfig::from_json_str(doc).unwrap_or_else(|e| panic!("{name}: {e}"));
            }
        }
    }

    #[test]
    fn unknown_demo_lists_names() {
        let e = parse_demo("nope").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e
            .to_string()
            .contains("convergence-1d, convergence-nd, failure, coupon, gaps, lowerbound"));
    }

    #[test]
    fn exit_codes() {
        let config = Failure::Run(Error::Config {
            key: "trials".into(),
            line: Some(1),
            message: String::new(),
        });
        assert_eq!(config.exit_code(), 2);
        assert_eq!(
            Failure::Run(Error::DegenerateOracle { margin: 0.0 }).exit_code(),
            3
        );
        assert_eq!(Failure::Refused(String::new()).exit_code(), 1);
    }
}
