use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, CommandFactory, FromArgMatches, Parser};

use contact_bundles_cli::config::{self, FileConfig, ScenarioConfig, TOLERANCE_NAMES};
use contact_bundles_cli::{CliError, Report, Status};

/// Run a verification scenario and write a JSON report.
#[derive(Debug, Parser)]
#[command(name = "cbundle", version)]
struct Cli {
    /// Scenario to run.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scenario's primary sample count.
    #[arg(long)]
    samples: Option<usize>,
    /// Report path; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: $CONTACT_BUNDLES_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// TOML config file. Flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    list_scenarios: bool,
}

fn command() -> clap::Command {
    TOLERANCE_NAMES.iter().fold(Cli::command(), |cmd, name| {
        let flag = format!("tol-{}", name.replace('_', "-"));
        cmd.arg(
            Arg::new(flag.clone())
                .long(flag)
                .value_name("X")
                .value_parser(clap::value_parser!(f64))
                .action(ArgAction::Set)
                .help(format!("Threshold for the `{name}` checks")),
        )
    })
}

fn resolve(cli: &Cli, matches: &ArgMatches) -> Result<ScenarioConfig, CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let scenario = cli
        .scenario
        .clone()
        .or(file.scenario)
        .ok_or_else(|| CliError::Config("no scenario given (use --scenario or the config file)".into()))?;
    let mut cfg = ScenarioConfig::new(&scenario, cli.seed.or(file.seed).unwrap_or(config::DEFAULT_SEED));
    cfg.samples = cli.samples.or(file.samples);
    cfg.threads = cli.threads.or(file.threads);
    cfg.out = cli.out.clone().or(file.out);
    if let Some(t) = file.tolerances {
        cfg.tolerances = t;
    }
    for name in TOLERANCE_NAMES {
        if let Some(&x) = matches.get_one::<f64>(&format!("tol-{}", name.replace('_', "-"))) {
            cfg.tolerances.set(name, x)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(report: &Report, out: Option<&PathBuf>) -> Result<(), CliError> {
    let json = report.to_json();
    match out {
        Some(p) => std::fs::write(p, json + "\n")?,
        None => writeln!(std::io::stdout(), "{json}")?,
    }
    let mut err = std::io::stderr().lock();
    for c in &report.checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        writeln!(err, "{status} {}", c.name)?;
    }
    writeln!(err, "{}: {:?} ({:.1}s)", report.scenario, report.status, report.wall_clock_seconds)?;
    Ok(())
}

fn main() -> ExitCode {
    let matches = command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    if cli.list_scenarios {
        for s in config::SCENARIOS {
            println!("{s}");
        }
        return ExitCode::SUCCESS;
    }
    let result = resolve(&cli, &matches).and_then(|cfg| {
        let report = contact_bundles_cli::run(&cfg)?;
        emit(&report, cfg.out.as_ref())?;
        Ok(report.status)
    });
    match result {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
