use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use uavsim::config::{ConfigError, ScenarioConfig};
use uavsim::metrics::write_run;
use uavsim::sweep::{compare_dirs, run_sweep, SweepError, SweepSpec};
use uavsim::world::run;

/// Packet-level simulator for UAV telemetry and task offloading over WiFi and LTE.
#[derive(Parser)]
#[command(name = "uavsim", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write its CSVs.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one scenario per value of a parameter, over several seeds.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, default_value_t = 10)]
        seeds: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two sweep directories point by point.
    Report {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
}

const EXIT_OTHER: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

fn config_exit(e: &ConfigError) -> u8 {
    match e {
        ConfigError::Io(_) => EXIT_OTHER,
        _ => EXIT_VALIDATION,
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Simulate { scenario, seed, out } => {
            let mut cfg = match ScenarioConfig::load(&scenario) {
                Ok(c) => c,
                Err(e) => return fail(config_exit(&e), e),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let id = format!("{}-seed-{}", cfg.technology.as_str(), cfg.seed);
            let o = match run(&cfg, &id) {
                Ok(o) => o,
                Err(e) => return fail(EXIT_OTHER, e),
            };
            if let Err(e) = write_run(&out, &o.summary, &o.records, &o.errors) {
                return fail(EXIT_OTHER, e);
            }
            print!("{}", o.summary.to_text());
            ExitCode::SUCCESS
        }
        Cmd::Sweep {
            scenario,
            param,
            values,
            seeds,
            out,
        } => {
            let cfg = match ScenarioConfig::load(&scenario) {
                Ok(c) => c,
                Err(e) => return fail(config_exit(&e), e),
            };
            let spec = SweepSpec { param, values, seeds };
            match run_sweep(&cfg, &spec, Some(&out)) {
                Ok(r) => {
                    for row in &r.primary {
                        println!(
                            "{}={} {} mean {:.4} p95 {:.4} n {}",
                            row.sweep_param, row.value, row.metric, row.mean, row.p95, row.n_seeds
                        );
                    }
                    if r.failures.is_empty() {
                        ExitCode::SUCCESS
                    } else {
                        for f in &r.failures {
                            eprintln!("run {}={} seed {} failed: {}", spec.param, f.value, f.seed, f.message);
                        }
                        ExitCode::from(EXIT_PARTIAL)
                    }
                }
                Err(SweepError::Config(e)) => fail(config_exit(&e), e),
                Err(e) => fail(EXIT_OTHER, e),
            }
        }
        Cmd::Report { a, b } => match compare_dirs(&a, &b) {
            Ok(r) => {
                print!("{}", r.to_text());
                ExitCode::SUCCESS
            }
            Err(SweepError::Mismatch(m)) => fail(EXIT_VALIDATION, m),
            Err(e) => fail(EXIT_OTHER, e),
        },
    }
}
