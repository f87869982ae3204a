use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aodv_core::sim::{TraceRecord, TraceSink};
use aodv_sim::config::split_assignment;
use aodv_sim::experiment::run_traced;
use aodv_sim::{compare, parse_with_overrides, run_experiment, ScenarioConfig};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

/// Deterministic MANET simulator comparing hop-count and distance-cost AODV.
#[derive(Parser)]
#[command(name = "aodv-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and print per-transfer CSV rows.
    Simulate {
        config: PathBuf,
        /// Override a scenario key, e.g. `--set radio.range_m=200`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write a tab-separated event trace.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run baseline and variant over consecutive seeds starting at `seed`.
    Compare {
        config: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        seeds: u64,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Write every per-run row here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the gnuplot series here instead of after the summary.
        #[arg(long)]
        series: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

struct FileTrace<W: Write> {
    out: W,
    error: Option<io::Error>,
}

impl<W: Write> TraceSink for FileTrace<W> {
    fn record(&mut self, rec: &TraceRecord) {
        if self.error.is_none() {
            if let Err(e) = writeln!(self.out, "{rec}") {
                self.error = Some(e);
            }
        }
    }
}

fn load(path: &Path, set: &[String]) -> Result<ScenarioConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let overrides = set
        .iter()
        .map(|s| {
            split_assignment(s)
                .map(|(k, v)| (k.to_owned(), v.to_owned()))
                .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got `{s}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    parse_with_overrides(&text, &overrides)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let res = match path {
        Some(p) => std::fs::write(p, text).map_err(|e| (p.display().to_string(), e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| ("stdout".to_owned(), e)),
    };
    res.map_err(|(what, e)| Failure::Runtime(format!("cannot write {what}: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate {
            config,
            set,
            csv,
            trace,
        } => {
            let cfg = load(&config, &set)?;
            let result = match trace {
                Some(path) => {
                    let file = File::create(&path).map_err(|e| {
                        Failure::Runtime(format!("cannot create {}: {e}", path.display()))
                    })?;
                    let mut sink = FileTrace {
                        out: BufWriter::new(file),
                        error: None,
                    };
                    let r = run_traced(&cfg, &mut sink);
                    let flushed = sink.out.flush();
                    if let Some(e) = sink.error.or(flushed.err()) {
                        return Err(Failure::Runtime(format!(
                            "cannot write {}: {e}",
                            path.display()
                        )));
                    }
                    r
                }
                None => run_experiment(&cfg),
            }
            .map_err(|e| Failure::Runtime(e.to_string()))?;
            emit(csv.as_deref(), &result.csv())
        }
        Command::Compare {
            config,
            seeds,
            set,
            csv,
            series,
        } => {
            let cfg = load(&config, &set)?;
            let list: Vec<u64> = (0..seeds).map(|i| cfg.seed.wrapping_add(i)).collect();
            let cmp = compare(&cfg, &list).map_err(|e| Failure::Runtime(e.to_string()))?;
            if let Some(p) = csv.as_deref() {
                emit(Some(p), &cmp.rows_csv())?;
            }
            let mut text = cmp.summary_csv();
            match series.as_deref() {
                Some(p) => emit(Some(p), &cmp.series_dat())?,
                None => {
                    text.push_str("\n\n");
                    text.push_str(&cmp.series_dat());
                }
            }
            emit(None, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
