//! Running scenarios and turning reports into CSV and plot series.

use std::fmt::Write as _;

use aodv_core::sim::{NoTrace, SimError, TraceSink};
use aodv_core::{MetricsReport, TransferReport, World};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{Protocol, ScenarioConfig};

pub const CSV_HEADER: &str =
    "protocol,seed,transfer,cost,avg_delay_ms,packets_sent,packets_dropped,delivery_ratio,network_load_bps,control_overhead";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("simulation failed: {0}")]
    Sim(#[from] SimError),
    #[error("compare needs at least one seed")]
    NoSeeds,
}

/// One finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub protocol: Protocol,
    pub seed: u64,
    pub report: MetricsReport,
}

fn csv_row(out: &mut String, protocol: Protocol, seed: u64, t: &TransferReport, label: &str) {
    let _ = writeln!(
        out,
        "{protocol},{seed},{label},{:.3},{:.3},{},{},{:.6},{:.3},{}",
        t.cost,
        t.avg_delay_ms,
        t.packets_sent,
        t.packets_dropped,
        t.delivery_ratio,
        t.network_load_bps,
        t.control_overhead,
    );
}

impl RunResult {
    /// Per-transfer rows followed by the `all` row, without a header.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for t in &self.report.transfers {
            csv_row(
                &mut out,
                self.protocol,
                self.seed,
                t,
                &t.transfer.to_string(),
            );
        }
        csv_row(
            &mut out,
            self.protocol,
            self.seed,
            &self.report.aggregate,
            "all",
        );
        out
    }

    pub fn csv(&self) -> String {
        format!("{CSV_HEADER}\n{}", self.csv_rows())
    }
}

pub fn run_experiment(cfg: &ScenarioConfig) -> Result<RunResult, RunError> {
    run_traced(cfg, &mut NoTrace)
}

pub fn run_traced(cfg: &ScenarioConfig, sink: &mut dyn TraceSink) -> Result<RunResult, RunError> {
    let mut world = World::new(cfg.to_sim_config())?;
    let report = world.run_traced(cfg.duration, sink);
    Ok(RunResult {
        protocol: cfg.protocol,
        seed: cfg.seed,
        report,
    })
}

/// A named column read from a transfer row.
pub type MetricColumn = (&'static str, fn(&TransferReport) -> f64);

/// Metrics summarised across seeds, read from each run's aggregate row.
pub const SUMMARY_METRICS: &[MetricColumn] = &[
    ("cost", |t| t.cost),
    ("avg_delay_ms", |t| t.avg_delay_ms),
    ("packets_dropped", |t| t.packets_dropped as f64),
    ("network_load_bps", |t| t.network_load_bps),
    ("delivery_ratio", |t| t.delivery_ratio),
    ("control_overhead", |t| t.control_overhead as f64),
];

/// The four plotted quantities, per transfer.
pub const SERIES_METRICS: &[MetricColumn] = &[
    ("cost", |t| t.cost),
    ("avg_delay_ms", |t| t.avg_delay_ms),
    ("packets_dropped", |t| t.packets_dropped as f64),
    ("network_load_bps", |t| t.network_load_bps),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
}

impl Stats {
    pub fn of(xs: &[f64]) -> Stats {
        if xs.is_empty() {
            return Stats {
                mean: 0.0,
                std: 0.0,
            };
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Stats { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub metric: &'static str,
    pub baseline: Stats,
    pub variant: Stats,
}

impl SummaryRow {
    /// Variant mean over baseline mean. Two zero means count as parity.
    pub fn ratio(&self) -> f64 {
        if self.baseline.mean == 0.0 && self.variant.mean == 0.0 {
            1.0
        } else {
            self.variant.mean / self.baseline.mean
        }
    }
}

/// `(transfer index, mean over seeds)` points for one metric and protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub metric: &'static str,
    pub protocol: Protocol,
    pub points: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// Ordered by protocol, then seed.
    pub runs: Vec<RunResult>,
    pub summary: Vec<SummaryRow>,
    pub series: Vec<Series>,
}

/// Runs both protocols on every seed. Seeds run in parallel; results are
/// collected in (protocol, seed) order.
pub fn compare(cfg: &ScenarioConfig, seeds: &[u64]) -> Result<Comparison, RunError> {
    if seeds.is_empty() {
        return Err(RunError::NoSeeds);
    }
    let jobs: Vec<ScenarioConfig> = [Protocol::Baseline, Protocol::Variant]
        .iter()
        .flat_map(|&p| {
            seeds
                .iter()
                .map(move |&s| cfg.with_protocol(p).with_seed(s))
        })
        .collect();
    let runs = jobs
        .par_iter()
        .map(run_experiment)
        .collect::<Result<Vec<_>, _>>()?;

    let of = |p: Protocol| runs.iter().filter(move |r| r.protocol == p);
    let summary = SUMMARY_METRICS
        .iter()
        .map(|&(metric, get)| {
            let vals = |p| of(p).map(|r| get(&r.report.aggregate)).collect::<Vec<_>>();
            SummaryRow {
                metric,
                baseline: Stats::of(&vals(Protocol::Baseline)),
                variant: Stats::of(&vals(Protocol::Variant)),
            }
        })
        .collect();

    let mut series = Vec::new();
    for &(metric, get) in SERIES_METRICS {
        for p in [Protocol::Baseline, Protocol::Variant] {
            let width = of(p).map(|r| r.report.transfers.len()).max().unwrap_or(0);
            let points = (0..width)
                .map(|i| {
                    let vals: Vec<f64> = of(p)
                        .filter_map(|r| r.report.transfers.get(i))
                        .map(get)
                        .collect();
                    (i as u32 + 1, Stats::of(&vals).mean)
                })
                .collect();
            series.push(Series {
                metric,
                protocol: p,
                points,
            });
        }
    }
    Ok(Comparison {
        runs,
        summary,
        series,
    })
}

impl Comparison {
    /// Every per-run row under one header.
    pub fn rows_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.runs {
            out.push_str(&r.csv_rows());
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "metric,baseline_mean,baseline_std,variant_mean,variant_std,variant_over_baseline\n",
        );
        for row in &self.summary {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{:.6},{:.6}",
                row.metric,
                row.baseline.mean,
                row.baseline.std,
                row.variant.mean,
                row.variant.std,
                row.ratio()
            );
        }
        out
    }

    /// Gnuplot data blocks separated by two blank lines, addressable with
    /// `index N`; each block is `transfer value`.
    pub fn series_dat(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.series.iter().enumerate() {
            if i > 0 {
                out.push_str("\n\n");
            }
            let _ = writeln!(out, "# index {i}: {} {}", s.metric, s.protocol);
            for (x, y) in &s.points {
                let _ = writeln!(out, "{x} {y:.6}");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn small() -> ScenarioConfig {
        parse_config("nodes = 12\narena = 500x500\nduration_s = 8\ntraffic.flows = 2\n").unwrap()
    }

    #[test]
    fn stats_of_one_value_has_zero_spread() {
        assert_eq!(
            Stats::of(&[4.0]),
            Stats {
                mean: 4.0,
                std: 0.0
            }
        );
        let s = Stats::of(&[1.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.std - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rows_per_transfer_plus_aggregate() {
        let r = run_experiment(&small()).unwrap();
        let csv = r.csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + 2 + 1);
        assert!(lines[1].starts_with("baseline,1,1,"));
        assert!(lines[3].starts_with("baseline,1,all,"));
        assert!(lines.iter().all(|l| l.split(',').count() == 10));
    }

    #[test]
    fn single_seed_comparison() {
        let c = compare(&small(), &[5]).unwrap();
        assert_eq!(c.runs.len(), 2);
        assert_eq!(c.runs[0].protocol, Protocol::Baseline);
        assert!(c
            .summary
            .iter()
            .all(|r| r.baseline.std == 0.0 && r.variant.std == 0.0));
        assert!(c
            .summary
            .iter()
            .all(|r| r.ratio().is_finite() || r.baseline.mean == 0.0));
        assert_eq!(c.series.len(), 8);
        assert!(compare(&small(), &[]).is_err());
    }

    #[test]
    fn ratio_handles_zero_baseline() {
        let z = Stats {
            mean: 0.0,
            std: 0.0,
        };
        let row = SummaryRow {
            metric: "x",
            baseline: z,
            variant: z,
        };
        assert_eq!(row.ratio(), 1.0);
    }
}
