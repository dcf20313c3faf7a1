//! Multi-seed parameter sweeps, the per-point aggregate CSV and the
//! two-network comparison report.
//!
//! Each run writes its CSVs into `runs/<value>/seed-<n>/` through a
//! temporary directory that is renamed into place once complete.
//! `aggregate.csv` has one row per sweep point for the sweep's primary
//! metric (task delay when tasks are enabled, position error otherwise);
//! `aggregate_all.csv` carries every metric. Statistics are taken over the
//! per-seed run means.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, ScenarioConfig};
use crate::metrics::{quantile, write_run, RunSummary};
use crate::world::{run, RunOutput};

pub const AGGREGATE_HEADER: [&str; 7] = ["sweep_param", "value", "metric", "mean", "variance", "p95", "n_seeds"];
pub const WORKERS_ENV: &str = "UAVSIM_WORKERS";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Mismatch(String),
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub param: String,
    pub values: Vec<String>,
    pub seeds: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunFailure {
    pub value: String,
    pub seed: u64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub sweep_param: String,
    pub value: String,
    pub metric: String,
    pub mean: f64,
    pub variance: f64,
    pub p95: f64,
    pub n_seeds: usize,
}

impl AggregateRow {
    fn of(param: &str, value: &str, metric: &str, xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = if n == 0 { f64::NAN } else { xs.iter().sum::<f64>() / n as f64 };
        let variance = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        AggregateRow {
            sweep_param: param.to_string(),
            value: value.to_string(),
            metric: metric.to_string(),
            mean,
            variance,
            p95: if n == 0 { f64::NAN } else { quantile(xs, 0.95) },
            n_seeds: n,
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n_seeds == 0 {
            f64::NAN
        } else {
            (self.variance / self.n_seeds as f64).sqrt()
        }
    }
}

pub struct SweepResult {
    pub primary: Vec<AggregateRow>,
    pub all: Vec<AggregateRow>,
    pub failures: Vec<RunFailure>,
}

/// Per-run scalar metrics that enter the aggregate; `None` when the run
/// produced no sample for it.
pub fn run_metrics(s: &RunSummary) -> Vec<(&'static str, Option<f64>)> {
    vec![
        ("error_m", s.error_m.map(|m| m.mean)),
        ("error_p95_m", s.error_m.map(|m| m.p95)),
        ("delay_ms", s.delay_ms.map(|m| m.mean)),
        ("delay_p95_ms", s.delay_ms.map(|m| m.p95)),
        ("delivery_ratio", Some(s.delivery_ratio)),
        ("incomplete_fraction", Some(s.incomplete_fraction)),
    ]
}

pub fn primary_metric(cfg: &ScenarioConfig) -> &'static str {
    if cfg.task_bytes() > 0 {
        "delay_ms"
    } else {
        "error_m"
    }
}

/// Worker count from `UAVSIM_WORKERS`, else the machine's parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn dir_name(value: &str) -> String {
    value
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Configurations of every (value, seed) pair, validated up front.
pub fn expand(base: &ScenarioConfig, spec: &SweepSpec) -> Result<Vec<(String, ScenarioConfig)>, ConfigError> {
    let mut out = Vec::new();
    for v in &spec.values {
        let mut point = base.clone();
        point.set(&spec.param, v)?;
        point.validate()?;
        for s in 0..spec.seeds as u64 {
            let mut c = point.clone();
            c.seed = base.seed + s;
            out.push((v.clone(), c));
        }
    }
    Ok(out)
}

fn write_atomic(out: &Path, value: &str, o: &RunOutput) -> std::io::Result<()> {
    let parent = out.join("runs").join(dir_name(value));
    std::fs::create_dir_all(&parent)?;
    let final_dir = parent.join(format!("seed-{}", o.summary.seed));
    let tmp = parent.join(format!(".seed-{}.tmp", o.summary.seed));
    if tmp.exists() {
        std::fs::remove_dir_all(&tmp)?;
    }
    write_run(&tmp, &o.summary, &o.records, &o.errors)?;
    if final_dir.exists() {
        std::fs::remove_dir_all(&final_dir)?;
    }
    std::fs::rename(&tmp, &final_dir)
}

/// Runs the sweep, optionally writing per-run CSVs and aggregates under `out`.
pub fn run_sweep(base: &ScenarioConfig, spec: &SweepSpec, out: Option<&Path>) -> Result<SweepResult, SweepError> {
    let jobs = expand(base, spec)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("scenario.cfg"), base.to_text())?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    let results: Vec<(String, u64, Result<RunSummary, String>)> = pool.install(|| {
        jobs.par_iter()
            .map(|(value, cfg)| {
                let id = format!("{}={}/seed-{}", spec.param, value, cfg.seed);
                let r = run(cfg, &id).map_err(|e| e.to_string()).and_then(|o| {
                    if let Some(dir) = out {
                        write_atomic(dir, value, &o).map_err(|e| e.to_string())?;
                    }
                    Ok(o.summary)
                });
                (value.clone(), cfg.seed, r)
            })
            .collect()
    });

    let mut per_point: BTreeMap<usize, BTreeMap<&str, Vec<f64>>> = BTreeMap::new();
    let mut failures = Vec::new();
    let index: BTreeMap<&str, usize> = spec.values.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    for (value, seed, r) in &results {
        match r {
            Ok(s) => {
                let m = per_point.entry(index[value.as_str()]).or_default();
                for (name, x) in run_metrics(s) {
                    let e = m.entry(name).or_default();
                    if let Some(x) = x {
                        e.push(x);
                    }
                }
            }
            Err(msg) => failures.push(RunFailure {
                value: value.clone(),
                seed: *seed,
                message: msg.clone(),
            }),
        }
    }
    let primary_name = primary_metric(base);
    let mut primary = Vec::new();
    let mut all = Vec::new();
    for (i, v) in spec.values.iter().enumerate() {
        let metrics = per_point.remove(&i).unwrap_or_default();
        for (name, _) in run_metrics(&RunSummary::build("", 0, &[], &[], String::new())) {
            let xs = metrics.get(name).cloned().unwrap_or_default();
            let row = AggregateRow::of(&spec.param, v, name, &xs);
            if name == primary_name {
                primary.push(row.clone());
            }
            all.push(row);
        }
    }
    if let Some(dir) = out {
        write_aggregate(&dir.join("aggregate.csv"), &primary)?;
        write_aggregate(&dir.join("aggregate_all.csv"), &all)?;
        let mut text = String::new();
        for f in &failures {
            let _ = writeln!(text, "{}={} seed {}: {}", spec.param, f.value, f.seed, f.message);
        }
        std::fs::write(dir.join("failures.txt"), text)?;
    }
    Ok(SweepResult { primary, all, failures })
}

fn fmt_f(x: f64) -> String {
    if x.is_finite() {
        x.to_string()
    } else {
        String::new()
    }
}

pub fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(AGGREGATE_HEADER)?;
    for r in rows {
        w.write_record([
            r.sweep_param.clone(),
            r.value.clone(),
            r.metric.clone(),
            fmt_f(r.mean),
            fmt_f(r.variance),
            fmt_f(r.p95),
            r.n_seeds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_aggregate(path: &Path) -> Result<Vec<AggregateRow>, SweepError> {
    let bad = |msg: String| SweepError::Format {
        path: path.to_path_buf(),
        msg,
    };
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().collect::<Vec<_>>() != AGGREGATE_HEADER {
        return Err(bad("unexpected header".into()));
    }
    let num = |s: &str| -> Result<f64, SweepError> {
        if s.is_empty() {
            Ok(f64::NAN)
        } else {
            s.parse().map_err(|_| bad(format!("bad number `{s}`")))
        }
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(AggregateRow {
            sweep_param: rec[0].to_string(),
            value: rec[1].to_string(),
            metric: rec[2].to_string(),
            mean: num(&rec[3])?,
            variance: num(&rec[4])?,
            p95: num(&rec[5])?,
            n_seeds: rec[6].parse().map_err(|_| bad(format!("bad seed count `{}`", &rec[6])))?,
        });
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Winner {
    A,
    B,
    Tie,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub value: String,
    pub mean_a: f64,
    pub mean_b: f64,
    pub winner: Winner,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub param: String,
    pub metric: String,
    pub label_a: String,
    pub label_b: String,
    pub points: Vec<Comparison>,
    /// Pairs of adjacent sweep values between which the winner flips.
    pub crossovers: Vec<(String, String)>,
}

/// Winner per point: the lower mean, or a tie when the means differ by no
/// more than one pooled standard error. A point with no samples on one side
/// goes to the other.
pub fn compare(a: &[AggregateRow], b: &[AggregateRow], label_a: &str, label_b: &str) -> Result<Report, SweepError> {
    let axis = |rows: &[AggregateRow]| -> Vec<(String, String, String)> {
        rows.iter().map(|r| (r.sweep_param.clone(), r.value.clone(), r.metric.clone())).collect()
    };
    if a.is_empty() || axis(a) != axis(b) {
        return Err(SweepError::Mismatch(format!(
            "sweep axes differ: {:?} vs {:?}",
            axis(a).iter().map(|(p, v, _)| format!("{p}={v}")).collect::<Vec<_>>(),
            axis(b).iter().map(|(p, v, _)| format!("{p}={v}")).collect::<Vec<_>>()
        )));
    }
    let mut points = Vec::new();
    for (ra, rb) in a.iter().zip(b) {
        let winner = match (ra.mean.is_finite(), rb.mean.is_finite()) {
            (false, false) => Winner::Tie,
            (true, false) => Winner::A,
            (false, true) => Winner::B,
            (true, true) => {
                let (na, nb) = (ra.n_seeds as f64, rb.n_seeds as f64);
                let se = if na + nb > 2.0 {
                    let sp2 = ((na - 1.0) * ra.variance + (nb - 1.0) * rb.variance) / (na + nb - 2.0);
                    (sp2 * (1.0 / na + 1.0 / nb)).sqrt()
                } else {
                    0.0
                };
                let diff = ra.mean - rb.mean;
                if diff.abs() <= se {
                    Winner::Tie
                } else if diff < 0.0 {
                    Winner::A
                } else {
                    Winner::B
                }
            }
        };
        points.push(Comparison {
            value: ra.value.clone(),
            mean_a: ra.mean,
            mean_b: rb.mean,
            winner,
        });
    }
    let decided: Vec<&Comparison> = points.iter().filter(|p| p.winner != Winner::Tie).collect();
    let crossovers = decided
        .windows(2)
        .filter(|w| w[0].winner != w[1].winner)
        .map(|w| (w[0].value.clone(), w[1].value.clone()))
        .collect();
    Ok(Report {
        param: a[0].sweep_param.clone(),
        metric: a[0].metric.clone(),
        label_a: label_a.to_string(),
        label_b: label_b.to_string(),
        points,
        crossovers,
    })
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "sweep {} / metric {} (lower is better)", self.param, self.metric);
        let _ = writeln!(s, "{:>12}  {:>14}  {:>14}  winner", "value", self.label_a, self.label_b);
        for p in &self.points {
            let w = match p.winner {
                Winner::A => self.label_a.as_str(),
                Winner::B => self.label_b.as_str(),
                Winner::Tie => "tie",
            };
            let _ = writeln!(s, "{:>12}  {:>14.4}  {:>14.4}  {w}", p.value, p.mean_a, p.mean_b);
        }
        if self.crossovers.is_empty() {
            let _ = writeln!(s, "no crossover");
        }
        for (x, y) in &self.crossovers {
            let _ = writeln!(s, "crossover between {x} and {y}");
        }
        s
    }
}

/// Compares two sweep directories; each side is labelled by its technology.
pub fn compare_dirs(a: &Path, b: &Path) -> Result<Report, SweepError> {
    let label = |dir: &Path| -> String {
        ScenarioConfig::load(&dir.join("scenario.cfg"))
            .map(|c| c.technology.as_str().to_string())
            .unwrap_or_else(|_| dir.display().to_string())
    };
    let (la, mut lb) = (label(a), label(b));
    if la == lb {
        lb = format!("{lb}(b)");
    }
    compare(
        &read_aggregate(&a.join("aggregate.csv"))?,
        &read_aggregate(&b.join("aggregate.csv"))?,
        &la,
        &lb,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &str, mean: f64, var: f64) -> AggregateRow {
        AggregateRow {
            sweep_param: "ground.n_nodes".into(),
            value: v.into(),
            metric: "delay_ms".into(),
            mean,
            variance: var,
            p95: mean,
            n_seeds: 10,
        }
    }

    #[test]
    fn identical_inputs_tie_everywhere() {
        let a = vec![row("0", 1.0, 0.1), row("4", 2.0, 0.1), row("8", 3.0, 0.0)];
        let r = compare(&a, &a, "wifi", "lte").unwrap();
        assert!(r.points.iter().all(|p| p.winner == Winner::Tie));
        assert!(r.crossovers.is_empty());
    }

    #[test]
    fn crossover_detected() {
        let a = vec![row("10", 100.0, 1.0), row("20", 150.0, 1.0), row("40", 900.0, 1.0)];
        let b = vec![row("10", 140.0, 1.0), row("20", 150.2, 1.0), row("40", 200.0, 1.0)];
        let r = compare(&a, &b, "wifi", "lte").unwrap();
        let w: Vec<Winner> = r.points.iter().map(|p| p.winner).collect();
        assert_eq!(w, vec![Winner::A, Winner::Tie, Winner::B]);
        assert_eq!(r.crossovers, vec![("10".to_string(), "40".to_string())]);
    }

    #[test]
    fn missing_side_loses() {
        let a = vec![row("45", f64::NAN, f64::NAN)];
        let b = vec![row("45", 50.0, 1.0)];
        assert_eq!(compare(&a, &b, "wifi", "lte").unwrap().points[0].winner, Winner::B);
    }

    #[test]
    fn mismatched_axes_error() {
        let a = vec![row("0", 1.0, 0.0)];
        let b = vec![row("2", 1.0, 0.0)];
        assert!(matches!(compare(&a, &b, "a", "b"), Err(SweepError::Mismatch(_))));
    }

    #[test]
    fn aggregate_stats_over_seeds() {
        let r = AggregateRow::of("p", "v", "m", &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(r.mean, 2.5);
        assert!((r.variance - 5.0 / 3.0).abs() < 1e-12);
        assert!((r.p95 - 3.85).abs() < 1e-12);
        assert_eq!(r.n_seeds, 4);
    }

    #[test]
    fn expand_is_values_times_seeds() {
        let spec = SweepSpec {
            param: "ground.n_nodes".into(),
            values: ["0", "2", "4", "6", "8"].map(String::from).to_vec(),
            seeds: 10,
        };
        let jobs = expand(&ScenarioConfig::default(), &spec).unwrap();
        assert_eq!(jobs.len(), 50);
        assert_eq!(jobs[13].1.ground_n_nodes, 2);
        assert_eq!(jobs[13].1.seed, 4);
    }

    #[test]
    fn expand_rejects_bad_value() {
        let spec = SweepSpec {
            param: "ground.n_nodes".into(),
            values: vec!["-3".into()],
            seeds: 1,
        };
        assert!(expand(&ScenarioConfig::default(), &spec).is_err());
    }
}
