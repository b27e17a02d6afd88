//! Seeded replicate experiments on the synthetic scenarios.

use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tsbm_core::{
    ari, restart_seed, scenario1, scenario2, select_best, FitConfig, FitResult, Init, Priors,
    Sample, Strategy,
};

use crate::error::{Error, Result};
use crate::fitting::{fit_all, fit_static_all, StrategyChoice};

pub const RESULTS_HEADER: &str = "seed,params,strategy,icl,ari_c,ari_y,K,D,wall_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum, Serialize)]
pub enum Suite {
    /// Scenario 1 over a contrast grid: time-cluster recovery.
    #[value(name = "scenario1-time")]
    #[serde(rename = "scenario1-time")]
    Scenario1Time,
    /// Scenario 1 over a community-strength grid: node recovery against the
    /// static baseline.
    #[value(name = "scenario1-nodes")]
    #[serde(rename = "scenario1-nodes")]
    Scenario1Nodes,
    /// Scenario 2: temporal fit against the static baseline.
    #[value(name = "scenario2")]
    #[serde(rename = "scenario2")]
    Scenario2,
    /// Scenario 1 fitted with each strategy and with best-of-three.
    #[value(name = "strategies")]
    #[serde(rename = "strategies")]
    Strategies,
    /// Wall time against graph size.
    #[value(name = "scaling")]
    #[serde(rename = "scaling")]
    Scaling,
}

/// Grid and search settings. Empty grids and unset sizes take the suite's
/// defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchParams {
    pub replicates: usize,
    pub restarts: usize,
    pub psi: Vec<f64>,
    pub gamma: Vec<f64>,
    pub sizes: Vec<usize>,
    pub n_nodes: Option<usize>,
    pub n_intervals: Option<usize>,
    pub strategy: StrategyChoice,
    pub init: Init,
    pub k_max: Option<usize>,
    pub d_max: Option<usize>,
    pub priors: Priors,
    pub seed: u64,
    /// Record wall times (always on for the scaling suite).
    pub timing: bool,
    /// Scenario 2 with i.i.d. time labels instead of an exact half split.
    pub free_y: bool,
}

impl Default for BenchParams {
    fn default() -> Self {
        BenchParams {
            replicates: 50,
            restarts: 10,
            psi: Vec::new(),
            gamma: Vec::new(),
            sizes: Vec::new(),
            n_nodes: None,
            n_intervals: None,
            strategy: StrategyChoice::One(Strategy::A),
            init: Init::Hierarchical,
            k_max: None,
            d_max: None,
            priors: Priors::default(),
            seed: 0,
            timing: false,
            free_y: false,
        }
    }
}

/// One results row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub seed: u64,
    pub params: String,
    pub strategy: String,
    pub icl: f64,
    pub ari_c: f64,
    pub ari_y: f64,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub wall_ms: Option<f64>,
}

/// Aggregate over the replicates of one (params, strategy) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub params: String,
    pub strategy: String,
    pub replicates: usize,
    pub mean_icl: f64,
    pub median_ari_c: f64,
    pub median_ari_y: f64,
    pub mean_k: f64,
    pub mean_d: f64,
    pub mean_wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutcome {
    pub suite: Suite,
    pub rows: Vec<BenchRow>,
    pub summary: Vec<CellSummary>,
    /// Every fit's trace increased strictly at each committed move.
    pub traces_monotone: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scenario {
    One { psi: f64, gamma: f64 },
    Two { balanced: bool },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell {
    scenario: Scenario,
    n: usize,
    u: usize,
}

impl Cell {
    fn params(&self, restarts: usize) -> String {
        match self.scenario {
            Scenario::One { psi, gamma } => format!(
                "scenario=1;psi={psi};gamma={gamma};N={};U={};restarts={restarts}",
                self.n, self.u
            ),
            Scenario::Two { balanced } => format!(
                "scenario=2;balanced={};N={};U={};restarts={restarts}",
                u8::from(balanced),
                self.n,
                self.u
            ),
        }
    }

    fn sample(&self, seed: u64) -> Result<Sample> {
        Ok(match self.scenario {
            Scenario::One { psi, gamma } => scenario1(psi, gamma, self.n, self.u, seed)?,
            Scenario::Two { balanced } => scenario2(self.n, self.u, seed, balanced)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Method {
    Temporal(StrategyChoice),
    Static(StrategyChoice),
    BestOfPrevious,
}

fn grid(values: &[f64], default: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        default.to_vec()
    } else {
        values.to_vec()
    }
}

fn cells(suite: Suite, p: &BenchParams) -> Vec<Cell> {
    let n = p.n_nodes.unwrap_or(50);
    let one = |psis: Vec<f64>, gammas: Vec<f64>, n: usize, u: usize| -> Vec<Cell> {
        let mut out = Vec::new();
        for &psi in &psis {
            for &gamma in &gammas {
                out.push(Cell {
                    scenario: Scenario::One { psi, gamma },
                    n,
                    u,
                });
            }
        }
        out
    };
    let gamma_grid: Vec<f64> = (0..=8).map(|i| 1.0 + 0.05 * f64::from(i)).collect();
    match suite {
        Suite::Scenario1Time => one(
            grid(&p.psi, &[2.0]),
            grid(&p.gamma, &gamma_grid),
            n,
            p.n_intervals.unwrap_or(50),
        ),
        Suite::Scenario1Nodes => one(
            grid(&p.psi, &[2.15, 2.35, 2.55]),
            grid(&p.gamma, &[1.0]),
            n,
            p.n_intervals.unwrap_or(50),
        ),
        Suite::Strategies => one(
            grid(&p.psi, &[2.15]),
            grid(&p.gamma, &[1.0]),
            n,
            p.n_intervals.unwrap_or(50),
        ),
        Suite::Scenario2 => vec![Cell {
            scenario: Scenario::Two {
                balanced: !p.free_y,
            },
            n,
            u: p.n_intervals.unwrap_or(100),
        }],
        Suite::Scaling => {
            let sizes = if p.sizes.is_empty() {
                vec![50, 100]
            } else {
                p.sizes.clone()
            };
            sizes
                .into_iter()
                .flat_map(|s| one(grid(&p.psi, &[2.15]), grid(&p.gamma, &[1.0]), s, s))
                .collect()
        }
    }
}

fn methods(suite: Suite, p: &BenchParams) -> Vec<Method> {
    match suite {
        Suite::Scenario1Time | Suite::Scaling => vec![Method::Temporal(p.strategy)],
        Suite::Scenario1Nodes | Suite::Scenario2 => {
            vec![Method::Temporal(p.strategy), Method::Static(p.strategy)]
        }
        Suite::Strategies => {
            let mut m: Vec<Method> = Strategy::ALL
                .iter()
                .map(|&s| Method::Temporal(StrategyChoice::One(s)))
                .collect();
            m.push(Method::BestOfPrevious);
            m
        }
    }
}

fn method_name(m: Method) -> String {
    match m {
        Method::Temporal(c) => c.name().to_owned(),
        Method::Static(c) => format!("static-{}", c.name()),
        Method::BestOfPrevious => "best".to_owned(),
    }
}

/// Seed of replicate `r` in cell `cell`: drives both the sampled graph and
/// the fit.
pub fn replicate_seed(seed: u64, cell: usize, r: usize) -> u64 {
    restart_seed(restart_seed(seed, cell), r)
}

fn search_config(sample: &Sample, p: &BenchParams, seed: u64) -> FitConfig {
    let base = FitConfig::for_tensor(&sample.tensor);
    FitConfig {
        init: p.init,
        k_max: p.k_max.unwrap_or(base.k_max).min(sample.tensor.n_nodes()),
        d_max: p
            .d_max
            .unwrap_or(base.d_max)
            .min(sample.tensor.n_intervals()),
        restarts: p.restarts,
        seed,
        priors: p.priors,
        ..base
    }
}

fn row(
    seed: u64,
    params: &str,
    name: String,
    sample: &Sample,
    fit: &FitResult,
    wall: Option<f64>,
) -> Result<BenchRow> {
    Ok(BenchRow {
        seed,
        params: params.to_owned(),
        strategy: name,
        icl: fit.icl.value,
        ari_c: ari(&sample.node_labels, fit.partition.node_labels())?,
        ari_y: ari(&sample.interval_labels, fit.partition.interval_labels())?,
        k: fit.partition.k(),
        d: fit.partition.d(),
        wall_ms: wall,
    })
}

fn run_replicate(
    cell: &Cell,
    methods: &[Method],
    p: &BenchParams,
    seed: u64,
    timing: bool,
) -> Result<(Vec<BenchRow>, bool)> {
    let sample = cell.sample(seed)?;
    let config = search_config(&sample, p, seed);
    let params = cell.params(p.restarts);
    let mut rows = Vec::with_capacity(methods.len());
    let mut fits: Vec<FitResult> = Vec::new();
    let mut monotone = true;
    for &m in methods {
        let start = Instant::now();
        let fit = match m {
            Method::Temporal(c) | Method::Static(c) => {
                let report = if matches!(m, Method::Temporal(_)) {
                    fit_all(&sample.tensor, &config, c)?
                } else {
                    fit_static_all(&sample.tensor, &config, c)?
                };
                monotone &= report.traces_monotone;
                report.best
            }
            Method::BestOfPrevious => {
                select_best(fits.iter().cloned()).expect("strategies ran first")
            }
        };
        let wall = timing.then(|| start.elapsed().as_secs_f64() * 1e3);
        rows.push(row(seed, &params, method_name(m), &sample, &fit, wall)?);
        fits.push(fit);
    }
    Ok((rows, monotone))
}

/// Runs every replicate of every cell; rows come out in (cell, replicate,
/// method) order regardless of how the work was scheduled.
pub fn run_suite(suite: Suite, p: &BenchParams) -> Result<BenchOutcome> {
    if p.replicates == 0 || p.restarts == 0 {
        return Err(Error::Usage(
            "replicates and restarts must be at least 1".into(),
        ));
    }
    let timing = p.timing || suite == Suite::Scaling;
    let cells = cells(suite, p);
    let methods = methods(suite, p);
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..p.replicates).map(move |r| (c, r)))
        .collect();
    let results = tasks
        .par_iter()
        .map(|&(c, r)| run_replicate(&cells[c], &methods, p, replicate_seed(p.seed, c, r), timing))
        .collect::<Result<Vec<_>>>()?;
    let traces_monotone = results.iter().all(|(_, ok)| *ok);
    let rows: Vec<BenchRow> = results.into_iter().flat_map(|(rows, _)| rows).collect();
    let summary = summarize(&rows);
    Ok(BenchOutcome {
        suite,
        rows,
        summary,
        traces_monotone,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

/// Per-(params, strategy) aggregates in first-appearance order.
pub fn summarize(rows: &[BenchRow]) -> Vec<CellSummary> {
    let mut keys: Vec<(&str, &str)> = Vec::new();
    for r in rows {
        let key = (r.params.as_str(), r.strategy.as_str());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(params, strategy)| {
            let group: Vec<&BenchRow> = rows
                .iter()
                .filter(|r| r.params == params && r.strategy == strategy)
                .collect();
            let walls: Vec<f64> = group.iter().filter_map(|r| r.wall_ms).collect();
            CellSummary {
                params: params.to_owned(),
                strategy: strategy.to_owned(),
                replicates: group.len(),
                mean_icl: mean(group.iter().map(|r| r.icl)),
                median_ari_c: median(group.iter().map(|r| r.ari_c).collect()),
                median_ari_y: median(group.iter().map(|r| r.ari_y).collect()),
                mean_k: mean(group.iter().map(|r| r.k as f64)),
                mean_d: mean(group.iter().map(|r| r.d as f64)),
                mean_wall_ms: (walls.len() == group.len()).then(|| mean(walls.into_iter())),
            }
        })
        .collect()
}

/// Mean final ICL per strategy, laid out like the usual strategy comparison
/// table.
pub fn strategy_table(summary: &[CellSummary]) -> String {
    let rows: Vec<(String, String)> = summary
        .iter()
        .map(|s| {
            let label = match s.strategy.as_str() {
                "best" => "best of 3".to_owned(),
                other => format!("strategy {other}"),
            };
            (label, format!("{:.2}", s.mean_icl))
        })
        .collect();
    let lw = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(10);
    let vw = rows.iter().map(|r| r.1.len()).max().unwrap_or(0).max(8);
    let mut out = format!(
        "| {:lw$} | {:>vw$} |\n|{}|{}|\n",
        "",
        "mean ICL",
        "-".repeat(lw + 2),
        "-".repeat(vw + 2)
    );
    for (label, value) in rows {
        let _ = writeln!(out, "| {label:lw$} | {value:>vw$} |");
    }
    out
}

/// Wall-time growth between the smallest and largest graph, next to the
/// growth of the `(N + U) U N^2` worst-case cost of one sweep.
pub fn scaling_report(summary: &[CellSummary]) -> String {
    let size = |params: &str| -> Option<(f64, f64)> {
        let field = |key: &str| {
            params
                .split(';')
                .find_map(|kv| kv.strip_prefix(key))
                .and_then(|v| v.parse::<f64>().ok())
        };
        Some((field("N=")?, field("U=")?))
    };
    let mut points: Vec<(f64, f64, f64)> = summary
        .iter()
        .filter_map(|s| {
            let (n, u) = size(&s.params)?;
            Some((n, u, s.mean_wall_ms?))
        })
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = String::new();
    for &(n, u, ms) in &points {
        let _ = writeln!(out, "N={n} U={u}: mean wall time {ms:.1} ms");
    }
    if let (Some(lo), Some(hi)) = (points.first(), points.last()) {
        if hi.0 > lo.0 {
            let bound = |(n, u): (f64, f64)| (n + u) * u * n * n;
            let _ = writeln!(
                out,
                "wall-time ratio {:.2} vs worst-case bound ratio {:.2}",
                hi.2 / lo.2,
                bound((hi.0, hi.1)) / bound((lo.0, lo.1))
            );
        }
    }
    out
}

/// Human-readable summary printed after a run.
pub fn report(outcome: &BenchOutcome) -> String {
    let mut out = String::new();
    for s in &outcome.summary {
        let _ = writeln!(
            out,
            "{} [{}] n={} mean ICL {:.2}, median ARI(c) {:.3}, median ARI(y) {:.3}, mean K {:.2}, mean D {:.2}",
            s.params, s.strategy, s.replicates, s.mean_icl, s.median_ari_c, s.median_ari_y, s.mean_k, s.mean_d
        );
    }
    match outcome.suite {
        Suite::Strategies => out.push_str(&strategy_table(&outcome.summary)),
        Suite::Scaling => out.push_str(&scaling_report(&outcome.summary)),
        _ => {}
    }
    out
}

fn csv_err(e: csv::Error) -> Error {
    Error::Usage(format!("CSV output: {e}"))
}

/// Appends `rows` to the results file, writing the header only when the
/// file is new or empty. An existing file must start with the same header.
pub fn append_rows(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let existing = match fs::read_to_string(path) {
        Ok(text) => Some(text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(Error::io(path, e)),
    };
    let fresh = existing.as_deref().is_none_or(str::is_empty);
    if let Some(text) = existing.as_deref().filter(|t| !t.is_empty()) {
        if text.lines().next() != Some(RESULTS_HEADER) {
            return Err(Error::Usage(format!(
                "{} exists but does not start with `{RESULTS_HEADER}`",
                path.display()
            )));
        }
    }
    let mut buf = csv::WriterBuilder::new()
        .has_headers(fresh)
        .from_writer(Vec::new());
    for r in rows {
        buf.serialize(r).map_err(csv_err)?;
    }
    let mut bytes = buf.into_inner().map_err(|e| Error::Usage(e.to_string()))?;
    if let Some(text) = existing.as_deref() {
        if !text.is_empty() && !text.ends_with('\n') {
            bytes.insert(0, b'\n');
        }
    }
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))
}

/// `results.csv` -> `results.<suffix>`.
pub fn sibling_path(results: &Path, suffix: &str) -> PathBuf {
    let stem = results
        .file_stem()
        .map_or_else(|| "bench".into(), |s| s.to_string_lossy().into_owned());
    results.with_file_name(format!("{stem}.{suffix}"))
}

pub fn write_summary(path: &Path, summary: &[CellSummary]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    for s in summary {
        w.serialize(s).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Usage(e.to_string()))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
