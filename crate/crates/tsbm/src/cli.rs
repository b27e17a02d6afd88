//! Command-line interface.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tsbm_core::{
    ari, confusion, sample_planted, scenario1, scenario1_model, scenario2, scenario2_model,
    ContingencyTable, FitConfig, Init, PlantedModel, Priors, Sample, Strategy,
};

use crate::bench::{self, BenchParams, Suite};
use crate::error::{Error, Result};
use crate::fitting::{fit_all, with_jobs, RestartSummary, StrategyChoice};
use crate::io::{self, InputFormat, InputSpec, PartitionFile, TruthFile};
use crate::manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(
    name = "tsbm",
    version,
    about = "Cluster nodes and time intervals of dynamic networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a partition to an interaction file.
    Fit(FitArgs),
    /// Sample synthetic graphs with known labels.
    Simulate(SimulateArgs),
    /// Compare predicted labels with reference labels.
    Eval(EvalArgs),
    /// Run a seeded benchmark suite.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum StrategyArg {
    #[value(name = "A")]
    A,
    #[value(name = "B")]
    B,
    #[value(name = "C")]
    C,
    #[value(name = "best")]
    #[serde(rename = "best")]
    Best,
}

impl From<StrategyArg> for StrategyChoice {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::A => StrategyChoice::One(Strategy::A),
            StrategyArg::B => StrategyChoice::One(Strategy::B),
            StrategyArg::C => StrategyChoice::One(Strategy::C),
            StrategyArg::Best => StrategyChoice::Best,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitArg {
    Singletons,
    Random,
    Hier,
}

impl From<InitArg> for Init {
    fn from(i: InitArg) -> Self {
        match i {
            InitArg::Singletons => Init::Singletons,
            InitArg::Random => Init::Random,
            InitArg::Hier => Init::Hierarchical,
        }
    }
}

/// Search settings shared by `fit` and `bench`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SearchArgs {
    #[arg(long, value_enum, default_value = "A")]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value = "hier")]
    pub init: InitArg,
    /// Initial number of node clusters [default: ceil(N/2)].
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Initial number of time clusters [default: ceil(U/2)].
    #[arg(long)]
    pub dmax: Option<usize>,
    /// Dirichlet concentration for node clusters.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Dirichlet concentration for time clusters.
    #[arg(long = "gamma-prior", default_value_t = 1.0)]
    pub gamma_prior: f64,
    /// Gamma prior shape on the rates.
    #[arg(long = "a", default_value_t = 1.0)]
    pub a: f64,
    /// Gamma prior rate on the rates.
    #[arg(long = "b", default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub jobs: usize,
}

impl SearchArgs {
    pub fn priors(&self) -> Result<Priors> {
        Ok(Priors::new(self.a, self.b, self.alpha, self.gamma_prior)?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// Input CSV file.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "aggregated")]
    pub format: InputFormat,
    /// Interval width for stream input, in the units of `t`.
    #[arg(long)]
    pub delta: Option<f64>,
    /// End of the observation window for stream input.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Number of nodes [default: largest id + 1].
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Number of intervals for aggregated input [default: largest id + 1].
    #[arg(long)]
    pub intervals: Option<usize>,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Custom,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,
    /// Community strength grid for scenario 1.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub psi: Vec<f64>,
    /// Temporal contrast grid for scenario 1.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub gamma: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub nodes: usize,
    /// Number of intervals [default: 50, or 100 for scenario 2].
    #[arg(long)]
    pub intervals: Option<usize>,
    /// Scenario 2: draw time labels i.i.d. instead of an exact half split.
    #[arg(long)]
    pub free_y: bool,
    /// Custom scenario: JSON with `node_weights`, `time_weights` and `rates`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Graphs per grid point.
    #[arg(long, default_value_t = 1)]
    pub n_graphs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    /// Predicted labels (partition JSON).
    pub pred: PathBuf,
    /// Reference labels (partition or truth JSON).
    pub truth: PathBuf,
    /// Also write the report as JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 50)]
    pub replicates: usize,
    /// Community strength grid (scenario 1 suites).
    #[arg(long, value_delimiter = ',')]
    pub psi: Vec<f64>,
    /// Temporal contrast grid (scenario 1 suites).
    #[arg(long, value_delimiter = ',')]
    pub gamma: Vec<f64>,
    /// Graph sizes N = U for the scaling suite.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub intervals: Option<usize>,
    /// Scenario 2: draw time labels i.i.d. instead of an exact half split.
    #[arg(long)]
    pub free_y: bool,
    /// Fill the wall_ms column (always on for the scaling suite).
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Results CSV; rows are appended.
    #[arg(long, default_value = "bench.csv")]
    pub out: PathBuf,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Debug, Serialize)]
struct FitSummary {
    icl: f64,
    block_term: f64,
    label_term: f64,
    strategy: &'static str,
    restart: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "D")]
    d: usize,
    initial_icl: f64,
    moves: usize,
    restarts: Vec<RestartSummary>,
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let mut manifest = RunManifest::new("fit", args, args.search.seed)?;
    let spec = InputSpec {
        format: args.format,
        n_nodes: args.nodes,
        n_intervals: args.intervals,
        delta: args.delta,
        horizon: args.horizon,
    };
    let (tensor, digest) = manifest.time("read", || io::load_tensor(&args.input, &spec))?;
    manifest.input(&args.input, digest);
    let s = &args.search;
    let base = FitConfig::for_tensor(&tensor);
    let config = FitConfig {
        init: s.init.into(),
        k_max: s.kmax.unwrap_or(base.k_max),
        d_max: s.dmax.unwrap_or(base.d_max),
        restarts: s.restarts,
        seed: s.seed,
        priors: s.priors()?,
        ..base
    };
    let report = manifest.time("fit", || {
        with_jobs(s.jobs, || fit_all(&tensor, &config, s.strategy.into()))
    })??;
    create_dir(&args.out)?;
    let best = &report.best;
    let partition_path = args.out.join("partition.json");
    io::write_json(&partition_path, &PartitionFile::from(&best.partition))?;
    let fit_path = args.out.join("fit.json");
    io::write_json(
        &fit_path,
        &FitSummary {
            icl: best.icl.value,
            block_term: best.icl.block_term,
            label_term: best.icl.label_term,
            strategy: best.strategy.name(),
            restart: best.restart_index,
            k: best.partition.k(),
            d: best.partition.d(),
            initial_icl: best.initial_icl,
            moves: best.trace.len(),
            restarts: report.restarts.clone(),
        },
    )?;
    let times_path = args.out.join("time_clusters.csv");
    io::write_time_clusters(&times_path, &best.partition)?;
    for p in [&partition_path, &fit_path, &times_path] {
        manifest.output(p);
    }
    manifest.write(&args.out.join("manifest.json"))?;
    println!(
        "ICL {:.4} with K = {}, D = {} (strategy {}, restart {})",
        best.icl.value,
        best.partition.k(),
        best.partition.d(),
        best.strategy.name(),
        best.restart_index
    );
    Ok(())
}

#[derive(Debug, serde::Deserialize)]
struct CustomModel {
    node_weights: Vec<f64>,
    time_weights: Vec<f64>,
    rates: Vec<f64>,
}

/// A scenario with concrete parameters.
struct GridPoint {
    tag: String,
    scenario: String,
    params: BTreeMap<String, f64>,
    model: PlantedModel,
}

fn grid_points(args: &SimulateArgs) -> Result<Vec<GridPoint>> {
    let n = args.nodes;
    let mut points = Vec::new();
    match args.scenario {
        ScenarioArg::One => {
            let u = args.intervals.unwrap_or(50);
            for &psi in &args.psi {
                for &gamma in &args.gamma {
                    points.push(GridPoint {
                        tag: format!("s1_psi{psi}_gamma{gamma}"),
                        scenario: "1".into(),
                        params: BTreeMap::from([("psi".into(), psi), ("gamma".into(), gamma)]),
                        model: scenario1_model(psi, gamma, n, u)?,
                    });
                }
            }
        }
        ScenarioArg::Two => {
            let u = args.intervals.unwrap_or(100);
            points.push(GridPoint {
                tag: "s2".into(),
                scenario: "2".into(),
                params: BTreeMap::from([("balanced".into(), if args.free_y { 0.0 } else { 1.0 })]),
                model: scenario2_model(n, u)?,
            });
        }
        ScenarioArg::Custom => {
            let path = args
                .model
                .as_ref()
                .ok_or_else(|| Error::Usage("--scenario custom needs --model".into()))?;
            let m: CustomModel = serde_json::from_slice(&io::read_bytes(path)?)?;
            let model = PlantedModel {
                n_nodes: n,
                n_intervals: args.intervals.unwrap_or(50),
                node_weights: m.node_weights,
                time_weights: m.time_weights,
                rates: m.rates,
            };
            model.validate()?;
            points.push(GridPoint {
                tag: "custom".into(),
                scenario: "custom".into(),
                params: BTreeMap::new(),
                model,
            });
        }
    }
    Ok(points)
}

fn draw(args: &SimulateArgs, point: &GridPoint, seed: u64) -> Result<Sample> {
    let m = &point.model;
    Ok(match args.scenario {
        ScenarioArg::One => scenario1(
            point.params["psi"],
            point.params["gamma"],
            m.n_nodes,
            m.n_intervals,
            seed,
        )?,
        ScenarioArg::Two => scenario2(m.n_nodes, m.n_intervals, seed, !args.free_y)?,
        ScenarioArg::Custom => sample_planted(m, seed)?,
    })
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let mut manifest = RunManifest::new("simulate", args, args.seed)?;
    let points = grid_points(args)?;
    create_dir(&args.out)?;
    let mut outputs = Vec::new();
    manifest.time("simulate", || -> Result<()> {
        for (c, point) in points.iter().enumerate() {
            for g in 0..args.n_graphs {
                let seed = bench::replicate_seed(args.seed, c, g);
                let sample = draw(args, point, seed)?;
                let graph = args.out.join(format!("{}_{g:03}.csv", point.tag));
                io::write_tensor_file(&graph, &sample.tensor)?;
                let truth = args.out.join(format!("{}_{g:03}.truth.json", point.tag));
                let m = &point.model;
                io::write_json(
                    &truth,
                    &TruthFile {
                        k: m.k(),
                        d: m.d(),
                        node_labels: sample.node_labels,
                        interval_labels: sample.interval_labels,
                        scenario: point.scenario.clone(),
                        seed,
                        params: point.params.clone(),
                        node_weights: m.node_weights.clone(),
                        time_weights: m.time_weights.clone(),
                        rates: m.rates.clone(),
                    },
                )?;
                outputs.push(graph);
                outputs.push(truth);
            }
        }
        Ok(())
    })?;
    for p in &outputs {
        manifest.output(p);
    }
    manifest.write(&args.out.join("manifest.json"))?;
    println!(
        "wrote {} graphs to {}",
        points.len() * args.n_graphs,
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct EvalReport {
    ari_c: f64,
    ari_y: f64,
    nodes: TableJson,
    intervals: TableJson,
}

#[derive(Debug, Serialize)]
struct TableJson {
    pred_labels: Vec<usize>,
    truth_labels: Vec<usize>,
    counts: Vec<Vec<u64>>,
}

impl From<&ContingencyTable> for TableJson {
    fn from(t: &ContingencyTable) -> Self {
        TableJson {
            pred_labels: t.row_labels.clone(),
            truth_labels: t.col_labels.clone(),
            counts: t
                .counts
                .chunks(t.cols().max(1))
                .map(<[u64]>::to_vec)
                .collect(),
        }
    }
}

fn render(title: &str, t: &ContingencyTable) -> String {
    let mut out = format!("{title} (rows: predicted, columns: reference)\n      ");
    for c in &t.col_labels {
        out.push_str(&format!("{c:>6}"));
    }
    out.push('\n');
    for (r, label) in t.row_labels.iter().enumerate() {
        out.push_str(&format!("{label:>6}"));
        for c in 0..t.cols() {
            out.push_str(&format!("{:>6}", t.get(r, c)));
        }
        out.push('\n');
    }
    out
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let pred = io::read_labels(&args.pred)?;
    let truth = io::read_labels(&args.truth)?;
    let nodes = confusion(&pred.node_labels, &truth.node_labels)?;
    let intervals = confusion(&pred.interval_labels, &truth.interval_labels)?;
    let report = EvalReport {
        ari_c: ari(&pred.node_labels, &truth.node_labels)?,
        ari_y: ari(&pred.interval_labels, &truth.interval_labels)?,
        nodes: (&nodes).into(),
        intervals: (&intervals).into(),
    };
    println!("ari_c {}", report.ari_c);
    println!("ari_y {}", report.ari_y);
    print!("{}", render("nodes", &nodes));
    print!("{}", render("intervals", &intervals));
    if let Some(out) = &args.out {
        io::write_json(out, &report)?;
    }
    Ok(())
}

pub fn bench_params(args: &BenchArgs) -> Result<BenchParams> {
    let s = &args.search;
    Ok(BenchParams {
        replicates: args.replicates,
        restarts: s.restarts,
        psi: args.psi.clone(),
        gamma: args.gamma.clone(),
        sizes: args.sizes.clone(),
        n_nodes: args.nodes,
        n_intervals: args.intervals,
        strategy: s.strategy.into(),
        init: s.init.into(),
        k_max: s.kmax,
        d_max: s.dmax,
        priors: s.priors()?,
        seed: s.seed,
        timing: args.timing,
        free_y: args.free_y,
    })
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let params = bench_params(args)?;
    let mut manifest = RunManifest::new("bench", args, args.search.seed)?;
    let outcome = manifest.time("bench", || {
        with_jobs(args.search.jobs, || bench::run_suite(args.suite, &params))
    })??;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    bench::append_rows(&args.out, &outcome.rows)?;
    let summary = bench::sibling_path(&args.out, "summary.csv");
    bench::write_summary(&summary, &outcome.summary)?;
    manifest.output(&args.out);
    manifest.output(&summary);
    manifest.write(&bench::sibling_path(&args.out, "manifest.json"))?;
    print!("{}", bench::report(&outcome));
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "tsbm",
            "fit",
            "x.csv",
            "--format",
            "stream",
            "--delta",
            "900",
            "--horizon",
            "86400",
            "--strategy",
            "best",
            "--init",
            "random",
            "--kmax",
            "4",
            "--dmax",
            "3",
            "--alpha",
            "0.5",
            "--gamma-prior",
            "0.5",
            "--a",
            "2",
            "--b",
            "0.5",
            "--seed",
            "7",
            "--jobs",
            "2",
            "--restarts",
            "3",
            "--out",
            "o",
        ])
        .unwrap();
        let Command::Fit(f) = cli.command else {
            panic!("expected fit")
        };
        assert_eq!(f.format, InputFormat::Stream);
        assert_eq!(f.search.strategy, StrategyArg::Best);
        assert_eq!(
            f.search.priors().unwrap(),
            Priors::new(2.0, 0.5, 0.5, 0.5).unwrap()
        );
        assert_eq!(
            (f.search.kmax, f.search.dmax, f.search.jobs),
            (Some(4), Some(3), 2)
        );
    }

    #[test]
    fn bench_suites_parse() {
        for suite in [
            "scenario1-time",
            "scenario1-nodes",
            "scenario2",
            "strategies",
            "scaling",
        ] {
            assert!(
                Cli::try_parse_from(["tsbm", "bench", suite]).is_ok(),
                "{suite}"
            );
        }
        assert!(Cli::try_parse_from(["tsbm", "bench", "nope"]).is_err());
    }
}
