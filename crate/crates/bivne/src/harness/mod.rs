//! Experiment driver: seeded batch runs, metric accumulation, export.
//!
//! A run is described by one [`ExperimentConfig`]: where the substrate
//! comes from, how requests are drawn, which embedder handles them, and the
//! sweep shape (batch sizes × trials). Each (trial, batch size) point gets
//! a fresh substrate and replays the request stream from the start, so
//! growing the x-axis extends a curve instead of reshuffling it.
//!
//! Randomness fans out from the single config seed through independent
//! counter-derived streams — one for the substrate draw, one for requests,
//! one for the embedder — per trial. Adding trials or batch sizes never
//! perturbs earlier points.
//!
//! Money is accumulated as exact rationals and rounded to ten significant
//! digits only at report assembly, so the exported profit equals the
//! ledger recomputation from the stored solutions digit for digit. Every
//! acceptance is re-checked by the constraint validator before it touches
//! the substrate; a single violation aborts the run loudly.

pub mod validate;

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num::Zero;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acs_upper::{bivne_embed, AcsParams, EmbeddingSolution};
use crate::baselines::{greedy_sp_ff, lrc_sp_ff, pl_ksp_ff, BaselineConfig};
use crate::fragcost::{
    link_cost, money_to_f64, node_cost, revenue, FragConfig, Money, PriceTable,
};
use crate::substrate::{load_topology, RandomTopologyParams, SubstrateNetwork, TopologyError};
use crate::vnr::{generate_requests, VirtualRequest, VnrProfile};
use validate::{SolutionDump, Violation};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("request {vnr_id} violates {}", join_violations(.violations))]
    Validation {
        vnr_id: u64,
        violations: Vec<Violation>,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl HarnessError {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Validation { .. } => 2,
            HarnessError::Io { .. } => 3,
        }
    }
}

impl From<TopologyError> for HarnessError {
    fn from(e: TopologyError) -> Self {
        match e {
            TopologyError::Io { path, source } => HarnessError::Io { path, source },
            other => HarnessError::Config(format!("topology: {other}")),
        }
    }
}

/// The embedders the harness can drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Bivne,
    GreedySpFf,
    LrcSpFf,
    PlKspFf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Bivne,
        Algorithm::GreedySpFf,
        Algorithm::LrcSpFf,
        Algorithm::PlKspFf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bivne => "bivne",
            Algorithm::GreedySpFf => "greedy_sp_ff",
            Algorithm::LrcSpFf => "lrc_sp_ff",
            Algorithm::PlKspFf => "pl_ksp_ff",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown algorithm {s:?}; expected one of {}",
                    Algorithm::ALL.map(|a| a.name()).join(", ")
                )
            })
    }
}

/// Where the substrate comes from: a stored topology document or a random
/// draw. In config files this is either `{"file": "..."}` or
/// `{"random": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TopologySource {
    File { file: PathBuf },
    Random { random: RandomTopologyParams },
}

/// Per-trial capacity ranges imposed on a stored topology, replacing the
/// nominal capacities in the document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstrateCaps {
    pub comp: (u32, u32),
    pub chan: (u32, u32),
    pub slots: (u32, u32),
}

impl SubstrateCaps {
    fn validate(&self) -> Result<(), String> {
        for (name, (lo, hi)) in [("comp", self.comp), ("chan", self.chan), ("slots", self.slots)] {
            if lo == 0 || lo > hi {
                return Err(format!(
                    "substrate_caps.{name} range ({lo}, {hi}) must satisfy 1 <= lo <= hi"
                ));
            }
        }
        Ok(())
    }
}

/// One full experiment: sweep `vnr_counts` × `trials` with `algorithm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: TopologySource,
    /// Capacity redraw for file topologies; ignored for random ones.
    #[serde(default)]
    pub substrate_caps: Option<SubstrateCaps>,
    pub vnr_profile: VnrProfile,
    pub algorithm: Algorithm,
    #[serde(default)]
    pub prices: PriceTable,
    #[serde(default)]
    pub frag: FragConfig,
    #[serde(default)]
    pub acs: AcsParams,
    #[serde(default)]
    pub baseline: BaselineConfig,
    pub seed: u64,
    /// Batch sizes swept, strictly increasing.
    pub vnr_counts: Vec<usize>,
    /// Trials per batch size.
    pub trials: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let err = |msg: String| Err(HarnessError::Config(msg));
        if self.trials == 0 {
            return err("trials must be at least 1".into());
        }
        if self.vnr_counts.windows(2).any(|w| w[0] >= w[1]) {
            return err(format!(
                "vnr_counts {:?} must be strictly increasing",
                self.vnr_counts
            ));
        }
        if let TopologySource::Random { random } = &self.topology {
            random.validate().map_err(|e| HarnessError::Config(format!("topology: {e}")))?;
        }
        if let Some(caps) = &self.substrate_caps {
            caps.validate().map_err(HarnessError::Config)?;
        }
        self.vnr_profile
            .validate()
            .map_err(|e| HarnessError::Config(format!("vnr_profile: {e}")))?;
        self.acs
            .validate()
            .map_err(|e| HarnessError::Config(format!("acs: {e}")))?;
        self.frag
            .validate()
            .map_err(|e| HarnessError::Config(format!("frag: {e}")))?;
        self.baseline
            .validate()
            .map_err(|e| HarnessError::Config(format!("baseline: {e}")))?;
        Ok(())
    }

    /// Short substrate label used in file names and csv rows.
    pub fn topology_name(&self) -> String {
        match &self.topology {
            TopologySource::File { file } => file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "topology".into()),
            TopologySource::Random { random } => format!("rand{}", random.nodes),
        }
    }
}

/// Reads a config document, resolving a relative topology path against the
/// config file's own directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    if let TopologySource::File { file } = &mut config.topology {
        if file.is_relative() {
            if let Some(dir) = path.parent() {
                *file = dir.join(&*file);
            }
        }
    }
    config.validate()?;
    Ok(config)
}

/// The per-trial generator for one purpose. Streams 0, 1 and 2 of each
/// trial drive the substrate draw, the request draw and the embedder; the
/// fourth stream per trial is reserved.
pub fn trial_rng(seed: u64, trial: usize, stream: u64) -> ChaCha8Rng {
    debug_assert!(stream < 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 * 4 + stream);
    rng
}

/// Builds the substrate exactly as trial `trial` sees it.
pub fn build_substrate(
    config: &ExperimentConfig,
    trial: usize,
) -> Result<SubstrateNetwork, HarnessError> {
    let mut rng = trial_rng(config.seed, trial, 0);
    match &config.topology {
        TopologySource::File { file } => {
            let mut net = load_topology(file)?;
            if let Some(caps) = &config.substrate_caps {
                net.redraw_capacities(caps.comp, caps.chan, caps.slots, &mut rng);
            }
            Ok(net)
        }
        TopologySource::Random { random } => Ok(SubstrateNetwork::generate_random(random, &mut rng)?),
    }
}

/// One sweep point of the report. Floats carry ten significant digits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub trial: usize,
    pub vnr_count: usize,
    pub accepted: usize,
    pub acceptance_ratio: f64,
    /// Mean physical hops per embedded vlink; absent when nothing embedded.
    pub avg_path_hops: Option<f64>,
    pub revenue: f64,
    pub cost: f64,
    /// Revenue over cost; absent when the cost is zero.
    pub r_over_c: Option<f64>,
    pub profit: f64,
}

/// A full sweep: config echo plus one row per (trial, batch size).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub topology: String,
    pub rows: Vec<ReportRow>,
}

/// Everything one sweep point produced, for audits and replays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub vnr_count: usize,
    pub requests: Vec<VirtualRequest>,
    pub solutions: Vec<EmbeddingSolution>,
}

/// Rounds to ten significant digits — the export precision — so stored
/// numbers and their csv form denote the same value.
fn sig10(x: f64) -> f64 {
    format!("{x:.9e}").parse().expect("formatted float parses")
}

fn run_point(
    config: &ExperimentConfig,
    trial: usize,
    vnr_count: usize,
) -> Result<(ReportRow, TrialRecord), HarnessError> {
    let mut net = build_substrate(config, trial)?;
    let mut vrng = trial_rng(config.seed, trial, 1);
    let requests = generate_requests(&config.vnr_profile, vnr_count, &mut vrng)
        .map_err(|e| HarnessError::Config(format!("vnr_profile: {e}")))?;
    let mut arng = trial_rng(config.seed, trial, 2);

    let mut accepted = 0usize;
    let mut embedded_vlinks = 0usize;
    let mut embedded_hops = 0usize;
    let mut total_revenue = Money::zero();
    let mut total_cost = Money::zero();
    let mut solutions = Vec::with_capacity(requests.len());

    for vnr in &requests {
        let sol = match config.algorithm {
            Algorithm::Bivne => bivne_embed(
                &net,
                vnr,
                &config.acs,
                &config.prices,
                &config.frag,
                &mut arng,
            ),
            Algorithm::GreedySpFf => greedy_sp_ff(&net, vnr, &config.prices, &config.frag),
            Algorithm::LrcSpFf => lrc_sp_ff(&net, vnr, &config.prices, &config.frag),
            Algorithm::PlKspFf => {
                pl_ksp_ff(&net, vnr, &config.prices, &config.frag, &config.baseline)
            }
        };
        if sol.accepted {
            let dump = SolutionDump::from_solution(vnr, &sol);
            let violations = validate::validate(&net, vnr, &dump);
            if !violations.is_empty() {
                return Err(HarnessError::Validation {
                    vnr_id: vnr.id,
                    violations,
                });
            }
            // Costs are taken against the pre-commit state, then committed.
            let r = revenue(vnr, &config.prices);
            let cn = node_cost(&sol.placements, &net, vnr, &config.prices)
                .expect("validated placements satisfy the cost preconditions");
            let ce = link_cost(&net, &sol.routes, &config.prices, &config.frag)
                .expect("validated routes satisfy the cost preconditions");
            net.allocate(vnr, &sol)
                .expect("validated embedding commits cleanly");
            accepted += 1;
            embedded_vlinks += sol.routes.len();
            embedded_hops += sol.routes.iter().map(|r| r.path.hops()).sum::<usize>();
            total_revenue += r;
            total_cost += cn + ce;
        }
        solutions.push(sol);
    }

    let acceptance_ratio = if vnr_count == 0 {
        1.0
    } else {
        accepted as f64 / vnr_count as f64
    };
    let profit = &total_revenue - &total_cost;
    let row = ReportRow {
        trial,
        vnr_count,
        accepted,
        acceptance_ratio: sig10(acceptance_ratio),
        avg_path_hops: (embedded_vlinks > 0)
            .then(|| sig10(embedded_hops as f64 / embedded_vlinks as f64)),
        revenue: sig10(money_to_f64(&total_revenue)),
        cost: sig10(money_to_f64(&total_cost)),
        r_over_c: (!total_cost.is_zero())
            .then(|| sig10(money_to_f64(&(&total_revenue / &total_cost)))),
        profit: sig10(money_to_f64(&profit)),
    };
    let record = TrialRecord {
        trial,
        vnr_count,
        requests,
        solutions,
    };
    Ok((row, record))
}

/// Runs the sweep and also returns every request and solution produced, so
/// callers can audit the books or replay allocations.
pub fn run_experiment_with_records(
    config: &ExperimentConfig,
) -> Result<(ExperimentReport, Vec<TrialRecord>), HarnessError> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.trials * config.vnr_counts.len());
    let mut records = Vec::with_capacity(rows.capacity());
    for trial in 0..config.trials {
        for &vnr_count in &config.vnr_counts {
            let (row, record) = run_point(config, trial, vnr_count)?;
            rows.push(row);
            records.push(record);
        }
    }
    Ok((
        ExperimentReport {
            config: config.clone(),
            topology: config.topology_name(),
            rows,
        },
        records,
    ))
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    run_experiment_with_records(config).map(|(report, _)| report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(format!("unknown format {other:?}; expected csv or json")),
        }
    }
}

fn fmt_float(x: f64) -> String {
    format!("{x:.9e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn to_csv(report: &ExperimentReport) -> String {
    let mut out = String::from(
        "algorithm,topology,seed,trial,vnr_count,accepted,acceptance_ratio,avg_path_hops,revenue,cost,r_over_c,profit\n",
    );
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            report.config.algorithm,
            report.topology,
            report.config.seed,
            row.trial,
            row.vnr_count,
            row.accepted,
            fmt_float(row.acceptance_ratio),
            fmt_opt(row.avg_path_hops),
            fmt_float(row.revenue),
            fmt_float(row.cost),
            fmt_opt(row.r_over_c),
            fmt_float(row.profit),
        ));
    }
    out
}

pub fn to_json(report: &ExperimentReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// Writes the report into `out_dir` under a deterministic name and returns
/// the path.
pub fn export(
    report: &ExperimentReport,
    format: ExportFormat,
    out_dir: &Path,
) -> Result<PathBuf, HarnessError> {
    let name = format!(
        "{}_{}_seed{}.{}",
        report.config.algorithm,
        report.topology,
        report.config.seed,
        format.extension()
    );
    let path = out_dir.join(name);
    let body = match format {
        ExportFormat::Csv => to_csv(report),
        ExportFormat::Json => to_json(report),
    };
    std::fs::write(&path, body).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Plot-ready series: for each metric one csv with a `vnr_count` column and
/// one mean-over-trials column per algorithm, in first-appearance order.
/// Returns (file name, csv body) pairs.
pub fn plotdata(reports: &[ExperimentReport]) -> Vec<(String, String)> {
    let metrics: [(&str, fn(&ReportRow) -> Option<f64>); 4] = [
        ("acceptance_ratio", |r| Some(r.acceptance_ratio)),
        ("avg_path_hops", |r| r.avg_path_hops),
        ("r_over_c", |r| r.r_over_c),
        ("profit", |r| Some(r.profit)),
    ];
    let mut algorithms: Vec<Algorithm> = Vec::new();
    for rep in reports {
        if !algorithms.contains(&rep.config.algorithm) {
            algorithms.push(rep.config.algorithm);
        }
    }
    let counts: BTreeSet<usize> = reports
        .iter()
        .flat_map(|r| r.rows.iter().map(|row| row.vnr_count))
        .collect();

    metrics
        .iter()
        .map(|&(name, pick)| {
            let mut body = String::from("vnr_count");
            for a in &algorithms {
                body.push(',');
                body.push_str(a.name());
            }
            body.push('\n');
            for &count in &counts {
                body.push_str(&count.to_string());
                for &alg in &algorithms {
                    let values: Vec<f64> = reports
                        .iter()
                        .filter(|r| r.config.algorithm == alg)
                        .flat_map(|r| &r.rows)
                        .filter(|row| row.vnr_count == count)
                        .filter_map(pick)
                        .collect();
                    body.push(',');
                    if !values.is_empty() {
                        let mean = values.iter().sum::<f64>() / values.len() as f64;
                        body.push_str(&fmt_float(mean));
                    }
                }
                body.push('\n');
            }
            (format!("{name}.csv"), body)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragcost::{profit, VnrOutcome};

    fn tiny_config(algorithm: Algorithm) -> ExperimentConfig {
        ExperimentConfig {
            topology: TopologySource::Random {
                random: RandomTopologyParams {
                    nodes: 6,
                    links: 8,
                    comp_cap: (20, 40),
                    chan_cap: (20, 40),
                    slots: (10, 16),
                    side: 100.0,
                },
            },
            substrate_caps: None,
            vnr_profile: VnrProfile {
                vnodes: (2, 3),
                link_prob: 0.7,
                comp_demand: (1, 4),
                chan_demand: (1, 4),
                slot_demand: (1, 3),
                radius: (60.0, 120.0),
                side: 100.0,
            },
            algorithm,
            prices: PriceTable::default(),
            frag: FragConfig::default(),
            acs: AcsParams {
                colony_size: 4,
                max_generations: 6,
                ..AcsParams::default()
            },
            baseline: BaselineConfig::default(),
            seed: 11,
            vnr_counts: vec![3, 6],
            trials: 2,
        }
    }

    #[test]
    fn same_config_gives_identical_reports_and_csv() {
        for alg in Algorithm::ALL {
            let config = tiny_config(alg);
            let a = run_experiment(&config).unwrap();
            let b = run_experiment(&config).unwrap();
            assert_eq!(a, b);
            assert_eq!(to_csv(&a), to_csv(&b));
            assert_eq!(a.rows.len(), 4, "2 counts × 2 trials");
        }
    }

    #[test]
    fn growing_the_sweep_extends_rather_than_reshuffles() {
        let config = tiny_config(Algorithm::GreedySpFf);
        let (_, records) = run_experiment_with_records(&config).unwrap();
        // Rows come out (trial 0, count 3), (trial 0, count 6), ...
        let small = &records[0];
        let large = &records[1];
        assert_eq!(small.requests[..], large.requests[..3]);
        assert_eq!(small.solutions[..], large.solutions[..3]);
    }

    #[test]
    fn empty_batch_conventions() {
        let mut config = tiny_config(Algorithm::LrcSpFf);
        config.vnr_counts = vec![0];
        config.trials = 1;
        let report = run_experiment(&config).unwrap();
        let row = &report.rows[0];
        assert_eq!(row.acceptance_ratio, 1.0);
        assert_eq!(row.avg_path_hops, None);
        assert_eq!((row.revenue, row.cost, row.profit), (0.0, 0.0, 0.0));
        assert_eq!(row.r_over_c, None);
        let csv = to_csv(&report);
        let line = csv.lines().nth(1).unwrap();
        assert!(line.contains(",,"), "absent metrics export as empty cells");
    }

    #[test]
    fn empty_sweep_exports_header_only() {
        let mut config = tiny_config(Algorithm::GreedySpFf);
        config.vnr_counts = vec![];
        let report = run_experiment(&config).unwrap();
        assert_eq!(to_csv(&report).lines().count(), 1);
    }

    #[test]
    fn exported_profit_matches_ledger_recomputation() {
        let config = tiny_config(Algorithm::Bivne);
        let (report, records) = run_experiment_with_records(&config).unwrap();
        for (row, record) in report.rows.iter().zip(&records) {
            // Replay the trial's substrate and recompute each accepted
            // request's books against the state it was committed into.
            let mut net = build_substrate(&config, record.trial).unwrap();
            let mut outcomes = Vec::new();
            for (vnr, sol) in record.requests.iter().zip(&record.solutions) {
                if sol.accepted {
                    outcomes.push(VnrOutcome {
                        accepted: true,
                        revenue: revenue(vnr, &config.prices),
                        node_cost: node_cost(&sol.placements, &net, vnr, &config.prices).unwrap(),
                        link_cost: link_cost(&net, &sol.routes, &config.prices, &config.frag)
                            .unwrap(),
                    });
                    net.allocate(vnr, sol).unwrap();
                } else {
                    outcomes.push(VnrOutcome {
                        accepted: false,
                        revenue: Money::zero(),
                        node_cost: Money::zero(),
                        link_cost: Money::zero(),
                    });
                }
            }
            let exact = profit(&outcomes);
            assert_eq!(row.profit, sig10(money_to_f64(&exact)));
            assert_eq!(
                fmt_float(row.profit),
                fmt_float(money_to_f64(&exact)),
                "csv digits match the exact ledger"
            );
        }
    }

    #[test]
    fn config_validation_names_the_offending_field() {
        let mut config = tiny_config(Algorithm::Bivne);
        config.vnr_counts = vec![5, 5];
        let err = run_experiment(&config).unwrap_err();
        assert!(err.to_string().contains("vnr_counts"), "{err}");

        let mut config = tiny_config(Algorithm::Bivne);
        config.trials = 0;
        assert!(run_experiment(&config).unwrap_err().to_string().contains("trials"));

        let mut config = tiny_config(Algorithm::Bivne);
        config.vnr_profile.link_prob = 7.0;
        let err = run_experiment(&config).unwrap_err();
        assert!(err.to_string().contains("vnr_profile"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn json_round_trip_preserves_the_report() {
        let config = tiny_config(Algorithm::PlKspFf);
        let report = run_experiment(&config).unwrap();
        let back: ExperimentReport = serde_json::from_str(&to_json(&report)).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn export_writes_deterministically_named_files() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(Algorithm::GreedySpFf);
        let report = run_experiment(&config).unwrap();
        let csv_path = export(&report, ExportFormat::Csv, dir.path()).unwrap();
        assert_eq!(
            csv_path.file_name().unwrap().to_str().unwrap(),
            "greedy_sp_ff_rand6_seed11.csv"
        );
        let json_path = export(&report, ExportFormat::Json, dir.path()).unwrap();
        let body = std::fs::read_to_string(json_path).unwrap();
        let back: ExperimentReport = serde_json::from_str(&body).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn plotdata_emits_one_series_per_metric() {
        let greedy = run_experiment(&tiny_config(Algorithm::GreedySpFf)).unwrap();
        let lrc = run_experiment(&tiny_config(Algorithm::LrcSpFf)).unwrap();
        let series = plotdata(&[greedy.clone(), lrc]);
        assert_eq!(series.len(), 4);
        let names: Vec<&str> = series.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(
            names,
            vec!["acceptance_ratio.csv", "avg_path_hops.csv", "r_over_c.csv", "profit.csv"]
        );
        for (_, body) in &series {
            let mut lines = body.lines();
            assert_eq!(lines.next().unwrap(), "vnr_count,greedy_sp_ff,lrc_sp_ff");
            assert_eq!(lines.count(), 2, "one row per swept batch size");
        }
        // The acceptance series reproduces the per-count means.
        let (_, accept) = &series[0];
        let row3: Vec<&str> = accept.lines().nth(1).unwrap().split(',').collect();
        let mean3: f64 = greedy
            .rows
            .iter()
            .filter(|r| r.vnr_count == 3)
            .map(|r| r.acceptance_ratio)
            .sum::<f64>()
            / 2.0;
        assert_eq!(row3[0], "3");
        assert_eq!(row3[1], fmt_float(mean3));
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("simulated_annealing".parse::<Algorithm>().is_err());
        assert_eq!(serde_json::to_string(&Algorithm::Bivne).unwrap(), "\"bivne\"");
    }
}
