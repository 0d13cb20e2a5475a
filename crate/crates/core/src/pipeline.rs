//! End-to-end stress test: ingest, reconstruct, calibrate, run the
//! `(method, θ, β)` grid and write reports.
//!
//! Output files in the run directory:
//!
//! * `report.json`: the full [`StressReport`],
//! * `network_stats.csv`: one statistics row per reconstructed network,
//! * `hierarchies.csv`: one row per failure level per grid point,
//! * optionally `exposures_<net>.<ext>` and `interdependency_<net>.<ext>`.
//!
//! Runs are deterministic for a fixed configuration: grid jobs run in
//! parallel but are collected in grid order, and nothing time-dependent is
//! written.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cascade::{run_cascade, CascadeError, FailureParams, ShockScenario};
use crate::export::{export_graph, GraphFormat, NodeInfo};
use crate::ingest::{self, AssetClassCatalog, BankRecord, IngestError};
use crate::model::{
    capital_ratios, equity_values, interdependency, to_fraction_matrix, InterdependencyMatrix,
    ModelError, PortfolioMatrix,
};
use crate::netstats::{network_statistics, NetStatsError, NetworkStats};
use crate::reconstruct::{
    reconstruct, validate_marginals, ExposureMatrix, Method, ReconstructError, ReconstructOptions,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("{context}: {source}")]
    Reconstruct {
        context: String,
        #[source]
        source: ReconstructError,
    },
    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: ModelError,
    },
    #[error("{context}: {source}")]
    Cascade {
        context: String,
        #[source]
        source: CascadeError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// Process exit code: 2 validation, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Ingest(IngestError::Io { .. }) => 4,
            PipelineError::Ingest(IngestError::Csv(e)) if e.is_io_error() => 4,
            PipelineError::Ingest(_) => 2,
            PipelineError::Reconstruct { source, .. } => match source {
                ReconstructError::NotConverged { .. } => 3,
                _ => 2,
            },
            PipelineError::Model { source, .. }
            | PipelineError::Cascade {
                source: CascadeError::Model(source),
                ..
            } => match source {
                ModelError::SingularSystem(_) => 3,
                _ => 2,
            },
            PipelineError::Cascade { .. } => 2,
            PipelineError::Io { .. } => 4,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Whose equity the failure thresholds scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdBasis {
    /// Reported (restated) balance-sheet equity.
    #[default]
    Reported,
    /// Model equity `A D p` at baseline prices.
    Model,
}

impl std::str::FromStr for ThresholdBasis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reported" => Ok(ThresholdBasis::Reported),
            "model" => Ok(ThresholdBasis::Model),
            other => Err(format!("unknown threshold basis `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub banks_path: PathBuf,
    /// `None` runs without a shock (all factors one).
    pub scenario_path: Option<PathBuf>,
    pub methods: Vec<Method>,
    pub hala_seed: u64,
    pub hala_ensemble: usize,
    pub theta_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub threshold_basis: ThresholdBasis,
    pub link_threshold: f64,
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub export: Option<GraphFormat>,
}

impl RunConfig {
    pub fn new(banks_path: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            banks_path: banks_path.into(),
            scenario_path: None,
            methods: Method::ALL.to_vec(),
            hala_seed: 42,
            hala_ensemble: 1,
            theta_grid: vec![0.971, 0.973],
            beta_grid: vec![0.3, 0.8],
            threshold_basis: ThresholdBasis::Reported,
            link_threshold: 0.0,
            output_dir: output_dir.into(),
            export: None,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |msg: String| Err(PipelineError::Config(msg));
        if self.methods.is_empty() {
            return bad("no reconstruction method selected".into());
        }
        if self.theta_grid.is_empty() || self.beta_grid.is_empty() {
            return bad("theta and beta grids must be non-empty".into());
        }
        if let Some(t) = self.theta_grid.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return bad(format!("theta {t} outside (0, 1]"));
        }
        if let Some(b) = self.beta_grid.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return bad(format!("beta {b} outside [0, 1]"));
        }
        if self.hala_ensemble == 0 {
            return bad("ensemble size must be at least 1".into());
        }
        if !(self.link_threshold >= 0.0) || !self.link_threshold.is_finite() {
            return bad(format!(
                "link threshold {} must be nonnegative",
                self.link_threshold
            ));
        }
        Ok(())
    }

    fn seeds(&self, method: Method) -> Vec<Option<u64>> {
        match method {
            Method::Hala => (0..self.hala_ensemble as u64)
                .map(|k| Some(self.hala_seed.wrapping_add(k)))
                .collect(),
            _ => vec![None],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BankRef {
    pub bank_id: String,
    pub country: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub seeds: Vec<u64>,
    pub scenario_label: String,
    pub banks: usize,
    pub external_classes: usize,
}

/// Reported against model equity for one bank on one network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub bank_id: String,
    pub reported_equity: f64,
    pub model_equity: f64,
    pub discrepancy: f64,
    pub capital_ratio: f64,
    pub liability_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkReport {
    pub method: Method,
    pub seed: Option<u64>,
    pub label: String,
    /// `None` when the network has no links above the threshold.
    pub stats: Option<NetworkStats>,
    pub marginal_max_residual: f64,
    pub calibration: Vec<CalibrationRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeReport {
    pub method: Method,
    pub seed: Option<u64>,
    pub theta: f64,
    pub beta: f64,
    pub terminated_at: usize,
    /// Cumulative failed sets per round, by bank id.
    pub rounds: Vec<Vec<String>>,
    /// Newly failed banks per level, by bank id.
    pub hierarchy: Vec<Vec<String>>,
    pub final_failures: Vec<String>,
    pub equity_trace: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureSetCount {
    pub banks: Vec<String>,
    pub count: usize,
}

/// Terminal failure-set frequencies across seeds of one randomised method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub method: Method,
    pub theta: f64,
    pub beta: f64,
    pub runs: usize,
    pub failure_sets: Vec<FailureSetCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StressReport {
    pub provenance: Provenance,
    pub roster: Vec<BankRef>,
    pub networks: Vec<NetworkReport>,
    pub cascades: Vec<CascadeReport>,
    pub ensembles: Vec<EnsembleSummary>,
}

impl StressReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serialises");
        text.push('\n');
        text
    }

    /// `method,seed,links,…` with one row per network.
    pub fn stats_csv(&self) -> String {
        let mut out = String::from("method,seed,");
        out.push_str(&NetworkStats::COLUMNS.join(","));
        out.push('\n');
        for net in &self.networks {
            let stats = net.stats.clone().unwrap_or_else(NetworkStats::empty);
            out.push_str(&format!(
                "{},{},{}\n",
                net.method,
                net.seed.map(|s| s.to_string()).unwrap_or_default(),
                stats.csv_fields().join(",")
            ));
        }
        out
    }

    /// `method,seed,theta,beta,level,banks`; grid points without failures
    /// get a single row with level 0.
    pub fn hierarchy_csv(&self) -> String {
        let mut out = String::from("method,seed,theta,beta,level,banks\n");
        for c in &self.cascades {
            let seed = c.seed.map(|s| s.to_string()).unwrap_or_default();
            if c.hierarchy.is_empty() {
                out.push_str(&format!("{},{seed},{},{},0,\n", c.method, c.theta, c.beta));
            }
            for (level, banks) in c.hierarchy.iter().enumerate() {
                out.push_str(&format!(
                    "{},{seed},{},{},{},\"{}\"\n",
                    c.method,
                    c.theta,
                    c.beta,
                    level + 1,
                    banks.join("; ").replace('"', "\"\"")
                ));
            }
        }
        out
    }
}

/// Inputs shared by every network: roster, portfolio and balance-sheet ratios.
#[derive(Debug, Clone)]
pub struct CalibrationInputs {
    pub records: Vec<BankRecord>,
    pub portfolio: PortfolioMatrix,
    pub liability_ratios: Vec<f64>,
    pub total_assets: Vec<f64>,
    pub reported_equity: Vec<f64>,
}

impl CalibrationInputs {
    pub fn from_records(
        records: Vec<BankRecord>,
        catalog: &AssetClassCatalog,
    ) -> Result<Self, PipelineError> {
        let portfolio = ingest::build_portfolio(&records, catalog);
        let liability_ratios = ingest::derive_liability_ratios(&records)?;
        let total_assets = records.iter().map(|r| r.total_assets).collect();
        let reported_equity = records.iter().map(|r| r.equity).collect();
        Ok(Self {
            records,
            portfolio,
            liability_ratios,
            total_assets,
            reported_equity,
        })
    }

    pub fn bank_ids(&self) -> Vec<String> {
        self.records.iter().map(|r| r.bank_id.clone()).collect()
    }
}

/// A reconstructed network with its calibrated interdependency matrix.
#[derive(Debug, Clone)]
pub struct CalibratedNetwork {
    pub exposures: ExposureMatrix,
    pub interdependency: InterdependencyMatrix,
    pub model_equity: Vec<f64>,
    pub capital_ratios: Vec<f64>,
}

/// Cross-holding fractions from total assets, capital ratios from the
/// liability ratios, then `A` and baseline model equity.
pub fn calibrate(
    exposures: ExposureMatrix,
    inputs: &CalibrationInputs,
) -> Result<CalibratedNetwork, ModelError> {
    let c = to_fraction_matrix(&exposures, &inputs.total_assets)?;
    let chat = capital_ratios(&c, &inputs.liability_ratios)?;
    let a = interdependency(&c, &chat)?;
    let n = a.n();
    let model_equity = equity_values(&a, &inputs.portfolio, &vec![0.0; n])?
        .iter()
        .copied()
        .collect();
    Ok(CalibratedNetwork {
        exposures,
        interdependency: a,
        model_equity,
        capital_ratios: chat.diagonal().iter().copied().collect(),
    })
}

fn network_label(method: Method, seed: Option<u64>) -> String {
    match seed {
        Some(s) => format!("{method}_s{s}"),
        None => method.to_string(),
    }
}

fn baseline_equity(
    basis: ThresholdBasis,
    inputs: &CalibrationInputs,
    net: &CalibratedNetwork,
    label: &str,
) -> Result<Vec<f64>, PipelineError> {
    match basis {
        ThresholdBasis::Reported => Ok(inputs.reported_equity.clone()),
        ThresholdBasis::Model => {
            if let Some(i) = net.model_equity.iter().position(|v| !(*v > 0.0)) {
                return Err(PipelineError::Config(format!(
                    "{label}: model equity of {} is {}, cannot scale thresholds",
                    inputs.records[i].bank_id, net.model_equity[i]
                )));
            }
            Ok(net.model_equity.clone())
        }
    }
}

fn ids(indices: &[usize], names: &[String]) -> Vec<String> {
    indices.iter().map(|&i| names[i].clone()).collect()
}

/// Runs the full stress test described by `config` and writes its outputs.
pub fn run_pipeline(config: &RunConfig) -> Result<StressReport, PipelineError> {
    config.validate()?;
    let catalog = AssetClassCatalog::eba();
    let records = ingest::read_banks(&config.banks_path, &catalog)?;
    let shock = match &config.scenario_path {
        Some(path) => ingest::read_scenario(path, &catalog)?,
        None => ShockScenario::unit(catalog.external_codes().len()),
    };
    info!("{} banks, scenario `{}`", records.len(), shock.label());
    let marginals = ingest::derive_marginals(&records);
    let inputs = CalibrationInputs::from_records(records, &catalog)?;
    let names = inputs.bank_ids();

    let jobs: Vec<(Method, Option<u64>)> = config
        .methods
        .iter()
        .flat_map(|&m| config.seeds(m).into_iter().map(move |s| (m, s)))
        .collect();

    let networks: Vec<(Method, Option<u64>, CalibratedNetwork)> = jobs
        .par_iter()
        .map(|&(method, seed)| {
            let label = network_label(method, seed);
            let opts = ReconstructOptions {
                seed: seed.unwrap_or(config.hala_seed),
                ..ReconstructOptions::default()
            };
            let x = reconstruct(method, &marginals, &opts).map_err(|source| {
                PipelineError::Reconstruct {
                    context: format!("reconstruction {label}"),
                    source,
                }
            })?;
            let net = calibrate(x, &inputs).map_err(|source| PipelineError::Model {
                context: format!("calibration on {label}"),
                source,
            })?;
            Ok((method, seed, net))
        })
        .collect::<Result<_, PipelineError>>()?;

    let mut network_reports = Vec::with_capacity(networks.len());
    for (method, seed, net) in &networks {
        let label = network_label(*method, *seed);
        let stats = match network_statistics(&net.exposures, config.link_threshold) {
            Ok(s) => Some(s),
            Err(NetStatsError::EmptyNetwork) => {
                warn!("{label}: no links above threshold, statistics reported as zeros");
                None
            }
            Err(e) => {
                return Err(PipelineError::Config(format!("{label}: {e}")));
            }
        };
        let residual = validate_marginals(&net.exposures, &marginals, f64::INFINITY).max_residual;
        let calibration = (0..names.len())
            .map(|i| CalibrationRow {
                bank_id: names[i].clone(),
                reported_equity: inputs.reported_equity[i],
                model_equity: net.model_equity[i],
                discrepancy: net.model_equity[i] - inputs.reported_equity[i],
                capital_ratio: net.capital_ratios[i],
                liability_ratio: inputs.liability_ratios[i],
            })
            .collect();
        network_reports.push(NetworkReport {
            method: *method,
            seed: *seed,
            label,
            stats,
            marginal_max_residual: residual,
            calibration,
        });
    }

    let grid: Vec<(usize, f64, f64)> = (0..networks.len())
        .flat_map(|k| {
            config
                .theta_grid
                .iter()
                .flat_map(move |&theta| config.beta_grid.iter().map(move |&beta| (k, theta, beta)))
        })
        .collect();
    let cascades: Vec<CascadeReport> = grid
        .par_iter()
        .map(|&(k, theta, beta)| {
            let (method, seed, net) = &networks[k];
            let label = network_label(*method, *seed);
            let context = format!("cascade {label} theta={theta} beta={beta}");
            let v0 = baseline_equity(config.threshold_basis, &inputs, net, &label)?;
            let params =
                FailureParams::new(theta, beta, v0).map_err(|source| PipelineError::Cascade {
                    context: context.clone(),
                    source,
                })?;
            let result = run_cascade(&net.interdependency, &inputs.portfolio, &shock, &params)
                .map_err(|source| PipelineError::Cascade { context, source })?;
            Ok(CascadeReport {
                method: *method,
                seed: *seed,
                theta,
                beta,
                terminated_at: result.terminated_at(),
                rounds: result.rounds().iter().map(|r| ids(r, &names)).collect(),
                hierarchy: result.hierarchy().iter().map(|r| ids(r, &names)).collect(),
                final_failures: ids(result.final_failures(), &names),
                equity_trace: result.equity_trace().to_vec(),
            })
        })
        .collect::<Result<_, PipelineError>>()?;

    let ensembles = if config.hala_ensemble > 1 && config.methods.contains(&Method::Hala) {
        ensemble_summaries(config, &cascades)
    } else {
        Vec::new()
    };

    let seeds = jobs.iter().filter_map(|(_, s)| *s).collect();
    let report = StressReport {
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            seeds,
            scenario_label: shock.label().to_string(),
            banks: names.len(),
            external_classes: inputs.portfolio.m(),
        },
        roster: inputs
            .records
            .iter()
            .map(|r| BankRef {
                bank_id: r.bank_id.clone(),
                country: r.country.clone(),
            })
            .collect(),
        networks: network_reports,
        cascades,
        ensembles,
    };

    write_outputs(config, &report, &networks, &inputs)?;
    Ok(report)
}

fn ensemble_summaries(config: &RunConfig, cascades: &[CascadeReport]) -> Vec<EnsembleSummary> {
    let mut out = Vec::new();
    for &theta in &config.theta_grid {
        for &beta in &config.beta_grid {
            let mut counts: BTreeMap<Vec<String>, usize> = BTreeMap::new();
            let mut runs = 0;
            for c in cascades
                .iter()
                .filter(|c| c.method == Method::Hala && c.theta == theta && c.beta == beta)
            {
                *counts.entry(c.final_failures.clone()).or_default() += 1;
                runs += 1;
            }
            let mut failure_sets: Vec<FailureSetCount> = counts
                .into_iter()
                .map(|(banks, count)| FailureSetCount { banks, count })
                .collect();
            failure_sets.sort_by(|a, b| b.count.cmp(&a.count).then(a.banks.cmp(&b.banks)));
            out.push(EnsembleSummary {
                method: Method::Hala,
                theta,
                beta,
                runs,
                failure_sets,
            });
        }
    }
    out
}

fn write_outputs(
    config: &RunConfig,
    report: &StressReport,
    networks: &[(Method, Option<u64>, CalibratedNetwork)],
    inputs: &CalibrationInputs,
) -> Result<(), PipelineError> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        fs::write(&path, text).map_err(io_error(&path))
    };
    write("report.json", report.to_json())?;
    write("network_stats.csv", report.stats_csv())?;
    write("hierarchies.csv", report.hierarchy_csv())?;

    if let Some(format) = config.export {
        let nodes: Vec<NodeInfo> = inputs
            .records
            .iter()
            .map(|r| NodeInfo {
                id: r.bank_id.clone(),
                country: r.country.clone(),
                equity: r.equity,
            })
            .collect();
        for (method, seed, net) in networks {
            let label = network_label(*method, *seed);
            let matrices: [(&str, &DMatrix<f64>); 2] = [
                ("exposures", net.exposures.matrix()),
                ("interdependency", net.interdependency.matrix()),
            ];
            for (kind, matrix) in matrices {
                let path = dir.join(format!("{kind}_{label}.{}", format.extension()));
                export_graph(&path, matrix, &nodes, format).map_err(io_error(&path))?;
            }
        }
    }
    Ok(())
}
