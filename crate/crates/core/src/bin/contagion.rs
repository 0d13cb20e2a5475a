use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use contagion::export::GraphFormat;
use contagion::pipeline::{run_pipeline, RunConfig, ThresholdBasis};
use contagion::reconstruct::Method;

/// Reconstruct interbank networks and trace failure hierarchies under a shock.
#[derive(Debug, Parser)]
#[command(name = "contagion", version)]
struct Args {
    /// Bank roster CSV
    #[arg(long)]
    banks: PathBuf,
    /// Price-shock scenario CSV; omit for an unshocked run
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Reconstruction methods
    #[arg(long, value_delimiter = ',', default_value = "anan,hala,maxe")]
    methods: Vec<Method>,
    /// Failure threshold fractions
    #[arg(long, value_delimiter = ',', default_value = "0.971,0.973")]
    theta: Vec<f64>,
    /// Failure cost coefficients
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.8")]
    beta: Vec<f64>,
    /// Seed of the random iterative fill
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of random-fill networks (seeds seed, seed+1, ...)
    #[arg(long, default_value_t = 1)]
    ensemble: usize,
    #[arg(long, default_value = "reported")]
    threshold_basis: ThresholdBasis,
    /// Exposures at or below this amount are not counted as links
    #[arg(long, default_value_t = 0.0)]
    link_threshold: f64,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write exposure and interdependency graphs
    #[arg(long)]
    export: Option<GraphFormat>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CONTAGION_LOG", "warn")).init();
    let args = Args::parse();
    let config = RunConfig {
        banks_path: args.banks,
        scenario_path: args.scenario,
        methods: args.methods,
        hala_seed: args.seed,
        hala_ensemble: args.ensemble,
        theta_grid: args.theta,
        beta_grid: args.beta,
        threshold_basis: args.threshold_basis,
        link_threshold: args.link_threshold,
        output_dir: args.out,
        export: args.export,
    };
    match run_pipeline(&config) {
        Ok(report) => {
            log::info!(
                "wrote {} networks and {} cascades to {}",
                report.networks.len(),
                report.cascades.len(),
                config.output_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
