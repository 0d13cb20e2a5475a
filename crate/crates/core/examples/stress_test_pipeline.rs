//! Runs the full stress test on the bundled synthetic roster and adverse
//! scenario, writing the reports to a directory given on the command line
//! (a temporary one otherwise).
//!
//! ```text
//! cargo run --example stress_test_pipeline -- /tmp/stress
//! ```

use std::error::Error;
use std::path::{Path, PathBuf};

use contagion::pipeline::{run_pipeline, RunConfig, StressReport};

pub fn run(out: &Path) -> Result<StressReport, Box<dyn Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let mut config = RunConfig::new(data.join("roster48_synthetic.csv"), out);
    config.scenario_path = Some(data.join("adverse_synthetic.csv"));
    config.hala_ensemble = 3;

    let report = run_pipeline(&config)?;
    for c in &report.cascades {
        let seed = c.seed.map_or(String::new(), |s| format!(" seed {s}"));
        println!(
            "{}{seed} theta {} beta {}: {} failed in {} levels",
            c.method,
            c.theta,
            c.beta,
            c.final_failures.len(),
            c.hierarchy.len()
        );
    }
    for e in &report.ensembles {
        println!(
            "hala ensemble theta {} beta {}: {} distinct failure sets over {} runs",
            e.theta,
            e.beta,
            e.failure_sets.len(),
            e.runs
        );
    }
    println!("reports written to {}", out.display());
    Ok(report)
}

fn main() -> Result<(), Box<dyn Error>> {
    match std::env::args_os().nth(1) {
        Some(dir) => run(&PathBuf::from(dir)).map(|_| ()),
        None => {
            let dir = std::env::temp_dir().join("contagion-example");
            run(&dir).map(|_| ())
        }
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn example_runs() {
        let dir = tempfile::tempdir().unwrap();
        let report = super::run(dir.path()).unwrap();
        assert_eq!(report.cascades.len(), 20);
        assert!(dir.path().join("report.json").exists());
    }
}
