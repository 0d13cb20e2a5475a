//! Summarises a sparse and a dense reconstruction of the synthetic roster and
//! fits a core-periphery split to each.
//!
//! ```text
//! cargo run --example network_statistics
//! ```

use std::error::Error;
use std::path::Path;

use contagion::ingest::{derive_marginals, read_banks, AssetClassCatalog};
use contagion::reconstruct::{reconstruct, ReconstructOptions};
use contagion::{core_periphery_fit, network_statistics, Method, NetworkStats};

pub fn run() -> Result<Vec<NetworkStats>, Box<dyn Error>> {
    let roster = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/roster48_synthetic.csv");
    let records = read_banks(&roster, &AssetClassCatalog::eba())?;
    let m = derive_marginals(&records);

    println!("{:<6} {}", "method", NetworkStats::COLUMNS.join(" | "));
    let mut rows = Vec::new();
    for method in [Method::Anan, Method::Maxe] {
        let x = reconstruct(method, &m, &ReconstructOptions::default())?;
        let stats = network_statistics(&x, 0.0)?;
        println!("{method:<6} {}", stats.csv_fields().join(" | "));

        let (core, error) = core_periphery_fit(&x, 0.0);
        let names: Vec<&str> = core.iter().map(|&i| records[i].bank_id.as_str()).collect();
        println!(
            "       core of {} banks, error {error}: {}",
            core.len(),
            names.join(" ")
        );
        rows.push(stats);
    }
    Ok(rows)
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
