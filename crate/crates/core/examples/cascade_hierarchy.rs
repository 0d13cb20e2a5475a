//! Shocks a four-bank ring and prints the failure levels for a few
//! bankruptcy-cost fractions.
//!
//! ```text
//! cargo run --example cascade_hierarchy
//! ```

use std::error::Error;

use contagion::model::{capital_ratios, equity_values, interdependency};
use contagion::{run_cascade, FailureParams, FractionMatrix, PortfolioMatrix, ShockScenario};
use nalgebra::{DMatrix, DVector};

pub fn run() -> Result<Vec<Vec<Vec<usize>>>, Box<dyn Error>> {
    // each bank holds a quarter of its neighbour
    let mut c = DMatrix::zeros(4, 4);
    for i in 0..4 {
        c[(i, (i + 1) % 4)] = 0.25;
    }
    let c = FractionMatrix::new(c)?;
    let chat = capital_ratios(&c, &[0.3; 4])?;
    let a = interdependency(&c, &chat)?;

    // bank 0 is heavy in the first class, the others are diversified
    let holdings = DMatrix::from_row_slice(4, 2, &[90.0, 10.0, 50.0, 50.0, 45.0, 55.0, 40.0, 60.0]);
    let port = PortfolioMatrix::new(holdings, DVector::from_element(2, 1.0))?;
    let v0: Vec<f64> = equity_values(&a, &port, &[0.0; 4])?
        .iter()
        .copied()
        .collect();
    let shock = ShockScenario::new("first class down 5%", vec![0.95, 1.0])?;

    let mut all = Vec::new();
    for beta in [0.0, 0.5, 1.0] {
        let params = FailureParams::new(0.97, beta, v0.clone())?;
        let result = run_cascade(&a, &port, &shock, &params)?;
        let levels = result.hierarchy();
        println!(
            "beta {beta:.1}: {} rounds, levels {levels:?}",
            result.terminated_at()
        );
        all.push(levels);
    }
    Ok(all)
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
