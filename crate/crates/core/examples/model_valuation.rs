//! Values a three-bank system with cross-holdings and checks the two equity
//! routes against each other.
//!
//! ```text
//! cargo run --example model_valuation
//! ```

use std::error::Error;

use contagion::model::{
    balance_sheet_equity, capital_ratios, equity_values, interdependency, total_values,
};
use contagion::{FractionMatrix, PortfolioMatrix};
use nalgebra::{DMatrix, DVector};

pub fn run() -> Result<Vec<f64>, Box<dyn Error>> {
    // C[i][j]: share of bank j held by bank i
    let c = FractionMatrix::new(DMatrix::from_row_slice(
        3,
        3,
        &[0.0, 0.2, 0.1, 0.1, 0.0, 0.2, 0.05, 0.1, 0.0],
    ))?;
    let holdings = DMatrix::from_row_slice(3, 2, &[60.0, 20.0, 30.0, 50.0, 40.0, 10.0]);
    let port = PortfolioMatrix::new(holdings, DVector::from_vec(vec![1.0, 1.0]))?;
    let l_ext = [0.4, 0.5, 0.3];

    let v_total = total_values(&c, &port)?;
    let chat = capital_ratios(&c, &l_ext)?;
    let a = interdependency(&c, &chat)?;
    let equity = equity_values(&a, &port, &[0.0; 3])?;
    let direct = balance_sheet_equity(&c, &l_ext, &port)?;

    println!("bank  total value  capital ratio  equity (A route)  equity (balance sheet)");
    for i in 0..3 {
        println!(
            "{i:>4}  {:>11.4}  {:>13.4}  {:>16.6}  {:>22.6}",
            v_total[i],
            chat.diagonal()[i],
            equity[i],
            direct[i]
        );
    }
    let gap = (&equity - &direct).amax();
    println!("largest gap between routes: {gap:.2e}");
    assert!(gap < 1e-10);
    Ok(equity.iter().copied().collect())
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
