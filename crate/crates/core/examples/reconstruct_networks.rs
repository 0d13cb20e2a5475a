//! Rebuilds one interbank network three ways from the same per-bank totals.
//!
//! ```text
//! cargo run --example reconstruct_networks
//! ```

use std::error::Error;

use contagion::reconstruct::{reconstruct, validate_marginals, ReconstructOptions};
use contagion::{Marginals, Method};

pub fn run() -> Result<Vec<(Method, usize)>, Box<dyn Error>> {
    let lent = vec![12.0, 7.0, 3.0, 9.0, 4.0, 5.0];
    let borrowed = vec![6.0, 10.0, 8.0, 2.0, 9.0, 5.0];
    let m = Marginals::new(lent, borrowed)?;
    let opts = ReconstructOptions::default();

    let mut counts = Vec::new();
    for method in Method::ALL {
        let x = reconstruct(method, &m, &opts)?;
        let check = validate_marginals(&x, &m, 1e-6);
        println!(
            "{method}: {} links, max marginal residual {:.1e}",
            x.links(0.0),
            check.max_residual
        );
        for row in x.matrix().row_iter() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:6.2}")).collect();
            println!("    {}", cells.join(" "));
        }
        counts.push((method, x.links(0.0)));
    }
    Ok(counts)
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
