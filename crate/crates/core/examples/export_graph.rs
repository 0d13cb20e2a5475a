//! Writes a small exposure network as GraphML and DOT.
//!
//! ```text
//! cargo run --example export_graph
//! ```

use std::error::Error;

use contagion::export::{render_graph, GraphFormat, NodeInfo};
use contagion::reconstruct::reconstruct_anan;
use contagion::Marginals;

pub fn run() -> Result<(String, String), Box<dyn Error>> {
    let m = Marginals::new(vec![5.0, 3.0, 2.0, 4.0], vec![4.0, 4.0, 3.0, 3.0])?;
    let x = reconstruct_anan(&m)?;
    let nodes: Vec<NodeInfo> = ["DE001", "FR002", "IT003", "ES004"]
        .iter()
        .zip([12.5, 8.0, 6.1, 9.3])
        .map(|(id, equity)| NodeInfo {
            id: id.to_string(),
            country: id[..2].to_string(),
            equity,
        })
        .collect();

    let graphml = render_graph(x.matrix(), &nodes, GraphFormat::Graphml)?;
    let dot = render_graph(x.matrix(), &nodes, GraphFormat::Dot)?;
    println!("{dot}");
    println!("GraphML: {} lines", graphml.lines().count());
    Ok((graphml, dot))
}

fn main() -> Result<(), Box<dyn Error>> {
    run().map(|_| ())
}
