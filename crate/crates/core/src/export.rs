//! GraphML and DOT export of weighted directed bank networks.
//!
//! An edge `i -> j` with weight `m_ij` is written for every strictly positive
//! off-diagonal entry, in row-major order. For exposure matrices the arrow
//! points from the claim holder to the borrower.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    Graphml,
    Dot,
}

impl GraphFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            GraphFormat::Graphml => "graphml",
            GraphFormat::Dot => "dot",
        }
    }
}

impl FromStr for GraphFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "graphml" => Ok(GraphFormat::Graphml),
            "dot" => Ok(GraphFormat::Dot),
            other => Err(format!("unknown graph format `{other}`")),
        }
    }
}

/// Per-node attributes carried into the export.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeInfo {
    pub id: String,
    pub country: String,
    pub equity: f64,
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn edges(matrix: &DMatrix<f64>) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
    let n = matrix.nrows();
    (0..n).flat_map(move |i| {
        (0..n).filter_map(move |j| {
            let w = matrix[(i, j)];
            (i != j && w > 0.0).then_some((i, j, w))
        })
    })
}

/// Renders the graph as text. Fails if node and matrix sizes differ.
pub fn render_graph(
    matrix: &DMatrix<f64>,
    nodes: &[NodeInfo],
    format: GraphFormat,
) -> io::Result<String> {
    if matrix.nrows() != nodes.len() || matrix.ncols() != nodes.len() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!(
                "{}x{} matrix for {} nodes",
                matrix.nrows(),
                matrix.ncols(),
                nodes.len()
            ),
        ));
    }
    let mut out = String::new();
    match format {
        GraphFormat::Graphml => {
            out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
            out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
            out.push_str(
                "  <key id=\"country\" for=\"node\" attr.name=\"country\" attr.type=\"string\"/>\n",
            );
            out.push_str(
                "  <key id=\"equity\" for=\"node\" attr.name=\"equity\" attr.type=\"double\"/>\n",
            );
            out.push_str(
                "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n",
            );
            out.push_str("  <graph id=\"G\" edgedefault=\"directed\">\n");
            for (k, node) in nodes.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "    <node id=\"n{k}\"><data key=\"country\">{}</data><data key=\"equity\">{}</data><desc>{}</desc></node>",
                    xml_escape(&node.country),
                    node.equity,
                    xml_escape(&node.id)
                );
            }
            for (e, (i, j, w)) in edges(matrix).enumerate() {
                let _ = writeln!(
                    out,
                    "    <edge id=\"e{e}\" source=\"n{i}\" target=\"n{j}\"><data key=\"weight\">{w}</data></edge>"
                );
            }
            out.push_str("  </graph>\n</graphml>\n");
        }
        GraphFormat::Dot => {
            out.push_str("digraph interbank {\n");
            for node in nodes {
                let _ = writeln!(
                    out,
                    "  \"{}\" [country=\"{}\", equity={}];",
                    dot_escape(&node.id),
                    dot_escape(&node.country),
                    node.equity
                );
            }
            for (i, j, w) in edges(matrix) {
                let _ = writeln!(
                    out,
                    "  \"{}\" -> \"{}\" [weight={w}];",
                    dot_escape(&nodes[i].id),
                    dot_escape(&nodes[j].id)
                );
            }
            out.push_str("}\n");
        }
    }
    Ok(out)
}

/// Writes the graph to `path`.
pub fn export_graph(
    path: &Path,
    matrix: &DMatrix<f64>,
    nodes: &[NodeInfo],
    format: GraphFormat,
) -> io::Result<()> {
    fs::write(path, render_graph(matrix, nodes, format)?)
}
