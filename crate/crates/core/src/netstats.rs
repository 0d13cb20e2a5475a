//! Summary statistics for an interbank exposure network.
//!
//! Link-based statistics use the binarised network (`x_ij > threshold`).
//! Assortativity and clustering are computed on its undirected version,
//! dependencies and HHI on the thresholded weights.

use serde::Serialize;
use thiserror::Error;

use crate::reconstruct::ExposureMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetStatsError {
    #[error("network has no links above the threshold")]
    EmptyNetwork,
    #[error("network needs at least two banks, got {0}")]
    TooSmall(usize),
    #[error("link threshold must be a finite nonnegative number, got {0}")]
    Threshold(f64),
}

/// One row of network statistics, in report column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkStats {
    pub links: usize,
    pub density_pct: f64,
    pub avg_degree: f64,
    pub med_degree: f64,
    /// `None` when every edge joins banks of equal degree.
    pub assortativity: Option<f64>,
    pub clustering_pct: f64,
    pub lender_dependency_pct: f64,
    pub borrower_dependency_pct: f64,
    pub hhi_assets_mean: f64,
    pub hhi_assets_median: f64,
    pub hhi_liabilities_mean: f64,
    pub hhi_liabilities_median: f64,
    pub core_size_pct: f64,
}

impl NetworkStats {
    /// All-zero row reported for a network without links.
    pub fn empty() -> Self {
        Self {
            links: 0,
            density_pct: 0.0,
            avg_degree: 0.0,
            med_degree: 0.0,
            assortativity: None,
            clustering_pct: 0.0,
            lender_dependency_pct: 0.0,
            borrower_dependency_pct: 0.0,
            hhi_assets_mean: 0.0,
            hhi_assets_median: 0.0,
            hhi_liabilities_mean: 0.0,
            hhi_liabilities_median: 0.0,
            core_size_pct: 0.0,
        }
    }

    pub const COLUMNS: [&'static str; 13] = [
        "links",
        "density_pct",
        "avg_degree",
        "med_degree",
        "assortativity",
        "clustering_pct",
        "lender_dependency_pct",
        "borrower_dependency_pct",
        "hhi_assets_mean",
        "hhi_assets_median",
        "hhi_liabilities_mean",
        "hhi_liabilities_median",
        "core_size_pct",
    ];

    /// Values formatted for a CSV row; undefined assortativity is `NaN`.
    pub fn csv_fields(&self) -> Vec<String> {
        vec![
            self.links.to_string(),
            format!("{:.3}", self.density_pct),
            format!("{:.3}", self.avg_degree),
            format!("{}", self.med_degree),
            self.assortativity
                .map_or_else(|| "NaN".to_string(), |r| format!("{r:.3}")),
            format!("{:.3}", self.clustering_pct),
            format!("{:.3}", self.lender_dependency_pct),
            format!("{:.3}", self.borrower_dependency_pct),
            format!("{:.3}", self.hhi_assets_mean),
            format!("{:.3}", self.hhi_assets_median),
            format!("{:.3}", self.hhi_liabilities_mean),
            format!("{:.3}", self.hhi_liabilities_median),
            format!("{:.3}", self.core_size_pct),
        ]
    }
}

/// Directed 0/1 adjacency of the links above `threshold`, stored as one
/// bitset row per lender and one per borrower.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    words: usize,
    out: Vec<u64>,
    inc: Vec<u64>,
}

impl Adjacency {
    fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self {
            n,
            words,
            out: vec![0; n * words],
            inc: vec![0; n * words],
        }
    }

    fn set(&mut self, i: usize, j: usize) {
        self.out[i * self.words + j / 64] |= 1 << (j % 64);
        self.inc[j * self.words + i / 64] |= 1 << (i % 64);
    }

    pub fn from_exposures(x: &ExposureMatrix, threshold: f64) -> Self {
        let m = x.matrix();
        let n = m.nrows();
        let mut adj = Self::empty(n);
        for i in 0..n {
            for j in 0..n {
                if i != j && m[(i, j)] > threshold {
                    adj.set(i, j);
                }
            }
        }
        adj
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = Self::empty(n);
        for &(i, j) in edges {
            if i != j {
                adj.set(i, j);
            }
        }
        adj
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has(&self, i: usize, j: usize) -> bool {
        self.out[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn links(&self) -> usize {
        self.out.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn out_row(&self, i: usize) -> &[u64] {
        &self.out[i * self.words..(i + 1) * self.words]
    }

    fn in_row(&self, j: usize) -> &[u64] {
        &self.inc[j * self.words..(j + 1) * self.words]
    }

    fn out_degree(&self, i: usize) -> usize {
        self.out_row(i)
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    fn in_degree(&self, j: usize) -> usize {
        self.in_row(j).iter().map(|w| w.count_ones() as usize).sum()
    }

    fn undirected(&self, i: usize, j: usize) -> bool {
        self.has(i, j) || self.has(j, i)
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Degree assortativity of the undirected graph, `None` if degree variance
/// over edge endpoints is zero.
fn assortativity(adj: &Adjacency) -> Option<f64> {
    let n = adj.n();
    let degree: Vec<i128> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && adj.undirected(i, j)).count() as i128)
        .collect();
    let (mut edges, mut s1, mut s2, mut s11) = (0i128, 0i128, 0i128, 0i128);
    for i in 0..n {
        for j in (i + 1)..n {
            if adj.undirected(i, j) {
                let (x, y) = (degree[i], degree[j]);
                edges += 1;
                s1 += x + y;
                s2 += x * x + y * y;
                s11 += x * y;
            }
        }
    }
    if edges == 0 {
        return None;
    }
    let num = 4 * edges * s11 - s1 * s1;
    let den = 2 * edges * s2 - s1 * s1;
    if den == 0 {
        None
    } else {
        Some(num as f64 / den as f64)
    }
}

/// Global clustering (transitivity) of the undirected graph, in `[0, 1]`.
fn transitivity(adj: &Adjacency) -> f64 {
    let n = adj.n();
    let mut triangles = 0u64;
    let mut triples = 0u64;
    for i in 0..n {
        let k = (0..n).filter(|&j| j != i && adj.undirected(i, j)).count() as u64;
        triples += k * k.saturating_sub(1) / 2;
        for j in (i + 1)..n {
            if !adj.undirected(i, j) {
                continue;
            }
            for m in (j + 1)..n {
                if adj.undirected(i, m) && adj.undirected(j, m) {
                    triangles += 1;
                }
            }
        }
    }
    if triples == 0 {
        0.0
    } else {
        3.0 * triangles as f64 / triples as f64
    }
}

/// Largest-counterparty share and HHI for each line with positive total.
fn concentration<I: Iterator<Item = f64>>(lines: impl Iterator<Item = I>) -> (Vec<f64>, Vec<f64>) {
    let mut top = Vec::new();
    let mut hhi = Vec::new();
    for line in lines {
        let values: Vec<f64> = line.collect();
        let total: f64 = values.iter().sum();
        if total > 0.0 {
            let max = values.iter().copied().fold(0.0, f64::max);
            top.push(max / total);
            hhi.push(values.iter().map(|v| (v / total).powi(2)).sum());
        }
    }
    (top, hhi)
}

/// Computes the full statistics row. Entries at or below `link_threshold`
/// are treated as absent throughout.
pub fn network_statistics(
    x: &ExposureMatrix,
    link_threshold: f64,
) -> Result<NetworkStats, NetStatsError> {
    if !(link_threshold >= 0.0) || !link_threshold.is_finite() {
        return Err(NetStatsError::Threshold(link_threshold));
    }
    let n = x.n();
    if n < 2 {
        return Err(NetStatsError::TooSmall(n));
    }
    let adj = Adjacency::from_exposures(x, link_threshold);
    let links = adj.links();
    if links == 0 {
        return Err(NetStatsError::EmptyNetwork);
    }
    let m = x.matrix();
    let w = |i: usize, j: usize| if adj.has(i, j) { m[(i, j)] } else { 0.0 };

    let mut out_degrees: Vec<f64> = (0..n).map(|i| adj.out_degree(i) as f64).collect();
    let (lender_top, mut hhi_assets) = concentration((0..n).map(|i| (0..n).map(move |j| w(i, j))));
    let (borrower_top, mut hhi_liabilities) =
        concentration((0..n).map(|j| (0..n).map(move |i| w(i, j))));
    let (core, _) = core_periphery_fit_adjacency(&adj);

    Ok(NetworkStats {
        links,
        density_pct: 100.0 * links as f64 / (n * (n - 1)) as f64,
        avg_degree: links as f64 / n as f64,
        med_degree: median(&mut out_degrees),
        assortativity: assortativity(&adj),
        clustering_pct: 100.0 * transitivity(&adj),
        lender_dependency_pct: 100.0 * mean(&lender_top),
        borrower_dependency_pct: 100.0 * mean(&borrower_top),
        hhi_assets_mean: mean(&hhi_assets),
        hhi_assets_median: median(&mut hhi_assets),
        hhi_liabilities_mean: mean(&hhi_liabilities),
        hhi_liabilities_median: median(&mut hhi_liabilities),
        core_size_pct: 100.0 * core.len() as f64 / n as f64,
    })
}

/// Discrete core-periphery error of a partition.
///
/// Counts missing core-core links, present periphery-periphery links, and
/// for every core bank one error if it lends to no periphery bank and one if
/// it borrows from none (only when the periphery is nonempty).
pub fn core_periphery_error(adj: &Adjacency, in_core: &[bool]) -> usize {
    let mut core = vec![0u64; adj.words];
    for (i, _) in in_core.iter().enumerate().filter(|(_, &c)| c) {
        core[i / 64] |= 1 << (i % 64);
    }
    masked_error(adj, &core)
}

fn is_core(core: &[u64], i: usize) -> bool {
    core[i / 64] >> (i % 64) & 1 == 1
}

fn flip(core: &mut [u64], i: usize) {
    core[i / 64] ^= 1 << (i % 64);
}

fn masked_error(adj: &Adjacency, core: &[u64]) -> usize {
    let n = adj.n();
    let core_size: usize = core.iter().map(|w| w.count_ones() as usize).sum();
    let has_periphery = core_size < n;
    let count = |row: &[u64], f: &dyn Fn(u64, u64) -> u64| -> usize {
        row.iter()
            .zip(core)
            .map(|(&r, &c)| f(r, c).count_ones() as usize)
            .sum()
    };
    let mut errors = 0;
    for i in 0..n {
        let out = adj.out_row(i);
        if is_core(core, i) {
            errors += core_size - 1 - count(out, &|r, c| r & c);
            if has_periphery {
                errors += usize::from(count(out, &|r, c| r & !c) == 0);
                errors += usize::from(count(adj.in_row(i), &|r, c| r & !c) == 0);
            }
        } else {
            errors += count(out, &|r, c| r & !c);
        }
    }
    errors
}

fn core_periphery_fit_adjacency(adj: &Adjacency) -> (Vec<usize>, usize) {
    let n = adj.n();
    let mut order: Vec<usize> = (0..n).collect();
    let degree: Vec<usize> = (0..n)
        .map(|i| adj.out_degree(i) + adj.in_degree(i))
        .collect();
    order.sort_by(|&p, &q| degree[q].cmp(&degree[p]).then(p.cmp(&q)));

    // best prefix of the degree ordering, larger cores winning ties
    let mut core = vec![0u64; adj.words];
    let mut best_k = 0;
    let mut best = masked_error(adj, &core);
    for (k, &bank) in order.iter().enumerate() {
        flip(&mut core, bank);
        let score = masked_error(adj, &core);
        if score <= best {
            best = score;
            best_k = k + 1;
        }
    }
    let mut core = vec![0u64; adj.words];
    for &bank in &order[..best_k] {
        flip(&mut core, bank);
    }

    // local search over single flips and core/periphery swaps
    loop {
        let mut improved: Option<(usize, usize, Option<usize>)> = None;
        let mut consider = |core: &[u64], i: usize, j: Option<usize>| {
            let score = masked_error(adj, core);
            if score < improved.map_or(best, |(s, _, _)| s) {
                improved = Some((score, i, j));
            }
        };
        for i in 0..n {
            flip(&mut core, i);
            consider(&core, i, None);
            flip(&mut core, i);
        }
        for i in 0..n {
            for j in 0..n {
                if is_core(&core, i) && !is_core(&core, j) {
                    flip(&mut core, i);
                    flip(&mut core, j);
                    consider(&core, i, Some(j));
                    flip(&mut core, i);
                    flip(&mut core, j);
                }
            }
        }
        match improved {
            Some((score, i, j)) => {
                flip(&mut core, i);
                if let Some(j) = j {
                    flip(&mut core, j);
                }
                best = score;
            }
            None => break,
        }
    }
    let members = (0..n).filter(|&i| is_core(&core, i)).collect();
    (members, best)
}

/// Core members (sorted bank indices) and the error score of the fitted
/// partition.
///
/// Banks are added to the core in descending total degree, the best prefix
/// is kept, then single flips and core/periphery swaps are applied while
/// they strictly lower the error.
pub fn core_periphery_fit(x: &ExposureMatrix, link_threshold: f64) -> (Vec<usize>, usize) {
    core_periphery_fit_adjacency(&Adjacency::from_exposures(x, link_threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> ExposureMatrix {
        let mut m = DMatrix::zeros(n, n);
        for &(i, j, w) in edges {
            m[(i, j)] = w;
        }
        ExposureMatrix::from_matrix(m).unwrap()
    }

    fn complete(n: usize) -> ExposureMatrix {
        ExposureMatrix::from_matrix(DMatrix::from_fn(
            n,
            n,
            |i, j| if i == j { 0.0 } else { 1.0 },
        ))
        .unwrap()
    }

    #[test]
    fn directed_three_cycle() {
        let x = from_edges(3, &[(0, 1, 2.0), (1, 2, 2.0), (2, 0, 2.0)]);
        let s = network_statistics(&x, 0.0).unwrap();
        assert_eq!(s.links, 3);
        assert_eq!(s.density_pct, 50.0);
        assert_eq!(s.avg_degree, 1.0);
        assert_eq!(s.med_degree, 1.0);
        assert_eq!(s.hhi_assets_mean, 1.0);
        assert_eq!(s.hhi_liabilities_median, 1.0);
        assert_eq!(s.lender_dependency_pct, 100.0);
        // undirected triangle: every degree equal, fully clustered
        assert_eq!(s.assortativity, None);
        assert_eq!(s.clustering_pct, 100.0);
    }

    #[test]
    fn complete_network() {
        let s = network_statistics(&complete(6), 0.0).unwrap();
        assert_eq!(s.links, 30);
        assert_eq!(s.density_pct, 100.0);
        assert_eq!(s.avg_degree, 5.0);
        assert_eq!(s.clustering_pct, 100.0);
        assert_eq!(s.assortativity, None);
        assert_eq!(s.core_size_pct, 100.0);
    }

    #[test]
    fn single_counterparty_bank() {
        let x = from_edges(3, &[(0, 1, 5.0), (1, 0, 1.0), (1, 2, 3.0)]);
        let s = network_statistics(&x, 0.0).unwrap();
        // bank 0 lends only to bank 1
        let m = x.matrix();
        let (_, hhi) = concentration((0..3).map(|i| (0..3).map(move |j| m[(i, j)])));
        assert_eq!(hhi[0], 1.0);
        assert!((hhi[1] - (0.25f64.powi(2) + 0.75f64.powi(2))).abs() < 1e-15);
        assert!((s.lender_dependency_pct - 100.0 * (1.0 + 0.75) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_network_is_an_error() {
        let x = ExposureMatrix::from_matrix(DMatrix::zeros(4, 4)).unwrap();
        assert_eq!(
            network_statistics(&x, 0.0),
            Err(NetStatsError::EmptyNetwork)
        );
    }

    #[test]
    fn threshold_drops_small_links() {
        let x = from_edges(3, &[(0, 1, 5.0), (1, 2, 0.5)]);
        assert_eq!(network_statistics(&x, 1.0).unwrap().links, 1);
        assert_eq!(network_statistics(&x, 0.0).unwrap().links, 2);
    }

    #[test]
    fn star_is_ideal_core_periphery() {
        let mut edges = Vec::new();
        for spoke in 1..6 {
            edges.push((0, spoke, 1.0));
            edges.push((spoke, 0, 1.0));
        }
        let (core, error) = core_periphery_fit(&from_edges(6, &edges), 0.0);
        assert_eq!(core, vec![0]);
        assert_eq!(error, 0);
    }

    #[test]
    fn complete_network_is_all_core() {
        let (core, error) = core_periphery_fit(&complete(5), 0.0);
        assert_eq!(core, vec![0, 1, 2, 3, 4]);
        assert_eq!(error, 0);
    }

    #[test]
    fn star_assortativity_is_minus_one() {
        let edges: Vec<_> = (1..5).map(|s| (0, s, 1.0)).collect();
        let s = network_statistics(&from_edges(5, &edges), 0.0).unwrap();
        assert!((s.assortativity.unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(s.clustering_pct, 0.0);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
