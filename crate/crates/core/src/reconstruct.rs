//! Bilateral exposure matrices from per-bank interbank totals.
//!
//! Given aggregated interbank assets `a` (row sums) and liabilities `l`
//! (column sums), three reconstructions are offered:
//!
//! * [`reconstruct_maxe`]: maximum entropy relative to `a_i l_j`, solved by
//!   hollow RAS (iterative proportional fitting),
//! * [`reconstruct_hala`]: seeded random iterative fill followed by a
//!   proportional cleanup of whatever is left unassigned,
//! * [`reconstruct_anan`]: a deterministic sparse greedy assignment.
//!
//! Every output has a zero diagonal. A hollow nonnegative matrix with the
//! given marginals exists exactly when `a_i + l_i <= Σ a` for every bank.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance on `Σ a = Σ l`.
pub const CONSERVATION_TOL: f64 = 1e-9;
/// Default stopping residual of the random fill, relative to `Σ a`.
pub const HALA_EPS: f64 = 1e-6;
/// Default RAS tolerance used by the pipeline.
pub const MAXE_TOL: f64 = 1e-12;
pub const MAXE_MAX_ITER: usize = 100_000;

const HALA_MAX_STEPS: usize = 5_000_000;
const CLEANUP_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructError {
    #[error("invalid marginals: {0}")]
    InvalidMarginals(String),
    #[error("no hollow matrix exists: bank {bank} has a_i + l_i = {mass} above total {total}")]
    InfeasibleMarginals { bank: usize, mass: f64, total: f64 },
    #[error("RAS did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { residual: f64, iterations: usize },
    #[error("assignment blocked with residual assets {assets:?} and liabilities {liabilities:?}")]
    Infeasible {
        assets: Vec<f64>,
        liabilities: Vec<f64>,
    },
    #[error("invalid exposure matrix: {0}")]
    InvalidMatrix(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Anan,
    Hala,
    Maxe,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Anan, Method::Hala, Method::Maxe];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Anan => "anan",
            Method::Hala => "hala",
            Method::Maxe => "maxe",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "anan" => Ok(Method::Anan),
            "hala" => Ok(Method::Hala),
            "maxe" => Ok(Method::Maxe),
            other => Err(format!("unknown reconstruction method `{other}`")),
        }
    }
}

/// Aggregated interbank assets and liabilities per bank.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    a: Vec<f64>,
    l: Vec<f64>,
}

impl Marginals {
    pub fn new(a: Vec<f64>, l: Vec<f64>) -> Result<Self, ReconstructError> {
        if a.len() != l.len() {
            return Err(ReconstructError::InvalidMarginals(format!(
                "{} assets but {} liabilities",
                a.len(),
                l.len()
            )));
        }
        for (i, (&ai, &li)) in a.iter().zip(&l).enumerate() {
            if !(ai >= 0.0 && ai.is_finite() && li >= 0.0 && li.is_finite()) {
                return Err(ReconstructError::InvalidMarginals(format!(
                    "bank {i}: a = {ai}, l = {li}"
                )));
            }
        }
        let sa: f64 = a.iter().sum();
        let sl: f64 = l.iter().sum();
        if (sa - sl).abs() > CONSERVATION_TOL * sa.max(sl) {
            return Err(ReconstructError::InvalidMarginals(format!(
                "total assets {sa} differ from total liabilities {sl}"
            )));
        }
        Ok(Self { a, l })
    }

    /// Marginals with interbank assets equal to interbank liabilities.
    pub fn symmetric(v: Vec<f64>) -> Result<Self, ReconstructError> {
        Self::new(v.clone(), v)
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn assets(&self) -> &[f64] {
        &self.a
    }

    pub fn liabilities(&self) -> &[f64] {
        &self.l
    }

    pub fn total(&self) -> f64 {
        self.a.iter().sum()
    }

    pub fn scaled(&self, kappa: f64) -> Result<Self, ReconstructError> {
        Self::new(
            self.a.iter().map(|x| x * kappa).collect(),
            self.l.iter().map(|x| x * kappa).collect(),
        )
    }

    /// Checks that a hollow matrix with these marginals exists.
    pub fn check_hollow_feasible(&self) -> Result<(), ReconstructError> {
        hollow_feasible(&self.a, &self.l)
    }
}

fn hollow_feasible(a: &[f64], l: &[f64]) -> Result<(), ReconstructError> {
    let total: f64 = a.iter().sum::<f64>().max(l.iter().sum());
    let slack = total * 1e-12;
    for (bank, (&ai, &li)) in a.iter().zip(l).enumerate() {
        if ai + li > total + slack {
            return Err(ReconstructError::InfeasibleMarginals {
                bank,
                mass: ai + li,
                total,
            });
        }
    }
    Ok(())
}

/// Nominal bilateral exposures: row = lender, column = borrower.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureMatrix {
    x: DMatrix<f64>,
    method: Option<Method>,
    seed: Option<u64>,
}

impl ExposureMatrix {
    /// Wraps an externally supplied matrix.
    pub fn from_matrix(x: DMatrix<f64>) -> Result<Self, ReconstructError> {
        if !x.is_square() {
            return Err(ReconstructError::InvalidMatrix(format!(
                "shape {}x{} is not square",
                x.nrows(),
                x.ncols()
            )));
        }
        for i in 0..x.nrows() {
            if x[(i, i)] != 0.0 {
                return Err(ReconstructError::InvalidMatrix(format!(
                    "diagonal entry {i} is nonzero"
                )));
            }
            for j in 0..x.ncols() {
                let v = x[(i, j)];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(ReconstructError::InvalidMatrix(format!(
                        "entry ({i}, {j}) = {v}"
                    )));
                }
            }
        }
        Ok(Self {
            x,
            method: None,
            seed: None,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.x
    }

    pub fn method(&self) -> Option<Method> {
        self.method
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Number of off-diagonal entries strictly above `threshold`.
    pub fn links(&self, threshold: f64) -> usize {
        self.x.iter().filter(|&&v| v > threshold).count()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.x.row_iter().map(|r| r.sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.x.column_iter().map(|c| c.sum()).collect()
    }

    /// `κ X`, keeping provenance.
    pub fn scaled(&self, kappa: f64) -> Self {
        Self {
            x: &self.x * kappa,
            method: self.method,
            seed: self.seed,
        }
    }
}

/// Per-bank relative marginal residuals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalReport {
    pub row_residuals: Vec<f64>,
    pub column_residuals: Vec<f64>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn relative_residuals(sums: &[f64], targets: &[f64], total: f64) -> Vec<f64> {
    sums.iter()
        .zip(targets)
        .map(|(&s, &t)| {
            let denom = if t > 0.0 {
                t
            } else if total > 0.0 {
                total
            } else {
                1.0
            };
            (s - t).abs() / denom
        })
        .collect()
}

/// Compares the row and column sums of `x` against `m`.
///
/// Residuals are relative to the bank's own marginal, or to the system total
/// when the marginal is zero.
pub fn validate_marginals(x: &ExposureMatrix, m: &Marginals, tol: f64) -> MarginalReport {
    let total = m.total();
    let row_residuals = relative_residuals(&x.row_sums(), m.assets(), total);
    let column_residuals = relative_residuals(&x.column_sums(), m.liabilities(), total);
    let max_residual = row_residuals
        .iter()
        .chain(&column_residuals)
        .fold(0.0_f64, |acc, &r| acc.max(r));
    MarginalReport {
        row_residuals,
        column_residuals,
        max_residual,
        tolerance: tol,
        pass: max_residual <= tol,
    }
}

fn max_relative_residual(x: &DMatrix<f64>, a: &[f64], l: &[f64]) -> f64 {
    let total: f64 = a.iter().sum();
    let rows: Vec<f64> = x.row_iter().map(|r| r.sum()).collect();
    let cols: Vec<f64> = x.column_iter().map(|c| c.sum()).collect();
    relative_residuals(&rows, a, total)
        .into_iter()
        .chain(relative_residuals(&cols, l, total))
        .fold(0.0_f64, f64::max)
}

/// Hollow RAS: alternate row and column scaling of `x` towards `(a, l)`,
/// keeping the diagonal at zero. Returns the number of sweeps used.
fn ras(
    x: &mut DMatrix<f64>,
    a: &[f64],
    l: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<usize, ReconstructError> {
    let n = x.nrows();
    // a bank whose assets and liabilities exhaust the system total must be a
    // counterparty of every link; scaling only reaches those zeros in the limit
    let total: f64 = a.iter().sum();
    for t in (0..n).filter(|&t| a[t] + l[t] >= total * (1.0 - 1e-12)) {
        for i in (0..n).filter(|&i| i != t) {
            for j in (0..n).filter(|&j| j != t) {
                x[(i, j)] = 0.0;
            }
        }
    }
    let mut residual = f64::INFINITY;
    for iter in 1..=max_iter {
        for i in 0..n {
            let s: f64 = x.row(i).sum();
            let f = if s > 0.0 { a[i] / s } else { 0.0 };
            x.row_mut(i).scale_mut(f);
        }
        for j in 0..n {
            let s: f64 = x.column(j).sum();
            let f = if s > 0.0 { l[j] / s } else { 0.0 };
            x.column_mut(j).scale_mut(f);
        }
        x.fill_diagonal(0.0);
        residual = max_relative_residual(x, a, l);
        if residual <= tol {
            return Ok(iter);
        }
    }
    Err(ReconstructError::NotConverged {
        residual,
        iterations: max_iter,
    })
}

fn gravity_seed(a: &[f64], l: &[f64]) -> DMatrix<f64> {
    let n = a.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { a[i] * l[j] })
}

/// Maximum-entropy reconstruction relative to the prior `Q_ij = a_i l_j`
/// (`Q_ii = 0`), solved by RAS until every relative marginal residual is at
/// most `tol`.
pub fn reconstruct_maxe(
    m: &Marginals,
    tol: f64,
    max_iter: usize,
) -> Result<ExposureMatrix, ReconstructError> {
    m.check_hollow_feasible()?;
    let mut x = gravity_seed(m.assets(), m.liabilities());
    if m.total() > 0.0 {
        ras(&mut x, m.assets(), m.liabilities(), tol, max_iter)?;
    }
    Ok(ExposureMatrix {
        x,
        method: Some(Method::Maxe),
        seed: None,
    })
}

/// Random iterative fill.
///
/// Each step draws an ordered pair `(i, j)`, `i != j`, uniformly among banks
/// with unassigned assets and unassigned liabilities, and moves a uniform
/// fraction `f ∈ (0, 1)` of `min(a_i, l_j)` into `X_ij`. Filling stops once
/// the unassigned total is at most `eps · Σ a`; the remainder is spread by a
/// hollow RAS pass so that the final marginals hold.
///
/// All randomness comes from `seed`.
pub fn reconstruct_hala(
    m: &Marginals,
    seed: u64,
    eps: f64,
) -> Result<ExposureMatrix, ReconstructError> {
    m.check_hollow_feasible()?;
    let n = m.n();
    let total = m.total();
    let mut x = DMatrix::zeros(n, n);
    if total == 0.0 {
        return Ok(ExposureMatrix {
            x,
            method: Some(Method::Hala),
            seed: Some(seed),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a_rem = m.assets().to_vec();
    let mut l_rem = m.liabilities().to_vec();
    let mut lenders: Vec<usize> = (0..n).filter(|&i| a_rem[i] > 0.0).collect();
    let mut borrowers: Vec<usize> = (0..n).filter(|&j| l_rem[j] > 0.0).collect();
    let mut remaining = total;
    let stop = eps * total;
    // a remainder this small is spent; keeps fills out of subnormal range
    let spent = total * f64::EPSILON;

    let mut steps = 0;
    while remaining > stop && steps < HALA_MAX_STEPS {
        if lenders.is_empty()
            || borrowers.is_empty()
            || (lenders.len() == 1 && borrowers.len() == 1 && lenders[0] == borrowers[0])
        {
            break;
        }
        steps += 1;
        let i = lenders[rng.random_range(0..lenders.len())];
        let j = borrowers[rng.random_range(0..borrowers.len())];
        if i == j {
            continue;
        }
        let f: f64 = loop {
            let f = rng.random::<f64>();
            if f > 0.0 {
                break f;
            }
        };
        let amount = f * a_rem[i].min(l_rem[j]);
        x[(i, j)] += amount;
        a_rem[i] -= amount;
        l_rem[j] -= amount;
        remaining -= amount;
        if a_rem[i] <= spent {
            a_rem[i] = 0.0;
            lenders.retain(|&k| k != i);
        }
        if l_rem[j] <= spent {
            l_rem[j] = 0.0;
            borrowers.retain(|&k| k != j);
        }
    }
    log::debug!("hala seed {seed}: {steps} fill steps, {remaining:e} left");

    // Recompute the remainder from the matrix itself so the cleanup targets
    // exactly what is missing.
    let rows: Vec<f64> = x.row_iter().map(|r| r.sum()).collect();
    let cols: Vec<f64> = x.column_iter().map(|c| c.sum()).collect();
    let a_left: Vec<f64> = m
        .assets()
        .iter()
        .zip(&rows)
        .map(|(t, s)| (t - s).max(0.0))
        .collect();
    let l_left: Vec<f64> = m
        .liabilities()
        .iter()
        .zip(&cols)
        .map(|(t, s)| (t - s).max(0.0))
        .collect();
    let left_a: f64 = a_left.iter().sum();
    let left_l: f64 = l_left.iter().sum();

    if left_a > 0.0 && left_l > 0.0 {
        let residual_ok = (left_a - left_l).abs() <= 1e-9 * left_a.max(left_l)
            && hollow_feasible(&a_left, &l_left).is_ok();
        let mut cleaned = false;
        if residual_ok {
            // rebalance the two sides to the same total before scaling
            let l_adj: Vec<f64> = l_left.iter().map(|v| v * left_a / left_l).collect();
            let mut fill = gravity_seed(&a_left, &l_adj);
            if ras(&mut fill, &a_left, &l_adj, CLEANUP_TOL, MAXE_MAX_ITER).is_ok() {
                x += fill;
                cleaned = true;
            }
        }
        if !cleaned {
            // residual mass sits where no hollow completion exists: rescale
            // the whole fill against the full marginals instead
            let mut prior = gravity_seed(m.assets(), m.liabilities());
            let prior_total = prior.sum();
            if prior_total > 0.0 {
                prior *= left_a / prior_total;
            }
            x += prior;
            ras(
                &mut x,
                m.assets(),
                m.liabilities(),
                CLEANUP_TOL,
                MAXE_MAX_ITER,
            )?;
        }
    }

    Ok(ExposureMatrix {
        x,
        method: Some(Method::Hala),
        seed: Some(seed),
    })
}

/// Three smallest slacks with their bank indices, for `min_{k ∉ {i, j}}`.
fn smallest_three(slack: &[f64]) -> [(f64, usize); 3] {
    let mut best = [(f64::INFINITY, usize::MAX); 3];
    for (k, &s) in slack.iter().enumerate() {
        if s < best[2].0 {
            best[2] = (s, k);
            if best[2].0 < best[1].0 {
                best.swap(1, 2);
                if best[1].0 < best[0].0 {
                    best.swap(0, 1);
                }
            }
        }
    }
    best
}

/// Pairs `(i, j)` able to take the largest capped amount, in index order.
fn best_pairs(a: &[f64], l: &[f64], remaining: f64, snap: f64) -> (f64, Vec<(usize, usize)>) {
    let n = a.len();
    let slack: Vec<f64> = (0..n).map(|k| (remaining - a[k] - l[k]).max(0.0)).collect();
    let low = smallest_three(&slack);
    let mut best = snap;
    let mut pairs = Vec::new();
    for i in (0..n).filter(|&i| a[i] > 0.0) {
        for j in (0..n).filter(|&j| j != i && l[j] > 0.0) {
            let cap = low
                .iter()
                .find(|(_, k)| *k != i && *k != j)
                .map_or(f64::INFINITY, |(s, _)| *s);
            let amount = a[i].min(l[j]).min(cap);
            if amount > best + snap {
                best = amount;
                pairs.clear();
                pairs.push((i, j));
            } else if amount >= best - snap && amount > snap {
                pairs.push((i, j));
            }
        }
    }
    (best, pairs)
}

struct Greedy {
    a: Vec<f64>,
    l: Vec<f64>,
    x: DMatrix<f64>,
    remaining: f64,
    snap: f64,
}

impl Greedy {
    fn assign(&mut self, i: usize, j: usize, amount: f64) {
        self.x[(i, j)] += amount;
        self.a[i] -= amount;
        self.l[j] -= amount;
        self.remaining -= amount;
        if self.a[i] <= self.snap {
            self.a[i] = 0.0;
        }
        if self.l[j] <= self.snap {
            self.l[j] = 0.0;
        }
    }

    fn links(&self) -> usize {
        self.x.iter().filter(|&&v| v > 0.0).count()
    }

    /// Runs to completion. With `lookahead`, ties between equally large
    /// pairs go to the one whose plain greedy completion uses fewest links.
    fn run(&mut self, lookahead: bool) -> bool {
        // each step exhausts a row or a column or makes a bank tight; at most
        // two banks can ever be tight, so this bound is generous
        for _ in 0..(4 * self.a.len() + 4) {
            if self.remaining <= self.snap {
                return true;
            }
            let (amount, pairs) = best_pairs(&self.a, &self.l, self.remaining, self.snap);
            let Some(&first) = pairs.first() else {
                return false;
            };
            let (i, j) = if lookahead && pairs.len() > 1 {
                pairs
                    .iter()
                    .map(|&(i, j)| {
                        let mut trial = Greedy {
                            a: self.a.clone(),
                            l: self.l.clone(),
                            x: self.x.clone(),
                            remaining: self.remaining,
                            snap: self.snap,
                        };
                        trial.assign(i, j, amount);
                        let links = if trial.run(false) {
                            trial.links()
                        } else {
                            usize::MAX
                        };
                        (links, (i, j))
                    })
                    .min()
                    .map_or(first, |(_, pair)| pair)
            } else {
                first
            };
            self.assign(i, j, amount);
        }
        self.remaining <= self.snap
    }
}

/// Sparse greedy reconstruction.
///
/// Repeatedly picks the pair `(i, j)`, `i != j`, that can take the largest
/// amount and assigns it. The amount is `min(a_i, l_j)`, capped so the
/// residual marginals keep a hollow completion: for every third bank `k`,
/// `a_k + l_k` may not exceed the remaining total. Without the cap the
/// greedy can strand mass on the diagonal (e.g. `a = (3, 2, 0)`,
/// `l = (0, 2, 3)`).
///
/// When several pairs tie for the largest amount, each is tried by
/// completing the plain greedy from it, and the one giving the fewest links
/// wins; remaining ties go to the lowest `(i, j)`.
pub fn reconstruct_anan(m: &Marginals) -> Result<ExposureMatrix, ReconstructError> {
    let n = m.n();
    let total = m.total();
    if total == 0.0 {
        return Ok(ExposureMatrix {
            x: DMatrix::zeros(n, n),
            method: Some(Method::Anan),
            seed: None,
        });
    }
    if m.check_hollow_feasible().is_err() {
        return Err(ReconstructError::Infeasible {
            assets: m.assets().to_vec(),
            liabilities: m.liabilities().to_vec(),
        });
    }
    let mut greedy = Greedy {
        a: m.assets().to_vec(),
        l: m.liabilities().to_vec(),
        x: DMatrix::zeros(n, n),
        remaining: total,
        snap: total * 1e-12,
    };
    if !greedy.run(true) {
        return Err(ReconstructError::Infeasible {
            assets: greedy.a,
            liabilities: greedy.l,
        });
    }
    Ok(ExposureMatrix {
        x: greedy.x,
        method: Some(Method::Anan),
        seed: None,
    })
}

/// Options for [`reconstruct`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReconstructOptions {
    pub seed: u64,
    pub hala_eps: f64,
    pub maxe_tol: f64,
    pub maxe_max_iter: usize,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            hala_eps: HALA_EPS,
            maxe_tol: MAXE_TOL,
            maxe_max_iter: MAXE_MAX_ITER,
        }
    }
}

pub fn reconstruct(
    method: Method,
    m: &Marginals,
    opts: &ReconstructOptions,
) -> Result<ExposureMatrix, ReconstructError> {
    match method {
        Method::Anan => reconstruct_anan(m),
        Method::Hala => reconstruct_hala(m, opts.seed, opts.hala_eps),
        Method::Maxe => reconstruct_maxe(m, opts.maxe_tol, opts.maxe_max_iter),
    }
}
