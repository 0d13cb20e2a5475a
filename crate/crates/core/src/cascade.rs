//! Failure hierarchies under a price shock.
//!
//! Starting from an empty failure set, each round charges every bank that
//! failed in the previous round a lump-sum cost `β v̄_i`, recomputes equity
//! as `A (D p' - b̃)` and marks as failed every bank whose equity is strictly
//! below its threshold `v̄_i = θ v0_i`. Rounds stop when the failed set stops
//! growing. Because `A` is nonnegative the sets only grow, so the loop ends
//! within `N + 1` rounds at the least self-consistent failure set.

use std::collections::BTreeSet;

use nalgebra::DVector;
use serde::Serialize;
use thiserror::Error;

use crate::model::{InterdependencyMatrix, ModelError, PortfolioMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CascadeError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn check_dim(expected: usize, got: usize) -> Result<(), CascadeError> {
    if expected == got {
        Ok(())
    } else {
        Err(CascadeError::DimensionMismatch { expected, got })
    }
}

/// Multiplicative price factors, one per external asset class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShockScenario {
    label: String,
    factors: Vec<f64>,
}

impl ShockScenario {
    pub fn new(label: impl Into<String>, factors: Vec<f64>) -> Result<Self, CascadeError> {
        if let Some((k, f)) = factors
            .iter()
            .enumerate()
            .find(|(_, f)| !(**f >= 0.0) || !f.is_finite())
        {
            return Err(CascadeError::InvalidParams(format!(
                "price factor {k} is {f}, must be a finite nonnegative number"
            )));
        }
        Ok(Self {
            label: label.into(),
            factors,
        })
    }

    /// No shock: every factor is one.
    pub fn unit(m: usize) -> Self {
        Self {
            label: "baseline".into(),
            factors: vec![1.0; m],
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn factors(&self) -> &[f64] {
        &self.factors
    }
}

/// Threshold fraction `θ`, failure-cost coefficient `β` and baseline equity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureParams {
    theta: f64,
    beta: f64,
    v0: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_by_bank: Option<Vec<f64>>,
}

impl FailureParams {
    pub fn new(theta: f64, beta: f64, v0: Vec<f64>) -> Result<Self, CascadeError> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(CascadeError::InvalidParams(format!(
                "theta = {theta}, expected (0, 1]"
            )));
        }
        check_beta(beta)?;
        if let Some((i, v)) = v0
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0) || !v.is_finite())
        {
            return Err(CascadeError::InvalidParams(format!(
                "baseline equity of bank {i} is {v}, must be positive"
            )));
        }
        Ok(Self {
            theta,
            beta,
            v0,
            beta_by_bank: None,
        })
    }

    /// Replaces the scalar `β` with one coefficient per bank.
    pub fn with_bank_beta(mut self, beta: Vec<f64>) -> Result<Self, CascadeError> {
        check_dim(self.v0.len(), beta.len())?;
        for &b in &beta {
            check_beta(b)?;
        }
        self.beta_by_bank = Some(beta);
        Ok(self)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn baseline_equity(&self) -> &[f64] {
        &self.v0
    }

    pub fn thresholds(&self) -> Vec<f64> {
        self.v0.iter().map(|v| self.theta * v).collect()
    }

    /// `β_i v̄_i`: the lump-sum cost charged once bank `i` has failed.
    pub fn failure_costs(&self) -> Vec<f64> {
        let thresholds = self.thresholds();
        match &self.beta_by_bank {
            Some(beta) => thresholds.iter().zip(beta).map(|(v, b)| b * v).collect(),
            None => thresholds.iter().map(|v| self.beta * v).collect(),
        }
    }
}

fn check_beta(beta: f64) -> Result<(), CascadeError> {
    if (0.0..=1.0).contains(&beta) {
        Ok(())
    } else {
        Err(CascadeError::InvalidParams(format!(
            "beta = {beta}, expected [0, 1]"
        )))
    }
}

/// `v̄ = θ v0`.
pub fn failure_thresholds(v0: &[f64], theta: f64) -> Result<Vec<f64>, CascadeError> {
    Ok(FailureParams::new(theta, 0.0, v0.to_vec())?.thresholds())
}

/// Multiplies each class price by its shock factor; holdings are unchanged.
pub fn apply_shock(
    port: &PortfolioMatrix,
    shock: &ShockScenario,
) -> Result<PortfolioMatrix, CascadeError> {
    check_dim(port.m(), shock.factors().len())?;
    let prices = port
        .prices()
        .component_mul(&DVector::from_column_slice(shock.factors()));
    Ok(port.with_prices(prices)?)
}

/// Failed sets `Z_1 ⊆ Z_2 ⊆ … ⊆ Z_T` with the equity vector behind each.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeResult {
    rounds: Vec<Vec<usize>>,
    equity_trace: Vec<Vec<f64>>,
    thresholds: Vec<f64>,
}

impl CascadeResult {
    /// `Z_1 … Z_T`, each sorted by bank index. The last two are equal.
    pub fn rounds(&self) -> &[Vec<usize>] {
        &self.rounds
    }

    /// `A (D p' - b̃_{t-1})` for every round, surviving banks included.
    pub fn equity_trace(&self) -> &[Vec<f64>] {
        &self.equity_trace
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// `T`, the round at which the failed set repeated.
    pub fn terminated_at(&self) -> usize {
        self.rounds.len()
    }

    pub fn final_failures(&self) -> &[usize] {
        self.rounds.last().map_or(&[], |r| r.as_slice())
    }

    /// Newly failed banks per round, skipping rounds that added nobody.
    /// Entry 0 is the first failure level, entry 1 the second, and so on.
    pub fn hierarchy(&self) -> Vec<Vec<usize>> {
        let mut previous: &[usize] = &[];
        let mut levels = Vec::new();
        for round in &self.rounds {
            let new: Vec<usize> = round
                .iter()
                .copied()
                .filter(|k| previous.binary_search(k).is_err())
                .collect();
            if !new.is_empty() {
                levels.push(new);
            }
            previous = round;
        }
        levels
    }
}

/// Runs the failure-hierarchy iteration for one shock and parameter set.
pub fn run_cascade(
    a: &InterdependencyMatrix,
    port: &PortfolioMatrix,
    shock: &ShockScenario,
    params: &FailureParams,
) -> Result<CascadeResult, CascadeError> {
    let n = a.n();
    check_dim(n, port.n())?;
    check_dim(n, params.baseline_equity().len())?;
    let shocked = apply_shock(port, shock)?;
    let external = shocked.external_values();
    let thresholds = params.thresholds();
    let costs = params.failure_costs();

    let mut failed: BTreeSet<usize> = BTreeSet::new();
    let mut rounds = Vec::new();
    let mut equity_trace = Vec::new();
    loop {
        let charged = DVector::from_fn(n, |i, _| if failed.contains(&i) { costs[i] } else { 0.0 });
        let equity = a.matrix() * (&external - charged);
        // strictly below the threshold fails; equality survives
        let next: BTreeSet<usize> = (0..n)
            .filter(|&k| equity[k] - thresholds[k] < 0.0)
            .collect();
        assert!(
            failed.is_subset(&next),
            "failure sets must grow monotonically"
        );
        rounds.push(next.iter().copied().collect::<Vec<_>>());
        equity_trace.push(equity.iter().copied().collect());
        if next == failed {
            break;
        }
        failed = next;
    }
    assert!(rounds.len() <= n + 1, "cascade exceeded N + 1 rounds");
    Ok(CascadeResult {
        rounds,
        equity_trace,
        thresholds,
    })
}
