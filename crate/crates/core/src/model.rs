//! Balance-sheet valuation of a system of banks with cross-holdings.
//!
//! Bank `i` holds external assets `(D p)_i` and a fraction `C_ij` of every
//! other bank `j`. Total values solve `V = D p + C V`, equity is what remains
//! after interbank and external liabilities, and equity is linear in the
//! external asset values through the interdependency matrix
//! `A = Ĉ (I - C)^-1`, where `Ĉ` holds the capital ratios on its diagonal.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{LeontiefSolver, SolveError};
use crate::reconstruct::ExposureMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("bank {bank}: interbank liabilities {liabilities} reach total value {total}")]
    ColumnOverflow {
        bank: usize,
        liabilities: f64,
        total: f64,
    },
    #[error("cross-holding column sum for bank {bank} is {sum}, must stay below 1")]
    ColumnSum { bank: usize, sum: f64 },
    #[error("diagonal entry for bank {bank} is nonzero")]
    NonHollow { bank: usize },
    #[error("entry ({row}, {col}) is negative or not finite: {value}")]
    InvalidEntry { row: usize, col: usize, value: f64 },
    #[error("non-positive capital ratio for banks {banks:?}")]
    Insolvent { banks: Vec<usize> },
    #[error("external liability ratio for bank {bank} is {value}, expected [0, 1)")]
    LiabilityRatio { bank: usize, value: f64 },
    #[error("bank {bank}: total value must be positive, got {value}")]
    NonPositiveTotal { bank: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    SingularSystem(#[from] SolveError),
}

fn check_dim(expected: usize, got: usize) -> Result<(), ModelError> {
    if expected == got {
        Ok(())
    } else {
        Err(ModelError::DimensionMismatch { expected, got })
    }
}

/// Cross-holding fractions: `C_ij` is the share of bank `j` owned by bank `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionMatrix {
    c: DMatrix<f64>,
}

impl FractionMatrix {
    /// Validates hollowness, nonnegativity and column sums strictly below one.
    pub fn new(c: DMatrix<f64>) -> Result<Self, ModelError> {
        check_dim(c.nrows(), c.ncols())?;
        for j in 0..c.ncols() {
            let mut sum = 0.0;
            for i in 0..c.nrows() {
                let value = c[(i, j)];
                if !(value >= 0.0) || !value.is_finite() {
                    return Err(ModelError::InvalidEntry {
                        row: i,
                        col: j,
                        value,
                    });
                }
                if i == j && value != 0.0 {
                    return Err(ModelError::NonHollow { bank: i });
                }
                sum += value;
            }
            if sum >= 1.0 {
                return Err(ModelError::ColumnSum { bank: j, sum });
            }
        }
        Ok(Self { c })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            c: DMatrix::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.c.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// `Σ_i C_ij` for each bank `j`: the share of `j` held inside the system.
    pub fn column_sums(&self) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.c.column_iter().map(|col| col.sum()))
    }
}

/// Diagonal of `Ĉ` together with the external liability ratios it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct CapitalRatios {
    chat: DVector<f64>,
    l_ext: DVector<f64>,
}

impl CapitalRatios {
    pub fn n(&self) -> usize {
        self.chat.len()
    }

    pub fn diagonal(&self) -> &DVector<f64> {
        &self.chat
    }

    pub fn liability_ratios(&self) -> &DVector<f64> {
        &self.l_ext
    }
}

/// External holdings `D` (banks × asset classes) and the price vector `p`.
///
/// Holdings are nominal exposures at baseline prices, so the baseline price
/// vector is all ones and a shock is a multiplicative factor per class.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioMatrix {
    d: DMatrix<f64>,
    p: DVector<f64>,
}

impl PortfolioMatrix {
    pub fn new(d: DMatrix<f64>, p: DVector<f64>) -> Result<Self, ModelError> {
        check_dim(d.ncols(), p.len())?;
        for i in 0..d.nrows() {
            for k in 0..d.ncols() {
                let value = d[(i, k)];
                if !(value >= 0.0) || !value.is_finite() {
                    return Err(ModelError::InvalidEntry {
                        row: i,
                        col: k,
                        value,
                    });
                }
            }
        }
        for (k, &price) in p.iter().enumerate() {
            if !(price >= 0.0) || !price.is_finite() {
                return Err(ModelError::InvalidEntry {
                    row: 0,
                    col: k,
                    value: price,
                });
            }
        }
        Ok(Self { d, p })
    }

    /// Holdings at baseline prices (all ones).
    pub fn baseline(d: DMatrix<f64>) -> Result<Self, ModelError> {
        let m = d.ncols();
        Self::new(d, DVector::from_element(m, 1.0))
    }

    pub fn n(&self) -> usize {
        self.d.nrows()
    }

    pub fn m(&self) -> usize {
        self.d.ncols()
    }

    pub fn holdings(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn prices(&self) -> &DVector<f64> {
        &self.p
    }

    pub fn with_prices(&self, p: DVector<f64>) -> Result<Self, ModelError> {
        Self::new(self.d.clone(), p)
    }

    /// `D p`: each bank's external asset value at the current prices.
    pub fn external_values(&self) -> DVector<f64> {
        &self.d * &self.p
    }
}

/// `A = Ĉ (I - C)^-1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterdependencyMatrix {
    #[serde(serialize_with = "serialize_rows")]
    a: DMatrix<f64>,
}

fn serialize_rows<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    rows.serialize(s)
}

impl InterdependencyMatrix {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Wraps a precomputed matrix; entries must be finite and nonnegative.
    pub fn from_matrix(a: DMatrix<f64>) -> Result<Self, ModelError> {
        check_dim(a.nrows(), a.ncols())?;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                let value = a[(i, j)];
                if !(value >= 0.0) || !value.is_finite() {
                    return Err(ModelError::InvalidEntry {
                        row: i,
                        col: j,
                        value,
                    });
                }
            }
        }
        Ok(Self { a })
    }
}

/// Converts nominal exposures into ownership fractions by dividing column `j`
/// by the total value of bank `j`.
pub fn to_fraction_matrix(
    x: &ExposureMatrix,
    v_total: &[f64],
) -> Result<FractionMatrix, ModelError> {
    let x = x.matrix();
    let n = x.nrows();
    check_dim(n, v_total.len())?;
    let mut c = DMatrix::zeros(n, n);
    for j in 0..n {
        let total = v_total[j];
        if !(total > 0.0) || !total.is_finite() {
            return Err(ModelError::NonPositiveTotal {
                bank: j,
                value: total,
            });
        }
        if x[(j, j)] != 0.0 {
            return Err(ModelError::NonHollow { bank: j });
        }
        let liabilities: f64 = x.column(j).sum();
        if liabilities >= total {
            return Err(ModelError::ColumnOverflow {
                bank: j,
                liabilities,
                total,
            });
        }
        for i in 0..n {
            c[(i, j)] = x[(i, j)] / total;
        }
    }
    FractionMatrix::new(c)
}

/// `Ĉ_ii = 1 - l_i - Σ_j C_ji`.
pub fn capital_ratios(c: &FractionMatrix, l_ext: &[f64]) -> Result<CapitalRatios, ModelError> {
    check_dim(c.n(), l_ext.len())?;
    for (bank, &value) in l_ext.iter().enumerate() {
        if !(0.0..1.0).contains(&value) {
            return Err(ModelError::LiabilityRatio { bank, value });
        }
    }
    let l_ext = DVector::from_column_slice(l_ext);
    let chat = DVector::from_element(c.n(), 1.0) - &l_ext - c.column_sums();
    let insolvent: Vec<usize> = chat
        .iter()
        .enumerate()
        .filter(|(_, &r)| r <= 0.0)
        .map(|(i, _)| i)
        .collect();
    if !insolvent.is_empty() {
        return Err(ModelError::Insolvent { banks: insolvent });
    }
    Ok(CapitalRatios { chat, l_ext })
}

/// `V = (I - C)^-1 D p`.
pub fn total_values(
    c: &FractionMatrix,
    port: &PortfolioMatrix,
) -> Result<DVector<f64>, ModelError> {
    check_dim(c.n(), port.n())?;
    let solver = LeontiefSolver::new(c.matrix())?;
    Ok(solver.solve(&port.external_values())?)
}

/// `A = Ĉ (I - C)^-1`, from a single factorisation of `I - C`.
pub fn interdependency(
    c: &FractionMatrix,
    chat: &CapitalRatios,
) -> Result<InterdependencyMatrix, ModelError> {
    check_dim(c.n(), chat.n())?;
    let inverse = LeontiefSolver::new(c.matrix())?.inverse()?;
    let mut a = inverse;
    for (i, &ratio) in chat.diagonal().iter().enumerate() {
        a.row_mut(i).scale_mut(ratio);
    }
    // clear round-off below zero; the exact inverse is nonnegative
    a.apply(|x| {
        if *x < 0.0 {
            *x = 0.0
        }
    });
    Ok(InterdependencyMatrix { a })
}

/// `v = A (D p - b)`: one evaluation with a fixed failure-cost vector.
pub fn equity_values(
    a: &InterdependencyMatrix,
    port: &PortfolioMatrix,
    b: &[f64],
) -> Result<DVector<f64>, ModelError> {
    check_dim(a.n(), port.n())?;
    check_dim(a.n(), b.len())?;
    let net = port.external_values() - DVector::from_column_slice(b);
    Ok(a.matrix() * net)
}

/// Equity read directly off each balance sheet:
/// `v_i = Σ_j C_ij V_j - Σ_j C_ji V_i + (D p)_i - l_i V_i`.
pub fn balance_sheet_equity(
    c: &FractionMatrix,
    l_ext: &[f64],
    port: &PortfolioMatrix,
) -> Result<DVector<f64>, ModelError> {
    check_dim(c.n(), l_ext.len())?;
    let v_total = total_values(c, port)?;
    let claims = c.matrix() * &v_total;
    let held_by_others = c.column_sums();
    let external = port.external_values();
    Ok(DVector::from_fn(c.n(), |i, _| {
        claims[i] - held_by_others[i] * v_total[i] + external[i] - l_ext[i] * v_total[i]
    }))
}
