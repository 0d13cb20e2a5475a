//! Bank roster and shock scenario files.
//!
//! `banks.csv` holds one bank per row:
//!
//! ```text
//! bank_id,country,total_assets,equity,c2100,c1100,c1200,...,c6700
//! ```
//!
//! Amounts are in millions of one currency, decimal point, no thousands
//! separators. Column `c2100` is the aggregated claim on other credit
//! institutions; the remaining twenty codes are external asset classes.
//! Asset-code columns may appear in any order and missing ones are read as
//! zero.
//!
//! `scenario.csv` has header `asset_code,factor` with one price factor per
//! external class; absent classes keep factor 1.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use log::warn;
use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::cascade::ShockScenario;
use crate::model::PortfolioMatrix;
use crate::reconstruct::Marginals;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}, column {column}: {reason}")]
    Parse {
        line: u64,
        column: String,
        reason: String,
    },
    #[error("bank {bank_id}: {reason}")]
    Validation { bank_id: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// One EBA exposure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AssetClass {
    pub code: u16,
    pub name: &'static str,
}

const EBA_CLASSES: [AssetClass; 21] = [
    AssetClass {
        code: 1100,
        name: "Central banks and central governments",
    },
    AssetClass {
        code: 1200,
        name: "Regional governments or local authorities",
    },
    AssetClass {
        code: 1300,
        name: "Public sector entities",
    },
    AssetClass {
        code: 1400,
        name: "Multilateral Development Banks",
    },
    AssetClass {
        code: 1500,
        name: "International Organisations",
    },
    AssetClass {
        code: 1700,
        name: "General governments",
    },
    AssetClass {
        code: 2100,
        name: "Credit institutions",
    },
    AssetClass {
        code: 2200,
        name: "Other financial corporations",
    },
    AssetClass {
        code: 3000,
        name: "Corporates / Non financial corporations",
    },
    AssetClass {
        code: 4110,
        name: "Retail - Secured by real estate property - SME",
    },
    AssetClass {
        code: 4120,
        name: "Retail - Secured by real estate property - Non SME",
    },
    AssetClass {
        code: 4200,
        name: "Retail - Qualifying Revolving",
    },
    AssetClass {
        code: 4310,
        name: "Retail - Other - SME",
    },
    AssetClass {
        code: 4320,
        name: "Retail - Other - Non SME",
    },
    AssetClass {
        code: 4500,
        name: "Retail - SME",
    },
    AssetClass {
        code: 4700,
        name: "Households",
    },
    AssetClass {
        code: 5000,
        name: "Secured by mortgages on immovable property",
    },
    AssetClass {
        code: 6400,
        name: "Items associated with particularly high risk",
    },
    AssetClass {
        code: 6500,
        name: "Covered bonds",
    },
    AssetClass {
        code: 6600,
        name: "Claims on institutions and corporates with a ST credit assessment",
    },
    AssetClass {
        code: 6700,
        name: "Collective investments undertakings (CIU)",
    },
];

pub const INTERBANK_CODE: u16 = 2100;

/// Ordered asset classes and the one that carries interbank claims.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssetClassCatalog {
    classes: Vec<AssetClass>,
    interbank_code: u16,
}

impl Default for AssetClassCatalog {
    fn default() -> Self {
        Self::eba()
    }
}

impl AssetClassCatalog {
    /// The 21 EBA exposure classes, interbank class 2100.
    pub fn eba() -> Self {
        Self {
            classes: EBA_CLASSES.to_vec(),
            interbank_code: INTERBANK_CODE,
        }
    }

    pub fn classes(&self) -> &[AssetClass] {
        &self.classes
    }

    pub fn interbank_code(&self) -> u16 {
        self.interbank_code
    }

    pub fn contains(&self, code: u16) -> bool {
        self.classes.iter().any(|c| c.code == code)
    }

    /// External classes in catalog order; these are the portfolio columns.
    pub fn external_codes(&self) -> Vec<u16> {
        self.classes
            .iter()
            .map(|c| c.code)
            .filter(|&c| c != self.interbank_code)
            .collect()
    }

    /// Canonical `banks.csv` header.
    pub fn bank_header(&self) -> Vec<String> {
        let mut header: Vec<String> = ["bank_id", "country", "total_assets", "equity"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.push(format!("c{}", self.interbank_code));
        header.extend(self.external_codes().iter().map(|c| format!("c{c}")));
        header
    }
}

/// Balance-sheet observables of one bank.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BankRecord {
    pub bank_id: String,
    pub country: String,
    pub total_assets: f64,
    pub equity: f64,
    pub interbank: f64,
    pub external_exposures: BTreeMap<u16, f64>,
}

impl BankRecord {
    pub fn external_total(&self) -> f64 {
        self.external_exposures.values().sum()
    }

    fn validate(&self) -> Result<(), IngestError> {
        let fail = |reason: String| IngestError::Validation {
            bank_id: self.bank_id.clone(),
            reason,
        };
        if self.bank_id.trim().is_empty() {
            return Err(fail("empty bank_id".into()));
        }
        if self.country.len() != 2 || !self.country.bytes().all(|b| b.is_ascii_uppercase()) {
            return Err(fail(format!(
                "country `{}` is not an ISO-2 code",
                self.country
            )));
        }
        if !(self.total_assets > 0.0) {
            return Err(fail(format!(
                "total_assets must be positive, got {}",
                self.total_assets
            )));
        }
        if !(self.equity > 0.0) {
            return Err(fail(format!(
                "equity must be positive, got {}",
                self.equity
            )));
        }
        if !(self.interbank >= 0.0) {
            return Err(fail(format!(
                "c{INTERBANK_CODE} must be nonnegative, got {}",
                self.interbank
            )));
        }
        for (code, &value) in &self.external_exposures {
            if !(value >= 0.0) {
                return Err(fail(format!("c{code} must be nonnegative, got {value}")));
            }
        }
        let assets = self.interbank + self.external_total();
        if assets > self.total_assets * (1.0 + 1e-6) {
            warn!(
                "bank {}: exposures {assets} exceed total assets {}",
                self.bank_id, self.total_assets
            );
        }
        Ok(())
    }
}

fn parse_number(raw: &str, line: u64, column: &str) -> Result<f64, IngestError> {
    let value: f64 = raw.trim().parse().map_err(|_| IngestError::Parse {
        line,
        column: column.to_string(),
        reason: format!("`{raw}` is not a number"),
    })?;
    if !value.is_finite() {
        return Err(IngestError::Parse {
            line,
            column: column.to_string(),
            reason: format!("`{raw}` is not finite"),
        });
    }
    Ok(value)
}

fn parse_code(header: &str) -> Option<u16> {
    header.strip_prefix('c').and_then(|s| s.parse().ok())
}

enum Column {
    BankId,
    Country,
    TotalAssets,
    Equity,
    Code(u16),
}

/// Reads and validates a bank roster.
pub fn parse_banks<R: Read>(
    reader: R,
    catalog: &AssetClassCatalog,
) -> Result<Vec<BankRecord>, IngestError> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv.headers()?.clone();

    let mut columns = Vec::with_capacity(headers.len());
    let mut seen = HashSet::new();
    for name in headers.iter() {
        if !seen.insert(name.to_string()) {
            return Err(IngestError::Parse {
                line: 1,
                column: name.to_string(),
                reason: "duplicate column".into(),
            });
        }
        let column = match name {
            "bank_id" => Column::BankId,
            "country" => Column::Country,
            "total_assets" => Column::TotalAssets,
            "equity" => Column::Equity,
            other => match parse_code(other) {
                Some(code) if catalog.contains(code) => Column::Code(code),
                _ => {
                    return Err(IngestError::Parse {
                        line: 1,
                        column: other.to_string(),
                        reason: "unknown column or asset code".into(),
                    })
                }
            },
        };
        columns.push(column);
    }
    for required in ["bank_id", "country", "total_assets", "equity"] {
        if !seen.contains(required) {
            return Err(IngestError::Parse {
                line: 1,
                column: required.to_string(),
                reason: "required column missing".into(),
            });
        }
    }
    for class in catalog.classes() {
        if !seen.contains(&format!("c{}", class.code)) {
            warn!("column c{} missing, read as zero", class.code);
        }
    }

    let mut records = Vec::new();
    let mut ids = HashSet::new();
    for row in csv.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let mut record = BankRecord {
            bank_id: String::new(),
            country: String::new(),
            total_assets: 0.0,
            equity: 0.0,
            interbank: 0.0,
            external_exposures: catalog
                .external_codes()
                .into_iter()
                .map(|c| (c, 0.0))
                .collect(),
        };
        for ((column, raw), name) in columns.iter().zip(row.iter()).zip(headers.iter()) {
            match column {
                Column::BankId => record.bank_id = raw.to_string(),
                Column::Country => record.country = raw.to_string(),
                Column::TotalAssets => record.total_assets = parse_number(raw, line, name)?,
                Column::Equity => record.equity = parse_number(raw, line, name)?,
                Column::Code(code) if *code == catalog.interbank_code() => {
                    record.interbank = parse_number(raw, line, name)?
                }
                Column::Code(code) => {
                    record
                        .external_exposures
                        .insert(*code, parse_number(raw, line, name)?);
                }
            }
        }
        record.validate()?;
        if !ids.insert(record.bank_id.clone()) {
            return Err(IngestError::Validation {
                bank_id: record.bank_id,
                reason: "duplicate bank_id".into(),
            });
        }
        records.push(record);
    }
    Ok(records)
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_banks(
    path: &Path,
    catalog: &AssetClassCatalog,
) -> Result<Vec<BankRecord>, IngestError> {
    parse_banks(open(path)?, catalog)
}

/// Writes records with the canonical header.
pub fn write_banks<W: Write>(
    records: &[BankRecord],
    writer: W,
    catalog: &AssetClassCatalog,
) -> Result<(), IngestError> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(catalog.bank_header())?;
    for r in records {
        let mut row = vec![
            r.bank_id.clone(),
            r.country.clone(),
            r.total_assets.to_string(),
            r.equity.to_string(),
            r.interbank.to_string(),
        ];
        row.extend(catalog.external_codes().iter().map(|c| {
            r.external_exposures
                .get(c)
                .copied()
                .unwrap_or(0.0)
                .to_string()
        }));
        csv.write_record(row)?;
    }
    csv.flush().map_err(|source| IngestError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}

/// Reads per-class price factors into catalog order.
pub fn parse_scenario<R: Read>(
    reader: R,
    label: &str,
    catalog: &AssetClassCatalog,
) -> Result<ShockScenario, IngestError> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["asset_code", "factor"] {
        return Err(IngestError::Parse {
            line: 1,
            column: headers.iter().collect::<Vec<_>>().join(","),
            reason: "expected header `asset_code,factor`".into(),
        });
    }
    let codes = catalog.external_codes();
    let mut factors: Vec<Option<f64>> = vec![None; codes.len()];
    for row in csv.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let raw_code = row.get(0).unwrap_or_default();
        let code: u16 =
            raw_code
                .trim_start_matches('c')
                .parse()
                .map_err(|_| IngestError::Parse {
                    line,
                    column: "asset_code".into(),
                    reason: format!("`{raw_code}` is not an asset code"),
                })?;
        let Some(k) = codes.iter().position(|&c| c == code) else {
            return Err(IngestError::Parse {
                line,
                column: "asset_code".into(),
                reason: format!("{code} is not an external asset class"),
            });
        };
        let factor = parse_number(row.get(1).unwrap_or_default(), line, "factor")?;
        if factor < 0.0 {
            return Err(IngestError::Parse {
                line,
                column: "factor".into(),
                reason: format!("negative factor {factor}"),
            });
        }
        if factors[k].replace(factor).is_some() {
            return Err(IngestError::Parse {
                line,
                column: "asset_code".into(),
                reason: format!("duplicate class {code}"),
            });
        }
    }
    let factors = factors
        .into_iter()
        .zip(&codes)
        .map(|(f, code)| {
            f.unwrap_or_else(|| {
                warn!("scenario has no factor for class {code}, using 1.0");
                1.0
            })
        })
        .collect();
    ShockScenario::new(label, factors).map_err(|e| IngestError::Parse {
        line: 0,
        column: "factor".into(),
        reason: e.to_string(),
    })
}

pub fn read_scenario(
    path: &Path,
    catalog: &AssetClassCatalog,
) -> Result<ShockScenario, IngestError> {
    let label = path.file_stem().map_or_else(
        || "scenario".to_string(),
        |s| s.to_string_lossy().into_owned(),
    );
    parse_scenario(open(path)?, &label, catalog)
}

/// `D_ik` = exposure of bank `i` to external class `k`, baseline prices one.
pub fn build_portfolio(records: &[BankRecord], catalog: &AssetClassCatalog) -> PortfolioMatrix {
    let codes = catalog.external_codes();
    let d = DMatrix::from_fn(records.len(), codes.len(), |i, k| {
        records[i]
            .external_exposures
            .get(&codes[k])
            .copied()
            .unwrap_or(0.0)
    });
    if d.iter().all(|&v| v == 0.0) {
        warn!("all external exposures are zero");
    }
    PortfolioMatrix::baseline(d).expect("validated records give a valid portfolio")
}

/// Interbank assets equal interbank liabilities: `a = l = c2100`.
pub fn derive_marginals(records: &[BankRecord]) -> Marginals {
    let v: Vec<f64> = records.iter().map(|r| r.interbank).collect();
    Marginals::symmetric(v).expect("validated records give valid marginals")
}

/// `(total_assets - equity - interbank) / total_assets` per bank.
pub fn derive_liability_ratios(records: &[BankRecord]) -> Result<Vec<f64>, IngestError> {
    records
        .iter()
        .map(|r| {
            let ratio = (r.total_assets - r.equity - r.interbank) / r.total_assets;
            if (0.0..1.0).contains(&ratio) {
                Ok(ratio)
            } else {
                Err(IngestError::Validation {
                    bank_id: r.bank_id.clone(),
                    reason: format!(
                        "equity {} plus interbank {} exceed total assets {}",
                        r.equity, r.interbank, r.total_assets
                    ),
                })
            }
        })
        .collect()
}
