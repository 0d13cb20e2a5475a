//! Stress testing for interdependent banking systems.
//!
//! The crate covers the full chain from published balance-sheet aggregates to
//! failure hierarchies:
//!
//! * [`ingest`] reads bank rosters and shock scenarios from CSV,
//! * [`reconstruct`] builds bilateral exposure matrices from per-bank
//!   interbank totals (minimum density, random iterative fill, maximum entropy),
//! * [`model`] turns exposures and external portfolios into cross-holding
//!   fractions, capital ratios and the interdependency matrix,
//! * [`cascade`] runs the failure-hierarchy iteration under a price shock,
//! * [`netstats`] summarises a reconstructed network,
//! * [`pipeline`] and [`export`] orchestrate runs and write reports.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod cascade;
pub mod export;
pub mod ingest;
pub mod linalg;
pub mod model;
pub mod netstats;
pub mod pipeline;
pub mod reconstruct;

pub use cascade::{run_cascade, CascadeResult, FailureParams, ShockScenario};
pub use model::{CapitalRatios, FractionMatrix, InterdependencyMatrix, PortfolioMatrix};
pub use netstats::{core_periphery_fit, network_statistics, NetworkStats};
pub use reconstruct::{ExposureMatrix, Marginals, Method};
