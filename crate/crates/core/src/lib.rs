//! Analysis of mean-velocity profiles from zero-pressure-gradient turbulent
//! boundary layers.
//!
//! The crate fits each profile's intermediate region two ways — the
//! Reynolds-number-dependent scaling (power) law and the classical
//! logarithmic law — and runs the full processing pipeline on top of the
//! fits: two-region broken-line segmentation in double-log coordinates,
//! the two-equation solve for ln Re from the fitted amplitude and exponent,
//! the geometric-mean effective Reynolds number and its length scale, the
//! Gamma diagnostic (local log-log slope), and the universal-collapse
//! transform onto the bisectrix.
//!
//! Modules:
//! * [`profile`] — core data types and law evaluators.
//! * [`ingest`] — the canonical profile file format and raw-table parsing.
//! * [`regression`] — OLS line fits and the broken-line breakpoint search.
//! * [`scaling`] — the scaling law, its inversion, and the effective Re.
//! * [`diagnostics`] — Gamma series and the psi collapse transform.
//! * [`synthetic`] — deterministic profile generator used as the oracle.
//! * [`report`] — per-run pipeline, batch orchestration, CSV/JSON output.
//! * [`svg`] — static profile and collapse plots.
//! * [`rng`] — pinned, portable random sampling for the generator.
//!
//! Batch analysis is data-parallel via rayon when the default `parallel`
//! feature is enabled; disabling it swaps in a sequential fallback with
//! identical results and ordering.

pub mod diagnostics;
pub mod error;
pub mod ingest;
mod par;
pub mod profile;
pub mod regression;
pub mod report;
pub mod rng;
pub mod scaling;
pub mod svg;
pub mod synthetic;

pub use error::{Error, Result};
pub use profile::{
    LogLawFit, PowerLawFit, ProfilePoint, RunMetadata, SegmentedFit, VelocityProfile, Window,
};
pub use report::{AnalysisConfig, BatchSummary, RunAnalysis, RunReport};
