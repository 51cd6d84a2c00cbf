//! Coverage analysis for LEO downlinks under residual Doppler.
//!
//! A satellite at altitude `H_S` illuminates a disc cell with its beam. The
//! cell-center Doppler is pre-compensated; what remains per terminal is a
//! residual offset that leaks power into neighboring OFDM subcarriers. The
//! crate computes the closed-form coverage probability, an exact numeric
//! reference, and Monte-Carlo estimates, and drives parameter sweeps.

// `!(x > 0.0)` is used on purpose so NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coverage;
pub mod doppler;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod numeric;
pub mod ofdm;
pub mod scenario;
pub mod sweep;

pub use coverage::{
    coverage, coverage_curve, coverage_exact_numeric, coverage_ideal, coverage_residual, coverage_uncompensated,
    CoverageCurve, CoverageMode, CoverageQuery,
};
pub use doppler::{make_context, residual_doppler, DopplerContext, DopplerResult};
pub use error::{Error, Result};
pub use geometry::{distance_cdf, sample_terminal, TerminalSample};
pub use montecarlo::{
    estimate_coverage, estimate_coverage_curve, estimate_coverage_modes, validate, McConfig, McEstimate, McMode,
    ValidationReport, XminModel,
};
pub use ofdm::{sinc, sinc_inverse, sinr, sinr_with_channel_gain, LinkBudget, SinrSample};
pub use scenario::{db_to_linear, linear_to_db, BandLabel, ScenarioConfig, ScenarioInputs};
pub use sweep::{
    figure_preset, run_figure, run_sweep, FigureName, FigureSpec, SweepMode, SweepSpec, SweepVariable, Table,
};
