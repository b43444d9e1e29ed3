//! Distribution-free prediction intervals with PAC coverage guarantees,
//! plus the pieces needed to use them end to end: an exact binomial
//! confidence bound, a small heteroscedastic Gaussian regressor, a split
//! conformal baseline, and evaluation metrics for the 11-level visual
//! acuity scale.
//!
//! The central workflow:
//!
//! 1. fit a [`regressor::RegressorModel`] that predicts a mean and a
//!    per-example scale,
//! 2. turn a held-out calibration set into [`pac::CalibrationRecord`]s and
//!    run [`pac::calibrate`] for a scale multiplier `c*`,
//! 3. build intervals `[μ − c*σ, μ + c*σ]` with [`pac::build_interval`],
//! 4. score them with the [`metrics`] module.
//!
//! The guarantee is probably-approximately-correct: with probability at
//! least `1 − δ` over the draw of the calibration set, the interval rule
//! covers at least a `1 − ε` fraction of future examples. Feasibility
//! depends only on `(n, ε, δ)`; when the calibration set is too small the
//! result says so instead of fabricating an interval.

pub mod binomial;
pub mod conformal;
pub mod error;
pub mod metrics;
pub mod normal;
pub mod pac;
pub mod regressor;

pub use binomial::{cp_lower_bound, BinomialObservation, ConfidenceLevel};
pub use conformal::{vcp_calibrate, vcp_interval, ConformalQuantile};
pub use error::CoreError;
pub use metrics::{
    average_width, coverage_rate, equal_mass_bins, error_range_distribution, interval_ma_acc,
    letter_score, letter_score_for_label, macro_mae, map_to_4level, mean_absolute_error,
    spearman_rank, ErrorBin, ErrorRangeHistogram, EvaluatedExample, LetterScore, VaLabel,
};
pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile};
pub use pac::{
    build_interval, calibrate, normalized_score, read_records_csv, CalibrationRecord,
    CalibrationResult, Interval, PacTarget,
};
pub use regressor::{nll_loss, param_count, GaussianPrediction, RegressorModel, TrainConfig};
