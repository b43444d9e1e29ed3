//! Split-conformal baseline with constant-width intervals.
//!
//! The vanilla conformal procedure (VCP) calibrates one residual quantile on
//! held-out data: with n calibration residuals |ŷ − y| and miscoverage α,
//! the interval half-width is the r-th smallest residual with
//! r = ⌈(n + 1)(1 − α)⌉. Intervals are [ŷ − q, ŷ + q] everywhere — the same
//! width for every input — which gives finite-sample marginal coverage under
//! exchangeability but no input-adaptive sharpness. When r exceeds n (tiny
//! calibration sets or very small α) no finite quantile exists and the
//! interval is unbounded; that is a reportable state, not an error.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::pac::Interval;

/// Calibrated residual quantile. `q_hat` is `+∞` when the rank exceeds the
/// sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalQuantile {
    q_hat: f64,
    alpha: f64,
    n: usize,
}

impl ConformalQuantile {
    #[must_use]
    pub fn q_hat(self) -> f64 {
        self.q_hat
    }

    #[must_use]
    pub fn alpha(self) -> f64 {
        self.alpha
    }

    #[must_use]
    pub fn n(self) -> usize {
        self.n
    }

    /// False when the conformal rank exceeded the calibration size and the
    /// quantile degenerated to `+∞`.
    #[must_use]
    pub fn is_finite(self) -> bool {
        self.q_hat.is_finite()
    }
}

/// The conformal rank ⌈(n + 1)(1 − α)⌉, with values within 1e-9 of an
/// integer snapped to it first so that float representation error in α
/// cannot push the ceiling up a step (e.g. (99 + 1)·0.7 evaluating to
/// 70.000000000000001).
fn conformal_rank(n: usize, alpha: f64) -> usize {
    let raw = (n as f64 + 1.0) * (1.0 - alpha);
    let nearest = raw.round();
    let snapped = if (raw - nearest).abs() < 1e-9 {
        nearest
    } else {
        raw.ceil()
    };
    snapped as usize
}

/// Calibrates the residual quantile for miscoverage `alpha`.
///
/// # Errors
///
/// [`CoreError::EmptyInput`] for no residuals, [`CoreError::InvalidArgument`]
/// for α outside (0, 1) or non-finite residuals.
pub fn vcp_calibrate(residuals: &[f64], alpha: f64) -> Result<ConformalQuantile, CoreError> {
    if residuals.is_empty() {
        return Err(CoreError::EmptyInput("residuals"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CoreError::invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if let Some(bad) = residuals.iter().find(|r| !r.is_finite()) {
        return Err(CoreError::invalid(format!(
            "residuals must be finite, got {bad}"
        )));
    }
    let n = residuals.len();
    let rank = conformal_rank(n, alpha);
    let q_hat = if rank > n {
        f64::INFINITY
    } else {
        let mut sorted = residuals.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        sorted[rank - 1]
    };
    Ok(ConformalQuantile { q_hat, alpha, n })
}

/// The constant-width interval [ŷ − q̂, ŷ + q̂] around a point prediction.
/// An infinite quantile yields the unbounded interval (−∞, +∞) — check
/// [`Interval::is_bounded`] before aggregating widths.
///
/// # Errors
///
/// [`CoreError::InvalidArgument`] for a non-finite point prediction.
pub fn vcp_interval(
    point_prediction: f64,
    quantile: ConformalQuantile,
) -> Result<Interval, CoreError> {
    if !point_prediction.is_finite() {
        return Err(CoreError::invalid(format!(
            "point prediction must be finite, got {point_prediction}"
        )));
    }
    Interval::new(
        point_prediction - quantile.q_hat(),
        point_prediction + quantile.q_hat(),
    )
}
