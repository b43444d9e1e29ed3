//! Interval calibration with a PAC coverage certificate.
//!
//! Given a held-out set of Gaussian predictions with their true labels, the
//! calibrator finds the smallest width scale c such that the interval rule
//! [μ − c·σ, μ + c·σ] is *certified* to cover at least 1 − ε of future
//! examples with outer confidence 1 − δ. The certificate is exact: coverage
//! on the calibration set is a binomial count, and the Clopper–Pearson
//! lower bound on its success probability must clear 1 − ε.
//!
//! Because the covered count only changes when c crosses a normalized score
//! |y − μ|/σ, the optimum is an order statistic of the scores, found by a
//! binary search over the count k rather than a grid over c.

use serde::{Deserialize, Serialize};
use std::io::BufRead;

use crate::binomial::{cp_lower_bound, BinomialObservation, ConfidenceLevel};
use crate::error::CoreError;
use crate::regressor::GaussianPrediction;

/// Coverage requirement: miscoverage budget ε and significance level δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacTarget {
    epsilon: f64,
    delta: f64,
}

impl PacTarget {
    /// # Errors
    ///
    /// Both parameters must lie strictly inside (0, 1).
    pub fn new(epsilon: f64, delta: f64) -> Result<Self, CoreError> {
        for (name, value) in [("epsilon", epsilon), ("delta", delta)] {
            if !(value > 0.0 && value < 1.0) {
                return Err(CoreError::invalid(format!(
                    "{name} must lie in (0, 1), got {value}"
                )));
            }
        }
        Ok(Self { epsilon, delta })
    }

    #[must_use]
    pub fn epsilon(self) -> f64 {
        self.epsilon
    }

    #[must_use]
    pub fn delta(self) -> f64 {
        self.delta
    }
}

/// One calibration example: a predictive distribution and the observed label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationRecord {
    prediction: GaussianPrediction,
    y: f64,
}

impl CalibrationRecord {
    /// # Errors
    ///
    /// The label must be finite (σ > 0 is already enforced by
    /// [`GaussianPrediction`]).
    pub fn new(prediction: GaussianPrediction, y: f64) -> Result<Self, CoreError> {
        if !y.is_finite() {
            return Err(CoreError::invalid(format!("label must be finite, got {y}")));
        }
        Ok(Self { prediction, y })
    }

    #[must_use]
    pub fn prediction(self) -> GaussianPrediction {
        self.prediction
    }

    #[must_use]
    pub fn y(self) -> f64 {
        self.y
    }
}

/// Normalized residual s = |y − μ| / σ: the smallest scale c whose interval
/// covers this record. Coverage at scale c holds iff s ≤ c.
#[must_use]
pub fn normalized_score(record: CalibrationRecord) -> f64 {
    (record.y() - record.prediction().mu()).abs() / record.prediction().sigma()
}

/// Outcome of [`calibrate`], serializable as a flat JSON object.
///
/// When `feasible` is false — no scale can clear the bound at this (n, δ, ε)
/// — `c_star` and `k_required` are null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub c_star: Option<f64>,
    pub epsilon: f64,
    pub delta: f64,
    pub n: usize,
    pub k_required: Option<usize>,
    pub feasible: bool,
}

/// Finds the smallest width scale whose certified coverage reaches 1 − ε.
///
/// `k_required = min{k : cp_lower_bound(k, n, δ) ≥ 1 − ε}` and `c_star` is
/// the `k_required`-th smallest normalized score. Infeasibility (even k = n
/// cannot clear the bound) is reported through the `feasible` flag, not as
/// an error: the caller decides whether that aborts a run or just marks a
/// row.
///
/// # Errors
///
/// [`CoreError::EmptyInput`] when no records are given.
pub fn calibrate(
    records: &[CalibrationRecord],
    target: PacTarget,
) -> Result<CalibrationResult, CoreError> {
    if records.is_empty() {
        return Err(CoreError::EmptyInput("calibration records"));
    }
    let n = records.len();
    let level = ConfidenceLevel::new(target.delta()).expect("PacTarget keeps delta in (0, 1)");
    let required_coverage = 1.0 - target.epsilon();
    let bound_at = |k: usize| {
        let obs = BinomialObservation::new(k as u64, n as u64).expect("k <= n by construction");
        cp_lower_bound(obs, level)
    };

    if bound_at(n) < required_coverage {
        return Ok(CalibrationResult {
            c_star: None,
            epsilon: target.epsilon(),
            delta: target.delta(),
            n,
            k_required: None,
            feasible: false,
        });
    }

    // cp_lower_bound is nondecreasing in k, so the smallest admissible k is
    // found by binary search. k = 0 never qualifies (its bound is 0 < 1 − ε).
    let mut lo = 1;
    let mut hi = n;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if bound_at(mid) >= required_coverage {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }

    let mut scores: Vec<f64> = records.iter().map(|r| normalized_score(*r)).collect();
    scores.sort_unstable_by(f64::total_cmp);
    Ok(CalibrationResult {
        c_star: Some(scores[lo - 1]),
        epsilon: target.epsilon(),
        delta: target.delta(),
        n,
        k_required: Some(lo),
        feasible: true,
    })
}

/// A closed interval; endpoints may be infinite (see the conformal
/// baseline's unbounded marker) but never NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lower: f64,
    upper: f64,
}

impl Interval {
    /// # Errors
    ///
    /// Rejects NaN endpoints and `lower > upper`.
    pub fn new(lower: f64, upper: f64) -> Result<Self, CoreError> {
        if lower.is_nan() || upper.is_nan() {
            return Err(CoreError::invalid("interval endpoints must not be NaN"));
        }
        if lower > upper {
            return Err(CoreError::invalid(format!(
                "interval endpoints out of order: [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper })
    }

    #[must_use]
    pub fn lower(self) -> f64 {
        self.lower
    }

    #[must_use]
    pub fn upper(self) -> f64 {
        self.upper
    }

    #[must_use]
    pub fn width(self) -> f64 {
        self.upper - self.lower
    }

    /// Closed-interval membership; endpoints count as covered.
    #[must_use]
    pub fn contains(self, y: f64) -> bool {
        self.lower <= y && y <= self.upper
    }

    /// Both endpoints finite.
    #[must_use]
    pub fn is_bounded(self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    /// Clamps both endpoints into `[min, max]` — a post-hoc presentation aid
    /// for reporting on a bounded label range. Clipping never reorders the
    /// endpoints, but note that the clipped interval no longer carries the
    /// calibrated guarantee.
    ///
    /// # Errors
    ///
    /// Rejects NaN limits and `min > max`.
    pub fn clip(self, min: f64, max: f64) -> Result<Self, CoreError> {
        if min.is_nan() || max.is_nan() || min > max {
            return Err(CoreError::invalid(format!(
                "invalid clip range [{min}, {max}]"
            )));
        }
        Ok(Self {
            lower: self.lower.clamp(min, max),
            upper: self.upper.clamp(min, max),
        })
    }
}

/// The interval [μ − c·σ, μ + c·σ] for a calibrated scale c.
///
/// # Errors
///
/// [`CoreError::InvalidArgument`] unless `c` is finite and nonnegative.
pub fn build_interval(prediction: GaussianPrediction, c: f64) -> Result<Interval, CoreError> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(CoreError::invalid(format!(
            "width scale must be finite and nonnegative, got {c}"
        )));
    }
    let half = c * prediction.sigma();
    Interval::new(prediction.mu() - half, prediction.mu() + half)
}

/// Reads calibration records from CSV text with the exact header
/// `mu,sigma,y`, one record per line. Blank lines are ignored.
///
/// # Errors
///
/// [`CoreError::Parse`] (with a 1-based line number) for a wrong header,
/// a wrong field count, unparsable numbers, or values that violate record
/// invariants (σ ≤ 0, non-finite label).
pub fn read_records_csv<R: BufRead>(reader: R) -> Result<Vec<CalibrationRecord>, CoreError> {
    let mut records = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CoreError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if !saw_header {
            if text != "mu,sigma,y" {
                return Err(CoreError::Parse {
                    line: line_no,
                    message: format!("expected header `mu,sigma,y`, got `{text}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 3 {
            return Err(CoreError::Parse {
                line: line_no,
                message: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let mut values = [0.0; 3];
        for (slot, field) in values.iter_mut().zip(&fields) {
            *slot = field.trim().parse().map_err(|_| CoreError::Parse {
                line: line_no,
                message: format!("expected a number, got `{}`", field.trim()),
            })?;
        }
        let record = GaussianPrediction::new(values[0], values[1])
            .and_then(|p| CalibrationRecord::new(p, values[2]))
            .map_err(|e| CoreError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        records.push(record);
    }
    if !saw_header {
        return Err(CoreError::Parse {
            line: 1,
            message: "missing header `mu,sigma,y`".into(),
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(mu: f64, sigma: f64, y: f64) -> CalibrationRecord {
        CalibrationRecord::new(GaussianPrediction::new(mu, sigma).unwrap(), y).unwrap()
    }

    fn records_from_scores(scores: &[f64]) -> Vec<CalibrationRecord> {
        scores.iter().map(|&s| record(0.0, 1.0, s)).collect()
    }

    #[test]
    fn score_is_the_scaled_absolute_residual() {
        assert_eq!(normalized_score(record(5.0, 1.0, 5.0)), 0.0);
        assert_eq!(normalized_score(record(5.0, 2.0, 9.0)), 2.0);
        assert_eq!(normalized_score(record(3.0, 0.5, 2.0)), 2.0);
    }

    #[test]
    fn calibrate_picks_the_required_order_statistic() {
        // n = 4, ε = 0.2, δ = 0.5: only k = 4 clears the bound
        // (0.5^(1/4) ≈ 0.841 ≥ 0.8, while k = 3 gives ≈ 0.614), so c* is
        // the maximum score.
        let result = calibrate(
            &records_from_scores(&[0.5, 1.0, 1.5, 2.0]),
            PacTarget::new(0.2, 0.5).unwrap(),
        )
        .unwrap();
        assert!(result.feasible);
        assert_eq!(result.k_required, Some(4));
        assert_eq!(result.c_star, Some(2.0));
        assert_eq!(result.n, 4);
    }

    #[test]
    fn calibrate_reports_infeasible_targets() {
        // 0.001^(1/4) ≈ 0.178 < 0.95: no scale can be certified.
        let result = calibrate(
            &records_from_scores(&[0.1, 0.2, 0.3, 0.4]),
            PacTarget::new(0.05, 0.001).unwrap(),
        )
        .unwrap();
        assert!(!result.feasible);
        assert_eq!(result.c_star, None);
        assert_eq!(result.k_required, None);
        assert_eq!(result.n, 4);
    }

    #[test]
    fn tied_scores_collapse_to_one_candidate() {
        let result = calibrate(
            &records_from_scores(&[1.0; 100]),
            PacTarget::new(0.3, 0.05).unwrap(),
        )
        .unwrap();
        assert!(result.feasible);
        assert_eq!(result.c_star, Some(1.0));
    }

    #[test]
    fn calibrate_rejects_empty_input() {
        assert!(matches!(
            calibrate(&[], PacTarget::new(0.3, 0.05).unwrap()),
            Err(CoreError::EmptyInput(_))
        ));
    }

    #[test]
    fn target_validates_its_range() {
        assert!(PacTarget::new(0.0, 0.5).is_err());
        assert!(PacTarget::new(1.0, 0.5).is_err());
        assert!(PacTarget::new(0.5, 0.0).is_err());
        assert!(PacTarget::new(0.5, 1.0).is_err());
        assert!(PacTarget::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn build_interval_is_symmetric_about_the_mean() {
        let pred = GaussianPrediction::new(5.0, 1.0).unwrap();
        let iv = build_interval(pred, 2.0).unwrap();
        assert_eq!((iv.lower(), iv.upper()), (3.0, 7.0));

        let point = build_interval(pred, 0.0).unwrap();
        assert_eq!((point.lower(), point.upper()), (5.0, 5.0));
        assert!(point.contains(5.0));

        let pred = GaussianPrediction::new(7.2, 1.5).unwrap();
        let iv = build_interval(pred, 1.0364).unwrap();
        assert!((iv.lower() - 5.6454).abs() <= 1e-12);
        assert!((iv.upper() - 8.7546).abs() <= 1e-12);
        assert!((iv.width() - 3.1092).abs() <= 1e-12);
    }

    #[test]
    fn build_interval_rejects_negative_scales() {
        let pred = GaussianPrediction::new(0.0, 1.0).unwrap();
        assert!(build_interval(pred, -0.5).is_err());
        assert!(build_interval(pred, f64::NAN).is_err());
        assert!(build_interval(pred, f64::INFINITY).is_err());
    }

    #[test]
    fn interval_invariants() {
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        let unbounded = Interval::new(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!(!unbounded.is_bounded());
        assert!(unbounded.contains(1e300));

        let iv = Interval::new(-2.0, 13.0).unwrap();
        let clipped = iv.clip(0.0, 10.0).unwrap();
        assert_eq!((clipped.lower(), clipped.upper()), (0.0, 10.0));
        assert!(iv.clip(3.0, 1.0).is_err());
    }

    #[test]
    fn result_serializes_with_flat_field_names() {
        let result = calibrate(
            &records_from_scores(&[0.5, 1.0, 1.5, 2.0]),
            PacTarget::new(0.2, 0.5).unwrap(),
        )
        .unwrap();
        let json = serde_json::to_value(&result).unwrap();
        let obj = json.as_object().unwrap();
        for key in ["c_star", "epsilon", "delta", "n", "k_required", "feasible"] {
            assert!(obj.contains_key(key), "missing key {key}");
        }
        assert_eq!(obj.len(), 6);
        assert_eq!(obj["c_star"].as_f64(), Some(2.0));

        let infeasible = calibrate(
            &records_from_scores(&[0.1]),
            PacTarget::new(0.05, 0.5).unwrap(),
        )
        .unwrap();
        let json = serde_json::to_value(&infeasible).unwrap();
        assert!(json["c_star"].is_null());
        assert!(json["k_required"].is_null());
    }

    #[test]
    fn csv_reader_parses_and_validates() {
        let text = "mu,sigma,y\n1.0,0.5,1.2\n-3.5,2.0,-3.0\n\n";
        let records = read_records_csv(text.as_bytes()).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].prediction().mu(), 1.0);
        assert_eq!(records[1].y(), -3.0);

        for bad in [
            "sigma,mu,y\n1,1,1\n",
            "mu,sigma,y\n1.0,0.5\n",
            "mu,sigma,y\n1.0,abc,1.0\n",
            "mu,sigma,y\n1.0,-2.0,1.0\n",
            "",
        ] {
            assert!(
                matches!(
                    read_records_csv(bad.as_bytes()),
                    Err(CoreError::Parse { .. })
                ),
                "accepted {bad:?}"
            );
        }
    }
}
