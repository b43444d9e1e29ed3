//! Evaluation metrics and visual-acuity label conversions.
//!
//! Coverage, width, and error metrics operate on [`EvaluatedExample`]s —
//! (label, prediction, optional interval) triples. The macro-averaged
//! variants weight every label class equally regardless of how many
//! examples it has, which is what makes them informative on the heavily
//! imbalanced acuity scale. Label conversions cover the 11-level klass
//! scale (integer 0–10 for decimal acuities 0.0–1.0), its 4-level coarse
//! grouping, and the logarithmic letter score.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::pac::Interval;

/// An 11-level visual-acuity class: integer 0..=10, where klass k stands
/// for decimal acuity k/10.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VaLabel(u8);

impl VaLabel {
    /// # Errors
    ///
    /// Rejects values above 10.
    pub fn new(klass: u8) -> Result<Self, CoreError> {
        if klass <= 10 {
            Ok(Self(klass))
        } else {
            Err(CoreError::invalid(format!(
                "VA klass must lie in [0, 10], got {klass}"
            )))
        }
    }

    /// Nearest-integer klass for a continuous label, clamped into [0, 10].
    /// This is the only place labels are clamped; continuous labels keep
    /// their raw values everywhere else.
    #[must_use]
    pub fn from_continuous(y: f64) -> Self {
        Self(y.round().clamp(0.0, 10.0) as u8)
    }

    #[must_use]
    pub fn klass(self) -> u8 {
        self.0
    }

    /// The decimal acuity this klass stands for (k/10).
    #[must_use]
    pub fn decimal_acuity(self) -> f64 {
        f64::from(self.0) / 10.0
    }
}

/// Coarse 4-level grouping of the 11-level scale:
/// 0 → 0, {1, 2} → 1, {3, 4, 5, 6, 7} → 2, {8, 9, 10} → 3.
#[must_use]
pub fn map_to_4level(label: VaLabel) -> u8 {
    match label.klass() {
        0 => 0,
        1 | 2 => 1,
        3..=7 => 2,
        _ => 3,
    }
}

/// One test example: true label, predictive mean and scale, and the
/// prediction interval if one was constructed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluatedExample {
    y: f64,
    mu: f64,
    sigma: f64,
    interval: Option<Interval>,
}

impl EvaluatedExample {
    /// # Errors
    ///
    /// Rejects non-finite `y`/`mu` and any `sigma ≤ 0`.
    pub fn new(y: f64, mu: f64, sigma: f64, interval: Option<Interval>) -> Result<Self, CoreError> {
        if !y.is_finite() || !mu.is_finite() {
            return Err(CoreError::invalid(format!(
                "label and mean must be finite, got y = {y}, mu = {mu}"
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(CoreError::invalid(format!(
                "scale must be finite and positive, got {sigma}"
            )));
        }
        Ok(Self {
            y,
            mu,
            sigma,
            interval,
        })
    }

    #[must_use]
    pub fn y(self) -> f64 {
        self.y
    }

    #[must_use]
    pub fn mu(self) -> f64 {
        self.mu
    }

    #[must_use]
    pub fn sigma(self) -> f64 {
        self.sigma
    }

    #[must_use]
    pub fn interval(self) -> Option<Interval> {
        self.interval
    }

    /// Whether the interval contains the true label (closed membership).
    /// `None` when no interval is attached.
    #[must_use]
    pub fn covered(self) -> Option<bool> {
        self.interval.map(|iv| iv.contains(self.y))
    }

    /// |y − μ|.
    #[must_use]
    pub fn abs_error(self) -> f64 {
        (self.y - self.mu).abs()
    }

    /// The 11-level klass of the true label.
    #[must_use]
    pub fn label(self) -> VaLabel {
        VaLabel::from_continuous(self.y)
    }
}

fn require_nonempty(examples: &[EvaluatedExample]) -> Result<(), CoreError> {
    if examples.is_empty() {
        Err(CoreError::EmptyInput("examples"))
    } else {
        Ok(())
    }
}

fn require_interval(example: &EvaluatedExample) -> Result<Interval, CoreError> {
    example
        .interval()
        .ok_or(CoreError::EmptyInput("interval on example"))
}

/// Percentage of examples whose interval contains the true label.
///
/// # Errors
///
/// Empty input or any example without an interval.
pub fn coverage_rate(examples: &[EvaluatedExample]) -> Result<f64, CoreError> {
    require_nonempty(examples)?;
    let mut covered = 0usize;
    for example in examples {
        if require_interval(example)?.contains(example.y()) {
            covered += 1;
        }
    }
    Ok(100.0 * covered as f64 / examples.len() as f64)
}

/// Mean interval width.
///
/// # Errors
///
/// Empty input, a missing interval, or an unbounded one (a width average
/// with an infinite term would be meaningless, not merely large).
pub fn average_width(examples: &[EvaluatedExample]) -> Result<f64, CoreError> {
    require_nonempty(examples)?;
    let mut total = 0.0;
    for example in examples {
        let interval = require_interval(example)?;
        if !interval.is_bounded() {
            return Err(CoreError::UnboundedInterval);
        }
        total += interval.width();
    }
    Ok(total / examples.len() as f64)
}

/// Plain mean absolute error of the point predictions.
///
/// # Errors
///
/// Empty input.
pub fn mean_absolute_error(examples: &[EvaluatedExample]) -> Result<f64, CoreError> {
    require_nonempty(examples)?;
    Ok(examples.iter().map(|e| e.abs_error()).sum::<f64>() / examples.len() as f64)
}

/// Macro-averaged MAE: the unweighted mean over present 11-level classes of
/// the per-class mean absolute error. A class with 10 000 examples counts
/// exactly as much as one with 3.
///
/// # Errors
///
/// Empty input.
pub fn macro_mae(examples: &[EvaluatedExample]) -> Result<f64, CoreError> {
    require_nonempty(examples)?;
    let mut sums: BTreeMap<u8, (f64, usize)> = BTreeMap::new();
    for example in examples {
        let entry = sums.entry(example.label().klass()).or_insert((0.0, 0));
        entry.0 += example.abs_error();
        entry.1 += 1;
    }
    let per_class_mean = sums.values().map(|(sum, count)| sum / *count as f64);
    Ok(per_class_mean.sum::<f64>() / sums.len() as f64)
}

/// Macro-averaged interval accuracy over the 4-level grouping, in percent.
/// An example counts as correct when its interval contains the true label;
/// accuracies are averaged with equal weight over the 4-level classes that
/// occur in the input.
///
/// # Errors
///
/// Empty input or any example without an interval.
pub fn interval_ma_acc(examples: &[EvaluatedExample]) -> Result<f64, CoreError> {
    require_nonempty(examples)?;
    let mut counts: BTreeMap<u8, (usize, usize)> = BTreeMap::new();
    for example in examples {
        let covered = require_interval(example)?.contains(example.y());
        let entry = counts
            .entry(map_to_4level(example.label()))
            .or_insert((0, 0));
        entry.0 += usize::from(covered);
        entry.1 += 1;
    }
    let per_class_acc = counts
        .values()
        .map(|(hit, total)| *hit as f64 / *total as f64);
    Ok(100.0 * per_class_acc.sum::<f64>() / counts.len() as f64)
}

/// Letter score L = 85 + 50·log₁₀(F) for a decimal acuity F.
///
/// # Errors
///
/// Requires 0 < F ≤ 1; apply the klass-0 floor (see
/// [`letter_score_for_label`]) before calling if F may be zero.
pub fn letter_score(decimal_acuity: f64) -> Result<f64, CoreError> {
    if !(decimal_acuity > 0.0 && decimal_acuity <= 1.0) {
        return Err(CoreError::invalid(format!(
            "decimal acuity must lie in (0, 1], got {decimal_acuity}"
        )));
    }
    Ok(85.0 + 50.0 * decimal_acuity.log10())
}

/// A letter score plus a flag marking that the undefined klass-0 input was
/// floored to reach it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LetterScore {
    pub value: f64,
    pub floored: bool,
}

/// Letter score of a klass label. Klass 0 maps to decimal acuity 0.0, where
/// the logarithm is undefined; it is floored to 0.01 and flagged so reports
/// can mark the substitution.
#[must_use]
pub fn letter_score_for_label(label: VaLabel) -> LetterScore {
    let (acuity, floored) = if label.klass() == 0 {
        (0.01, true)
    } else {
        (label.decimal_acuity(), false)
    };
    let value = letter_score(acuity).expect("floored acuity is in (0, 1]");
    LetterScore { value, floored }
}

/// Shares of letter-score errors in the ranges [0, 5], [6, 10], [11, ∞),
/// in percent. Always sums to 100 within float rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRangeHistogram {
    pub pct_0_5: f64,
    pub pct_6_10: f64,
    pub pct_11_plus: f64,
}

/// Buckets letter-score errors into the three ranges. Errors are rounded to
/// the nearest integer first so the integer-labelled buckets partition the
/// line: 5.4 falls in [0, 5], 5.5 rounds up into [6, 10].
///
/// # Errors
///
/// Empty input, or any negative or non-finite error.
pub fn error_range_distribution(letter_errors: &[f64]) -> Result<ErrorRangeHistogram, CoreError> {
    if letter_errors.is_empty() {
        return Err(CoreError::EmptyInput("letter errors"));
    }
    let mut buckets = [0usize; 3];
    for &error in letter_errors {
        if !error.is_finite() || error < 0.0 {
            return Err(CoreError::invalid(format!(
                "letter-score errors must be finite and nonnegative, got {error}"
            )));
        }
        let rounded = error.round();
        let slot = if rounded <= 5.0 {
            0
        } else if rounded <= 10.0 {
            1
        } else {
            2
        };
        buckets[slot] += 1;
    }
    let scale = 100.0 / letter_errors.len() as f64;
    Ok(ErrorRangeHistogram {
        pct_0_5: buckets[0] as f64 * scale,
        pct_6_10: buckets[1] as f64 * scale,
        pct_11_plus: buckets[2] as f64 * scale,
    })
}

/// Per-bin summary produced by [`equal_mass_bins`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBin {
    pub mean_abs_error: f64,
    pub mean_sigma: f64,
    pub count: usize,
}

/// Sorts examples by absolute error and splits them into `n_bins` contiguous
/// groups of near-equal size (sizes differ by at most one; earlier bins take
/// the remainder). Returns per-bin means of the absolute error and of the
/// predicted σ, in bin order — the raw material for an error-vs-uncertainty
/// calibration plot.
///
/// # Errors
///
/// `n_bins == 0`, empty input, or fewer examples than bins.
pub fn equal_mass_bins(
    examples: &[EvaluatedExample],
    n_bins: usize,
) -> Result<Vec<ErrorBin>, CoreError> {
    if n_bins == 0 {
        return Err(CoreError::invalid("n_bins must be at least 1"));
    }
    require_nonempty(examples)?;
    if examples.len() < n_bins {
        return Err(CoreError::invalid(format!(
            "cannot spread {} examples over {n_bins} bins",
            examples.len()
        )));
    }
    let mut sorted: Vec<&EvaluatedExample> = examples.iter().collect();
    sorted.sort_by(|a, b| f64::total_cmp(&a.abs_error(), &b.abs_error()));

    let base = examples.len() / n_bins;
    let remainder = examples.len() % n_bins;
    let mut bins = Vec::with_capacity(n_bins);
    let mut start = 0;
    for b in 0..n_bins {
        let size = base + usize::from(b < remainder);
        let chunk = &sorted[start..start + size];
        start += size;
        let inv = 1.0 / size as f64;
        bins.push(ErrorBin {
            mean_abs_error: chunk.iter().map(|e| e.abs_error()).sum::<f64>() * inv,
            mean_sigma: chunk.iter().map(|e| e.sigma()).sum::<f64>() * inv,
            count: size,
        });
    }
    Ok(bins)
}

/// Spearman rank correlation between two equally long sequences, with ties
/// resolved by mid-ranks. Handy for checking that binned uncertainty tracks
/// binned error.
///
/// # Errors
///
/// Length mismatch, fewer than two points, or zero variance in either
/// sequence (the correlation is undefined there).
pub fn spearman_rank(xs: &[f64], ys: &[f64]) -> Result<f64, CoreError> {
    if xs.len() != ys.len() {
        return Err(CoreError::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(CoreError::invalid(
            "Spearman correlation needs at least two points",
        ));
    }
    let rx = mid_ranks(xs)?;
    let ry = mid_ranks(ys)?;
    let n = xs.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mean) * (b - mean);
        var_x += (a - mean) * (a - mean);
        var_y += (b - mean) * (b - mean);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(CoreError::invalid(
            "Spearman correlation undefined for constant input",
        ));
    }
    Ok(cov / (var_x * var_y).sqrt())
}

fn mid_ranks(values: &[f64]) -> Result<Vec<f64>, CoreError> {
    if values.iter().any(|v| v.is_nan()) {
        return Err(CoreError::invalid("cannot rank NaN values"));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| f64::total_cmp(&values[a], &values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mid;
        }
        i = j + 1;
    }
    Ok(ranks)
}
