//! Synthetic regression data in three flavors: constant noise, smoothly
//! input-dependent noise, and a visual-acuity profile that reproduces the
//! heavy class imbalance of real clinical data (39 % of examples in the top
//! class). Ground-truth means and scales are kept alongside the labels so
//! tests can inject well-specified predictions and shift experiments can
//! inflate exactly the noise component.

use std::fmt;
use std::str::FromStr;

use pacint_core::metrics::VaLabel;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::HarnessError;

/// Empirical class counts on the 11-level acuity scale, klass 0 through 10.
/// The distribution is dominated by the top class (21 568 of 54 781).
pub const VA_CLASS_COUNTS: [u64; 11] = [
    3274, 2164, 1647, 2091, 2005, 3240, 3803, 4261, 4370, 6358, 21568,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseProfile {
    /// y = g(x) + 0.5·ξ — one global noise level.
    Homoscedastic,
    /// y = g(x) + σ(x)·ξ with σ(x) ∈ (0.3, 1.2) driven by one direction of x.
    Heteroscedastic,
    /// Labels cluster around integer acuity classes drawn from
    /// [`VA_CLASS_COUNTS`]; features carry the class plus noise.
    ImbalancedVa,
}

impl NoiseProfile {
    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            Self::Homoscedastic => "homoscedastic",
            Self::Heteroscedastic => "heteroscedastic",
            Self::ImbalancedVa => "imbalanced-va",
        }
    }
}

impl fmt::Display for NoiseProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseProfile {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "homoscedastic" => Ok(Self::Homoscedastic),
            "heteroscedastic" => Ok(Self::Heteroscedastic),
            "imbalanced-va" => Ok(Self::ImbalancedVa),
            other => Err(HarnessError::usage(format!(
                "unknown noise profile `{other}` (expected homoscedastic, heteroscedastic, or imbalanced-va)"
            ))),
        }
    }
}

/// A generated dataset. Labels stay continuous and unclamped; the 11-level
/// view is derived on demand via [`SyntheticDataset::va_label`]. The true
/// mean and scale of every label's distribution are recorded for oracle
/// predictions and for noise-only label transformations.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    pub true_mu: Vec<f64>,
    pub true_sigma: Vec<f64>,
}

impl SyntheticDataset {
    #[must_use]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The clamped 11-level class of example `i`.
    #[must_use]
    pub fn va_label(&self, i: usize) -> VaLabel {
        VaLabel::from_continuous(self.labels[i])
    }

    /// The examples at `indices`, in that order.
    #[must_use]
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            true_mu: indices.iter().map(|&i| self.true_mu[i]).collect(),
            true_sigma: indices.iter().map(|&i| self.true_sigma[i]).collect(),
        }
    }

    /// Rescales every label's noise component about its true mean:
    /// y ← μ + factor·(y − μ). Factor 1 is the identity.
    pub fn inflate_noise(&mut self, factor: f64) {
        for (y, mu) in self.labels.iter_mut().zip(&self.true_mu) {
            *y = mu + factor * (*y - mu);
        }
    }
}

/// The label-noise multiplier encoded by a severity knob: severity 0 means
/// "no shift" (factor 1); any other value is used directly.
#[must_use]
pub fn shift_factor(severity: f64) -> f64 {
    if severity == 0.0 {
        1.0
    } else {
        severity
    }
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Draws `n_examples` i.i.d. examples of the given profile.
///
/// For the continuous profiles the mean surface is g(x) = 5 + 2·(w·x) with
/// w the unit diagonal direction, so labels concentrate on the acuity range
/// [0, 10]. The heteroscedastic scale is σ(x) = 0.3 + 0.9·sigmoid(2·(u·x))
/// with u an alternating-sign unit vector, hence σ ∈ (0.3, 1.2).
///
/// # Errors
///
/// Zero examples or zero feature dimensions.
pub fn generate(
    profile: NoiseProfile,
    n_examples: usize,
    feature_dim: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SyntheticDataset, HarnessError> {
    if n_examples == 0 {
        return Err(HarnessError::usage("n_examples must be at least 1"));
    }
    if feature_dim == 0 {
        return Err(HarnessError::usage("feature_dim must be at least 1"));
    }

    let d = feature_dim;
    let inv_sqrt_d = 1.0 / (d as f64).sqrt();
    let mut features = Vec::with_capacity(n_examples);
    let mut labels = Vec::with_capacity(n_examples);
    let mut true_mu = Vec::with_capacity(n_examples);
    let mut true_sigma = Vec::with_capacity(n_examples);

    let cumulative: Vec<u64> = VA_CLASS_COUNTS
        .iter()
        .scan(0u64, |acc, &c| {
            *acc += c;
            Some(*acc)
        })
        .collect();
    let total = *cumulative.last().expect("counts table is nonempty");

    for _ in 0..n_examples {
        match profile {
            NoiseProfile::Homoscedastic | NoiseProfile::Heteroscedastic => {
                let x: Vec<f64> = (0..d)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let w_dot: f64 = x.iter().sum::<f64>() * inv_sqrt_d;
                let mu = 5.0 + 2.0 * w_dot;
                let sigma = match profile {
                    NoiseProfile::Homoscedastic => 0.5,
                    _ => {
                        let u_dot: f64 = x
                            .iter()
                            .enumerate()
                            .map(|(j, v)| if j % 2 == 0 { *v } else { -*v })
                            .sum::<f64>()
                            * inv_sqrt_d;
                        0.3 + 0.9 * sigmoid(2.0 * u_dot)
                    }
                };
                let noise: f64 = rng.sample(StandardNormal);
                features.push(x);
                labels.push(mu + sigma * noise);
                true_mu.push(mu);
                true_sigma.push(sigma);
            }
            NoiseProfile::ImbalancedVa => {
                let draw = rng.random_range(0..total);
                let klass = cumulative
                    .iter()
                    .position(|&c| draw < c)
                    .expect("draw < total");
                let mu = klass as f64;
                let sigma = 0.15;
                let x: Vec<f64> = (0..d)
                    .map(|_| (mu - 5.0) / 5.0 + 0.25 * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let noise: f64 = rng.sample(StandardNormal);
                features.push(x);
                labels.push(mu + sigma * noise);
                true_mu.push(mu);
                true_sigma.push(sigma);
            }
        }
    }

    Ok(SyntheticDataset {
        features,
        labels,
        true_mu,
        true_sigma,
    })
}

/// Splits into (train, validation, test) parts whose sizes are the rounded
/// ratio shares, assigning shuffled indices in that order.
///
/// # Errors
///
/// [`HarnessError::DegenerateSplit`] when any part would be empty.
pub fn split(
    dataset: &SyntheticDataset,
    ratio: (f64, f64, f64),
    rng: &mut ChaCha8Rng,
) -> Result<(SyntheticDataset, SyntheticDataset, SyntheticDataset), HarnessError> {
    let n = dataset.len();
    let n_train = (ratio.0 * n as f64).round() as usize;
    let n_val = (ratio.1 * n as f64).round() as usize;
    let n_test = n.checked_sub(n_train + n_val).ok_or_else(|| {
        HarnessError::DegenerateSplit(format!(
            "rounded train/validation sizes ({n_train}, {n_val}) exceed n = {n}"
        ))
    })?;
    if n_train == 0 || n_val == 0 || n_test == 0 {
        return Err(HarnessError::DegenerateSplit(format!(
            "ratio {ratio:?} at n = {n} gives part sizes ({n_train}, {n_val}, {n_test})"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let train = dataset.subset(&order[..n_train]);
    let val = dataset.subset(&order[n_train..n_train + n_val]);
    let test = dataset.subset(&order[n_train + n_val..]);
    Ok((train, val, test))
}
