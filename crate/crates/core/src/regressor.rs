//! Two-layer heteroscedastic Gaussian regressor.
//!
//! The network maps a feature vector through one tanh hidden layer into two
//! scalar heads: the predictive mean μ and the *log* of the predictive scale
//! σ. Exponentiating the second head keeps σ strictly positive without
//! constraining the optimizer. Training minimizes the Gaussian negative
//! log-likelihood with plain mini-batch gradient descent at a fixed learning
//! rate; initialization and epoch shuffling come from a seeded generator, so
//! a fit is fully determined by its configuration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

use crate::error::CoreError;

/// A Gaussian predictive distribution (μ, σ) with σ strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPrediction {
    mu: f64,
    sigma: f64,
}

impl GaussianPrediction {
    /// # Errors
    ///
    /// Rejects non-finite values and any `sigma ≤ 0`.
    pub fn new(mu: f64, sigma: f64) -> Result<Self, CoreError> {
        if !mu.is_finite() {
            return Err(CoreError::invalid(format!("mean must be finite, got {mu}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(CoreError::invalid(format!(
                "scale must be finite and positive, got {sigma}"
            )));
        }
        Ok(Self { mu, sigma })
    }

    #[must_use]
    pub fn mu(self) -> f64 {
        self.mu
    }

    #[must_use]
    pub fn sigma(self) -> f64 {
        self.sigma
    }
}

/// Hyperparameters for [`RegressorModel::fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub hidden_dim: usize,
    pub seed: u64,
}

impl TrainConfig {
    /// # Errors
    ///
    /// Rejects a non-positive or non-finite learning rate and any zero
    /// `epochs`, `batch_size`, or `hidden_dim`.
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(CoreError::InvalidConfig(format!(
                "learning_rate must be finite and positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(CoreError::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(CoreError::InvalidConfig(
                "batch_size must be at least 1".into(),
            ));
        }
        if self.hidden_dim == 0 {
            return Err(CoreError::InvalidConfig(
                "hidden_dim must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Gaussian negative log-likelihood of one observation:
/// ½·ln(2π·σ²) + (y − μ)² / (2σ²).
///
/// Can be negative for small σ; minimized over μ at μ = y.
#[must_use]
pub fn nll_loss(prediction: GaussianPrediction, y: f64) -> f64 {
    let residual = y - prediction.mu();
    let sigma = prediction.sigma();
    0.5 * (2.0 * std::f64::consts::PI * sigma * sigma).ln()
        + residual * residual / (2.0 * sigma * sigma)
}

/// The trained two-layer network.
///
/// Parameters live in one flat vector so they can be updated, differentiated,
/// and serialized uniformly. The layout, with `d = feature_dim` and
/// `h = hidden_dim`:
///
/// | slice                          | contents                              |
/// |--------------------------------|---------------------------------------|
/// | `[0, h·d)`                     | hidden weights, row-major (unit j at `j·d..(j+1)·d`) |
/// | `[h·d, h·d + h)`               | hidden biases                         |
/// | `[h·d + h, h·d + 2h)`          | μ-head weights                        |
/// | `h·d + 2h`                     | μ-head bias                           |
/// | `[h·d + 2h + 1, h·d + 3h + 1)` | log-σ-head weights                    |
/// | `h·d + 3h + 1`                 | log-σ-head bias                       |
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorModel {
    feature_dim: usize,
    hidden_dim: usize,
    params: Vec<f64>,
}

/// Number of parameters implied by the dimensions.
#[must_use]
pub fn param_count(feature_dim: usize, hidden_dim: usize) -> usize {
    hidden_dim * (feature_dim + 3) + 2
}

impl RegressorModel {
    /// A model with every parameter zero: predicts μ = 0 and σ = e⁰ = 1
    /// for any input. Mostly useful as a fixed point in tests.
    ///
    /// # Errors
    ///
    /// Rejects zero dimensions.
    pub fn zeroed(feature_dim: usize, hidden_dim: usize) -> Result<Self, CoreError> {
        Self::from_params(
            feature_dim,
            hidden_dim,
            vec![0.0; param_count(feature_dim, hidden_dim)],
        )
    }

    /// Builds a model from an explicit parameter vector in the documented
    /// flat layout.
    ///
    /// # Errors
    ///
    /// Rejects zero dimensions, a vector of the wrong length, and non-finite
    /// parameters.
    pub fn from_params(
        feature_dim: usize,
        hidden_dim: usize,
        params: Vec<f64>,
    ) -> Result<Self, CoreError> {
        if feature_dim == 0 || hidden_dim == 0 {
            return Err(CoreError::invalid("model dimensions must be positive"));
        }
        let expected = param_count(feature_dim, hidden_dim);
        if params.len() != expected {
            return Err(CoreError::DimensionMismatch {
                expected,
                actual: params.len(),
            });
        }
        if let Some(bad) = params.iter().find(|p| !p.is_finite()) {
            return Err(CoreError::invalid(format!("non-finite parameter {bad}")));
        }
        Ok(Self {
            feature_dim,
            hidden_dim,
            params,
        })
    }

    #[must_use]
    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    #[must_use]
    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    #[must_use]
    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Predictive distribution for one feature vector.
    ///
    /// # Errors
    ///
    /// [`CoreError::DimensionMismatch`] if the input length differs from
    /// `feature_dim`; [`CoreError::InvalidArgument`] if the forward pass
    /// leaves the finite range (possible only for extreme parameters).
    pub fn predict(&self, features: &[f64]) -> Result<GaussianPrediction, CoreError> {
        let (mu, log_sigma, _) = self.forward(features)?;
        GaussianPrediction::new(mu, log_sigma.exp())
    }

    /// Trains a fresh model by mini-batch gradient descent on the mean NLL.
    ///
    /// Weights start uniform in [−1/√fan-in, +1/√fan-in] drawn from a
    /// ChaCha8 stream seeded with `config.seed`; the same stream shuffles
    /// example order each epoch, so equal seeds give identical models.
    ///
    /// # Errors
    ///
    /// [`CoreError::InvalidConfig`] for unusable hyperparameters,
    /// [`CoreError::EmptyInput`]/[`CoreError::DimensionMismatch`] for a
    /// malformed dataset.
    pub fn fit(
        features: &[Vec<f64>],
        targets: &[f64],
        config: &TrainConfig,
    ) -> Result<Self, CoreError> {
        config.validate()?;
        check_dataset(features, targets)?;
        let feature_dim = features[0].len();
        let hidden = config.hidden_dim;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

        let mut params = vec![0.0; param_count(feature_dim, hidden)];
        let hidden_scale = 1.0 / (feature_dim as f64).sqrt();
        let head_scale = 1.0 / (hidden as f64).sqrt();
        let split = hidden * feature_dim + hidden;
        for (i, p) in params.iter_mut().enumerate() {
            let scale = if i < split { hidden_scale } else { head_scale };
            *p = rng.random_range(-scale..=scale);
        }
        let mut model = Self {
            feature_dim,
            hidden_dim: hidden,
            params,
        };

        let n = targets.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut gradient = vec![0.0; model.params.len()];
        for _ in 0..config.epochs {
            // Fisher-Yates, driven by the same stream as the init.
            for i in (1..n).rev() {
                order.swap(i, rng.random_range(0..=i));
            }
            for batch in order.chunks(config.batch_size) {
                model.accumulate_gradient(features, targets, batch, &mut gradient)?;
                for (p, g) in model.params.iter_mut().zip(&gradient) {
                    *p -= config.learning_rate * g;
                }
            }
        }
        Ok(model)
    }

    /// Mean NLL of the model over a dataset.
    ///
    /// # Errors
    ///
    /// Same conditions as [`RegressorModel::predict`], plus empty input.
    pub fn mean_nll(&self, features: &[Vec<f64>], targets: &[f64]) -> Result<f64, CoreError> {
        check_dataset(features, targets)?;
        let mut total = 0.0;
        for (x, &y) in features.iter().zip(targets) {
            total += nll_loss(self.predict(x)?, y);
        }
        Ok(total / targets.len() as f64)
    }

    /// Gradient of the mean NLL over a batch with respect to every
    /// parameter, in the flat layout.
    ///
    /// # Errors
    ///
    /// [`CoreError::EmptyInput`] for an empty batch,
    /// [`CoreError::DimensionMismatch`] for feature vectors of the wrong
    /// length.
    pub fn nll_gradient(
        &self,
        features: &[Vec<f64>],
        targets: &[f64],
    ) -> Result<Vec<f64>, CoreError> {
        check_dataset(features, targets)?;
        let mut gradient = vec![0.0; self.params.len()];
        let batch: Vec<usize> = (0..targets.len()).collect();
        self.accumulate_gradient(features, targets, &batch, &mut gradient)?;
        Ok(gradient)
    }

    /// Writes the model in the documented text format: a header line
    /// `feature_dim hidden_dim`, then one parameter per line with 17
    /// significant digits (enough for an exact f64 round-trip).
    ///
    /// # Errors
    ///
    /// Propagates writer failures.
    pub fn save<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        writeln!(writer, "{} {}", self.feature_dim, self.hidden_dim)?;
        for p in &self.params {
            writeln!(writer, "{p:.16e}")?;
        }
        Ok(())
    }

    /// Reads a model produced by [`RegressorModel::save`].
    ///
    /// # Errors
    ///
    /// [`CoreError::Parse`] for a malformed header, an unparsable or
    /// non-finite parameter, or a parameter count that does not match the
    /// header.
    pub fn load<R: BufRead>(reader: R) -> Result<Self, CoreError> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(CoreError::Parse {
            line: 1,
            message: "missing header line".into(),
        })?;
        let header = header.map_err(|e| CoreError::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        let mut dims = header.split_whitespace();
        let feature_dim = parse_dim(dims.next(), 1)?;
        let hidden_dim = parse_dim(dims.next(), 1)?;
        if dims.next().is_some() {
            return Err(CoreError::Parse {
                line: 1,
                message: format!("expected `feature_dim hidden_dim`, got `{header}`"),
            });
        }
        let expected = param_count(feature_dim, hidden_dim);
        let mut params = Vec::with_capacity(expected);
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line.map_err(|e| CoreError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            let value: f64 = text.parse().map_err(|_| CoreError::Parse {
                line: line_no,
                message: format!("expected a number, got `{text}`"),
            })?;
            if !value.is_finite() {
                return Err(CoreError::Parse {
                    line: line_no,
                    message: format!("non-finite parameter {value}"),
                });
            }
            if params.len() == expected {
                return Err(CoreError::Parse {
                    line: line_no,
                    message: format!("more than {expected} parameters"),
                });
            }
            params.push(value);
        }
        if params.len() != expected {
            return Err(CoreError::Parse {
                line: 0,
                message: format!("expected {expected} parameters, found {}", params.len()),
            });
        }
        Self::from_params(feature_dim, hidden_dim, params)
    }

    /// Forward pass returning (μ, log σ, hidden activations).
    fn forward(&self, features: &[f64]) -> Result<(f64, f64, Vec<f64>), CoreError> {
        let d = self.feature_dim;
        if features.len() != d {
            return Err(CoreError::DimensionMismatch {
                expected: d,
                actual: features.len(),
            });
        }
        let h = self.hidden_dim;
        let p = &self.params;
        let (w1, rest) = p.split_at(h * d);
        let (b1, rest) = rest.split_at(h);
        let (w_mu, rest) = rest.split_at(h);
        let b_mu = rest[0];
        let w_ls = &rest[1..1 + h];
        let b_ls = rest[1 + h];

        let mut hidden = vec![0.0; h];
        let mut mu = b_mu;
        let mut log_sigma = b_ls;
        for j in 0..h {
            let mut z = b1[j];
            for (wi, xi) in w1[j * d..(j + 1) * d].iter().zip(features) {
                z += wi * xi;
            }
            let a = z.tanh();
            hidden[j] = a;
            mu += w_mu[j] * a;
            log_sigma += w_ls[j] * a;
        }
        Ok((mu, log_sigma, hidden))
    }

    /// Gradient of the mean NLL over `batch` (indices into the dataset),
    /// overwriting `gradient`. Backpropagation of
    /// ∂L/∂μ = (μ − y)/σ² and ∂L/∂(log σ) = 1 − (y − μ)²/σ²
    /// through the tanh layer.
    fn accumulate_gradient(
        &self,
        features: &[Vec<f64>],
        targets: &[f64],
        batch: &[usize],
        gradient: &mut [f64],
    ) -> Result<(), CoreError> {
        gradient.fill(0.0);
        let d = self.feature_dim;
        let h = self.hidden_dim;
        let off_b1 = h * d;
        let off_w_mu = off_b1 + h;
        let off_b_mu = off_w_mu + h;
        let off_w_ls = off_b_mu + 1;
        let off_b_ls = off_w_ls + h;
        let w_mu = &self.params[off_w_mu..off_w_mu + h];
        let w_ls = &self.params[off_w_ls..off_w_ls + h];

        for &i in batch {
            let x = &features[i];
            let (mu, log_sigma, hidden) = self.forward(x)?;
            let sigma2 = (2.0 * log_sigma).exp();
            let residual = targets[i] - mu;
            let d_mu = -residual / sigma2;
            let d_ls = 1.0 - residual * residual / sigma2;

            gradient[off_b_mu] += d_mu;
            gradient[off_b_ls] += d_ls;
            for j in 0..h {
                let a = hidden[j];
                gradient[off_w_mu + j] += d_mu * a;
                gradient[off_w_ls + j] += d_ls * a;
                let d_z = (d_mu * w_mu[j] + d_ls * w_ls[j]) * (1.0 - a * a);
                gradient[off_b1 + j] += d_z;
                let row = &mut gradient[j * d..(j + 1) * d];
                for (g, xi) in row.iter_mut().zip(x) {
                    *g += d_z * xi;
                }
            }
        }
        let scale = 1.0 / batch.len() as f64;
        for g in gradient.iter_mut() {
            *g *= scale;
        }
        Ok(())
    }
}

fn check_dataset(features: &[Vec<f64>], targets: &[f64]) -> Result<(), CoreError> {
    if features.is_empty() {
        return Err(CoreError::EmptyInput("dataset"));
    }
    if features.len() != targets.len() {
        return Err(CoreError::DimensionMismatch {
            expected: features.len(),
            actual: targets.len(),
        });
    }
    let d = features[0].len();
    if d == 0 {
        return Err(CoreError::invalid("feature vectors must be non-empty"));
    }
    if let Some(bad) = features.iter().find(|x| x.len() != d) {
        return Err(CoreError::DimensionMismatch {
            expected: d,
            actual: bad.len(),
        });
    }
    Ok(())
}

fn parse_dim(field: Option<&str>, line: usize) -> Result<usize, CoreError> {
    field
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .ok_or(CoreError::Parse {
            line,
            message: "expected `feature_dim hidden_dim`".into(),
        })
}
