//! One experiment trial: generate data, split it, fit the regressor (or
//! inject the true moments), calibrate both interval methods on the
//! validation part, and score them on the (possibly noise-shifted) test
//! part. Each trial is a pure function of (config, seed, predictor mode).

use std::fmt;
use std::str::FromStr;

use pacint_core::metrics::{
    average_width, coverage_rate, interval_ma_acc, macro_mae, mean_absolute_error, EvaluatedExample,
};
use pacint_core::{
    build_interval, calibrate, vcp_calibrate, vcp_interval, CalibrationRecord, GaussianPrediction,
    Interval, PacTarget, RegressorModel, TrainConfig,
};

use crate::config::ExperimentConfig;
use crate::data::{generate, shift_factor, split, SyntheticDataset};
use crate::error::HarnessError;
use crate::rng::{substream, substream_seed};

/// Interval construction method a report row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Scaled-σ intervals with a probably-approximately-correct coverage
    /// certificate.
    Pac,
    /// Split conformal residual-quantile intervals (vanilla conformal
    /// prediction).
    Vcp,
}

impl Method {
    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            Self::Pac => "pac",
            Self::Vcp => "vcp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pac" => Ok(Self::Pac),
            "vcp" => Ok(Self::Vcp),
            other => Err(HarnessError::usage(format!("unknown method `{other}`"))),
        }
    }
}

/// Where the (μ, σ) predictions come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictorMode {
    /// Fit the regressor on the train split.
    Trained,
    /// Use the generator's true mean and scale — a well-specified predictor
    /// for validity studies.
    Oracle,
}

/// One (seed, ε, method) result. Metric fields are `None` when the method
/// could not produce bounded intervals: an infeasible calibration target or
/// a conformal rank beyond the calibration sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub seed: u64,
    pub epsilon: f64,
    pub method: Method,
    pub feasible: bool,
    /// c* for the scaled-σ method, the residual quantile for conformal.
    pub scale: Option<f64>,
    /// Test coverage in percent.
    pub coverage: Option<f64>,
    pub avg_width: Option<f64>,
    pub mae: Option<f64>,
    pub macro_mae: Option<f64>,
    /// Macro-averaged interval accuracy over the coarse 4-level grouping,
    /// in percent.
    pub ma_acc: Option<f64>,
}

impl TrialRow {
    fn empty(seed: u64, epsilon: f64, method: Method) -> Self {
        Self {
            seed,
            epsilon,
            method,
            feasible: false,
            scale: None,
            coverage: None,
            avg_width: None,
            mae: None,
            macro_mae: None,
            ma_acc: None,
        }
    }
}

/// Runs one trial with a trained predictor. Emits one row per
/// (ε in `epsilon_list`) × (method), methods ordered `pac`, `vcp`.
///
/// # Errors
///
/// Any generation, split, training, or metric failure, tagged with the
/// trial seed.
pub fn run_trial(config: &ExperimentConfig, seed: u64) -> Result<Vec<TrialRow>, HarnessError> {
    run_trial_with(config, seed, PredictorMode::Trained)
}

/// [`run_trial`] with an explicit predictor mode.
///
/// # Errors
///
/// See [`run_trial`].
pub fn run_trial_with(
    config: &ExperimentConfig,
    seed: u64,
    mode: PredictorMode,
) -> Result<Vec<TrialRow>, HarnessError> {
    let tag = |e: &dyn fmt::Display| HarnessError::Trial {
        seed,
        message: e.to_string(),
    };

    let mut data_rng = substream(seed, "data");
    let dataset = generate(
        config.noise_profile,
        config.n_examples,
        config.feature_dim,
        &mut data_rng,
    )
    .map_err(|e| tag(&e))?;
    let mut split_rng = substream(seed, "split");
    let (train, val, mut test) =
        split(&dataset, config.split_ratio, &mut split_rng).map_err(|e| tag(&e))?;
    test.inflate_noise(shift_factor(config.shift_severity));

    let (val_preds, test_preds) = match mode {
        PredictorMode::Trained => {
            // Reseed training per trial so repetitions resample both the
            // split and the initialization, while train.seed still selects
            // among deterministic suites.
            let train_config = TrainConfig {
                seed: substream_seed(seed, &format!("train/{}", config.train.seed)),
                ..config.train
            };
            let model = RegressorModel::fit(&train.features, &train.labels, &train_config)
                .map_err(|e| tag(&e))?;
            let predict_all = |part: &SyntheticDataset| {
                part.features
                    .iter()
                    .map(|x| model.predict(x))
                    .collect::<Result<Vec<_>, _>>()
            };
            (
                predict_all(&val).map_err(|e| tag(&e))?,
                predict_all(&test).map_err(|e| tag(&e))?,
            )
        }
        PredictorMode::Oracle => {
            let oracle_all = |part: &SyntheticDataset| {
                part.true_mu
                    .iter()
                    .zip(&part.true_sigma)
                    .map(|(&mu, &sigma)| GaussianPrediction::new(mu, sigma))
                    .collect::<Result<Vec<_>, _>>()
            };
            (
                oracle_all(&val).map_err(|e| tag(&e))?,
                oracle_all(&test).map_err(|e| tag(&e))?,
            )
        }
    };

    let records: Vec<CalibrationRecord> = val_preds
        .iter()
        .zip(&val.labels)
        .map(|(&p, &y)| CalibrationRecord::new(p, y))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| tag(&e))?;
    let val_residuals: Vec<f64> = val_preds
        .iter()
        .zip(&val.labels)
        .map(|(p, &y)| (y - p.mu()).abs())
        .collect();

    let mut rows = Vec::with_capacity(config.epsilon_list.len() * 2);
    for &epsilon in &config.epsilon_list {
        let target = PacTarget::new(epsilon, config.delta).map_err(|e| tag(&e))?;
        let result = calibrate(&records, target).map_err(|e| tag(&e))?;
        let pac_row = match result.c_star {
            Some(c_star) => {
                let intervals = test_preds
                    .iter()
                    .map(|&p| build_interval(p, c_star))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| tag(&e))?;
                scored_row(
                    seed,
                    epsilon,
                    Method::Pac,
                    c_star,
                    &test,
                    &test_preds,
                    &intervals,
                )
                .map_err(|e| tag(&e))?
            }
            None => TrialRow::empty(seed, epsilon, Method::Pac),
        };
        rows.push(pac_row);

        let quantile = vcp_calibrate(&val_residuals, epsilon).map_err(|e| tag(&e))?;
        let vcp_row = if quantile.is_finite() {
            let intervals: Vec<Interval> = test_preds
                .iter()
                .map(|p| vcp_interval(p.mu(), quantile))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| tag(&e))?;
            scored_row(
                seed,
                epsilon,
                Method::Vcp,
                quantile.q_hat(),
                &test,
                &test_preds,
                &intervals,
            )
            .map_err(|e| tag(&e))?
        } else {
            TrialRow::empty(seed, epsilon, Method::Vcp)
        };
        rows.push(vcp_row);
    }
    Ok(rows)
}

fn scored_row(
    seed: u64,
    epsilon: f64,
    method: Method,
    scale: f64,
    test: &SyntheticDataset,
    preds: &[GaussianPrediction],
    intervals: &[Interval],
) -> Result<TrialRow, pacint_core::CoreError> {
    let examples: Vec<EvaluatedExample> = test
        .labels
        .iter()
        .zip(preds)
        .zip(intervals)
        .map(|((&y, p), &interval)| EvaluatedExample::new(y, p.mu(), p.sigma(), Some(interval)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TrialRow {
        seed,
        epsilon,
        method,
        feasible: true,
        scale: Some(scale),
        coverage: Some(coverage_rate(&examples)?),
        avg_width: Some(average_width(&examples)?),
        mae: Some(mean_absolute_error(&examples)?),
        macro_mae: Some(macro_mae(&examples)?),
        ma_acc: Some(interval_ma_acc(&examples)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::NoiseProfile;

    fn test_config() -> ExperimentConfig {
        ExperimentConfig {
            seed_list: vec![1],
            n_examples: 300,
            feature_dim: 3,
            epsilon_list: vec![0.2, 0.3, 0.4],
            delta: 0.05,
            split_ratio: (0.6, 0.2, 0.2),
            noise_profile: NoiseProfile::Heteroscedastic,
            shift_severity: 0.0,
            train: TrainConfig {
                learning_rate: 0.02,
                epochs: 15,
                batch_size: 32,
                hidden_dim: 8,
                seed: 0,
            },
        }
    }

    #[test]
    fn sweep_emits_one_row_per_epsilon_and_method() {
        let rows = run_trial(&test_config(), 1).unwrap();
        assert_eq!(rows.len(), 6);
        let expected: Vec<(f64, Method)> = vec![
            (0.2, Method::Pac),
            (0.2, Method::Vcp),
            (0.3, Method::Pac),
            (0.3, Method::Vcp),
            (0.4, Method::Pac),
            (0.4, Method::Vcp),
        ];
        let got: Vec<(f64, Method)> = rows.iter().map(|r| (r.epsilon, r.method)).collect();
        assert_eq!(got, expected);
        assert!(rows.iter().all(|r| r.seed == 1));
    }

    #[test]
    fn trials_are_deterministic() {
        let config = test_config();
        let a = run_trial(&config, 9).unwrap();
        let b = run_trial(&config, 9).unwrap();
        assert_eq!(a, b);
        let c = run_trial(&config, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn oracle_mode_skips_training_but_fills_rows() {
        let mut config = test_config();
        config.train.epochs = 1;
        let rows = run_trial_with(&config, 4, PredictorMode::Oracle).unwrap();
        for row in &rows {
            assert!(row.feasible, "ε = {}", row.epsilon);
            assert!(row.coverage.unwrap() >= 0.0);
            assert!(row.avg_width.unwrap() > 0.0);
        }
    }

    #[test]
    fn infeasible_targets_produce_marker_rows() {
        let mut config = test_config();
        // 60 validation examples cannot certify 95 % coverage at δ = 1e-5:
        // even the all-covered bound 1e-5^(1/60) ≈ 0.825 falls short.
        config.epsilon_list = vec![0.05];
        config.delta = 1e-5;
        let rows = run_trial_with(&config, 2, PredictorMode::Oracle).unwrap();
        let pac = &rows[0];
        assert_eq!(pac.method, Method::Pac);
        assert!(!pac.feasible);
        assert_eq!(pac.scale, None);
        assert_eq!(pac.coverage, None);
        assert_eq!(pac.avg_width, None);

        // The conformal rank ⌈61·0.95⌉ = 58 ≤ 60 still exists.
        let vcp = &rows[1];
        assert!(vcp.feasible);
    }

    #[test]
    fn small_calibration_sets_make_conformal_unbounded() {
        let mut config = test_config();
        config.n_examples = 10; // validation part has 2 examples
        config.epsilon_list = vec![0.1];
        config.delta = 0.5;
        let rows = run_trial_with(&config, 3, PredictorMode::Oracle).unwrap();
        let vcp = rows.iter().find(|r| r.method == Method::Vcp).unwrap();
        // rank ⌈3·0.9⌉ = 3 > 2 calibration residuals → no finite quantile.
        assert!(!vcp.feasible);
        assert_eq!(vcp.avg_width, None);
    }

    #[test]
    fn shift_severity_degrades_coverage() {
        let mut config = test_config();
        config.n_examples = 2000;
        config.epsilon_list = vec![0.3];
        let baseline = run_trial_with(&config, 5, PredictorMode::Oracle).unwrap();
        config.shift_severity = 3.0;
        let shifted = run_trial_with(&config, 5, PredictorMode::Oracle).unwrap();
        let pick = |rows: &[TrialRow]| {
            rows.iter()
                .find(|r| r.method == Method::Pac)
                .unwrap()
                .coverage
                .unwrap()
        };
        assert!(
            pick(&shifted) < pick(&baseline) - 10.0,
            "coverage {} → {}",
            pick(&baseline),
            pick(&shifted)
        );
    }

    #[test]
    fn method_names_round_trip() {
        assert_eq!("pac".parse::<Method>().unwrap(), Method::Pac);
        assert_eq!("vcp".parse::<Method>().unwrap(), Method::Vcp);
        assert_eq!(Method::Pac.to_string(), "pac");
        assert!("bnn".parse::<Method>().is_err());
    }
}
