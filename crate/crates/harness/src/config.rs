//! Experiment configuration: a flat `key=value` text format that is strict
//! about unknown and duplicate keys, with documented defaults for the
//! optional fields. The canonical rendering — every field in a fixed
//! order, defaults resolved — is hashed into report provenance so that a
//! report file identifies the exact configuration that produced it.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use pacint_core::TrainConfig;

use crate::data::NoiseProfile;
use crate::error::HarnessError;
use crate::rng::stable_hash64;

const KNOWN_KEYS: [&str; 13] = [
    "seed_list",
    "n_examples",
    "feature_dim",
    "epsilon_list",
    "delta",
    "split_ratio",
    "noise_profile",
    "shift_severity",
    "train.learning_rate",
    "train.epochs",
    "train.batch_size",
    "train.hidden_dim",
    "train.seed",
];

pub const DEFAULT_DELTA: f64 = 1e-5;
pub const DEFAULT_SPLIT_RATIO: (f64, f64, f64) = (0.6, 0.2, 0.2);

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed_list: Vec<u64>,
    pub n_examples: usize,
    pub feature_dim: usize,
    pub epsilon_list: Vec<f64>,
    pub delta: f64,
    pub split_ratio: (f64, f64, f64),
    pub noise_profile: NoiseProfile,
    pub shift_severity: f64,
    pub train: TrainConfig,
}

impl ExperimentConfig {
    /// Parses the `key=value` format. Blank lines and lines starting with
    /// `#` are skipped; whitespace around keys and values is trimmed.
    /// Optional keys and their defaults: `delta` (1e-5), `split_ratio`
    /// (0.6,0.2,0.2), `shift_severity` (0), `train.seed` (0).
    ///
    /// # Errors
    ///
    /// Syntax problems are [`HarnessError::Config`] with the offending
    /// line; unknown keys, duplicate keys, missing required keys, and
    /// out-of-range values are rejected.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut entries: HashMap<&str, (usize, &str)> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(HarnessError::Config {
                line: line_no,
                message: format!("expected key=value, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(HarnessError::Config {
                    line: line_no,
                    message: format!("unknown key `{key}`"),
                });
            }
            if let Some((first_line, _)) = entries.insert(key, (line_no, value)) {
                return Err(HarnessError::Config {
                    line: line_no,
                    message: format!("duplicate key `{key}` (first set on line {first_line})"),
                });
            }
        }

        let require = |key: &str| -> Result<(usize, &str), HarnessError> {
            entries
                .get(key)
                .copied()
                .ok_or_else(|| HarnessError::usage(format!("missing required key `{key}`")))
        };
        let optional = |key: &str| entries.get(key).copied();

        let config = Self {
            seed_list: parse_list(require("seed_list")?, "seed_list", parse_scalar::<u64>)?,
            n_examples: parse_scalar(require("n_examples")?, "n_examples")?,
            feature_dim: parse_scalar(require("feature_dim")?, "feature_dim")?,
            epsilon_list: parse_list(
                require("epsilon_list")?,
                "epsilon_list",
                parse_scalar::<f64>,
            )?,
            delta: optional("delta")
                .map_or(Ok(DEFAULT_DELTA), |entry| parse_scalar(entry, "delta"))?,
            split_ratio: optional("split_ratio").map_or(Ok(DEFAULT_SPLIT_RATIO), parse_ratio)?,
            noise_profile: {
                let (line, value) = require("noise_profile")?;
                value
                    .parse()
                    .map_err(|e: HarnessError| HarnessError::Config {
                        line,
                        message: e.to_string(),
                    })?
            },
            shift_severity: optional("shift_severity")
                .map_or(Ok(0.0), |entry| parse_scalar(entry, "shift_severity"))?,
            train: TrainConfig {
                learning_rate: parse_scalar(
                    require("train.learning_rate")?,
                    "train.learning_rate",
                )?,
                epochs: parse_scalar(require("train.epochs")?, "train.epochs")?,
                batch_size: parse_scalar(require("train.batch_size")?, "train.batch_size")?,
                hidden_dim: parse_scalar(require("train.hidden_dim")?, "train.hidden_dim")?,
                seed: optional("train.seed")
                    .map_or(Ok(0), |entry| parse_scalar(entry, "train.seed"))?,
            },
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.seed_list.is_empty() {
            return Err(HarnessError::usage("seed_list must name at least one seed"));
        }
        let mut seeds = self.seed_list.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seed_list.len() {
            return Err(HarnessError::usage("seed_list contains duplicate seeds"));
        }
        if self.n_examples == 0 {
            return Err(HarnessError::usage("n_examples must be at least 1"));
        }
        if self.feature_dim == 0 {
            return Err(HarnessError::usage("feature_dim must be at least 1"));
        }
        if self.epsilon_list.is_empty() {
            return Err(HarnessError::usage(
                "epsilon_list must name at least one epsilon",
            ));
        }
        for &epsilon in &self.epsilon_list {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(HarnessError::usage(format!(
                    "epsilon values must lie in (0, 1), got {epsilon}"
                )));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(HarnessError::usage(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        let (a, b, c) = self.split_ratio;
        if !(a > 0.0 && b > 0.0 && c > 0.0) {
            return Err(HarnessError::usage(format!(
                "split_ratio parts must all be positive, got {a},{b},{c}"
            )));
        }
        if (a + b + c - 1.0).abs() > 1e-9 {
            return Err(HarnessError::usage(format!(
                "split_ratio must sum to 1, got {a},{b},{c}"
            )));
        }
        if !(self.shift_severity.is_finite() && self.shift_severity >= 0.0) {
            return Err(HarnessError::usage(format!(
                "shift_severity must be finite and nonnegative, got {}",
                self.shift_severity
            )));
        }
        self.train
            .validate()
            .map_err(|e| HarnessError::usage(e.to_string()))?;
        Ok(())
    }

    /// Every field in a fixed order with defaults resolved — the hashed
    /// provenance form, itself parseable by [`ExperimentConfig::parse`].
    #[must_use]
    pub fn canonical_string(&self) -> String {
        let join = |values: &[String]| values.join(",");
        let mut out = String::new();
        let seeds: Vec<String> = self.seed_list.iter().map(u64::to_string).collect();
        let epsilons: Vec<String> = self.epsilon_list.iter().map(f64::to_string).collect();
        let _ = writeln!(out, "seed_list={}", join(&seeds));
        let _ = writeln!(out, "n_examples={}", self.n_examples);
        let _ = writeln!(out, "feature_dim={}", self.feature_dim);
        let _ = writeln!(out, "epsilon_list={}", join(&epsilons));
        let _ = writeln!(out, "delta={}", self.delta);
        let _ = writeln!(
            out,
            "split_ratio={},{},{}",
            self.split_ratio.0, self.split_ratio.1, self.split_ratio.2
        );
        let _ = writeln!(out, "noise_profile={}", self.noise_profile);
        let _ = writeln!(out, "shift_severity={}", self.shift_severity);
        let _ = writeln!(out, "train.learning_rate={}", self.train.learning_rate);
        let _ = writeln!(out, "train.epochs={}", self.train.epochs);
        let _ = writeln!(out, "train.batch_size={}", self.train.batch_size);
        let _ = writeln!(out, "train.hidden_dim={}", self.train.hidden_dim);
        let _ = writeln!(out, "train.seed={}", self.train.seed);
        out
    }

    /// 16-hex-digit digest of the canonical rendering.
    #[must_use]
    pub fn hash(&self) -> String {
        format!("{:016x}", stable_hash64(&self.canonical_string()))
    }
}

fn parse_scalar<T: FromStr>(entry: (usize, &str), key: &str) -> Result<T, HarnessError>
where
    T::Err: std::fmt::Display,
{
    let (line, value) = entry;
    value.parse().map_err(|e| HarnessError::Config {
        line,
        message: format!("bad value for `{key}`: {e}"),
    })
}

fn parse_list<T>(
    entry: (usize, &str),
    key: &str,
    parse_one: impl Fn((usize, &str), &str) -> Result<T, HarnessError>,
) -> Result<Vec<T>, HarnessError> {
    let (line, value) = entry;
    if value.trim().is_empty() {
        return Err(HarnessError::Config {
            line,
            message: format!("`{key}` must list at least one value"),
        });
    }
    value
        .split(',')
        .map(|part| parse_one((line, part.trim()), key))
        .collect()
}

fn parse_ratio(entry: (usize, &str)) -> Result<(f64, f64, f64), HarnessError> {
    let (line, _) = entry;
    let parts = parse_list(entry, "split_ratio", parse_scalar::<f64>)?;
    if parts.len() != 3 {
        return Err(HarnessError::Config {
            line,
            message: format!("split_ratio needs exactly 3 parts, got {}", parts.len()),
        });
    }
    Ok((parts[0], parts[1], parts[2]))
}
