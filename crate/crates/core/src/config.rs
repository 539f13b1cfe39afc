//! Plain-text key-value configuration shared by all tools.
//!
//! Format: one `key = value` per line, `#` starts a comment, blank lines
//! ignored. The model parameters use the exact keys
//! `r1 r2 a K gamma m l d1 d2`; the optional normal-form block supplies
//! the eight complex coefficients as paired `<name>_re` / `<name>_im`
//! decimals (e.g. `K2100_re`). Unknown keys are errors, so typos surface
//! instead of silently falling back to defaults.

use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

use crate::model::{ModelError, ModelParams};
use crate::unfolding::NormalFormCoeffs;

pub const PARAM_KEYS: [&str; 9] = ["r1", "r2", "a", "K", "gamma", "m", "l", "d1", "d2"];

pub const K_KEYS: [&str; 16] = [
    "K11_re", "K11_im", "K21_re", "K21_im", "K13_re", "K13_im", "K23_re", "K23_im", "K2100_re",
    "K2100_im", "K1011_re", "K1011_im", "K0021_re", "K0021_im", "K1110_re", "K1110_im",
];

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: value for `{key}` is not a decimal number: `{value}`")]
    BadNumber {
        line: usize,
        key: String,
        value: String,
    },
    #[error("missing required key `{key}`")]
    MissingKey { key: &'static str },
    #[error("invalid parameters: {0}")]
    Model(#[from] ModelError),
}

/// Parsed configuration: model parameters, plus the normal-form
/// coefficients when all sixteen `K*` keys are present.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: ModelParams,
    pub kcoeffs: Option<NormalFormCoeffs>,
}

impl Config {
    /// The coefficients, or the error naming the first missing key.
    pub fn require_kcoeffs(&self) -> Result<NormalFormCoeffs, ConfigError> {
        self.kcoeffs
            .ok_or(ConfigError::MissingKey { key: K_KEYS[0] })
    }
}

pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let mut values: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: content.to_string(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if !PARAM_KEYS.contains(&key) && !K_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        let number: f64 = value.parse().map_err(|_| ConfigError::BadNumber {
            line,
            key: key.to_string(),
            value: value.to_string(),
        })?;
        if values.insert(key.to_string(), (line, number)).is_some() {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
    }

    let get = |key: &'static str| -> Result<f64, ConfigError> {
        values
            .get(key)
            .map(|(_, v)| *v)
            .ok_or(ConfigError::MissingKey { key })
    };
    let params = ModelParams {
        r1: get("r1")?,
        r2: get("r2")?,
        a: get("a")?,
        k: get("K")?,
        gamma: get("gamma")?,
        m: get("m")?,
        l: get("l")?,
        d1: get("d1")?,
        d2: get("d2")?,
    };
    params.validate()?;

    let any_k = K_KEYS.iter().any(|k| values.contains_key(*k));
    let kcoeffs = if any_k {
        let need = |key: &'static str| -> Result<f64, ConfigError> {
            values
                .get(key)
                .map(|(_, v)| *v)
                .ok_or(ConfigError::MissingKey { key })
        };
        let cplx = |re: &'static str, im: &'static str| -> Result<Complex64, ConfigError> {
            Ok(Complex64::new(need(re)?, need(im)?))
        };
        Some(NormalFormCoeffs {
            k11: cplx("K11_re", "K11_im")?,
            k21: cplx("K21_re", "K21_im")?,
            k13: cplx("K13_re", "K13_im")?,
            k23: cplx("K23_re", "K23_im")?,
            k2100: cplx("K2100_re", "K2100_im")?,
            k1011: cplx("K1011_re", "K1011_im")?,
            k0021: cplx("K0021_re", "K0021_im")?,
            k1110: cplx("K1110_re", "K1110_im")?,
        })
    } else {
        None
    };

    Ok(Config { params, kcoeffs })
}
