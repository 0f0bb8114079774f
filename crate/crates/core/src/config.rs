// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Experiment parameters and the plain-text `key = value` config format.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("`{key}` out of range: {reason}")]
    OutOfRange { key: &'static str, reason: String },
    #[error("config line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Every parameter of a simulated world and its protocols.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    /// Side length of the square deployment field.
    pub field_size: f64,
    /// Omnidirectional radio range.
    pub radio_range: f64,
    pub node_count: usize,
    /// Maximum hopcount a region head's inhibition may reach.
    pub gradient: u32,
    /// Path-loss exponent used to scale sector range with element count.
    pub alpha: f64,
    pub elements_min: u32,
    pub elements_max: u32,
    /// Margin within which a node's initial virtual coordinate must lie of
    /// the consensus point to be a centroid candidate.
    pub epsilon: f64,
    /// Consensus tolerance for virtual-coordinate averaging.
    pub delta: f64,
    /// Angular step (radians) of the beam sweep; must divide 2π.
    pub sweep_step: f64,
    pub seed: u64,
    /// Break equal-degree, equal-hop head ties by lower head id instead of a coin flip.
    pub deterministic_ties: bool,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            field_size: 10.0,
            radio_range: 1.0,
            node_count: 120,
            gradient: 3,
            alpha: 2.0,
            elements_min: 1,
            elements_max: 16,
            epsilon: 0.05,
            delta: 1e-6,
            sweep_step: TAU / 64.0,
            seed: 1,
            deterministic_ties: false,
        }
    }
}

/// Config keys in file order. Each maps to exactly one field.
pub const CONFIG_KEYS: [&str; 12] = [
    "field_size",
    "radio_range",
    "node_count",
    "gradient",
    "alpha",
    "elements_min",
    "elements_max",
    "epsilon",
    "delta",
    "sweep_step",
    "seed",
    "deterministic_ties",
];

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn bad(key: &'static str, reason: impl Into<String>) -> Result<(), ConfigError> {
            Err(ConfigError::OutOfRange {
                key,
                reason: reason.into(),
            })
        }
        if !(self.field_size > 0.0 && self.field_size.is_finite()) {
            return bad("field_size", "must be positive");
        }
        if !(self.radio_range > 0.0 && self.radio_range.is_finite()) {
            return bad("radio_range", "must be positive");
        }
        if self.node_count < 1 {
            return bad("node_count", "must be at least 1");
        }
        if self.gradient < 1 {
            return bad("gradient", "must be at least 1");
        }
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return bad("alpha", "must be >= 1");
        }
        if self.elements_min < 1 {
            return bad("elements_min", "must be at least 1");
        }
        if self.elements_max < self.elements_min {
            return bad("elements_max", "must be >= elements_min");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon", "must be positive");
        }
        if !(self.delta > 0.0) {
            return bad("delta", "must be positive");
        }
        if !(self.sweep_step > 0.0 && self.sweep_step <= TAU) {
            return bad("sweep_step", "must lie in (0, 2π]");
        }
        let steps = TAU / self.sweep_step;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return bad("sweep_step", "must divide 2π evenly");
        }
        Ok(())
    }

    /// Number of azimuth positions in one full sweep.
    pub fn sweep_positions(&self) -> usize {
        (TAU / self.sweep_step).round() as usize
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "field_size" => self.field_size = parse_value(key, value)?,
            "radio_range" => self.radio_range = parse_value(key, value)?,
            "node_count" => self.node_count = parse_value(key, value)?,
            "gradient" => self.gradient = parse_value(key, value)?,
            "alpha" => self.alpha = parse_value(key, value)?,
            "elements_min" => self.elements_min = parse_value(key, value)?,
            "elements_max" => self.elements_max = parse_value(key, value)?,
            "epsilon" => self.epsilon = parse_value(key, value)?,
            "delta" => self.delta = parse_value(key, value)?,
            "sweep_step" => self.sweep_step = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "deterministic_ties" => self.deterministic_ties = parse_value(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and `#`
    /// comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.apply_text(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let values: [String; 12] = [
            self.field_size.to_string(),
            self.radio_range.to_string(),
            self.node_count.to_string(),
            self.gradient.to_string(),
            self.alpha.to_string(),
            self.elements_min.to_string(),
            self.elements_max.to_string(),
            self.epsilon.to_string(),
            self.delta.to_string(),
            self.sweep_step.to_string(),
            self.seed.to_string(),
            self.deterministic_ties.to_string(),
        ];
        for (key, value) in CONFIG_KEYS.iter().zip(values) {
            writeln!(out, "{key} = {value}").unwrap();
        }
        out
    }

    /// Nodes per unit area.
    pub fn density(&self) -> f64 {
        self.node_count as f64 / (self.field_size * self.field_size)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = WorldConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.sweep_positions(), 64);
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = WorldConfig::default();
        cfg.node_count = 400;
        cfg.gradient = 7;
        cfg.seed = 99;
        cfg.deterministic_ties = true;
        let mut back = WorldConfig::default();
        back.apply_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_key_is_named() {
        let mut cfg = WorldConfig::default();
        let err = cfg.apply_text("nodes = 3").unwrap_err();
        assert!(err.to_string().contains("`nodes`"));
    }

    #[test]
    fn bad_values_name_the_key() {
        let mut cfg = WorldConfig::default();
        let err = cfg.apply_text("# comment\ngradient = -1\n").unwrap_err();
        assert!(err.to_string().contains("gradient"));
        let err = cfg.apply_text("gradient 3").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1 }));
    }

    #[test]
    fn validation_rejects_out_of_range() {
        let cases: Vec<(&str, Box<dyn Fn(&mut WorldConfig)>)> = vec![
            ("field_size", Box::new(|c| c.field_size = 0.0)),
            ("node_count", Box::new(|c| c.node_count = 0)),
            ("gradient", Box::new(|c| c.gradient = 0)),
            ("alpha", Box::new(|c| c.alpha = 0.5)),
            ("elements_max", Box::new(|c| c.elements_max = 0)),
            ("epsilon", Box::new(|c| c.epsilon = 0.0)),
            ("sweep_step", Box::new(|c| c.sweep_step = 1.0)),
        ];
        for (key, mutate) in cases {
            let mut cfg = WorldConfig::default();
            mutate(&mut cfg);
            let err = cfg.validate().unwrap_err();
            assert!(err.to_string().contains(key), "{key}: {err}");
        }
    }
}
