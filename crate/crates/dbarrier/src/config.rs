//! Parameter merging: built-in defaults, then a `key = value` file, then flags.

use std::collections::BTreeMap;
use std::path::Path;

use dbarrier_core::model::{BarrierParams, DriveParams, PacketParams};

use crate::CliError;

/// Keys accepted in a config file.
pub const CONFIG_KEYS: [&str; 7] = ["m", "lambda", "x0", "delta", "mu", "mu_tilde", "omega"];

/// Parses a flat `key = value` file. `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected `key = value`", n + 1)))?;
        let key = key.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(CliError::Config(format!("config line {}: unknown key `{key}`", n + 1)));
        }
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("config key `{key}`: `{}` is not a number", value.trim())))?;
        if out.insert(key.to_string(), v).is_some() {
            return Err(CliError::Config(format!("config key `{key}` given twice")));
        }
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Physical parameters after merging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physics {
    pub m: f64,
    pub lambda: f64,
    pub x0: f64,
    pub delta: f64,
    pub mu: f64,
    /// Set when the drive was given as `μ̃` rather than `μ`.
    pub mu_tilde: Option<f64>,
    pub omega: f64,
}

impl Physics {
    /// Opacity 400, used by the static commands.
    pub const STATIC: Physics =
        Physics { m: 20.0, lambda: 2.0, x0: 10.0, delta: 5.0, mu: 0.0, mu_tilde: None, omega: 1.0 };
    /// Opacity 20, where one lifetime is reachable numerically.
    pub const DESK: Physics =
        Physics { m: 20.0, lambda: 0.1, x0: 10.0, delta: 5.0, mu: 0.0, mu_tilde: None, omega: 1.0 };

    /// Applies file values, then flag values, over `self`.
    pub fn merge(mut self, file: &BTreeMap<String, f64>, flags: &Overrides) -> Result<Self, CliError> {
        let get = |key: &str, flag: Option<f64>| flag.or_else(|| file.get(key).copied());
        if let Some(v) = get("m", flags.m) {
            self.m = v;
        }
        if let Some(v) = get("lambda", flags.lambda) {
            self.lambda = v;
        }
        if let Some(v) = get("x0", flags.x0) {
            self.x0 = v;
        }
        if let Some(v) = get("delta", flags.delta) {
            self.delta = v;
        }
        if let Some(v) = get("omega", flags.omega) {
            self.omega = v;
        }
        let mu = get("mu", flags.mu);
        let mu_tilde = get("mu_tilde", flags.mu_tilde);
        match (mu, mu_tilde) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either mu or mu_tilde, not both".into())),
            (Some(v), None) => self.mu = v,
            (None, Some(v)) => self.mu_tilde = Some(v),
            (None, None) => {}
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = [("m", self.m), ("x0", self.x0), ("delta", self.delta), ("omega", self.omega)];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("--{key} must be positive (got {v})")));
            }
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(CliError::Config(format!("--lambda must be non-negative (got {})", self.lambda)));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(CliError::Config(format!("--mu must be non-negative (got {})", self.mu)));
        }
        if let Some(v) = self.mu_tilde {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("--mu-tilde must be non-negative (got {v})")));
            }
        }
        Ok(())
    }

    pub fn barrier(&self) -> BarrierParams {
        BarrierParams::new(self.m, self.lambda, self.x0).expect("validated")
    }

    pub fn packet(&self) -> PacketParams {
        PacketParams::new(self.delta).expect("validated")
    }

    pub fn drive(&self) -> DriveParams {
        match self.mu_tilde {
            Some(mt) => DriveParams::from_mu_tilde(mt, self.omega, self.m),
            None => DriveParams::new(self.mu, self.omega, self.m),
        }
        .expect("validated")
    }
}

/// Values given on the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub m: Option<f64>,
    pub lambda: Option<f64>,
    pub x0: Option<f64>,
    pub delta: Option<f64>,
    pub mu: Option<f64>,
    pub mu_tilde: Option<f64>,
    pub omega: Option<f64>,
}
