//! Run configuration: `key = value` files with `MZL_*` environment overrides.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::domains::{CountOptions, SuiteConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Relative tail tolerance for series evaluation.
    pub series_tol: f64,
    /// Largest accepted identity or chain residual.
    pub residual_tol: f64,
    /// Largest distance of a winding from an integer, in turns.
    pub winding_margin: f64,
    pub zero_tol: f64,
    pub initial_samples: usize,
    pub max_depth: u32,
    pub j_trials: usize,
    pub wp_trials: usize,
    pub j_max_degree: usize,
    pub wp_max_degree: usize,
    pub tau: f64,
    pub seed: u64,
    pub report: Option<String>,
    pub trace: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let suite = SuiteConfig::default();
        Self {
            series_tol: 1e-16,
            residual_tol: 1e-7,
            winding_margin: 0.01,
            zero_tol: 1e-12,
            initial_samples: 64,
            max_depth: 48,
            j_trials: suite.j_trials,
            wp_trials: suite.wp_trials,
            j_max_degree: suite.j_max_degree,
            wp_max_degree: suite.wp_max_degree,
            tau: suite.tau,
            seed: suite.seed,
            report: None,
            trace: None,
        }
    }
}

pub const ENV_PREFIX: &str = "MZL_";

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("bad value {value:?} for {key}")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        match key.as_str() {
            "series_tol" => self.series_tol = parse(&key, value)?,
            "residual_tol" => self.residual_tol = parse(&key, value)?,
            "winding_margin" => self.winding_margin = parse(&key, value)?,
            "zero_tol" => self.zero_tol = parse(&key, value)?,
            "initial_samples" => self.initial_samples = parse(&key, value)?,
            "max_depth" => self.max_depth = parse(&key, value)?,
            "j_trials" => self.j_trials = parse(&key, value)?,
            "wp_trials" => self.wp_trials = parse(&key, value)?,
            "j_max_degree" => self.j_max_degree = parse(&key, value)?,
            "wp_max_degree" => self.wp_max_degree = parse(&key, value)?,
            "tau" => self.tau = parse(&key, value)?,
            "seed" => self.seed = parse(&key, value)?,
            "report" => self.report = Some(value.to_string()),
            "trace" => self.trace = Some(value.to_string()),
            _ => return Err(Error::Parse(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v.trim().trim_matches('"'))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        self.apply_str(&text)
    }

    /// Applies `MZL_<KEY>` variables from `vars`.
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<()> {
        let overrides: BTreeMap<String, String> = vars
            .into_iter()
            .filter_map(|(k, v)| {
                k.strip_prefix(ENV_PREFIX)
                    .map(|k| (k.to_ascii_lowercase(), v))
            })
            .collect();
        for (k, v) in overrides {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    /// Defaults, then the file (if any), then the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(p) = path {
            cfg.apply_file(p)?;
        }
        cfg.apply_env(std::env::vars())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("series_tol", self.series_tol),
            ("residual_tol", self.residual_tol),
            ("winding_margin", self.winding_margin),
            ("zero_tol", self.zero_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidSpec(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.winding_margin >= 0.5 {
            return Err(Error::InvalidSpec("winding_margin must be < 0.5".into()));
        }
        if self.initial_samples < 4 {
            return Err(Error::InvalidSpec("initial_samples must be >= 4".into()));
        }
        Ok(())
    }

    pub fn count_options(&self) -> CountOptions {
        let mut opts = CountOptions::default();
        opts.winding.zero_tol = self.zero_tol;
        opts.winding.integrality_tol = self.winding_margin;
        opts.winding.initial_samples = self.initial_samples;
        opts.winding.max_depth = self.max_depth;
        opts.localize.winding.zero_tol = self.zero_tol;
        opts.localize.winding.integrality_tol = self.winding_margin;
        opts.localize.winding.max_depth = self.max_depth;
        opts
    }

    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            j_trials: self.j_trials,
            wp_trials: self.wp_trials,
            j_max_degree: self.j_max_degree,
            wp_max_degree: self.wp_max_degree,
            tau: self.tau,
            seed: self.seed,
            ..SuiteConfig::default()
        }
    }
}
