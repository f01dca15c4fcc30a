//! Flat `key=value` experiment configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::analyzer::{AnalyzerConfig, DEFAULT_CAP};
use crate::decoder::{PruneConfig, Search};
use crate::simulator::{ConfusionMode, NoiseConfig};
use crate::trie_hmm::{HmmParams, IndexError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("config key {key:?}: {message}")]
    Value { key: String, message: String },
}

pub const KEYS: &[&str] = &[
    "alpha",
    "beta",
    "normalize_emissions",
    "prune",
    "min_mismatch_allowance",
    "mismatch_fraction",
    "per_symbol_floor",
    "cap",
    "top_k",
    "search",
    "preset",
    "del_rate",
    "sub_rate",
    "ins_rate",
    "noise_scale",
    "confusion",
    "seed",
    "frame",
    "jobs",
    "corpus",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub beta: f64,
    pub normalize_emissions: bool,
    pub prune: PruneConfig,
    pub cap: Option<usize>,
    pub top_k: usize,
    pub search: Search,
    /// Channel rates and seed before `noise_scale` is applied.
    pub noise: NoiseConfig,
    pub noise_scale: f64,
    pub frame: Option<(usize, usize)>,
    pub jobs: usize,
    /// Gold corpus; the bundled one when unset.
    pub corpus: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: HmmParams::DEFAULT_ALPHA,
            beta: HmmParams::DEFAULT_BETA,
            normalize_emissions: false,
            prune: PruneConfig::default(),
            cap: Some(DEFAULT_CAP),
            top_k: 1,
            search: Search::Viterbi,
            noise: NoiseConfig::zero(0),
            noise_scale: 1.0,
            frame: None,
            jobs: 1,
            corpus: None,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError::Value { key: key.into(), message: format!("cannot parse {v:?}") })
}

fn optional<T: std::str::FromStr>(key: &str, v: &str) -> Result<Option<T>, ConfigError> {
    if v == "none" {
        Ok(None)
    } else {
        num(key, v).map(Some)
    }
}

fn flag(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::Value { key: key.into(), message: format!("expected on/off, got {v:?}") }),
    }
}

impl RunConfig {
    /// Applies each line in order on top of the defaults. Blank lines and
    /// `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, message: format!("expected key=value, got {line:?}") })?;
            cfg.set(k.trim(), v.trim()).map_err(|e| match e {
                ConfigError::Value { key, message } => ConfigError::Syntax { line: i + 1, message: format!("{key}: {message}") },
                other => other,
            })?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        let bad = |message: String| ConfigError::Value { key: key.into(), message };
        match key {
            "alpha" => self.alpha = num(key, v)?,
            "beta" => self.beta = num(key, v)?,
            "normalize_emissions" => self.normalize_emissions = flag(key, v)?,
            "prune" => self.prune.enabled = flag(key, v)?,
            "min_mismatch_allowance" => self.prune.min_mismatch_allowance = num(key, v)?,
            "mismatch_fraction" => self.prune.mismatch_fraction = num(key, v)?,
            "per_symbol_floor" => self.prune.per_symbol_floor = optional(key, v)?,
            "cap" => self.cap = optional(key, v)?,
            "top_k" => self.top_k = num(key, v)?,
            "search" => self.search = v.parse().map_err(bad)?,
            "preset" => {
                let p = NoiseConfig::preset(v, self.noise.seed).map_err(|e| bad(e.to_string()))?;
                self.noise = NoiseConfig { confusion: self.noise.confusion, ..p };
            }
            "del_rate" => self.noise.del_rate = num(key, v)?,
            "sub_rate" => self.noise.sub_rate = num(key, v)?,
            "ins_rate" => self.noise.ins_rate = num(key, v)?,
            "noise_scale" => self.noise_scale = num(key, v)?,
            "confusion" => self.noise.confusion = v.parse::<ConfusionMode>().map_err(|e| bad(e.to_string()))?,
            "seed" => self.noise.seed = num(key, v)?,
            "frame" => self.frame = parse_frame(v).map_err(bad)?,
            "jobs" => self.jobs = num(key, v)?,
            "corpus" => self.corpus = if v == "bundled" { None } else { Some(PathBuf::from(v)) },
            _ => return Err(bad("unknown key".into())),
        }
        Ok(())
    }

    /// Checks that every setting is usable.
    pub fn validate(&self, inventory_size: usize) -> Result<(), ConfigError> {
        self.hmm_params(inventory_size)?;
        self.effective_noise().validate().map_err(|e| ConfigError::Value { key: "noise".into(), message: e.to_string() })?;
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(ConfigError::Value { key: "noise_scale".into(), message: "must be finite and non-negative".into() });
        }
        if self.jobs == 0 {
            return Err(ConfigError::Value { key: "jobs".into(), message: "must be at least 1".into() });
        }
        if self.top_k == 0 || self.cap == Some(0) {
            return Err(ConfigError::Value { key: "top_k/cap".into(), message: "must be at least 1".into() });
        }
        Ok(())
    }

    pub fn hmm_params(&self, inventory_size: usize) -> Result<HmmParams, ConfigError> {
        let mut p = HmmParams::new(self.alpha, self.beta, inventory_size).map_err(|e: IndexError| ConfigError::Value {
            key: "alpha/beta".into(),
            message: e.to_string(),
        })?;
        p.normalize_emissions = self.normalize_emissions;
        Ok(p)
    }

    pub fn analyzer_config(&self, inventory_size: usize) -> Result<AnalyzerConfig, ConfigError> {
        Ok(AnalyzerConfig {
            params: self.hmm_params(inventory_size)?,
            prune: self.prune,
            search: self.search,
            cap: self.cap,
            top_k: Some(self.top_k),
        })
    }

    /// Noise rates after `noise_scale`.
    pub fn effective_noise(&self) -> NoiseConfig {
        self.noise.scaled(self.noise_scale)
    }

    /// Canonical `key=value` listing of every setting.
    pub fn to_text(&self) -> String {
        let opt = |o: Option<String>| o.unwrap_or_else(|| "none".into());
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("alpha", self.alpha.to_string());
        kv("beta", self.beta.to_string());
        kv("normalize_emissions", if self.normalize_emissions { "on" } else { "off" }.into());
        kv("prune", if self.prune.enabled { "on" } else { "off" }.into());
        kv("min_mismatch_allowance", self.prune.min_mismatch_allowance.to_string());
        kv("mismatch_fraction", self.prune.mismatch_fraction.to_string());
        kv("per_symbol_floor", opt(self.prune.per_symbol_floor.map(|f| f.to_string())));
        kv("cap", opt(self.cap.map(|c| c.to_string())));
        kv("top_k", self.top_k.to_string());
        kv("search", self.search.to_string());
        kv("del_rate", self.noise.del_rate.to_string());
        kv("sub_rate", self.noise.sub_rate.to_string());
        kv("ins_rate", self.noise.ins_rate.to_string());
        kv("noise_scale", self.noise_scale.to_string());
        kv("confusion", self.noise.confusion.to_string());
        kv("seed", self.noise.seed.to_string());
        kv("frame", self.frame.map_or_else(|| "off".into(), |(a, b)| format!("{a},{b}")));
        kv("jobs", self.jobs.to_string());
        kv("corpus", self.corpus.as_ref().map_or_else(|| "bundled".into(), |p| p.display().to_string()));
        out
    }
}

/// `min,max` repetition range, or `off`.
pub fn parse_frame(v: &str) -> Result<Option<(usize, usize)>, String> {
    if v == "off" || v == "none" {
        return Ok(None);
    }
    let (a, b) = v.split_once(',').ok_or_else(|| format!("expected min,max, got {v:?}"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad minimum {a:?}"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad maximum {b:?}"))?;
    if a < 1 || b < a {
        return Err(format!("need 1 <= min <= max, got {a},{b}"));
    }
    Ok(Some((a, b)))
}
