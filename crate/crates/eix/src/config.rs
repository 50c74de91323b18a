//! Engine settings from flags, an optional `key = value` file and defaults.
//!
//! The file named by `EIX_CONFIG` holds one `key = value` pair per line; blank
//! lines and `#` comments are ignored. Recognised keys: `epsilon`, `rho`,
//! `alpha`, `beta`, `merge`, `tnorm`, `merge_gate`, `seed`, `stage_split`.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use eix_core::{EngineConfig, MergeGate, MergeMethod, TNorm};

use crate::error::{Error, Result};

pub const CONFIG_ENV: &str = "EIX_CONFIG";
pub const DEFAULT_EPSILON: f64 = 0.055;
pub const DEFAULT_RHO: f64 = 0.45;
pub const DEFAULT_STAGE_SPLIT: u64 = 200;

/// Partially specified settings. Layers combine with [`Settings::or`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub epsilon: Option<f64>,
    pub rho: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub merge: Option<MergeMethod>,
    pub tnorm: Option<TNorm>,
    pub merge_gate: Option<MergeGate>,
    pub seed: Option<u64>,
    pub stage_split: Option<u64>,
}

impl Settings {
    /// Fields set in `self` win; the rest come from `fallback`.
    pub fn or(self, fallback: Settings) -> Settings {
        Settings {
            epsilon: self.epsilon.or(fallback.epsilon),
            rho: self.rho.or(fallback.rho),
            alpha: self.alpha.or(fallback.alpha),
            beta: self.beta.or(fallback.beta),
            merge: self.merge.or(fallback.merge),
            tnorm: self.tnorm.or(fallback.tnorm),
            merge_gate: self.merge_gate.or(fallback.merge_gate),
            seed: self.seed.or(fallback.seed),
            stage_split: self.stage_split.or(fallback.stage_split),
        }
    }

    pub fn parse(text: &str) -> Result<Settings> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Config(format!("config line {}: {msg}", i + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
                v.parse()
                    .map_err(|_| format!("invalid value {v:?} for {key}"))
            }
            let r = match key {
                "epsilon" => num(key, value).map(|v| s.epsilon = Some(v)),
                "rho" => num(key, value).map(|v| s.rho = Some(v)),
                "alpha" => num(key, value).map(|v| s.alpha = Some(v)),
                "beta" => num(key, value).map(|v| s.beta = Some(v)),
                "seed" => num(key, value).map(|v| s.seed = Some(v)),
                "stage_split" => num(key, value).map(|v| s.stage_split = Some(v)),
                "merge" => parse_merge(value).map(|v| s.merge = Some(v)),
                "tnorm" => parse_tnorm(value).map(|v| s.tnorm = Some(v)),
                "merge_gate" => parse_gate(value).map(|v| s.merge_gate = Some(v)),
                _ => Err(format!("unknown key {key:?}")),
            };
            r.map_err(bad)?;
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Settings> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Settings from the file named by `EIX_CONFIG`, or empty when unset.
    pub fn from_env() -> Result<Settings> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::from_file(Path::new(&p)),
            _ => Ok(Settings::default()),
        }
    }

    /// Validated engine configuration, filling unset fields with defaults.
    pub fn engine_config(&self) -> Result<EngineConfig> {
        let cfg = EngineConfig {
            epsilon: self.epsilon.unwrap_or(DEFAULT_EPSILON),
            rho: self.rho.unwrap_or(DEFAULT_RHO),
            alpha: self.alpha.unwrap_or(EngineConfig::DEFAULT_ALPHA),
            beta: self.beta.unwrap_or(EngineConfig::DEFAULT_BETA),
            merge_method: self.merge.unwrap_or_default(),
            tnorm: self.tnorm.unwrap_or_default(),
            merge_gate: self.merge_gate.unwrap_or_default(),
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Stage boundary; `0` disables staging.
    pub fn stage_split(&self) -> Option<u64> {
        match self.stage_split.unwrap_or(DEFAULT_STAGE_SPLIT) {
            0 => None,
            n => Some(n),
        }
    }
}

pub fn parse_merge(s: &str) -> std::result::Result<MergeMethod, String> {
    match s {
        "weighted-mean" | "weighted_mean" => Ok(MergeMethod::WeightedMean),
        "convex-hull" | "convex_hull" => Ok(MergeMethod::ConvexHull),
        _ => Err(format!(
            "unknown merge method {s:?} (weighted-mean or convex-hull)"
        )),
    }
}

pub fn parse_tnorm(s: &str) -> std::result::Result<TNorm, String> {
    match s {
        "min" => Ok(TNorm::Min),
        "product" => Ok(TNorm::Product),
        _ => Err(format!("unknown t-norm {s:?} (min or product)")),
    }
}

pub fn parse_gate(s: &str) -> std::result::Result<MergeGate, String> {
    match s {
        "distance" => Ok(MergeGate::Distance),
        "core-overlap" | "core_overlap" => Ok(MergeGate::CoreOverlap),
        _ => Err(format!(
            "unknown merge gate {s:?} (distance or core-overlap)"
        )),
    }
}
