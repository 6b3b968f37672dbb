//! Experiment configuration: defaults, then a JSON file, then command-line
//! flags, each overriding the one before.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use geocensus_core::hyperbolic::{build_surface, modular_torus, SurfaceStructure};
use geocensus_core::phase::BinningSpec;
use geocensus_core::words::CurveClass;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const OUT_DIR_ENV: &str = "GEOCENSUS_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "geocensus-out";
pub const MAX_CUTOFF: f64 = 200.0;
pub const MAX_WORKERS: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

impl SurfaceConfig {
    pub fn build(&self) -> Result<SurfaceStructure, ConfigError> {
        if self.label == "modular" && self.x == 3.0 && self.y == 3.0 {
            return Ok(modular_torus());
        }
        build_surface(self.x, self.y)
            .map(|s| s.with_label(self.label.clone()))
            .map_err(|e| ConfigError(format!("surface {}: {e}", self.label)))
    }
}

/// `modular`, or `x,y` with an optional `label=` prefix.
impl FromStr for SurfaceConfig {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        if text == "modular" {
            return Ok(SurfaceConfig { label: "modular".into(), x: 3.0, y: 3.0 });
        }
        let (label, traces) = match text.split_once('=') {
            Some((l, t)) => (Some(l.to_string()), t),
            None => (None, text),
        };
        let (x, y) = traces.split_once(',').ok_or_else(|| format!("expected `modular` or `x,y`, got {text:?}"))?;
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        let (x, y) = (parse(x)?, parse(y)?);
        Ok(SurfaceConfig { label: label.unwrap_or_else(|| format!("torus({x},{y})")), x, y })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Exact Farey enumeration for simple seeds, orbit search otherwise.
    Auto,
    Simple,
    Orbit,
    AllPrimitive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub surface: SurfaceConfig,
    pub target: SurfaceConfig,
    pub seed: String,
    pub mode: Mode,
    pub cutoff: f64,
    pub grid_step: f64,
    pub fit_window: Option<(f64, f64)>,
    pub step: f64,
    pub binning: (usize, usize, usize),
    pub margin: f64,
    pub tolerance: f64,
    /// Not part of the hash: results do not depend on where they go.
    pub output_dir: Option<PathBuf>,
    /// Not part of the hash either; 0 lets the pool pick.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            surface: SurfaceConfig { label: "modular".into(), x: 3.0, y: 3.0 },
            target: SurfaceConfig { label: "torus(3,4)".into(), x: 3.0, y: 4.0 },
            seed: "a".into(),
            mode: Mode::Auto,
            cutoff: 30.0,
            grid_step: 1.0,
            fit_window: None,
            step: 0.05,
            binning: (12, 12, 16),
            margin: 0.5,
            tolerance: geocensus_core::compare::DEFAULT_TOLERANCE,
            output_dir: None,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError(what()))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        check(self.cutoff > 0.0 && self.cutoff <= MAX_CUTOFF, || {
            format!("cutoff {} outside (0, {MAX_CUTOFF}]", self.cutoff)
        })?;
        check(self.grid_step > 0.0 && self.grid_step <= self.cutoff, || {
            format!("grid step {} outside (0, cutoff]", self.grid_step)
        })?;
        if let Some((lo, hi)) = self.fit_window {
            check(0.0 < lo && lo < hi && hi <= self.cutoff, || format!("fit window ({lo}, {hi}) not inside (0, cutoff]"))?;
        }
        check(self.step > 0.0 && self.step <= 0.1, || format!("step {} outside (0, 0.1]", self.step))?;
        check((0.0..=4.0).contains(&self.margin), || format!("margin {} outside [0, 4]", self.margin))?;
        check((0.0..=1.0).contains(&self.tolerance), || format!("tolerance {} outside [0, 1]", self.tolerance))?;
        check(self.workers <= MAX_WORKERS, || format!("workers {} above {MAX_WORKERS}", self.workers))?;
        self.binning_spec()?;
        self.seed_class()?;
        for s in [&self.surface, &self.target] {
            check(!s.label.is_empty(), || "empty surface label".into())?;
            s.build()?;
        }
        Ok(())
    }

    pub fn binning_spec(&self) -> Result<BinningSpec, ConfigError> {
        let (u, v, a) = self.binning;
        BinningSpec::new(u, v, a).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn seed_class(&self) -> Result<CurveClass, ConfigError> {
        CurveClass::parse(&self.seed).map_err(|e| ConfigError(format!("seed {:?}: {e}", self.seed)))
    }

    pub fn fit_window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or((self.cutoff / 3.0, self.cutoff))
    }

    /// Flag, then file, then the environment, then the built-in default.
    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    /// SHA-256 of the canonical JSON of everything that affects results.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let obj = v.as_object_mut().expect("config is an object");
        obj.remove("output_dir");
        obj.remove("workers");
        let digest = Sha256::digest(serde_json::to_string(&v).expect("value serializes").as_bytes());
        format!("{digest:x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surface_arguments() {
        assert_eq!("modular".parse::<SurfaceConfig>().unwrap().x, 3.0);
        let s: SurfaceConfig = "t=3,4.5".parse().unwrap();
        assert_eq!((s.label.as_str(), s.x, s.y), ("t", 3.0, 4.5));
        assert_eq!("3,4".parse::<SurfaceConfig>().unwrap().label, "torus(3,4)");
        assert!("3".parse::<SurfaceConfig>().is_err());
        assert!("x,4".parse::<SurfaceConfig>().is_err());
    }

    #[test]
    fn hash_ignores_plumbing() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig { workers: 8, output_dir: Some("elsewhere".into()), ..a.clone() };
        let c = ExperimentConfig { cutoff: 31.0, ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        for bad in [
            ExperimentConfig { cutoff: -1.0, ..Default::default() },
            ExperimentConfig { step: 0.5, ..Default::default() },
            ExperimentConfig { seed: "abx".into(), ..Default::default() },
            ExperimentConfig { seed: "aA".into(), ..Default::default() },
            ExperimentConfig { binning: (12, 12, 15), ..Default::default() },
            ExperimentConfig { fit_window: Some((20.0, 10.0)), ..Default::default() },
            ExperimentConfig { surface: SurfaceConfig { label: "s".into(), x: 1.0, y: 3.0 }, ..Default::default() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"cutof": 3}"#).is_err());
        let c: ExperimentConfig = serde_json::from_str(r#"{"cutoff": 12.5}"#).unwrap();
        assert_eq!(c.cutoff, 12.5);
        assert_eq!(c.seed, "a");
    }
}
