//! JSON run configuration. Unknown keys are rejected in every section so
//! that misspelled rate names fail loudly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixtures::X0;
use crate::kcc::StabilityOptions;
use crate::linalg::DEFAULT_EIGEN_TOL;
use crate::model::{CompartmentState, ModelParams};
use crate::ode::AdaptiveOptions;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid config {path}: {reason}")]
    Invalid { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub params: ModelParams,
    #[serde(default = "default_state")]
    pub initial_state: CompartmentState,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub surface: SurfaceConfig,
}

fn default_state() -> CompartmentState {
    CompartmentState::from_vector(&X0, 0.0).expect("fixture has six entries")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub adaptive: bool,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        let a = AdaptiveOptions::default();
        IntegratorConfig {
            t0: 0.0,
            t1: 100.0,
            dt: 0.05,
            adaptive: false,
            rtol: a.rel_tol,
            atol: a.abs_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    /// Reject negative compartments during evaluation.
    pub strict: bool,
    /// Relative half-width of the marginal band for the Jacobi verdict.
    pub margin_rel: f64,
    pub eigen_tol: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let s = StabilityOptions::default();
        GeometryConfig {
            strict: false,
            margin_rel: s.margin_rel,
            eigen_tol: DEFAULT_EIGEN_TOL,
        }
    }
}

impl GeometryConfig {
    pub fn stability_options(&self) -> StabilityOptions {
        StabilityOptions {
            margin_rel: self.margin_rel,
            margin_abs: 0.0,
            eigen_tol: self.eigen_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceConfig {
    /// Nodes per axis.
    pub count: usize,
    /// Axis half-width relative to the reference coordinate.
    pub rel_width: f64,
    /// Lower bound for the half-width (for coordinates near zero).
    pub min_width: f64,
    /// Level value; defaults to EYM at the reference state.
    pub rho: Option<f64>,
    /// Band half-width for point-cloud output; 0 means mesh output.
    pub tol: f64,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        SurfaceConfig {
            count: 21,
            rel_width: 0.5,
            min_width: 1.0,
            rho: None,
            tol: 0.0,
        }
    }
}

impl Config {
    pub fn from_json_str(text: &str, path: &str) -> Result<Self, ConfigError> {
        let cfg: Config = serde_json::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_string(),
            source,
        })?;
        cfg.validate().map_err(|reason| ConfigError::Invalid {
            path: path.to_string(),
            reason,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: shown.clone(),
            source,
        })?;
        Config::from_json_str(&text, &shown)
    }

    fn validate(&self) -> Result<(), String> {
        self.params.validate().map_err(|e| format!("params: {e}"))?;
        let x = self.initial_state.vector();
        if x.iter().chain([self.initial_state.d].iter()).any(|v| !v.is_finite()) {
            return Err("initial_state: values must be finite".into());
        }
        let i = &self.integrator;
        if !(i.t0.is_finite() && i.t1.is_finite() && i.t1 > i.t0) {
            return Err(format!("integrator: need t1 > t0, got t0 = {}, t1 = {}", i.t0, i.t1));
        }
        if !(i.dt > 0.0 && i.dt.is_finite()) {
            return Err(format!("integrator: dt = {} must be > 0", i.dt));
        }
        if !(i.rtol > 0.0 && i.atol > 0.0) {
            return Err("integrator: rtol and atol must be > 0".into());
        }
        let g = &self.geometry;
        if !(g.margin_rel >= 0.0 && g.eigen_tol > 0.0) {
            return Err("geometry: margin_rel must be >= 0 and eigen_tol > 0".into());
        }
        let s = &self.surface;
        if s.count < 2 {
            return Err(format!("surface: count = {} must be >= 2", s.count));
        }
        if !(s.rel_width >= 0.0 && s.min_width > 0.0) {
            return Err("surface: rel_width must be >= 0 and min_width > 0".into());
        }
        if let Some(rho) = s.rho {
            if !(rho >= 0.0 && rho.is_finite()) {
                return Err(format!("surface: rho = {rho} must be >= 0"));
            }
        }
        if !(s.tol >= 0.0 && s.tol.is_finite()) {
            return Err(format!("surface: tol = {} must be >= 0", s.tol));
        }
        Ok(())
    }
}
