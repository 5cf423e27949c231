//! Scenario configuration file.
//!
//! A single JSON document. Only `profiles`, `capacity`, `lambda` and `duration`
//! are required; everything else falls back to the defaults below.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::AgentConfig;
use crate::allocation::InitialMode;
use crate::baselines::SpsaConfig;
use crate::error::{Error, Result};
use crate::workload::{validate_profiles, ArrivalMode, SpProfile};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "EDGECACHE_OUT_DIR";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    #[default]
    Rl,
    Proportional,
    Uniform,
    Optimal,
    Spsa,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Rl => "rl",
            Policy::Proportional => "proportional",
            Policy::Uniform => "uniform",
            Policy::Optimal => "optimal",
            Policy::Spsa => "spsa",
        }
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "rl" => Ok(Policy::Rl),
            "proportional" => Ok(Policy::Proportional),
            "uniform" => Ok(Policy::Uniform),
            "optimal" => Ok(Policy::Optimal),
            "spsa" => Ok(Policy::Spsa),
            other => Err(format!(
                "unknown policy {other:?} (expected rl, proportional, uniform, optimal or spsa)"
            )),
        }
    }
}

/// SPSA constants; unset fields take [`SpsaConfig::standard`] values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpsaSection {
    pub gain_a: Option<f64>,
    pub gain_c: Option<f64>,
    pub decay_alpha: Option<f64>,
    pub decay_gamma: Option<f64>,
    pub stability: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub profiles: Vec<SpProfile<f64>>,
    /// Cache size in objects.
    pub capacity: u64,
    /// Transfer step in objects; defaults to `capacity / 50`.
    #[serde(default)]
    pub delta: Option<u64>,
    /// Aggregate request rate, requests per second.
    pub lambda: f64,
    /// Slot length in seconds.
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Simulated time in seconds.
    pub duration: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub policy: Policy,
    #[serde(default)]
    pub arrival_mode: ArrivalMode,
    #[serde(default)]
    pub initial_allocation: InitialMode,
    /// Smoothing and reporting window in seconds.
    #[serde(default = "default_window")]
    pub window_seconds: f64,
    /// Exploration/batch schedule horizon in seconds; overrides
    /// `agent.schedule.horizon` (slots) when present.
    #[serde(default)]
    pub horizon_seconds: Option<f64>,
    #[serde(default)]
    pub agent: AgentConfig<f64>,
    #[serde(default)]
    pub spsa: SpsaSection,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_tau() -> f64 {
    0.25
}

fn default_window() -> f64 {
    600.0
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_owned(),
            source,
        })?;
        let config: Self = serde_json::from_str(&text).map_err(|e| {
            Error::InvalidConfig(format!("{}: {e}", path.display()))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn delta(&self) -> u64 {
        self.delta.unwrap_or(self.capacity / 50)
    }

    pub fn num_slots(&self) -> u64 {
        (self.duration / self.tau).round() as u64
    }

    pub fn window_slots(&self) -> usize {
        ((self.window_seconds / self.tau).round() as usize).max(1)
    }

    /// Agent settings with the schedule horizon resolved to slots.
    pub fn agent_config(&self) -> AgentConfig<f64> {
        let mut agent = self.agent.clone();
        if let Some(h) = self.horizon_seconds {
            agent.schedule.horizon = ((h / self.tau).round() as u64).max(1);
        }
        agent
    }

    pub fn spsa_config(&self) -> SpsaConfig<f64> {
        let base = SpsaConfig::standard(self.capacity, self.delta());
        SpsaConfig {
            gain_a: self.spsa.gain_a.unwrap_or(base.gain_a),
            gain_c: self.spsa.gain_c.unwrap_or(base.gain_c),
            decay_alpha: self.spsa.decay_alpha.unwrap_or(base.decay_alpha),
            decay_gamma: self.spsa.decay_gamma.unwrap_or(base.decay_gamma),
            stability: self.spsa.stability.unwrap_or(base.stability),
        }
    }

    /// Output directory: the config value, else `$EDGECACHE_OUT_DIR`, else `out`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Checks every cross-field invariant, naming the first one violated.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        validate_profiles(&self.profiles).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if self.capacity == 0 {
            return fail("capacity must be positive".into());
        }
        let delta = self.delta();
        if delta == 0 {
            return fail(format!(
                "delta must be positive (default capacity/50 is 0 for capacity {})",
                self.capacity
            ));
        }
        if !self.capacity.is_multiple_of(delta) {
            return fail(format!(
                "delta {delta} does not divide capacity {}",
                self.capacity
            ));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return fail(format!("lambda {} must be finite and non-negative", self.lambda));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return fail(format!("tau {} must be positive", self.tau));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return fail(format!("duration {} must be non-negative", self.duration));
        }
        let slots = self.duration / self.tau;
        if (slots - slots.round()).abs() > 1e-6 {
            return fail(format!(
                "duration {} is not a whole number of {} s slots",
                self.duration, self.tau
            ));
        }
        if !(self.window_seconds > 0.0) {
            return fail("window_seconds must be positive".into());
        }
        if let Some(h) = self.horizon_seconds {
            if !(h > 0.0 && h.is_finite()) {
                return fail(format!("horizon_seconds {h} must be positive"));
            }
        }
        self.agent_config().validate()?;
        self.spsa_config().validate()?;
        Ok(())
    }
}
