//! Experiment configuration: a JSON document, shipped defaults and
//! `path=value` overrides.

use std::path::{Path, PathBuf};

use fsqpt_core::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// The defaults file, compiled in so a run needs no files at all.
pub const DEFAULTS_JSON: &str = include_str!("../config/defaults.json");

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config field `{field}`: {reason}")]
    Field { field: String, reason: String },
    #[error("config is not valid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
}

fn field(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimer: DimerParams,
    pub bath: BathParams,
    pub toolbox: PulseToolbox,
    pub ensemble: EnsembleSpec,
    pub waiting_times_fs: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Multiplicative noise on the signals; seeded from `ensemble.seed`.
    pub noise: Option<NoiseModel>,
    pub response_mode: ResponseMode,
    /// Skip the disorder ensemble and simulate the nominal dimer only.
    pub homogeneous_only: bool,
    /// Replaces the Redfield optical dephasing when set, cm⁻¹.
    pub optical_dephasing_cm: Option<f64>,
    /// Pass/fail threshold for validation and residuals.
    pub tolerance: f64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str(DEFAULTS_JSON).expect("shipped defaults parse")
    }
}

/// Replaces the value at a dotted path. The new value is read as JSON when it
/// parses and as a plain string otherwise, so `output_dir=out` works unquoted.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| field(assignment, "override must look like path=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, key) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| field(path, format!("`{}` is not an object", parts[..i].join("."))))?;
        if !obj.contains_key(*key) {
            return Err(field(path, "no such config field"));
        }
        if i + 1 == parts.len() {
            obj.insert((*key).to_string(), value);
            return Ok(());
        }
        node = obj.get_mut(*key).unwrap();
    }
    Err(field(path, "empty path"))
}

impl ExperimentConfig {
    /// Loads a config (or the `config` member of a run manifest), starting
    /// from the defaults so partial files are allowed, then applies overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut doc: Value = serde_json::from_str(DEFAULTS_JSON)?;
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                path: p.to_path_buf(),
                source,
            })?;
            let mut user: Value = serde_json::from_str(&text)?;
            if let Some(inner) = user.get_mut("config") {
                user = inner.take();
            }
            merge(&mut doc, user, "")?;
        }
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: ExperimentConfig = serde_json::from_value(doc)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let core = |prefix: &str, e: fsqpt_core::Error| match e {
            fsqpt_core::Error::InvalidParameter { name, reason } => field(format!("{prefix}.{name}"), reason),
            other => field(prefix, other.to_string()),
        };
        self.dimer.validate().map_err(|e| core("dimer", e))?;
        self.bath.validate().map_err(|e| core("bath", e))?;
        self.toolbox.validate().map_err(|e| core("toolbox", e))?;
        self.ensemble.validate().map_err(|e| core("ensemble", e))?;
        let t = &self.waiting_times_fs;
        if t.is_empty() {
            return Err(field("waiting_times_fs", "at least one waiting time is required"));
        }
        let min_t = 3.0 * self.toolbox.pulse_width_sigma;
        for (k, &x) in t.iter().enumerate() {
            if !(x.is_finite() && x >= min_t) {
                return Err(field(
                    format!("waiting_times_fs[{k}]"),
                    format!("{x} fs is below 3σ = {min_t} fs, where pulses still overlap"),
                ));
            }
            if k > 0 && x <= t[k - 1] {
                return Err(field(
                    format!("waiting_times_fs[{k}]"),
                    "grid must be strictly increasing",
                ));
            }
        }
        if self.gammas.is_empty() {
            return Err(field("gammas", "at least one quantum yield is required"));
        }
        for (k, &g) in self.gammas.iter().enumerate() {
            if !(0.0..=2.0).contains(&g) {
                return Err(field(format!("gammas[{k}]"), format!("{g} is outside [0, 2]")));
            }
            if self.gammas[..k].contains(&g) {
                return Err(field(format!("gammas[{k}]"), "duplicate value"));
            }
        }
        if let Some(n) = &self.noise {
            if !(n.relative_width >= 0.0 && n.intensity_fluctuation >= 0.0) {
                return Err(field("noise", "widths must be >= 0"));
            }
        }
        if let Some(g) = self.optical_dephasing_cm {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(field("optical_dephasing_cm", "must be finite and >= 0"));
            }
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(field("tolerance", "must be > 0"));
        }
        Ok(())
    }

    pub fn setup(&self) -> SimulationSetup {
        SimulationSetup {
            bath: self.bath,
            toolbox: self.toolbox,
            units: UnitSystem::STANDARD,
            waiting_times: self.waiting_times_fs.clone(),
            gammas: self.gammas.clone(),
            tau: 0.0,
            t: 0.0,
            mode: self.response_mode,
            optical_dephasing: self.optical_dephasing_cm,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Deep merge of `over` into `base`. Unknown keys are rejected with their path.
fn merge(base: &mut Value, over: Value, path: &str) -> Result<(), ConfigError> {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                let p = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v, &p)?,
                    None => return Err(field(p, "no such config field")),
                }
            }
            Ok(())
        }
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_the_reference_run() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.dimer, DimerParams::reference());
        assert_eq!(c.bath, BathParams::reference());
        assert_eq!(c.toolbox, PulseToolbox::reference());
        assert_eq!(c.ensemble.n_members, 10_000);
        assert_eq!(c.ensemble.sigma_inh, 40.0);
        assert_eq!(c.waiting_times_fs.len(), 30);
        assert_eq!(c.waiting_times_fs[0], 120.0);
        assert_eq!(*c.waiting_times_fs.last().unwrap(), 700.0);
        assert_eq!(c.response_mode, ResponseMode::Derived);
    }

    #[test]
    fn overrides_and_errors_name_the_field() {
        let c = ExperimentConfig::load(None, &["dimer.coupling_j=100".into(), "output_dir=elsewhere".into()]).unwrap();
        assert_eq!(c.dimer.coupling_j, 100.0);
        assert_eq!(c.output_dir, PathBuf::from("elsewhere"));
        let e = ExperimentConfig::load(None, &["dimer.nope=1".into()]).unwrap_err();
        assert!(e.to_string().contains("dimer.nope"), "{e}");
        let e = ExperimentConfig::load(None, &["waiting_times_fs=[100, 200]".into()]).unwrap_err();
        assert!(e.to_string().contains("waiting_times_fs[0]"), "{e}");
        let e = ExperimentConfig::load(None, &["waiting_times_fs=[200, 200]".into()]).unwrap_err();
        assert!(e.to_string().contains("strictly increasing"), "{e}");
        let e = ExperimentConfig::load(None, &["bath.cutoff_freq=-1".into()]).unwrap_err();
        assert!(e.to_string().contains("bath.cutoff_freq"), "{e}");
        let e = ExperimentConfig::load(None, &["gammas=[3]".into()]).unwrap_err();
        assert!(e.to_string().contains("gammas[0]"), "{e}");
    }

    #[test]
    fn json_round_trip() {
        let c = ExperimentConfig::load(None, &["noise={\"relative_width\": 0.001}".into()]).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.noise.unwrap().intensity_fluctuation, 0.0);
    }
}
