//! Experiment configuration. A config file fully determines a run: the system
//! is stored inline or as a preset name, and every parameter is explicit.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use skewsim_core::measures::DiscreteMeasure;
use skewsim_core::SkewSystem;

use crate::error::CliError;

pub const DEFAULT_PRESET: &str = include_str!("../presets/default.json");
pub const BONY_PRESET: &str = include_str!("../presets/bony.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CheckConditions,
    Graph,
    Bones,
    Thickness,
    Lyapunov,
    Stationary,
    Hutchinson,
    GraphMeasure,
    GraphDistance,
    Stability,
    Mixing,
    Sweep,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value()
            .expect("no variant is skipped")
            .get_name()
            .to_owned()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemSpec {
    Preset(String),
    Inline(SkewSystem),
}

impl SystemSpec {
    pub fn resolve(&self) -> Result<SkewSystem, CliError> {
        let system: SkewSystem = match self {
            SystemSpec::Preset(name) => {
                let text = match name.as_str() {
                    "default" => DEFAULT_PRESET,
                    "bony" => BONY_PRESET,
                    other => {
                        return Err(CliError::Config {
                            message: format!("unknown preset `{other}` (expected `default` or `bony`)"),
                            offending_keys: vec!["system".into()],
                        })
                    }
                };
                serde_json::from_str(text).map_err(|e| CliError::config(format!("preset {name}: {e}")))?
            }
            SystemSpec::Inline(s) => s.clone(),
        };
        system
            .validate(skewsim_core::interval_map::DEFAULT_VERIFY_GRID)
            .map_err(|e| CliError::config(format!("system: {e}")))?;
        Ok(system)
    }
}

/// Every tunable of every subcommand; unused ones are ignored by a command
/// but still recorded so that a report fully describes its run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Verification grid for condition checks and `C²` distances.
    pub grid: usize,
    /// Pullback or orbit depth.
    pub depth: usize,
    pub samples: usize,
    pub epsilon_bone: f64,
    /// Width below which a fiber counts as a point; also the power-iteration
    /// stopping tolerance for `stationary`.
    pub tol: f64,
    /// Targeted `(0-tail, α, 0-tail)` windows in `bones`.
    pub targeted_words: usize,
    pub bins: usize,
    pub max_iter: usize,
    /// Distance threshold for orbit exceedances.
    pub epsilon: f64,
    /// Orbit length `N` for `stability` and `sweep`.
    pub horizon: usize,
    pub lags: Vec<usize>,
    /// Target `dist_C2` values for `sweep`.
    pub deltas: Vec<f64>,
    pub grid_step: f64,
    /// Grid of the sup-norm exponent estimator.
    pub x_grid: usize,
    /// Samples for the graph-distance part of `sweep`.
    pub distance_samples: usize,
}

impl Params {
    pub fn defaults(command: Command) -> Self {
        let mut p = Params {
            grid: 10_000,
            depth: 200,
            samples: 1000,
            epsilon_bone: 1e-4,
            tol: 1e-10,
            targeted_words: 20,
            bins: 1000,
            max_iter: 10_000,
            epsilon: 0.1,
            horizon: 10_000,
            lags: vec![0, 1, 2, 5, 10, 20, 50],
            deltas: vec![0.04, 0.02, 0.01],
            grid_step: 0.01,
            x_grid: 256,
            distance_samples: 1000,
        };
        match command {
            Command::Thickness => p.depth = 2000,
            Command::Lyapunov => p.depth = 500,
            Command::GraphMeasure => p.samples = 100_000,
            Command::Stability | Command::Sweep => {
                p.samples = 200;
                p.grid = 2000;
            }
            Command::Mixing => p.samples = 10_000,
            _ => {}
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub system: SystemSpec,
    /// Second system for `stability` and `graph-distance`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<SystemSpec>,
    /// Measures for `hutchinson`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measures: Option<(DiscreteMeasure, DiscreteMeasure)>,
    pub seed: u64,
    pub out: PathBuf,
    pub params: Params,
}

const TOP_KEYS: &[&str] = &["command", "system", "compare", "measures", "seed", "out", "params"];
const PARAM_KEYS: &[&str] = &[
    "grid",
    "depth",
    "samples",
    "epsilon_bone",
    "tol",
    "targeted_words",
    "bins",
    "max_iter",
    "epsilon",
    "horizon",
    "lags",
    "deltas",
    "grid_step",
    "x_grid",
    "distance_samples",
];

impl ExperimentConfig {
    pub fn new(command: Command, system: SystemSpec, out: PathBuf) -> Self {
        Self {
            command,
            system,
            compare: None,
            measures: None,
            seed: 1,
            out,
            params: Params::defaults(command),
        }
    }

    /// Parses a config, reporting every unknown or missing key at once
    /// before any type errors.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::config(format!("not JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| CliError::config("config must be a JSON object"))?;
        let mut offending: BTreeSet<String> = BTreeSet::new();
        for key in obj.keys() {
            if !TOP_KEYS.contains(&key.as_str()) {
                offending.insert(key.clone());
            }
        }
        for key in ["command", "system", "seed", "out", "params"] {
            if !obj.contains_key(key) {
                offending.insert(key.to_owned());
            }
        }
        if let Some(params) = obj.get("params").and_then(Value::as_object) {
            for key in params.keys() {
                if !PARAM_KEYS.contains(&key.as_str()) {
                    offending.insert(format!("params.{key}"));
                }
            }
            for key in PARAM_KEYS {
                if !params.contains_key(*key) {
                    offending.insert(format!("params.{key}"));
                }
            }
        }
        if !offending.is_empty() {
            return Err(CliError::Config {
                message: "unknown or missing keys".into(),
                offending_keys: offending.into_iter().collect(),
            });
        }
        let config: ExperimentConfig = serde_json::from_value(value).map_err(|e| CliError::config(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    /// Value-range checks shared by the CLI and config files.
    pub fn check(&self) -> Result<(), CliError> {
        let p = &self.params;
        let mut bad = Vec::new();
        let mut flag = |ok: bool, key: &str| {
            if !ok {
                bad.push(format!("params.{key}"));
            }
        };
        flag(p.grid >= 2, "grid");
        flag(p.samples >= 1, "samples");
        flag(p.epsilon_bone > 0.0, "epsilon_bone");
        flag(p.tol > 0.0, "tol");
        flag(p.bins >= 2, "bins");
        flag(p.max_iter >= 1, "max_iter");
        flag(p.epsilon >= 0.0, "epsilon");
        flag(p.horizon >= 1, "horizon");
        flag(p.grid_step > 0.0, "grid_step");
        flag(p.x_grid >= 2, "x_grid");
        flag(p.deltas.iter().all(|&d| d > 0.0), "deltas");
        flag(p.distance_samples >= 1, "distance_samples");
        let depth_needed = !matches!(
            self.command,
            Command::CheckConditions | Command::Stationary | Command::Hutchinson | Command::Stability
        );
        flag(!depth_needed || p.depth >= 1, "depth");
        if self.command == Command::Hutchinson && self.measures.is_none() {
            bad.push("measures".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config {
                message: "parameter out of range or missing".into(),
                offending_keys: bad,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_load_and_validate() {
        for name in ["default", "bony"] {
            SystemSpec::Preset(name.into()).resolve().unwrap();
        }
        assert!(SystemSpec::Preset("nope".into()).resolve().is_err());
    }

    #[test]
    fn presets_match_library_constructors() {
        use skewsim_core::system::{make_bony_perturbation, make_default_step_system};
        let d = SystemSpec::Preset("default".into()).resolve().unwrap();
        assert_eq!(d, make_default_step_system());
        let b = SystemSpec::Preset("bony".into()).resolve().unwrap();
        assert_eq!(b, make_bony_perturbation(&d, 2, (0.25, 0.35), 0.02).unwrap());
    }

    #[test]
    fn config_round_trips() {
        let mut c = ExperimentConfig::new(Command::Sweep, SystemSpec::Preset("default".into()), "out".into());
        c.compare = Some(SystemSpec::Preset("bony".into()));
        c.params.deltas = vec![0.1, 1.0 / 3.0];
        let text = crate::output::to_json(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
    }

    #[test]
    fn schema_errors_list_offending_keys() {
        let c = ExperimentConfig::new(Command::Graph, SystemSpec::Preset("default".into()), "o".into());
        let mut v = serde_json::to_value(&c).unwrap();
        v["colour"] = Value::from(1);
        v["params"]["depht"] = Value::from(3);
        v["params"].as_object_mut().unwrap().remove("bins");
        match ExperimentConfig::from_json(&v.to_string()) {
            Err(CliError::Config { offending_keys, .. }) => {
                assert_eq!(offending_keys, vec!["colour", "params.bins", "params.depht"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn range_errors_list_offending_keys() {
        let mut c = ExperimentConfig::new(Command::Graph, SystemSpec::Preset("default".into()), "o".into());
        c.params.samples = 0;
        c.params.tol = -1.0;
        match c.check() {
            Err(CliError::Config { offending_keys, .. }) => {
                assert_eq!(offending_keys, vec!["params.samples", "params.tol"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
