//! Experiment configs: presets, strict JSON parsing and flag overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::agent::{Agent, ClassicalAgent, Policy, PolicyKind, QuantumAgent};
use crate::classical;
use crate::envs::EnvKind;
use crate::reinforce::{EnvFactory, InitStrategy, TrainConfig};
use crate::vqpolicy::CircuitSpec;
use crate::{Error, Result};

/// Environment variable consulted when no output directory is configured.
pub const OUT_DIR_ENV: &str = "QPG_OUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub environment: EnvKind,
    pub policy: PolicyKind,
    /// Circuit depth; the single-qubit control circuit has exactly one.
    pub n_layers: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub episodes: usize,
    pub gamma: f64,
    pub init: InitStrategy,
    pub beta_init: InitStrategy,
    pub seed: u64,
    /// `None` for exact expectations.
    pub shots: Option<u64>,
    pub dropout: f64,
    pub output_dir: Option<PathBuf>,
    pub fisher_checkpoints: bool,
    pub parallel_rollouts: usize,
    pub wall_clock: bool,
}

/// Named preset, `<environment>-<policy>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Preset {
    pub environment: EnvKind,
    pub policy: PolicyKind,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset { environment: EnvKind::CartPole, policy: PolicyKind::Quantum },
        Preset { environment: EnvKind::CartPole, policy: PolicyKind::Classical },
        Preset { environment: EnvKind::Acrobot, policy: PolicyKind::Quantum },
        Preset { environment: EnvKind::Acrobot, policy: PolicyKind::Classical },
        Preset { environment: EnvKind::QControl, policy: PolicyKind::Quantum },
        Preset { environment: EnvKind::QControl, policy: PolicyKind::Classical },
    ];

    pub fn config(self) -> ExperimentConfig {
        let quantum = self.policy == PolicyKind::Quantum;
        let (learning_rate, n_layers) = match (self.environment, quantum) {
            (EnvKind::CartPole, true) => (0.1, 3),
            (EnvKind::Acrobot, true) => (0.1, 4),
            (EnvKind::QControl, true) => (0.01, 1),
            (_, false) => (0.01, 0),
        };
        let episodes = match self.environment {
            EnvKind::QControl => 500,
            _ => 1000,
        };
        ExperimentConfig {
            name: self.to_string(),
            environment: self.environment,
            policy: self.policy,
            n_layers,
            learning_rate,
            batch_size: 10,
            episodes,
            gamma: 0.99,
            init: InitStrategy::GlorotNormal { gain: 1.0 },
            beta_init: InitStrategy::BETA,
            seed: 0,
            shots: None,
            dropout: 0.0,
            output_dir: None,
            fisher_checkpoints: false,
            parallel_rollouts: 1,
            wall_clock: false,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let policy = match self.policy {
            PolicyKind::Quantum => "quantum",
            PolicyKind::Classical => "classical",
        };
        write!(f, "{}-{policy}", self.environment)
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL.into_iter().find(|p| p.to_string() == s).ok_or_else(|| {
            let names: Vec<String> = Preset::ALL.iter().map(ToString::to_string).collect();
            Error::config(format!("unknown preset {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

/// Every field optional, for layering presets, files and flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub name: Option<String>,
    pub environment: Option<EnvKind>,
    pub policy: Option<PolicyKind>,
    pub n_layers: Option<usize>,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
    pub episodes: Option<usize>,
    pub gamma: Option<f64>,
    pub init: Option<InitStrategy>,
    pub beta_init: Option<InitStrategy>,
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub dropout: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub fisher_checkpoints: Option<bool>,
    pub parallel_rollouts: Option<usize>,
    pub wall_clock: Option<bool>,
}

macro_rules! overlay {
    ($base:ident, $over:ident, $($f:ident),*) => {
        PartialConfig { $($f: $over.$f.or($base.$f)),* }
    };
}

impl PartialConfig {
    /// `over` wins wherever it sets a field.
    pub fn overlay(self, over: PartialConfig) -> PartialConfig {
        let base = self;
        overlay!(
            base, over, name, environment, policy, n_layers, learning_rate, batch_size, episodes, gamma, init,
            beta_init, seed, shots, dropout, output_dir, fisher_checkpoints, parallel_rollouts, wall_clock
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if text.trim().is_empty() {
            return Ok(PartialConfig::default());
        }
        Self::from_json(&text)
    }

    /// Fills defaults, then checks every field, reporting all problems at once.
    pub fn resolve(self) -> Result<ExperimentConfig> {
        let mut missing = Vec::new();
        macro_rules! required {
            ($f:ident) => {
                match self.$f {
                    Some(v) => Some(v),
                    None => {
                        missing.push(stringify!($f));
                        None
                    }
                }
            };
        }
        let environment = required!(environment);
        let policy = required!(policy);
        let learning_rate = required!(learning_rate);
        let batch_size = required!(batch_size);
        let episodes = required!(episodes);
        let gamma = required!(gamma);
        let n_layers = match (self.n_layers, policy) {
            (Some(n), _) => Some(n),
            (None, Some(PolicyKind::Classical)) => Some(0),
            (None, _) => {
                missing.push("n_layers");
                None
            }
        };
        if !missing.is_empty() {
            return Err(Error::config(format!("missing required fields: {}", missing.join(", "))));
        }
        let (environment, policy) = (environment.unwrap(), policy.unwrap());
        let config = ExperimentConfig {
            name: self.name.unwrap_or_else(|| Preset { environment, policy }.to_string()),
            environment,
            policy,
            n_layers: n_layers.unwrap(),
            learning_rate: learning_rate.unwrap(),
            batch_size: batch_size.unwrap(),
            episodes: episodes.unwrap(),
            gamma: gamma.unwrap(),
            init: self.init.unwrap_or_default(),
            beta_init: self.beta_init.unwrap_or(InitStrategy::BETA),
            seed: self.seed.unwrap_or(0),
            shots: self.shots,
            dropout: self.dropout.unwrap_or(0.0),
            output_dir: self.output_dir,
            fisher_checkpoints: self.fisher_checkpoints.unwrap_or(false),
            parallel_rollouts: self.parallel_rollouts.unwrap_or(1),
            wall_clock: self.wall_clock.unwrap_or(false),
        };
        config.validate()?;
        Ok(config)
    }
}

impl From<ExperimentConfig> for PartialConfig {
    fn from(c: ExperimentConfig) -> Self {
        PartialConfig {
            name: Some(c.name),
            environment: Some(c.environment),
            policy: Some(c.policy),
            n_layers: Some(c.n_layers),
            learning_rate: Some(c.learning_rate),
            batch_size: Some(c.batch_size),
            episodes: Some(c.episodes),
            gamma: Some(c.gamma),
            init: Some(c.init),
            beta_init: Some(c.beta_init),
            seed: Some(c.seed),
            shots: c.shots,
            dropout: Some(c.dropout),
            output_dir: c.output_dir,
            fisher_checkpoints: Some(c.fisher_checkpoints),
            parallel_rollouts: Some(c.parallel_rollouts),
            wall_clock: Some(c.wall_clock),
        }
    }
}

impl ExperimentConfig {
    /// Layers `preset → file → flags`; later sources win.
    pub fn load(preset: Option<Preset>, file: Option<&Path>, flags: PartialConfig) -> Result<Self> {
        let mut merged = preset.map(|p| PartialConfig::from(p.config())).unwrap_or_default();
        if let Some(path) = file {
            merged = merged.overlay(PartialConfig::from_file(path)?);
        }
        merged.overlay(flags).resolve()
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            errs.push(format!("gamma: must be in (0, 1], got {}", self.gamma));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            errs.push(format!("learning_rate: must be positive, got {}", self.learning_rate));
        }
        if self.batch_size == 0 {
            errs.push("batch_size: must be at least 1".to_string());
        }
        if self.parallel_rollouts == 0 {
            errs.push("parallel_rollouts: must be at least 1".to_string());
        }
        if self.shots == Some(0) {
            errs.push("shots: must be positive".to_string());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            errs.push(format!("dropout: must be in [0, 1), got {}", self.dropout));
        }
        match self.policy {
            PolicyKind::Quantum => {
                if self.environment == EnvKind::QControl && self.n_layers != 1 {
                    errs.push(format!("n_layers: the control circuit has exactly 1 layer, got {}", self.n_layers));
                } else if self.n_layers == 0 {
                    errs.push("n_layers: must be at least 1".to_string());
                }
                if self.dropout != 0.0 {
                    errs.push("dropout: only applies to classical policies".to_string());
                }
            }
            PolicyKind::Classical => {
                if self.shots.is_some() {
                    errs.push("shots: only applies to quantum policies".to_string());
                }
            }
        }
        for (field, init) in [("init", &self.init), ("beta_init", &self.beta_init)] {
            if let Err(e) = init.validate() {
                errs.push(format!("{field}: {e}"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::config(errs.join("; ")))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Configured output directory, else `$QPG_OUT_DIR/<name>-seed<seed>`.
    pub fn resolve_output_dir(&self) -> Result<PathBuf> {
        if let Some(dir) = &self.output_dir {
            return Ok(dir.clone());
        }
        match std::env::var_os(OUT_DIR_ENV) {
            Some(root) => Ok(PathBuf::from(root).join(format!("{}-seed{}", self.name, self.seed))),
            None => Err(Error::config(format!("no output directory: pass --out or set {OUT_DIR_ENV}"))),
        }
    }

    pub fn circuit_spec(&self) -> Result<CircuitSpec> {
        let env = self.environment.spec();
        match self.environment {
            EnvKind::QControl => Ok(CircuitSpec::single_u3()),
            _ => CircuitSpec::layered(env.n_features, self.n_layers, env.n_actions),
        }
    }

    pub fn agent(&self) -> Result<Agent> {
        Ok(match self.policy {
            PolicyKind::Quantum => Agent::Quantum(QuantumAgent::new(self.circuit_spec()?, self.shots)?),
            PolicyKind::Classical => {
                let mut spec = classical::preset(self.environment);
                spec.dropout_p = self.dropout;
                Agent::Classical(ClassicalAgent::new(spec)?)
            }
        })
    }

    pub fn n_params(&self) -> Result<usize> {
        Ok(self.agent()?.n_params())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            episodes: self.episodes,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            gamma: self.gamma,
            seed: self.seed,
            init: self.init,
            beta_init: self.beta_init,
            parallel_rollouts: self.parallel_rollouts,
            wall_clock: self.wall_clock,
        }
    }

    pub fn env_factory(&self) -> EnvFactory {
        let kind = self.environment;
        Arc::new(move || kind.make())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_the_reference_table() {
        let c = "cartpole-quantum".parse::<Preset>().unwrap().config();
        assert_eq!((c.learning_rate, c.n_layers, c.batch_size), (0.1, 3, 10));
        let c = "acrobot-quantum".parse::<Preset>().unwrap().config();
        assert_eq!((c.learning_rate, c.n_layers, c.batch_size), (0.1, 4, 10));
        let c = "qcontrol-quantum".parse::<Preset>().unwrap().config();
        assert_eq!((c.learning_rate, c.n_layers, c.batch_size, c.episodes), (0.01, 1, 10, 500));
        for env in ["cartpole", "acrobot", "qcontrol"] {
            let c = format!("{env}-classical").parse::<Preset>().unwrap().config();
            assert_eq!((c.learning_rate, c.batch_size), (0.01, 10));
        }
        assert!("pong-quantum".parse::<Preset>().is_err());
    }

    #[test]
    fn parameter_counts() {
        let count = |p: &str| p.parse::<Preset>().unwrap().config().n_params().unwrap();
        assert_eq!(count("cartpole-quantum"), 25);
        assert_eq!(count("cartpole-classical"), 768);
        assert_eq!(count("acrobot-classical"), 288);
        assert_eq!(count("qcontrol-classical"), 96);
        assert_eq!(count("acrobot-quantum"), 49);
        assert_eq!(count("qcontrol-quantum"), 4);
    }

    #[test]
    fn presets_round_trip_through_json() {
        for p in Preset::ALL {
            let c = p.config();
            let back = PartialConfig::from_json(&c.to_json()).unwrap().resolve().unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn empty_config_lists_required_fields() {
        let err = PartialConfig::from_json("{}").unwrap().resolve().unwrap_err().to_string();
        for f in ["environment", "policy", "learning_rate", "batch_size", "episodes", "gamma", "n_layers"] {
            assert!(err.contains(f), "{err}");
        }
    }

    #[test]
    fn range_errors_name_the_field() {
        let mut p = PartialConfig::from(Preset::ALL[0].config());
        p.gamma = Some(1.5);
        p.batch_size = Some(0);
        let err = p.resolve().unwrap_err().to_string();
        assert!(err.contains("gamma") && err.contains("batch_size"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = PartialConfig::from_json(r#"{"gama": 0.9}"#).unwrap_err().to_string();
        assert!(err.contains("gama"), "{err}");
    }

    #[test]
    fn flags_override_file_override_preset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"seed": 4, "episodes": 20}"#).unwrap();
        let flags = PartialConfig { episodes: Some(7), ..Default::default() };
        let c = ExperimentConfig::load(Some(Preset::ALL[4]), Some(&path), flags).unwrap();
        assert_eq!((c.seed, c.episodes, c.learning_rate), (4, 7, 0.01));
    }
}
