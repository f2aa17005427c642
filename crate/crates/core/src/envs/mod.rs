//! Episodic environments behind one interface.
//!
//! | name       | features | actions | reward / step   | max steps |
//! |------------|----------|---------|-----------------|-----------|
//! | `cartpole` | 4        | 2       | 1               | 200       |
//! | `acrobot`  | 6        | 3       | -1 (0 at goal)  | 500       |
//! | `qcontrol` | 4        | 2       | fidelity to `|1>` | 10      |

mod acrobot;
mod cartpole;
mod qcontrol;

pub use acrobot::Acrobot;
pub use cartpole::CartPole;
pub use qcontrol::QControl;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::qsim::Statevector;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    CartPole,
    Acrobot,
    QControl,
}

impl EnvKind {
    pub const ALL: [EnvKind; 3] = [EnvKind::CartPole, EnvKind::Acrobot, EnvKind::QControl];

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::CartPole => "cartpole",
            EnvKind::Acrobot => "acrobot",
            EnvKind::QControl => "qcontrol",
        }
    }

    pub fn spec(self) -> EnvSpec {
        match self {
            EnvKind::CartPole => EnvSpec { kind: self, n_features: 4, n_actions: 2, max_steps: 200, gamma: 0.99 },
            EnvKind::Acrobot => EnvSpec { kind: self, n_features: 6, n_actions: 3, max_steps: 500, gamma: 0.99 },
            EnvKind::QControl => EnvSpec { kind: self, n_features: 4, n_actions: 2, max_steps: 10, gamma: 0.99 },
        }
    }

    pub fn make(self) -> Box<dyn Env> {
        match self {
            EnvKind::CartPole => Box::new(CartPole::new()),
            EnvKind::Acrobot => Box::new(Acrobot::new()),
            EnvKind::QControl => Box::new(QControl::new()),
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnvKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config(format!("unknown environment {s:?} (expected cartpole, acrobot or qcontrol)")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub kind: EnvKind,
    pub n_features: usize,
    pub n_actions: usize,
    pub max_steps: usize,
    /// Default discount; runs may override it.
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvObservation {
    pub features: Vec<f64>,
    /// The qubit itself, for QControl only.
    pub quantum_state: Option<Statevector>,
}

impl EnvObservation {
    pub fn classical(features: Vec<f64>) -> Self {
        Self { features, quantum_state: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub observation: EnvObservation,
    pub reward: f64,
    pub done: bool,
    /// Number of steps taken so far in the episode, this one included.
    pub step_index: usize,
}

pub trait Env: Send {
    fn spec(&self) -> EnvSpec;
    fn reset(&mut self, rng: &mut dyn RngCore) -> EnvObservation;
    fn step(&mut self, action: usize) -> Result<StepResult>;
}

pub(crate) fn check_action(action: usize, n_actions: usize) -> Result<()> {
    if action >= n_actions {
        return Err(Error::contract(format!("action {action} out of range for {n_actions} actions")));
    }
    Ok(())
}

/// Suffix-discounted returns `G_t = Σ_{t'} γ^{t'} r_{t+t'}`, one reverse pass.
pub fn discounted_returns(rewards: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::config(format!("gamma must be in (0, 1], got {gamma}")));
    }
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (g, r) in out.iter_mut().zip(rewards).rev() {
        acc = r + gamma * acc;
        *g = acc;
    }
    Ok(out)
}

/// Writes trajectory rows `episode, step, features..., action, reward, done`.
pub struct TrajectoryCsv<W: Write> {
    out: W,
}

impl<W: Write> TrajectoryCsv<W> {
    pub fn new(mut out: W, n_features: usize) -> std::io::Result<Self> {
        let mut header = vec!["episode".to_string(), "step".to_string()];
        header.extend((0..n_features).map(|i| format!("f{i}")));
        header.extend(["action", "reward", "done"].map(String::from));
        writeln!(out, "{}", header.join(","))?;
        Ok(Self { out })
    }

    pub fn row(&mut self, episode: usize, step: usize, features: &[f64], action: usize, reward: f64, done: bool) -> std::io::Result<()> {
        let mut cells = vec![episode.to_string(), step.to_string()];
        cells.extend(features.iter().map(|f| f.to_string()));
        cells.extend([action.to_string(), reward.to_string(), (done as u8).to_string()]);
        writeln!(self.out, "{}", cells.join(","))
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
