//! Variational softmax policy.
//!
//! A state is angle-encoded with one `RX` per feature, passed through `L`
//! hardware-efficient layers (an `RY`, `RZ` pair on every qubit followed by a
//! CNOT cascade whose stride grows with the layer index) and read out as one
//! Pauli-Z expectation per action. Action probabilities are the softmax of
//! those preferences scaled by a trainable inverse temperature `β`.
//!
//! The trainable vector is `theta` followed by `beta`, so it has `k + 1`
//! entries for `k` rotation angles. Parameters are laid out layer-major,
//! qubit-major within a layer, `RY` before `RZ`.
//!
//! The single-qubit control variant (`single_u3`) replaces the ansatz with one
//! `U3(θ, φ, λ)` gate, takes a prepared qubit as input instead of encoded
//! features, and reads preferences `[<σ_z>, -<σ_z>]`.

mod circuit;
mod gradient;

pub use circuit::{build_ansatz, encode, preferences, prepare_input};
pub use gradient::{grad_log_policy, grad_preference, grad_preferences, GradientMethod};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::qsim::{Statevector, MAX_QUBITS};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Layered,
    SingleU3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    AngleRx,
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub n_actions: usize,
    pub architecture: Architecture,
    pub encoding: Encoding,
}

impl CircuitSpec {
    pub fn new(
        n_qubits: usize,
        n_layers: usize,
        n_actions: usize,
        architecture: Architecture,
        encoding: Encoding,
    ) -> Result<Self> {
        let spec = Self {
            n_qubits,
            n_layers,
            n_actions,
            architecture,
            encoding,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Angle-encoded layered circuit.
    pub fn layered(n_qubits: usize, n_layers: usize, n_actions: usize) -> Result<Self> {
        Self::new(n_qubits, n_layers, n_actions, Architecture::Layered, Encoding::AngleRx)
    }

    /// One `U3` on a prepared qubit, two actions.
    pub fn single_u3() -> Self {
        Self {
            n_qubits: 1,
            n_layers: 1,
            n_actions: 2,
            architecture: Architecture::SingleU3,
            encoding: Encoding::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::config(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {}",
                self.n_qubits
            )));
        }
        if self.n_actions < 2 {
            return Err(Error::config("a policy needs at least two actions"));
        }
        match self.architecture {
            Architecture::Layered => {
                if self.n_layers == 0 {
                    return Err(Error::config("n_layers must be at least 1"));
                }
                if self.n_actions > self.n_qubits {
                    return Err(Error::config(format!(
                        "{} actions need at least as many qubits, got {}",
                        self.n_actions, self.n_qubits
                    )));
                }
            }
            Architecture::SingleU3 => {
                if self.n_qubits != 1 || self.n_actions != 2 {
                    return Err(Error::config("single_u3 needs exactly 1 qubit and 2 actions"));
                }
            }
        }
        Ok(())
    }

    /// Number of rotation angles `k` (β excluded).
    pub fn n_theta(&self) -> usize {
        match self.architecture {
            Architecture::Layered => 2 * self.n_qubits * self.n_layers,
            Architecture::SingleU3 => 3,
        }
    }

    /// Length of the full trainable vector, `k + 1`.
    pub fn n_trainable(&self) -> usize {
        self.n_theta() + 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub theta: Vec<f64>,
    pub beta: f64,
}

impl PolicyParams {
    pub fn new(spec: &CircuitSpec, theta: Vec<f64>, beta: f64) -> Result<Self> {
        let params = Self { theta, beta };
        params.check(spec)?;
        Ok(params)
    }

    /// Splits a flat `theta ++ [beta]` vector.
    pub fn from_flat(spec: &CircuitSpec, flat: &[f64]) -> Result<Self> {
        let Some((&beta, theta)) = flat.split_last() else {
            return Err(Error::contract("empty parameter vector"));
        };
        Self::new(spec, theta.to_vec(), beta)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = self.theta.clone();
        flat.push(self.beta);
        flat
    }

    pub fn check(&self, spec: &CircuitSpec) -> Result<()> {
        if self.theta.len() != spec.n_theta() {
            return Err(Error::contract(format!(
                "expected {} rotation angles, got {}",
                spec.n_theta(),
                self.theta.len()
            )));
        }
        if !self.beta.is_finite() || self.theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::contract("policy parameters must be finite"));
        }
        Ok(())
    }
}

/// Online per-feature L∞ scaling into `[-π, π]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureNormalizer {
    running_abs_max: Vec<f64>,
}

impl FeatureNormalizer {
    pub const FLOOR: f64 = 1e-8;

    pub fn new(n_features: usize) -> Self {
        Self {
            running_abs_max: vec![Self::FLOOR; n_features],
        }
    }

    pub fn from_abs_max(running_abs_max: Vec<f64>) -> Self {
        Self { running_abs_max }
    }

    pub fn abs_max(&self) -> &[f64] {
        &self.running_abs_max
    }

    /// Folds `features` into the running maxima, then scales them.
    pub fn observe(&mut self, features: &[f64]) -> Result<Vec<f64>> {
        self.check(features)?;
        for (m, f) in self.running_abs_max.iter_mut().zip(features) {
            *m = m.max(f.abs());
        }
        Ok(self.scale(features))
    }

    /// Scales with the current maxima without updating them; values beyond
    /// the running max are clamped to `±π`.
    pub fn normalize(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.check(features)?;
        Ok(self.scale(features))
    }

    /// Elementwise maximum with another snapshot of the same run.
    pub fn merge(&mut self, other: &FeatureNormalizer) {
        for (m, o) in self.running_abs_max.iter_mut().zip(&other.running_abs_max) {
            *m = m.max(*o);
        }
    }

    fn check(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.running_abs_max.len() {
            return Err(Error::contract(format!(
                "normalizer tracks {} features, got {}",
                self.running_abs_max.len(),
                features.len()
            )));
        }
        if features.iter().any(|f| !f.is_finite()) {
            return Err(Error::contract("features must be finite"));
        }
        Ok(())
    }

    fn scale(&self, features: &[f64]) -> Vec<f64> {
        use std::f64::consts::PI;
        features
            .iter()
            .zip(&self.running_abs_max)
            .map(|(f, m)| (f * PI / m).clamp(-PI, PI))
            .collect()
    }
}

/// Per-action preferences `<a_i>_θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionPreferences {
    pub values: Vec<f64>,
}

/// Circuit input: encoding angles (already normalized) or a prepared state.
#[derive(Clone, Debug, PartialEq)]
pub enum CircuitInput {
    Angles(Vec<f64>),
    State(Statevector),
}

/// How expectation values are obtained.
pub enum Mode<'r> {
    Exact,
    Shots { shots: u64, rng: &'r mut dyn RngCore },
}

impl Mode<'_> {
    pub fn is_exact(&self) -> bool {
        matches!(self, Mode::Exact)
    }

    pub(crate) fn measure_z(&mut self, state: &Statevector, qubit: usize) -> Result<f64> {
        match self {
            Mode::Exact => state.expectation_z(qubit),
            Mode::Shots { shots, rng } => state.sample_z(qubit, *shots, &mut **rng),
        }
    }
}

/// `softmax(β·prefs)`, computed with max subtraction.
pub fn policy(prefs: &ActionPreferences, beta: f64) -> Vec<f64> {
    softmax_scaled(&prefs.values, beta)
}

pub(crate) fn softmax_scaled(values: &[f64], beta: f64) -> Vec<f64> {
    let scaled: Vec<f64> = values.iter().map(|v| beta * v).collect();
    let max = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scaled.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `log π(a)` for the β-softmax, in log-sum-exp form.
pub fn log_policy(prefs: &ActionPreferences, beta: f64, action: usize) -> f64 {
    let scaled: Vec<f64> = prefs.values.iter().map(|v| beta * v).collect();
    let max = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + scaled.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    scaled[action] - lse
}

/// JSON checkpoint of a quantum policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumCheckpoint {
    pub theta: Vec<f64>,
    pub beta: f64,
    pub norm_abs_max: Vec<f64>,
    pub spec: CircuitSpec,
}

impl QuantumCheckpoint {
    pub fn new(spec: &CircuitSpec, params: &PolicyParams, normalizer: Option<&FeatureNormalizer>) -> Self {
        Self {
            theta: params.theta.clone(),
            beta: params.beta,
            norm_abs_max: normalizer.map(|n| n.abs_max().to_vec()).unwrap_or_default(),
            spec: spec.clone(),
        }
    }

    pub fn params(&self) -> Result<PolicyParams> {
        self.spec.validate()?;
        PolicyParams::new(&self.spec, self.theta.clone(), self.beta)
    }

    pub fn normalizer(&self) -> Option<FeatureNormalizer> {
        (!self.norm_abs_max.is_empty()).then(|| FeatureNormalizer::from_abs_max(self.norm_abs_max.clone()))
    }
}
