//! The [`Policy`] trait the trainer and the analysis tools are written against,
//! with the quantum and classical implementations.
//!
//! Parameters are always one flat vector. A policy may carry running state
//! (the feature normalizer); the trainer clones the policy per rollout and
//! folds the clones back with [`Policy::absorb`].

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::classical::{self, ClassicalCheckpoint, DropoutMasks, MlpSpec};
use crate::envs::EnvObservation;
use crate::vqpolicy::{
    self, CircuitInput, CircuitSpec, Encoding, FeatureNormalizer, GradientMethod, Mode, PolicyParams,
    QuantumCheckpoint,
};
use crate::{Error, Result};

/// What a policy consumes at one step, fixed at rollout time so gradients
/// can be re-evaluated on a frozen batch.
#[derive(Clone, Debug, PartialEq)]
pub enum PolicyInput {
    Circuit(CircuitInput),
    Features { features: Vec<f64>, masks: Option<DropoutMasks> },
}

/// One contiguous block of the flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamBlock {
    pub len: usize,
    pub fan_in: usize,
    pub fan_out: usize,
    /// Inverse temperature rather than a weight.
    pub is_beta: bool,
}

pub trait Policy: Clone + Send + Sync {
    fn n_params(&self) -> usize;
    fn n_actions(&self) -> usize;
    /// Layout used by the initializers, in flat-vector order.
    fn layout(&self) -> Vec<ParamBlock>;
    /// Current inverse temperature, if the policy has one.
    fn beta(&self, params: &[f64]) -> Option<f64>;
    /// Turns an observation into a policy input, updating running statistics
    /// and drawing any training-time randomness.
    fn prepare(&mut self, obs: &EnvObservation, rng: &mut dyn RngCore) -> Result<PolicyInput>;
    fn probabilities(&self, params: &[f64], input: &PolicyInput, rng: &mut dyn RngCore) -> Result<Vec<f64>>;
    /// `∇ log π(action | input)` over the full flat vector.
    fn grad_log_prob(&self, params: &[f64], input: &PolicyInput, action: usize, rng: &mut dyn RngCore)
        -> Result<Vec<f64>>;
    /// Merges running statistics gathered by a clone.
    fn absorb(&mut self, other: &Self);
    fn checkpoint(&self, params: &[f64]) -> Result<serde_json::Value>;
}

/// Inverse-CDF draw from a probability vector.
pub fn sample_action<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (a, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return a;
        }
    }
    probs.len() - 1
}

/// VQC softmax policy.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumAgent {
    pub spec: CircuitSpec,
    pub normalizer: Option<FeatureNormalizer>,
    /// `None` for exact expectations.
    pub shots: Option<u64>,
    pub method: GradientMethod,
}

impl QuantumAgent {
    pub fn new(spec: CircuitSpec, shots: Option<u64>) -> Result<Self> {
        spec.validate()?;
        if shots == Some(0) {
            return Err(Error::config("shots must be positive"));
        }
        let normalizer = (spec.encoding == Encoding::AngleRx).then(|| FeatureNormalizer::new(spec.n_qubits));
        let method = if shots.is_some() { GradientMethod::ParameterShift } else { GradientMethod::Adjoint };
        Ok(Self { spec, normalizer, shots, method })
    }

    pub fn from_checkpoint(ckpt: &QuantumCheckpoint, shots: Option<u64>) -> Result<(Self, Vec<f64>)> {
        let params = ckpt.params()?;
        let mut agent = Self::new(ckpt.spec.clone(), shots)?;
        if let Some(n) = ckpt.normalizer() {
            agent.normalizer = Some(n);
        }
        Ok((agent, params.to_flat()))
    }

    fn params(&self, flat: &[f64]) -> Result<PolicyParams> {
        PolicyParams::from_flat(&self.spec, flat)
    }

    fn circuit<'a>(&self, input: &'a PolicyInput) -> Result<&'a CircuitInput> {
        match input {
            PolicyInput::Circuit(c) => Ok(c),
            PolicyInput::Features { .. } => Err(Error::contract("quantum policy was given an MLP input")),
        }
    }

    fn with_mode<T>(&self, rng: &mut dyn RngCore, f: impl FnOnce(&mut Mode<'_>) -> Result<T>) -> Result<T> {
        match self.shots {
            None => f(&mut Mode::Exact),
            Some(shots) => f(&mut Mode::Shots { shots, rng }),
        }
    }
}

impl Policy for QuantumAgent {
    fn n_params(&self) -> usize {
        self.spec.n_trainable()
    }

    fn n_actions(&self) -> usize {
        self.spec.n_actions
    }

    fn layout(&self) -> Vec<ParamBlock> {
        let n = self.spec.n_qubits;
        vec![
            ParamBlock { len: self.spec.n_theta(), fan_in: n, fan_out: n, is_beta: false },
            ParamBlock { len: 1, fan_in: 1, fan_out: 1, is_beta: true },
        ]
    }

    fn beta(&self, params: &[f64]) -> Option<f64> {
        params.last().copied()
    }

    fn prepare(&mut self, obs: &EnvObservation, _rng: &mut dyn RngCore) -> Result<PolicyInput> {
        let input = match (self.spec.encoding, &mut self.normalizer) {
            (Encoding::AngleRx, Some(norm)) => CircuitInput::Angles(norm.observe(&obs.features)?),
            (Encoding::AngleRx, None) => return Err(Error::contract("angle encoding without a normalizer")),
            (Encoding::None, _) => CircuitInput::State(
                obs.quantum_state
                    .clone()
                    .ok_or_else(|| Error::contract("unencoded circuit needs a quantum observation"))?,
            ),
        };
        Ok(PolicyInput::Circuit(input))
    }

    fn probabilities(&self, params: &[f64], input: &PolicyInput, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        let p = self.params(params)?;
        let c = self.circuit(input)?;
        let prefs = self.with_mode(rng, |mode| vqpolicy::preferences(&self.spec, &p, c, mode))?;
        Ok(vqpolicy::policy(&prefs, p.beta))
    }

    fn grad_log_prob(
        &self,
        params: &[f64],
        input: &PolicyInput,
        action: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<f64>> {
        let p = self.params(params)?;
        let c = self.circuit(input)?;
        self.with_mode(rng, |mode| vqpolicy::grad_log_policy(&self.spec, &p, c, action, mode, self.method))
    }

    fn absorb(&mut self, other: &Self) {
        if let (Some(mine), Some(theirs)) = (&mut self.normalizer, &other.normalizer) {
            mine.merge(theirs);
        }
    }

    fn checkpoint(&self, params: &[f64]) -> Result<serde_json::Value> {
        let ckpt = QuantumCheckpoint::new(&self.spec, &self.params(params)?, self.normalizer.as_ref());
        Ok(serde_json::to_value(ckpt)?)
    }
}

/// MLP softmax policy.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalAgent {
    pub spec: MlpSpec,
    /// Draw dropout masks in [`Policy::prepare`]; off for evaluation.
    pub training: bool,
}

impl ClassicalAgent {
    pub fn new(spec: MlpSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec, training: true })
    }

    pub fn from_checkpoint(ckpt: &ClassicalCheckpoint) -> Result<(Self, Vec<f64>)> {
        let params = ckpt.params()?;
        Ok((Self::new(ckpt.spec.clone())?, params))
    }

    fn features<'a>(&self, input: &'a PolicyInput) -> Result<(&'a [f64], Option<&'a DropoutMasks>)> {
        match input {
            PolicyInput::Features { features, masks } => Ok((features, masks.as_ref())),
            PolicyInput::Circuit(_) => Err(Error::contract("MLP policy was given a circuit input")),
        }
    }
}

impl Policy for ClassicalAgent {
    fn n_params(&self) -> usize {
        self.spec.n_params()
    }

    fn n_actions(&self) -> usize {
        self.spec.n_outputs()
    }

    fn layout(&self) -> Vec<ParamBlock> {
        let mut blocks = Vec::new();
        for (i, o) in self.spec.fans() {
            blocks.push(ParamBlock { len: i * o, fan_in: i, fan_out: o, is_beta: false });
            if self.spec.use_bias {
                blocks.push(ParamBlock { len: o, fan_in: i, fan_out: o, is_beta: false });
            }
        }
        blocks
    }

    fn beta(&self, _params: &[f64]) -> Option<f64> {
        None
    }

    fn prepare(&mut self, obs: &EnvObservation, rng: &mut dyn RngCore) -> Result<PolicyInput> {
        let masks = if self.training { self.spec.sample_masks(rng) } else { None };
        Ok(PolicyInput::Features { features: obs.features.clone(), masks })
    }

    fn probabilities(&self, params: &[f64], input: &PolicyInput, _rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        let (x, masks) = self.features(input)?;
        classical::probabilities(&self.spec, params, x, masks)
    }

    fn grad_log_prob(
        &self,
        params: &[f64],
        input: &PolicyInput,
        action: usize,
        _rng: &mut dyn RngCore,
    ) -> Result<Vec<f64>> {
        let (x, masks) = self.features(input)?;
        classical::backward(&self.spec, params, x, action, masks)
    }

    fn absorb(&mut self, _other: &Self) {}

    fn checkpoint(&self, params: &[f64]) -> Result<serde_json::Value> {
        if params.len() != self.spec.n_params() {
            return Err(Error::contract("parameter count does not match the MLP"));
        }
        Ok(serde_json::to_value(ClassicalCheckpoint::new(&self.spec, params))?)
    }
}

/// Either policy family, for code that picks one at run time.
#[derive(Clone, Debug, PartialEq)]
pub enum Agent {
    Quantum(QuantumAgent),
    Classical(ClassicalAgent),
}

/// Policy family tag used in configs and checkpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Quantum,
    Classical,
}

impl Agent {
    pub fn kind(&self) -> PolicyKind {
        match self {
            Agent::Quantum(_) => PolicyKind::Quantum,
            Agent::Classical(_) => PolicyKind::Classical,
        }
    }

    /// Rebuilds an agent and its parameters from checkpoint JSON of either kind.
    pub fn from_checkpoint(value: &serde_json::Value, shots: Option<u64>) -> Result<(Self, Vec<f64>)> {
        if value.get("theta").is_some() {
            let ckpt: QuantumCheckpoint = serde_json::from_value(value.clone())?;
            let (a, p) = QuantumAgent::from_checkpoint(&ckpt, shots)?;
            Ok((Agent::Quantum(a), p))
        } else {
            let ckpt: ClassicalCheckpoint = serde_json::from_value(value.clone())?;
            let (a, p) = ClassicalAgent::from_checkpoint(&ckpt)?;
            Ok((Agent::Classical(a), p))
        }
    }
}

macro_rules! delegate {
    ($self:ident, $a:ident => $e:expr) => {
        match $self {
            Agent::Quantum($a) => $e,
            Agent::Classical($a) => $e,
        }
    };
}

impl Policy for Agent {
    fn n_params(&self) -> usize {
        delegate!(self, a => a.n_params())
    }

    fn n_actions(&self) -> usize {
        delegate!(self, a => a.n_actions())
    }

    fn layout(&self) -> Vec<ParamBlock> {
        delegate!(self, a => a.layout())
    }

    fn beta(&self, params: &[f64]) -> Option<f64> {
        delegate!(self, a => a.beta(params))
    }

    fn prepare(&mut self, obs: &EnvObservation, rng: &mut dyn RngCore) -> Result<PolicyInput> {
        delegate!(self, a => a.prepare(obs, rng))
    }

    fn probabilities(&self, params: &[f64], input: &PolicyInput, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        delegate!(self, a => a.probabilities(params, input, rng))
    }

    fn grad_log_prob(
        &self,
        params: &[f64],
        input: &PolicyInput,
        action: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<f64>> {
        delegate!(self, a => a.grad_log_prob(params, input, action, rng))
    }

    fn absorb(&mut self, other: &Self) {
        match (self, other) {
            (Agent::Quantum(a), Agent::Quantum(b)) => a.absorb(b),
            (Agent::Classical(a), Agent::Classical(b)) => a.absorb(b),
            _ => {}
        }
    }

    fn checkpoint(&self, params: &[f64]) -> Result<serde_json::Value> {
        delegate!(self, a => a.checkpoint(params))
    }
}
