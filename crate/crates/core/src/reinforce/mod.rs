//! REINFORCE with a mean baseline, Adam ascent and parameter initializers.

mod train;

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::agent::{sample_action, ParamBlock, Policy, PolicyInput};
use crate::envs::{discounted_returns, Env};
use crate::{Error, Result};

pub use train::{BatchRecord, EnvFactory, EpisodeMetrics, MetricsCsv, TrainConfig, Trainer, METRICS_HEADER};

/// One rollout: what the policy saw, what it did, what it got.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub inputs: Vec<PolicyInput>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub returns: Vec<f64>,
}

impl Trajectory {
    pub fn new(inputs: Vec<PolicyInput>, actions: Vec<usize>, rewards: Vec<f64>, gamma: f64) -> Result<Self> {
        if rewards.is_empty() {
            return Err(Error::contract("a trajectory needs at least one step"));
        }
        if inputs.len() != rewards.len() || actions.len() != rewards.len() {
            return Err(Error::contract("trajectory inputs, actions and rewards differ in length"));
        }
        let returns = discounted_returns(&rewards, gamma)?;
        Ok(Self { inputs, actions, rewards, returns })
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }

    /// Adds `c` to every cached return.
    pub fn shift_returns(&mut self, c: f64) {
        self.returns.iter_mut().for_each(|g| *g += c);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub trajectories: Vec<Trajectory>,
}

impl Batch {
    pub fn new(trajectories: Vec<Trajectory>) -> Result<Self> {
        if trajectories.is_empty() {
            return Err(Error::contract("a batch needs at least one trajectory"));
        }
        Ok(Self { trajectories })
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }
}

/// Per-step mean return over the trajectories that reach that step.
pub fn baseline(batch: &Batch) -> Vec<f64> {
    let t_max = batch.trajectories.iter().map(Trajectory::len).max().unwrap_or(0);
    let mut sum = vec![0.0; t_max];
    let mut count = vec![0usize; t_max];
    for traj in &batch.trajectories {
        for (t, g) in traj.returns.iter().enumerate() {
            sum[t] += g;
            count[t] += 1;
        }
    }
    sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect()
}

/// Plays one episode under `params`, sampling actions from the policy.
pub fn rollout<P: Policy, R: Rng>(
    policy: &mut P,
    params: &[f64],
    env: &mut dyn Env,
    gamma: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    let max_steps = env.spec().max_steps;
    let mut obs = env.reset(rng);
    let (mut inputs, mut actions, mut rewards) = (Vec::new(), Vec::new(), Vec::new());
    loop {
        let input = policy.prepare(&obs, rng)?;
        let probs = policy.probabilities(params, &input, rng)?;
        let action = sample_action(&probs, rng);
        let step = env.step(action)?;
        inputs.push(input);
        actions.push(action);
        rewards.push(step.reward);
        if step.done || rewards.len() >= max_steps {
            break;
        }
        obs = step.observation;
    }
    Trajectory::new(inputs, actions, rewards, gamma)
}

/// `∇ log π(a_t | s_t)` for every step of a trajectory.
pub fn step_gradients<P: Policy, R: Rng>(
    policy: &P,
    params: &[f64],
    traj: &Trajectory,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    traj.inputs
        .iter()
        .zip(&traj.actions)
        .map(|(input, &a)| policy.grad_log_prob(params, input, a, rng))
        .collect()
}

/// `(1/N) Σ_i Σ_t (G_t - b_t) g_t` from precomputed step gradients.
pub fn baselined_gradient(batch: &Batch, grads: &[Vec<Vec<f64>>], n_params: usize) -> Result<Vec<f64>> {
    weighted_gradient(batch, grads, n_params, Some(&baseline(batch)))
}

/// `(1/N) Σ_i Σ_t (G_t - b_t) g_t`, with `b = 0` when no baseline is given.
pub fn weighted_gradient(
    batch: &Batch,
    grads: &[Vec<Vec<f64>>],
    n_params: usize,
    baseline: Option<&[f64]>,
) -> Result<Vec<f64>> {
    if grads.len() != batch.len() {
        return Err(Error::contract("one gradient list per trajectory expected"));
    }
    let mut out = vec![0.0; n_params];
    for (traj, tg) in batch.trajectories.iter().zip(grads) {
        if tg.len() != traj.len() {
            return Err(Error::contract("one gradient per step expected"));
        }
        for (t, g) in tg.iter().enumerate() {
            if g.len() != n_params {
                return Err(Error::contract("gradient length does not match the policy"));
            }
            let adv = traj.returns[t] - baseline.map_or(0.0, |b| b[t]);
            out.iter_mut().zip(g).for_each(|(o, gi)| *o += adv * gi);
        }
    }
    let n = batch.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    Ok(out)
}

/// The REINFORCE-with-baseline gradient on a frozen batch.
pub fn policy_gradient<P: Policy, R: Rng>(batch: &Batch, policy: &P, params: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if params.len() != policy.n_params() {
        return Err(Error::contract(format!(
            "policy has {} parameters, got {}",
            policy.n_params(),
            params.len()
        )));
    }
    let grads = batch
        .trajectories
        .iter()
        .map(|t| step_gradients(policy, params, t, rng))
        .collect::<Result<Vec<_>>>()?;
    baselined_gradient(batch, &grads, params.len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(n_params: usize, learning_rate: f64) -> Self {
        Self {
            first_moment: vec![0.0; n_params],
            second_moment: vec![0.0; n_params],
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One bias-corrected Adam step, ascending `grad`.
pub fn adam_step(params: &mut [f64], grad: &[f64], state: &mut AdamState) -> Result<()> {
    if params.len() != grad.len() || params.len() != state.first_moment.len() {
        return Err(Error::contract("Adam shapes do not match"));
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    for i in 0..params.len() {
        let g = grad[i];
        let m = &mut state.first_moment[i];
        let v = &mut state.second_moment[i];
        *m = state.beta1 * *m + (1.0 - state.beta1) * g;
        *v = state.beta2 * *v + (1.0 - state.beta2) * g * g;
        params[i] += state.learning_rate * (*m / c1) / ((*v / c2).sqrt() + state.epsilon);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitStrategy {
    GlorotNormal {
        #[serde(default = "unit_gain")]
        gain: f64,
    },
    Normal { mean: f64, std: f64 },
    Uniform { low: f64, high: f64 },
}

fn unit_gain() -> f64 {
    1.0
}

impl Default for InitStrategy {
    fn default() -> Self {
        InitStrategy::GlorotNormal { gain: 1.0 }
    }
}

impl InitStrategy {
    /// Default draw for the inverse temperature.
    pub const BETA: InitStrategy = InitStrategy::Normal { mean: 1.0, std: 0.1 };

    pub fn validate(&self) -> Result<()> {
        match *self {
            InitStrategy::GlorotNormal { gain } if !(gain > 0.0 && gain.is_finite()) => {
                Err(Error::config(format!("glorot gain must be positive, got {gain}")))
            }
            InitStrategy::Normal { mean, std } if !(std > 0.0 && std.is_finite() && mean.is_finite()) => {
                Err(Error::config(format!("normal init needs a finite mean and std > 0, got std {std}")))
            }
            InitStrategy::Uniform { low, high } if !(low < high && low.is_finite() && high.is_finite()) => {
                Err(Error::config(format!("uniform init needs low < high, got ({low}, {high})")))
            }
            _ => Ok(()),
        }
    }
}

/// `gain · √(6 / (n_in + n_out))`.
pub fn glorot_std(fan_in: usize, fan_out: usize, gain: f64) -> f64 {
    gain * (6.0 / (fan_in + fan_out) as f64).sqrt()
}

fn draw<R: Rng + ?Sized>(strategy: &InitStrategy, block: &ParamBlock, rng: &mut R) -> Result<Vec<f64>> {
    strategy.validate()?;
    let bad = |e: rand_distr::NormalError| Error::config(e.to_string());
    Ok(match *strategy {
        InitStrategy::GlorotNormal { gain } => {
            let d = Normal::new(0.0, glorot_std(block.fan_in, block.fan_out, gain)).map_err(bad)?;
            d.sample_iter(rng).take(block.len).collect()
        }
        InitStrategy::Normal { mean, std } => Normal::new(mean, std).map_err(bad)?.sample_iter(rng).take(block.len).collect(),
        InitStrategy::Uniform { low, high } => {
            let d = Uniform::new(low, high).map_err(|e| Error::config(e.to_string()))?;
            d.sample_iter(rng).take(block.len).collect()
        }
    })
}

/// Draws a full flat parameter vector: `weights` for weight blocks, `beta`
/// for the inverse temperature (Glorot is not meaningful there and falls back
/// to [`InitStrategy::BETA`]).
pub fn init_params<R: Rng + ?Sized>(
    weights: &InitStrategy,
    beta: &InitStrategy,
    layout: &[ParamBlock],
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for block in layout {
        let strategy = match (block.is_beta, beta) {
            (false, _) => weights,
            (true, InitStrategy::GlorotNormal { .. }) => &InitStrategy::BETA,
            (true, b) => b,
        };
        out.extend(draw(strategy, block, rng)?);
    }
    Ok(out)
}
