//! The training loop: one metrics row per batch update.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{adam_step, baselined_gradient, init_params, rollout, step_gradients, AdamState, Batch, InitStrategy, Trajectory};
use crate::agent::{Policy, PolicyInput};
use crate::envs::Env;
use crate::{Error, Result};

/// Builds a fresh environment for each rollout.
pub type EnvFactory = Arc<dyn Fn() -> Box<dyn Env> + Send + Sync>;

/// Stream reserved for parameter initialization; rollouts use their global
/// trajectory index.
const INIT_STREAM: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub episodes: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    pub seed: u64,
    pub init: InitStrategy,
    pub beta_init: InitStrategy,
    /// Worker threads for the rollouts of one batch; 1 runs them inline.
    pub parallel_rollouts: usize,
    /// Record real elapsed time; off keeps metrics byte-reproducible.
    pub wall_clock: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            episodes: 1000,
            batch_size: 10,
            learning_rate: 0.1,
            gamma: 0.99,
            seed: 0,
            init: InitStrategy::default(),
            beta_init: InitStrategy::BETA,
            parallel_rollouts: 1,
            wall_clock: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config(format!("gamma must be in (0, 1], got {}", self.gamma)));
        }
        if self.parallel_rollouts == 0 {
            return Err(Error::config("parallel_rollouts must be at least 1"));
        }
        self.init.validate()?;
        self.beta_init.validate()
    }
}

/// One row of the metrics stream. An episode is one batch of rollouts
/// followed by one optimizer step; rewards are batch means.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    /// 1-based.
    pub episode: usize,
    pub total_reward: f64,
    pub discounted_return: f64,
    pub beta: Option<f64>,
    pub grad_norm: f64,
    pub elapsed_ms: u64,
}

pub const METRICS_HEADER: &str = "episode,total_reward,discounted_return,beta,grad_norm,elapsed_ms";

impl EpisodeMetrics {
    pub fn csv_row(&self) -> String {
        let beta = self.beta.map(|b| b.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.episode, self.total_reward, self.discounted_return, beta, self.grad_norm, self.elapsed_ms
        )
    }
}

/// Streams metrics rows to a writer.
pub struct MetricsCsv<W: Write> {
    out: W,
}

impl<W: Write> MetricsCsv<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        writeln!(out, "{METRICS_HEADER}")?;
        Ok(Self { out })
    }

    pub fn write(&mut self, m: &EpisodeMetrics) -> std::io::Result<()> {
        writeln!(self.out, "{}", m.csv_row())
    }

    pub fn into_inner(mut self) -> std::io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// A finished rollout, its step gradients, and the policy clone that ran it.
type Rollout<P> = (Trajectory, Vec<Vec<f64>>, P);

/// The visited inputs, actions and score vectors of the latest batch,
/// evaluated at the parameters the batch was collected with.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchRecord {
    pub episode: usize,
    pub inputs: Vec<PolicyInput>,
    pub actions: Vec<usize>,
    pub grads: Vec<Vec<f64>>,
}

/// REINFORCE loop as an iterator over [`EpisodeMetrics`]. An error ends
/// the stream after it is yielded.
pub struct Trainer<P: Policy> {
    policy: P,
    params: Vec<f64>,
    adam: AdamState,
    env: EnvFactory,
    config: TrainConfig,
    episode: usize,
    started: Instant,
    failed: bool,
    record: bool,
    last_batch: Option<BatchRecord>,
}

impl<P: Policy> Trainer<P> {
    /// Initializes parameters from the config's seed and strategies.
    pub fn new(policy: P, env: EnvFactory, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(INIT_STREAM);
        let params = init_params(&config.init, &config.beta_init, &policy.layout(), &mut rng)?;
        Self::with_params(policy, params, env, config)
    }

    pub fn with_params(policy: P, params: Vec<f64>, env: EnvFactory, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        if params.len() != policy.n_params() {
            return Err(Error::contract(format!(
                "policy has {} parameters, got {}",
                policy.n_params(),
                params.len()
            )));
        }
        let env_actions = env().spec().n_actions;
        if env_actions != policy.n_actions() {
            return Err(Error::config(format!(
                "environment has {env_actions} actions, policy has {}",
                policy.n_actions()
            )));
        }
        Ok(Self {
            adam: AdamState::new(params.len(), config.learning_rate),
            policy,
            params,
            env,
            config,
            episode: 0,
            started: Instant::now(),
            failed: false,
            record: false,
            last_batch: None,
        })
    }

    /// Keep the score vectors of each batch for Fisher analysis.
    pub fn record_batches(&mut self, on: bool) {
        self.record = on;
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn policy(&self) -> &P {
        &self.policy
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn episodes_done(&self) -> usize {
        self.episode
    }

    pub fn last_batch(&self) -> Option<&BatchRecord> {
        self.last_batch.as_ref()
    }

    pub fn checkpoint(&self) -> Result<serde_json::Value> {
        self.policy.checkpoint(&self.params)
    }

    fn rollout_one(&self, base: &P, index: u64) -> Result<Rollout<P>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(index);
        let mut policy = base.clone();
        let mut env = (self.env)();
        let traj = rollout(&mut policy, &self.params, env.as_mut(), self.config.gamma, &mut rng)?;
        let grads = step_gradients(&policy, &self.params, &traj, &mut rng)?;
        Ok((traj, grads, policy))
    }

    fn collect_batch(&self) -> Result<Vec<Rollout<P>>> {
        let n = self.config.batch_size;
        let first = (self.episode * n) as u64;
        let workers = self.config.parallel_rollouts.min(n);
        if workers <= 1 {
            return (0..n).map(|i| self.rollout_one(&self.policy, first + i as u64)).collect();
        }
        let chunk = n.div_ceil(workers);
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..n)
                .step_by(chunk)
                .map(|start| {
                    scope.spawn(move || {
                        (start..(start + chunk).min(n))
                            .map(|i| self.rollout_one(&self.policy, first + i as u64))
                            .collect::<Result<Vec<_>>>()
                    })
                })
                .collect();
            let mut out = Vec::with_capacity(n);
            for h in handles {
                out.extend(h.join().map_err(|_| Error::Numerical("rollout worker panicked".into()))??);
            }
            Ok(out)
        })
    }

    fn step(&mut self) -> Result<EpisodeMetrics> {
        let results = self.collect_batch()?;
        let mut trajectories = Vec::with_capacity(results.len());
        let mut grads = Vec::with_capacity(results.len());
        for (traj, g, worker) in results {
            self.policy.absorb(&worker);
            trajectories.push(traj);
            grads.push(g);
        }
        let batch = Batch::new(trajectories)?;
        let gradient = baselined_gradient(&batch, &grads, self.params.len())?;
        let grad_norm = gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
        if !grad_norm.is_finite() {
            return Err(Error::Numerical(format!("non-finite gradient at episode {}", self.episode + 1)));
        }

        let n = batch.len() as f64;
        let total_reward = batch.trajectories.iter().map(Trajectory::total_reward).sum::<f64>() / n;
        let discounted_return = batch.trajectories.iter().map(|t| t.returns[0]).sum::<f64>() / n;
        let beta = self.policy.beta(&self.params);

        if self.record {
            let mut rec = BatchRecord { episode: self.episode + 1, inputs: vec![], actions: vec![], grads: vec![] };
            for (t, g) in batch.trajectories.into_iter().zip(grads) {
                rec.inputs.extend(t.inputs);
                rec.actions.extend(t.actions);
                rec.grads.extend(g);
            }
            self.last_batch = Some(rec);
        }

        adam_step(&mut self.params, &gradient, &mut self.adam)?;
        self.episode += 1;
        Ok(EpisodeMetrics {
            episode: self.episode,
            total_reward,
            discounted_return,
            beta,
            grad_norm,
            elapsed_ms: if self.config.wall_clock { self.started.elapsed().as_millis() as u64 } else { 0 },
        })
    }
}

impl<P: Policy> Iterator for Trainer<P> {
    type Item = Result<EpisodeMetrics>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.episode >= self.config.episodes {
            return None;
        }
        let out = self.step();
        self.failed = out.is_err();
        Some(out)
    }
}
