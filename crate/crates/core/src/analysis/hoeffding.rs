//! Monte-Carlo checks that the Hoeffding budgets deliver their promised
//! failure probability.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::bounds::{lemma2_shots, BoundInputs};
use crate::envs::{Env, QControl};
use crate::qsim::Statevector;
use crate::reinforce::glorot_std;
use crate::vqpolicy::{grad_preferences, preferences, CircuitInput, CircuitSpec, Mode, PolicyParams};
use crate::{Error, Result};

/// Setup draws use this stream; trial `i` uses stream `i`.
const SETUP_STREAM: u64 = u64::MAX - 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingReport {
    pub trials: usize,
    pub failures: usize,
    /// `None` when no trial ran.
    pub failure_rate: Option<f64>,
    pub epsilon: f64,
    pub delta: f64,
    /// Samples (coin flips or shots per circuit evaluation) per estimate.
    pub budget: u64,
    pub pass: bool,
}

impl HoeffdingReport {
    fn new(trials: usize, failures: usize, epsilon: f64, delta: f64, budget: u64) -> Self {
        let failure_rate = (trials > 0).then(|| failures as f64 / trials as f64);
        Self { trials, failures, failure_rate, epsilon, delta, budget, pass: failure_rate.is_none_or(|r| r <= delta) }
    }
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Estimates a fair coin with `⌈ln(2/δ) / (2ε²)⌉` flips per trial.
pub fn bernoulli_self_test(epsilon: f64, delta: f64, trials: usize, seed: u64) -> Result<HoeffdingReport> {
    if !(epsilon > 0.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::config("need epsilon > 0 and delta in (0, 1)"));
    }
    let n = ((2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as u64;
    let coin = Binomial::new(n, 0.5).map_err(|e| Error::config(e.to_string()))?;
    let failures = (0..trials)
        .filter(|&i| {
            let heads = coin.sample(&mut trial_rng(seed, i as u64));
            (heads as f64 / n as f64 - 0.5).abs() >= epsilon
        })
        .count();
    Ok(HoeffdingReport::new(trials, failures, epsilon, delta, n))
}

/// Shot-budget check on the single-qubit control policy.
///
/// A random single-U3 policy is evaluated at a state reached by a few random
/// pulses. Each trial estimates `<a_0>` and its three parameter-shift
/// derivatives with `n/2` shots per circuit evaluation, and fails if any of
/// the four deviates from the exact value by `ε` or more. `b.k` must be 4.
pub fn hoeffding_validate(b: &BoundInputs, trials: usize, seed: u64) -> Result<HoeffdingReport> {
    if b.k != 4 {
        return Err(Error::config(format!("the control-policy check estimates 4 coordinates, got k = {}", b.k)));
    }
    let n = lemma2_shots(b, 1.0)?.shots_per_observable;
    let per_eval = (n / 2.0).ceil() as u64;

    let spec = CircuitSpec::single_u3();
    let mut setup = trial_rng(seed, SETUP_STREAM);
    let std = glorot_std(1, 1, 1.0);
    let theta: Vec<f64> = (0..3)
        .map(|_| {
            let z: f64 = rand_distr::StandardNormal.sample(&mut setup);
            std * z
        })
        .collect();
    let params = PolicyParams::new(&spec, theta, 1.0)?;
    let state = pulsed_state(&mut setup)?;
    let input = CircuitInput::State(state);

    let exact_grad = grad_preferences(&spec, &params, &input, &mut Mode::Exact)?.swap_remove(0);
    let exact_value = preferences(&spec, &params, &input, &mut Mode::Exact)?.values[0];

    let mut failures = 0;
    for i in 0..trials {
        let mut rng = trial_rng(seed, i as u64);
        let mut mode = Mode::Shots { shots: per_eval, rng: &mut rng };
        let grad = grad_preferences(&spec, &params, &input, &mut mode)?.swap_remove(0);
        let value = preferences(&spec, &params, &input, &mut mode)?.values[0];
        let worst = grad
            .iter()
            .zip(&exact_grad)
            .map(|(g, e)| (g - e).abs())
            .fold((value - exact_value).abs(), f64::max);
        if worst >= b.epsilon {
            failures += 1;
        }
    }
    Ok(HoeffdingReport::new(trials, failures, b.epsilon, b.delta, per_eval))
}

fn pulsed_state(rng: &mut ChaCha8Rng) -> Result<Statevector> {
    use rand::Rng;
    let mut env = QControl::new();
    env.reset(rng);
    for _ in 0..3 {
        env.step(rng.random_range(0..2))?;
    }
    Ok(env.state().clone())
}
