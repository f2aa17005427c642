use rand::{Rng, RngCore};

use super::{check_action, Env, EnvKind, EnvObservation, EnvSpec, StepResult};
use crate::{Error, Result};

const GRAVITY: f64 = 9.8;
const MASS_CART: f64 = 1.0;
const MASS_POLE: f64 = 0.1;
const TOTAL_MASS: f64 = MASS_CART + MASS_POLE;
/// Half the pole length.
const LENGTH: f64 = 0.5;
const POLE_MASS_LENGTH: f64 = MASS_POLE * LENGTH;
const FORCE_MAG: f64 = 10.0;
const TAU: f64 = 0.02;
const X_THRESHOLD: f64 = 2.4;
const THETA_THRESHOLD: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;

/// Cart-pole balancing with Euler integration; state `[x, ẋ, θ, θ̇]`.
#[derive(Clone, Debug)]
pub struct CartPole {
    state: [f64; 4],
    steps: usize,
    done: bool,
}

impl CartPole {
    pub fn new() -> Self {
        Self { state: [0.0; 4], steps: 0, done: true }
    }

    /// Starts an episode from an explicit state.
    pub fn with_state(state: [f64; 4]) -> Self {
        Self { state, steps: 0, done: false }
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }

    fn observation(&self) -> EnvObservation {
        EnvObservation::classical(self.state.to_vec())
    }
}

impl Default for CartPole {
    fn default() -> Self {
        Self::new()
    }
}

impl Env for CartPole {
    fn spec(&self) -> EnvSpec {
        EnvKind::CartPole.spec()
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> EnvObservation {
        for s in &mut self.state {
            *s = rng.random_range(-0.05..0.05);
        }
        self.steps = 0;
        self.done = false;
        self.observation()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        if self.done {
            return Err(Error::contract("step called on a finished episode"));
        }
        check_action(action, 2)?;
        let [x, x_dot, theta, theta_dot] = self.state;
        let force = if action == 1 { FORCE_MAG } else { -FORCE_MAG };
        let (sin, cos) = theta.sin_cos();
        let temp = (force + POLE_MASS_LENGTH * theta_dot * theta_dot * sin) / TOTAL_MASS;
        let theta_acc =
            (GRAVITY * sin - cos * temp) / (LENGTH * (4.0 / 3.0 - MASS_POLE * cos * cos / TOTAL_MASS));
        let x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos / TOTAL_MASS;

        self.state = [
            x + TAU * x_dot,
            x_dot + TAU * x_acc,
            theta + TAU * theta_dot,
            theta_dot + TAU * theta_acc,
        ];
        self.steps += 1;
        let [x, _, theta, _] = self.state;
        let fallen = x.abs() > X_THRESHOLD || theta.abs() > THETA_THRESHOLD;
        self.done = fallen || self.steps >= self.spec().max_steps;
        Ok(StepResult {
            observation: self.observation(),
            reward: 1.0,
            done: self.done,
            step_index: self.steps,
        })
    }
}
