use std::f64::consts::PI;

use rand::{Rng, RngCore};

use super::{check_action, Env, EnvKind, EnvObservation, EnvSpec, StepResult};
use crate::{Error, Result};

const DT: f64 = 0.2;
const LINK_LENGTH_1: f64 = 1.0;
const LINK_MASS_1: f64 = 1.0;
const LINK_MASS_2: f64 = 1.0;
const LINK_COM_1: f64 = 0.5;
const LINK_COM_2: f64 = 0.5;
const LINK_MOI: f64 = 1.0;
const GRAVITY: f64 = 9.8;
const MAX_VEL_1: f64 = 4.0 * PI;
const MAX_VEL_2: f64 = 9.0 * PI;
const TORQUES: [f64; 3] = [-1.0, 0.0, 1.0];

/// Two-link underactuated pendulum; state `[θ1, θ2, θ̇1, θ̇2]`, torque on the
/// second joint, one RK4 step of 0.2 s per action.
#[derive(Clone, Debug)]
pub struct Acrobot {
    state: [f64; 4],
    steps: usize,
    done: bool,
}

impl Acrobot {
    pub fn new() -> Self {
        Self { state: [0.0; 4], steps: 0, done: true }
    }

    pub fn with_state(state: [f64; 4]) -> Self {
        Self { state, steps: 0, done: false }
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }

    fn observation(&self) -> EnvObservation {
        let [t1, t2, d1, d2] = self.state;
        EnvObservation::classical(vec![t1.cos(), t1.sin(), t2.cos(), t2.sin(), d1, d2])
    }

    fn at_goal(&self) -> bool {
        let [t1, t2, ..] = self.state;
        -t1.cos() - (t1 + t2).cos() > 1.0
    }
}

impl Default for Acrobot {
    fn default() -> Self {
        Self::new()
    }
}

/// Time derivative of `[θ1, θ2, θ̇1, θ̇2]` under torque `a`.
fn derivatives(s: [f64; 4], a: f64) -> [f64; 4] {
    let (m1, m2, l1, lc1, lc2, i1, i2) =
        (LINK_MASS_1, LINK_MASS_2, LINK_LENGTH_1, LINK_COM_1, LINK_COM_2, LINK_MOI, LINK_MOI);
    let [t1, t2, d1, d2] = s;
    let c2 = t2.cos();
    let s2 = t2.sin();
    let dd1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * c2) + i1 + i2;
    let dd2 = m2 * (lc2 * lc2 + l1 * lc2 * c2) + i2;
    let phi2 = m2 * lc2 * GRAVITY * (t1 + t2 - PI / 2.0).cos();
    let phi1 = -m2 * l1 * lc2 * d2 * d2 * s2 - 2.0 * m2 * l1 * lc2 * d2 * d1 * s2
        + (m1 * lc1 + m2 * l1) * GRAVITY * (t1 - PI / 2.0).cos()
        + phi2;
    let acc2 = (a + dd2 / dd1 * phi1 - m2 * l1 * lc2 * d1 * d1 * s2 - phi2)
        / (m2 * lc2 * lc2 + i2 - dd2 * dd2 / dd1);
    let acc1 = -(dd2 * acc2 + phi1) / dd1;
    [d1, d2, acc1, acc2]
}

fn rk4(s: [f64; 4], a: f64, h: f64) -> [f64; 4] {
    let add = |x: [f64; 4], k: [f64; 4], f: f64| std::array::from_fn(|i| x[i] + f * k[i]);
    let k1 = derivatives(s, a);
    let k2 = derivatives(add(s, k1, h / 2.0), a);
    let k3 = derivatives(add(s, k2, h / 2.0), a);
    let k4 = derivatives(add(s, k3, h), a);
    std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Wraps an angle into `[-π, π)`.
fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

impl Env for Acrobot {
    fn spec(&self) -> EnvSpec {
        EnvKind::Acrobot.spec()
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> EnvObservation {
        for s in &mut self.state {
            *s = rng.random_range(-0.1..0.1);
        }
        self.steps = 0;
        self.done = false;
        self.observation()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        if self.done {
            return Err(Error::contract("step called on a finished episode"));
        }
        check_action(action, 3)?;
        let next = rk4(self.state, TORQUES[action], DT);
        self.state = [
            wrap(next[0]),
            wrap(next[1]),
            next[2].clamp(-MAX_VEL_1, MAX_VEL_1),
            next[3].clamp(-MAX_VEL_2, MAX_VEL_2),
        ];
        self.steps += 1;
        let goal = self.at_goal();
        self.done = goal || self.steps >= self.spec().max_steps;
        Ok(StepResult {
            observation: self.observation(),
            reward: if goal { 0.0 } else { -1.0 },
            done: self.done,
            step_index: self.steps,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hanging_rest_is_equilibrium() {
        let mut env = Acrobot::with_state([0.0; 4]);
        for _ in 0..50 {
            let r = env.step(1).unwrap();
            assert_eq!(r.reward, -1.0);
        }
        for s in env.state() {
            assert!(s.abs() < 1e-12, "{:?}", env.state());
        }
    }

    #[test]
    fn reaching_the_goal() {
        // both links pointing up: -cos(π) - cos(π) = 2 > 1
        let mut env = Acrobot::with_state([PI, 0.0, 0.0, 0.0]);
        let r = env.step(1).unwrap();
        assert_eq!(r.reward, 0.0);
        assert!(r.done);
    }

    #[test]
    fn reset_bounds() {
        let mut env = Acrobot::new();
        for seed in 0..50 {
            let obs = env.reset(&mut ChaCha8Rng::seed_from_u64(seed));
            let bounds = [1.0, 1.0, 1.0, 1.0, 0.1, 0.1];
            assert!(obs.features.iter().zip(bounds).all(|(f, b)| f.abs() <= b));
        }
    }

    #[test]
    fn velocities_are_clipped() {
        let mut env = Acrobot::with_state([0.0, 0.0, 100.0, -100.0]);
        env.step(2).unwrap();
        let [_, _, d1, d2] = env.state();
        assert!(d1.abs() <= MAX_VEL_1 && d2.abs() <= MAX_VEL_2);
    }

    #[test]
    fn angles_wrap() {
        assert!((wrap(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap(-3.0 * PI / 2.0) - PI / 2.0).abs() < 1e-12);
    }
}
