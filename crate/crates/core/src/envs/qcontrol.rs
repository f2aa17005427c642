use std::f64::consts::PI;

use rand::RngCore;

use super::{check_action, Env, EnvKind, EnvObservation, EnvSpec, StepResult};
use crate::qsim::{Statevector, TwoLevelHamiltonian};
use crate::{Error, Result};

/// Pulse length; ten unpulsed steps under `h = 1` make an exact π rotation.
pub const PULSE_DT: f64 = PI / 20.0;
pub const FIELD_H: f64 = 1.0;
/// Episodes end when the fidelity drops to or below this.
pub const FIDELITY_FLOOR: f64 = 1e-4;

/// Single-qubit state preparation `|0> → |1>` under `H = 4J(t)σ_z + hσ_x`,
/// with the action choosing `J ∈ {0, 1}` for each pulse.
#[derive(Clone, Debug)]
pub struct QControl {
    state: Statevector,
    target: Statevector,
    steps: usize,
    done: bool,
}

impl QControl {
    pub fn new() -> Self {
        Self {
            state: Statevector::zero(1).expect("one qubit"),
            target: Statevector::basis(1, 1).expect("one qubit"),
            steps: 0,
            done: true,
        }
    }

    pub fn with_state(state: Statevector) -> Result<Self> {
        if state.n_qubits() != 1 {
            return Err(Error::contract("QControl acts on a single qubit"));
        }
        Ok(Self { state, steps: 0, done: false, ..Self::new() })
    }

    pub fn state(&self) -> &Statevector {
        &self.state
    }

    fn observation(&self) -> EnvObservation {
        let amps = self.state.amplitudes();
        EnvObservation {
            features: vec![amps[0].re, amps[0].im, amps[1].re, amps[1].im],
            quantum_state: Some(self.state.clone()),
        }
    }
}

impl Default for QControl {
    fn default() -> Self {
        Self::new()
    }
}

impl Env for QControl {
    fn spec(&self) -> EnvSpec {
        EnvKind::QControl.spec()
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> EnvObservation {
        self.state = Statevector::zero(1).expect("one qubit");
        self.steps = 0;
        self.done = false;
        self.observation()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        if self.done {
            return Err(Error::contract("step called on a finished episode"));
        }
        check_action(action, 2)?;
        let h = TwoLevelHamiltonian::new(4.0 * action as f64, FIELD_H)?;
        self.state.evolve(&h, PULSE_DT)?;
        self.steps += 1;
        let reward = self.state.fidelity(&self.target)?;
        self.done = reward <= FIDELITY_FLOOR || self.steps >= self.spec().max_steps;
        Ok(StepResult {
            observation: self.observation(),
            reward,
            done: self.done,
            step_index: self.steps,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reset_is_ground_state() {
        let obs = QControl::new().reset(&mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(obs.features, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(obs.quantum_state.unwrap(), Statevector::zero(1).unwrap());
    }

    #[test]
    fn free_evolution_reaches_target() {
        let mut env = QControl::new();
        env.reset(&mut ChaCha8Rng::seed_from_u64(0));
        let first = env.step(0).unwrap();
        assert_abs_diff_eq!(first.reward, (PI / 20.0).sin().powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(first.reward, 0.02447, epsilon = 1e-5);
        let mut last = first;
        for _ in 1..10 {
            last = env.step(0).unwrap();
        }
        assert_abs_diff_eq!(last.reward, 1.0, epsilon = 1e-12);
        assert!(last.done);
        assert_eq!(last.step_index, 10);
    }

    #[test]
    fn leaving_the_pole_lowers_fidelity() {
        let mut env = QControl::with_state(Statevector::basis(1, 1).unwrap()).unwrap();
        assert!(env.step(0).unwrap().reward < 1.0);
    }

    #[test]
    fn views_stay_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut env = QControl::new();
        env.reset(&mut rng);
        loop {
            let r = env.step(rng.random_range(0..2)).unwrap();
            let psi = r.observation.quantum_state.as_ref().unwrap();
            let a = psi.amplitudes();
            assert_eq!(r.observation.features, vec![a[0].re, a[0].im, a[1].re, a[1].im]);
            assert!((psi.norm_sqr() - 1.0).abs() < 1e-10);
            if r.done {
                break;
            }
        }
    }
}
