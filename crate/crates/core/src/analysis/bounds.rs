//! Closed-form sample and shot budgets for ε-accurate policy gradients.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    pub beta: f64,
    pub r_max: f64,
    /// Horizon `T`.
    pub horizon: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Number of estimated coordinates.
    pub k: usize,
    #[serde(default = "two")]
    pub n_actions: usize,
}

fn two() -> usize {
    2
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            errs.push("epsilon must be > 0");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            errs.push("delta must be in (0, 1)");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            errs.push("gamma must be in (0, 1)");
        }
        if self.horizon == 0 {
            errs.push("horizon must be >= 1");
        }
        if self.k == 0 {
            errs.push("k must be >= 1");
        }
        if self.n_actions == 0 {
            errs.push("n_actions must be >= 1");
        }
        if !(self.beta.is_finite() && self.r_max.is_finite()) {
            errs.push("beta and r_max must be finite");
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::config(errs.join("; ")))
        }
    }

    fn log_term(&self) -> f64 {
        (2.0 * self.k as f64 / self.delta).ln()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryBound {
    /// Trajectories `N`.
    pub trajectories: f64,
    /// Visited states `N·T`.
    pub samples: f64,
}

/// `N = 8β²R²T² / (ε²(γ-1)⁴) · ln(2k/δ)` and `N·T`.
pub fn lemma1_samples(b: &BoundInputs) -> Result<TrajectoryBound> {
    b.validate()?;
    if b.gamma == 1.0 {
        return Err(Error::Numerical("the trajectory bound diverges at gamma = 1".into()));
    }
    let t = b.horizon as f64;
    let n = 8.0 * b.beta.powi(2) * b.r_max.powi(2) * t * t / (b.epsilon.powi(2) * (b.gamma - 1.0).powi(4)) * b.log_term();
    Ok(TrajectoryBound { trajectories: n, samples: n * t })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotBound {
    /// Shots per observable gradient, both shifted evaluations together.
    pub shots_per_observable: f64,
    /// `|A| · NT · n`.
    pub total_shots: f64,
}

/// `n = (4/ε²) ln(2k/δ)` shots per observable and `|A|·samples·n` in total.
pub fn lemma2_shots(b: &BoundInputs, samples: f64) -> Result<ShotBound> {
    b.validate()?;
    if !(samples >= 0.0 && samples.is_finite()) {
        return Err(Error::config("sample count must be finite and non-negative"));
    }
    let n = 4.0 / b.epsilon.powi(2) * b.log_term();
    Ok(ShotBound { shots_per_observable: n, total_shots: b.n_actions as f64 * samples * n })
}
