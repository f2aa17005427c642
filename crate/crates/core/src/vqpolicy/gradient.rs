//! Gradients of the action preferences and of `log π`.
//!
//! The reference route is the two-term parameter-shift rule: for a parameter
//! that sits in a single Pauli rotation,
//! `∂<a> = (<a>(θ + π/2) - <a>(θ - π/2)) / 2`, evaluated exactly or from shots.
//! In exact mode an adjoint sweep gives the same numbers for the cost of
//! roughly three circuit runs; it is what training uses when no shots are set.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::circuit::{prepare_input, read_preferences, run, template, Op};
use super::{
    softmax_scaled, Architecture, CircuitInput, CircuitSpec, Mode, PolicyParams,
};
use crate::qsim::Statevector;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    ParameterShift,
    /// Reverse sweep through the circuit; exact mode only.
    #[default]
    Adjoint,
}

/// Parameter-shift Jacobian: row `a` holds `∇_θ <a>_θ`.
pub fn grad_preferences(
    spec: &CircuitSpec,
    params: &PolicyParams,
    input: &CircuitInput,
    mode: &mut Mode<'_>,
) -> Result<Vec<Vec<f64>>> {
    params.check(spec)?;
    let ops = template(spec);
    let start = prepare_input(spec, input)?;
    let k = spec.n_theta();
    let mut jac = vec![vec![0.0; k]; spec.n_actions];
    for j in 0..k {
        let plus = run(&ops, &params.theta, &start, Some((j, FRAC_PI_2)))?;
        let minus = run(&ops, &params.theta, &start, Some((j, -FRAC_PI_2)))?;
        let up = read_preferences(spec, &plus, mode)?;
        let down = read_preferences(spec, &minus, mode)?;
        for (row, (u, d)) in jac.iter_mut().zip(up.iter().zip(&down)) {
            row[j] = 0.5 * (u - d);
        }
    }
    Ok(jac)
}

/// `∇_θ <action>_θ` by parameter shift.
pub fn grad_preference(
    spec: &CircuitSpec,
    params: &PolicyParams,
    input: &CircuitInput,
    action: usize,
    mode: &mut Mode<'_>,
) -> Result<Vec<f64>> {
    check_action(spec, action)?;
    Ok(grad_preferences(spec, params, input, mode)?.swap_remove(action))
}

/// `∇ log π(action | s)` over the full trainable vector (`theta` then `beta`):
///
/// - theta block: `β (∇<a> - Σ_b π_b ∇<b>)`
/// - beta entry: `<a> - Σ_b π_b <b>`
pub fn grad_log_policy(
    spec: &CircuitSpec,
    params: &PolicyParams,
    input: &CircuitInput,
    action: usize,
    mode: &mut Mode<'_>,
    method: GradientMethod,
) -> Result<Vec<f64>> {
    grad_log_policy_with_probs(spec, params, input, action, mode, method).map(|(g, _)| g)
}

/// Same as [`grad_log_policy`], also returning the policy probabilities it used.
pub(crate) fn grad_log_policy_with_probs(
    spec: &CircuitSpec,
    params: &PolicyParams,
    input: &CircuitInput,
    action: usize,
    mode: &mut Mode<'_>,
    method: GradientMethod,
) -> Result<(Vec<f64>, Vec<f64>)> {
    params.check(spec)?;
    check_action(spec, action)?;
    let ops = template(spec);
    let start = prepare_input(spec, input)?;
    let out = run(&ops, &params.theta, &start, None)?;
    let prefs = read_preferences(spec, &out, mode)?;
    let probs = softmax_scaled(&prefs, params.beta);

    // weights of the observable O = Σ_b (δ_ab - π_b) A_b
    let coeffs: Vec<f64> = probs
        .iter()
        .enumerate()
        .map(|(b, p)| if b == action { 1.0 - p } else { -p })
        .collect();
    let beta_entry: f64 = coeffs.iter().zip(&prefs).map(|(c, v)| c * v).sum();

    let dobs = match method {
        GradientMethod::ParameterShift => {
            let jac = grad_preferences(spec, params, input, mode)?;
            (0..spec.n_theta())
                .map(|j| coeffs.iter().zip(&jac).map(|(c, row)| c * row[j]).sum())
                .collect()
        }
        GradientMethod::Adjoint => {
            if !mode.is_exact() {
                return Err(Error::contract(
                    "adjoint gradients need exact expectations; use parameter shift with shots",
                ));
            }
            adjoint(spec, &ops, &params.theta, out, &coeffs)?
        }
    };

    let mut grad: Vec<f64> = dobs.into_iter().map(|d: f64| params.beta * d).collect();
    grad.push(beta_entry);
    Ok((grad, probs))
}

fn check_action(spec: &CircuitSpec, action: usize) -> Result<()> {
    if action >= spec.n_actions {
        return Err(Error::contract(format!(
            "action {action} out of range for {} actions",
            spec.n_actions
        )));
    }
    Ok(())
}

/// Diagonal of `Σ_a coeffs[a]·A_a` in the computational basis.
fn observable_diagonal(spec: &CircuitSpec, state: &Statevector, coeffs: &[f64]) -> Vec<f64> {
    let dim = state.amplitudes().len();
    match spec.architecture {
        Architecture::Layered => (0..dim)
            .map(|i| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(q, c)| c * state.z_sign(q, i))
                    .sum()
            })
            .collect(),
        Architecture::SingleU3 => {
            let c = coeffs[0] - coeffs[1];
            (0..dim).map(|i| c * state.z_sign(0, i)).collect()
        }
    }
}

/// `∇_θ <ψ(θ)|O|ψ(θ)>` for diagonal `O`, given the forward output `out`.
///
/// Walking back through the circuit, the contribution of a rotation
/// `exp(-iθP/2)` is `Im <λ|P|ψ>` where `ψ` is the state right after the gate
/// and `λ` is `O|ψ_out>` pulled back to the same point.
fn adjoint(
    spec: &CircuitSpec,
    ops: &[Op],
    theta: &[f64],
    out: Statevector,
    coeffs: &[f64],
) -> Result<Vec<f64>> {
    let mut psi = out;
    let mut lam = psi.clone();
    lam.scale_diagonal(&observable_diagonal(spec, &psi, coeffs));
    let mut grad = vec![0.0; theta.len()];
    let mut scratch = psi.clone();
    for op in ops.iter().rev() {
        if let Op::Rotation { axis, qubit, index } = *op {
            scratch.amplitudes_mut().copy_from_slice(psi.amplitudes());
            scratch.apply_pauli(axis, qubit);
            grad[index] += lam.inner(&scratch).im;
        }
        let inv = op.gate(theta, None).inverse();
        psi.apply(&inv)?;
        lam.apply(&inv)?;
    }
    Ok(grad)
}

/// Preferences and their log-softmax at a point; used by finite-difference
/// checks across the crate.
#[cfg(test)]
pub(crate) fn log_prob(
    spec: &CircuitSpec,
    flat: &[f64],
    input: &CircuitInput,
    action: usize,
) -> f64 {
    let params = PolicyParams::from_flat(spec, flat).unwrap();
    let prefs: super::ActionPreferences = super::preferences(spec, &params, input, &mut Mode::Exact).unwrap();
    super::log_policy(&prefs, params.beta, action)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::Gate;
    use crate::vqpolicy::{preferences, Encoding};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn ry_only() -> CircuitSpec {
        // one qubit, one layer: RY then RZ; the RZ cannot move <Z>
        CircuitSpec {
            n_qubits: 1,
            n_layers: 1,
            n_actions: 1,
            architecture: Architecture::Layered,
            encoding: Encoding::AngleRx,
        }
    }

    #[test]
    fn single_rotation_shift_rule() {
        let spec = ry_only();
        let input = CircuitInput::Angles(vec![0.0]);
        let at = |t: f64| {
            let p = PolicyParams { theta: vec![t, 0.0], beta: 1.0 };
            grad_preference(&spec, &p, &input, 0, &mut Mode::Exact).unwrap()
        };
        assert_abs_diff_eq!(at(0.0)[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(at(FRAC_PI_2)[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(at(FRAC_PI_2)[1], 0.0, epsilon = 1e-15);
    }

    fn random_input(spec: &CircuitSpec, rng: &mut ChaCha8Rng) -> CircuitInput {
        match spec.encoding {
            Encoding::AngleRx => CircuitInput::Angles(
                (0..spec.n_qubits).map(|_| rng.random_range(-PI..PI)).collect(),
            ),
            Encoding::None => CircuitInput::State(
                Statevector::zero(1)
                    .unwrap()
                    .applied(&Gate::U3 {
                        target: 0,
                        theta: rng.random_range(0.0..PI),
                        phi: rng.random_range(-PI..PI),
                        lambda: 0.0,
                    })
                    .unwrap(),
            ),
        }
    }

    #[test]
    fn adjoint_matches_parameter_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in [
            CircuitSpec::layered(4, 3, 2).unwrap(),
            CircuitSpec::layered(3, 2, 3).unwrap(),
            CircuitSpec::single_u3(),
        ] {
            for _ in 0..20 {
                let theta = (0..spec.n_theta()).map(|_| rng.random_range(-3.0..3.0)).collect();
                let params = PolicyParams { theta, beta: rng.random_range(0.2..4.0) };
                let input = random_input(&spec, &mut rng);
                for a in 0..spec.n_actions {
                    let ps = grad_log_policy(&spec, &params, &input, a, &mut Mode::Exact, GradientMethod::ParameterShift).unwrap();
                    let adj = grad_log_policy(&spec, &params, &input, a, &mut Mode::Exact, GradientMethod::Adjoint).unwrap();
                    for (x, y) in ps.iter().zip(&adj) {
                        assert_abs_diff_eq!(x, y, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn symmetric_preferences_zero_beta_entry() {
        let spec = CircuitSpec::layered(2, 1, 2).unwrap();
        let params = PolicyParams { theta: vec![0.0; 4], beta: 1.3 };
        let input = CircuitInput::Angles(vec![0.0, 0.4]);
        let prefs = preferences(&spec, &params, &input, &mut Mode::Exact).unwrap();
        assert_abs_diff_eq!(prefs.values[0], prefs.values[1], epsilon = 1e-15);
        let jac = grad_preferences(&spec, &params, &input, &mut Mode::Exact).unwrap();
        for a in 0..2 {
            let g = grad_log_policy(&spec, &params, &input, a, &mut Mode::Exact, GradientMethod::ParameterShift).unwrap();
            assert_abs_diff_eq!(g[4], 0.0, epsilon = 1e-15);
            for j in 0..4 {
                let mean = 0.5 * jac[0][j] + 0.5 * jac[1][j];
                assert_abs_diff_eq!(g[j], 1.3 * (jac[a][j] - mean), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn two_action_scores_cancel() {
        let spec = CircuitSpec::single_u3();
        let params = PolicyParams { theta: vec![0.4, 1.0, -0.3], beta: 2.0 };
        let input = CircuitInput::State(Statevector::zero(1).unwrap());
        let prefs = preferences(&spec, &params, &input, &mut Mode::Exact).unwrap();
        let pi = crate::vqpolicy::policy(&prefs, params.beta);
        let g0 = grad_log_policy(&spec, &params, &input, 0, &mut Mode::Exact, GradientMethod::Adjoint).unwrap();
        let g1 = grad_log_policy(&spec, &params, &input, 1, &mut Mode::Exact, GradientMethod::Adjoint).unwrap();
        for (a, b) in g0.iter().zip(&g1) {
            assert_abs_diff_eq!(pi[0] * a + pi[1] * b, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn log_policy_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = CircuitSpec::layered(3, 2, 2).unwrap();
        let theta = (0..spec.n_theta()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let params = PolicyParams { theta, beta: 1.7 };
        let input = random_input(&spec, &mut rng);
        let flat = params.to_flat();
        let h = 1e-5;
        for a in 0..2 {
            let g = grad_log_policy(&spec, &params, &input, a, &mut Mode::Exact, GradientMethod::ParameterShift).unwrap();
            for j in 0..flat.len() {
                let mut up = flat.clone();
                let mut down = flat.clone();
                up[j] += h;
                down[j] -= h;
                let fd = (log_prob(&spec, &up, &input, a) - log_prob(&spec, &down, &input, a)) / (2.0 * h);
                assert_abs_diff_eq!(g[j], fd, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn shot_gradients_converge() {
        let spec = CircuitSpec::single_u3();
        let params = PolicyParams { theta: vec![0.9, 0.2, -0.4], beta: 1.0 };
        let input = CircuitInput::State(Statevector::zero(1).unwrap());
        let exact = grad_preference(&spec, &params, &input, 0, &mut Mode::Exact).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut mode = Mode::Shots { shots: 100_000, rng: &mut rng };
        let noisy = grad_preference(&spec, &params, &input, 0, &mut mode).unwrap();
        for (e, n) in exact.iter().zip(&noisy) {
            assert!((e - n).abs() < 0.02);
        }
        assert!(grad_log_policy(&spec, &params, &input, 0, &mut mode, GradientMethod::Adjoint).is_err());
    }
}
