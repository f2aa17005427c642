//! A layered variational circuit as a softmax policy: preferences,
//! probabilities, and the log-policy gradient by parameter shift and by the
//! adjoint sweep.

use qpg::vqpolicy::{
    grad_log_policy, policy, preferences, CircuitInput, CircuitSpec, FeatureNormalizer, GradientMethod, Mode,
    PolicyParams,
};

fn main() -> qpg::Result<()> {
    let spec = CircuitSpec::layered(4, 3, 2)?;
    let theta: Vec<f64> = (0..spec.n_theta()).map(|j| 0.1 * j as f64 - 1.0).collect();
    let params = PolicyParams::new(&spec, theta, 1.5)?;
    println!("{} qubits, {} layers, {} trainable scalars", spec.n_qubits, spec.n_layers, spec.n_trainable());

    let mut normalizer = FeatureNormalizer::new(4);
    normalizer.observe(&[0.5, -1.0, 0.05, 2.0])?;
    let angles = normalizer.observe(&[0.2, 0.4, -0.05, -1.0])?;
    println!("encoding angles {angles:.3?}");
    let input = CircuitInput::Angles(angles);

    let prefs = preferences(&spec, &params, &input, &mut Mode::Exact)?;
    println!("preferences {:.4?}", prefs.values);
    println!("policy      {:.4?}", policy(&prefs, params.beta));

    for action in 0..2 {
        let shift = grad_log_policy(&spec, &params, &input, action, &mut Mode::Exact, GradientMethod::ParameterShift)?;
        let adjoint = grad_log_policy(&spec, &params, &input, action, &mut Mode::Exact, GradientMethod::Adjoint)?;
        let gap = shift.iter().zip(&adjoint).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("action {action}: d/dbeta = {:+.4}, |shift - adjoint| <= {gap:.1e}", shift[spec.n_theta()]);
    }

    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
    let mut shots = Mode::Shots { shots: 2000, rng: &mut rng };
    let noisy = grad_log_policy(&spec, &params, &input, 0, &mut shots, GradientMethod::ParameterShift)?;
    println!("2000-shot estimate of the first three entries {:.4?}", &noisy[..3]);
    Ok(())
}
