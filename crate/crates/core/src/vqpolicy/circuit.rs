use super::{
    ActionPreferences, Architecture, CircuitInput, CircuitSpec, Encoding, FeatureNormalizer, Mode,
    PolicyParams,
};
use crate::qsim::{Gate, Pauli, Statevector};
use crate::{Error, Result};

/// One step of the differentiable circuit: either a fixed gate or a Pauli
/// rotation whose angle is `params[index] + shift`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Op {
    Fixed(Gate),
    Rotation { axis: Pauli, qubit: usize, index: usize },
}

impl Op {
    pub(crate) fn gate(&self, theta: &[f64], shift: Option<(usize, f64)>) -> Gate {
        match *self {
            Op::Fixed(g) => g,
            Op::Rotation { axis, qubit, index } => {
                let mut angle = theta[index];
                if let Some((j, delta)) = shift {
                    if j == index {
                        angle += delta;
                    }
                }
                Gate::rotation(axis, qubit, angle)
            }
        }
    }
}

/// CNOT pairs for layer `layer` (1-based): control `i`, target `(i + layer) mod n`.
fn entanglers(n_qubits: usize, layer: usize) -> impl Iterator<Item = Gate> {
    (0..n_qubits).filter_map(move |i| {
        let target = (i + layer) % n_qubits;
        (target != i).then_some(Gate::Cnot { control: i, target })
    })
}

/// Differentiable form of the ansatz. `U3(θ, φ, λ)` is expanded into
/// `RZ(λ)`, `RY(θ)`, `RZ(φ)` (application order), equal to `U3` up to a
/// global phase, so every parameter sits in exactly one Pauli rotation.
pub(crate) fn template(spec: &CircuitSpec) -> Vec<Op> {
    match spec.architecture {
        Architecture::Layered => {
            let n = spec.n_qubits;
            let mut ops = Vec::with_capacity(spec.n_layers * 3 * n);
            for layer in 1..=spec.n_layers {
                let offset = (layer - 1) * 2 * n;
                for q in 0..n {
                    ops.push(Op::Rotation { axis: Pauli::Y, qubit: q, index: offset + 2 * q });
                    ops.push(Op::Rotation { axis: Pauli::Z, qubit: q, index: offset + 2 * q + 1 });
                }
                ops.extend(entanglers(n, layer).map(Op::Fixed));
            }
            ops
        }
        Architecture::SingleU3 => vec![
            Op::Rotation { axis: Pauli::Z, qubit: 0, index: 2 },
            Op::Rotation { axis: Pauli::Y, qubit: 0, index: 0 },
            Op::Rotation { axis: Pauli::Z, qubit: 0, index: 1 },
        ],
    }
}

/// Gate list of the parameterized block `U(θ)`.
pub fn build_ansatz(spec: &CircuitSpec, params: &PolicyParams) -> Result<Vec<Gate>> {
    params.check(spec)?;
    let theta = &params.theta;
    Ok(match spec.architecture {
        Architecture::Layered => template(spec).iter().map(|op| op.gate(theta, None)).collect(),
        Architecture::SingleU3 => vec![Gate::U3 {
            target: 0,
            theta: theta[0],
            phi: theta[1],
            lambda: theta[2],
        }],
    })
}

/// Initial state `S(s)|0>` for the given input.
pub fn prepare_input(spec: &CircuitSpec, input: &CircuitInput) -> Result<Statevector> {
    match (spec.encoding, input) {
        (Encoding::AngleRx, CircuitInput::Angles(angles)) => {
            if angles.len() != spec.n_qubits {
                return Err(Error::contract(format!(
                    "{} encoding angles for {} qubits",
                    angles.len(),
                    spec.n_qubits
                )));
            }
            let mut state = Statevector::zero(spec.n_qubits)?;
            for (q, &angle) in angles.iter().enumerate() {
                if angle != 0.0 {
                    state.apply(&Gate::Rx { target: q, angle })?;
                }
            }
            Ok(state)
        }
        (Encoding::None, CircuitInput::State(state)) => {
            if state.n_qubits() != spec.n_qubits {
                return Err(Error::contract(format!(
                    "input state has {} qubits, circuit has {}",
                    state.n_qubits(),
                    spec.n_qubits
                )));
            }
            Ok(state.clone())
        }
        (Encoding::AngleRx, CircuitInput::State(_)) => {
            Err(Error::contract("angle-encoded circuit was given a quantum state"))
        }
        (Encoding::None, CircuitInput::Angles(_)) => {
            Err(Error::contract("unencoded circuit was given classical features"))
        }
    }
}

/// Angle-encodes raw `features`, updating the normalizer.
pub fn encode(features: &[f64], normalizer: &mut FeatureNormalizer) -> Result<Statevector> {
    let angles = normalizer.observe(features)?;
    let mut state = Statevector::zero(angles.len())?;
    for (q, &angle) in angles.iter().enumerate() {
        state.apply(&Gate::Rx { target: q, angle })?;
    }
    Ok(state)
}

/// Runs the template on `start`, optionally shifting one parameter.
pub(crate) fn run(
    ops: &[Op],
    theta: &[f64],
    start: &Statevector,
    shift: Option<(usize, f64)>,
) -> Result<Statevector> {
    let mut state = start.clone();
    for op in ops {
        state.apply(&op.gate(theta, shift))?;
    }
    Ok(state)
}

/// Reads the action preferences off a final state.
pub(crate) fn read_preferences(
    spec: &CircuitSpec,
    state: &Statevector,
    mode: &mut Mode<'_>,
) -> Result<Vec<f64>> {
    match spec.architecture {
        Architecture::Layered => (0..spec.n_actions).map(|q| mode.measure_z(state, q)).collect(),
        Architecture::SingleU3 => {
            let z = mode.measure_z(state, 0)?;
            Ok(vec![z, -z])
        }
    }
}

/// `<a_j>_θ` for every action `j`.
pub fn preferences(
    spec: &CircuitSpec,
    params: &PolicyParams,
    input: &CircuitInput,
    mode: &mut Mode<'_>,
) -> Result<ActionPreferences> {
    params.check(spec)?;
    let start = prepare_input(spec, input)?;
    let out = run(&template(spec), &params.theta, &start, None)?;
    Ok(ActionPreferences {
        values: read_preferences(spec, &out, mode)?,
    })
}
