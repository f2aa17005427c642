//! Dense statevector simulation for up to eight qubits.
//!
//! Basis index `i` is read with qubit 0 as the most significant bit, so on two
//! qubits the amplitude order is `|00>, |01>, |10>, |11>` with the left digit
//! belonging to qubit 0.
//!
//! Rotations follow `R_P(θ) = exp(-iθP/2) = cos(θ/2)·I - i·sin(θ/2)·P` and
//! `U3(θ, φ, λ)` is the usual Z-Y-Z Euler gate
//! `[[cos(θ/2), -e^{iλ} sin(θ/2)], [e^{iφ} sin(θ/2), e^{i(φ+λ)} cos(θ/2)]]`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAX_QUBITS: usize = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub type Matrix2 = [[Complex64; 2]; 2];

/// Single-qubit Pauli operators, used as rotation generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Matrix2 {
        let i = Complex64::i();
        match self {
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -i], [i, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Rx { target: usize, angle: f64 },
    Ry { target: usize, angle: f64 },
    Rz { target: usize, angle: f64 },
    U3 { target: usize, theta: f64, phi: f64, lambda: f64 },
    Cnot { control: usize, target: usize },
}

impl Gate {
    /// Pauli rotation about `axis`.
    pub fn rotation(axis: Pauli, target: usize, angle: f64) -> Gate {
        match axis {
            Pauli::X => Gate::Rx { target, angle },
            Pauli::Y => Gate::Ry { target, angle },
            Pauli::Z => Gate::Rz { target, angle },
        }
    }

    pub fn target(&self) -> usize {
        match *self {
            Gate::Rx { target, .. }
            | Gate::Ry { target, .. }
            | Gate::Rz { target, .. }
            | Gate::U3 { target, .. }
            | Gate::Cnot { target, .. } => target,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            Gate::Cnot { control, .. } => Some(control),
            _ => None,
        }
    }

    pub fn angles(&self) -> Vec<f64> {
        match *self {
            Gate::Rx { angle, .. } | Gate::Ry { angle, .. } | Gate::Rz { angle, .. } => vec![angle],
            Gate::U3 { theta, phi, lambda, .. } => vec![theta, phi, lambda],
            Gate::Cnot { .. } => Vec::new(),
        }
    }

    /// The 2×2 unitary of a single-qubit gate; `None` for CNOT.
    pub fn matrix(&self) -> Option<Matrix2> {
        let m = match *self {
            Gate::Rx { angle, .. } => {
                let (s, c) = (angle / 2.0).sin_cos();
                let mis = Complex64::new(0.0, -s);
                [[c.into(), mis], [mis, c.into()]]
            }
            Gate::Ry { angle, .. } => {
                let (s, c) = (angle / 2.0).sin_cos();
                [[c.into(), (-s).into()], [s.into(), c.into()]]
            }
            Gate::Rz { angle, .. } => {
                let half = angle / 2.0;
                [
                    [Complex64::from_polar(1.0, -half), ZERO],
                    [ZERO, Complex64::from_polar(1.0, half)],
                ]
            }
            Gate::U3 { theta, phi, lambda, .. } => {
                let (s, c) = (theta / 2.0).sin_cos();
                [
                    [c.into(), -Complex64::from_polar(s, lambda)],
                    [
                        Complex64::from_polar(s, phi),
                        Complex64::from_polar(c, phi + lambda),
                    ],
                ]
            }
            Gate::Cnot { .. } => return None,
        };
        Some(m)
    }

    /// The inverse gate.
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rx { target, angle } => Gate::Rx { target, angle: -angle },
            Gate::Ry { target, angle } => Gate::Ry { target, angle: -angle },
            Gate::Rz { target, angle } => Gate::Rz { target, angle: -angle },
            Gate::U3 { target, theta, phi, lambda } => Gate::U3 {
                target,
                theta: -theta,
                phi: -lambda,
                lambda: -phi,
            },
            cnot @ Gate::Cnot { .. } => cnot,
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let target = self.target();
        if target >= n_qubits {
            return Err(Error::contract(format!(
                "gate target {target} out of range for {n_qubits} qubits"
            )));
        }
        if let Some(control) = self.control() {
            if control >= n_qubits {
                return Err(Error::contract(format!(
                    "gate control {control} out of range for {n_qubits} qubits"
                )));
            }
            if control == target {
                return Err(Error::contract("CNOT control equals target"));
            }
        }
        if self.angles().iter().any(|a| !a.is_finite()) {
            return Err(Error::contract("gate angle is not finite"));
        }
        Ok(())
    }
}

/// `H = coeff_z·σ_z + coeff_x·σ_x` on a single qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelHamiltonian {
    pub coeff_z: f64,
    pub coeff_x: f64,
}

impl TwoLevelHamiltonian {
    pub fn new(coeff_z: f64, coeff_x: f64) -> Result<Self> {
        if !coeff_z.is_finite() || !coeff_x.is_finite() {
            return Err(Error::contract("Hamiltonian coefficients must be finite"));
        }
        Ok(Self { coeff_z, coeff_x })
    }

    /// `exp(-i·H·t) = cos(ωt)·I - i·sin(ωt)·H/ω` with `ω = sqrt(a² + b²)`.
    pub fn propagator(&self, t: f64) -> Matrix2 {
        let (a, b) = (self.coeff_z, self.coeff_x);
        let omega = a.hypot(b);
        if omega == 0.0 {
            return [[ONE, ZERO], [ZERO, ONE]];
        }
        let (s, c) = (omega * t).sin_cos();
        let k = s / omega;
        [
            [Complex64::new(c, -k * a), Complex64::new(0.0, -k * b)],
            [Complex64::new(0.0, -k * b), Complex64::new(c, k * a)],
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::config(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        Ok(Self { n_qubits, amplitudes })
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut state = Self::zero(n_qubits)?;
        if index >= state.amplitudes.len() {
            return Err(Error::contract(format!("basis index {index} out of range")));
        }
        state.amplitudes[0] = ZERO;
        state.amplitudes[index] = ONE;
        Ok(state)
    }

    /// Builds a state from raw amplitudes; the length must be a power of two
    /// and the vector must be normalized to within 1e-8.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() || len > 1 << MAX_QUBITS {
            return Err(Error::contract(format!(
                "amplitude count {len} is not 2^n with 1 <= n <= {MAX_QUBITS}"
            )));
        }
        let state = Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        };
        if (state.norm_sqr() - 1.0).abs() > 1e-8 {
            return Err(Error::contract("amplitudes are not normalized"));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Bit mask of `qubit` inside a basis index.
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::contract(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            Gate::Cnot { control, target } => self.apply_cnot(control, target),
            _ => {
                let m = gate.matrix().expect("single-qubit gate has a matrix");
                self.apply_matrix(gate.target(), &m);
            }
        }
        Ok(())
    }

    /// Functional form of [`Statevector::apply`].
    pub fn applied(mut self, gate: &Gate) -> Result<Self> {
        self.apply(gate)?;
        Ok(self)
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for gate in gates {
            self.apply(gate)?;
        }
        Ok(())
    }

    /// Applies an arbitrary 2×2 matrix to `qubit`. Unitarity is the caller's
    /// business; Pauli generators go through here too.
    pub(crate) fn apply_matrix(&mut self, qubit: usize, m: &Matrix2) {
        let mask = self.mask(qubit);
        let dim = self.amplitudes.len();
        let mut block = 0;
        while block < dim {
            for i in block..block + mask {
                let j = i + mask;
                let a = self.amplitudes[i];
                let b = self.amplitudes[j];
                self.amplitudes[i] = m[0][0] * a + m[0][1] * b;
                self.amplitudes[j] = m[1][0] * a + m[1][1] * b;
            }
            block += 2 * mask;
        }
    }

    pub(crate) fn apply_pauli(&mut self, pauli: Pauli, qubit: usize) {
        self.apply_matrix(qubit, &pauli.matrix());
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cmask = self.mask(control);
        let tmask = self.mask(target);
        for i in 0..self.amplitudes.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amplitudes.swap(i, i | tmask);
            }
        }
    }

    /// Probability of reading 0 on `qubit`.
    pub fn prob_zero(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit);
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// `<σ_z>` on `qubit`: each basis probability weighted by ±1.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit);
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }

    /// Finite-shot estimate `2·(#zeros/shots) - 1` of `<σ_z>` on `qubit`.
    pub fn sample_z<R: Rng + ?Sized>(&self, qubit: usize, shots: u64, rng: &mut R) -> Result<f64> {
        if shots == 0 {
            return Err(Error::contract("shots must be at least 1"));
        }
        let p0 = self.prob_zero(qubit)?.clamp(0.0, 1.0);
        let zeros = Binomial::new(shots, p0)
            .map_err(|e| Error::Numerical(format!("binomial sampler: {e}")))?
            .sample(rng);
        Ok(2.0 * zeros as f64 / shots as f64 - 1.0)
    }

    /// Evolves a single qubit under a constant Hamiltonian for `dt`.
    pub fn evolve(&mut self, h: &TwoLevelHamiltonian, dt: f64) -> Result<()> {
        if self.n_qubits != 1 {
            return Err(Error::contract(format!(
                "Hamiltonian evolution needs a single qubit, state has {}",
                self.n_qubits
            )));
        }
        if !dt.is_finite() || dt < 0.0 {
            return Err(Error::contract(format!("evolution time must be >= 0, got {dt}")));
        }
        self.apply_matrix(0, &h.propagator(dt));
        Ok(())
    }

    /// `|<self|other>|²`.
    pub fn fidelity(&self, other: &Statevector) -> Result<f64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::contract(format!(
                "fidelity between {} and {} qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        let overlap: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(overlap.norm_sqr().min(1.0))
    }

    pub(crate) fn inner(&self, other: &Statevector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    /// Multiplies every amplitude by `weights[i]`; used to apply diagonal observables.
    pub(crate) fn scale_diagonal(&mut self, weights: &[f64]) {
        for (a, w) in self.amplitudes.iter_mut().zip(weights) {
            *a *= *w;
        }
    }

    /// `±1` eigenvalue of `σ_z` on `qubit` for basis index `index`.
    pub(crate) fn z_sign(&self, qubit: usize, index: usize) -> f64 {
        if index & self.mask(qubit) == 0 {
            1.0
        } else {
            -1.0
        }
    }
}
