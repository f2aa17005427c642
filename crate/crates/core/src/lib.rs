//! Quantum policy-gradient laboratory.
//!
//! A variational-quantum-circuit softmax policy (angle encoding, a
//! hardware-efficient RY/RZ + CNOT ansatz, Pauli-Z action preferences and a
//! trainable inverse temperature) trained with REINFORCE, next to bias-free
//! ReLU baselines, three episodic environments, empirical Fisher-spectrum
//! diagnostics and sample-complexity calculators.
//!
//! Everything runs on a small dense statevector simulator in [`qsim`]; there
//! is no external quantum or ML framework.
//!
//! Module map:
//!
//! - [`qsim`]: statevectors, gates, Pauli-Z expectations, shot sampling,
//!   closed-form single-qubit Hamiltonian evolution.
//! - [`vqpolicy`]: the variational policy and its parameter-shift gradients.
//! - [`classical`]: bias-free MLP baselines with manual backpropagation.
//! - [`envs`]: CartPole, Acrobot and the single-qubit QControl task.
//! - [`agent`]: the [`agent::Policy`] trait tying policies to the trainer.
//! - [`reinforce`]: baseline, gradient estimator, Adam, initializers, training.
//! - [`analysis`]: Fisher matrix, Jacobi spectrum, bounds, Hoeffding harness.
//! - [`cli`]: experiment configs, presets, runs, plots and comparisons.

pub mod agent;
pub mod analysis;
pub mod classical;
pub mod cli;
pub mod envs;
mod error;
pub mod qsim;
pub mod reinforce;
pub mod vqpolicy;

pub use error::{Error, Result};
