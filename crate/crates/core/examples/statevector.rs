//! Gate-level simulation: a Bell pair, single-qubit rotations, and the
//! two-level propagator that drives the control task.

use std::f64::consts::{FRAC_PI_2, PI};

use qpg::qsim::{Gate, Statevector, TwoLevelHamiltonian};

fn show(label: &str, s: &Statevector) {
    let amps: Vec<String> = s.amplitudes().iter().map(|a| format!("{:+.4}{:+.4}i", a.re, a.im)).collect();
    println!("{label:<22} [{}]", amps.join(", "));
}

fn main() -> qpg::Result<()> {
    let mut bell = Statevector::zero(2)?;
    bell.apply_all(&[
        Gate::Ry { target: 0, angle: FRAC_PI_2 },
        Gate::Cnot { control: 0, target: 1 },
    ])?;
    show("RY(pi/2) then CNOT", &bell);
    println!("<Z0> = {:.4}, <Z1> = {:.4}", bell.expectation_z(0)?, bell.expectation_z(1)?);

    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    let plus = Statevector::zero(1)?.applied(&Gate::Rx { target: 0, angle: 1.0 })?;
    println!(
        "<Z> after RX(1): exact {:.4}, 1000 shots {:.4}",
        plus.expectation_z(0)?,
        plus.sample_z(0, 1000, &mut rng)?
    );

    // ten free pulses of length pi/20 under sigma_x rotate |0> onto |1>
    let h = TwoLevelHamiltonian::new(0.0, 1.0)?;
    let mut q = Statevector::zero(1)?;
    let target = Statevector::basis(1, 1)?;
    for step in 1..=10 {
        q.evolve(&h, PI / 20.0)?;
        println!("pulse {step:>2}: fidelity to |1> = {:.4}", q.fidelity(&target)?);
    }
    Ok(())
}
