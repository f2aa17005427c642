//! Empirical Fisher spectra of freshly initialized quantum and classical
//! CartPole policies over the same number of rollouts.

use qpg::agent::Policy;
use qpg::analysis::{fisher_matrix, spectrum, FisherScope};
use qpg::cli::Preset;
use qpg::reinforce::{init_params, rollout};

fn main() -> qpg::Result<()> {
    for name in ["cartpole-quantum", "cartpole-classical"] {
        let config = name.parse::<Preset>()?.config();
        let mut agent = config.agent()?;
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
        let params = init_params(&config.init, &config.beta_init, &agent.layout(), &mut rng)?;
        let (mut inputs, mut actions) = (Vec::new(), Vec::new());
        for _ in 0..5 {
            let mut env = config.environment.make();
            let t = rollout(&mut agent, &params, env.as_mut(), config.gamma, &mut rng)?;
            inputs.extend(t.inputs);
            actions.extend(t.actions);
        }
        let f = fisher_matrix(&agent, &params, &inputs, &actions, FisherScope::Full, &mut rng)?;
        let report = spectrum(&f)?;
        println!(
            "{name}: k = {}, {} states, trace {:.4}, largest {:.3e}, nonzero fraction {:.3}",
            report.eigenvalues.len(),
            inputs.len(),
            report.trace,
            report.eigenvalues[0],
            report.nonzero_fraction()
        );
    }
    Ok(())
}
