//! Learns a ten-pulse sequence that carries a qubit from |0> to |1> and
//! prints the greedy sequence of the trained single-U3 policy.

use qpg::agent::{Agent, Policy};
use qpg::cli::Preset;
use qpg::envs::EnvKind;
use qpg::reinforce::Trainer;

fn main() -> qpg::Result<()> {
    let mut config: qpg::cli::ExperimentConfig = "qcontrol-quantum".parse::<Preset>()?.config();
    config.seed = 1;
    let mut trainer = Trainer::new(config.agent()?, config.env_factory(), config.train_config())?;
    for m in trainer.by_ref() {
        let m = m?;
        if m.episode % 50 == 0 {
            println!("episode {:>3}  mean fidelity sum {:.3}", m.episode, m.total_reward);
        }
    }

    let mut agent: Agent = trainer.policy().clone();
    let params = trainer.params().to_vec();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    let mut env = EnvKind::QControl.make();
    let mut obs = env.reset(&mut rng);
    let (mut pulses, mut total) = (String::new(), 0.0);
    loop {
        let input = agent.prepare(&obs, &mut rng)?;
        let probs = agent.probabilities(&params, &input, &mut rng)?;
        let action = if probs[1] > probs[0] { 1 } else { 0 };
        let step = env.step(action)?;
        pulses.push_str(if action == 1 { "J" } else { "-" });
        total += step.reward;
        if step.done {
            break;
        }
        obs = step.observation;
    }
    println!("greedy pulses {pulses}  fidelity sum {total:.3} (best possible 5.5)");
    Ok(())
}
