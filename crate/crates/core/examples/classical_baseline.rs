//! The bias-free ReLU baselines: parameter counts against the circuits, a
//! dropout-enabled forward pass, and a short training run under the same
//! REINFORCE loop.

use qpg::agent::{Agent, ClassicalAgent};
use qpg::classical::{self, MlpSpec};
use qpg::cli::Preset;
use qpg::envs::EnvKind;
use qpg::reinforce::Trainer;

fn main() -> qpg::Result<()> {
    for p in Preset::ALL {
        println!("{:<20} {:>4} parameters", p.to_string(), p.config().n_params()?);
    }

    let spec = MlpSpec::new(vec![4, 16, 2], 0.2, false)?;
    let params: Vec<f64> = (0..spec.n_params()).map(|j| ((j * 37 % 11) as f64 - 5.0) / 10.0).collect();
    let x = [0.1, -0.3, 0.05, 0.4];
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    let masks = spec.sample_masks(&mut rng);
    println!("eval  {:.4?}", classical::probabilities(&spec, &params, &x, None)?);
    println!("train {:.4?}", classical::probabilities(&spec, &params, &x, masks.as_ref())?);

    let mut config = "cartpole-classical".parse::<Preset>()?.config();
    config.episodes = 100;
    let agent = Agent::Classical(ClassicalAgent::new(classical::preset(EnvKind::CartPole))?);
    let trainer = Trainer::new(agent, config.env_factory(), config.train_config())?;
    for m in trainer {
        let m = m?;
        if m.episode % 20 == 0 {
            println!("episode {:>3}  reward {:>6.1}  grad norm {:.3}", m.episode, m.total_reward, m.grad_norm);
        }
    }
    Ok(())
}
