//! Trains the quantum CartPole preset and prints the running mean reward.
//!
//! `cargo run --release --example train_cartpole -- [seed] [episodes]`

use qpg::cli::report::running_mean;
use qpg::cli::Preset;
use qpg::reinforce::Trainer;

fn main() -> qpg::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().map_or(0, |s| s.parse().expect("seed"));
    let episodes = args.next().map_or(150, |s| s.parse().expect("episodes"));

    let mut config = Preset::ALL[0].config();
    config.seed = seed;
    config.episodes = episodes;
    println!("{}: lr {}, {} layers, batch {}", config.name, config.learning_rate, config.n_layers, config.batch_size);

    let trainer = Trainer::new(config.agent()?, config.env_factory(), config.train_config())?;
    let mut rewards = Vec::new();
    for m in trainer {
        let m = m?;
        rewards.push(m.total_reward);
        if m.episode % 10 == 0 {
            let mean = running_mean(&rewards, 50).last().copied().unwrap_or_default();
            println!(
                "episode {:>4}  batch reward {:>6.1}  running mean {:>6.1}  beta {:.3}",
                m.episode,
                m.total_reward,
                mean,
                m.beta.unwrap_or_default()
            );
        }
    }
    Ok(())
}
