use qpg::cli::Preset;
use qpg::reinforce::Trainer;

fn trainer(p: Preset, seed: u64, episodes: usize) -> Trainer<qpg::agent::Agent> {
    let mut config = p.config();
    config.seed = seed;
    config.episodes = episodes;
    Trainer::new(config.agent().unwrap(), config.env_factory(), config.train_config()).unwrap()
}

#[test]
fn gradient_norms_stay_finite_for_every_preset() {
    for p in Preset::ALL {
        let mut t = trainer(p, 11, 200);
        let mut n = 0;
        for m in t.by_ref() {
            let m = m.unwrap();
            assert!(m.grad_norm.is_finite(), "{p} episode {}", m.episode);
            assert!(m.total_reward.is_finite() && m.discounted_return.is_finite());
            n += 1;
        }
        assert_eq!(n, 200, "{p}");
        assert!(t.params().iter().all(|v| v.is_finite()), "{p}");
    }
}

#[test]
fn parameter_trajectories_repeat_under_a_seed() {
    for p in Preset::ALL {
        let trace = |seed| {
            let mut t = trainer(p, seed, 5);
            let mut params = vec![t.params().to_vec()];
            while let Some(m) = t.next() {
                m.unwrap();
                params.push(t.params().to_vec());
            }
            params
        };
        let a = trace(5);
        assert_eq!(a, trace(5), "{p}");
        assert_ne!(a, trace(6), "{p}");
        assert_ne!(a[0], a[5], "{p}: training moved nothing");
    }
}

#[test]
fn zero_episode_budget_is_empty() {
    for p in Preset::ALL {
        assert_eq!(trainer(p, 0, 0).count(), 0);
    }
}
