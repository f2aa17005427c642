//! Sample and shot budgets, then a Monte-Carlo check that the shot budget
//! holds its failure probability.

use qpg::analysis::{bernoulli_self_test, hoeffding_validate, lemma1_samples, lemma2_shots, BoundInputs};

fn main() -> qpg::Result<()> {
    let b = BoundInputs { beta: 1.0, r_max: 1.0, horizon: 200, gamma: 0.99, epsilon: 0.1, delta: 0.05, k: 25, n_actions: 2 };
    let l1 = lemma1_samples(&b)?;
    let l2 = lemma2_shots(&b, l1.samples)?;
    println!("CartPole-sized circuit, eps {}, delta {}:", b.epsilon, b.delta);
    println!("  trajectories {:.3e}, visited states {:.3e}", l1.trajectories, l1.samples);
    println!("  shots per observable {:.0}, total {:.3e}", l2.shots_per_observable, l2.total_shots);

    for k in [1, 4, 25, 768] {
        let n = lemma2_shots(&BoundInputs { k, ..b }, 1.0)?.shots_per_observable;
        println!("  k = {k:>3}: {n:.0} shots per observable");
    }

    let coin = bernoulli_self_test(0.1, 0.05, 2000, 0)?;
    println!("coin: {} flips, {}/{} trials off by 0.1 or more", coin.budget, coin.failures, coin.trials);
    let check = BoundInputs { epsilon: 0.2, delta: 0.1, k: 4, horizon: 10, ..b };
    let shots = hoeffding_validate(&check, 500, 0)?;
    println!(
        "single-U3 gradient: {} shots per evaluation, {}/{} trials off by 0.2 or more, pass = {}",
        shots.budget, shots.failures, shots.trials, shots.pass
    );
    Ok(())
}
