//! End-to-end experiment flow without the binary: two runs written to a
//! scratch directory, a reward plot, and a JSON comparison.

use qpg::cli::report::{compare, plot};
use qpg::cli::run::run_experiment;
use qpg::cli::Preset;

fn main() -> qpg::Result<()> {
    let root = std::env::temp_dir().join(format!("qpg-report-{}", std::process::id()));
    let mut dirs = Vec::new();
    for name in ["qcontrol-quantum", "qcontrol-classical"] {
        let mut config = name.parse::<Preset>()?.config();
        config.episodes = 200;
        config.fisher_checkpoints = true;
        let dir = root.join(name);
        let outcome = run_experiment(&config, &dir, |_| {})?;
        println!("{name}: {} episodes, manifest hash {}", outcome.metrics.len(), &outcome.manifest.config_hash[..12]);
        dirs.push(dir);
    }

    let svg = root.join("rewards.svg");
    let csv = plot(&dirs.iter().map(|d| d.join("metrics.csv")).collect::<Vec<_>>(), 20, &svg)?;
    println!("plot: {}\nsmoothed: {}", svg.display(), csv.display());

    let cmp = compare(&dirs[0], &dirs[1], 20, None)?;
    println!("{}", serde_json::to_string_pretty(&cmp)?);
    Ok(())
}
