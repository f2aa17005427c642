//! Command-line surface: `run`, `plot`, `compare`, `bounds`, `fisher` and
//! `validate-hoeffding`.
//!
//! Exit codes: 0 ok, 1 contract or validation failure, 2 I/O failure.

pub mod config;
pub mod report;
pub mod run;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::agent::{Agent, Policy};
use crate::analysis::{
    bernoulli_self_test, hoeffding_validate, lemma1_samples, lemma2_shots, spectrum, BoundInputs, FisherMatrix,
    FisherScope,
};
use crate::envs::EnvKind;
use crate::reinforce::{rollout, step_gradients};
use crate::{Error, Result};

pub use config::{ExperimentConfig, PartialConfig, Preset};

#[derive(Debug, Parser)]
#[command(name = "qpg", version, about = "Quantum policy-gradient experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a policy and write metrics, checkpoint and manifest.
    Run(RunArgs),
    /// Plot running-mean rewards of one or more metrics CSVs as SVG.
    Plot(PlotArgs),
    /// Summarize two finished runs as JSON.
    Compare(CompareArgs),
    /// Evaluate the sample and shot bounds.
    Bounds(BoundsArgs),
    /// Fisher spectrum of a checkpoint over fresh rollouts.
    Fisher(FisherArgs),
    /// Monte-Carlo check of the Hoeffding budgets.
    ValidateHoeffding(HoeffdingArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Output directory; falls back to `$QPG_OUT_DIR/<name>-seed<seed>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub parallel_rollouts: Option<usize>,
    /// Take a Fisher spectrum every tenth of the budget.
    #[arg(long)]
    pub fisher: bool,
    /// Print the resolved config and exit.
    #[arg(long)]
    pub dump_config: bool,
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(required = true)]
    pub metrics: Vec<PathBuf>,
    #[arg(long, default_value_t = report::DEFAULT_WINDOW)]
    pub window: usize,
    #[arg(long, default_value = "rewards.svg")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub run_a: PathBuf,
    pub run_b: PathBuf,
    #[arg(long, default_value_t = report::DEFAULT_WINDOW)]
    pub window: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r_max: f64,
    #[arg(long)]
    pub horizon: usize,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub n_actions: usize,
    /// Samples `NT` for the shot total; defaults to the trajectory bound's.
    #[arg(long)]
    pub samples: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FisherArgs {
    pub checkpoint: PathBuf,
    /// Environment; read from the run manifest beside the checkpoint if omitted.
    #[arg(long)]
    pub env: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub weights_only: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HoeffdingArgs {
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

pub fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Run(a) => cmd_run(a),
        Command::Plot(a) => {
            let csv = report::plot(&a.metrics, a.window, &a.out)?;
            println!("wrote {} and {}", a.out.display(), csv.display());
            Ok(0)
        }
        Command::Compare(a) => {
            let cmp = report::compare(&a.run_a, &a.run_b, a.window, a.threshold)?;
            let text = serde_json::to_string_pretty(&cmp)?;
            match a.out {
                Some(path) => std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?,
                None => println!("{text}"),
            }
            Ok(0)
        }
        Command::Bounds(a) => {
            let b = BoundInputs {
                beta: a.beta,
                r_max: a.r_max,
                horizon: a.horizon,
                gamma: a.gamma,
                epsilon: a.epsilon,
                delta: a.delta,
                k: a.k,
                n_actions: a.n_actions,
            };
            let l1 = lemma1_samples(&b)?;
            let l2 = lemma2_shots(&b, a.samples.unwrap_or(l1.samples))?;
            print_json(&json!({ "inputs": b, "trajectory_bound": l1, "shot_bound": l2 }))?;
            Ok(0)
        }
        Command::Fisher(a) => cmd_fisher(a),
        Command::ValidateHoeffding(a) => {
            let b = BoundInputs {
                beta: 1.0,
                r_max: 1.0,
                horizon: 10,
                gamma: 0.99,
                epsilon: a.epsilon,
                delta: a.delta,
                k: 4,
                n_actions: 2,
            };
            let coin = bernoulli_self_test(0.1, 0.05, 2000, a.seed)?;
            let shots = hoeffding_validate(&b, a.trials, a.seed)?;
            let pass = coin.pass && shots.pass;
            print_json(&json!({ "bernoulli_self_test": coin, "shot_check": shots, "pass": pass }))?;
            Ok(if pass { 0 } else { 1 })
        }
    }
}

fn cmd_run(a: RunArgs) -> Result<i32> {
    let preset = a.preset.as_deref().map(str::parse::<Preset>).transpose()?;
    let flags = PartialConfig {
        seed: a.seed,
        episodes: a.episodes,
        output_dir: a.out,
        shots: a.shots,
        parallel_rollouts: a.parallel_rollouts,
        fisher_checkpoints: a.fisher.then_some(true),
        ..Default::default()
    };
    if preset.is_none() && a.config.is_none() {
        return Err(Error::config("run needs --preset and/or --config"));
    }
    let config = ExperimentConfig::load(preset, a.config.as_deref(), flags)?;
    if a.dump_config {
        println!("{}", config.to_json());
        return Ok(0);
    }
    let dir = config.resolve_output_dir()?;
    let quiet = a.quiet;
    let every = (config.episodes / 20).max(1);
    let outcome = run::run_experiment(&config, &dir, |m| {
        if !quiet && (m.episode % every == 0 || m.episode == 1) {
            println!(
                "episode {:>5}  reward {:>9.3}  grad_norm {:.4}{}",
                m.episode,
                m.total_reward,
                m.grad_norm,
                m.beta.map(|b| format!("  beta {b:.3}")).unwrap_or_default()
            );
            run::flush_stdout();
        }
    })?;
    println!("run complete: {} episodes in {}", outcome.metrics.len(), outcome.dir.display());
    Ok(0)
}

fn env_for_checkpoint(path: &Path, env: Option<&str>) -> Result<EnvKind> {
    if let Some(name) = env {
        return name.parse();
    }
    let dir = path.parent().unwrap_or(Path::new("."));
    run::RunManifest::read(dir)
        .map(|m| m.config.environment)
        .map_err(|_| Error::config("pass --env: no run manifest next to the checkpoint"))
}

fn cmd_fisher(a: FisherArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&a.checkpoint).map_err(|e| Error::io(&a.checkpoint, e))?;
    let (mut agent, params) = Agent::from_checkpoint(&serde_json::from_str(&text)?, None)?;
    let env = env_for_checkpoint(&a.checkpoint, a.env.as_deref())?;
    if a.episodes == 0 {
        return Err(Error::config("episodes must be at least 1"));
    }
    let mut scores = Vec::new();
    for i in 0..a.episodes {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        rng.set_stream(i as u64);
        let mut e = env.make();
        let t = rollout(&mut agent, &params, e.as_mut(), env.spec().gamma, &mut rng)?;
        scores.extend(step_gradients(&agent, &params, &t, &mut rng)?);
    }
    let scope = if a.weights_only { FisherScope::WeightsOnly } else { FisherScope::Full };
    let scores = crate::analysis::project_scores(&agent, scores, scope);
    let report = spectrum(&FisherMatrix::from_scores(&scores)?)?;
    let artifact = run::write_spectrum(&a.out, &report, 0)?;
    print_json(&json!({
        "k": report.eigenvalues.len(),
        "n_params": agent.n_params(),
        "samples": scores.len(),
        "trace": report.trace,
        "nonzero_fraction": report.nonzero_fraction(),
        "eigenvalues": a.out.join(artifact.eigenvalues),
        "summary": a.out.join(artifact.summary),
    }))?;
    Ok(0)
}
