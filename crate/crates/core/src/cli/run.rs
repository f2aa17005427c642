//! Executes a configured experiment and persists its artifacts.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::agent::Policy;
use crate::analysis::{spectrum, FisherMatrix, SpectrumReport};
use crate::reinforce::{EpisodeMetrics, MetricsCsv, Trainer};
use crate::{Error, Result};

pub const MANIFEST: &str = "manifest.json";
pub const METRICS: &str = "metrics.csv";
pub const CHECKPOINT: &str = "checkpoint.json";
pub const FISHER_DIR: &str = "fisher";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    pub metrics: String,
    pub checkpoint: String,
    #[serde(default)]
    pub fisher: Vec<FisherArtifact>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisherArtifact {
    pub episode: usize,
    pub eigenvalues: String,
    pub summary: String,
}

/// Sidecar written next to each eigenvalue CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisherSummary {
    pub trace: f64,
    pub k: usize,
    pub checkpoint_episode: usize,
    pub nonzero_fraction: f64,
    pub histogram: crate::analysis::Histogram,
}

impl FisherSummary {
    pub fn new(report: &SpectrumReport, episode: usize) -> Self {
        Self {
            trace: report.trace,
            k: report.eigenvalues.len(),
            checkpoint_episode: episode,
            nonzero_fraction: report.nonzero_fraction(),
            histogram: report.histogram.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub config: ExperimentConfig,
    /// SHA-256 over `blob <len>\0<config json>`.
    pub config_hash: String,
    pub n_params: usize,
    pub started_at: String,
    pub finished_at: Option<String>,
    pub completed: bool,
    /// Paths relative to the run directory.
    pub artifacts: Artifacts,
}

impl RunManifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn write(&self, dir: &Path) -> Result<()> {
        write_file(&dir.join(MANIFEST), serde_json::to_string_pretty(self)?.as_bytes())
    }

    /// Every referenced artifact path, absolute.
    pub fn artifact_paths(&self, dir: &Path) -> Vec<PathBuf> {
        let mut out = vec![dir.join(&self.artifacts.metrics), dir.join(&self.artifacts.checkpoint)];
        for f in &self.artifacts.fisher {
            out.push(dir.join(&f.eigenvalues));
            out.push(dir.join(&f.summary));
        }
        out
    }
}

/// Git-style content hash: the blob header, then the bytes, through SHA-256.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Episodes after which a Fisher spectrum is taken: every tenth of the budget.
pub fn fisher_schedule(episodes: usize) -> Vec<usize> {
    if episodes == 0 {
        return Vec::new();
    }
    let every = (episodes / 10).max(1);
    (1..=episodes).filter(|e| e % every == 0).collect()
}

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub metrics: Vec<EpisodeMetrics>,
}

/// Trains per `config`, writing everything under `dir`. Metrics are
/// streamed to disk as they arrive; `on_episode` sees each row too.
pub fn run_experiment(
    config: &ExperimentConfig,
    dir: &Path,
    mut on_episode: impl FnMut(&EpisodeMetrics),
) -> Result<RunOutcome> {
    config.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let config_json = serde_json::to_string(config)?;
    let agent = config.agent()?;
    let mut manifest = RunManifest {
        name: config.name.clone(),
        config: config.clone(),
        config_hash: content_hash(config_json.as_bytes()),
        n_params: agent.n_params(),
        started_at: now(),
        finished_at: None,
        completed: false,
        artifacts: Artifacts { metrics: METRICS.into(), checkpoint: CHECKPOINT.into(), fisher: Vec::new() },
    };
    manifest.write(dir)?;

    let metrics_path = dir.join(METRICS);
    let file = fs::File::create(&metrics_path).map_err(|e| Error::io(&metrics_path, e))?;
    let io = |e| Error::io(&metrics_path, e);
    let mut csv = MetricsCsv::new(BufWriter::new(file)).map_err(io)?;

    let mut trainer = Trainer::new(agent, config.env_factory(), config.train_config())?;
    let schedule = if config.fisher_checkpoints { fisher_schedule(config.episodes) } else { Vec::new() };
    trainer.record_batches(!schedule.is_empty());
    if !schedule.is_empty() {
        let fisher_dir = dir.join(FISHER_DIR);
        fs::create_dir_all(&fisher_dir).map_err(|e| Error::io(&fisher_dir, e))?;
    }

    let mut metrics = Vec::with_capacity(config.episodes);
    while let Some(row) = trainer.next() {
        let row = row?;
        csv.write(&row).map_err(io)?;
        on_episode(&row);
        if schedule.binary_search(&row.episode).is_ok() {
            let record = trainer.last_batch().ok_or_else(|| Error::contract("no batch recorded"))?;
            let report = spectrum(&FisherMatrix::from_scores(&record.grads)?)?;
            manifest.artifacts.fisher.push(write_spectrum(dir, &report, row.episode)?);
        }
        metrics.push(row);
    }
    csv.into_inner().map_err(io)?;

    let ckpt = serde_json::to_string_pretty(&trainer.checkpoint()?)?;
    write_file(&dir.join(CHECKPOINT), ckpt.as_bytes())?;
    manifest.completed = true;
    manifest.finished_at = Some(now());
    manifest.write(dir)?;
    Ok(RunOutcome { dir: dir.to_path_buf(), manifest, metrics })
}

/// Writes `fisher/episode_NNNNN.{csv,json}` and returns their relative paths.
pub fn write_spectrum(dir: &Path, report: &SpectrumReport, episode: usize) -> Result<FisherArtifact> {
    let stem = format!("{FISHER_DIR}/episode_{episode:05}");
    let artifact = FisherArtifact { episode, eigenvalues: format!("{stem}.csv"), summary: format!("{stem}.json") };
    let parent = dir.join(FISHER_DIR);
    fs::create_dir_all(&parent).map_err(|e| Error::io(&parent, e))?;
    write_file(&dir.join(&artifact.eigenvalues), report.eigenvalues_csv().as_bytes())?;
    let summary = serde_json::to_string_pretty(&FisherSummary::new(report, episode))?;
    write_file(&dir.join(&artifact.summary), summary.as_bytes())?;
    Ok(artifact)
}

pub(crate) fn flush_stdout() {
    let _ = std::io::stdout().flush();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_is_every_tenth() {
        assert_eq!(fisher_schedule(100), vec![10, 20, 30, 40, 50, 60, 70, 80, 90, 100]);
        assert_eq!(fisher_schedule(5), vec![1, 2, 3, 4, 5]);
        assert!(fisher_schedule(0).is_empty());
    }

    #[test]
    fn hash_is_git_blob_style() {
        // sha256-format git object id of "hello\n"
        assert_eq!(content_hash(b"hello\n"), "2cf8d83d9ee29543b34a87727421fdecb7e3f3a183d337639025de576db9ebb4");
        assert_eq!(content_hash(b"hello\n").len(), 64);
    }
}
