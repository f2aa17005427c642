//! Offline reporting over finished runs: smoothed SVG plots and comparisons.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::{FisherSummary, RunManifest, METRICS};
use crate::envs::EnvKind;
use crate::{Error, Result};

pub const DEFAULT_WINDOW: usize = 50;

/// Columns every metrics CSV must carry.
const REQUIRED: [&str; 2] = ["episode", "total_reward"];

/// The plotted part of a metrics CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsSeries {
    pub name: String,
    pub episodes: Vec<usize>,
    pub total_reward: Vec<f64>,
}

impl MetricsSeries {
    /// Reads `path`, naming the series after the sibling manifest if any.
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .parent()
            .and_then(|d| RunManifest::read(d).ok())
            .map(|m| m.name)
            .unwrap_or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
        Self::parse(&text, name).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str, name: String) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap_or("").split(',').map(str::trim).collect();
        let mut idx = [0usize; 2];
        for (slot, col) in idx.iter_mut().zip(REQUIRED) {
            *slot = header
                .iter()
                .position(|h| *h == col)
                .ok_or_else(|| Error::config(format!("metrics CSV is missing column {col:?}")))?;
        }
        let mut series = Self { name, episodes: Vec::new(), total_reward: Vec::new() };
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cells: Vec<&str> = line.split(',').collect();
            let cell = |i: usize| {
                cells.get(i).map(|c| c.trim()).ok_or_else(|| Error::config(format!("row {} is too short", n + 2)))
            };
            let bad = |c: &str| Error::config(format!("row {}: cannot parse {c:?}", n + 2));
            let ep = cell(idx[0])?;
            let r = cell(idx[1])?;
            series.episodes.push(ep.parse().map_err(|_| bad(ep))?);
            series.total_reward.push(r.parse().map_err(|_| bad(r))?);
        }
        Ok(series)
    }
}

/// Trailing mean over the last `window` values; early points average what
/// is available.
pub fn running_mean(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for (i, v) in values.iter().enumerate() {
        sum += v;
        if i >= window {
            sum -= values[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

/// First 1-based episode whose full-window running mean reaches `threshold`.
pub fn episodes_to_threshold(values: &[f64], window: usize, threshold: f64) -> Option<usize> {
    let skip = window.max(1) - 1;
    running_mean(values, window)
        .iter()
        .skip(skip)
        .position(|m| *m >= threshold)
        .map(|i| i + skip + 1)
}

/// Reward level a run must reach to count as solved.
pub fn default_threshold(env: EnvKind) -> f64 {
    match env {
        EnvKind::CartPole => 195.0,
        EnvKind::Acrobot => -200.0,
        // 0.9 of the best fidelity sum reachable in ten pulses
        EnvKind::QControl => 0.9 * 5.5,
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Line chart of the running means, one polyline per series.
pub fn render_svg(series: &[(String, Vec<f64>)], window: usize) -> String {
    const W: f64 = 800.0;
    const H: f64 = 480.0;
    const L: f64 = 70.0;
    const R: f64 = 180.0;
    const T: f64 = 30.0;
    const B: f64 = 60.0;
    let n_max = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0).max(2);
    let all = series.iter().flat_map(|(_, v)| v.iter().copied());
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 1.0;
        hi += 1.0;
    }
    let x = |i: usize| L + (W - L - R) * i as f64 / (n_max - 1) as f64;
    let y = |v: f64| T + (H - T - B) * (hi - v) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<g stroke="black" fill="none"><line x1="{L}" y1="{}" x2="{}" y2="{}"/><line x1="{L}" y1="{T}" x2="{L}" y2="{}"/></g>"#,
        H - B,
        W - R,
        H - B,
        H - B
    );
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="11">"#);
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, L - 6.0, y(v) + 4.0, tick(v));
        let i = (n_max - 1) * k / 4;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, x(i), H - B + 16.0, i + 1);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">episode</text>"#, (L + W - R) / 2.0, H - 16.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">total reward (running mean, window {window})</text>"#,
        (T + H - B) / 2.0,
        (T + H - B) / 2.0
    );
    let _ = writeln!(s, "</g>");
    for (k, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = values.iter().enumerate().map(|(i, v)| format!("{:.2},{:.2}", x(i), y(*v))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, points.join(" "));
        let ly = T + 10.0 + 18.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<g class="legend"><line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text></g>"#,
            W - R + 12.0,
            W - R + 32.0,
            W - R + 38.0,
            ly + 4.0,
            xml_escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Writes `svg_path` and the smoothed series as CSV next to it.
pub fn plot(inputs: &[PathBuf], window: usize, svg_path: &Path) -> Result<PathBuf> {
    if inputs.is_empty() {
        return Err(Error::config("plot needs at least one metrics CSV"));
    }
    if window == 0 {
        return Err(Error::config("window must be at least 1"));
    }
    let series = inputs.iter().map(|p| MetricsSeries::read(p)).collect::<Result<Vec<_>>>()?;
    let smoothed: Vec<(String, Vec<f64>)> =
        series.iter().map(|s| (s.name.clone(), running_mean(&s.total_reward, window))).collect();
    if let Some(parent) = svg_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(svg_path, render_svg(&smoothed, window)).map_err(|e| Error::io(svg_path, e))?;

    let csv_path = svg_path.with_extension("csv");
    let mut csv = String::from("episode");
    for (name, _) in &smoothed {
        csv.push(',');
        csv.push_str(&name.replace(',', "_"));
    }
    csv.push('\n');
    let rows = smoothed.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    for i in 0..rows {
        let _ = write!(csv, "{}", i + 1);
        for (_, v) in &smoothed {
            csv.push(',');
            if let Some(x) = v.get(i) {
                let _ = write!(csv, "{x}");
            }
        }
        csv.push('\n');
    }
    fs::write(&csv_path, csv).map_err(|e| Error::io(&csv_path, e))?;
    Ok(csv_path)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisherPoint {
    pub episode: usize,
    pub trace: f64,
    pub nonzero_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub dir: PathBuf,
    pub environment: EnvKind,
    pub policy: crate::agent::PolicyKind,
    pub episodes: usize,
    pub final_running_mean: Option<f64>,
    pub episodes_to_threshold: Option<usize>,
    pub parameter_count: usize,
    pub fisher: Vec<FisherPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub window: usize,
    pub threshold: f64,
    pub parameter_counts: Vec<usize>,
    pub runs: Vec<RunSummary>,
}

/// Summarizes a finished run; incomplete runs are an error.
pub fn summarize(dir: &Path, window: usize, threshold: f64) -> Result<RunSummary> {
    let manifest = RunManifest::read(dir)?;
    if !manifest.completed {
        return Err(Error::contract(format!("run in {} did not complete", dir.display())));
    }
    let series = MetricsSeries::read(&dir.join(METRICS))?;
    let smoothed = running_mean(&series.total_reward, window);
    let mut fisher = Vec::new();
    for f in &manifest.artifacts.fisher {
        let path = dir.join(&f.summary);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let s: FisherSummary = serde_json::from_str(&text)?;
        fisher.push(FisherPoint { episode: s.checkpoint_episode, trace: s.trace, nonzero_fraction: s.nonzero_fraction });
    }
    Ok(RunSummary {
        name: manifest.name,
        dir: dir.to_path_buf(),
        environment: manifest.config.environment,
        policy: manifest.config.policy,
        episodes: series.total_reward.len(),
        final_running_mean: smoothed.last().copied(),
        episodes_to_threshold: episodes_to_threshold(&series.total_reward, window, threshold),
        parameter_count: manifest.n_params,
        fisher,
    })
}

/// Side-by-side summary of two runs. The threshold defaults to the first
/// run's environment target.
pub fn compare(a: &Path, b: &Path, window: usize, threshold: Option<f64>) -> Result<Comparison> {
    let env = RunManifest::read(a)?.config.environment;
    let threshold = threshold.unwrap_or_else(|| default_threshold(env));
    let runs = vec![summarize(a, window, threshold)?, summarize(b, window, threshold)?];
    Ok(Comparison { window, threshold, parameter_counts: runs.iter().map(|r| r.parameter_count).collect(), runs })
}
