//! Fisher-information diagnostics and sample-complexity tools.

mod bounds;
mod hoeffding;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::agent::{Policy, PolicyInput};
use crate::{Error, Result};

pub use bounds::{lemma1_samples, lemma2_shots, BoundInputs, TrajectoryBound, ShotBound};
pub use hoeffding::{bernoulli_self_test, hoeffding_validate, HoeffdingReport};

/// Which coordinates of the trainable vector enter the Fisher matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FisherScope {
    /// Every trainable scalar, the inverse temperature included.
    #[default]
    Full,
    /// Circuit or network weights only.
    WeightsOnly,
}

/// Dense symmetric `k × k` matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FisherMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl FisherMatrix {
    /// `(1/T) Σ_t g_t g_tᵀ`.
    pub fn from_scores(scores: &[Vec<f64>]) -> Result<Self> {
        let first = scores.first().ok_or_else(|| Error::contract("Fisher matrix needs at least one score"))?;
        let k = first.len();
        if k == 0 || scores.iter().any(|g| g.len() != k) {
            return Err(Error::contract("score vectors must share a positive length"));
        }
        let mut entries = vec![0.0; k * k];
        for g in scores {
            for i in 0..k {
                let gi = g[i];
                if gi == 0.0 {
                    continue;
                }
                let row = &mut entries[i * k..i * k + k];
                for j in i..k {
                    row[j] += gi * g[j];
                }
            }
        }
        let t = scores.len() as f64;
        for i in 0..k {
            for j in i..k {
                let v = entries[i * k + j] / t;
                entries[i * k + j] = v;
                entries[j * k + i] = v;
            }
        }
        Ok(Self { dim: k, entries })
    }

    /// Wraps an explicit matrix, checking symmetry within 1e-10.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(Error::contract("matrix must be square and non-empty"));
        }
        let entries: Vec<f64> = rows.concat();
        for i in 0..k {
            for j in 0..i {
                if (entries[i * k + j] - entries[j * k + i]).abs() > 1e-10 {
                    return Err(Error::contract("matrix is not symmetric"));
                }
            }
        }
        Ok(Self { dim: k, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks_exact(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }
}

/// Keeps only the coordinates `scope` asks for.
pub fn project_scores<P: Policy>(policy: &P, scores: Vec<Vec<f64>>, scope: FisherScope) -> Vec<Vec<f64>> {
    if scope == FisherScope::Full {
        return scores;
    }
    let keep: Vec<bool> = policy
        .layout()
        .iter()
        .flat_map(|b| std::iter::repeat_n(!b.is_beta, b.len))
        .collect();
    scores
        .into_iter()
        .map(|g| g.into_iter().zip(&keep).filter_map(|(v, &k)| k.then_some(v)).collect())
        .collect()
}

/// Empirical Fisher matrix of `policy` over visited `(input, action)` pairs.
pub fn fisher_matrix<P: Policy>(
    policy: &P,
    params: &[f64],
    inputs: &[PolicyInput],
    actions: &[usize],
    scope: FisherScope,
    rng: &mut dyn RngCore,
) -> Result<FisherMatrix> {
    if inputs.is_empty() || inputs.len() != actions.len() {
        return Err(Error::contract("Fisher matrix needs equal-length, non-empty state and action lists"));
    }
    let scores = inputs
        .iter()
        .zip(actions)
        .map(|(s, &a)| policy.grad_log_prob(params, s, a, rng))
        .collect::<Result<Vec<_>>>()?;
    FisherMatrix::from_scores(&project_scores(policy, scores, scope))
}

/// Symmetric eigenvalues by cyclic Jacobi rotations, sorted descending.
pub fn jacobi_eigenvalues(m: &FisherMatrix) -> Result<Vec<f64>> {
    const MAX_SWEEPS: usize = 100;
    let n = m.dim;
    let mut a = m.entries.clone();
    let frob = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    // absolute 1e-10, relaxed relative to the matrix scale for large entries
    let tol = 1e-10f64.max(1e-15 * frob);
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) >= tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numerical("Jacobi iteration did not converge in 100 sweeps".into()));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

/// Log-spaced eigenvalue density. `densities[i]` is per decade, so
/// `Σ densities[i] · log10(edges[i+1] / edges[i]) + underflow = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    /// Fraction of eigenvalues below the lowest edge (numerical zeros).
    pub underflow: f64,
}

impl Histogram {
    pub const FLOOR: f64 = 1e-12;
    pub const BINS: usize = 50;

    pub fn log_spaced(values: &[f64], bins: usize) -> Result<Self> {
        if values.is_empty() || bins == 0 {
            return Err(Error::contract("histogram needs values and at least one bin"));
        }
        let lo = Self::FLOOR.log10();
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let hi = if max > Self::FLOOR { max.log10() } else { lo + 1.0 };
        let width = (hi - lo) / bins as f64;
        let bin_edges = (0..=bins).map(|i| 10f64.powf(lo + width * i as f64)).collect();
        let mut counts = vec![0usize; bins];
        let mut below = 0usize;
        for &v in values {
            if v < Self::FLOOR {
                below += 1;
            } else {
                let i = (((v.log10() - lo) / width) as usize).min(bins - 1);
                counts[i] += 1;
            }
        }
        let n = values.len() as f64;
        Ok(Self {
            bin_edges,
            densities: counts.iter().map(|&c| c as f64 / n / width).collect(),
            underflow: below as f64 / n,
        })
    }

    /// Total mass, which is 1 up to rounding.
    pub fn mass(&self) -> f64 {
        let binned: f64 = self
            .densities
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(d, e)| d * (e[1].log10() - e[0].log10()))
            .sum();
        binned + self.underflow
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub trace: f64,
    pub histogram: Histogram,
}

impl SpectrumReport {
    /// Share of eigenvalues above the histogram floor.
    pub fn nonzero_fraction(&self) -> f64 {
        1.0 - self.histogram.underflow
    }

    pub fn eigenvalues_csv(&self) -> String {
        let mut out = String::from("eigenvalue\n");
        for e in &self.eigenvalues {
            out.push_str(&format!("{e}\n"));
        }
        out
    }
}

pub fn spectrum(m: &FisherMatrix) -> Result<SpectrumReport> {
    spectrum_with_bins(m, Histogram::BINS)
}

pub fn spectrum_with_bins(m: &FisherMatrix, bins: usize) -> Result<SpectrumReport> {
    let eigenvalues = jacobi_eigenvalues(m)?;
    let histogram = Histogram::log_spaced(&eigenvalues, bins)?;
    Ok(SpectrumReport { trace: m.trace(), eigenvalues, histogram })
}
