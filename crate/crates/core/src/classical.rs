//! Fully connected ReLU policies with hand-written backpropagation.
//!
//! Layers are bias-free by default so the preset sizes land exactly on the
//! reference parameter counts (4-128-2 → 768, 6-32-3 → 288, 4-16-2 → 96). The
//! output layer is linear and feeds the plain softmax, `β = 1`.
//!
//! Parameters live in one flat vector, layer by layer, each weight matrix
//! row-major with shape `(out, in)`, followed by that layer's bias when
//! biases are enabled.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::envs::EnvKind;
use crate::vqpolicy::softmax_scaled;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub layer_sizes: Vec<usize>,
    #[serde(default)]
    pub dropout_p: f64,
    #[serde(default)]
    pub use_bias: bool,
}

/// Inverted-dropout scale factors (`0` or `1/(1-p)`) for each hidden layer.
pub type DropoutMasks = Vec<Vec<f64>>;

impl MlpSpec {
    pub fn new(layer_sizes: Vec<usize>, dropout_p: f64, use_bias: bool) -> Result<Self> {
        let spec = Self { layer_sizes, dropout_p, use_bias };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(Error::config("an MLP needs at least an input and an output layer"));
        }
        if self.layer_sizes.contains(&0) {
            return Err(Error::config("layer sizes must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(Error::config(format!("dropout_p must be in [0, 1), got {}", self.dropout_p)));
        }
        Ok(())
    }

    pub fn n_inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.layer_sizes.last().expect("validated")
    }

    fn layers(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.layer_sizes.windows(2).map(|w| (w[0], w[1]))
    }

    fn layer_len(&self, n_in: usize, n_out: usize) -> usize {
        n_in * n_out + if self.use_bias { n_out } else { 0 }
    }

    pub fn n_params(&self) -> usize {
        self.layers().map(|(i, o)| self.layer_len(i, o)).sum()
    }

    /// `(n_in, n_out)` of every weight matrix, for fan-based initializers.
    pub fn fans(&self) -> Vec<(usize, usize)> {
        self.layers().collect()
    }

    /// Draws fresh dropout masks; `None` when dropout is off.
    pub fn sample_masks<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<DropoutMasks> {
        if self.dropout_p == 0.0 {
            return None;
        }
        let keep = 1.0 - self.dropout_p;
        let hidden = &self.layer_sizes[1..self.layer_sizes.len() - 1];
        Some(
            hidden
                .iter()
                .map(|&n| {
                    (0..n)
                        .map(|_| if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
                        .collect()
                })
                .collect(),
        )
    }

    fn check(&self, params: &[f64], features: &[f64], masks: Option<&DropoutMasks>) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::contract(format!(
                "MLP expects {} parameters, got {}",
                self.n_params(),
                params.len()
            )));
        }
        if features.len() != self.n_inputs() {
            return Err(Error::contract(format!(
                "MLP expects {} features, got {}",
                self.n_inputs(),
                features.len()
            )));
        }
        if let Some(masks) = masks {
            let hidden = &self.layer_sizes[1..self.layer_sizes.len() - 1];
            if masks.len() != hidden.len() || masks.iter().zip(hidden).any(|(m, &n)| m.len() != n) {
                return Err(Error::contract("dropout masks do not match the hidden layers"));
            }
        }
        Ok(())
    }
}

/// Forward pass with every layer's input kept for backpropagation.
struct Trace {
    /// `inputs[l]` is what layer `l` multiplies (post-ReLU, post-dropout).
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of the hidden layers.
    pre: Vec<Vec<f64>>,
    output: Vec<f64>,
}

fn trace(spec: &MlpSpec, params: &[f64], features: &[f64], masks: Option<&DropoutMasks>) -> Trace {
    let n_layers = spec.layer_sizes.len() - 1;
    let mut inputs = Vec::with_capacity(n_layers);
    let mut pre = Vec::with_capacity(n_layers - 1);
    let mut h = features.to_vec();
    let mut offset = 0;
    for (l, (n_in, n_out)) in spec.layers().enumerate() {
        let w = &params[offset..offset + n_in * n_out];
        let mut z: Vec<f64> = w.chunks_exact(n_in).map(|row| dot(row, &h)).collect();
        if spec.use_bias {
            let b = &params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            z.iter_mut().zip(b).for_each(|(zi, bi)| *zi += bi);
        }
        offset += spec.layer_len(n_in, n_out);
        inputs.push(std::mem::take(&mut h));
        if l + 1 == n_layers {
            return Trace { inputs, pre, output: z };
        }
        h = z.iter().map(|v| v.max(0.0)).collect();
        if let Some(masks) = masks {
            h.iter_mut().zip(&masks[l]).for_each(|(hi, m)| *hi *= m);
        }
        pre.push(z);
    }
    unreachable!("validated spec has an output layer")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Output preferences. Pass the masks from [`MlpSpec::sample_masks`] for a
/// training-mode pass, `None` for evaluation.
pub fn forward(spec: &MlpSpec, params: &[f64], features: &[f64], masks: Option<&DropoutMasks>) -> Result<Vec<f64>> {
    spec.check(params, features, masks)?;
    Ok(trace(spec, params, features, masks).output)
}

/// Softmax probabilities (`β = 1`).
pub fn probabilities(spec: &MlpSpec, params: &[f64], features: &[f64], masks: Option<&DropoutMasks>) -> Result<Vec<f64>> {
    Ok(softmax_scaled(&forward(spec, params, features, masks)?, 1.0))
}

/// `∇ log π(action | features)` with respect to every parameter, reusing the
/// dropout masks of the paired forward pass.
pub fn backward(
    spec: &MlpSpec,
    params: &[f64],
    features: &[f64],
    action: usize,
    masks: Option<&DropoutMasks>,
) -> Result<Vec<f64>> {
    spec.check(params, features, masks)?;
    if action >= spec.n_outputs() {
        return Err(Error::contract(format!("action {action} out of range")));
    }
    let t = trace(spec, params, features, masks);
    let probs = softmax_scaled(&t.output, 1.0);
    // d log softmax(z)_a / dz = e_a - π
    let mut delta: Vec<f64> = probs
        .iter()
        .enumerate()
        .map(|(b, p)| if b == action { 1.0 - p } else { -p })
        .collect();

    let fans = spec.fans();
    let mut offsets = Vec::with_capacity(fans.len());
    let mut acc = 0;
    for &(i, o) in &fans {
        offsets.push(acc);
        acc += spec.layer_len(i, o);
    }

    let mut grad = vec![0.0; params.len()];
    for l in (0..fans.len()).rev() {
        let (n_in, n_out) = fans[l];
        let off = offsets[l];
        let input = &t.inputs[l];
        for (o, d) in delta.iter().enumerate() {
            let row = &mut grad[off + o * n_in..off + (o + 1) * n_in];
            row.iter_mut().zip(input).for_each(|(g, x)| *g = d * x);
        }
        if spec.use_bias {
            grad[off + n_in * n_out..off + n_in * n_out + n_out].copy_from_slice(&delta);
        }
        if l == 0 {
            break;
        }
        let w = &params[off..off + n_in * n_out];
        let mut back = vec![0.0; n_in];
        for (o, d) in delta.iter().enumerate() {
            for (b, wi) in back.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                *b += d * wi;
            }
        }
        let z = &t.pre[l - 1];
        for (j, b) in back.iter_mut().enumerate() {
            if z[j] <= 0.0 {
                *b = 0.0;
            } else if let Some(masks) = masks {
                *b *= masks[l - 1][j];
            }
        }
        delta = back;
    }
    Ok(grad)
}

/// Reference baseline architectures.
pub fn preset(env: EnvKind) -> MlpSpec {
    let sizes = match env {
        EnvKind::CartPole => vec![4, 128, 2],
        EnvKind::Acrobot => vec![6, 32, 3],
        EnvKind::QControl => vec![4, 16, 2],
    };
    MlpSpec { layer_sizes: sizes, dropout_p: 0.0, use_bias: false }
}

/// [`preset`] by name.
pub fn preset_by_name(name: &str) -> Result<MlpSpec> {
    Ok(preset(name.parse()?))
}

/// Nested `[layer][out][in]` weights for checkpoints.
pub fn nested_weights(spec: &MlpSpec, params: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let mut offset = 0;
    spec.fans()
        .into_iter()
        .map(|(n_in, n_out)| {
            let w = &params[offset..offset + n_in * n_out];
            offset += spec.layer_len(n_in, n_out);
            w.chunks_exact(n_in).map(<[f64]>::to_vec).collect()
        })
        .collect()
}

/// JSON checkpoint of a classical policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCheckpoint {
    pub weights: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub biases: Vec<Vec<f64>>,
    pub spec: MlpSpec,
}

impl ClassicalCheckpoint {
    pub fn new(spec: &MlpSpec, params: &[f64]) -> Self {
        let mut biases = Vec::new();
        if spec.use_bias {
            let mut offset = 0;
            for (n_in, n_out) in spec.fans() {
                let start = offset + n_in * n_out;
                biases.push(params[start..start + n_out].to_vec());
                offset += spec.layer_len(n_in, n_out);
            }
        }
        Self { weights: nested_weights(spec, params), biases, spec: spec.clone() }
    }

    /// Flattens back into the optimizer layout.
    pub fn params(&self) -> Result<Vec<f64>> {
        self.spec.validate()?;
        let mut flat = Vec::with_capacity(self.spec.n_params());
        for (l, (n_in, n_out)) in self.spec.fans().into_iter().enumerate() {
            let w = self.weights.get(l).ok_or_else(|| Error::contract("missing weight matrix"))?;
            if w.len() != n_out || w.iter().any(|row| row.len() != n_in) {
                return Err(Error::contract(format!("weight matrix {l} has the wrong shape")));
            }
            w.iter().for_each(|row| flat.extend_from_slice(row));
            if self.spec.use_bias {
                let b = self.biases.get(l).filter(|b| b.len() == n_out);
                flat.extend_from_slice(b.ok_or_else(|| Error::contract("missing bias"))?);
            }
        }
        Ok(flat)
    }
}
