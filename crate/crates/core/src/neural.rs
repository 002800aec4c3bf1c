//! Minimal feedforward substrate: forward pass, exact reverse-mode gradients
//! with respect to parameters *and* inputs (the actor update needs the
//! gradient of the critic output in its action inputs), Adam, and soft
//! target updates. Hidden activations are hyperbolic tangents; the output is
//! either the identity (critic) or a tanh squashed into a configurable box
//! (actor).

use crate::error::{Error, Result};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputActivation {
    Identity,
    /// `lo + (hi - lo) * (tanh(z) + 1) / 2`, componentwise.
    TanhBox {
        lo: f64,
        hi: f64,
    },
}

/// One dense layer; `weights[row][col]` maps input `col` to output `row`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl Layer {
    pub fn output_dim(&self) -> usize {
        self.biases.len()
    }

    pub fn input_dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }
}

pub const MAX_HIDDEN_WIDTH: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
    pub output: OutputActivation,
}

impl MlpParams {
    /// Two-hidden-layer network, hidden width at most [`MAX_HIDDEN_WIDTH`].
    /// Weights and biases initialize uniformly in `+-1/sqrt(fan_in)`.
    pub fn feedforward(
        input: usize,
        hidden: usize,
        output_dim: usize,
        output: OutputActivation,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if hidden == 0 || hidden > MAX_HIDDEN_WIDTH {
            return Err(Error::InvalidParameter(format!(
                "hidden width must lie in 1..={MAX_HIDDEN_WIDTH}, got {hidden}"
            )));
        }
        Self::from_dims(&[input, hidden, hidden, output_dim], output, rng)
    }

    /// General constructor over a chain of layer dimensions.
    pub fn from_dims(dims: &[usize], output: OutputActivation, rng: &mut impl Rng) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "bad layer dimensions {dims:?}"
            )));
        }
        for &w in &dims[1..dims.len() - 1] {
            if w > MAX_HIDDEN_WIDTH {
                return Err(Error::InvalidParameter(format!(
                    "hidden width {w} exceeds {MAX_HIDDEN_WIDTH}"
                )));
            }
        }
        if let OutputActivation::TanhBox { lo, hi } = output {
            if lo >= hi || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "bad action box [{lo}, {hi}]"
                )));
            }
        }
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for k in 0..dims.len() - 1 {
            let (fan_in, fan_out) = (dims[k], dims[k + 1]);
            let scale = 1.0 / (fan_in as f64).sqrt();
            let weights = (0..fan_out)
                .map(|_| (0..fan_in).map(|_| rng.gen_range(-scale..scale)).collect())
                .collect();
            let biases = (0..fan_out).map(|_| rng.gen_range(-scale..scale)).collect();
            layers.push(Layer { weights, biases });
        }
        Ok(Self { layers, output })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().output_dim()
    }

    pub fn num_parameters(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.output_dim() * (l.input_dim() + 1))
            .sum()
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim()];
        d.extend(self.layers.iter().map(Layer::output_dim));
        d
    }
}

/// Gradients with the same shape as the parameter set.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros_like(params: &MlpParams) -> Self {
        Self {
            layers: params
                .layers
                .iter()
                .map(|l| Layer {
                    weights: vec![vec![0.0; l.input_dim()]; l.output_dim()],
                    biases: vec![0.0; l.output_dim()],
                })
                .collect(),
        }
    }

    pub fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (ra, rb) in a.weights.iter_mut().zip(&b.weights) {
                for (x, y) in ra.iter_mut().zip(rb) {
                    *x += y;
                }
            }
            for (x, y) in a.biases.iter_mut().zip(&b.biases) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            for row in &mut l.weights {
                for x in row.iter_mut() {
                    *x *= factor;
                }
            }
            for x in &mut l.biases {
                *x *= factor;
            }
        }
    }
}

fn check_input(params: &MlpParams, input: &[f64]) -> Result<()> {
    if input.len() != params.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: params.input_dim(),
            got: input.len(),
        });
    }
    Ok(())
}

/// Deterministic forward evaluation.
pub fn mlp_forward(params: &MlpParams, input: &[f64]) -> Result<Vec<f64>> {
    check_input(params, input)?;
    let (out, _) = forward_with_cache(params, input);
    Ok(out)
}

/// Activations per layer (the input at index 0). Activation derivatives are
/// recovered from the stored values: tanh' = 1 - tanh^2.
struct ForwardCache {
    activations: Vec<Vec<f64>>,
}

fn forward_with_cache(params: &MlpParams, input: &[f64]) -> (Vec<f64>, ForwardCache) {
    let n_layers = params.layers.len();
    let mut activations = Vec::with_capacity(n_layers + 1);
    activations.push(input.to_vec());
    for (k, layer) in params.layers.iter().enumerate() {
        let mut z = layer.biases.clone();
        {
            let current = &activations[k];
            for (row, zr) in layer.weights.iter().zip(z.iter_mut()) {
                let mut acc = 0.0;
                for (w, x) in row.iter().zip(current) {
                    acc += w * x;
                }
                *zr += acc;
            }
        }
        if k + 1 < n_layers {
            for v in &mut z {
                *v = v.tanh();
            }
        } else if let OutputActivation::TanhBox { lo, hi } = params.output {
            for v in &mut z {
                *v = lo + (hi - lo) * (v.tanh() + 1.0) / 2.0;
            }
        }
        activations.push(z);
    }
    (
        activations.last().unwrap().clone(),
        ForwardCache { activations },
    )
}

/// Exact reverse-mode gradients of `<upstream, output>` with respect to all
/// parameters and the input vector.
pub fn mlp_backward(
    params: &MlpParams,
    input: &[f64],
    upstream: &[f64],
) -> Result<(Gradients, Vec<f64>)> {
    let mut grads = Gradients::zeros_like(params);
    let (_, input_grad) = mlp_backward_into(params, input, upstream, &mut grads)?;
    Ok((grads, input_grad))
}

/// Like [`mlp_backward`], but *adds* the parameter gradients into `grads`
/// (minibatch accumulation without per-sample allocation). Returns the
/// forward output and the input gradient.
pub fn mlp_backward_into(
    params: &MlpParams,
    input: &[f64],
    upstream: &[f64],
    grads: &mut Gradients,
) -> Result<(Vec<f64>, Vec<f64>)> {
    backward_impl(params, input, upstream, Some(grads))
}

/// Forward output plus the gradient of `<upstream, output>` with respect to
/// the input only; skips parameter-gradient assembly.
pub fn mlp_output_and_input_gradient(
    params: &MlpParams,
    input: &[f64],
    upstream: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    backward_impl(params, input, upstream, None)
}

fn backward_impl(
    params: &MlpParams,
    input: &[f64],
    upstream: &[f64],
    mut grads: Option<&mut Gradients>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_input(params, input)?;
    if upstream.len() != params.output_dim() {
        return Err(Error::DimensionMismatch {
            expected: params.output_dim(),
            got: upstream.len(),
        });
    }
    let (output, cache) = forward_with_cache(params, input);
    let n_layers = params.layers.len();
    let mut delta = upstream.to_vec();
    for k in (0..n_layers).rev() {
        // activation derivative from the stored activation value
        if k + 1 < n_layers {
            for (d, a) in delta.iter_mut().zip(&cache.activations[k + 1]) {
                *d *= 1.0 - a * a;
            }
        } else if let OutputActivation::TanhBox { lo, hi } = params.output {
            let half_span = (hi - lo) / 2.0;
            for (d, a) in delta.iter_mut().zip(&cache.activations[k + 1]) {
                let t = (a - lo) / half_span - 1.0;
                *d *= half_span * (1.0 - t * t);
            }
        }
        if let Some(g) = grads.as_mut() {
            let inputs_k = &cache.activations[k];
            let gl = &mut g.layers[k];
            for ((dr, gb), grow) in delta.iter().zip(&mut gl.biases).zip(&mut gl.weights) {
                *gb += dr;
                for (gw, x) in grow.iter_mut().zip(inputs_k) {
                    *gw += dr * x;
                }
            }
        }
        // propagate to the layer input
        let layer = &params.layers[k];
        let mut prev = vec![0.0; layer.input_dim()];
        for (dr, row) in delta.iter().zip(&layer.weights) {
            for (p, w) in prev.iter_mut().zip(row) {
                *p += w * dr;
            }
        }
        delta = prev;
    }
    Ok((output, delta))
}

/// Adam state: first/second moments per parameter plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    m: Gradients,
    v: Gradients,
}

impl AdamState {
    pub fn new(params: &MlpParams, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: Gradients::zeros_like(params),
            v: Gradients::zeros_like(params),
        }
    }
}

/// One Adam step with bias correction; errors on non-finite gradients.
pub fn adam_update(params: &mut MlpParams, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    if params.layers.len() != grads.layers.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} parameter layers vs {} gradient layers",
            params.layers.len(),
            grads.layers.len()
        )));
    }
    for (p, g) in params.layers.iter().zip(&grads.layers) {
        if p.output_dim() != g.output_dim() || p.input_dim() != g.input_dim() {
            return Err(Error::ShapeMismatch("layer shape differs".into()));
        }
        let finite = g.biases.iter().all(|x| x.is_finite())
            && g.weights
                .iter()
                .all(|row| row.iter().all(|x| x.is_finite()));
        if !finite {
            return Err(Error::NonFiniteGradient);
        }
    }
    state.step += 1;
    let c1 = 1.0 - state.beta1.powi(state.step as i32);
    let c2 = 1.0 - state.beta2.powi(state.step as i32);
    for (k, layer) in params.layers.iter_mut().enumerate() {
        let gl = &grads.layers[k];
        let ml = &mut state.m.layers[k];
        let vl = &mut state.v.layers[k];
        for r in 0..layer.output_dim() {
            for c in 0..layer.weights[r].len() {
                let g = gl.weights[r][c];
                ml.weights[r][c] = state.beta1 * ml.weights[r][c] + (1.0 - state.beta1) * g;
                vl.weights[r][c] = state.beta2 * vl.weights[r][c] + (1.0 - state.beta2) * g * g;
                let m_hat = ml.weights[r][c] / c1;
                let v_hat = vl.weights[r][c] / c2;
                layer.weights[r][c] -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
            }
            let g = gl.biases[r];
            ml.biases[r] = state.beta1 * ml.biases[r] + (1.0 - state.beta1) * g;
            vl.biases[r] = state.beta2 * vl.biases[r] + (1.0 - state.beta2) * g * g;
            let m_hat = ml.biases[r] / c1;
            let v_hat = vl.biases[r] / c2;
            layer.biases[r] -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    }
    Ok(())
}

/// `target <- tau * source + (1 - tau) * target`, elementwise.
pub fn soft_update(target: &mut MlpParams, source: &MlpParams, tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidParameter(format!(
            "tau must lie in [0, 1], got {tau}"
        )));
    }
    if target.layers.len() != source.layers.len() {
        return Err(Error::ShapeMismatch("different layer counts".into()));
    }
    for (t, s) in target.layers.iter_mut().zip(&source.layers) {
        if t.output_dim() != s.output_dim() || t.input_dim() != s.input_dim() {
            return Err(Error::ShapeMismatch("layer shape differs".into()));
        }
        for (tr, sr) in t.weights.iter_mut().zip(&s.weights) {
            for (tw, sw) in tr.iter_mut().zip(sr) {
                *tw = tau * sw + (1.0 - tau) * *tw;
            }
        }
        for (tb, sb) in t.biases.iter_mut().zip(&s.biases) {
            *tb = tau * sb + (1.0 - tau) * *tb;
        }
    }
    Ok(())
}
