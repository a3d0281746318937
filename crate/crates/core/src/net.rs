//! Self-contained ReLU multilayer-perceptron engine: forward pass, exact
//! reverse-mode differentiation, Adam, L1/L2 regularisation, and the losses
//! used by the two model stages.
//!
//! Training mutates one parameter state (single writer); fitted parameters
//! are immutable afterwards. Batch gradient accumulation parallelizes as a
//! pure reduction over fixed chunks, so results are bit-identical regardless
//! of thread scheduling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::linf;
use crate::special::{dalpha_ln_reg_gamma_upper, digamma, ln_reg_gamma_upper, log_gamma};

const GRAD_CHUNK: usize = 256;

/// One affine layer: `rows × cols` weight matrix (row-major) plus bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
}

/// The estimable parameter set: a stack of affine layers with ReLU between
/// them and a linear scalar output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
    pub input_dim: usize,
}

impl MlpParams {
    /// He-scaled random normal weights and zero biases, the standard choice
    /// for ReLU stacks. `hidden` lists the hidden-layer widths; the output
    /// layer is always scalar.
    pub fn he_init(input_dim: usize, hidden: &[usize], rng: &mut ChaCha20Rng) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut fan_in = input_dim;
        for &width in hidden.iter().chain(std::iter::once(&1usize)) {
            let scale = (2.0 / fan_in as f64).sqrt();
            let weights = (0..width * fan_in)
                .map(|_| scale * standard_normal(rng))
                .collect();
            layers.push(Layer {
                weights,
                bias: vec![0.0; width],
                rows: width,
                cols: fan_in,
            });
            fan_in = width;
        }
        MlpParams { layers, input_dim }
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.rows)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let mut fan_in = self.input_dim;
        for (j, layer) in self.layers.iter().enumerate() {
            if layer.cols != fan_in
                || layer.weights.len() != layer.rows * layer.cols
                || layer.bias.len() != layer.rows
            {
                return Err(CoreError::Dimension {
                    op: "MlpParams::validate",
                    expected: fan_in,
                    got: layer.cols,
                });
            }
            if !layer
                .weights
                .iter()
                .chain(layer.bias.iter())
                .all(|v| v.is_finite())
            {
                return Err(CoreError::invalid_data(
                    "MlpParams::validate",
                    format!("non-finite entry in layer {j}"),
                ));
            }
            fan_in = layer.rows;
        }
        if fan_in != 1 {
            return Err(CoreError::Dimension {
                op: "MlpParams::validate",
                expected: 1,
                got: fan_in,
            });
        }
        Ok(())
    }

    /// Scalar output of the network for one input vector.
    pub fn forward(&self, input: &[f64]) -> Result<f64> {
        if input.len() != self.input_dim {
            return Err(CoreError::Dimension {
                op: "MlpParams::forward",
                expected: self.input_dim,
                got: input.len(),
            });
        }
        let mut act = input.to_vec();
        let last = self.layers.len() - 1;
        for (j, layer) in self.layers.iter().enumerate() {
            let mut next = vec![0.0; layer.rows];
            for r in 0..layer.rows {
                let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                let mut z = layer.bias[r];
                for (w, a) in row.iter().zip(act.iter()) {
                    z += w * a;
                }
                next[r] = if j < last { z.max(0.0) } else { z };
            }
            act = next;
        }
        Ok(act[0])
    }
}

fn standard_normal(rng: &mut ChaCha20Rng) -> f64 {
    // Box-Muller keeps the dependency surface small and the stream portable.
    loop {
        let u1: f64 = rng.gen_range(0.0..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        if u1 > 0.0 {
            return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}

/// Versioned JSON for fitted parameters; full round-trip decimal precision.
#[derive(Serialize, Deserialize)]
struct MlpParamsFile {
    version: u32,
    input_dim: usize,
    layers: Vec<Layer>,
}

impl MlpParams {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&MlpParamsFile {
            version: 1,
            input_dim: self.input_dim,
            layers: self.layers.clone(),
        })
        .expect("MLP parameters always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MlpParamsFile =
            serde_json::from_str(text).map_err(|e| CoreError::Serialization(e.to_string()))?;
        if file.version != 1 {
            return Err(CoreError::Serialization(format!(
                "unsupported MLP parameter version {}",
                file.version
            )));
        }
        let params = MlpParams {
            layers: file.layers,
            input_dim: file.input_dim,
        };
        params.validate()?;
        Ok(params)
    }
}

/// Tilted (pinball) loss ρ_τ(r − r̂) with ρ_τ(z) = z(τ − 1{z < 0}).
pub fn tilted_loss(r: f64, r_hat: f64, tau: f64) -> f64 {
    let z = r - r_hat;
    z * (tau - if z < 0.0 { 1.0 } else { 0.0 })
}

/// Subgradient of ρ_τ; τ − 1 at the kink, which training hits on a
/// measure-zero set.
fn tilted_loss_dz(z: f64, tau: f64) -> f64 {
    if z > 0.0 {
        tau
    } else {
        tau - 1.0
    }
}

/// Negative log-likelihood of one radius under the threshold-truncated gamma
/// model with shape `alpha` and rate `g_val`; zero at or below the threshold.
///
/// The truncation normalizer is Q(α, g·r_thresh) with Q the regularized
/// upper incomplete gamma (denominator Γ(α)), the unique normalization under
/// which the density integrates to one over (r_thresh, ∞).
pub fn truncgamma_nll(r: f64, g_val: f64, alpha: f64, r_thresh: f64) -> Result<f64> {
    if !(g_val > 0.0) || !(alpha > 0.0) {
        return Err(CoreError::domain(
            "truncgamma_nll",
            format!("rate and shape must be positive, got g={g_val}, alpha={alpha}"),
        ));
    }
    if !(r_thresh >= 0.0) {
        return Err(CoreError::domain(
            "truncgamma_nll",
            format!("threshold must be non-negative, got {r_thresh}"),
        ));
    }
    if r <= r_thresh {
        return Ok(0.0);
    }
    Ok(
        -(alpha * g_val.ln() + (alpha - 1.0) * r.ln()
            - r * g_val
            - log_gamma(alpha)?
            - ln_reg_gamma_upper(alpha, g_val * r_thresh)?),
    )
}

/// One training observation. `aux` carries per-sample constants some losses
/// need (the gauge loss stores the boundary normalizer and the frozen
/// threshold there).
#[derive(Debug, Clone)]
pub struct TrainSample {
    pub input: Vec<f64>,
    pub response: f64,
    pub aux: [f64; 2],
}

impl TrainSample {
    pub fn new(input: Vec<f64>, response: f64) -> Self {
        TrainSample {
            input,
            response,
            aux: [0.0; 2],
        }
    }
}

pub struct LossEval {
    pub loss: f64,
    pub d_raw: f64,
    pub d_log_alpha: f64,
}

/// Maps the raw scalar network output to a per-sample loss and its
/// derivatives. Implementations own the output map (exp, ReLU-plus-floor),
/// so the engine differentiates loss ∘ output ∘ network exactly.
pub trait TrainLoss: Sync {
    fn eval(&self, raw: f64, sample: &TrainSample, log_alpha: f64) -> LossEval;

    fn uses_alpha(&self) -> bool {
        false
    }
}

/// Quantile-regression stage: prediction r̂ = exp(raw), tilted loss at τ.
pub struct QuantileLoss {
    pub tau: f64,
}

impl TrainLoss for QuantileLoss {
    fn eval(&self, raw: f64, sample: &TrainSample, _log_alpha: f64) -> LossEval {
        let r_hat = raw.exp();
        let z = sample.response - r_hat;
        LossEval {
            loss: tilted_loss(sample.response, r_hat, self.tau),
            d_raw: tilted_loss_dz(z, self.tau) * (-r_hat),
            d_log_alpha: 0.0,
        }
    }
}

/// Pre-training stage: prediction g = ReLU(raw) + ‖w‖∞, squared error
/// against the target stored in `response`.
pub struct SquaredGaugeLoss;

impl TrainLoss for SquaredGaugeLoss {
    fn eval(&self, raw: f64, sample: &TrainSample, _log_alpha: f64) -> LossEval {
        let g = raw.max(0.0) + linf(&sample.input);
        let resid = g - sample.response;
        LossEval {
            loss: resid * resid,
            d_raw: if raw > 0.0 { 2.0 * resid } else { 0.0 },
            d_log_alpha: 0.0,
        }
    }
}

/// Gauge stage: the rescaled gauge at the sample's data angle is g̃ = K·h,
/// where h = ReLU(raw) + ‖v‖∞ is the raw gauge at v = κ⁻¹(angle) and K the
/// boundary normalizer 1/‖(vᵢ/b(vᵢ))ᵢ‖; the loss is the truncated-gamma NLL
/// at the frozen threshold. `aux = [K, r̂_τ]`. The scaling factors behind K
/// and v are held fixed within an epoch, so gradients flow only through h.
pub struct TruncGammaLoss;

impl TrainLoss for TruncGammaLoss {
    fn eval(&self, raw: f64, sample: &TrainSample, log_alpha: f64) -> LossEval {
        let k = sample.aux[0];
        let thresh = sample.aux[1];
        let r = sample.response;
        let alpha = log_alpha.exp();
        let h = raw.max(0.0) + linf(&sample.input);
        let g = k * h;
        let z = g * thresh;

        let ln_gamma_a = log_gamma(alpha).unwrap_or(f64::NAN);
        let ln_q = ln_reg_gamma_upper(alpha, z).unwrap_or(f64::NAN);
        let loss = -(alpha * g.ln() + (alpha - 1.0) * r.ln() - r * g - ln_gamma_a - ln_q);

        // d lnQ/dz = -z^{α-1} e^{-z} / (Γ(α) Q(α,z))
        let dlnq_dz = if z > 0.0 {
            -((alpha - 1.0) * z.ln() - z - ln_gamma_a - ln_q).exp()
        } else {
            0.0
        };
        let dloss_dg = -(alpha / g - r - thresh * dlnq_dz);
        let d_raw = if raw > 0.0 { dloss_dg * k } else { 0.0 };

        let dloss_dalpha = -(g.ln() + r.ln()
            - digamma(alpha).unwrap_or(f64::NAN)
            - dalpha_ln_reg_gamma_upper(alpha, z).unwrap_or(f64::NAN));

        LossEval {
            loss,
            d_raw,
            d_log_alpha: alpha * dloss_dalpha,
        }
    }

    fn uses_alpha(&self) -> bool {
        true
    }
}

/// Gradient structure mirroring [`MlpParams`], plus the ∂/∂ log α slot.
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub layers: Vec<Layer>,
    pub d_log_alpha: f64,
}

impl MlpGrads {
    fn zeros_like(params: &MlpParams) -> Self {
        MlpGrads {
            layers: params
                .layers
                .iter()
                .map(|l| Layer {
                    weights: vec![0.0; l.weights.len()],
                    bias: vec![0.0; l.bias.len()],
                    rows: l.rows,
                    cols: l.cols,
                })
                .collect(),
            d_log_alpha: 0.0,
        }
    }

    fn add(&mut self, other: &MlpGrads) {
        for (a, b) in self.layers.iter_mut().zip(other.layers.iter()) {
            for (x, y) in a.weights.iter_mut().zip(b.weights.iter()) {
                *x += y;
            }
            for (x, y) in a.bias.iter_mut().zip(b.bias.iter()) {
                *x += y;
            }
        }
        self.d_log_alpha += other.d_log_alpha;
    }

    fn scale(&mut self, c: f64) {
        for l in self.layers.iter_mut() {
            l.weights.iter_mut().for_each(|x| *x *= c);
            l.bias.iter_mut().for_each(|x| *x *= c);
        }
        self.d_log_alpha *= c;
    }
}

/// L1/L2 shrinkage applied to the network parameters; the distribution
/// parameter α is never penalized.
#[derive(Debug, Clone, Copy)]
pub struct Penalty {
    pub l1: f64,
    pub l2: f64,
    pub include_biases: bool,
}

impl Penalty {
    pub fn none() -> Self {
        Penalty {
            l1: 0.0,
            l2: 0.0,
            include_biases: true,
        }
    }

    fn value(&self, params: &MlpParams) -> f64 {
        if self.l1 == 0.0 && self.l2 == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for l in &params.layers {
            for &w in &l.weights {
                acc += self.l1 * w.abs() + self.l2 * w * w;
            }
            if self.include_biases {
                for &b in &l.bias {
                    acc += self.l1 * b.abs() + self.l2 * b * b;
                }
            }
        }
        acc
    }

    fn add_gradient(&self, params: &MlpParams, grads: &mut MlpGrads) {
        if self.l1 == 0.0 && self.l2 == 0.0 {
            return;
        }
        let sub = |p: f64| self.l1 * p.signum() * ((p != 0.0) as u8 as f64) + 2.0 * self.l2 * p;
        for (gl, pl) in grads.layers.iter_mut().zip(params.layers.iter()) {
            for (g, &w) in gl.weights.iter_mut().zip(pl.weights.iter()) {
                *g += sub(w);
            }
            if self.include_biases {
                for (g, &b) in gl.bias.iter_mut().zip(pl.bias.iter()) {
                    *g += sub(b);
                }
            }
        }
    }
}

struct Workspace {
    pre: Vec<Vec<f64>>,
    act: Vec<Vec<f64>>,
    delta: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(params: &MlpParams) -> Self {
        Workspace {
            pre: params.layers.iter().map(|l| vec![0.0; l.rows]).collect(),
            act: params.layers.iter().map(|l| vec![0.0; l.rows]).collect(),
            delta: params.layers.iter().map(|l| vec![0.0; l.rows]).collect(),
        }
    }
}

/// Forward + backward for one sample; accumulates into `grads`.
fn backprop_sample(
    params: &MlpParams,
    sample: &TrainSample,
    loss: &dyn TrainLoss,
    log_alpha: f64,
    ws: &mut Workspace,
    grads: &mut MlpGrads,
) -> f64 {
    let depth = params.layers.len();
    for j in 0..depth {
        let layer = &params.layers[j];
        let (done, rest) = ws.act.split_at_mut(j);
        let prev_act: &[f64] = if j == 0 { &sample.input } else { &done[j - 1] };
        for r in 0..layer.rows {
            let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
            let mut z = layer.bias[r];
            for (w, a) in row.iter().zip(prev_act.iter()) {
                z += w * a;
            }
            ws.pre[j][r] = z;
            rest[0][r] = if j < depth - 1 { z.max(0.0) } else { z };
        }
    }
    let raw = ws.act[depth - 1][0];
    let eval = loss.eval(raw, sample, log_alpha);
    grads.d_log_alpha += eval.d_log_alpha;

    ws.delta[depth - 1][0] = eval.d_raw;
    for j in (0..depth).rev() {
        let layer = &params.layers[j];
        for r in 0..layer.rows {
            let dj = ws.delta[j][r];
            if dj != 0.0 {
                let grow = &mut grads.layers[j].weights[r * layer.cols..(r + 1) * layer.cols];
                if j == 0 {
                    for (g, a) in grow.iter_mut().zip(sample.input.iter()) {
                        *g += dj * a;
                    }
                } else {
                    for (g, a) in grow.iter_mut().zip(ws.act[j - 1].iter()) {
                        *g += dj * a;
                    }
                }
                grads.layers[j].bias[r] += dj;
            }
        }
        if j > 0 {
            let (head, tail) = ws.delta.split_at_mut(j);
            let prev = &mut head[j - 1];
            let cur = &tail[0];
            prev.iter_mut().for_each(|x| *x = 0.0);
            for r in 0..layer.rows {
                let dj = cur[r];
                if dj != 0.0 {
                    let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                    for (p, w) in prev.iter_mut().zip(row.iter()) {
                        *p += dj * w;
                    }
                }
            }
            // ReLU gate with the 0-subgradient convention at the kink
            for (p, &z) in prev.iter_mut().zip(ws.pre[j - 1].iter()) {
                if z <= 0.0 {
                    *p = 0.0;
                }
            }
        }
    }
    eval.loss
}

/// Mean loss plus penalty over a batch, with the exact gradient.
///
/// Deterministic parallel reduction: fixed chunks mapped independently, then
/// combined in chunk order.
pub fn batch_gradient(
    params: &MlpParams,
    samples: &[&TrainSample],
    loss: &dyn TrainLoss,
    log_alpha: f64,
    penalty: &Penalty,
) -> (f64, MlpGrads) {
    let chunks: Vec<(f64, MlpGrads)> = samples
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| {
            let mut ws = Workspace::new(params);
            let mut grads = MlpGrads::zeros_like(params);
            let mut total = 0.0;
            for sample in chunk {
                total += backprop_sample(params, sample, loss, log_alpha, &mut ws, &mut grads);
            }
            (total, grads)
        })
        .collect();

    let mut grads = MlpGrads::zeros_like(params);
    let mut total = 0.0;
    for (t, g) in &chunks {
        total += t;
        grads.add(g);
    }
    let n = samples.len().max(1) as f64;
    grads.scale(1.0 / n);
    penalty.add_gradient(params, &mut grads);
    (total / n + penalty.value(params), grads)
}

/// Mean loss over a sample set (penalty included), no gradients.
pub fn mean_loss(
    params: &MlpParams,
    samples: &[&TrainSample],
    loss: &dyn TrainLoss,
    log_alpha: f64,
    penalty: &Penalty,
) -> f64 {
    if samples.is_empty() {
        return penalty.value(params);
    }
    let partials: Vec<f64> = samples
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| {
            let mut acc = 0.0;
            for sample in chunk {
                let raw = params.forward(&sample.input).unwrap_or(f64::NAN);
                acc += loss.eval(raw, sample, log_alpha).loss;
            }
            acc
        })
        .collect();
    partials.iter().sum::<f64>() / samples.len() as f64 + penalty.value(params)
}

/// Central finite differences through the same objective as
/// [`batch_gradient`]; testing utility for gradient verification.
pub fn finite_difference_gradient(
    params: &MlpParams,
    samples: &[&TrainSample],
    loss: &dyn TrainLoss,
    log_alpha: f64,
    penalty: &Penalty,
    step: f64,
) -> MlpGrads {
    let mut grads = MlpGrads::zeros_like(params);
    let mut perturbed = params.clone();
    for j in 0..params.layers.len() {
        for idx in 0..params.layers[j].weights.len() {
            let orig = params.layers[j].weights[idx];
            perturbed.layers[j].weights[idx] = orig + step;
            let up = mean_loss(&perturbed, samples, loss, log_alpha, penalty);
            perturbed.layers[j].weights[idx] = orig - step;
            let down = mean_loss(&perturbed, samples, loss, log_alpha, penalty);
            perturbed.layers[j].weights[idx] = orig;
            grads.layers[j].weights[idx] = (up - down) / (2.0 * step);
        }
        for idx in 0..params.layers[j].bias.len() {
            let orig = params.layers[j].bias[idx];
            perturbed.layers[j].bias[idx] = orig + step;
            let up = mean_loss(&perturbed, samples, loss, log_alpha, penalty);
            perturbed.layers[j].bias[idx] = orig - step;
            let down = mean_loss(&perturbed, samples, loss, log_alpha, penalty);
            perturbed.layers[j].bias[idx] = orig;
            grads.layers[j].bias[idx] = (up - down) / (2.0 * step);
        }
    }
    if loss.uses_alpha() {
        let up = mean_loss(params, samples, loss, log_alpha + step, penalty);
        let down = mean_loss(params, samples, loss, log_alpha - step, penalty);
        grads.d_log_alpha = (up - down) / (2.0 * step);
    }
    grads
}

/// Adam with the conventional defaults (β₁ 0.9, β₂ 0.999, ε 1e-8).
pub struct AdamState {
    m: MlpGrads,
    v: MlpGrads,
    m_alpha: f64,
    v_alpha: f64,
    t: u64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

impl AdamState {
    pub fn new(params: &MlpParams) -> Self {
        AdamState {
            m: MlpGrads::zeros_like(params),
            v: MlpGrads::zeros_like(params),
            m_alpha: 0.0,
            v_alpha: 0.0,
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step(
        &mut self,
        params: &mut MlpParams,
        grads: &MlpGrads,
        lr: f64,
        update_alpha: Option<&mut f64>,
    ) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for j in 0..params.layers.len() {
            for idx in 0..params.layers[j].weights.len() {
                let g = grads.layers[j].weights[idx];
                let m = &mut self.m.layers[j].weights[idx];
                let v = &mut self.v.layers[j].weights[idx];
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                params.layers[j].weights[idx] -=
                    lr * (*m / bc1) / ((*v / bc2).sqrt() + self.epsilon);
            }
            for idx in 0..params.layers[j].bias.len() {
                let g = grads.layers[j].bias[idx];
                let m = &mut self.m.layers[j].bias[idx];
                let v = &mut self.v.layers[j].bias[idx];
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                params.layers[j].bias[idx] -= lr * (*m / bc1) / ((*v / bc2).sqrt() + self.epsilon);
            }
        }
        if let Some(alpha) = update_alpha {
            let g = grads.d_log_alpha;
            self.m_alpha = self.beta1 * self.m_alpha + (1.0 - self.beta1) * g;
            self.v_alpha = self.beta2 * self.v_alpha + (1.0 - self.beta2) * g * g;
            *alpha -= lr * (self.m_alpha / bc1) / ((self.v_alpha / bc2).sqrt() + self.epsilon);
        }
    }
}

/// Training hyper-parameters shared by both model stages.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub learning_rate: f64,
    pub l1: f64,
    pub l2: f64,
    pub penalize_biases: bool,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 500,
            batch_size: 1024,
            patience: 5,
            learning_rate: 1e-3,
            l1: 1e-4,
            l2: 1e-4,
            penalize_biases: true,
            validation_fraction: 0.2,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(CoreError::domain(
                "TrainConfig",
                "validation fraction must lie in (0, 1)",
            ));
        }
        if self.epochs == 0 || self.batch_size == 0 || self.patience == 0 {
            return Err(CoreError::domain(
                "TrainConfig",
                "epochs, batch size, and patience must all be >= 1",
            ));
        }
        if !(self.learning_rate > 0.0) {
            return Err(CoreError::domain(
                "TrainConfig",
                "learning rate must be positive",
            ));
        }
        Ok(())
    }

    pub fn penalty(&self) -> Penalty {
        Penalty {
            l1: self.l1,
            l2: self.l2,
            include_biases: self.penalize_biases,
        }
    }
}

/// Uniformly-at-random validation assignment: `true` marks validation rows.
/// Fixed by the seed so both model stages can reuse one partition.
pub fn validation_split(n: usize, fraction: f64, seed: u64) -> Result<Vec<bool>> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(CoreError::domain(
            "validation_split",
            "fraction must lie in (0, 1)",
        ));
    }
    if n < 2 {
        return Err(CoreError::invalid_data(
            "validation_split",
            "need at least 2 samples to split",
        ));
    }
    let n_val = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    let mut is_val = vec![false; n];
    for &i in idx.iter().take(n_val) {
        is_val[i] = true;
    }
    Ok(is_val)
}

/// Per-epoch record of the training trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingLog {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub params: MlpParams,
    pub log_alpha: Option<f64>,
    pub log: TrainingLog,
    pub alpha_clamped: bool,
}

/// Options beyond the shared hyper-parameters: the optional jointly-estimated
/// log α (with clamp bounds) and an epoch-start hook that may refresh the
/// samples in place (the gauge stage re-derives its per-sample constants from
/// the current network there).
#[derive(Default)]
pub struct TrainExtras<'a> {
    pub init_log_alpha: Option<f64>,
    pub log_alpha_bounds: Option<(f64, f64)>,
    pub epoch_hook: Option<&'a mut dyn FnMut(&MlpParams, &mut [TrainSample])>,
}

/// Mini-batch Adam with a caller-supplied validation assignment, per-epoch
/// validation, checkpointing, and early stopping.
///
/// Returns the checkpoint with minimum validation loss; stops early once the
/// validation loss has not improved for `patience` consecutive epochs.
pub fn train(
    samples: &mut [TrainSample],
    is_val: &[bool],
    loss: &dyn TrainLoss,
    config: &TrainConfig,
    init: MlpParams,
    mut extras: TrainExtras<'_>,
) -> Result<TrainOutcome> {
    config.validate()?;
    init.validate()?;
    if samples.len() != is_val.len() {
        return Err(CoreError::Dimension {
            op: "train",
            expected: samples.len(),
            got: is_val.len(),
        });
    }
    let train_idx: Vec<usize> = (0..samples.len()).filter(|&i| !is_val[i]).collect();
    let val_idx: Vec<usize> = (0..samples.len()).filter(|&i| is_val[i]).collect();
    if train_idx.is_empty() || val_idx.is_empty() {
        return Err(CoreError::invalid_data(
            "train",
            "both training and validation parts must be non-empty",
        ));
    }

    let penalty = config.penalty();
    let mut params = init;
    let mut log_alpha = extras.init_log_alpha.unwrap_or(0.0);
    let has_alpha = loss.uses_alpha() && extras.init_log_alpha.is_some();
    let mut adam = AdamState::new(&params);
    let mut order = train_idx;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed ^ 0x5DEECE66D);

    let mut log = TrainingLog {
        train_loss: Vec::new(),
        val_loss: Vec::new(),
        best_epoch: 0,
        stopped_early: false,
    };
    let mut best_val = f64::INFINITY;
    let mut best_params = params.clone();
    let mut best_alpha = log_alpha;
    let mut strikes = 0usize;
    let mut alpha_clamped = false;

    for epoch in 1..=config.epochs {
        if let Some(hook) = extras.epoch_hook.as_deref_mut() {
            hook(&params, samples);
        }
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        for (batch_no, batch) in order.chunks(config.batch_size).enumerate() {
            let refs: Vec<&TrainSample> = batch.iter().map(|&i| &samples[i]).collect();
            let (loss_val, grads) = batch_gradient(&params, &refs, loss, log_alpha, &penalty);
            if !loss_val.is_finite() {
                return Err(CoreError::NumericFailure {
                    epoch,
                    batch: batch_no,
                    loss: loss_val,
                });
            }
            epoch_loss += loss_val * batch.len() as f64;
            if has_alpha {
                adam.step(&mut params, &grads, config.learning_rate, Some(&mut log_alpha));
                if let Some((lo, hi)) = extras.log_alpha_bounds {
                    if log_alpha < lo || log_alpha > hi {
                        alpha_clamped = true;
                        log_alpha = log_alpha.clamp(lo, hi);
                    }
                }
            } else {
                adam.step(&mut params, &grads, config.learning_rate, None);
            }
        }
        let val_refs: Vec<&TrainSample> = val_idx.iter().map(|&i| &samples[i]).collect();
        let val_loss = mean_loss(&params, &val_refs, loss, log_alpha, &penalty);
        if !val_loss.is_finite() {
            return Err(CoreError::NumericFailure {
                epoch,
                batch: usize::MAX,
                loss: val_loss,
            });
        }
        log.train_loss.push(epoch_loss / order.len() as f64);
        log.val_loss.push(val_loss);

        if val_loss < best_val {
            best_val = val_loss;
            best_params = params.clone();
            best_alpha = log_alpha;
            log.best_epoch = epoch;
            strikes = 0;
        } else {
            strikes += 1;
            if strikes >= config.patience {
                log.stopped_early = true;
                break;
            }
        }
    }

    Ok(TrainOutcome {
        params: best_params,
        log_alpha: if has_alpha { Some(best_alpha) } else { None },
        log,
        alpha_clamped,
    })
}
