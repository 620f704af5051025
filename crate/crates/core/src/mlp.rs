//! Feed-forward binary classifier trained with Adam on binary cross-entropy.
//!
//! Hidden units use `tanh`, the output unit is logistic. Inputs are
//! standardized with statistics from the training rows, and training stops
//! early once the loss on a held-out validation slice stops improving.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::StreamRng;
use crate::error::{Error, Result};

/// Logits are limited to this magnitude so probabilities stay inside (0, 1).
const MAX_LOGIT: f64 = 30.0;

/// Row-major matrix of feature rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Matrix> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch(format!(
                "{} values for a {rows} x {cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Matrix> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn select(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub l2_penalty: f64,
    pub seed: u64,
    pub hidden: Vec<usize>,
    /// Fraction of the training rows held out for early stopping; 0 disables it.
    pub validation_fraction: f64,
    pub patience: usize,
    /// Optimizer steps taken before early stopping may trigger. The best
    /// validation epoch is still restored.
    pub warmup_steps: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            batch_size: 64,
            learning_rate: 1e-3,
            l2_penalty: 1e-4,
            seed: 0,
            hidden: vec![64, 64],
            validation_fraction: 0.2,
            patience: 20,
            warmup_steps: 1000,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.epochs == 0 {
            problems.push("epochs must be at least 1".to_string());
        }
        if self.batch_size == 0 {
            problems.push("batch_size must be at least 1".to_string());
        }
        if !(self.learning_rate > 0.0) {
            problems.push("learning_rate must be positive".to_string());
        }
        if !(self.l2_penalty >= 0.0) {
            problems.push("l2_penalty must be nonnegative".to_string());
        }
        if self.hidden.iter().any(|&w| w == 0) {
            problems.push("hidden layer widths must be positive".to_string());
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            problems.push("validation_fraction must lie in [0, 1)".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

/// Per-epoch record of a training run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean mini-batch objective (cross-entropy plus penalty) per epoch.
    pub train_loss: Vec<f64>,
    /// Validation cross-entropy per epoch; empty without a validation split.
    pub validation_loss: Vec<f64>,
    /// Epoch (0-based) whose weights were kept.
    pub best_epoch: usize,
}

/// Trained network. All parameters live in one flat vector; layer `l` stores
/// its `in x out` weight block row-major followed by its `out` biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpClassifier {
    widths: Vec<usize>,
    params: Vec<f64>,
    input_mean: Vec<f64>,
    input_scale: Vec<f64>,
    #[serde(default)]
    history: TrainHistory,
}

/// Gradient with the same flat layout as the parameters.
#[derive(Clone, Debug)]
pub struct Gradient(pub Vec<f64>);

fn layer_offsets(widths: &[usize]) -> Vec<(usize, usize)> {
    // (weight offset, bias offset) per layer
    let mut offsets = Vec::with_capacity(widths.len() - 1);
    let mut at = 0;
    for w in widths.windows(2) {
        let bias = at + w[0] * w[1];
        offsets.push((at, bias));
        at = bias + w[1];
    }
    offsets
}

fn param_count(widths: &[usize]) -> usize {
    widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `-[y ln s(z) + (1 - y) ln(1 - s(z))]` evaluated without overflow.
fn cross_entropy(z: f64, label: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p() - label * z
}

/// `tanh` through one `exp`; absolute error stays near machine epsilon.
#[inline]
fn fast_tanh(x: f64) -> f64 {
    if x.abs() > 19.0 {
        return x.signum();
    }
    let e = (2.0 * x).exp();
    (e - 1.0) / (e + 1.0)
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (u, v) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += u[k] * v[k];
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// Activation buffers reused across mini-batches.
struct Workspace {
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(widths: &[usize], batch: usize) -> Workspace {
        Workspace {
            acts: widths.iter().map(|&w| vec![0.0; w * batch]).collect(),
            deltas: widths.iter().map(|&w| vec![0.0; w * batch]).collect(),
        }
    }
}

impl MlpClassifier {
    /// Network with every weight and bias zero and identity standardization.
    pub fn zeros(widths: &[usize]) -> Result<MlpClassifier> {
        if widths.len() < 2 || widths.iter().any(|&w| w == 0) || *widths.last().unwrap() != 1 {
            return Err(Error::Domain(format!(
                "layer widths must be positive and end in 1, got {widths:?}"
            )));
        }
        Ok(MlpClassifier {
            widths: widths.to_vec(),
            params: vec![0.0; param_count(widths)],
            input_mean: vec![0.0; widths[0]],
            input_scale: vec![1.0; widths[0]],
            history: TrainHistory::default(),
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn random(widths: &[usize], rng: &mut StreamRng) -> Result<MlpClassifier> {
        let mut model = MlpClassifier::zeros(widths)?;
        for (l, (w_off, _)) in layer_offsets(widths).into_iter().enumerate() {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in &mut model.params[w_off..w_off + fan_in * fan_out] {
                *p = rng.random_range(-limit..limit);
            }
        }
        Ok(model)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn history(&self) -> &TrainHistory {
        &self.history
    }

    /// Weight block of layer `l`, row-major `in x out`.
    pub fn weights(&self, l: usize) -> &[f64] {
        let (w, b) = layer_offsets(&self.widths)[l];
        &self.params[w..b]
    }

    pub fn bias(&self, l: usize) -> &[f64] {
        let (_, b) = layer_offsets(&self.widths)[l];
        &self.params[b..b + self.widths[l + 1]]
    }

    fn standardize_into(&self, row: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = (row[j] - self.input_mean[j]) / self.input_scale[j];
        }
    }

    /// Forward pass over `rows` rows already standardized in `ws.acts[0]`.
    /// Leaves logits in the last activation buffer.
    fn forward(&self, ws: &mut Workspace, rows: usize) {
        let layers = self.widths.len() - 1;
        for (l, (w_off, b_off)) in layer_offsets(&self.widths).into_iter().enumerate() {
            let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
            let weights = &self.params[w_off..b_off];
            let bias = &self.params[b_off..b_off + fan_out];
            let (before, after) = ws.acts.split_at_mut(l + 1);
            let input = &before[l];
            let output = &mut after[0];
            for r in 0..rows {
                let out_row = &mut output[r * fan_out..(r + 1) * fan_out];
                out_row.copy_from_slice(bias);
                let in_row = &input[r * fan_in..(r + 1) * fan_in];
                for (i, &a) in in_row.iter().enumerate() {
                    if a != 0.0 {
                        axpy(a, &weights[i * fan_out..(i + 1) * fan_out], out_row);
                    }
                }
                if l + 1 < layers {
                    for v in out_row.iter_mut() {
                        *v = fast_tanh(*v);
                    }
                }
            }
        }
    }

    /// Backward pass; expects `ws.deltas[last]` to hold dLoss/dlogit per row.
    /// Adds the data gradient into `grad`.
    fn backward(&self, ws: &mut Workspace, rows: usize, grad: &mut [f64]) {
        let offsets = layer_offsets(&self.widths);
        for l in (0..offsets.len()).rev() {
            let (w_off, b_off) = offsets[l];
            let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
            let (dbefore, dafter) = ws.deltas.split_at_mut(l + 1);
            let delta = &dafter[0];
            let input = &ws.acts[l];
            {
                let (gw, gb) = grad[w_off..b_off + fan_out].split_at_mut(b_off - w_off);
                for r in 0..rows {
                    let d_row = &delta[r * fan_out..(r + 1) * fan_out];
                    axpy(1.0, d_row, gb);
                    let in_row = &input[r * fan_in..(r + 1) * fan_in];
                    for (i, &a) in in_row.iter().enumerate() {
                        if a != 0.0 {
                            axpy(a, d_row, &mut gw[i * fan_out..(i + 1) * fan_out]);
                        }
                    }
                }
            }
            if l > 0 {
                let weights = &self.params[w_off..b_off];
                let prev = &mut dbefore[l];
                for r in 0..rows {
                    let d_row = &delta[r * fan_out..(r + 1) * fan_out];
                    for i in 0..fan_in {
                        let a = input[r * fan_in + i];
                        prev[r * fan_in + i] =
                            dot(&weights[i * fan_out..(i + 1) * fan_out], d_row) * (1.0 - a * a);
                    }
                }
            }
        }
    }

    fn l2_term(&self, l2: f64) -> f64 {
        if l2 == 0.0 {
            return 0.0;
        }
        let sq: f64 = layer_offsets(&self.widths)
            .iter()
            .map(|&(w, b)| self.params[w..b].iter().map(|p| p * p).sum::<f64>())
            .sum();
        0.5 * l2 * sq
    }

    fn add_l2_gradient(&self, l2: f64, grad: &mut [f64]) {
        if l2 == 0.0 {
            return;
        }
        for (w, b) in layer_offsets(&self.widths) {
            for (g, p) in grad[w..b].iter_mut().zip(&self.params[w..b]) {
                *g += l2 * p;
            }
        }
    }

    /// Mean cross-entropy plus `l2/2 * |W|^2` over the given rows, and its
    /// exact gradient with respect to every parameter.
    pub fn loss_and_gradient(
        &self,
        features: &Matrix,
        labels: &[f64],
        l2: f64,
    ) -> Result<(f64, Gradient)> {
        self.check_dim(features)?;
        if labels.len() != features.rows() {
            return Err(Error::LengthMismatch(format!(
                "{} labels for {} rows",
                labels.len(),
                features.rows()
            )));
        }
        let rows = features.rows();
        let mut ws = Workspace::new(&self.widths, rows.max(1));
        for r in 0..rows {
            let d = self.input_dim();
            self.standardize_into(features.row(r), &mut ws.acts[0][r * d..(r + 1) * d]);
        }
        let mut grad = vec![0.0; self.params.len()];
        let loss = self.batch_step(&mut ws, rows, labels, &mut grad);
        self.add_l2_gradient(l2, &mut grad);
        Ok((loss + self.l2_term(l2), Gradient(grad)))
    }

    /// Forward and backward over a prepared batch; returns mean cross-entropy.
    fn batch_step(&self, ws: &mut Workspace, rows: usize, labels: &[f64], grad: &mut [f64]) -> f64 {
        self.forward(ws, rows);
        let last = self.widths.len() - 1;
        let mut loss = 0.0;
        let inv = 1.0 / rows as f64;
        for r in 0..rows {
            let z = ws.acts[last][r];
            loss += cross_entropy(z, labels[r]);
            ws.deltas[last][r] = (sigmoid(z) - labels[r]) * inv;
        }
        self.backward(ws, rows, grad);
        loss * inv
    }

    fn check_dim(&self, features: &Matrix) -> Result<()> {
        if features.cols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: features.cols(),
            });
        }
        Ok(())
    }

    /// Raw output logits, one per row.
    pub fn logits(&self, features: &Matrix) -> Result<Vec<f64>> {
        self.check_dim(features)?;
        const CHUNK: usize = 256;
        let d = self.input_dim();
        let mut out = Vec::with_capacity(features.rows());
        let mut ws = Workspace::new(&self.widths, CHUNK);
        let last = self.widths.len() - 1;
        for start in (0..features.rows()).step_by(CHUNK) {
            let rows = CHUNK.min(features.rows() - start);
            for r in 0..rows {
                self.standardize_into(features.row(start + r), &mut ws.acts[0][r * d..(r + 1) * d]);
            }
            self.forward(&mut ws, rows);
            out.extend_from_slice(&ws.acts[last][..rows]);
        }
        Ok(out)
    }

    /// Probability of the positive class for every row, strictly inside (0, 1).
    pub fn predict_proba(&self, features: &Matrix) -> Result<Vec<f64>> {
        Ok(self
            .logits(features)?
            .into_iter()
            .map(|z| sigmoid(z.clamp(-MAX_LOGIT, MAX_LOGIT)))
            .collect())
    }

    fn mean_cross_entropy(&self, features: &Matrix, labels: &[f64]) -> Result<f64> {
        let logits = self.logits(features)?;
        Ok(logits
            .iter()
            .zip(labels)
            .map(|(&z, &y)| cross_entropy(z, y))
            .sum::<f64>()
            / labels.len() as f64)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("classifier serializes")
    }

    pub fn from_json(text: &str) -> Result<MlpClassifier> {
        serde_json::from_str(text).map_err(|e| Error::Domain(format!("bad classifier dump: {e}")))
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize, lr: f64) -> Adam {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        let step = self.lr * c2.sqrt() / c1;
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * g;
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * g * g;
            params[i] -= step * self.m[i] / (self.v[i].sqrt() + Self::EPS * c2.sqrt());
        }
    }
}

/// Trains a classifier separating `positive` rows (label 1) from `negative`
/// rows (label 0).
pub fn train(positive: &Matrix, negative: &Matrix, cfg: &TrainConfig) -> Result<MlpClassifier> {
    cfg.validate()?;
    if positive.rows() == 0 || negative.rows() == 0 {
        return Err(Error::TooFewSamples {
            needed: 1,
            got: positive.rows().min(negative.rows()),
        });
    }
    if positive.cols() != negative.cols() {
        return Err(Error::DimensionMismatch {
            expected: positive.cols(),
            got: negative.cols(),
        });
    }
    let d = positive.cols();
    let mut rng = StreamRng::new(cfg.seed, 0);

    // pooled rows: positives first, then negatives
    let n_pos = positive.rows();
    let n_all = n_pos + negative.rows();
    let mut pooled = Vec::with_capacity(n_all * d);
    pooled.extend_from_slice(positive.data());
    pooled.extend_from_slice(negative.data());
    let pooled = Matrix::new(n_all, d, pooled)?;
    let labels: Vec<f64> = (0..n_all).map(|i| if i < n_pos { 1.0 } else { 0.0 }).collect();

    // stratified validation slice
    let mut fit_rows = Vec::with_capacity(n_all);
    let mut val_rows = Vec::new();
    for (lo, hi) in [(0, n_pos), (n_pos, n_all)] {
        let mut class: Vec<usize> = (lo..hi).collect();
        class.shuffle(&mut rng);
        let n_val = ((hi - lo) as f64 * cfg.validation_fraction).floor() as usize;
        let n_val = n_val.min(hi - lo - 1);
        val_rows.extend_from_slice(&class[..n_val]);
        fit_rows.extend_from_slice(&class[n_val..]);
    }

    let mut widths = Vec::with_capacity(cfg.hidden.len() + 2);
    widths.push(d);
    widths.extend_from_slice(&cfg.hidden);
    widths.push(1);
    let mut model = MlpClassifier::random(&widths, &mut rng)?;

    let training_rows = pooled.select(&fit_rows);
    for j in 0..d {
        let col = (0..training_rows.rows()).map(|r| training_rows.row(r)[j]);
        let count = training_rows.rows() as f64;
        let mean = col.clone().sum::<f64>() / count;
        let var = col.map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
        model.input_mean[j] = mean;
        model.input_scale[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }

    let val_features = pooled.select(&val_rows);
    let val_labels: Vec<f64> = val_rows.iter().map(|&r| labels[r]).collect();

    let batch = cfg.batch_size.min(fit_rows.len());
    let mut ws = Workspace::new(&widths, batch);
    let mut grad = vec![0.0; model.params.len()];
    let mut adam = Adam::new(model.params.len(), cfg.learning_rate);
    let mut batch_labels = vec![0.0; batch];
    let mut order = fit_rows.clone();

    let mut history = TrainHistory::default();
    let mut best = (f64::INFINITY, model.params.clone());
    let mut since_best = 0;
    let mut steps = 0;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let rows = chunk.len();
            for (r, &src) in chunk.iter().enumerate() {
                model.standardize_into(pooled.row(src), &mut ws.acts[0][r * d..(r + 1) * d]);
                batch_labels[r] = labels[src];
            }
            grad.iter_mut().for_each(|g| *g = 0.0);
            let loss = model.batch_step(&mut ws, rows, &batch_labels[..rows], &mut grad);
            epoch_loss += (loss + model.l2_term(cfg.l2_penalty)) * rows as f64;
            model.add_l2_gradient(cfg.l2_penalty, &mut grad);
            adam.step(&mut model.params, &grad);
            steps += 1;
        }
        history.train_loss.push(epoch_loss / order.len() as f64);

        if val_rows.is_empty() {
            history.best_epoch = epoch;
            continue;
        }
        let val_loss = model.mean_cross_entropy(&val_features, &val_labels)?;
        history.validation_loss.push(val_loss);
        if val_loss < best.0 {
            best.0 = val_loss;
            best.1.copy_from_slice(&model.params);
            history.best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience && steps >= cfg.warmup_steps {
                break;
            }
        }
    }
    if !val_rows.is_empty() {
        model.params = best.1;
    }
    model.history = history;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::StandardNormal;

    fn gaussian_rows(rng: &mut StreamRng, n: usize, d: usize, shift: f64) -> Matrix {
        let data = (0..n * d)
            .map(|_| shift + rng.sample::<f64, _>(StandardNormal))
            .collect();
        Matrix::new(n, d, data).unwrap()
    }

    fn accuracy(model: &MlpClassifier, pos: &Matrix, neg: &Matrix) -> f64 {
        let p = model.predict_proba(pos).unwrap();
        let q = model.predict_proba(neg).unwrap();
        let hits = p.iter().filter(|&&v| v > 0.5).count() + q.iter().filter(|&&v| v <= 0.5).count();
        hits as f64 / (p.len() + q.len()) as f64
    }

    fn finite_difference_check(widths: &[usize], l2: f64, seed: u64) {
        let mut rng = StreamRng::new(seed, 9);
        let mut model = MlpClassifier::random(widths, &mut rng).unwrap();
        // non-zero biases exercise every parameter
        for p in model.params_mut() {
            *p += rng.random_range(-0.3..0.3);
        }
        let rows = 7;
        let x = gaussian_rows(&mut rng, rows, widths[0], 0.0);
        let labels: Vec<f64> = (0..rows).map(|i| (i % 2) as f64).collect();
        let (_, Gradient(grad)) = model.loss_and_gradient(&x, &labels, l2).unwrap();
        let h = 1e-5;
        for i in 0..model.params().len() {
            let orig = model.params()[i];
            model.params_mut()[i] = orig + h;
            let up = model.loss_and_gradient(&x, &labels, l2).unwrap().0;
            model.params_mut()[i] = orig - h;
            let down = model.loss_and_gradient(&x, &labels, l2).unwrap().0;
            model.params_mut()[i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let denom = numeric.abs().max(grad[i].abs()).max(1e-8);
            let rel = (numeric - grad[i]).abs() / denom;
            assert!(
                rel <= 1e-4 || (numeric - grad[i]).abs() < 1e-9,
                "param {i}: analytic {} numeric {numeric}",
                grad[i]
            );
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        finite_difference_check(&[3, 5, 1], 0.0, 1);
        finite_difference_check(&[4, 8, 6, 1], 1e-2, 2);
        finite_difference_check(&[1, 1], 0.5, 3);
        finite_difference_check(&[9, 2, 8, 3, 1], 1e-4, 4);
    }

    #[test]
    fn zero_network_predicts_half() {
        let model = MlpClassifier::zeros(&[3, 4, 1]).unwrap();
        let x = Matrix::new(2, 3, vec![1.0, -2.0, 3.0, 100.0, 0.0, -7.0]).unwrap();
        assert_eq!(model.predict_proba(&x).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn identical_rows_identical_outputs() {
        let mut rng = StreamRng::new(5, 0);
        let model = MlpClassifier::random(&[2, 8, 8, 1], &mut rng).unwrap();
        let x = Matrix::from_rows(&[[0.3, -1.2], [0.3, -1.2], [0.3, -1.2]]).unwrap();
        let p = model.predict_proba(&x).unwrap();
        assert!(p.iter().all(|&v| v == p[0] && v > 0.0 && v < 1.0));
    }

    #[test]
    fn separable_classes() {
        let mut rng = StreamRng::new(21, 0);
        let make = |rng: &mut StreamRng, n: usize, lo: f64, hi: f64| {
            Matrix::new(n, 1, (0..n).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
        };
        let neg = make(&mut rng, 300, -3.0, 0.0);
        let pos = make(&mut rng, 300, 1.0, 4.0);
        let model = train(&pos, &neg, &TrainConfig::default().with_seed(3)).unwrap();
        let (test_neg, test_pos) = (make(&mut rng, 500, -3.0, 0.0), make(&mut rng, 500, 1.0, 4.0));
        assert!(accuracy(&model, &test_pos, &test_neg) >= 0.99);
        let deep = Matrix::new(1, 1, vec![3.5]).unwrap();
        assert!(model.predict_proba(&deep).unwrap()[0] >= 0.99);
        let h = model.history();
        assert!(h.train_loss.last().unwrap() <= &h.train_loss[0]);
    }

    #[test]
    fn indistinguishable_classes() {
        let mut rng = StreamRng::new(8, 0);
        let pos = gaussian_rows(&mut rng, 400, 2, 0.0);
        let neg = gaussian_rows(&mut rng, 400, 2, 0.0);
        let model = train(&pos, &neg, &TrainConfig::default().with_seed(1)).unwrap();
        let acc = accuracy(
            &model,
            &gaussian_rows(&mut rng, 2000, 2, 0.0),
            &gaussian_rows(&mut rng, 2000, 2, 0.0),
        );
        assert!((acc - 0.5).abs() <= 0.05, "accuracy {acc}");
    }

    #[test]
    fn early_stopping_waits_for_warmup() {
        let mut rng = StreamRng::new(9, 0);
        let pos = gaussian_rows(&mut rng, 100, 2, 0.0);
        let neg = gaussian_rows(&mut rng, 100, 2, 0.0);
        // 160 fit rows in batches of 64: 3 steps per epoch
        let cfg = TrainConfig {
            epochs: 50,
            patience: 1,
            warmup_steps: 90,
            ..TrainConfig::default()
        };
        let model = train(&pos, &neg, &cfg).unwrap();
        assert!(model.history().train_loss.len() >= 30);
        let eager = train(&pos, &neg, &TrainConfig { warmup_steps: 0, ..cfg }).unwrap();
        assert!(eager.history().train_loss.len() < 30);
    }

    #[test]
    fn training_is_seed_deterministic() {
        let mut rng = StreamRng::new(4, 0);
        let pos = gaussian_rows(&mut rng, 100, 3, 0.5);
        let neg = gaussian_rows(&mut rng, 100, 3, 0.0);
        let cfg = TrainConfig {
            epochs: 15,
            ..TrainConfig::default()
        };
        let a = train(&pos, &neg, &cfg).unwrap();
        let b = train(&pos, &neg, &cfg).unwrap();
        assert_eq!(a.params(), b.params());
        let c = train(&pos, &neg, &cfg.with_seed(1)).unwrap();
        assert_ne!(a.params(), c.params());
    }

    #[test]
    fn rejects_bad_inputs() {
        let a = Matrix::new(3, 2, vec![0.0; 6]).unwrap();
        let b = Matrix::new(3, 1, vec![0.0; 3]).unwrap();
        let empty = Matrix::new(0, 2, vec![]).unwrap();
        let cfg = TrainConfig::default();
        assert!(matches!(train(&a, &b, &cfg), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(train(&a, &empty, &cfg), Err(Error::TooFewSamples { .. })));
        let bad = TrainConfig {
            epochs: 0,
            batch_size: 0,
            ..cfg
        };
        match train(&a, &a, &bad) {
            Err(Error::InvalidConfig(p)) => assert_eq!(p.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
        let model = MlpClassifier::zeros(&[2, 1]).unwrap();
        assert!(model.predict_proba(&b).is_err());
    }

    #[test]
    fn json_dump_round_trips() {
        let mut rng = StreamRng::new(2, 0);
        let model = MlpClassifier::random(&[3, 4, 1], &mut rng).unwrap();
        let back = MlpClassifier::from_json(&model.to_json()).unwrap();
        assert_eq!(back, model);
    }
}
