//! The one-layer multi-modal reasoning head: per-class scores are plain
//! inner products `w_y . f` with no bias and no softmax, the rows of `W`
//! are initialized from (unit-normalized) class text features, and training
//! minimizes the batch-summed cross-entropy with analytic gradients under a
//! decoupled-weight-decay adaptive-moment optimizer and a cosine-annealed
//! learning rate.
//!
//! The loss is the plain sum over the batch (no `1/n`); batch-size scale is
//! folded into the learning rate.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::linalg::{l2_normalize, seeded_rng, split_seed, Matrix};

/// Linear classifier with one weight row per class.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearHead {
    weights: Matrix,
}

impl LinearHead {
    /// Wrap an existing `N x d` weight matrix (checkpoint loading, tests).
    pub fn from_weights(weights: Matrix) -> Self {
        LinearHead { weights }
    }

    pub fn num_classes(&self) -> usize {
        self.weights.rows()
    }

    pub fn dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    /// Per-class logits `W . f`; no softmax.
    pub fn forward(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.dim() {
            return Err(Error::DimMismatch {
                op: "forward",
                lhs: format!("head dim {}", self.dim()),
                rhs: format!("feature dim {}", f.len()),
            });
        }
        Ok((0..self.num_classes())
            .map(|n| crate::linalg::dot(self.weights.row(n), f))
            .collect())
    }
}

/// Initialize the head from an `N x d` matrix of class text features; each
/// row is scaled to unit norm. Errors on a zero-norm row.
pub fn init_from_text(text_features: &Matrix) -> Result<LinearHead> {
    let mut w = Matrix::zeros(text_features.rows(), text_features.cols());
    for r in 0..text_features.rows() {
        let row = l2_normalize(text_features.row(r))?;
        for (c, v) in row.iter().enumerate() {
            w.set(r, c, *v);
        }
    }
    Ok(LinearHead { weights: w })
}

/// Seeded random initialization (the "without initialization" ablation):
/// unit-normalized Gaussian rows.
pub fn init_random(num_classes: usize, dim: usize, seed: u64) -> LinearHead {
    let mut rng = seeded_rng(seed);
    let g = crate::linalg::gaussian_matrix(num_classes, dim, &mut rng);
    // A Gaussian row is zero with probability zero; normalize defensively
    // by falling back to a basis vector if it ever happens.
    let mut w = Matrix::zeros(num_classes, dim);
    for r in 0..num_classes {
        match l2_normalize(g.row(r)) {
            Ok(row) => {
                for (c, v) in row.iter().enumerate() {
                    w.set(r, c, *v);
                }
            }
            Err(_) => w.set(r, r % dim, 1.0),
        }
    }
    LinearHead { weights: w }
}

/// A training batch: unit-norm feature rows (image and text mixed) with
/// class labels.
#[derive(Debug, Clone)]
pub struct Batch {
    features: Matrix,
    labels: Vec<usize>,
}

impl Batch {
    pub fn new(features: Matrix, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::InvalidBatch(format!(
                "{} feature rows vs {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if features.rows() == 0 {
            return Err(Error::InvalidBatch("empty batch".into()));
        }
        for (i, &label) in labels.iter().enumerate() {
            if label >= num_classes {
                return Err(Error::InvalidBatch(format!(
                    "label {} out of range for {} classes",
                    label, num_classes
                )));
            }
            let norm = crate::linalg::l2_norm(features.row(i));
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidBatch(format!(
                    "row {} has norm {}, expected unit",
                    i, norm
                )));
            }
        }
        Ok(Batch { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

/// Optimization schedule and batch-composition settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub base_lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Image samples per step; 0 means text-only batches.
    pub images_per_batch: usize,
    /// Text samples per step, drawn without replacement from the text pool.
    pub texts_per_batch: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            base_lr: 1e-3,
            weight_decay: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            images_per_batch: 8,
            texts_per_batch: 0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::InvalidParameter("epochs must be >= 1".into()));
        }
        if self.base_lr.is_nan() || self.base_lr < 0.0 {
            return Err(Error::InvalidParameter("base_lr must be >= 0".into()));
        }
        if self.images_per_batch + self.texts_per_batch < 1 {
            return Err(Error::InvalidParameter(
                "a batch needs at least one image or text sample".into(),
            ));
        }
        Ok(())
    }
}

/// Cosine-annealed learning rate: `base * 0.5 * (1 + cos(pi * t / total))`,
/// decaying from `base` at step 0 toward 0 at the final step.
pub fn cosine_lr(base: f64, step: usize, total_steps: usize) -> f64 {
    if total_steps == 0 {
        return base;
    }
    let ratio = step as f64 / total_steps as f64;
    base * 0.5 * (1.0 + (std::f64::consts::PI * ratio).cos())
}

/// Batch-summed cross-entropy `sum_i -log softmax(W f_i)[y_i]`, computed
/// with max-subtraction.
pub fn ce_loss(head: &LinearHead, batch: &Batch) -> f64 {
    let mut total = 0.0;
    for i in 0..batch.len() {
        let logits = head
            .forward(batch.features.row(i))
            .expect("batch feature dim matches head");
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum: f64 = logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
        total += -(logits[batch.labels[i]] - max - log_sum);
    }
    total
}

/// Analytic gradient of [`ce_loss`]:
/// `dL/dW = sum_i (softmax(W f_i) - onehot(y_i)) (x) f_i`.
pub fn ce_grad(head: &LinearHead, batch: &Batch) -> Matrix {
    let n_classes = head.num_classes();
    let dim = head.dim();
    let mut grad = Matrix::zeros(n_classes, dim);
    for i in 0..batch.len() {
        let f = batch.features.row(i);
        let logits = head.forward(f).expect("batch feature dim matches head");
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
        let denom: f64 = exps.iter().sum();
        for c in 0..n_classes {
            let p = exps[c] / denom;
            let coeff = p - if c == batch.labels[i] { 1.0 } else { 0.0 };
            for (d, fv) in f.iter().enumerate() {
                let v = grad.get(c, d) + coeff * fv;
                grad.set(c, d, v);
            }
        }
    }
    grad
}

struct AdamW {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamW {
    fn new(len: usize) -> Self {
        AdamW {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64, cfg: &TrainConfig) {
        self.t += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.t as i32);
        let bc2 = 1.0 - cfg.beta2.powi(self.t as i32);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            // Decoupled weight decay: the decay term bypasses the moments.
            *p -= lr * (m_hat / (v_hat.sqrt() + cfg.eps) + cfg.weight_decay * *p);
        }
    }
}

/// Train the head on the given batches for `cfg.epochs` epochs, visiting
/// the batches in a seed-shuffled order each epoch. Returns the trained
/// head and the mean batch loss per epoch. Aborts with a diagnostic when a
/// loss turns non-finite.
pub fn train(
    head: LinearHead,
    batches: &[Batch],
    cfg: &TrainConfig,
) -> Result<(LinearHead, Vec<f64>)> {
    cfg.validate()?;
    if batches.is_empty() {
        return Err(Error::InvalidBatch("no training batches".into()));
    }
    let mut head = head;
    let mut optimizer = AdamW::new(head.weights.data().len());
    let mut order_rng = seeded_rng(split_seed(cfg.seed, 0x70_72));
    let total_steps = cfg.epochs * batches.len();
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut step = 0usize;
    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..batches.len()).collect();
        order.shuffle(&mut order_rng);
        let mut epoch_loss = 0.0;
        for &b in &order {
            let batch = &batches[b];
            let loss = ce_loss(&head, batch);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    step,
                    value: loss,
                });
            }
            epoch_loss += loss;
            let grad = ce_grad(&head, batch);
            let lr = cosine_lr(cfg.base_lr, step, total_steps);
            optimizer.step(head.weights.data_mut(), grad.data(), lr, cfg);
            step += 1;
        }
        trace.push(epoch_loss / batches.len() as f64);
    }
    Ok((head, trace))
}
