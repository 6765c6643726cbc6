//! Multinomial softmax regression over standardized feature vectors.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const MODEL_MAGIC: &[u8; 4] = b"SMX1";
const STD_FLOOR: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("dimension mismatch: expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("empty training split")]
    EmptySplit,
    #[error("k = {k} out of range 1..={classes}")]
    InvalidK { k: usize, classes: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("invalid model file: {0}")]
    InvalidModel(String),
}

pub type Result<T> = std::result::Result<T, ClassifierError>;

/// Row-major feature matrix with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Examples {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
}

impl Examples {
    pub fn new(dim: usize) -> Self {
        Examples {
            dim,
            features: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn push(&mut self, x: impl IntoIterator<Item = f64>, label: usize) -> Result<()> {
        let before = self.features.len();
        self.features.extend(x);
        let found = self.features.len() - before;
        if found != self.dim {
            self.features.truncate(before);
            return Err(ClassifierError::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        self.labels.push(label);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub l2: f64,
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(ClassifierError::InvalidConfig(what.to_string()));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return bad("L2 coefficient must be non-negative");
        }
        Ok(())
    }
}

/// Gradients of the loss with respect to the weights (K x D, row-major) and
/// biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxModel {
    classes: usize,
    dim: usize,
    mean: Vec<f64>,
    std: Vec<f64>,
    /// K x D, row-major.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl SoftmaxModel {
    /// A zero model with identity standardization.
    pub fn zeros(classes: usize, dim: usize) -> Self {
        SoftmaxModel {
            classes,
            dim,
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
            weights: vec![0.0; classes * dim],
            biases: vec![0.0; classes],
        }
    }

    /// A zero model standardizing with the per-feature mean and (population)
    /// standard deviation of `data`.
    pub fn fitted_to(data: &Examples, classes: usize) -> Self {
        let mut model = SoftmaxModel::zeros(classes, data.dim());
        let n = data.len().max(1) as f64;
        for i in 0..data.len() {
            for (m, &x) in model.mean.iter_mut().zip(data.row(i)) {
                *m += x;
            }
        }
        model.mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; data.dim()];
        for i in 0..data.len() {
            for ((v, &x), &m) in var.iter_mut().zip(data.row(i)).zip(&model.mean) {
                *v += (x - m) * (x - m);
            }
        }
        model.std = var.iter().map(|v| (v / n).sqrt().max(STD_FLOOR)).collect();
        model
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    fn standardize_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            x.iter()
                .zip(&self.mean)
                .zip(&self.std)
                .map(|((&v, &m), &s)| (v - m) / s),
        );
    }

    fn logits(&self, xhat: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.dim.max(1))
            .take(self.classes)
            .zip(&self.biases)
            .map(|(row, &b)| b + row.iter().zip(xhat).map(|(w, x)| w * x).sum::<f64>())
            .collect()
    }

    /// Class probabilities for a raw (unstandardized) feature vector.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut xhat = Vec::with_capacity(self.dim);
        self.standardize_into(x, &mut xhat);
        Ok(softmax(&self.logits(&xhat)))
    }

    /// Mean cross-entropy plus `l2 / 2 * |W|^2` over the rows `batch` of
    /// `data`, with its gradient.
    pub fn loss_and_grad(
        &self,
        data: &Examples,
        batch: &[usize],
        l2: f64,
    ) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(ClassifierError::EmptyBatch);
        }
        if data.dim() != self.dim {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.dim,
                found: data.dim(),
            });
        }
        let mut grad = Gradients {
            weights: vec![0.0; self.weights.len()],
            biases: vec![0.0; self.classes],
        };
        let mut loss = 0.0;
        let mut xhat = Vec::with_capacity(self.dim);
        for &i in batch {
            let label = data.label(i);
            if label >= self.classes {
                return Err(ClassifierError::LabelOutOfRange {
                    label,
                    classes: self.classes,
                });
            }
            self.standardize_into(data.row(i), &mut xhat);
            let logits = self.logits(&xhat);
            loss += log_sum_exp(&logits) - logits[label];
            let mut p = softmax(&logits);
            p[label] -= 1.0;
            for (k, &err) in p.iter().enumerate() {
                grad.biases[k] += err;
                let row = &mut grad.weights[k * self.dim..(k + 1) * self.dim];
                for (g, &x) in row.iter_mut().zip(&xhat) {
                    *g += err * x;
                }
            }
        }
        let n = batch.len() as f64;
        loss /= n;
        grad.biases.iter_mut().for_each(|g| *g /= n);
        for (g, &w) in grad.weights.iter_mut().zip(&self.weights) {
            *g = *g / n + l2 * w;
        }
        loss += 0.5 * l2 * self.weights.iter().map(|w| w * w).sum::<f64>();
        Ok((loss, grad))
    }

    /// The `k` most probable classes, most probable first; equal
    /// probabilities are ordered by class index.
    pub fn predict_topk(&self, x: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
        if k == 0 || k > self.classes {
            return Err(ClassifierError::InvalidK {
                k,
                classes: self.classes,
            });
        }
        let p = self.forward(x)?;
        let mut ranked: Vec<(usize, f64)> = p.into_iter().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(k);
        Ok(ranked)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out =
            Vec::with_capacity(12 + 8 * (2 * self.dim + self.weights.len() + self.classes));
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&(self.classes as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for v in self
            .mean
            .iter()
            .chain(&self.std)
            .chain(&self.weights)
            .chain(&self.biases)
        {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |why: &str| ClassifierError::InvalidModel(why.to_string());
        if bytes.len() < 12 || &bytes[..4] != MODEL_MAGIC {
            return Err(bad("missing SMX1 header"));
        }
        let classes = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let count = classes
            .checked_mul(dim)
            .and_then(|w| w.checked_add(2 * dim + classes))
            .ok_or_else(|| bad("dimensions overflow"))?;
        let body = &bytes[12..];
        if body.len() != count * 8 {
            return Err(bad(&format!(
                "expected {} payload bytes, found {}",
                count * 8,
                body.len()
            )));
        }
        let mut values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let mut take = |n: usize| values.by_ref().take(n).collect::<Vec<f64>>();
        let model = SoftmaxModel {
            classes,
            dim,
            mean: take(dim),
            std: take(dim),
            weights: take(classes * dim),
            biases: take(classes),
        };
        if model.std.iter().any(|&s| !(s >= STD_FLOOR)) {
            return Err(bad("standard deviation below floor"));
        }
        Ok(model)
    }
}

fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln()
}

/// Numerically stable softmax (max subtracted before exponentiation).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Full training-split loss after the epoch.
    pub loss: f64,
    pub accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub val_loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: SoftmaxModel,
    pub history: Vec<EpochRecord>,
}

/// Mini-batch gradient descent from a zero model. Rows are reshuffled every
/// epoch by a generator seeded once from `config.seed`.
pub fn train(
    train: &Examples,
    val: Option<&Examples>,
    classes: usize,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train.is_empty() {
        return Err(ClassifierError::EmptySplit);
    }
    if let Some(&label) = train.labels().iter().find(|&&l| l >= classes) {
        return Err(ClassifierError::LabelOutOfRange { label, classes });
    }
    let mut model = SoftmaxModel::fitted_to(train, classes);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let (_, grad) = model.loss_and_grad(train, batch, config.l2)?;
            for (w, g) in model.weights.iter_mut().zip(&grad.weights) {
                *w -= config.learning_rate * g;
            }
            for (b, g) in model.biases.iter_mut().zip(&grad.biases) {
                *b -= config.learning_rate * g;
            }
        }
        let (loss, accuracy) = evaluate(&model, train, config.l2)?;
        let (val_loss, val_accuracy) = match val.filter(|v| !v.is_empty()) {
            Some(v) => {
                let (l, a) = evaluate(&model, v, config.l2)?;
                (Some(l), Some(a))
            }
            None => (None, None),
        };
        log::debug!("epoch {epoch}: loss {loss:.6} accuracy {accuracy:.4}");
        history.push(EpochRecord {
            epoch,
            loss,
            accuracy,
            val_loss,
            val_accuracy,
        });
    }
    Ok(TrainOutcome { model, history })
}

/// Regularized loss and top-1 accuracy over every row of `data`.
pub fn evaluate(model: &SoftmaxModel, data: &Examples, l2: f64) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(ClassifierError::EmptyBatch);
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    let mut xhat = Vec::with_capacity(model.dim);
    for i in 0..data.len() {
        let label = data.label(i);
        if label >= model.classes {
            return Err(ClassifierError::LabelOutOfRange {
                label,
                classes: model.classes,
            });
        }
        model.check_dim(data.row(i))?;
        model.standardize_into(data.row(i), &mut xhat);
        let logits = model.logits(&xhat);
        loss += log_sum_exp(&logits) - logits[label];
        // first maximum, matching the tie rule of predict_topk
        let best = (0..logits.len()).fold(0, |b, c| if logits[c] > logits[b] { c } else { b });
        if best == label {
            correct += 1;
        }
    }
    let n = data.len() as f64;
    let penalty = 0.5 * l2 * model.weights.iter().map(|w| w * w).sum::<f64>();
    Ok((loss / n + penalty, correct as f64 / n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_model_is_uniform() {
        let m = SoftmaxModel::zeros(4, 3);
        let p = m.forward(&[1.0, -2.0, 0.5]).unwrap();
        assert!(p.iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn strong_bias_dominates() {
        // softmax(10, 0, ..., 0)_0 = 1 / (1 + 31 e^-10) ~ 0.99859 for K = 32
        let mut m = SoftmaxModel::zeros(32, 2);
        m.biases[0] = 10.0;
        let p = m.forward(&[0.3, 0.7]).unwrap();
        assert!(p[0] >= 0.999 - 1e-3 && (p[0] - 1.0 / (1.0 + 31.0 * (-10f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn zero_model_loss_is_ln_k() {
        let mut data = Examples::new(2);
        data.push([1.0, 2.0], 0).unwrap();
        data.push([3.0, -1.0], 2).unwrap();
        let (loss, _) = SoftmaxModel::zeros(5, 2)
            .loss_and_grad(&data, &[0, 1], 0.0)
            .unwrap();
        assert!((loss - 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn uniform_topk_uses_index_order() {
        let m = SoftmaxModel::zeros(6, 1);
        let top: Vec<usize> = m
            .predict_topk(&[0.0], 3)
            .unwrap()
            .into_iter()
            .map(|(c, _)| c)
            .collect();
        assert_eq!(top, vec![0, 1, 2]);
        assert!(m.predict_topk(&[0.0], 0).is_err());
        assert!(m.predict_topk(&[0.0], 7).is_err());
    }

    #[test]
    fn dimension_and_label_checks() {
        let m = SoftmaxModel::zeros(2, 3);
        assert!(matches!(
            m.forward(&[1.0]),
            Err(ClassifierError::DimensionMismatch { .. })
        ));
        let mut data = Examples::new(3);
        assert!(data.push([1.0, 2.0], 0).is_err());
        assert!(data.is_empty());
        data.push([1.0, 2.0, 3.0], 5).unwrap();
        assert!(matches!(
            m.loss_and_grad(&data, &[0], 0.0),
            Err(ClassifierError::LabelOutOfRange { .. })
        ));
        assert_eq!(
            m.loss_and_grad(&data, &[], 0.0).unwrap_err(),
            ClassifierError::EmptyBatch
        );
    }

    #[test]
    fn constant_features_hit_the_std_floor() {
        let mut data = Examples::new(2);
        data.push([5.0, 1.0], 0).unwrap();
        data.push([5.0, 3.0], 1).unwrap();
        let m = SoftmaxModel::fitted_to(&data, 2);
        assert_eq!(m.std()[0], 1e-6);
        assert_eq!(m.mean(), &[5.0, 2.0]);
        assert_eq!(m.std()[1], 1.0);
    }

    #[test]
    fn model_bytes_roundtrip() {
        let mut m = SoftmaxModel::zeros(3, 2);
        m.weights = vec![1.5, -2.0, 0.25, 3.0, -0.5, 7.0];
        m.biases = vec![0.1, 0.2, -0.3];
        let bytes = m.to_bytes();
        assert_eq!(&bytes[..4], b"SMX1");
        assert_eq!(bytes.len(), 12 + 8 * (2 + 2 + 6 + 3));
        assert_eq!(SoftmaxModel::from_bytes(&bytes).unwrap(), m);
        assert!(SoftmaxModel::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(SoftmaxModel::from_bytes(b"SMX2").is_err());
    }
}
