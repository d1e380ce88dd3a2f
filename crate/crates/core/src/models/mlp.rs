//! One-hidden-layer perceptron classifying global SST patterns into
//! calendar months (12 softmax outputs), trained by mini-batch gradient
//! descent on cross-entropy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::SeasonalDataset;
use crate::rng::Stream;

pub const N_CLASSES: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: 64,
            epochs: 100,
            learning_rate: 0.1,
            batch_size: 16,
            seed: 0,
        }
    }
}

/// `in_dim → hidden (tanh) → 12 (softmax)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub in_dim: usize,
    pub hidden: usize,
    pub activation: String,
    /// `hidden × in_dim`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `12 × hidden`, row-major.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    /// Mean training loss per epoch.
    pub loss_trace: Vec<f64>,
}

fn softmax(logits: &mut [f64]) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for z in logits.iter_mut() {
        *z = (*z - max).exp();
        sum += *z;
    }
    for z in logits.iter_mut() {
        *z /= sum;
    }
}

impl MlpModel {
    /// Glorot-uniform weights, zero biases.
    pub fn init(in_dim: usize, hidden: usize, seed: u64) -> Self {
        let mut s = Stream::new(seed);
        let mut draw = |fan_in: usize, fan_out: usize| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            (0..fan_in * fan_out)
                .map(|_| s.uniform_range(-limit, limit))
                .collect::<Vec<_>>()
        };
        let w1 = draw(in_dim, hidden);
        let w2 = draw(hidden, N_CLASSES);
        Self {
            in_dim,
            hidden,
            activation: "tanh".into(),
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: vec![0.0; N_CLASSES],
            loss_trace: Vec::new(),
        }
    }

    pub fn n_parameters(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    /// Flattened `[w1, b1, w2, b2]`.
    pub fn parameters(&self) -> Vec<f64> {
        [&self.w1[..], &self.b1, &self.w2, &self.b2].concat()
    }

    pub fn set_parameters(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.n_parameters());
        let (a, rest) = p.split_at(self.w1.len());
        let (b, rest) = rest.split_at(self.b1.len());
        let (c, d) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(a);
        self.b1.copy_from_slice(b);
        self.w2.copy_from_slice(c);
        self.b2.copy_from_slice(d);
    }

    fn hidden_activations(&self, x: &[f64], out: &mut [f64]) {
        for (j, h) in out.iter_mut().enumerate() {
            let row = &self.w1[j * self.in_dim..(j + 1) * self.in_dim];
            let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b1[j];
            *h = z.tanh();
        }
    }

    fn output(&self, h: &[f64]) -> [f64; N_CLASSES] {
        let mut logits = [0.0; N_CLASSES];
        for (k, z) in logits.iter_mut().enumerate() {
            let row = &self.w2[k * self.hidden..(k + 1) * self.hidden];
            *z = row.iter().zip(h).map(|(w, v)| w * v).sum::<f64>() + self.b2[k];
        }
        softmax(&mut logits);
        logits
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<[f64; N_CLASSES]> {
        if x.len() != self.in_dim {
            return Err(Error::Shape(format!(
                "classifier expects {} inputs, got {}",
                self.in_dim,
                x.len()
            )));
        }
        let mut h = vec![0.0; self.hidden];
        self.hidden_activations(x, &mut h);
        Ok(self.output(&h))
    }

    /// Mean cross-entropy over `labels.len()` rows of `xs` and its gradient
    /// with respect to [`MlpModel::parameters`].
    pub fn loss_and_gradient(&self, xs: &[f64], labels: &[u8]) -> (f64, Vec<f64>) {
        let (n_in, n_h) = (self.in_dim, self.hidden);
        let mut grad = vec![0.0; self.n_parameters()];
        let (gw1, rest) = grad.split_at_mut(self.w1.len());
        let (gb1, rest) = rest.split_at_mut(n_h);
        let (gw2, gb2) = rest.split_at_mut(self.w2.len());

        let mut h = vec![0.0; n_h];
        let mut dh = vec![0.0; n_h];
        let mut loss = 0.0;
        let scale = 1.0 / labels.len() as f64;
        for (x, &label) in xs.chunks_exact(n_in).zip(labels) {
            self.hidden_activations(x, &mut h);
            let probs = self.output(&h);
            loss -= probs[label as usize].max(f64::MIN_POSITIVE).ln();

            dh.iter_mut().for_each(|v| *v = 0.0);
            for k in 0..N_CLASSES {
                let dz = scale * (probs[k] - if k == label as usize { 1.0 } else { 0.0 });
                gb2[k] += dz;
                let row = &self.w2[k * n_h..(k + 1) * n_h];
                for j in 0..n_h {
                    gw2[k * n_h + j] += dz * h[j];
                    dh[j] += dz * row[j];
                }
            }
            for j in 0..n_h {
                let da = dh[j] * (1.0 - h[j] * h[j]);
                gb1[j] += da;
                let g = &mut gw1[j * n_in..(j + 1) * n_in];
                for (gi, xi) in g.iter_mut().zip(x) {
                    *gi += da * xi;
                }
            }
        }
        (loss * scale, grad)
    }
}

pub fn fit_mlp_classifier(data: &SeasonalDataset, config: &MlpConfig) -> Result<MlpModel> {
    let n = data.n_rows();
    let mut distinct = [false; N_CLASSES];
    for &l in &data.labels {
        if l as usize >= N_CLASSES {
            return Err(Error::Config(format!("label {l} outside 0..12")));
        }
        distinct[l as usize] = true;
    }
    if distinct.iter().filter(|&&d| d).count() < 2 {
        return Err(Error::Config("classifier needs at least two distinct labels".into()));
    }
    if config.hidden == 0 || config.batch_size == 0 {
        return Err(Error::Config("hidden width and batch size must be positive".into()));
    }

    let mut model = MlpModel::init(data.width, config.hidden, config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffler = Stream::substream(config.seed, 1);
    let mut params = model.parameters();
    let mut batch_x = Vec::with_capacity(config.batch_size * data.width);
    let mut batch_y = Vec::with_capacity(config.batch_size);

    for epoch in 0..config.epochs {
        shuffler.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            batch_x.clear();
            batch_y.clear();
            for &i in chunk {
                batch_x.extend_from_slice(data.row(i));
                batch_y.push(data.labels[i]);
            }
            let (loss, grad) = model.loss_and_gradient(&batch_x, &batch_y);
            if !loss.is_finite() {
                return Err(Error::Divergence(epoch));
            }
            epoch_loss += loss * chunk.len() as f64;
            for (p, g) in params.iter_mut().zip(&grad) {
                *p -= config.learning_rate * g;
            }
            model.set_parameters(&params);
        }
        let mean = epoch_loss / n as f64;
        if !mean.is_finite() || params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Divergence(epoch));
        }
        model.loss_trace.push(mean);
    }
    Ok(model)
}

/// Calendar month 1..=12 of a normalized global row; ties go to the
/// earliest month.
pub fn predict_season(model: &MlpModel, row: &[f64]) -> Result<u8> {
    let probs = model.predict_proba(row)?;
    let mut best = 0;
    for k in 1..N_CLASSES {
        if probs[k] > probs[best] {
            best = k;
        }
    }
    Ok(best as u8 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_separable(n: usize, seed: u64) -> SeasonalDataset {
        let mut s = Stream::new(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let class = if i % 2 == 0 { 0u8 } else { 6u8 };
            let sign = if class == 0 { 1.0 } else { -1.0 };
            rows.push(sign * (1.0 + s.uniform()));
            rows.push(s.normal());
            labels.push(class);
        }
        SeasonalDataset {
            rows,
            width: 2,
            labels,
            columns: vec![0, 1],
        }
    }

    #[test]
    fn separable_two_class_toy() {
        let data = toy_separable(40, 1);
        let cfg = MlpConfig {
            hidden: 8,
            epochs: 200,
            seed: 3,
            ..Default::default()
        };
        let model = fit_mlp_classifier(&data, &cfg).unwrap();
        for i in 0..data.n_rows() {
            assert_eq!(predict_season(&model, data.row(i)).unwrap(), data.labels[i] + 1);
        }
        assert!(model.loss_trace.last().unwrap() < &model.loss_trace[0]);
    }

    #[test]
    fn finite_difference_gradient() {
        let data = toy_separable(5, 2);
        let mut model = MlpModel::init(2, 4, 9);
        let (_, grad) = model.loss_and_gradient(&data.rows, &data.labels);
        let base = model.parameters();
        let h = 1e-6;
        for i in 0..base.len() {
            let mut p = base.clone();
            p[i] += h;
            model.set_parameters(&p);
            let (up, _) = model.loss_and_gradient(&data.rows, &data.labels);
            p[i] -= 2.0 * h;
            model.set_parameters(&p);
            let (down, _) = model.loss_and_gradient(&data.rows, &data.labels);
            let numeric = (up - down) / (2.0 * h);
            let rel = (numeric - grad[i]).abs() / (numeric.abs() + grad[i].abs()).max(1e-8);
            assert!(rel < 1e-4, "param {i}: analytic {} numeric {numeric}", grad[i]);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let data = toy_separable(20, 4);
        let cfg = MlpConfig {
            hidden: 5,
            epochs: 10,
            seed: 77,
            ..Default::default()
        };
        let a = fit_mlp_classifier(&data, &cfg).unwrap();
        let b = fit_mlp_classifier(&data, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn softmax_sums_to_one_and_ties_pick_january() {
        let mut model = MlpModel::init(3, 4, 0);
        let p = model.predict_proba(&[0.3, -1.0, 2.0]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let zeros = vec![0.0; model.n_parameters()];
        model.set_parameters(&zeros);
        assert_eq!(predict_season(&model, &[1.0, 2.0, 3.0]).unwrap(), 1);
        assert!(matches!(predict_season(&model, &[1.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn single_label_rejected() {
        let data = SeasonalDataset {
            rows: vec![0.0; 4],
            width: 2,
            labels: vec![3, 3],
            columns: vec![0, 1],
        };
        assert!(fit_mlp_classifier(&data, &MlpConfig::default()).is_err());
    }

    #[test]
    fn divergence_reported() {
        let data = toy_separable(10, 5);
        let cfg = MlpConfig {
            hidden: 4,
            epochs: 5,
            learning_rate: f64::INFINITY,
            ..Default::default()
        };
        assert!(matches!(fit_mlp_classifier(&data, &cfg), Err(Error::Divergence(_))));
    }
}
