//! From-scratch fully connected Q-network: ReLU hidden layers, linear scalar
//! output, MSE loss, plain per-sample SGD, and analytic gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

use super::AgentError;
use crate::weights::{Matrix, ModelKind, WeightsError, WeightsFile};

/// One training example: the concatenated (state, action) input and the
/// target Q-value.
#[derive(Debug, Clone)]
pub struct TrainSample {
    pub input: Vec<f64>,
    pub target: f64,
}

#[derive(Debug, Clone)]
struct DenseLayer {
    w: Matrix, // out x in
    b: Vec<f64>,
}

impl DenseLayer {
    fn new(out_dim: usize, in_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut w = Matrix::zeros(out_dim, in_dim);
        let r = (6.0 / (in_dim + out_dim) as f64).sqrt();
        for v in w.data.iter_mut() {
            *v = rng.gen_range(-r..r);
        }
        DenseLayer {
            w,
            b: vec![0.0; out_dim],
        }
    }
}

/// Feed-forward net: input -> hidden (ReLU) x depth -> scalar (identity).
#[derive(Debug, Clone)]
pub struct QNetwork {
    input_dim: usize,
    layers: Vec<DenseLayer>,
}

impl QNetwork {
    /// Builds a seeded network with `hidden_layers` ReLU layers of
    /// `hidden_width` units each and a linear scalar head.
    pub fn new(input_dim: usize, hidden_width: usize, hidden_layers: usize, seed: u64) -> Self {
        assert!(input_dim >= 1 && hidden_width >= 1 && hidden_layers >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(hidden_layers + 1);
        let mut prev = input_dim;
        for _ in 0..hidden_layers {
            layers.push(DenseLayer::new(hidden_width, prev, &mut rng));
            prev = hidden_width;
        }
        layers.push(DenseLayer::new(1, prev, &mut rng));
        QNetwork { input_dim, layers }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Deterministic forward pass.
    pub fn forward(&self, input: &[f64]) -> Result<f64, AgentError> {
        if input.len() != self.input_dim {
            return Err(AgentError::DimensionMismatch {
                expected: self.input_dim,
                got: input.len(),
            });
        }
        let mut act = input.to_vec();
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            let mut next = vec![0.0; layer.w.rows];
            layer.w.mul_vec(&act, &mut next);
            for (v, b) in next.iter_mut().zip(layer.b.iter()) {
                *v += b;
                if li != last && *v < 0.0 {
                    *v = 0.0;
                }
            }
            act = next;
        }
        Ok(act[0])
    }

    /// Q-value of a (state, action) pair: forward over the concatenation.
    pub fn q_value(&self, state: &[f64], action: &[f64]) -> Result<f64, AgentError> {
        let mut input = Vec::with_capacity(state.len() + action.len());
        input.extend_from_slice(state);
        input.extend_from_slice(action);
        self.forward(&input)
    }

    /// Forward pass keeping every layer's post-activation output.
    fn forward_cached(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input.to_vec());
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            let mut next = vec![0.0; layer.w.rows];
            layer.w.mul_vec(acts.last().unwrap(), &mut next);
            for (v, b) in next.iter_mut().zip(layer.b.iter()) {
                *v += b;
                if li != last && *v < 0.0 {
                    *v = 0.0;
                }
            }
            acts.push(next);
        }
        acts
    }

    /// Per-sample gradient of (q - target)^2, accumulated into `grads`.
    /// Returns (q, squared error).
    fn accumulate_sample_gradient(
        &self,
        sample: &TrainSample,
        grads: &mut [DenseLayer],
        scale: f64,
    ) -> (f64, f64) {
        let acts = self.forward_cached(&sample.input);
        let q = acts.last().unwrap()[0];
        let err = q - sample.target;
        // dL/dq for L = (q - t)^2.
        let mut delta = vec![2.0 * err * scale];
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let input = &acts[li];
            let grad = &mut grads[li];
            for r in 0..layer.w.rows {
                let d = delta[r];
                grad.b[r] += d;
                let row = r * layer.w.cols;
                for (c, x) in input.iter().enumerate() {
                    grad.w.data[row + c] += d * x;
                }
            }
            if li > 0 {
                let mut prev_delta = vec![0.0; layer.w.cols];
                layer.w.mul_vec_transposed(&delta, &mut prev_delta);
                // ReLU mask of the previous layer's output.
                for (pd, out) in prev_delta.iter_mut().zip(acts[li].iter()) {
                    if *out <= 0.0 {
                        *pd = 0.0;
                    }
                }
                delta = prev_delta;
            }
        }
        (q, err * err)
    }

    fn zero_grads(&self) -> Vec<DenseLayer> {
        self.layers
            .iter()
            .map(|l| DenseLayer {
                w: Matrix::zeros(l.w.rows, l.w.cols),
                b: vec![0.0; l.b.len()],
            })
            .collect()
    }

    /// Mean-squared-error loss and its analytic gradient over a batch
    /// (used by the finite-difference check and by training internals).
    pub fn batch_loss_and_gradient(
        &self,
        batch: &[TrainSample],
    ) -> Result<(f64, Vec<Vec<f64>>), AgentError> {
        if batch.is_empty() {
            return Err(AgentError::EmptyBatch);
        }
        let mut grads = self.zero_grads();
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        for s in batch {
            if s.input.len() != self.input_dim {
                return Err(AgentError::DimensionMismatch {
                    expected: self.input_dim,
                    got: s.input.len(),
                });
            }
            let (_, sq) = self.accumulate_sample_gradient(s, &mut grads, scale);
            loss += sq * scale;
        }
        let flat = grads
            .into_iter()
            .flat_map(|g| {
                let mut v = g.w.data;
                v.extend(g.b);
                std::iter::once(v)
            })
            .collect();
        Ok((loss, flat))
    }

    /// MSE loss over a batch without gradients.
    pub fn batch_loss(&self, batch: &[TrainSample]) -> Result<f64, AgentError> {
        if batch.is_empty() {
            return Err(AgentError::EmptyBatch);
        }
        let mut loss = 0.0;
        for s in batch {
            let q = self.forward(&s.input)?;
            loss += (q - s.target) * (q - s.target);
        }
        Ok(loss / batch.len() as f64)
    }

    /// Plain per-sample SGD on MSE for `epochs` passes with seeded shuffling.
    /// Returns the final epoch's mean per-sample loss.
    pub fn train(
        &mut self,
        batch: &[TrainSample],
        learning_rate: f64,
        epochs: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64, AgentError> {
        if batch.is_empty() {
            return Err(AgentError::EmptyBatch);
        }
        let mut order: Vec<usize> = (0..batch.len()).collect();
        let mut grads = self.zero_grads();
        let mut final_epoch_loss = 0.0;
        for epoch in 0..epochs {
            for i in (1..order.len()).rev() {
                let j = rng.gen_range(0..=i);
                order.swap(i, j);
            }
            let mut epoch_loss = 0.0;
            for &idx in &order {
                let sample = &batch[idx];
                if sample.input.len() != self.input_dim {
                    return Err(AgentError::DimensionMismatch {
                        expected: self.input_dim,
                        got: sample.input.len(),
                    });
                }
                for g in grads.iter_mut() {
                    g.w.data.fill(0.0);
                    g.b.fill(0.0);
                }
                let (_, sq) = self.accumulate_sample_gradient(sample, &mut grads, 1.0);
                epoch_loss += sq;
                for (layer, g) in self.layers.iter_mut().zip(grads.iter()) {
                    for (w, gw) in layer.w.data.iter_mut().zip(g.w.data.iter()) {
                        *w -= learning_rate * gw;
                    }
                    for (b, gb) in layer.b.iter_mut().zip(g.b.iter()) {
                        *b -= learning_rate * gb;
                    }
                }
            }
            epoch_loss /= batch.len() as f64;
            if !epoch_loss.is_finite() {
                return Err(AgentError::TrainingDiverged);
            }
            if epoch == epochs - 1 {
                final_epoch_loss = epoch_loss;
            }
        }
        Ok(final_epoch_loss)
    }

    /// Flattens all parameters (layer by layer: weights then biases).
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(&l.w.data);
            out.extend_from_slice(&l.b);
        }
        out
    }

    /// Writes back a parameter vector produced by [`Self::parameters`].
    pub fn set_parameters(&mut self, params: &[f64]) {
        let mut offset = 0;
        for l in self.layers.iter_mut() {
            l.w.data.copy_from_slice(&params[offset..offset + l.w.data.len()]);
            offset += l.w.data.len();
            l.b.copy_from_slice(&params[offset..offset + l.b.len()]);
            offset += l.b.len();
        }
        debug_assert_eq!(offset, params.len());
    }

    pub fn save(&self, path: &Path) -> Result<(), WeightsError> {
        let mut matrices = Vec::new();
        for (i, l) in self.layers.iter().enumerate() {
            matrices.push((format!("w{i}"), l.w.clone()));
            matrices.push((format!("b{i}"), Matrix::from_rows(vec![l.b.clone()])));
        }
        WeightsFile {
            kind: ModelKind::QNetwork,
            matrices,
        }
        .save(path)
    }

    pub fn load(path: &Path) -> Result<Self, WeightsError> {
        let mut file = WeightsFile::load(path, ModelKind::QNetwork)?;
        let mut layers = Vec::new();
        let mut i = 0;
        loop {
            let Ok(w) = file.take(&format!("w{i}")) else {
                break;
            };
            let b = file.take(&format!("b{i}"))?.data;
            if b.len() != w.rows {
                return Err(WeightsError::Malformed(format!("layer {i} dims")));
            }
            layers.push(DenseLayer { w, b });
            i += 1;
        }
        if layers.is_empty() {
            return Err(WeightsError::Malformed("no layers".into()));
        }
        let input_dim = layers[0].w.cols;
        Ok(QNetwork { input_dim, layers })
    }
}
