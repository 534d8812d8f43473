//! Layout string embedding.
//!
//! Two interchangeable encoders produce the `d_layout` block of the page
//! state vector:
//!
//! - [`RecurrentEncoder`]: a character-level recurrent network trained so the
//!   Euclidean distance between two embeddings regresses the tree edit
//!   distance between the corresponding layout strings. Training is seeded
//!   and reproducible.
//! - `Structural`: a training-free projection of deterministic tree
//!   statistics (node counts per level, depth, branching) for runs that
//!   should not depend on any learned weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::path::Path;

use super::EmbedError;
use crate::layout::{forest_node_count, parse_forest, tree_edit_distance, LayoutString, TreeNode};
use crate::par;
use crate::weights::{Matrix, ModelKind, WeightsError, WeightsFile};

const VOCAB: usize = 5; // G, L, C, {, }

fn char_id(b: u8) -> usize {
    match b {
        b'G' => 0,
        b'L' => 1,
        b'C' => 2,
        b'{' => 3,
        b'}' => 4,
        _ => unreachable!("layout strings are validated before embedding"),
    }
}

/// A labeled training example: two strings and their tree edit distance.
#[derive(Debug, Clone)]
pub struct TrainingPair {
    pub a: LayoutString,
    pub b: LayoutString,
    pub distance: usize,
}

#[derive(Debug, Clone)]
pub enum LayoutEncoder {
    Structural { dim: usize },
    Recurrent(RecurrentEncoder),
}

impl LayoutEncoder {
    pub fn structural(dim: usize) -> Self {
        LayoutEncoder::Structural { dim }
    }

    pub fn dim(&self) -> usize {
        match self {
            LayoutEncoder::Structural { dim } => *dim,
            LayoutEncoder::Recurrent(enc) => enc.hidden,
        }
    }

    /// Deterministic forward pass; the empty string maps to the encoder's
    /// fixed initial state (the zero vector).
    pub fn embed(&self, s: &LayoutString) -> Vec<f64> {
        match self {
            LayoutEncoder::Structural { dim } => structural_features(s, *dim),
            LayoutEncoder::Recurrent(enc) => enc.embed(s),
        }
    }
}

/// Single-layer Elman recurrent encoder over layout-string characters.
#[derive(Debug, Clone)]
pub struct RecurrentEncoder {
    pub hidden: usize,
    w_in: Matrix,  // hidden x VOCAB
    w_rec: Matrix, // hidden x hidden
    bias: Vec<f64>,
    /// Distances are regressed in units of this scale (max train distance).
    pub distance_scale: f64,
}

impl RecurrentEncoder {
    fn init(hidden: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut w_in = Matrix::zeros(hidden, VOCAB);
        let mut w_rec = Matrix::zeros(hidden, hidden);
        let r_in = (6.0 / (hidden + VOCAB) as f64).sqrt();
        let r_rec = (6.0 / (2 * hidden) as f64).sqrt() * 0.5;
        for v in w_in.data.iter_mut() {
            *v = rng.gen_range(-r_in..r_in);
        }
        for v in w_rec.data.iter_mut() {
            *v = rng.gen_range(-r_rec..r_rec);
        }
        RecurrentEncoder {
            hidden,
            w_in,
            w_rec,
            bias: vec![0.0; hidden],
            distance_scale: 1.0,
        }
    }

    pub fn embed(&self, s: &LayoutString) -> Vec<f64> {
        self.run(s.as_str().as_bytes()).pop().unwrap_or(vec![0.0; self.hidden])
    }

    /// Forward pass returning every hidden state (h_1..h_T); empty input
    /// yields an empty history (the embedding is then h_0 = 0).
    fn run(&self, bytes: &[u8]) -> Vec<Vec<f64>> {
        let mut states = Vec::with_capacity(bytes.len());
        let mut h = vec![0.0f64; self.hidden];
        let mut pre = vec![0.0f64; self.hidden];
        for &b in bytes {
            let c = char_id(b);
            for i in 0..self.hidden {
                pre[i] = self.bias[i] + self.w_in.get(i, c);
            }
            for i in 0..self.hidden {
                let row = i * self.hidden;
                let mut acc = 0.0;
                for (j, hj) in h.iter().enumerate() {
                    acc += self.w_rec.data[row + j] * hj;
                }
                pre[i] += acc;
            }
            for i in 0..self.hidden {
                h[i] = pre[i].tanh();
            }
            states.push(h.clone());
        }
        states
    }

    /// `||f(a) - f(b)|| * distance_scale`: the encoder's distance estimate.
    pub fn predicted_distance(&self, a: &LayoutString, b: &LayoutString) -> f64 {
        let fa = self.embed(a);
        let fb = self.embed(b);
        let sq: f64 = fa
            .iter()
            .zip(fb.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        sq.sqrt() * self.distance_scale
    }

    pub fn save(&self, path: &Path) -> Result<(), WeightsError> {
        let scale = Matrix::from_rows(vec![vec![self.distance_scale]]);
        let bias = Matrix::from_rows(vec![self.bias.clone()]);
        WeightsFile {
            kind: ModelKind::LayoutEncoder,
            matrices: vec![
                ("w_in".into(), self.w_in.clone()),
                ("w_rec".into(), self.w_rec.clone()),
                ("bias".into(), bias),
                ("distance_scale".into(), scale),
            ],
        }
        .save(path)
    }

    pub fn load(path: &Path) -> Result<Self, WeightsError> {
        let mut file = WeightsFile::load(path, ModelKind::LayoutEncoder)?;
        let w_in = file.take("w_in")?;
        let w_rec = file.take("w_rec")?;
        let bias = file.take("bias")?.data;
        let scale = file.take("distance_scale")?.data;
        let hidden = w_in.rows;
        if w_rec.rows != hidden || w_rec.cols != hidden || bias.len() != hidden {
            return Err(WeightsError::Malformed("inconsistent encoder dims".into()));
        }
        Ok(RecurrentEncoder {
            hidden,
            w_in,
            w_rec,
            bias,
            distance_scale: scale.first().copied().unwrap_or(1.0),
        })
    }
}

/// Training hyper-parameters for the recurrent encoder.
#[derive(Debug, Clone)]
pub struct EncoderTrainConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub grad_clip: f64,
    pub seed: u64,
}

impl Default for EncoderTrainConfig {
    fn default() -> Self {
        EncoderTrainConfig {
            hidden: 32,
            epochs: 5,
            learning_rate: 0.02,
            grad_clip: 2.0,
            seed: 7,
        }
    }
}

/// Trains the recurrent encoder so embedding distance fits tree edit
/// distance. Seeded and reproducible: the same corpus and seed produce
/// bit-identical weights.
pub fn train_layout_encoder(
    pairs: &[TrainingPair],
    cfg: &EncoderTrainConfig,
) -> Result<RecurrentEncoder, EmbedError> {
    if pairs.is_empty() {
        return Err(EmbedError::EmptyTrainingSet);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut enc = RecurrentEncoder::init(cfg.hidden, &mut rng);
    enc.distance_scale = pairs
        .iter()
        .map(|p| p.distance as f64)
        .fold(1.0f64, f64::max);

    let hidden = cfg.hidden;
    let mut grad_in = Matrix::zeros(hidden, VOCAB);
    let mut grad_rec = Matrix::zeros(hidden, hidden);
    let mut grad_bias = vec![0.0f64; hidden];
    let mut order: Vec<usize> = (0..pairs.len()).collect();

    for _epoch in 0..cfg.epochs {
        // Seeded Fisher-Yates shuffle.
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for &pi in &order {
            let pair = &pairs[pi];
            let bytes_a = pair.a.as_str().as_bytes();
            let bytes_b = pair.b.as_str().as_bytes();
            let states_a = enc.run(bytes_a);
            let states_b = enc.run(bytes_b);
            let zero = vec![0.0f64; hidden];
            let fa = states_a.last().unwrap_or(&zero);
            let fb = states_b.last().unwrap_or(&zero);
            let diff: Vec<f64> = fa.iter().zip(fb.iter()).map(|(x, y)| x - y).collect();
            let dhat = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
            let target = pair.distance as f64 / enc.distance_scale;
            if dhat < 1e-12 {
                // Identical embeddings: no direction to push along.
                continue;
            }
            let err = dhat - target;
            if !err.is_finite() {
                return Err(EmbedError::TrainingDiverged);
            }
            // dL/d f(a) = 2 err * diff / dhat; f(b) gets the negative.
            let coeff = 2.0 * err / dhat;
            let g_fa: Vec<f64> = diff.iter().map(|d| coeff * d).collect();
            let g_fb: Vec<f64> = diff.iter().map(|d| -coeff * d).collect();

            grad_in.data.fill(0.0);
            grad_rec.data.fill(0.0);
            grad_bias.fill(0.0);
            backprop_sequence(&enc, bytes_a, &states_a, &g_fa, &mut grad_in, &mut grad_rec, &mut grad_bias);
            backprop_sequence(&enc, bytes_b, &states_b, &g_fb, &mut grad_in, &mut grad_rec, &mut grad_bias);

            clip_and_apply(&mut enc, &grad_in, &grad_rec, &grad_bias, cfg);
        }
    }
    if enc
        .w_in
        .data
        .iter()
        .chain(enc.w_rec.data.iter())
        .any(|v| !v.is_finite())
    {
        return Err(EmbedError::TrainingDiverged);
    }
    Ok(enc)
}

/// Backpropagation through time for one sequence, accumulating gradients.
fn backprop_sequence(
    enc: &RecurrentEncoder,
    bytes: &[u8],
    states: &[Vec<f64>],
    grad_out: &[f64],
    grad_in: &mut Matrix,
    grad_rec: &mut Matrix,
    grad_bias: &mut [f64],
) {
    if bytes.is_empty() {
        return;
    }
    let hidden = enc.hidden;
    let mut g_h = grad_out.to_vec();
    let mut g_prev = vec![0.0f64; hidden];
    for t in (0..bytes.len()).rev() {
        let h_t = &states[t];
        let c = char_id(bytes[t]);
        // g_pre = g_h * (1 - h^2)
        let g_pre: Vec<f64> = g_h
            .iter()
            .zip(h_t.iter())
            .map(|(g, h)| g * (1.0 - h * h))
            .collect();
        let h_prev = if t == 0 { None } else { Some(&states[t - 1]) };
        for i in 0..hidden {
            grad_in.data[i * VOCAB + c] += g_pre[i];
            grad_bias[i] += g_pre[i];
            if let Some(hp) = h_prev {
                let row = i * hidden;
                for j in 0..hidden {
                    grad_rec.data[row + j] += g_pre[i] * hp[j];
                }
            }
        }
        // g_{h_{t-1}} = W_rec^T g_pre
        g_prev.fill(0.0);
        for i in 0..hidden {
            let row = i * hidden;
            let gp = g_pre[i];
            for j in 0..hidden {
                g_prev[j] += enc.w_rec.data[row + j] * gp;
            }
        }
        std::mem::swap(&mut g_h, &mut g_prev);
    }
}

fn clip_and_apply(
    enc: &mut RecurrentEncoder,
    grad_in: &Matrix,
    grad_rec: &Matrix,
    grad_bias: &[f64],
    cfg: &EncoderTrainConfig,
) {
    let norm_sq: f64 = grad_in.data.iter().map(|v| v * v).sum::<f64>()
        + grad_rec.data.iter().map(|v| v * v).sum::<f64>()
        + grad_bias.iter().map(|v| v * v).sum::<f64>();
    let norm = norm_sq.sqrt();
    let scale = if norm > cfg.grad_clip {
        cfg.grad_clip / norm
    } else {
        1.0
    };
    let lr = cfg.learning_rate * scale;
    for (w, g) in enc.w_in.data.iter_mut().zip(grad_in.data.iter()) {
        *w -= lr * g;
    }
    for (w, g) in enc.w_rec.data.iter_mut().zip(grad_rec.data.iter()) {
        *w -= lr * g;
    }
    for (w, g) in enc.bias.iter_mut().zip(grad_bias.iter()) {
        *w -= lr * g;
    }
}

/// Deterministic tree statistics projected/padded to `dim` components, each
/// squashed into [0, 1).
fn structural_features(s: &LayoutString, dim: usize) -> Vec<f64> {
    let forest = parse_forest(s.as_str()).unwrap_or_default();
    let squash = |x: f64| x / (1.0 + x);

    let mut per_depth = [0usize; 4]; // node count at depths 0..2 and deeper
    let mut max_depth = 0usize;
    let mut leaf_count = 0usize;
    let mut max_children = 0usize;
    let mut internal_nodes = 0usize;
    let mut child_total = 0usize;
    fn walk(
        node: &TreeNode,
        depth: usize,
        per_depth: &mut [usize; 4],
        max_depth: &mut usize,
        leaves: &mut usize,
        max_children: &mut usize,
        internal: &mut usize,
        child_total: &mut usize,
    ) {
        per_depth[depth.min(3)] += 1;
        *max_depth = (*max_depth).max(depth);
        if node.children.is_empty() {
            *leaves += 1;
        } else {
            *internal += 1;
            *child_total += node.children.len();
            *max_children = (*max_children).max(node.children.len());
        }
        for c in &node.children {
            walk(c, depth + 1, per_depth, max_depth, leaves, max_children, internal, child_total);
        }
    }
    for n in &forest {
        walk(
            n,
            0,
            &mut per_depth,
            &mut max_depth,
            &mut leaf_count,
            &mut max_children,
            &mut internal_nodes,
            &mut child_total,
        );
    }
    let total = forest_node_count(&forest);
    let mean_branch = if internal_nodes > 0 {
        child_total as f64 / internal_nodes as f64
    } else {
        0.0
    };

    let raw = [
        squash(total as f64),
        squash(forest.len() as f64),
        squash(per_depth[0] as f64),
        squash(per_depth[1] as f64),
        squash(per_depth[2] as f64),
        squash(per_depth[3] as f64),
        squash(leaf_count as f64),
        squash(max_depth as f64),
        squash(max_children as f64),
        squash(mean_branch),
        squash(s.as_str().len() as f64),
        squash((total - leaf_count) as f64),
    ];
    let mut out = vec![0.0; dim];
    for (i, v) in raw.iter().enumerate().take(dim) {
        out[i] = *v;
    }
    out
}

/// Generates `count` distinct random four-level layout strings (the encoder
/// training corpus recipe). Deterministic per seed.
pub fn generate_layout_corpus(seed: u64, count: usize) -> Vec<LayoutString> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let groups = rng.gen_range(1..=5);
        let mut text = String::new();
        for _ in 0..groups {
            text.push_str("G{");
            let lines = rng.gen_range(1..=4);
            for _ in 0..lines {
                text.push_str("L{");
                let cols = rng.gen_range(1..=6);
                for _ in 0..cols {
                    text.push('C');
                }
                text.push('}');
            }
            text.push('}');
        }
        if seen.insert(text.clone()) {
            out.push(LayoutString(text));
        }
    }
    out
}

/// All ordered pairs over the corpus with exact tree edit distances
/// (parallel when the `parallel` feature is enabled).
pub fn build_distance_pairs(corpus: &[LayoutString]) -> Vec<TrainingPair> {
    let index_pairs: Vec<(usize, usize)> = (0..corpus.len())
        .flat_map(|i| (0..corpus.len()).map(move |j| (i, j)))
        .collect();
    par::map_slice(&index_pairs, |(i, j)| {
        let a = corpus[*i].clone();
        let b = corpus[*j].clone();
        let distance = tree_edit_distance(&a, &b).expect("generated corpus strings always parse");
        TrainingPair { a, b, distance }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ls(s: &str) -> LayoutString {
        LayoutString(s.to_string())
    }

    #[test]
    fn identical_inputs_embed_identically() {
        let pairs = vec![TrainingPair {
            a: ls("G{L{C}}"),
            b: ls("G{L{CC}}"),
            distance: 1,
        }];
        let cfg = EncoderTrainConfig {
            hidden: 8,
            epochs: 2,
            ..Default::default()
        };
        let enc = train_layout_encoder(&pairs, &cfg).unwrap();
        let s = ls("G{L{CC}}G{L{C}}");
        assert_eq!(enc.embed(&s), enc.embed(&s));
        assert_eq!(enc.predicted_distance(&s, &s), 0.0);
    }

    #[test]
    fn training_is_seed_reproducible() {
        let corpus = generate_layout_corpus(5, 12);
        let pairs = build_distance_pairs(&corpus);
        let cfg = EncoderTrainConfig {
            hidden: 8,
            epochs: 2,
            seed: 42,
            ..Default::default()
        };
        let e1 = train_layout_encoder(&pairs, &cfg).unwrap();
        let e2 = train_layout_encoder(&pairs, &cfg).unwrap();
        assert_eq!(e1.w_in.data, e2.w_in.data);
        assert_eq!(e1.w_rec.data, e2.w_rec.data);
        assert_eq!(e1.bias, e2.bias);
    }

    #[test]
    fn empty_training_set_is_rejected() {
        assert!(matches!(
            train_layout_encoder(&[], &EncoderTrainConfig::default()),
            Err(EmbedError::EmptyTrainingSet)
        ));
    }

    #[test]
    fn empty_string_embeds_to_initial_state() {
        let enc = LayoutEncoder::structural(8);
        assert_eq!(enc.embed(&ls("")), vec![0.0; 8]);
        let pairs = vec![TrainingPair {
            a: ls("G{L{C}}"),
            b: ls(""),
            distance: 3,
        }];
        let trained = train_layout_encoder(
            &pairs,
            &EncoderTrainConfig {
                hidden: 4,
                epochs: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(trained.embed(&ls("")), vec![0.0; 4]);
    }

    #[test]
    fn corpus_is_distinct_and_seeded() {
        let c1 = generate_layout_corpus(9, 50);
        let c2 = generate_layout_corpus(9, 50);
        assert_eq!(c1, c2);
        let set: BTreeSet<_> = c1.iter().map(|s| s.as_str().to_string()).collect();
        assert_eq!(set.len(), 50);
    }

    #[test]
    fn encoder_weights_round_trip_through_file() {
        let corpus = generate_layout_corpus(3, 8);
        let pairs = build_distance_pairs(&corpus);
        let cfg = EncoderTrainConfig {
            hidden: 8,
            epochs: 1,
            ..Default::default()
        };
        let enc = train_layout_encoder(&pairs, &cfg).unwrap();
        let dir = std::env::temp_dir().join("pixelprobe_enc_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("enc.bin");
        enc.save(&path).unwrap();
        let back = RecurrentEncoder::load(&path).unwrap();
        let s = ls("G{L{CCC}}");
        assert_eq!(enc.embed(&s), back.embed(&s));
        assert_eq!(enc.distance_scale, back.distance_scale);
    }

    #[test]
    fn structural_features_distinguish_sizes() {
        let enc = LayoutEncoder::structural(12);
        let small = enc.embed(&ls("G{L{C}}"));
        let big = enc.embed(&ls("G{L{CCCCC}L{CC}}G{L{C}}"));
        assert_ne!(small, big);
    }
}
