//! The learnable pipeline: term-embedding layer, multi-layer GCN over the
//! normalized adjacency, linear sequence projection, dot-product sigmoid
//! prediction, BCE loss with exact analytic gradients, and Adam updates.
//!
//! The GCN branch has no per-protein dependence, so training computes it
//! once per batch and every protein's gradient accumulates into the shared
//! graph-side weights.

mod adam;
mod backward;
mod checkpoint;
mod forward;
mod train;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use backward::backward;
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointHeader, CHECKPOINT_MAGIC};
pub use forward::{
    bce_loss, embed_terms, forward, gcn_branch, gcn_forward, predict, project_batch,
    project_sequence, sigmoid, ForwardCache, GcnCache,
};
pub use train::{
    dataset_loss, predict_batch, train, EpochStats, TrainData, TrainOutcome,
};

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::go_features::NodeFeatureMatrix;
use crate::sparse::CsrMatrix;

/// Default cap on the embedding width derived from namespace depth.
pub const DEFAULT_DEPTH_CAP: usize = 80;

/// Model and training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub n_terms: usize,
    /// Term embedding width (namespace max depth, capped).
    pub d0: usize,
    /// GCN hidden width; equals `d0` by default.
    pub d: usize,
    /// Number of GCN layers (1 to 4).
    pub n_layers: usize,
    /// Input sequence-embedding width.
    pub seq_dim: usize,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl ModelConfig {
    /// Standard configuration for a graph of `n_terms` terms whose namespace
    /// has `max_depth`: width is the depth capped at `depth_cap`, two GCN
    /// layers, and the stock training schedule (Adam, lr 1e-3, 10 epochs,
    /// batch 32).
    pub fn for_depth(
        n_terms: usize,
        max_depth: usize,
        depth_cap: usize,
        seq_dim: usize,
        seed: u64,
    ) -> ModelConfig {
        let d0 = max_depth.min(depth_cap).max(1);
        ModelConfig {
            n_terms,
            d0,
            d: d0,
            n_layers: 2,
            seq_dim,
            lr: 1e-3,
            epochs: 10,
            batch_size: 32,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_terms == 0 || self.d0 == 0 || self.d == 0 || self.seq_dim == 0 {
            return Err(Error::invalid("model dimensions must be positive"));
        }
        if !(1..=4).contains(&self.n_layers) {
            return Err(Error::invalid(format!(
                "n_layers must be in 1..=4, got {}",
                self.n_layers
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be positive"));
        }
        if !self.lr.is_finite() || self.lr <= 0.0 {
            return Err(Error::invalid("learning rate must be positive"));
        }
        Ok(())
    }
}

/// All learnable tensors. The projection bias is kept as a 1 x d matrix so
/// every tensor is uniform for the optimizer and the checkpoint format.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// N x d0 term embedding.
    pub w_embed: Array2<f64>,
    /// GCN layer weights: d0 x d, then d x d.
    pub w_gcn: Vec<Array2<f64>>,
    /// seq_dim x d sequence projection.
    pub w_proj: Array2<f64>,
    /// 1 x d projection bias.
    pub b_proj: Array2<f64>,
}

impl ModelParams {
    pub fn n_layers(&self) -> usize {
        self.w_gcn.len()
    }

    /// Tensors in a fixed order, named for checkpoints and diagnostics.
    pub fn tensors(&self) -> Vec<(String, &Array2<f64>)> {
        let mut out = vec![("w_embed".to_string(), &self.w_embed)];
        for (l, w) in self.w_gcn.iter().enumerate() {
            out.push((format!("w_gcn_{}", l + 1), w));
        }
        out.push(("w_proj".to_string(), &self.w_proj));
        out.push(("b_proj".to_string(), &self.b_proj));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Array2<f64>> {
        let mut out = vec![&mut self.w_embed];
        out.extend(self.w_gcn.iter_mut());
        out.push(&mut self.w_proj);
        out.push(&mut self.b_proj);
        out
    }

    pub fn zeros_like(&self) -> ModelParams {
        ModelParams {
            w_embed: Array2::zeros(self.w_embed.dim()),
            w_gcn: self.w_gcn.iter().map(|w| Array2::zeros(w.dim())).collect(),
            w_proj: Array2::zeros(self.w_proj.dim()),
            b_proj: Array2::zeros(self.b_proj.dim()),
        }
    }
}

/// Sparse graph-side inputs shared across every forward and backward pass.
#[derive(Debug, Clone)]
pub struct GraphInputs {
    /// Row-stochastic normalized adjacency.
    pub ahat: CsrMatrix,
    /// Its transpose, for backpropagation.
    pub ahat_t: CsrMatrix,
    /// Ancestor one-hot features.
    pub onehot: CsrMatrix,
    pub onehot_t: CsrMatrix,
}

impl GraphInputs {
    pub fn new(onehot: &NodeFeatureMatrix, ahat: CsrMatrix) -> GraphInputs {
        assert_eq!(onehot.n(), ahat.nrows());
        let onehot = onehot.to_csr();
        GraphInputs {
            ahat_t: ahat.transpose(),
            ahat,
            onehot_t: onehot.transpose(),
            onehot,
        }
    }

    pub fn n_terms(&self) -> usize {
        self.ahat.nrows()
    }
}

// Each tensor draws from its own ChaCha stream, so one tensor's values never
// depend on how many values another tensor consumed.
const STREAM_W_EMBED: u64 = 1;
const STREAM_W_GCN_BASE: u64 = 2;
const STREAM_W_PROJ: u64 = 64;
pub(crate) const STREAM_SHUFFLE: u64 = 65;

fn tensor_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn glorot_uniform(rows: usize, cols: usize, rng: &mut ChaCha20Rng) -> Array2<f64> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let values: Vec<f64> = (0..rows * cols)
        .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * bound)
        .collect();
    Array2::from_shape_vec((rows, cols), values).expect("sized above")
}

/// Seeded Glorot-uniform initialization; biases start at zero. The same
/// seed always produces bit-identical parameters.
pub fn init_params(cfg: &ModelConfig) -> ModelParams {
    let mut w_gcn = Vec::with_capacity(cfg.n_layers);
    for l in 0..cfg.n_layers {
        let rows = if l == 0 { cfg.d0 } else { cfg.d };
        let mut rng = tensor_rng(cfg.seed, STREAM_W_GCN_BASE + l as u64);
        w_gcn.push(glorot_uniform(rows, cfg.d, &mut rng));
    }
    ModelParams {
        w_embed: glorot_uniform(
            cfg.n_terms,
            cfg.d0,
            &mut tensor_rng(cfg.seed, STREAM_W_EMBED),
        ),
        w_gcn,
        w_proj: glorot_uniform(
            cfg.seq_dim,
            cfg.d,
            &mut tensor_rng(cfg.seed, STREAM_W_PROJ),
        ),
        b_proj: Array2::zeros((1, cfg.d)),
    }
}
