//! Training loop and batch inference.

use ndarray::{Array2, ArrayView2, Axis};
use rand::prelude::*;
use rayon::prelude::*;

use crate::error::{Error, Result};

use super::adam::{adam_step, AdamHyper, AdamState};
use super::backward::backward;
use super::forward::{bce_loss, forward, gcn_branch, predict, project_batch, project_sequence};
use super::{init_params, tensor_rng, GraphInputs, ModelConfig, ModelParams, STREAM_SHUFFLE};

/// Aligned protein ids, sequence embeddings, and sparse label sets.
#[derive(Debug, Clone)]
pub struct TrainData {
    pub proteins: Vec<String>,
    /// n_proteins x seq_dim.
    pub embeddings: Array2<f64>,
    /// Per-protein sorted term indices (ancestor-closed).
    pub labels: Vec<Vec<usize>>,
}

impl TrainData {
    pub fn validate(&self, cfg: &ModelConfig) -> Result<()> {
        if self.proteins.len() != self.embeddings.nrows()
            || self.proteins.len() != self.labels.len()
        {
            return Err(Error::invalid("training data lengths disagree"));
        }
        if self.embeddings.ncols() != cfg.seq_dim {
            return Err(Error::invalid(format!(
                "embedding dim {} does not match configured seq_dim {}",
                self.embeddings.ncols(),
                cfg.seq_dim
            )));
        }
        if self.proteins.is_empty() {
            return Err(Error::invalid("no training proteins"));
        }
        if let Some(&t) = self.labels.iter().flatten().max() {
            if t >= cfg.n_terms {
                return Err(Error::invalid("label index exceeds term count"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Batch-size-weighted mean of the per-batch training losses.
    pub mean_batch_loss: f64,
    /// Full-dataset loss evaluated after the epoch's updates.
    pub dataset_loss: f64,
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// Full-dataset loss of the untrained parameters.
    pub initial_loss: f64,
    pub epochs: Vec<EpochStats>,
}

fn dense_targets(labels: &[Vec<usize>], ids: &[usize], n_terms: usize) -> Array2<f64> {
    let mut t = Array2::zeros((ids.len(), n_terms));
    for (row, &pi) in ids.iter().enumerate() {
        for &term in &labels[pi] {
            t[(row, term)] = 1.0;
        }
    }
    t
}

/// Mean BCE over the whole dataset, reusing one GCN branch evaluation.
pub fn dataset_loss(
    params: &ModelParams,
    graph: &GraphInputs,
    data: &TrainData,
) -> Result<f64> {
    let h_final = gcn_branch(params, graph)?.h_final().clone();
    let n_terms = graph.n_terms();
    let mut total = 0.0f64;
    let mut entries = 0usize;
    for chunk_start in (0..data.proteins.len()).step_by(256) {
        let chunk_end = (chunk_start + 256).min(data.proteins.len());
        let ids: Vec<usize> = (chunk_start..chunk_end).collect();
        let emb = data.embeddings.select(Axis(0), &ids);
        let p = project_batch(emb.view(), &params.w_proj, &params.b_proj);
        let logits = p.dot(&h_final.t());
        let targets = dense_targets(&data.labels, &ids, n_terms);
        total += bce_loss(&logits, &targets) * (ids.len() * n_terms) as f64;
        entries += ids.len() * n_terms;
    }
    Ok(total / entries as f64)
}

/// Trains from a fresh seeded initialization: protein order reshuffles every
/// epoch, batches keep the final partial chunk, and the shared GCN branch is
/// evaluated once per batch. `on_epoch` runs after each epoch (the CLI uses
/// it to write checkpoints); training aborts on a non-finite loss.
pub fn train<F>(
    cfg: &ModelConfig,
    graph: &GraphInputs,
    data: &TrainData,
    mut on_epoch: F,
) -> Result<TrainOutcome>
where
    F: FnMut(&EpochStats, &ModelParams) -> Result<()>,
{
    cfg.validate()?;
    data.validate(cfg)?;
    if graph.n_terms() != cfg.n_terms {
        return Err(Error::invalid(format!(
            "graph has {} terms, config says {}",
            graph.n_terms(),
            cfg.n_terms
        )));
    }

    let mut params = init_params(cfg);
    let mut state = AdamState::new(&params);
    let hp = AdamHyper::with_lr(cfg.lr);
    let mut shuffle_rng = tensor_rng(cfg.seed, STREAM_SHUFFLE);
    let mut order: Vec<usize> = (0..data.proteins.len()).collect();

    let initial_loss = dataset_loss(&params, graph, data)?;
    let mut epochs = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut weighted_loss = 0.0f64;
        for (batch_idx, ids) in order.chunks(cfg.batch_size).enumerate() {
            let emb = data.embeddings.select(Axis(0), ids);
            let targets = dense_targets(&data.labels, ids, cfg.n_terms);
            let cache = forward(&params, graph, emb.view())
                .map_err(|_| Error::NonFiniteLoss { epoch, batch: batch_idx })?;
            let loss = bce_loss(&cache.logits, &targets);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: batch_idx });
            }
            weighted_loss += loss * ids.len() as f64;
            let grads = backward(&params, graph, &cache, &targets);
            adam_step(&mut params, &grads, &mut state, &hp);
        }
        let stats = EpochStats {
            epoch,
            mean_batch_loss: weighted_loss / data.proteins.len() as f64,
            dataset_loss: dataset_loss(&params, graph, data)?,
        };
        on_epoch(&stats, &params)?;
        epochs.push(stats);
    }

    Ok(TrainOutcome {
        params,
        initial_loss,
        epochs,
    })
}

/// Scores every row of `emb`: n_proteins x n_terms, each entry in (0, 1).
///
/// Rows are computed independently (and in parallel), so a protein's scores
/// never depend on which other proteins share the call.
pub fn predict_batch(
    params: &ModelParams,
    graph: &GraphInputs,
    emb: ArrayView2<f64>,
) -> Result<Array2<f64>> {
    if emb.ncols() != params.w_proj.nrows() {
        return Err(Error::invalid(format!(
            "embedding dim {} does not match projection input {}",
            emb.ncols(),
            params.w_proj.nrows()
        )));
    }
    let h_final = gcn_branch(params, graph)?.h_final().clone();
    let mut scores = Array2::zeros((emb.nrows(), graph.n_terms()));
    scores
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            let p = project_sequence(emb.row(i), &params.w_proj, &params.b_proj);
            row.assign(&predict(&h_final, p.view()));
        });
    Ok(scores)
}
