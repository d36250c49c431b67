//! Forward pass: sparse term embedding, GCN layers, sequence projection,
//! dot-product sigmoid prediction, and the stable BCE loss.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

use super::{GraphInputs, ModelParams};

/// Dense initial node features: row i is the sum of the embedding rows of
/// term i and its ancestors (sparse-dense product with the one-hot matrix).
pub fn embed_terms(onehot: &CsrMatrix, w_embed: &Array2<f64>) -> Array2<f64> {
    onehot.matmul_dense(&w_embed.view())
}

/// Per-layer activations kept for backpropagation.
#[derive(Debug, Clone)]
pub struct GcnCache {
    /// `hs[0]` is the dense input; `hs[l]` the post-ReLU output of layer l.
    pub hs: Vec<Array2<f64>>,
    /// `ah[l] = ahat * hs[l]`, the aggregation feeding layer l+1.
    pub ah: Vec<Array2<f64>>,
}

impl GcnCache {
    pub fn h_final(&self) -> &Array2<f64> {
        self.hs.last().expect("at least the input")
    }
}

/// Applies `h = relu(ahat * h * w)` once per layer. Aborts with a
/// diagnostic if any pre-activation goes non-finite.
pub fn gcn_forward(
    h0: Array2<f64>,
    ahat: &CsrMatrix,
    w_gcn: &[Array2<f64>],
) -> Result<GcnCache> {
    let mut hs = vec![h0];
    let mut ah = Vec::with_capacity(w_gcn.len());
    for (l, w) in w_gcn.iter().enumerate() {
        let h = hs.last().expect("non-empty");
        assert_eq!(
            h.ncols(),
            w.nrows(),
            "GCN layer {} shape mismatch: {} columns into {} rows",
            l + 1,
            h.ncols(),
            w.nrows()
        );
        let aggregated = ahat.matmul_dense(&h.view());
        let z = aggregated.dot(w);
        if !z.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite activation in GCN layer {}",
                l + 1
            )));
        }
        ah.push(aggregated);
        hs.push(z.mapv(|x| x.max(0.0)));
    }
    Ok(GcnCache { hs, ah })
}

/// Convenience: the full graph branch, input features through the last GCN
/// layer. Protein-independent, so callers compute it once and reuse it.
pub fn gcn_branch(params: &ModelParams, graph: &GraphInputs) -> Result<GcnCache> {
    let h0 = embed_terms(&graph.onehot, &params.w_embed);
    gcn_forward(h0, &graph.ahat, &params.w_gcn)
}

/// Linear projection of one sequence embedding into the GCN width.
pub fn project_sequence(
    e: ArrayView1<f64>,
    w_proj: &Array2<f64>,
    b_proj: &Array2<f64>,
) -> Array1<f64> {
    assert_eq!(
        e.len(),
        w_proj.nrows(),
        "embedding length {} does not match projection input {}",
        e.len(),
        w_proj.nrows()
    );
    e.dot(w_proj) + b_proj.row(0)
}

/// Batched projection (used on the training path).
pub fn project_batch(
    e: ArrayView2<f64>,
    w_proj: &Array2<f64>,
    b_proj: &Array2<f64>,
) -> Array2<f64> {
    assert_eq!(e.ncols(), w_proj.nrows());
    e.dot(w_proj) + &b_proj.row(0)
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Per-term scores for one protein: `sigmoid(H_final . p)`.
pub fn predict(h_final: &Array2<f64>, p: ArrayView1<f64>) -> Array1<f64> {
    assert_eq!(h_final.ncols(), p.len());
    h_final.dot(&p).mapv(sigmoid)
}

/// Mean binary cross entropy over all batch x N entries, computed from
/// logits in the overflow-safe form.
pub fn bce_loss(logits: &Array2<f64>, targets: &Array2<f64>) -> f64 {
    assert_eq!(logits.dim(), targets.dim());
    let total: f64 = logits
        .iter()
        .zip(targets.iter())
        .map(|(&z, &t)| z.max(0.0) - z * t + (-z.abs()).exp().ln_1p())
        .sum();
    total / logits.len() as f64
}

/// Everything the backward pass needs from one training step.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub gcn: GcnCache,
    /// The raw batch embeddings (batch x seq_dim).
    pub emb: Array2<f64>,
    /// Projected sequences (batch x d).
    pub p: Array2<f64>,
    /// batch x N.
    pub logits: Array2<f64>,
    /// Sigmoid of the logits.
    pub y: Array2<f64>,
}

/// Full forward pass for a batch of proteins.
pub fn forward(
    params: &ModelParams,
    graph: &GraphInputs,
    emb_batch: ArrayView2<f64>,
) -> Result<ForwardCache> {
    let gcn = gcn_branch(params, graph)?;
    let p = project_batch(emb_batch, &params.w_proj, &params.b_proj);
    let logits = p.dot(&gcn.h_final().t());
    if !logits.iter().all(|x| x.is_finite()) {
        return Err(Error::invalid("non-finite prediction logits"));
    }
    let y = logits.mapv(sigmoid);
    Ok(ForwardCache {
        gcn,
        emb: emb_batch.to_owned(),
        p,
        logits,
        y,
    })
}

/// Column sums as a 1 x d row.
pub(super) fn column_sums(m: &Array2<f64>) -> Array2<f64> {
    m.sum_axis(Axis(0)).insert_axis(Axis(0))
}
