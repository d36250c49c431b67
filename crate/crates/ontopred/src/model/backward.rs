//! Exact analytic gradients of the mean BCE loss with respect to every
//! parameter tensor. The ReLU subgradient at exactly 0 is taken as 0.

use ndarray::Array2;

use super::forward::{column_sums, ForwardCache};
use super::{GraphInputs, ModelParams};

/// Gradients for one batch, shaped like the parameters.
///
/// The chain: `dL/dlogit = (y - t) / (batch * N)`, split into the sequence
/// side (`dP = g H`, then through the projection) and the graph side
/// (`dH = g^T P`, then back through each GCN layer and the embedding).
pub fn backward(
    params: &ModelParams,
    graph: &GraphInputs,
    cache: &ForwardCache,
    targets: &Array2<f64>,
) -> ModelParams {
    assert_eq!(cache.y.dim(), targets.dim());
    let scale = 1.0 / (targets.nrows() * targets.ncols()) as f64;
    let g = (&cache.y - targets) * scale; // batch x N

    // sequence side
    let d_p = g.dot(cache.gcn.h_final()); // batch x d
    let grad_w_proj = cache.emb.t().dot(&d_p);
    let grad_b_proj = column_sums(&d_p);

    // graph side
    let mut d_h = g.t().dot(&cache.p); // N x d
    let n_layers = params.w_gcn.len();
    let mut grad_w_gcn: Vec<Array2<f64>> = vec![Array2::zeros((0, 0)); n_layers];
    for l in (0..n_layers).rev() {
        // hs[l+1] > 0 exactly where the pre-activation was > 0
        let mut d_z = d_h;
        d_z.zip_mut_with(&cache.gcn.hs[l + 1], |dz, &h| {
            if h <= 0.0 {
                *dz = 0.0;
            }
        });
        grad_w_gcn[l] = cache.gcn.ah[l].t().dot(&d_z);
        d_h = graph
            .ahat_t
            .matmul_dense(&d_z.dot(&params.w_gcn[l].t()).view());
    }
    let grad_w_embed = graph.onehot_t.matmul_dense(&d_h.view());

    ModelParams {
        w_embed: grad_w_embed,
        w_gcn: grad_w_gcn,
        w_proj: grad_w_proj,
        b_proj: grad_b_proj,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bce_loss, forward, init_params, GraphInputs, ModelConfig};
    use crate::sparse::CsrMatrix;
    use ndarray::ArrayView2;
    use rand::prelude::*;
    use rand_chacha::ChaCha20Rng;

    /// Random row-stochastic CSR with self-loops, plus a random one-hot-like
    /// indicator, standing in for a real graph.
    fn random_graph_inputs(n: usize, seed: u64) -> GraphInputs {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut adj_rows = Vec::with_capacity(n);
        let mut hot_rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut cols = vec![i];
            for j in 0..n {
                if j != i && rng.random::<f64>() < 0.3 {
                    cols.push(j);
                }
            }
            cols.sort_unstable();
            let w = 1.0 / cols.len() as f64;
            adj_rows.push(cols.iter().map(|&c| (c, w)).collect::<Vec<_>>());
            let mut hot = vec![i];
            for j in 0..i {
                if rng.random::<f64>() < 0.4 {
                    hot.push(j);
                }
            }
            hot.sort_unstable();
            hot_rows.push(hot);
        }
        let onehot = CsrMatrix::from_index_rows(n, &hot_rows);
        GraphInputs {
            ahat_t: CsrMatrix::from_rows(n, &adj_rows).transpose(),
            ahat: CsrMatrix::from_rows(n, &adj_rows),
            onehot_t: onehot.transpose(),
            onehot,
        }
    }

    fn random_instance(
        seed: u64,
        n_layers: usize,
    ) -> (ModelConfig, GraphInputs, Array2<f64>, Array2<f64>) {
        let cfg = ModelConfig {
            n_terms: 6,
            d0: 3,
            d: 3,
            n_layers,
            seq_dim: 5,
            lr: 1e-3,
            epochs: 1,
            batch_size: 2,
            seed,
        };
        let graph = random_graph_inputs(cfg.n_terms, seed ^ 0x9e37);
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x7f4a);
        let emb: Vec<f64> = (0..2 * cfg.seq_dim)
            .map(|_| rng.random::<f64>() * 2.0 - 1.0)
            .collect();
        let emb = Array2::from_shape_vec((2, cfg.seq_dim), emb).unwrap();
        let targets: Vec<f64> = (0..2 * cfg.n_terms)
            .map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 })
            .collect();
        let targets = Array2::from_shape_vec((2, cfg.n_terms), targets).unwrap();
        (cfg, graph, emb, targets)
    }

    fn loss_of(
        params: &crate::model::ModelParams,
        graph: &GraphInputs,
        emb: &ArrayView2<f64>,
        targets: &Array2<f64>,
    ) -> f64 {
        let cache = forward(params, graph, *emb).unwrap();
        bce_loss(&cache.logits, targets)
    }

    /// Central finite differences over every entry of every tensor. The
    /// numeric oracle only exercises the forward pass, staying independent
    /// of the analytic chain it checks.
    #[test]
    fn gradients_match_finite_differences() {
        let step = 1e-5;
        for seed in 0..20u64 {
            let n_layers = 1 + (seed as usize % 2);
            let (cfg, graph, emb, targets) = random_instance(seed, n_layers);
            let params = init_params(&cfg);
            let cache = forward(&params, &graph, emb.view()).unwrap();
            let grads = backward(&params, &graph, &cache, &targets);

            let grad_tensors: Vec<Array2<f64>> = grads
                .tensors()
                .into_iter()
                .map(|(_, t)| t.clone())
                .collect();
            for (ti, (name, _)) in params.tensors().iter().enumerate() {
                let dim = grad_tensors[ti].dim();
                let mut numeric = Array2::zeros(dim);
                for r in 0..dim.0 {
                    for c in 0..dim.1 {
                        let mut plus = params.clone();
                        plus.tensors_mut()[ti][(r, c)] += step;
                        let mut minus = params.clone();
                        minus.tensors_mut()[ti][(r, c)] -= step;
                        numeric[(r, c)] = (loss_of(&plus, &graph, &emb.view(), &targets)
                            - loss_of(&minus, &graph, &emb.view(), &targets))
                            / (2.0 * step);
                    }
                }
                let denom = grad_tensors[ti]
                    .iter()
                    .chain(numeric.iter())
                    .fold(0.0f64, |m, &x| m.max(x.abs()))
                    .max(1e-12);
                let max_err = grad_tensors[ti]
                    .iter()
                    .zip(numeric.iter())
                    .fold(0.0f64, |m, (&a, &n)| m.max((a - n).abs()));
                assert!(
                    max_err / denom < 1e-5,
                    "seed {seed} tensor {name}: relative error {}",
                    max_err / denom
                );
            }
        }
    }

    #[test]
    fn saturated_perfect_fit_has_tiny_gradient() {
        let (cfg, graph, emb, _) = random_instance(99, 2);
        let mut params = init_params(&cfg);
        // all-positive weights and inputs keep every ReLU alive and every
        // logit large positive; with targets on the predicted side this is
        // the optimum, so gradients vanish
        for t in params.tensors_mut() {
            t.mapv_inplace(|x| x.abs() * 10.0 + 0.1);
        }
        let emb = emb.mapv(|x| x.abs() + 0.1);
        let cache = forward(&params, &graph, emb.view()).unwrap();
        assert!(cache.logits.iter().all(|&z| z > 60.0));
        let targets = cache.logits.mapv(|_| 1.0);
        let grads = backward(&params, &graph, &cache, &targets);
        let norm: f64 = grads
            .tensors()
            .iter()
            .map(|(_, t)| t.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        assert!(norm < 1e-6, "gradient norm {norm}");
    }

    #[test]
    fn duplicating_the_batch_leaves_mean_gradients_unchanged() {
        let (cfg, graph, emb, targets) = random_instance(7, 2);
        let params = init_params(&cfg);
        let cache = forward(&params, &graph, emb.view()).unwrap();
        let grads = backward(&params, &graph, &cache, &targets);

        let emb2 = ndarray::concatenate(ndarray::Axis(0), &[emb.view(), emb.view()]).unwrap();
        let targets2 =
            ndarray::concatenate(ndarray::Axis(0), &[targets.view(), targets.view()]).unwrap();
        let cache2 = forward(&params, &graph, emb2.view()).unwrap();
        let grads2 = backward(&params, &graph, &cache2, &targets2);

        for ((_, a), (_, b)) in grads.tensors().iter().zip(grads2.tensors()) {
            let max_diff = a
                .iter()
                .zip(b.iter())
                .fold(0.0f64, |m, (&x, &y)| m.max((x - y).abs()));
            assert!(max_diff < 1e-14, "max diff {max_diff}");
        }
    }
}
