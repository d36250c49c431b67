//! Scratch probe for training dynamics (will become the polished example).

use ontopred::annotations;
use ontopred::go_features::{build_adjacency, build_onehot_features, compute_freq, compute_ic};
use ontopred::model::{train, GraphInputs, ModelConfig, TrainData};
use ontopred::ontology::Namespace;
use ontopred::synth;

fn main() {
    let corpus = synth::separable_corpus(20, 200, 32, 64);
    let g = &corpus.graph;
    eprintln!(
        "graph: {} terms, {} edges, depth {}",
        g.n_terms(),
        g.n_edges(),
        g.max_depth(Namespace::Mfo).unwrap()
    );
    let u = annotations::count_annotations(&corpus.propagated, g).unwrap();
    let freq = compute_freq(&u, g);
    let ic = compute_ic(&freq, g, Namespace::Mfo).unwrap();
    let mut adj = build_adjacency(&u, &ic, g);
    let graph = GraphInputs::new(&build_onehot_features(g), adj.normalize().clone());
    let cfg = ModelConfig {
        n_terms: g.n_terms(),
        d0: 8,
        d: 8,
        n_layers: 2,
        seq_dim: 32,
        lr: 1e-3,
        epochs: 10,
        batch_size: 32,
        seed: 64,
    };
    let data = TrainData {
        proteins: corpus.propagated.proteins().to_vec(),
        embeddings: corpus.embeddings.vectors.clone(),
        labels: corpus.propagated.all_labels().to_vec(),
    };
    let outcome = train(&cfg, &graph, &data, |stats, _| {
        eprintln!(
            "epoch {:2}  batch-mean {:.4}  dataset {:.4}",
            stats.epoch, stats.mean_batch_loss, stats.dataset_loss
        );
        Ok(())
    })
    .unwrap();
    eprintln!(
        "initial {:.4} -> final {:.4} (ratio {:.3})",
        outcome.initial_loss,
        outcome.epochs.last().unwrap().dataset_loss,
        outcome.epochs.last().unwrap().dataset_loss / outcome.initial_loss
    );
}
