//! Scratch seed verification through the synth path (temporary).

use ontopred::annotations;
use ontopred::go_features::{build_adjacency, build_onehot_features, compute_freq, compute_ic};
use ontopred::metrics::fmax_sweep;
use ontopred::model::{predict_batch, train, GraphInputs, ModelConfig, TrainData};
use ontopred::ontology::Namespace;
use ontopred::synth;

fn run(seed: u64, d: usize, epochs: usize) {
    let corpus = synth::separable_corpus(20, 200, 32, seed);
    let g = &corpus.graph;
    let depth = g.max_depth(Namespace::Mfo).unwrap();
    let d = if d == 0 { depth.min(80) } else { d };
    let u = annotations::count_annotations(&corpus.propagated, g).unwrap();
    let freq = compute_freq(&u, g);
    let ic = compute_ic(&freq, g, Namespace::Mfo).unwrap();
    let mut adj = build_adjacency(&u, &ic, g);
    let graph = GraphInputs::new(&build_onehot_features(g), adj.normalize().clone());
    let cfg = ModelConfig {
        n_terms: g.n_terms(),
        d0: d,
        d,
        n_layers: 2,
        seq_dim: 32,
        lr: 1e-3,
        epochs,
        batch_size: 32,
        seed,
    };
    let data = TrainData {
        proteins: corpus.propagated.proteins().to_vec(),
        embeddings: corpus.embeddings.vectors.clone(),
        labels: corpus.propagated.all_labels().to_vec(),
    };
    let out = train(&cfg, &graph, &data, |_, _| Ok(())).unwrap();
    let fin = out.epochs.last().unwrap().dataset_loss;
    let scores = predict_batch(&out.params, &graph, data.embeddings.view()).unwrap();
    let (fmax, _, _) = fmax_sweep(&scores.view(), &data.labels).unwrap();
    println!(
        "seed {seed} d {d} ep {epochs}: init {:.3} final {:.3} ratio {:.3} fmax {:.3} depth {depth}",
        out.initial_loss,
        fin,
        fin / out.initial_loss,
        fmax
    );
}

fn main() {
    println!("== d 16, 10 epochs (acceptance shape) ==");
    for seed in 1u64..=20 {
        run(seed, 16, 10);
    }
    println!("== d = depth, 30 epochs (cli pipeline shape) ==");
    for seed in 1u64..=20 {
        run(seed, 0, 30);
    }
}
