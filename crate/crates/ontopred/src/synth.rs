//! Synthetic fixtures: a toy diamond ontology, random DAG generators, and a
//! linearly separable training corpus. Used by the examples, the test
//! suites, and anyone who wants runnable input without real GO data.

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

use crate::annotations::{
    parse_annotations, propagate_true_path, AnnotationRecord, AnnotationSet,
    EXPERIMENTAL_EVIDENCE,
};
use crate::embeddings::EmbeddingTable;
use crate::ontology::{parse_obo, OntologyGraph};

/// Four-term diamond: R at the top, A and B below it, C below both.
/// Accession order (hence index order) is R < A < B < C.
pub const DIAMOND_OBO: &str = "\
[Term]
id: GO:0000001
name: R
namespace: molecular_function

[Term]
id: GO:0000002
name: A
namespace: molecular_function
is_a: GO:0000001

[Term]
id: GO:0000003
name: B
namespace: molecular_function
is_a: GO:0000001

[Term]
id: GO:0000004
name: C
namespace: molecular_function
is_a: GO:0000002
is_a: GO:0000003
";

/// Three proteins annotated to C, A, and B respectively.
pub const DIAMOND_ANNOTATIONS: &str = "\
p1\tGO:0000004\tIDA
p2\tGO:0000002\tIDA
p3\tGO:0000003\tTAS
";

pub fn diamond_graph() -> OntologyGraph {
    parse_obo(DIAMOND_OBO).expect("fixture parses")
}

/// Random single-namespace DAG with `n` terms.
///
/// Term i's parents are drawn from terms 0..i, so the result is acyclic by
/// construction and generation order equals accession (index) order. A few
/// percent of terms are extra roots. `avg_parents` sets the mean parent
/// count of non-root terms (1 to roughly `2 * avg_parents - 1`).
pub fn random_dag(n: usize, avg_parents: f64, seed: u64) -> OntologyGraph {
    assert!(n >= 1);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let extra_max = ((avg_parents - 1.0) * 2.0).round().max(0.0) as usize;
    let mut doc = String::new();
    for i in 0..n {
        doc.push_str(&format!(
            "[Term]\nid: GO:{:07}\nname: t{i}\nnamespace: molecular_function\n",
            i + 1
        ));
        let is_root = i == 0 || rng.random::<f64>() < 0.03;
        if !is_root {
            let k = (1 + rng.random_range(0..=extra_max)).min(i);
            let mut parents: Vec<usize> = Vec::with_capacity(k);
            while parents.len() < k {
                let p = rng.random_range(0..i);
                if !parents.contains(&p) {
                    parents.push(p);
                }
            }
            parents.sort_unstable();
            for p in parents {
                doc.push_str(&format!("is_a: GO:{:07}\n", p + 1));
            }
        }
        doc.push('\n');
    }
    parse_obo(&doc).expect("generated document is valid")
}

/// Random direct annotations over a graph: each protein gets 1..=`max_direct`
/// distinct terms with random experimental evidence codes.
pub fn random_annotations(
    g: &OntologyGraph,
    n_proteins: usize,
    max_direct: usize,
    seed: u64,
) -> Vec<AnnotationRecord> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    for p in 0..n_proteins {
        let protein = format!("p{p:03}");
        let k = rng.random_range(1..=max_direct);
        for _ in 0..k {
            let term = g.term(rng.random_range(0..g.n_terms()));
            let evidence = EXPERIMENTAL_EVIDENCE[rng.random_range(0..8)];
            records.push(AnnotationRecord {
                protein: protein.clone(),
                term,
                evidence: evidence.to_string(),
            });
        }
    }
    records
}

/// A corpus the model can drive to near-zero training loss: each protein's
/// embedding is a noisy linear image of its propagated label vector.
pub struct SeparableCorpus {
    pub graph: OntologyGraph,
    /// Direct (unpropagated) records, experimental evidence only.
    pub records: Vec<AnnotationRecord>,
    /// Propagated label sets aligned with `embeddings.ids`.
    pub propagated: AnnotationSet,
    pub embeddings: EmbeddingTable,
}

impl SeparableCorpus {
    pub fn annotations_tsv(&self) -> String {
        self.records
            .iter()
            .map(|r| format!("{}\t{}\t{}\n", r.protein, r.term, r.evidence))
            .collect()
    }

    /// Writes `ontology.obo`, `annotations.tsv`, and `embeddings.tsv` into
    /// `dir`, returning the three paths.
    pub fn write_files(
        &self,
        dir: &std::path::Path,
    ) -> crate::Result<(std::path::PathBuf, std::path::PathBuf, std::path::PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let ontology = dir.join("ontology.obo");
        let annotations = dir.join("annotations.tsv");
        let embeddings = dir.join("embeddings.tsv");
        std::fs::write(&ontology, self.graph.to_obo_string())?;
        std::fs::write(&annotations, self.annotations_tsv())?;
        let mut buf = Vec::new();
        crate::embeddings::write_embeddings_tsv(&mut buf, &self.embeddings)?;
        std::fs::write(&embeddings, buf)?;
        Ok((ontology, annotations, embeddings))
    }
}

/// Builds the separable corpus: `n_terms` in a random DAG, `n_proteins`
/// proteins, `seq_dim`-dimensional embeddings.
///
/// Proteins fall into a handful of families sharing one label set, so the
/// mapping from embedding to labels is low-rank and a short training run
/// can drive the loss close to zero.
pub fn separable_corpus(
    n_terms: usize,
    n_proteins: usize,
    seq_dim: usize,
    seed: u64,
) -> SeparableCorpus {
    let graph = random_dag(n_terms, 1.4, seed);
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed_c0de);

    // two families with disjoint direct label pairs, drawn from shallow
    // terms so the propagated label sets stay small
    let n_families = 2usize.min(n_proteins);
    let depths = graph.depths();
    let mut candidates: Vec<usize> = (0..n_terms).filter(|&t| depths[t] <= 3).collect();
    if candidates.len() < 2 * n_families {
        candidates = (0..n_terms).collect();
    }
    let mut used: Vec<usize> = Vec::new();
    let family_labels: Vec<Vec<usize>> = (0..n_families)
        .map(|_| {
            let mut terms: Vec<usize> = Vec::new();
            while terms.len() < 2.min(n_terms / n_families) {
                let t = candidates[rng.random_range(0..candidates.len())];
                if !terms.contains(&t) && !used.contains(&t) {
                    terms.push(t);
                }
            }
            used.extend(terms.iter().copied());
            terms
        })
        .collect();

    let mut records = Vec::new();
    for p in 0..n_proteins {
        let protein = format!("p{p:03}");
        for &t in &family_labels[p % n_families] {
            records.push(AnnotationRecord {
                protein: protein.clone(),
                term: graph.term(t),
                evidence: "IDA".to_string(),
            });
        }
    }

    let text: String = records
        .iter()
        .map(|r| format!("{}\t{}\t{}\n", r.protein, r.term, r.evidence))
        .collect();
    let parsed = parse_annotations(&text).expect("generated records are valid");
    let (set, _) = AnnotationSet::from_records(&parsed, &graph);
    let propagated = propagate_true_path(&set, &graph);

    // fixed random linear map from label space to embedding space
    let mix_scale = 2.0;
    let noise_scale = 0.05;
    let mix: Vec<f64> = (0..seq_dim * n_terms)
        .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * mix_scale)
        .collect();
    let mix = Array2::from_shape_vec((n_terms, seq_dim), mix).expect("sized above");

    let mut vectors = Array2::zeros((n_proteins, seq_dim));
    for (pi, _) in propagated.proteins().iter().enumerate() {
        for &t in propagated.labels(pi) {
            let mut row = vectors.row_mut(pi);
            row += &mix.row(t);
        }
        for j in 0..seq_dim {
            vectors[(pi, j)] += (rng.random::<f64>() * 2.0 - 1.0) * noise_scale;
        }
    }
    let embeddings = EmbeddingTable::new(propagated.proteins().to_vec(), vectors);

    SeparableCorpus {
        graph,
        records,
        propagated,
        embeddings,
    }
}

/// GO-sized random DAG for scale tests: a random recursive tree (shallow,
/// like the real ontology) plus extra `is_a` edges, roughly
/// `extra_per_term` of them per term.
pub fn scale_dag(n: usize, extra_per_term: f64, seed: u64) -> OntologyGraph {
    assert!(n >= 2);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, plist) in parents.iter_mut().enumerate().skip(1) {
        plist.push(rng.random_range(0..i));
        let mut extra = extra_per_term;
        while extra > 0.0 && rng.random::<f64>() < extra.min(1.0) {
            let p = rng.random_range(0..i);
            if !plist.contains(&p) {
                plist.push(p);
            }
            extra -= 1.0;
        }
        plist.sort_unstable();
    }

    let mut doc = String::with_capacity(n * 80);
    for (i, plist) in parents.iter().enumerate() {
        doc.push_str(&format!(
            "[Term]\nid: GO:{:07}\nname: t{i}\nnamespace: biological_process\n",
            i + 1
        ));
        for &p in plist {
            doc.push_str(&format!("is_a: GO:{:07}\n", p + 1));
        }
        doc.push('\n');
    }
    parse_obo(&doc).expect("generated document is valid")
}
