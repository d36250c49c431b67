//! Shared assembly of the graph-side model inputs for one namespace:
//! restrict the ontology, resolve and propagate annotations, remove isolated
//! terms, then derive counts, IC, the weighted adjacency, and node features.

use crate::annotations::{
    count_annotations, propagate_true_path, AnnotationRecord, AnnotationSet, CountTable,
};
use crate::error::Result;
use crate::go_features::{
    build_adjacency, build_onehot_features, compute_freq, compute_ic, ICTable,
    NodeFeatureMatrix, WeightedAdjacency,
};
use crate::model::GraphInputs;
use crate::ontology::{Namespace, OntologyGraph};

/// Everything the model and the graph exports need for one namespace.
#[derive(Debug)]
pub struct GraphBundle {
    /// Namespace-restricted, isolation-filtered graph.
    pub graph: OntologyGraph,
    pub namespace: Namespace,
    /// Propagated annotations over the final graph's indices.
    pub annotations: AnnotationSet,
    pub counts: CountTable,
    pub ic: ICTable,
    pub adjacency: WeightedAdjacency,
    pub onehot: NodeFeatureMatrix,
    pub max_depth: usize,
    /// Annotation records whose term is missing from the namespace graph.
    pub dropped_records: usize,
    /// Terms removed by the isolation rule.
    pub dropped_isolated: usize,
}

impl GraphBundle {
    /// Restricts `full` to `ns`, resolves `records` (already evidence-
    /// filtered by the caller), propagates, drops isolated terms, and builds
    /// the numeric inputs.
    pub fn build(
        full: &OntologyGraph,
        records: &[AnnotationRecord],
        ns: Namespace,
    ) -> Result<GraphBundle> {
        let (ns_graph, _) = full.restrict_to_namespace(ns);
        let max_depth = ns_graph.max_depth(ns)?;

        let (raw_set, report) = AnnotationSet::from_records(records, &ns_graph);
        let propagated = propagate_true_path(&raw_set, &ns_graph);

        let annotated = propagated.annotated_mask(ns_graph.n_terms());
        let (graph, remap) = ns_graph.drop_isolated(&annotated);
        let dropped_isolated = ns_graph.n_terms() - graph.n_terms();
        let annotations = propagated.remap_terms(&remap);

        let counts = count_annotations(&annotations, &graph)?;
        let freq = compute_freq(&counts, &graph);
        let ic = compute_ic(&freq, &graph, ns)?;
        let adjacency = build_adjacency(&counts, &ic, &graph);
        let onehot = build_onehot_features(&graph);

        Ok(GraphBundle {
            graph,
            namespace: ns,
            annotations,
            counts,
            ic,
            adjacency,
            onehot,
            max_depth,
            dropped_records: report.dropped_records,
            dropped_isolated,
        })
    }

    /// Sparse inputs for the model (normalizes the adjacency).
    pub fn graph_inputs(&mut self) -> GraphInputs {
        GraphInputs::new(&self.onehot, self.adjacency.normalize().clone())
    }

    /// Fraction of namespace terms kept after isolation filtering.
    pub fn retained_fraction(&self) -> f64 {
        let before = self.graph.n_terms() + self.dropped_isolated;
        self.graph.n_terms() as f64 / before as f64
    }
}
