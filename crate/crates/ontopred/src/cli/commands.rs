//! The six subcommand implementations.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, Axis};

use crate::annotations::{
    filter_experimental, filter_training_evidence, parse_annotations, propagate_true_path,
    write_propagated_tsv, AnnotationSet,
};
use crate::embeddings::read_embeddings;
use crate::error::Error;
use crate::go_features::{write_adjacency_tsv, write_ic_tsv};
use crate::metrics::{
    evaluate as run_evaluation, propagate_scores as make_consistent, read_predictions_tsv,
    write_predictions_tsv,
};
use crate::model::{
    load_checkpoint, predict_batch, save_checkpoint, train as run_training, ModelConfig,
    TrainData, DEFAULT_DEPTH_CAP,
};
use crate::ontology::{parse_obo, Namespace, OntologyGraph};
use crate::pipeline::GraphBundle;

use super::manifest::Manifest;
use super::{
    BuildGraphArgs, CliError, Ctx, EvaluateArgs, OntologyStatsArgs, PredictArgs, PropagateArgs,
    TrainArgs,
};

type CmdResult = Result<(), CliError>;

fn load_ontology(path: &Path) -> Result<OntologyGraph, CliError> {
    let text = fs::read_to_string(path)?;
    Ok(parse_obo(&text)?)
}

fn load_records(path: &Path) -> Result<Vec<crate::annotations::AnnotationRecord>, CliError> {
    let text = fs::read_to_string(path)?;
    Ok(parse_annotations(&text)?)
}

/// Output sink: named file or stdout.
fn write_report(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

pub(super) fn ontology_stats(ctx: &Ctx, args: OntologyStatsArgs) -> CmdResult {
    let ontology_path = ctx.require_path(args.ontology, "ontology")?;
    let out = ctx.path(args.out, "out");
    let mut manifest = Manifest::new("ontology-stats");
    manifest.input("ontology", &ontology_path)?;

    let g = load_ontology(&ontology_path)?;
    let depths = g.depths();
    let mut report = String::new();
    report.push_str(&format!("terms\t{}\n", g.n_terms()));
    report.push_str(&format!("edges\t{}\n", g.n_edges()));
    report.push_str(&format!("obsolete_dropped\t{}\n", g.obsolete_dropped()));
    for ns in Namespace::ALL {
        let terms: Vec<usize> = (0..g.n_terms()).filter(|&i| g.namespace(i) == ns).collect();
        if terms.is_empty() {
            continue;
        }
        let key = ns.short_name().to_lowercase();
        let edges: usize = terms.iter().map(|&i| g.parents(i).len()).sum();
        let max_depth = terms.iter().map(|&i| depths[i]).max().unwrap_or(0);
        let roots: Vec<String> = g
            .roots(ns)
            .into_iter()
            .map(|i| g.term(i).accession())
            .collect();
        report.push_str(&format!("{key}.terms\t{}\n", terms.len()));
        report.push_str(&format!("{key}.edges\t{edges}\n"));
        report.push_str(&format!("{key}.max_depth\t{max_depth}\n"));
        report.push_str(&format!("{key}.roots\t{}\n", roots.join(",")));
    }
    write_report(&out, &report)?;
    if let Some(path) = &out {
        manifest.write_next_to(path)?;
    }
    Ok(())
}

pub(super) fn propagate(ctx: &Ctx, args: PropagateArgs) -> CmdResult {
    let ontology_path = ctx.require_path(args.ontology, "ontology")?;
    let annotations_path = ctx.require_path(args.annotations, "annotations")?;
    let out = ctx.require_path(args.out, "out")?;
    let experimental_only = ctx.flag(args.experimental_only, "experimental-only");

    let mut manifest = Manifest::new("propagate");
    manifest.input("ontology", &ontology_path)?;
    manifest.input("annotations", &annotations_path)?;
    manifest.set("experimental_only", experimental_only);

    let g = load_ontology(&ontology_path)?;
    let mut records = load_records(&annotations_path)?;
    if experimental_only {
        let before = records.len();
        records = filter_experimental(records);
        manifest.set("records_dropped_by_evidence", before - records.len());
    }
    let (set, report) = AnnotationSet::from_records(&records, &g);
    if report.dropped_records > 0 {
        eprintln!(
            "warning: dropped {} records with terms absent from the ontology ({} distinct)",
            report.dropped_records,
            report.unknown_terms.len()
        );
    }
    let propagated = propagate_true_path(&set, &g);

    let mut buf = Vec::new();
    write_propagated_tsv(&mut buf, &propagated, &g, &records)?;
    fs::write(&out, buf)?;

    manifest.set("proteins", propagated.n_proteins());
    manifest.set("records_dropped_unknown_term", report.dropped_records);
    manifest.write_next_to(&out)?;
    Ok(())
}

/// Shared front half of build-graph, train, and predict: evidence-filtered
/// records through the namespace bundle.
fn build_bundle(
    ontology_path: &Path,
    annotations_path: &Path,
    ns: Namespace,
) -> Result<GraphBundle, CliError> {
    let g = load_ontology(ontology_path)?;
    let records = load_records(annotations_path)?;
    let before = records.len();
    let records = filter_training_evidence(records);
    let dropped_evidence = before - records.len();
    if dropped_evidence > 0 {
        eprintln!("warning: dropped {dropped_evidence} records with non-experimental evidence");
    }
    let bundle = GraphBundle::build(&g, &records, ns)?;
    if bundle.dropped_records > 0 {
        eprintln!(
            "warning: dropped {} records with terms outside the {ns} graph",
            bundle.dropped_records
        );
    }
    Ok(bundle)
}

fn describe_bundle(manifest: &mut Manifest, bundle: &GraphBundle) {
    manifest.set("namespace", bundle.namespace);
    manifest.set("n_terms", bundle.graph.n_terms());
    manifest.set("max_depth", bundle.max_depth);
    manifest.set("dropped_isolated_terms", bundle.dropped_isolated);
    manifest.set("retained_fraction", bundle.retained_fraction());
    manifest.set("records_dropped_unknown_term", bundle.dropped_records);
    manifest.set("counts_scope", "post_isolation_filter");
}

pub(super) fn build_graph(ctx: &Ctx, args: BuildGraphArgs) -> CmdResult {
    let ontology_path = ctx.require_path(args.ontology, "ontology")?;
    let annotations_path = ctx.require_path(args.annotations, "annotations")?;
    let ns: Namespace = ctx.require(args.namespace, "namespace")?;
    let out_dir = ctx.require_path(args.out, "out")?;

    let mut manifest = Manifest::new("build-graph");
    manifest.input("ontology", &ontology_path)?;
    manifest.input("annotations", &annotations_path)?;

    let bundle = build_bundle(&ontology_path, &annotations_path, ns)?;
    fs::create_dir_all(&out_dir)?;

    let adjacency_path = out_dir.join("adjacency.tsv");
    let mut buf = Vec::new();
    write_adjacency_tsv(&mut buf, &bundle.adjacency, &bundle.graph)?;
    fs::write(&adjacency_path, buf)?;

    let mut buf = Vec::new();
    write_ic_tsv(&mut buf, &bundle.ic, &bundle.graph)?;
    fs::write(out_dir.join("ic.tsv"), buf)?;

    describe_bundle(&mut manifest, &bundle);
    manifest.set("log_base", "e");
    let root_freq = bundle
        .graph
        .roots(ns)
        .iter()
        .map(|&r| bundle.ic.freq[r])
        .fold(0.0f64, f64::max);
    manifest.set("zero_freq_prob_floor", 1.0 / (root_freq + 1.0));
    manifest.set("zero_count_prior_floor", 0.0);
    manifest.set("zero_ic_share_rule", "uniform_over_children");
    manifest.write_next_to(&adjacency_path)?;
    Ok(())
}

/// Inner join of the bundle's proteins with the embedding table, in
/// annotation order. Proteins without an embedding row are dropped.
fn join_training_data(
    bundle: &GraphBundle,
    table: &crate::embeddings::EmbeddingTable,
) -> (TrainData, usize) {
    let index: HashMap<&str, usize> = table
        .ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut proteins = Vec::new();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut missing = 0usize;
    for (pi, protein) in bundle.annotations.proteins().iter().enumerate() {
        match index.get(protein.as_str()) {
            Some(&row) => {
                proteins.push(protein.clone());
                rows.push(row);
                labels.push(bundle.annotations.labels(pi).to_vec());
            }
            None => missing += 1,
        }
    }
    let embeddings = table.vectors.select(Axis(0), &rows);
    (
        TrainData {
            proteins,
            embeddings,
            labels,
        },
        missing,
    )
}

pub(super) fn train(ctx: &Ctx, args: TrainArgs) -> CmdResult {
    let ontology_path = ctx.require_path(args.ontology, "ontology")?;
    let annotations_path = ctx.require_path(args.annotations, "annotations")?;
    let embeddings_path = ctx.require_path(args.embeddings, "embeddings")?;
    let ns: Namespace = ctx.require(args.namespace, "namespace")?;
    let out_dir = ctx.require_path(args.out, "out")?;
    let epochs = ctx.parse_or(args.epochs, "epochs", 10usize)?;
    let batch_size = ctx.parse_or(args.batch_size, "batch-size", 32usize)?;
    let lr = ctx.parse_or(args.lr, "lr", 1e-3)?;
    let layers = ctx.parse_or(args.layers, "layers", 2usize)?;
    let seed = ctx.parse_or(args.seed, "seed", 42u64)?;
    let depth_cap = ctx.parse_or(args.depth_cap, "depth-cap", DEFAULT_DEPTH_CAP)?;

    let mut manifest = Manifest::new("train");
    manifest.input("ontology", &ontology_path)?;
    manifest.input("annotations", &annotations_path)?;
    manifest.input("embeddings", &embeddings_path)?;

    let mut bundle = build_bundle(&ontology_path, &annotations_path, ns)?;
    let table = read_embeddings(&embeddings_path)?;
    let (data, missing) = join_training_data(&bundle, &table);
    if missing > 0 {
        eprintln!("warning: dropped {missing} annotated proteins without embeddings");
    }

    let mut cfg = ModelConfig::for_depth(
        bundle.graph.n_terms(),
        bundle.max_depth,
        depth_cap,
        table.dim(),
        seed,
    );
    cfg.epochs = epochs;
    cfg.batch_size = batch_size;
    cfg.lr = lr;
    cfg.n_layers = layers;

    let graph = bundle.graph_inputs();
    fs::create_dir_all(&out_dir)?;

    let mut log = String::from("#epoch\tmean_batch_loss\tdataset_loss\n");
    let outcome = run_training(&cfg, &graph, &data, |stats, params| {
        let path = out_dir.join(format!("checkpoint_epoch_{:03}.txt", stats.epoch));
        let mut buf = Vec::new();
        save_checkpoint(&mut buf, params)?;
        fs::write(path, buf)?;
        Ok(())
    })
    .map_err(CliError::Data)?;

    log.push_str(&format!("0\t-\t{}\n", outcome.initial_loss));
    for stats in &outcome.epochs {
        log.push_str(&format!(
            "{}\t{}\t{}\n",
            stats.epoch, stats.mean_batch_loss, stats.dataset_loss
        ));
    }
    fs::write(out_dir.join("train_log.tsv"), log)?;

    let model_path = out_dir.join("model.txt");
    let mut buf = Vec::new();
    save_checkpoint(&mut buf, &outcome.params)?;
    fs::write(&model_path, buf)?;

    describe_bundle(&mut manifest, &bundle);
    manifest.set("d0", cfg.d0);
    manifest.set("d", cfg.d);
    manifest.set("n_layers", cfg.n_layers);
    manifest.set("seq_dim", cfg.seq_dim);
    manifest.set("epochs", cfg.epochs);
    manifest.set("batch_size", cfg.batch_size);
    manifest.set("lr", cfg.lr);
    manifest.set("seed", cfg.seed);
    manifest.set("training_proteins", data.proteins.len());
    manifest.set("proteins_without_embeddings", missing);
    manifest.write_next_to(&model_path)?;
    Ok(())
}

pub(super) fn predict(ctx: &Ctx, args: PredictArgs) -> CmdResult {
    let ontology_path = ctx.require_path(args.ontology, "ontology")?;
    let annotations_path = ctx.require_path(args.annotations, "annotations")?;
    let embeddings_path = ctx.require_path(args.embeddings, "embeddings")?;
    let checkpoint_path = ctx.require_path(args.checkpoint, "checkpoint")?;
    let ns: Namespace = ctx.require(args.namespace, "namespace")?;
    let out = ctx.require_path(args.out, "out")?;
    let score_floor = ctx.parse_or(args.score_floor, "score-floor", 0.01)?;
    let propagate = ctx.flag(args.propagate_scores, "propagate-scores");

    let mut manifest = Manifest::new("predict");
    manifest.input("ontology", &ontology_path)?;
    manifest.input("annotations", &annotations_path)?;
    manifest.input("embeddings", &embeddings_path)?;
    manifest.input("checkpoint", &checkpoint_path)?;

    let mut bundle = build_bundle(&ontology_path, &annotations_path, ns)?;
    let (header, params) = load_checkpoint(&fs::read_to_string(&checkpoint_path)?)?;
    if header.n_terms != bundle.graph.n_terms() {
        return Err(CliError::Data(Error::invalid(format!(
            "checkpoint was trained on {} terms but the rebuilt {ns} graph has {}; \
             use the same ontology and annotations as the training run",
            header.n_terms,
            bundle.graph.n_terms()
        ))));
    }
    let table = read_embeddings(&embeddings_path)?;
    if header.seq_dim != table.dim() {
        return Err(CliError::Data(Error::invalid(format!(
            "checkpoint expects {}-dim embeddings, file has {}",
            header.seq_dim,
            table.dim()
        ))));
    }

    let graph = bundle.graph_inputs();
    let mut scores = predict_batch(&params, &graph, table.vectors.view())?;
    if propagate {
        scores = make_consistent(&scores.view(), &bundle.graph);
    }

    let mut buf = Vec::new();
    write_predictions_tsv(&mut buf, &table.ids, &scores.view(), &bundle.graph, score_floor)?;
    fs::write(&out, buf)?;

    describe_bundle(&mut manifest, &bundle);
    manifest.set("d0", header.d0);
    manifest.set("d", header.d);
    manifest.set("seq_dim", header.seq_dim);
    manifest.set("score_floor", score_floor);
    manifest.set("propagate_scores", propagate);
    manifest.set("scored_proteins", table.len());
    manifest.write_next_to(&out)?;
    Ok(())
}

pub(super) fn evaluate(ctx: &Ctx, args: EvaluateArgs) -> CmdResult {
    let predictions_path = ctx.require_path(args.predictions, "predictions")?;
    let truth_path = ctx.require_path(args.truth, "truth")?;
    let ontology_path = ctx.require_path(args.ontology, "ontology")?;
    let ns: Namespace = ctx.require(args.namespace, "namespace")?;
    let out = ctx.path(args.out, "out");
    let curve_out = ctx.path(args.curve_out, "curve-out");
    let propagate = ctx.flag(args.propagate_scores, "propagate-scores");

    let mut manifest = Manifest::new("evaluate");
    manifest.input("predictions", &predictions_path)?;
    manifest.input("truth", &truth_path)?;
    manifest.input("ontology", &ontology_path)?;

    let full = load_ontology(&ontology_path)?;
    let (graph, _) = full.restrict_to_namespace(ns);

    let truth_records = load_records(&truth_path)?;
    let (truth_set, truth_report) = AnnotationSet::from_records(&truth_records, &graph);
    if truth_report.dropped_records > 0 {
        eprintln!(
            "warning: dropped {} truth records with terms outside the {ns} graph",
            truth_report.dropped_records
        );
    }
    let truth = propagate_true_path(&truth_set, &graph);
    if truth.n_proteins() == 0 {
        return Err(CliError::Data(Error::invalid(
            "empty benchmark: no truth protein has a term in this namespace",
        )));
    }

    let (pred, dropped_terms) =
        read_predictions_tsv(&fs::read_to_string(&predictions_path)?, &graph, ns)?;
    if dropped_terms > 0 {
        eprintln!("warning: dropped {dropped_terms} prediction rows with terms outside the {ns} graph");
    }
    let pred_index: HashMap<&str, usize> = pred
        .proteins
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    // rows follow the benchmark; proteins without predictions score zero
    let mut scores = Array2::<f64>::zeros((truth.n_proteins(), graph.n_terms()));
    let mut unscored = 0usize;
    for (bi, protein) in truth.proteins().iter().enumerate() {
        match pred_index.get(protein.as_str()) {
            Some(&pi) => scores.row_mut(bi).assign(&pred.scores.row(pi)),
            None => unscored += 1,
        }
    }
    if unscored > 0 {
        eprintln!("warning: {unscored} benchmark proteins have no predictions (scored 0)");
    }
    let extra = pred
        .proteins
        .iter()
        .filter(|id| !truth.proteins().contains(id))
        .count();
    if extra > 0 {
        eprintln!("warning: ignored predictions for {extra} proteins outside the benchmark");
    }

    if propagate {
        scores = make_consistent(&scores.view(), &graph);
    }

    let report = run_evaluation(&scores.view(), truth.all_labels())?;
    let mut text = String::new();
    text.push_str(&format!("fmax\t{}\n", report.fmax));
    text.push_str(&format!("best_threshold\t{}\n", report.best_threshold));
    text.push_str(&format!("aupr_micro\t{}\n", report.aupr_micro));
    text.push_str(&format!("aupr_macro\t{}\n", report.aupr_macro));
    text.push_str(&format!("benchmark_proteins\t{}\n", truth.n_proteins()));
    text.push_str(&format!("n_terms\t{}\n", graph.n_terms()));
    write_report(&out, &text)?;

    if let Some(curve_path) = &curve_out {
        let mut curve = String::from("#threshold\tprecision\trecall\n");
        for point in &report.curve {
            curve.push_str(&format!(
                "{:.2}\t{}\t{}\n",
                point.threshold, point.precision, point.recall
            ));
        }
        fs::write(curve_path, curve)?;
    }

    manifest.set("namespace", ns);
    manifest.set("n_terms", graph.n_terms());
    manifest.set("benchmark_proteins", truth.n_proteins());
    manifest.set("propagate_scores", propagate);
    manifest.set("fmax", report.fmax);
    if let Some(path) = &out {
        manifest.write_next_to(path)?;
    }
    Ok(())
}
