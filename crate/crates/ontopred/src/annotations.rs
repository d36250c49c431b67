//! Protein annotation ingestion, evidence filtering, and true-path-rule
//! propagation.

use std::collections::BTreeSet;
use std::io::Write;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ontology::{OntologyGraph, TermId};

/// The 8 experimental evidence codes that qualify an annotation for training.
pub const EXPERIMENTAL_EVIDENCE: [&str; 8] =
    ["EXP", "IDA", "IPI", "IMP", "IGI", "IEP", "TAS", "IC"];

/// Evidence code written for rows added by true-path propagation.
pub const PROPAGATED_EVIDENCE: &str = "PROP";

/// One `protein \t term \t evidence` row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub protein: String,
    pub term: TermId,
    pub evidence: String,
}

/// Parses a tab-separated annotation table.
///
/// Lines starting with `!` or `#` are comments; blank lines are skipped.
/// Records are returned in file order. Term existence against an ontology is
/// checked later, at [`AnnotationSet::from_records`] time.
pub fn parse_annotations(text: &str) -> Result<Vec<AnnotationRecord>> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('!') || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(protein), Some(term), Some(evidence), None) = (
            fields.next(),
            fields.next(),
            fields.next(),
            fields.next(),
        ) else {
            return Err(Error::parse(
                line_no,
                format!("expected 3 tab-separated fields, got {line:?}"),
            ));
        };
        if protein.is_empty() {
            return Err(Error::parse(line_no, "empty protein id"));
        }
        let term = TermId::parse(term).map_err(|e| Error::parse(line_no, e.to_string()))?;
        // PROP (written by the propagate subcommand) is one char longer than
        // any experimental code, hence the 4-char allowance.
        let evidence_ok = !evidence.is_empty()
            && evidence.len() <= 4
            && evidence
                .bytes()
                .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit());
        if !evidence_ok {
            return Err(Error::parse(
                line_no,
                format!("invalid evidence code {evidence:?}"),
            ));
        }
        records.push(AnnotationRecord {
            protein: protein.to_string(),
            term,
            evidence: evidence.to_string(),
        });
    }
    Ok(records)
}

/// Keeps exactly the records carrying one of the 8 experimental evidence
/// codes, preserving order.
pub fn filter_experimental(records: Vec<AnnotationRecord>) -> Vec<AnnotationRecord> {
    records
        .into_iter()
        .filter(|r| EXPERIMENTAL_EVIDENCE.contains(&r.evidence.as_str()))
        .collect()
}

/// Experimental filter that also lets already-propagated rows through, so a
/// file produced by the `propagate` subcommand can be fed back in.
pub fn filter_training_evidence(records: Vec<AnnotationRecord>) -> Vec<AnnotationRecord> {
    records
        .into_iter()
        .filter(|r| {
            r.evidence == PROPAGATED_EVIDENCE
                || EXPERIMENTAL_EVIDENCE.contains(&r.evidence.as_str())
        })
        .collect()
}

/// Protein-to-term-set map over the dense indices of one ontology graph.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet {
    proteins: Vec<String>,
    labels: Vec<Vec<usize>>,
    propagated: bool,
}

/// Outcome of resolving raw records against a graph.
#[derive(Debug, Default)]
pub struct ResolutionReport {
    /// Distinct (protein, term) pairs kept.
    pub resolved_pairs: usize,
    /// Records whose term is not in the graph (e.g. other namespace).
    pub dropped_records: usize,
    /// The distinct unknown accessions, for diagnostics.
    pub unknown_terms: BTreeSet<String>,
}

impl AnnotationSet {
    /// Builds an unpropagated set, mapping accessions to graph indices.
    /// Records whose term is absent from `g` are dropped and counted.
    /// Proteins keep their order of first appearance; duplicate
    /// (protein, term) pairs collapse silently.
    pub fn from_records(
        records: &[AnnotationRecord],
        g: &OntologyGraph,
    ) -> (AnnotationSet, ResolutionReport) {
        let mut report = ResolutionReport::default();
        let mut order: Vec<String> = Vec::new();
        let mut index: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
        let mut labels: Vec<BTreeSet<usize>> = Vec::new();

        for rec in records {
            let Some(term_idx) = g.index_of(rec.term) else {
                report.dropped_records += 1;
                report.unknown_terms.insert(rec.term.accession());
                continue;
            };
            let pi = match index.get(rec.protein.as_str()) {
                Some(&pi) => pi,
                None => {
                    order.push(rec.protein.clone());
                    labels.push(BTreeSet::new());
                    index.insert(rec.protein.clone(), order.len() - 1);
                    order.len() - 1
                }
            };
            labels[pi].insert(term_idx);
        }
        report.resolved_pairs = labels.iter().map(BTreeSet::len).sum();

        (
            AnnotationSet {
                proteins: order,
                labels: labels.into_iter().map(|s| s.into_iter().collect()).collect(),
                propagated: false,
            },
            report,
        )
    }

    /// Assembles a set directly from per-protein sorted label indices.
    pub fn from_labels(
        proteins: Vec<String>,
        labels: Vec<Vec<usize>>,
        propagated: bool,
    ) -> AnnotationSet {
        assert_eq!(proteins.len(), labels.len());
        debug_assert!(labels.iter().all(|l| l.windows(2).all(|w| w[0] < w[1])));
        AnnotationSet {
            proteins,
            labels,
            propagated,
        }
    }

    pub fn proteins(&self) -> &[String] {
        &self.proteins
    }

    pub fn labels(&self, protein: usize) -> &[usize] {
        &self.labels[protein]
    }

    pub fn all_labels(&self) -> &[Vec<usize>] {
        &self.labels
    }

    pub fn is_propagated(&self) -> bool {
        self.propagated
    }

    pub fn n_proteins(&self) -> usize {
        self.proteins.len()
    }

    /// True/false mask over terms: does any protein carry the term?
    pub fn annotated_mask(&self, n_terms: usize) -> Vec<bool> {
        let mut mask = vec![false; n_terms];
        for labels in &self.labels {
            for &t in labels {
                mask[t] = true;
            }
        }
        mask
    }

    /// Rewrites term indices through `remap` (entries mapping to `None` are
    /// dropped), e.g. after [`OntologyGraph::drop_isolated`].
    pub fn remap_terms(&self, remap: &[Option<usize>]) -> AnnotationSet {
        let labels = self
            .labels
            .iter()
            .map(|l| {
                let mut out: Vec<usize> = l.iter().filter_map(|&t| remap[t]).collect();
                out.sort_unstable();
                out
            })
            .collect();
        AnnotationSet {
            proteins: self.proteins.clone(),
            labels,
            propagated: self.propagated,
        }
    }
}

/// Applies the true path rule: each protein's label set is replaced by its
/// union with all `is_a` ancestors of its labels. Idempotent; per-protein
/// work is parallel but the output is order-stable.
pub fn propagate_true_path(a: &AnnotationSet, g: &OntologyGraph) -> AnnotationSet {
    let closures = g.ancestor_closures();
    let labels: Vec<Vec<usize>> = a
        .labels
        .par_iter()
        .map(|labels| {
            let mut set: BTreeSet<usize> = labels.iter().copied().collect();
            for &t in labels {
                set.extend(closures[t].iter().copied());
            }
            set.into_iter().collect()
        })
        .collect();
    AnnotationSet {
        proteins: a.proteins.clone(),
        labels,
        propagated: true,
    }
}

/// Per-term annotation counts over a propagated set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    u: Vec<usize>,
}

impl CountTable {
    pub fn new(u: Vec<usize>) -> CountTable {
        CountTable { u }
    }

    pub fn get(&self, term: usize) -> usize {
        self.u[term]
    }

    pub fn values(&self) -> &[usize] {
        &self.u
    }

    pub fn annotated_mask(&self) -> Vec<bool> {
        self.u.iter().map(|&c| c > 0).collect()
    }
}

/// U\[k\] = number of distinct proteins annotated with term k. Requires a
/// propagated set so that the parent-majorizes-child invariant holds.
pub fn count_annotations(a: &AnnotationSet, g: &OntologyGraph) -> Result<CountTable> {
    if !a.propagated {
        return Err(Error::invalid(
            "count_annotations requires a propagated annotation set",
        ));
    }
    let mut u = vec![0usize; g.n_terms()];
    for labels in &a.labels {
        for &t in labels {
            u[t] += 1;
        }
    }
    Ok(CountTable { u })
}

/// Dense 0/1 target matrix, one row per protein in set order.
pub fn build_targets(a: &AnnotationSet, n_terms: usize) -> Array2<f64> {
    let mut t = Array2::zeros((a.n_proteins(), n_terms));
    for (pi, labels) in a.labels.iter().enumerate() {
        for &j in labels {
            t[(pi, j)] = 1.0;
        }
    }
    t
}

/// Writes a propagated set back out as annotation TSV. Directly annotated
/// pairs keep their original evidence code (first occurrence wins);
/// inferred pairs get `PROP`.
pub fn write_propagated_tsv<W: Write>(
    mut w: W,
    propagated: &AnnotationSet,
    g: &OntologyGraph,
    direct: &[AnnotationRecord],
) -> Result<()> {
    let mut direct_codes: std::collections::HashMap<(&str, usize), &str> =
        std::collections::HashMap::new();
    for rec in direct {
        if let Some(t) = g.index_of(rec.term) {
            direct_codes
                .entry((rec.protein.as_str(), t))
                .or_insert(rec.evidence.as_str());
        }
    }
    for (pi, protein) in propagated.proteins.iter().enumerate() {
        for &t in &propagated.labels[pi] {
            let code = direct_codes
                .get(&(protein.as_str(), t))
                .copied()
                .unwrap_or(PROPAGATED_EVIDENCE);
            writeln!(w, "{}\t{}\t{}", protein, g.term(t), code)?;
        }
    }
    Ok(())
}
