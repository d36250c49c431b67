//! Graph-side numerical inputs for the model: term frequencies, information
//! content, conditional edge priors, the IC-weighted adjacency matrix with
//! its row-stochastic normalization, and ancestor one-hot node features.
//!
//! Frequency follows the recursion `freq(k) = U_k + sum over direct children
//! of freq`, taken literally: in a DAG a descendant reachable along two paths
//! contributes once per path. IC uses the natural logarithm; since IC only
//! enters edge weights as a ratio over siblings, the base cancels there.

use std::collections::BTreeMap;
use std::io::Write;

use crate::annotations::CountTable;
use crate::error::{Error, Result};
use crate::ontology::{Namespace, OntologyGraph};
use crate::sparse::CsrMatrix;

/// Per-term frequency, relative probability, and information content.
///
/// Entries for terms outside the namespace the table was computed for are
/// inert (`p = 1`, `ic = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct ICTable {
    pub freq: Vec<f64>,
    pub p: Vec<f64>,
    pub ic: Vec<f64>,
}

/// Frequency of every term: own count plus the sum over direct children,
/// evaluated in reverse topological order.
pub fn compute_freq(u: &CountTable, g: &OntologyGraph) -> Vec<f64> {
    assert_eq!(u.values().len(), g.n_terms());
    let mut freq = vec![0.0f64; g.n_terms()];
    for &k in g.topo_order().iter().rev() {
        let child_sum: f64 = g.children(k).iter().map(|&c| freq[c]).sum();
        freq[k] = u.get(k) as f64 + child_sum;
    }
    freq
}

/// Normalizes frequencies of the `ns` terms into probabilities and IC.
///
/// The denominator is the largest root frequency in the namespace. Terms
/// that were never annotated (`freq = 0`) get the probability floor
/// `1 / (freq(root) + 1)` so their IC stays finite.
pub fn compute_ic(freq: &[f64], g: &OntologyGraph, ns: Namespace) -> Result<ICTable> {
    assert_eq!(freq.len(), g.n_terms());
    let roots = g.roots(ns);
    if roots.is_empty() {
        return Err(Error::invalid(format!("namespace {ns} has no terms")));
    }
    let root_freq = roots
        .iter()
        .map(|&r| freq[r])
        .fold(0.0f64, f64::max);
    if root_freq <= 0.0 {
        return Err(Error::invalid(format!("namespace {ns} has no annotations")));
    }
    let floor = 1.0 / (root_freq + 1.0);
    let mut p = vec![1.0f64; g.n_terms()];
    let mut ic = vec![0.0f64; g.n_terms()];
    for k in 0..g.n_terms() {
        if g.namespace(k) != ns {
            continue;
        }
        let pk = if freq[k] > 0.0 {
            freq[k] / root_freq
        } else {
            floor
        };
        p[k] = pk;
        ic[k] = (-pk.ln()).max(0.0); // max also normalizes -0.0 at roots
    }
    Ok(ICTable {
        freq: freq.to_vec(),
        p,
        ic,
    })
}

/// Conditional prior of a child `s` given its parent `t`: `U[s] / U[t]`,
/// or 0 when the parent was never annotated.
pub fn compute_prior(u: &CountTable, parent: usize, child: usize) -> f64 {
    let ut = u.get(parent);
    if ut == 0 {
        return 0.0;
    }
    u.get(child) as f64 / ut as f64
}

/// Sparse edge-weight matrix: one entry per `is_a` edge, keyed
/// `(parent, child)`, each weight the sum of the conditional prior and the
/// child's share of sibling IC.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAdjacency {
    n: usize,
    entries: BTreeMap<(usize, usize), f64>,
    normalized: Option<CsrMatrix>,
}

impl WeightedAdjacency {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn weight(&self, parent: usize, child: usize) -> Option<f64> {
        self.entries.get(&(parent, child)).copied()
    }

    /// Entries in deterministic (parent, child) order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(t, s), &w)| (t, s, w))
    }

    /// Row-stochastic normalized form: symmetrize with `max(A, A^T)` so
    /// information flows both up and down the hierarchy, add self-loops,
    /// and divide each row by its sum. Cached after the first call.
    pub fn normalize(&mut self) -> &CsrMatrix {
        if self.normalized.is_none() {
            self.normalized = Some(normalize_adjacency(self));
        }
        self.normalized.as_ref().expect("just computed")
    }
}

/// Builds the raw weighted adjacency from counts and IC.
///
/// Per edge `(t parent, s child)`: `prior(s|t) + ic(s) / sum of ic over
/// children(t)`. A parent whose children all have zero IC splits the share
/// uniformly.
pub fn build_adjacency(u: &CountTable, ic: &ICTable, g: &OntologyGraph) -> WeightedAdjacency {
    let mut entries = BTreeMap::new();
    for t in 0..g.n_terms() {
        let children = g.children(t);
        if children.is_empty() {
            continue;
        }
        let ic_sum: f64 = children.iter().map(|&s| ic.ic[s]).sum();
        for &s in children {
            let share = if ic_sum > 0.0 {
                ic.ic[s] / ic_sum
            } else {
                1.0 / children.len() as f64
            };
            entries.insert((t, s), compute_prior(u, t, s) + share);
        }
    }
    WeightedAdjacency {
        n: g.n_terms(),
        entries,
        normalized: None,
    }
}

/// `D^-1 (S + I)` with `S = max(A, A^T)` elementwise: every row sums to 1.
pub fn normalize_adjacency(a: &WeightedAdjacency) -> CsrMatrix {
    let n = a.n;
    // a 2-cycle would be required for both (i,j) and (j,i) to carry raw
    // weights, and the graph is validated acyclic, so mirroring never clashes
    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for (t, s, w) in a.entries() {
        rows[t].insert(s, w);
        rows[s].insert(t, w);
    }
    let rows: Vec<Vec<(usize, f64)>> = rows
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            *row.entry(i).or_insert(0.0) += 1.0;
            let sum: f64 = row.values().sum();
            row.into_iter().map(|(j, w)| (j, w / sum)).collect()
        })
        .collect();
    CsrMatrix::from_rows(n, &rows)
}

/// Sparse 0/1 node features: row i holds the term itself plus all of its
/// `is_a` ancestors.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFeatureMatrix {
    n: usize,
    rows: Vec<Vec<usize>>,
}

impl NodeFeatureMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_csr(&self) -> CsrMatrix {
        CsrMatrix::from_index_rows(self.n, &self.rows)
    }
}

pub fn build_onehot_features(g: &OntologyGraph) -> NodeFeatureMatrix {
    let rows: Vec<Vec<usize>> = g
        .ancestor_closures()
        .into_iter()
        .enumerate()
        .map(|(i, mut anc)| {
            anc.push(i);
            anc.sort_unstable();
            anc
        })
        .collect();
    NodeFeatureMatrix {
        n: g.n_terms(),
        rows,
    }
}

/// Writes the raw adjacency as `parent \t child \t weight` with 9
/// significant digits.
pub fn write_adjacency_tsv<W: Write>(
    mut w: W,
    a: &WeightedAdjacency,
    g: &OntologyGraph,
) -> Result<()> {
    for (t, s, weight) in a.entries() {
        writeln!(w, "{}\t{}\t{:.8e}", g.term(t), g.term(s), weight)?;
    }
    Ok(())
}

/// Writes the IC table as `accession \t freq \t p \t ic`.
pub fn write_ic_tsv<W: Write>(mut w: W, ic: &ICTable, g: &OntologyGraph) -> Result<()> {
    writeln!(w, "#accession\tfreq\tp\tic")?;
    for k in 0..g.n_terms() {
        writeln!(w, "{}\t{}\t{}\t{}", g.term(k), ic.freq[k], ic.p[k], ic.ic[k])?;
    }
    Ok(())
}
