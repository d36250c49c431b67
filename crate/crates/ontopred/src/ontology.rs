//! OBO ontology parsing and the DAG algorithms built on it.
//!
//! Only `[Term]` stanzas and `is_a` edges are retained: the true path rule
//! and all downstream graph features are defined over `is_a` alone. Terms
//! are indexed in lexicographic accession order so that every derived
//! matrix is deterministic regardless of stanza order in the input file.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A GO accession: `GO:` followed by exactly seven decimal digits.
///
/// Stored as the numeric part; ordering matches lexicographic order of the
/// accession string since all accessions have equal width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermId(u32);

impl TermId {
    /// Parses an accession such as `GO:0008150`. A lowercase `go:` prefix is
    /// canonicalized; anything else is rejected.
    pub fn parse(s: &str) -> Result<TermId> {
        let ok = s.len() == 10
            && s[..3].eq_ignore_ascii_case("GO:")
            && s[3..].bytes().all(|b| b.is_ascii_digit());
        if !ok {
            return Err(Error::invalid(format!(
                "invalid GO accession {s:?} (expected GO: followed by 7 digits)"
            )));
        }
        Ok(TermId(s[3..].parse().expect("checked digits")))
    }

    pub fn accession(&self) -> String {
        format!("GO:{:07}", self.0)
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GO:{:07}", self.0)
    }
}

impl FromStr for TermId {
    type Err = Error;

    fn from_str(s: &str) -> Result<TermId> {
        TermId::parse(s)
    }
}

/// The three GO domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Namespace {
    Mfo,
    Bpo,
    Cco,
}

impl Namespace {
    pub const ALL: [Namespace; 3] = [Namespace::Mfo, Namespace::Bpo, Namespace::Cco];

    /// Maps the OBO `namespace:` tag value.
    pub fn from_obo(s: &str) -> Option<Namespace> {
        match s {
            "molecular_function" => Some(Namespace::Mfo),
            "biological_process" => Some(Namespace::Bpo),
            "cellular_component" => Some(Namespace::Cco),
            _ => None,
        }
    }

    pub fn obo_name(&self) -> &'static str {
        match self {
            Namespace::Mfo => "molecular_function",
            Namespace::Bpo => "biological_process",
            Namespace::Cco => "cellular_component",
        }
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            Namespace::Mfo => "MFO",
            Namespace::Bpo => "BPO",
            Namespace::Cco => "CCO",
        }
    }
}

impl fmt::Display for Namespace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Namespace {
    type Err = Error;

    /// Accepts `MFO`/`BPO`/`CCO` (any case) or the OBO namespace strings.
    fn from_str(s: &str) -> Result<Namespace> {
        match s.to_ascii_uppercase().as_str() {
            "MFO" => Ok(Namespace::Mfo),
            "BPO" => Ok(Namespace::Bpo),
            "CCO" => Ok(Namespace::Cco),
            _ => Namespace::from_obo(s).ok_or_else(|| {
                Error::invalid(format!("unknown namespace {s:?} (expected MFO, BPO, or CCO)"))
            }),
        }
    }
}

/// Immutable `is_a` DAG over GO terms.
///
/// Term index order is the lexicographic order of accessions; `parents` and
/// `children` are mutually consistent sorted inverse adjacency lists.
/// Acyclicity and same-namespace edges are validated at construction.
#[derive(Debug, Clone)]
pub struct OntologyGraph {
    terms: Vec<TermId>,
    names: Vec<String>,
    namespace: Vec<Namespace>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    obsolete_dropped: usize,
}

/// One parsed `[Term]` stanza, before index resolution.
#[derive(Default)]
struct TermStanza {
    header_line: usize,
    id: Option<(TermId, usize)>,
    name: Option<String>,
    namespace: Option<Namespace>,
    is_a: Vec<(String, usize)>,
    obsolete: bool,
}

/// Parses an OBO 1.2-style document into an [`OntologyGraph`].
///
/// Obsolete terms are dropped (counted in `obsolete_dropped`), along with
/// any `is_a` edge touching them. `relationship:` lines and unknown keys are
/// ignored. Cross-namespace `is_a` edges and cycles are hard errors.
pub fn parse_obo(text: &str) -> Result<OntologyGraph> {
    let mut stanzas: Vec<TermStanza> = Vec::new();
    let mut current: Option<TermStanza> = None;
    let mut skipping_stanza = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            if let Some(st) = current.take() {
                stanzas.push(st);
            }
            if line == "[Term]" {
                current = Some(TermStanza {
                    header_line: line_no,
                    ..TermStanza::default()
                });
                skipping_stanza = false;
            } else {
                skipping_stanza = true;
            }
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            if skipping_stanza || current.is_some() {
                continue; // free text inside a stanza body is ignored
            }
            continue; // header free text
        };
        let Some(st) = current.as_mut() else {
            continue; // document header or non-Term stanza
        };
        let key = key.trim();
        // strip OBO trailing comments ("! parent name")
        let value = match value.split_once('!') {
            Some((v, _)) => v.trim(),
            None => value.trim(),
        };
        match key {
            "id" => {
                let id = TermId::parse(value)
                    .map_err(|e| Error::parse(line_no, e.to_string()))?;
                if st.id.is_none() {
                    st.id = Some((id, line_no));
                }
            }
            "name" => {
                if st.name.is_none() {
                    st.name = Some(value.to_string());
                }
            }
            "namespace" => {
                let ns = Namespace::from_obo(value).ok_or_else(|| {
                    Error::parse(line_no, format!("unknown namespace {value:?}"))
                })?;
                st.namespace = Some(ns);
            }
            "is_a" => st.is_a.push((value.to_string(), line_no)),
            "is_obsolete" => {
                if value == "true" {
                    st.obsolete = true;
                }
            }
            _ => {} // relationship:, synonyms, xrefs, ... all ignored
        }
    }
    if let Some(st) = current.take() {
        stanzas.push(st);
    }

    build_graph(stanzas)
}

fn build_graph(stanzas: Vec<TermStanza>) -> Result<OntologyGraph> {
    let mut obsolete_dropped = 0usize;
    let mut live: Vec<(TermId, String, Namespace, Vec<(String, usize)>)> = Vec::new();
    let mut defined: HashMap<TermId, bool> = HashMap::new(); // id -> obsolete?

    for st in stanzas {
        let Some((id, id_line)) = st.id else {
            return Err(Error::parse(st.header_line, "term stanza missing id"));
        };
        let ns = st.namespace.ok_or_else(|| {
            Error::parse(st.header_line, format!("term {id} missing namespace"))
        })?;
        if defined.insert(id, st.obsolete).is_some() {
            return Err(Error::parse(id_line, format!("duplicate term {id}")));
        }
        if st.obsolete {
            obsolete_dropped += 1;
            continue;
        }
        live.push((id, st.name.unwrap_or_default(), ns, st.is_a));
    }

    live.sort_by_key(|(id, ..)| *id);
    let index: HashMap<TermId, usize> = live
        .iter()
        .enumerate()
        .map(|(i, (id, ..))| (*id, i))
        .collect();

    let n = live.len();
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];

    for (child_idx, (child_id, _, child_ns, edges)) in live.iter().enumerate() {
        for (target, line) in edges {
            let parent_id = TermId::parse(target)
                .map_err(|e| Error::parse(*line, e.to_string()))?;
            match defined.get(&parent_id) {
                None => {
                    return Err(Error::Reference {
                        line: *line,
                        accession: parent_id.accession(),
                    })
                }
                Some(true) => continue, // edge into an obsolete term goes with it
                Some(false) => {}
            }
            let parent_idx = index[&parent_id];
            if live[parent_idx].2 != *child_ns {
                return Err(Error::invalid(format!(
                    "cross-namespace is_a edge: {child_id} ({}) is_a {parent_id} ({})",
                    child_ns.short_name(),
                    live[parent_idx].2.short_name()
                )));
            }
            parents[child_idx].push(parent_idx);
        }
    }

    for list in &mut parents {
        list.sort_unstable();
        list.dedup();
    }
    for (child, plist) in parents.iter().enumerate() {
        for &p in plist {
            children[p].push(child);
        }
    }
    for list in &mut children {
        list.sort_unstable(); // already sorted by construction, kept for clarity
    }

    let graph = OntologyGraph {
        names: live.iter().map(|(_, name, ..)| name.clone()).collect(),
        namespace: live.iter().map(|(_, _, ns, _)| *ns).collect(),
        terms: live.into_iter().map(|(id, ..)| id).collect(),
        parents,
        children,
        obsolete_dropped,
    };
    graph.check_acyclic()?;
    Ok(graph)
}

impl OntologyGraph {
    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn n_edges(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn terms(&self) -> &[TermId] {
        &self.terms
    }

    pub fn term(&self, i: usize) -> TermId {
        self.terms[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn namespace(&self, i: usize) -> Namespace {
        self.namespace[i]
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn obsolete_dropped(&self) -> usize {
        self.obsolete_dropped
    }

    /// Dense index of an accession, if present.
    pub fn index_of(&self, id: TermId) -> Option<usize> {
        self.terms.binary_search(&id).ok()
    }

    /// Terms of `ns` with no parents.
    pub fn roots(&self, ns: Namespace) -> Vec<usize> {
        (0..self.n_terms())
            .filter(|&i| self.namespace[i] == ns && self.parents[i].is_empty())
            .collect()
    }

    /// Transitive `is_a` closure of term `i`, excluding `i` itself, sorted.
    ///
    /// Panics if `i` is out of range.
    pub fn ancestors(&self, i: usize) -> Vec<usize> {
        assert!(i < self.n_terms(), "term index {i} out of range");
        let mut seen = vec![false; self.n_terms()];
        let mut stack: Vec<usize> = self.parents[i].to_vec();
        let mut out = Vec::new();
        while let Some(j) = stack.pop() {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            out.push(j);
            stack.extend_from_slice(&self.parents[j]);
        }
        out.sort_unstable();
        out
    }

    /// Ancestor closures for all terms at once (dynamic programming over a
    /// topological order). `closures[i]` is sorted and excludes `i`.
    pub fn ancestor_closures(&self) -> Vec<Vec<usize>> {
        let order = self.topo_order();
        let mut closures: Vec<Vec<usize>> = vec![Vec::new(); self.n_terms()];
        for &i in &order {
            if self.parents[i].is_empty() {
                continue;
            }
            let mut acc: Vec<usize> = Vec::new();
            for &p in &self.parents[i] {
                acc.push(p);
                acc.extend_from_slice(&closures[p]);
            }
            acc.sort_unstable();
            acc.dedup();
            closures[i] = acc;
        }
        closures
    }

    /// Indices in an order where every parent precedes all of its children.
    pub fn topo_order(&self) -> Vec<usize> {
        let n = self.n_terms();
        let mut remaining: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut order: Vec<usize> = (0..n).filter(|&i| remaining[i] == 0).collect();
        let mut head = 0;
        while let Some(&i) = order.get(head) {
            head += 1;
            for &c in &self.children[i] {
                remaining[c] -= 1;
                if remaining[c] == 0 {
                    order.push(c);
                }
            }
        }
        debug_assert_eq!(order.len(), n, "graph validated acyclic at construction");
        order
    }

    /// Depth of every term: roots have depth 1, otherwise 1 + max over parents.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![1usize; self.n_terms()];
        for &i in &self.topo_order() {
            for &p in &self.parents[i] {
                depth[i] = depth[i].max(depth[p] + 1);
            }
        }
        depth
    }

    /// Maximum depth over the terms of `ns` (root depth = 1).
    pub fn max_depth(&self, ns: Namespace) -> Result<usize> {
        let depths = self.depths();
        (0..self.n_terms())
            .filter(|&i| self.namespace[i] == ns)
            .map(|i| depths[i])
            .max()
            .ok_or_else(|| Error::invalid(format!("namespace {ns} has no terms")))
    }

    /// Keeps exactly the terms with `keep[i] == true`, dropping edges that
    /// touch removed terms. Returns the new graph and the old-to-new map.
    pub fn restrict(&self, keep: &[bool]) -> (OntologyGraph, Vec<Option<usize>>) {
        assert_eq!(keep.len(), self.n_terms());
        let mut remap = vec![None; self.n_terms()];
        let mut next = 0usize;
        for (i, &k) in keep.iter().enumerate() {
            if k {
                remap[i] = Some(next);
                next += 1;
            }
        }
        let map_list = |list: &Vec<usize>| -> Vec<usize> {
            list.iter().filter_map(|&j| remap[j]).collect()
        };
        let graph = OntologyGraph {
            terms: kept(&self.terms, keep),
            names: kept(&self.names, keep),
            namespace: kept(&self.namespace, keep),
            parents: self
                .parents
                .iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(l, _)| map_list(l))
                .collect(),
            children: self
                .children
                .iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(l, _)| map_list(l))
                .collect(),
            obsolete_dropped: self.obsolete_dropped,
        };
        (graph, remap)
    }

    /// Subgraph containing only the terms of `ns`. No edges are lost because
    /// edges never cross namespaces.
    pub fn restrict_to_namespace(&self, ns: Namespace) -> (OntologyGraph, Vec<Option<usize>>) {
        let keep: Vec<bool> = self.namespace.iter().map(|&x| x == ns).collect();
        self.restrict(&keep)
    }

    /// Removes terms that have no parents, no children, and no annotation
    /// (`annotated[i] == false`). Returns the filtered graph and the
    /// old-to-new index map.
    pub fn drop_isolated(&self, annotated: &[bool]) -> (OntologyGraph, Vec<Option<usize>>) {
        assert_eq!(annotated.len(), self.n_terms());
        let keep: Vec<bool> = (0..self.n_terms())
            .map(|i| !self.parents[i].is_empty() || !self.children[i].is_empty() || annotated[i])
            .collect();
        self.restrict(&keep)
    }

    /// Serializes back to a minimal OBO document; re-parsing it yields the
    /// same terms, namespaces, and edges.
    pub fn to_obo_string(&self) -> String {
        let mut out = String::from("format-version: 1.2\n");
        for i in 0..self.n_terms() {
            out.push_str("\n[Term]\n");
            out.push_str(&format!("id: {}\n", self.terms[i]));
            out.push_str(&format!("name: {}\n", self.names[i]));
            out.push_str(&format!("namespace: {}\n", self.namespace[i].obo_name()));
            for &p in &self.parents[i] {
                out.push_str(&format!("is_a: {}\n", self.terms[p]));
            }
        }
        out
    }

    fn check_acyclic(&self) -> Result<()> {
        let n = self.n_terms();
        let mut remaining: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut queue: Vec<usize> = (0..n).filter(|&i| remaining[i] == 0).collect();
        let mut peeled = 0usize;
        let mut head = 0usize;
        while let Some(&i) = queue.get(head) {
            head += 1;
            peeled += 1;
            for &c in &self.children[i] {
                remaining[c] -= 1;
                if remaining[c] == 0 {
                    queue.push(c);
                }
            }
        }
        if peeled == n {
            return Ok(());
        }
        // every unpeeled node still has an unpeeled parent: walk until repeat
        let start = (0..n).find(|&i| remaining[i] > 0).expect("cycle exists");
        let mut seen_at = vec![usize::MAX; n];
        let mut path = vec![start];
        seen_at[start] = 0;
        loop {
            let cur = *path.last().unwrap();
            let next = self.parents[cur]
                .iter()
                .copied()
                .find(|&p| remaining[p] > 0)
                .expect("unpeeled node has an unpeeled parent");
            if seen_at[next] != usize::MAX {
                let cycle: Vec<String> = path[seen_at[next]..]
                    .iter()
                    .chain(std::iter::once(&next))
                    .map(|&i| self.terms[i].accession())
                    .collect();
                return Err(Error::Cycle { cycle });
            }
            seen_at[next] = path.len();
            path.push(next);
        }
    }
}

fn kept<T: Clone>(items: &[T], keep: &[bool]) -> Vec<T> {
    items
        .iter()
        .zip(keep)
        .filter(|(_, &k)| k)
        .map(|(x, _)| x.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn t1() -> OntologyGraph {
        parse_obo(synth::DIAMOND_OBO).unwrap()
    }

    /// Indices of the diamond fixture in accession order: R < A < B < C.
    fn idx(g: &OntologyGraph, acc: &str) -> usize {
        g.index_of(TermId::parse(acc).unwrap()).unwrap()
    }

    #[test]
    fn term_id_parse_and_canonicalize() {
        let id = TermId::parse("go:0000123").unwrap();
        assert_eq!(id.accession(), "GO:0000123");
        assert!(TermId::parse("GO:3").is_err());
        assert!(TermId::parse("GO:00001234").is_err());
        assert!(TermId::parse("XX:0000001").is_err());
        assert!(TermId::parse("GO:000000a").is_err());
    }

    #[test]
    fn parse_diamond() {
        let g = t1();
        assert_eq!(g.n_terms(), 4);
        assert_eq!(g.n_edges(), 4);
        let c = idx(&g, "GO:0000004");
        assert_eq!(g.parents(c).len(), 2);
        assert_eq!(g.obsolete_dropped(), 0);
        // index order is accession order
        let accs: Vec<String> = g.terms().iter().map(|t| t.accession()).collect();
        let mut sorted = accs.clone();
        sorted.sort();
        assert_eq!(accs, sorted);
    }

    #[test]
    fn parse_singleton() {
        let doc = "[Term]\nid: GO:0000001\nname: root\nnamespace: molecular_function\n";
        let g = parse_obo(doc).unwrap();
        assert_eq!(g.n_terms(), 1);
        assert!(g.parents(0).is_empty());
        assert!(g.children(0).is_empty());
    }

    #[test]
    fn two_cycle_rejected() {
        let doc = "\
[Term]
id: GO:0000001
name: x
namespace: molecular_function
is_a: GO:0000002

[Term]
id: GO:0000002
name: y
namespace: molecular_function
is_a: GO:0000001
";
        match parse_obo(doc) {
            Err(Error::Cycle { cycle }) => assert!(cycle.len() >= 2),
            other => panic!("expected cycle error, got {other:?}"),
        }
    }

    #[test]
    fn missing_id_reports_line() {
        let doc = "[Term]\nname: x\nnamespace: molecular_function\n";
        match parse_obo(doc) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_namespace_reports_line() {
        let doc = "\n[Term]\nid: GO:0000001\nname: x\n";
        match parse_obo(doc) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("GO:0000001"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn undefined_is_a_target_is_reference_error() {
        let doc = "\
[Term]
id: GO:0000001
name: x
namespace: molecular_function
is_a: GO:0009999
";
        match parse_obo(doc) {
            Err(Error::Reference { line, accession }) => {
                assert_eq!(line, 5);
                assert_eq!(accession, "GO:0009999");
            }
            other => panic!("expected reference error, got {other:?}"),
        }
    }

    #[test]
    fn cross_namespace_edge_rejected() {
        let doc = "\
[Term]
id: GO:0000001
name: x
namespace: molecular_function

[Term]
id: GO:0000002
name: y
namespace: biological_process
is_a: GO:0000001
";
        match parse_obo(doc) {
            Err(Error::Invalid(msg)) => assert!(msg.contains("cross-namespace")),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn obsolete_terms_and_their_edges_dropped() {
        let doc = "\
[Term]
id: GO:0000001
name: root
namespace: molecular_function

[Term]
id: GO:0000002
name: gone
namespace: molecular_function
is_a: GO:0000001
is_obsolete: true

[Term]
id: GO:0000003
name: child of gone
namespace: molecular_function
is_a: GO:0000002
is_a: GO:0000001
";
        let g = parse_obo(doc).unwrap();
        assert_eq!(g.n_terms(), 2);
        assert_eq!(g.obsolete_dropped(), 1);
        assert_eq!(g.n_edges(), 1); // only GO:3 -> GO:1 survives
    }

    #[test]
    fn stanza_order_does_not_change_indexing() {
        let forward = t1();
        // same document with stanzas reversed
        let mut stanzas: Vec<&str> = synth::DIAMOND_OBO.split("\n\n").collect();
        stanzas.reverse();
        let reversed = parse_obo(&stanzas.join("\n\n")).unwrap();
        assert_eq!(forward.terms(), reversed.terms());
        for i in 0..forward.n_terms() {
            assert_eq!(forward.parents(i), reversed.parents(i));
        }
    }

    #[test]
    fn ancestors_of_diamond() {
        let g = t1();
        let (r, a, b, c) = (
            idx(&g, "GO:0000001"),
            idx(&g, "GO:0000002"),
            idx(&g, "GO:0000003"),
            idx(&g, "GO:0000004"),
        );
        assert_eq!(g.ancestors(c), vec![r, a, b]);
        assert_eq!(g.ancestors(r), Vec::<usize>::new());
        assert_eq!(g.ancestors(a), vec![r]);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn ancestors_index_out_of_range_panics() {
        t1().ancestors(99);
    }

    #[test]
    fn max_depth_cases() {
        assert_eq!(t1().max_depth(Namespace::Mfo).unwrap(), 3);

        let doc = "[Term]\nid: GO:0000001\nname: r\nnamespace: cellular_component\n";
        let g = parse_obo(doc).unwrap();
        assert_eq!(g.max_depth(Namespace::Cco).unwrap(), 1);
        assert!(g.max_depth(Namespace::Mfo).is_err());

        // chain of 80 terms
        let mut doc = String::new();
        for i in 1..=80 {
            doc.push_str(&format!(
                "[Term]\nid: GO:{i:07}\nname: t{i}\nnamespace: molecular_function\n"
            ));
            if i > 1 {
                doc.push_str(&format!("is_a: GO:{:07}\n", i - 1));
            }
            doc.push('\n');
        }
        let g = parse_obo(&doc).unwrap();
        assert_eq!(g.max_depth(Namespace::Mfo).unwrap(), 80);
    }

    #[test]
    fn drop_isolated_rules() {
        // diamond plus a floating term Z
        let doc = format!(
            "{}\n[Term]\nid: GO:0000099\nname: z\nnamespace: molecular_function\n",
            synth::DIAMOND_OBO
        );
        let g = parse_obo(&doc).unwrap();
        assert_eq!(g.n_terms(), 5);
        let z = idx(&g, "GO:0000099");

        // unannotated floating term is removed
        let mut anno = vec![false; 5];
        anno[0] = true;
        let (f, remap) = g.drop_isolated(&anno);
        assert_eq!(f.n_terms(), 4);
        assert_eq!(remap[z], None);
        assert_eq!(f.n_edges(), g.n_edges());

        // annotated floating term is retained
        let mut anno = vec![false; 5];
        anno[z] = true;
        let (f, remap) = g.drop_isolated(&anno);
        assert_eq!(f.n_terms(), 5);
        assert!(remap.iter().all(Option::is_some));

        // no floating terms: identity remap
        let g = t1();
        let (f, remap) = g.drop_isolated(&vec![false; 4]);
        assert_eq!(f.n_terms(), 4);
        for (old, new) in remap.iter().enumerate() {
            assert_eq!(*new, Some(old));
        }
    }

    #[test]
    fn obo_round_trip_is_identical() {
        let g = t1();
        let h = parse_obo(&g.to_obo_string()).unwrap();
        assert_eq!(g.terms(), h.terms());
        for i in 0..g.n_terms() {
            assert_eq!(g.name(i), h.name(i));
            assert_eq!(g.namespace(i), h.namespace(i));
            assert_eq!(g.parents(i), h.parents(i));
            assert_eq!(g.children(i), h.children(i));
        }
    }

    /// Ancestor closure by repeated edge relaxation to fixpoint.
    fn ancestors_by_relaxation(g: &OntologyGraph) -> Vec<Vec<usize>> {
        let n = g.n_terms();
        let mut closed: Vec<Vec<bool>> = (0..n)
            .map(|i| {
                let mut row = vec![false; n];
                for &p in g.parents(i) {
                    row[p] = true;
                }
                row
            })
            .collect();
        loop {
            let mut changed = false;
            for i in 0..n {
                for j in 0..n {
                    if closed[i][j] {
                        for &p in g.parents(j) {
                            if !closed[i][p] {
                                closed[i][p] = true;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        closed
            .into_iter()
            .map(|row| (0..n).filter(|&j| row[j]).collect())
            .collect()
    }

    #[test]
    fn ancestors_agree_with_relaxation_on_random_dags() {
        for seed in 0..20 {
            let g = synth::random_dag(3 + (seed as usize * 9) % 198, 2.0, seed);
            let oracle = ancestors_by_relaxation(&g);
            let closures = g.ancestor_closures();
            for i in 0..g.n_terms() {
                assert_eq!(g.ancestors(i), oracle[i], "seed {seed} term {i}");
                assert_eq!(closures[i], oracle[i], "seed {seed} term {i} (dp)");
            }
        }
    }

    #[test]
    fn ancestor_transitivity_on_random_dags() {
        for seed in 100..110 {
            let g = synth::random_dag(60, 2.5, seed);
            for i in 0..g.n_terms() {
                let anc = g.ancestors(i);
                assert!(!anc.contains(&i));
                for &j in &anc {
                    for &k in &g.ancestors(j) {
                        assert!(anc.contains(&k), "ancestors not transitive");
                    }
                }
            }
        }
    }
}
