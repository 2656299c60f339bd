//! Immutable graph storage, edge-list ingestion, views and component analysis.

use std::borrow::Cow;
use std::collections::{HashMap, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A node/link structure with dense node indices `0..n` and a label table.
///
/// Links are stored exactly as they were supplied, so a freshly loaded graph
/// may contain self-loops and repeated links. Algorithms that need a simple
/// graph go through [`Graph::simple_undirected_view`].
#[derive(Clone, Debug)]
pub struct Graph {
    directed: bool,
    simple: bool,
    labels: Vec<String>,
    index: HashMap<String, usize>,
    links: Vec<(usize, usize)>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from a label table and links between label indices.
    pub fn from_links(labels: Vec<String>, links: Vec<(usize, usize)>, directed: bool) -> Result<Self> {
        let n = labels.len();
        let mut index = HashMap::with_capacity(n);
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate node label {label:?}")));
            }
        }
        if let Some(&(u, v)) = links.iter().find(|&&(u, v)| u >= n || v >= n) {
            return Err(Error::UnknownNode(u.max(v)));
        }
        Ok(Self::assemble(labels, index, links, directed))
    }

    /// Builds a graph whose labels are the decimal node indices.
    pub fn from_index_links(n: usize, links: Vec<(usize, usize)>, directed: bool) -> Result<Self> {
        Self::from_links((0..n).map(|i| i.to_string()).collect(), links, directed)
    }

    fn assemble(
        labels: Vec<String>,
        index: HashMap<String, usize>,
        links: Vec<(usize, usize)>,
        directed: bool,
    ) -> Self {
        let n = labels.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = if directed { vec![Vec::new(); n] } else { Vec::new() };
        for &(u, v) in &links {
            out_adj[u].push(v);
            if directed {
                in_adj[v].push(u);
            } else if u != v {
                out_adj[v].push(u);
            }
        }
        let simple = is_simple(&links, directed);
        Self { directed, simple, labels, index, links, out_adj, in_adj }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of stored links; each undirected link is counted once.
    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// True when the graph has no self-loops and no repeated links.
    pub fn is_simple(&self) -> bool {
        self.simple
    }

    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    /// Out-neighbors for directed graphs, all neighbors for undirected ones.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    /// In-neighbors; for undirected graphs this is the same as [`Graph::neighbors`].
    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        if self.directed {
            &self.in_adj[v]
        } else {
            &self.out_adj[v]
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        if self.directed {
            self.out_adj[v].len() + self.in_adj[v].len()
        } else {
            self.out_adj[v].len()
        }
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Undirected simple graph on the same nodes: directions are dropped,
    /// self-loops removed and parallel links collapsed. Neighbor lists of the
    /// result are sorted.
    pub fn simple_undirected_view(&self) -> Graph {
        if !self.directed && self.simple && self.links.windows(2).all(|w| w[0] < w[1]) {
            return self.clone();
        }
        let mut links: Vec<(usize, usize)> =
            self.links.iter().filter(|(u, v)| u != v).map(|&(u, v)| if u < v { (u, v) } else { (v, u) }).collect();
        links.sort_unstable();
        links.dedup();
        let mut g = Self::assemble(self.labels.clone(), self.index.clone(), links, false);
        for adj in &mut g.out_adj {
            adj.sort_unstable();
        }
        g
    }

    /// Simple view that keeps link direction: self-loops and repeated arcs are
    /// dropped. Undirected graphs get [`Graph::simple_undirected_view`].
    pub fn simple_view(&self) -> Graph {
        if !self.directed {
            return self.simple_undirected_view();
        }
        let mut links: Vec<(usize, usize)> = self.links.iter().copied().filter(|(u, v)| u != v).collect();
        links.sort_unstable();
        links.dedup();
        Self::assemble(self.labels.clone(), self.index.clone(), links, true)
    }

    /// Borrows `self` when it already is a simple undirected graph.
    pub fn undirected_simple(&self) -> Cow<'_, Graph> {
        if !self.directed && self.simple {
            Cow::Borrowed(self)
        } else {
            Cow::Owned(self.simple_undirected_view())
        }
    }

    /// Subgraph on `nodes` with every link whose endpoints are both selected.
    ///
    /// Nodes of the result are ordered by their index in `self`; labels carry over.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Graph> {
        let n = self.node_count();
        let mut keep = vec![usize::MAX; n];
        let mut sorted: Vec<usize> = nodes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(&bad) = sorted.iter().find(|&&v| v >= n) {
            return Err(Error::UnknownNode(bad));
        }
        for (new, &old) in sorted.iter().enumerate() {
            keep[old] = new;
        }
        let links = self
            .links
            .iter()
            .filter(|&&(u, v)| keep[u] != usize::MAX && keep[v] != usize::MAX)
            .map(|&(u, v)| (keep[u], keep[v]))
            .collect();
        let labels: Vec<String> = sorted.iter().map(|&v| self.labels[v].clone()).collect();
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        let mut g = Self::assemble(labels, index, links, self.directed);
        if !self.directed && self.simple {
            for adj in &mut g.out_adj {
                adj.sort_unstable();
            }
        }
        Ok(g)
    }

    /// Weakly connected components, found by undirected reachability.
    pub fn components(&self) -> ComponentReport {
        let n = self.node_count();
        let mut membership = vec![usize::MAX; n];
        let mut sizes = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..n {
            if membership[start] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            membership[start] = id;
            queue.push_back(start);
            let mut size = 0;
            while let Some(v) = queue.pop_front() {
                size += 1;
                for &w in self.neighbors(v).iter().chain(if self.directed { self.in_adj[v].iter() } else { [].iter() })
                {
                    if membership[w] == usize::MAX {
                        membership[w] = id;
                        queue.push_back(w);
                    }
                }
            }
            sizes.push(size);
        }
        // components are discovered in order of their smallest node, so the
        // first maximum is the tie winner
        let largest = sizes.iter().enumerate().fold(None, |best: Option<(usize, usize)>, (i, &s)| match best {
            Some((_, bs)) if bs >= s => best,
            _ => Some((i, s)),
        });
        let (lwcc, lwcc_fraction) = match largest {
            Some((id, size)) => ((0..n).filter(|&v| membership[v] == id).collect(), size as f64 / n as f64),
            None => (Vec::new(), 0.0),
        };
        ComponentReport { component_count: sizes.len(), component_sizes: sizes, membership, lwcc, lwcc_fraction }
    }

    /// Writes `label label` lines, one per stored link.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# nodes: {} links: {} directed: {}", self.node_count(), self.link_count(), self.directed)?;
        for &(u, v) in &self.links {
            writeln!(out, "{}\t{}", self.labels[u], self.labels[v])?;
        }
        Ok(())
    }
}

impl PartialEq for Graph {
    /// Same labels in the same index order, same directedness and the same
    /// multiset of links (orientation ignored for undirected graphs).
    fn eq(&self, other: &Self) -> bool {
        if self.directed != other.directed || self.labels != other.labels || self.links.len() != other.links.len() {
            return false;
        }
        canonical_links(self) == canonical_links(other)
    }
}

fn canonical_links(g: &Graph) -> Vec<(usize, usize)> {
    let mut links: Vec<(usize, usize)> =
        if g.directed { g.links.clone() } else { g.links.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect() };
    links.sort_unstable();
    links
}

fn is_simple(links: &[(usize, usize)], directed: bool) -> bool {
    let mut seen: Vec<(usize, usize)> = Vec::with_capacity(links.len());
    for &(u, v) in links {
        if u == v {
            return false;
        }
        seen.push(if directed || u < v { (u, v) } else { (v, u) });
    }
    seen.sort_unstable();
    seen.windows(2).all(|w| w[0] != w[1])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentReport {
    pub component_count: usize,
    /// Sizes in order of each component's smallest node index.
    pub component_sizes: Vec<usize>,
    /// Component id of every node.
    pub membership: Vec<usize>,
    /// Nodes of the largest weakly connected component, ascending.
    pub lwcc: Vec<usize>,
    pub lwcc_fraction: f64,
}

/// Parses a whitespace separated edge list. Lines starting with `#` and blank
/// lines are skipped; every other line must hold exactly two node tokens.
pub fn load_edge_list<R: BufRead>(source: R, directed: bool) -> Result<Graph> {
    let mut labels = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut links = Vec::new();
    let mut intern = |token: &str, labels: &mut Vec<String>| -> usize {
        if let Some(&i) = index.get(token) {
            return i;
        }
        let i = labels.len();
        labels.push(token.to_owned());
        index.insert(token.to_owned(), i);
        i
    };
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => {
                let u = intern(a, &mut labels);
                let v = intern(b, &mut labels);
                links.push((u, v));
            }
            _ => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected two node tokens, got {:?}", trimmed),
                })
            }
        }
    }
    if links.is_empty() {
        return Err(Error::EmptyInput);
    }
    let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
    Ok(Graph::assemble(labels, index, links, directed))
}

pub fn load_edge_list_file(path: &Path, directed: bool) -> Result<Graph> {
    let file = File::open(path)?;
    load_edge_list(BufReader::new(file), directed)
}

/// Random graph models for building test corpora.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum SyntheticModel {
    /// Every node pair is linked independently with probability `p`.
    UniformRandom { p: f64 },
    /// Growth from a `(k+1)`-clique; each new node links to `k` distinct
    /// existing nodes chosen proportionally to their degree.
    PreferentialAttachment { k: usize },
}

impl SyntheticModel {
    /// Checks the model parameters for a graph of `n` nodes.
    pub fn validate(&self, n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("synthetic graph needs n >= 2, got {n}")));
        }
        match *self {
            SyntheticModel::UniformRandom { p } if !(p > 0.0 && p <= 1.0) => {
                Err(Error::InvalidParameter(format!("link probability must be in (0,1], got {p}")))
            }
            SyntheticModel::PreferentialAttachment { k } if k == 0 || k >= n => {
                Err(Error::InvalidParameter(format!("attachment degree must be in [1, n), got {k}")))
            }
            _ => Ok(()),
        }
    }
}

/// Generates an undirected simple graph; the output depends only on the arguments.
pub fn generate_synthetic(model: SyntheticModel, n: usize, seed: u64) -> Result<Graph> {
    model.validate(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let links = match model {
        SyntheticModel::UniformRandom { p } => {
            let mut links = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.random::<f64>() < p {
                        links.push((u, v));
                    }
                }
            }
            links
        }
        SyntheticModel::PreferentialAttachment { k } => {
            let mut links = Vec::new();
            let mut endpoints = Vec::new();
            for u in 0..=k {
                for v in (u + 1)..=k {
                    links.push((u, v));
                    endpoints.push(u);
                    endpoints.push(v);
                }
            }
            let mut targets = Vec::with_capacity(k);
            for v in (k + 1)..n {
                targets.clear();
                while targets.len() < k {
                    let t = endpoints[rng.random_range(0..endpoints.len())];
                    if !targets.contains(&t) {
                        targets.push(t);
                    }
                }
                for &t in &targets {
                    links.push((t, v));
                    endpoints.push(t);
                    endpoints.push(v);
                }
            }
            links
        }
    };
    Graph::from_index_links(n, links, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, directed: bool) -> Graph {
        load_edge_list(text.as_bytes(), directed).unwrap()
    }

    #[test]
    fn loads_counts() {
        let g = load("1 2\n2 3", false);
        assert_eq!((g.node_count(), g.link_count()), (3, 2));
        assert_eq!(g.labels(), ["1", "2", "3"]);
    }

    #[test]
    fn skips_comments() {
        let g = load("# hdr\n1 2", false);
        assert_eq!((g.node_count(), g.link_count()), (2, 1));
    }

    #[test]
    fn duplicate_links_collapse_in_simple_view() {
        let g = load("a b\na b", false);
        assert_eq!(g.link_count(), 2);
        assert!(!g.is_simple());
        assert_eq!(g.simple_undirected_view().link_count(), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match load_edge_list("1 2\n3\n".as_bytes(), false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(load_edge_list("1 2 3".as_bytes(), false), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(load_edge_list("".as_bytes(), false), Err(Error::EmptyInput)));
        assert!(matches!(load_edge_list("# only\n".as_bytes(), false), Err(Error::EmptyInput)));
    }

    #[test]
    fn simple_view_drops_self_loops() {
        let g = load("0 1\n1 2\n2 0\n0 0", false);
        let s = g.simple_undirected_view();
        assert_eq!((s.node_count(), s.link_count()), (3, 3));
        assert!(s.is_simple());
    }

    #[test]
    fn simple_view_merges_reciprocal_arcs() {
        let g = load("a b\nb a", true);
        let s = g.simple_undirected_view();
        assert!(!s.is_directed());
        assert_eq!(s.link_count(), 1);
    }

    #[test]
    fn simple_view_of_simple_graph_is_identity() {
        let g = load("3 1\n1 2\n2 3", false);
        assert_eq!(g.simple_undirected_view(), g);
    }

    #[test]
    fn directed_simple_view_keeps_direction() {
        let g = load("a b\nb a\na b\nc c", true);
        let s = g.simple_view();
        assert!(s.is_directed());
        assert_eq!(s.link_count(), 2);
    }

    #[test]
    fn induced_subgraph_cases() {
        let tri = load("0 1\n1 2\n2 0", false);
        let sub = tri.induced_subgraph(&[0, 1]).unwrap();
        assert_eq!((sub.node_count(), sub.link_count()), (2, 1));
        assert_eq!(tri.induced_subgraph(&[2, 0, 1]).unwrap(), tri);

        let star = load("c l1\nc l2\nc l3\nc l4", false);
        let l1 = star.index_of("l1").unwrap();
        let l2 = star.index_of("l2").unwrap();
        let sub = star.induced_subgraph(&[l1, l2]).unwrap();
        assert_eq!((sub.node_count(), sub.link_count()), (2, 0));
        assert_eq!(sub.labels(), ["l1", "l2"]);

        assert!(matches!(tri.induced_subgraph(&[0, 7]), Err(Error::UnknownNode(7))));
    }

    #[test]
    fn component_fractions() {
        let g = load("a b\nb c\nd e", false);
        let c = g.components();
        assert_eq!(c.component_count, 2);
        assert_eq!(c.component_sizes, vec![3, 2]);
        assert!((c.lwcc_fraction - 0.6).abs() < 1e-15);

        let g = load("a b\nb c\nc a", false);
        assert_eq!(g.components().lwcc_fraction, 1.0);
    }

    #[test]
    fn lwcc_ties_go_to_smallest_index() {
        let g = load("a b\nc d", false);
        assert_eq!(g.components().lwcc, vec![0, 1]);
    }

    #[test]
    fn directed_components_are_weak() {
        let g = load("a b\nc b", true);
        assert_eq!(g.components().component_count, 1);
    }

    #[test]
    fn generator_determinism() {
        let m = SyntheticModel::PreferentialAttachment { k: 2 };
        let a = generate_synthetic(m, 100, 7).unwrap();
        let b = generate_synthetic(m, 100, 7).unwrap();
        assert_eq!(a.links(), b.links());
        assert!(a.is_simple());
        assert!((0..100).all(|v| a.degree(v) >= 2));
    }

    #[test]
    fn complete_uniform_graph() {
        let g = generate_synthetic(SyntheticModel::UniformRandom { p: 1.0 }, 5, 3).unwrap();
        assert_eq!(g.link_count(), 10);
    }

    #[test]
    fn uniform_mean_degree_within_three_sigma() {
        let (n, p) = (200usize, 0.2);
        let g = generate_synthetic(SyntheticModel::UniformRandom { p }, n, 1).unwrap();
        let mean = 2.0 * g.link_count() as f64 / n as f64;
        // m ~ Binomial(n(n-1)/2, p); mean degree = 2m/n
        let pairs = (n * (n - 1) / 2) as f64;
        let sigma = 2.0 * (pairs * p * (1.0 - p)).sqrt() / n as f64;
        assert!((mean - p * (n - 1) as f64).abs() < 3.0 * sigma, "mean {mean} sigma {sigma}");
    }

    #[test]
    fn generator_rejects_bad_parameters() {
        assert!(generate_synthetic(SyntheticModel::UniformRandom { p: 0.0 }, 10, 1).is_err());
        assert!(generate_synthetic(SyntheticModel::UniformRandom { p: 1.5 }, 10, 1).is_err());
        assert!(generate_synthetic(SyntheticModel::PreferentialAttachment { k: 0 }, 10, 1).is_err());
        assert!(generate_synthetic(SyntheticModel::PreferentialAttachment { k: 2 }, 1, 1).is_err());
    }

    #[test]
    fn edge_list_roundtrip() {
        let g = load("x y\ny z\n", false);
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(load_edge_list(buf.as_slice(), false).unwrap(), g);
    }
}
