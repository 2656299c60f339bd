//! The six simplification methods.
//!
//! Sampling (RN, RD, RL, BF) keeps a subset of nodes and returns the subgraph
//! they induce. Merging (CG, BP) partitions the nodes and contracts each cell
//! into a supernode.

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Uniform random nodes.
    #[serde(rename = "RN")]
    Rn,
    /// Random nodes, degree-proportional.
    #[serde(rename = "RD")]
    Rd,
    /// Uniform random links.
    #[serde(rename = "RL")]
    Rl,
    /// Breadth-first neighborhood.
    #[serde(rename = "BF")]
    Bf,
    /// Cluster-growing boxes contracted to supernodes.
    #[serde(rename = "CG")]
    Cg,
    /// Communities contracted to supernodes.
    #[serde(rename = "BP")]
    Bp,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::Rn, Method::Rd, Method::Rl, Method::Bf, Method::Cg, Method::Bp];

    pub fn is_sampling(self) -> bool {
        matches!(self, Method::Rn | Method::Rd | Method::Rl | Method::Bf)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rn => "RN",
            Method::Rd => "RD",
            Method::Rl => "RL",
            Method::Bf => "BF",
            Method::Cg => "CG",
            Method::Bp => "BP",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

/// The size knob of a simplification: node fraction `s` for sampling, box
/// radius `c` for CG, nothing for BP.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeParameter {
    Fraction(f64),
    Radius(usize),
    Unset,
}

impl fmt::Display for SizeParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeParameter::Fraction(s) => write!(f, "{s}"),
            SizeParameter::Radius(c) => write!(f, "{c}"),
            SizeParameter::Unset => f.write_str("-"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleSpec {
    pub method: Method,
    pub fraction: f64,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(method: Method, fraction: f64, seed: u64) -> Result<Self> {
        if !method.is_sampling() {
            return Err(Error::InvalidParameter(format!("{method} is not a sampling method")));
        }
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!("size fraction must be in (0,1], got {fraction}")));
        }
        Ok(Self { method, fraction, seed })
    }

    pub fn target_count(&self, n: usize) -> usize {
        target_count(self.fraction, n)
    }
}

/// `ceil(s * n)` clamped to `1..=n`. A tolerance of 1e-9 absorbs products
/// such as `0.35 * 20 = 7.000000000000001`.
pub fn target_count(fraction: f64, n: usize) -> usize {
    let t = (fraction * n as f64 - 1e-9).ceil();
    (t.max(1.0) as usize).min(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationParams {
    pub max_sweeps: usize,
}

impl Default for PropagationParams {
    fn default() -> Self {
        Self { max_sweeps: 100 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MergeSpec {
    pub method: Method,
    /// CG box radius in hops.
    pub radius: usize,
    pub seed: u64,
    pub detector: PropagationParams,
}

impl MergeSpec {
    pub fn cluster_growing(radius: usize, seed: u64) -> Result<Self> {
        if radius == 0 {
            return Err(Error::InvalidParameter("box radius must be >= 1".into()));
        }
        Ok(Self { method: Method::Cg, radius, seed, detector: PropagationParams::default() })
    }

    pub fn communities(seed: u64, detector: PropagationParams) -> Self {
        Self { method: Method::Bp, radius: 0, seed, detector }
    }
}

/// How original nodes relate to the simplified graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mapping {
    /// `kept[v]` for every original node `v`.
    Sampled(Vec<bool>),
    /// Supernode index of every original node.
    Merged(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimplifyFlag {
    /// RD ran out of positive-degree nodes and filled up uniformly.
    ZeroDegreeFallback { filled: usize },
    /// RL exhausted all links before reaching the target node count.
    Undersized { reached: usize, target: usize },
    /// BF restarted in another component, so the sample may be disconnected.
    Restarted,
}

#[derive(Clone, Debug)]
pub struct SimplifiedNetwork {
    pub graph: Graph,
    pub method: Method,
    pub size: SizeParameter,
    pub seed: u64,
    pub mapping: Mapping,
    pub flags: Vec<SimplifyFlag>,
}

impl SimplifiedNetwork {
    /// Nodes of the simplified graph relative to `original_nodes`.
    pub fn achieved_fraction(&self, original_nodes: usize) -> f64 {
        self.graph.node_count() as f64 / original_nodes as f64
    }

    /// CSV with one row per original node.
    pub fn write_mapping_csv<W: Write>(&self, original: &Graph, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["original_label", "kept_flag_or_supernode_id", "method", "s_or_c", "seed"])?;
        let size = self.size.to_string();
        let seed = self.seed.to_string();
        for v in 0..original.node_count() {
            let value = match &self.mapping {
                Mapping::Sampled(kept) => u8::from(kept[v]).to_string(),
                Mapping::Merged(cells) => cells[v].to_string(),
            };
            w.write_record([original.label(v), value.as_str(), self.method.as_str(), size.as_str(), seed.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs any method with its size knob.
pub fn simplify(g: &Graph, method: Method, size: SizeParameter, seed: u64) -> Result<SimplifiedNetwork> {
    match (method, size) {
        (Method::Cg, SizeParameter::Radius(c)) => merge_cg(g, &MergeSpec::cluster_growing(c, seed)?),
        (Method::Bp, _) => merge_bp(g, &MergeSpec::communities(seed, PropagationParams::default())),
        (m, SizeParameter::Fraction(s)) if m.is_sampling() => sample(g, &SampleSpec::new(m, s, seed)?),
        (m, size) => Err(Error::InvalidParameter(format!("{m} does not take size parameter {size:?}"))),
    }
}

pub fn sample(g: &Graph, spec: &SampleSpec) -> Result<SimplifiedNetwork> {
    match spec.method {
        Method::Rn => sample_rn(g, spec),
        Method::Rd => sample_rd(g, spec),
        Method::Rl => sample_rl(g, spec),
        Method::Bf => sample_bf(g, spec),
        m => Err(Error::InvalidParameter(format!("{m} is not a sampling method"))),
    }
}

fn check_method(spec: &SampleSpec, expected: Method) -> Result<()> {
    if spec.method != expected {
        return Err(Error::InvalidParameter(format!("expected {expected} spec, got {}", spec.method)));
    }
    Ok(())
}

fn nonempty(g: &Graph) -> Result<()> {
    if g.node_count() == 0 {
        return Err(Error::InvalidParameter("graph has no nodes".into()));
    }
    Ok(())
}

fn sampled(base: &Graph, nodes: &[usize], spec: &SampleSpec, flags: Vec<SimplifyFlag>) -> Result<SimplifiedNetwork> {
    let mut kept = vec![false; base.node_count()];
    for &v in nodes {
        kept[v] = true;
    }
    Ok(SimplifiedNetwork {
        graph: base.induced_subgraph(nodes)?,
        method: spec.method,
        size: SizeParameter::Fraction(spec.fraction),
        seed: spec.seed,
        mapping: Mapping::Sampled(kept),
        flags,
    })
}

/// Exactly `ceil(s*n)` nodes uniformly without replacement.
pub fn sample_rn(g: &Graph, spec: &SampleSpec) -> Result<SimplifiedNetwork> {
    check_method(spec, Method::Rn)?;
    nonempty(g)?;
    let base = g.simple_view();
    let t = spec.target_count(base.node_count());
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let nodes = rand::seq::index::sample(&mut rng, base.node_count(), t).into_vec();
    sampled(&base, &nodes, spec, Vec::new())
}

/// Sequential degree-weighted draws without replacement. Weights are the
/// degrees in the original graph.
pub fn sample_rd(g: &Graph, spec: &SampleSpec) -> Result<SimplifiedNetwork> {
    check_method(spec, Method::Rd)?;
    let base = g.simple_view();
    if base.link_count() == 0 {
        return Err(Error::InvalidParameter("RD needs at least one link".into()));
    }
    let n = base.node_count();
    let t = spec.target_count(n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Exponential keys ln(u)/w: taking the largest t keys is distributed like
    // t successive draws proportional to w from the remaining nodes.
    let mut keyed: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut zero = Vec::new();
    for v in 0..n {
        let u: f64 = rng.random();
        let w = base.degree(v);
        if w == 0 {
            zero.push(v);
        } else {
            keyed.push(((1.0 - u).ln() / w as f64, v));
        }
    }
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut nodes: Vec<usize> = keyed.iter().take(t).map(|&(_, v)| v).collect();
    let mut flags = Vec::new();
    if nodes.len() < t {
        zero.shuffle(&mut rng);
        let filled = t - nodes.len();
        nodes.extend(zero.into_iter().take(filled));
        flags.push(SimplifyFlag::ZeroDegreeFallback { filled });
    }
    sampled(&base, &nodes, spec, flags)
}

/// Uniform link draws until the endpoints cover at least `ceil(s*n)` nodes,
/// then the subgraph induced by those endpoints.
pub fn sample_rl(g: &Graph, spec: &SampleSpec) -> Result<SimplifiedNetwork> {
    check_method(spec, Method::Rl)?;
    let base = g.simple_view();
    if base.link_count() == 0 {
        return Err(Error::InvalidParameter("RL needs at least one link".into()));
    }
    let t = spec.target_count(base.node_count());
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut links = base.links().to_vec();
    let mut in_set = vec![false; base.node_count()];
    let mut nodes = Vec::with_capacity(t + 1);
    for i in 0..links.len() {
        if nodes.len() >= t {
            break;
        }
        let j = rng.random_range(i..links.len());
        links.swap(i, j);
        let (u, v) = links[i];
        for w in [u, v] {
            if !in_set[w] {
                in_set[w] = true;
                nodes.push(w);
            }
        }
    }
    let mut flags = Vec::new();
    if nodes.len() < t {
        flags.push(SimplifyFlag::Undersized { reached: nodes.len(), target: t });
    }
    sampled(&base, &nodes, spec, flags)
}

/// Breadth-first sample of the undirected simple view.
pub fn sample_bf(g: &Graph, spec: &SampleSpec) -> Result<SimplifiedNetwork> {
    check_method(spec, Method::Bf)?;
    nonempty(g)?;
    let base = g.simple_undirected_view();
    let t = spec.target_count(base.node_count());
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (nodes, restarted) = breadth_first_nodes(&base, t, None, &mut rng);
    let flags = if restarted { vec![SimplifyFlag::Restarted] } else { Vec::new() };
    sampled(&base, &nodes, spec, flags)
}

/// First `t` nodes discovered by a breadth-first traversal that enqueues each
/// node's neighbors in shuffled order. The traversal starts at `start` (or a
/// uniform random node) and restarts from a uniform unvisited node whenever a
/// component is exhausted. Returns the nodes and whether a restart happened.
pub fn breadth_first_nodes<R: Rng>(g: &Graph, t: usize, start: Option<usize>, rng: &mut R) -> (Vec<usize>, bool) {
    let n = g.node_count();
    let t = t.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut seeds = start.into_iter().chain(order);
    let mut visited = vec![false; n];
    let mut nodes = Vec::with_capacity(t);
    let mut queue = VecDeque::new();
    let mut buf = Vec::new();
    let mut restarted = false;
    while nodes.len() < t {
        let Some(seed) = seeds.find(|&v| !visited[v]) else { break };
        if !nodes.is_empty() {
            restarted = true;
        }
        visited[seed] = true;
        nodes.push(seed);
        queue.clear();
        queue.push_back(seed);
        while nodes.len() < t {
            let Some(v) = queue.pop_front() else { break };
            buf.clear();
            buf.extend(g.neighbors(v).iter().copied().filter(|&w| !visited[w]));
            buf.shuffle(rng);
            for &w in &buf {
                if nodes.len() == t {
                    break;
                }
                visited[w] = true;
                nodes.push(w);
                queue.push_back(w);
            }
        }
    }
    (nodes, restarted)
}

/// A total assignment of nodes to cells `0..cell_count`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    cell_of: Vec<usize>,
    cell_count: usize,
}

impl Partition {
    /// Relabels arbitrary cell labels to `0..k` in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap = std::collections::HashMap::new();
        let cell_of = labels
            .iter()
            .map(|&l| {
                let next = remap.len();
                *remap.entry(l).or_insert(next)
            })
            .collect();
        Self { cell_of, cell_count: remap.len() }
    }

    /// Builds a partition of `0..n` from explicit cells; every node must
    /// appear in exactly one cell.
    pub fn from_cells(n: usize, cells: &[Vec<usize>]) -> Result<Self> {
        let mut cell_of = vec![usize::MAX; n];
        for (c, cell) in cells.iter().enumerate() {
            for &v in cell {
                if v >= n {
                    return Err(Error::UnknownNode(v));
                }
                if cell_of[v] != usize::MAX {
                    return Err(Error::PartialPartition(format!("node {v} is in more than one cell")));
                }
                cell_of[v] = c;
            }
        }
        if let Some(v) = cell_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::PartialPartition(format!("node {v} is in no cell")));
        }
        Ok(Self::from_labels(&cell_of))
    }

    pub fn cell_of(&self) -> &[usize] {
        &self.cell_of
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn len(&self) -> usize {
        self.cell_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_of.is_empty()
    }

    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); self.cell_count];
        for (v, &c) in self.cell_of.iter().enumerate() {
            cells[c].push(v);
        }
        cells
    }
}

/// Cluster-growing: repeatedly pick a uniform uncovered seed and claim every
/// uncovered node within `c` hops of it, walking through uncovered nodes only.
/// Each box becomes a supernode.
pub fn merge_cg(g: &Graph, spec: &MergeSpec) -> Result<SimplifiedNetwork> {
    if spec.method != Method::Cg || spec.radius == 0 {
        return Err(Error::InvalidParameter("CG needs a CG spec with radius >= 1".into()));
    }
    let base = g.simple_undirected_view();
    let boxes = cluster_boxes(&base, spec.radius, spec.seed);
    contract(&base, &boxes, Method::Cg, SizeParameter::Radius(spec.radius), spec.seed)
}

/// Box assignment used by [`merge_cg`].
pub fn cluster_boxes(g: &Graph, radius: usize, seed: u64) -> Partition {
    let n = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut cell = vec![usize::MAX; n];
    let mut boxes = 0;
    let mut queue = VecDeque::new();
    for seed_node in order {
        if cell[seed_node] != usize::MAX {
            continue;
        }
        cell[seed_node] = boxes;
        queue.clear();
        queue.push_back((seed_node, 0usize));
        while let Some((v, d)) = queue.pop_front() {
            if d == radius {
                continue;
            }
            for &w in g.neighbors(v) {
                if cell[w] == usize::MAX {
                    cell[w] = boxes;
                    queue.push_back((w, d + 1));
                }
            }
        }
        boxes += 1;
    }
    Partition { cell_of: cell, cell_count: boxes }
}

/// BP: contract the communities found by [`detect_communities`].
pub fn merge_bp(g: &Graph, spec: &MergeSpec) -> Result<SimplifiedNetwork> {
    if spec.method != Method::Bp {
        return Err(Error::InvalidParameter("expected a BP spec".into()));
    }
    nonempty(g)?;
    let base = g.simple_undirected_view();
    let partition = detect_communities(&base, spec.seed, spec.detector);
    contract(&base, &partition, Method::Bp, SizeParameter::Unset, spec.seed)
}

/// Label propagation on the undirected simple view.
///
/// Nodes start with unique labels and, in a fresh random order each sweep,
/// adopt the label most frequent among their neighbors (ties broken uniformly;
/// a node keeps its label if it is among the most frequent). Sweeps stop once
/// nothing changes or after `max_sweeps`. Labels whose nodes are not connected
/// are then split into their connected pieces, so every cell is connected.
pub fn detect_communities(g: &Graph, seed: u64, params: PropagationParams) -> Partition {
    let g = g.undirected_simple();
    let n = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut label: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut counts = vec![0usize; n];
    let mut touched = Vec::new();
    let mut best = Vec::new();
    for _ in 0..params.max_sweeps {
        order.shuffle(&mut rng);
        let mut changed = false;
        for &v in &order {
            let nbrs = g.neighbors(v);
            if nbrs.is_empty() {
                continue;
            }
            touched.clear();
            for &w in nbrs {
                let l = label[w];
                if counts[l] == 0 {
                    touched.push(l);
                }
                counts[l] += 1;
            }
            let top = touched.iter().map(|&l| counts[l]).max().unwrap_or(0);
            best.clear();
            best.extend(touched.iter().copied().filter(|&l| counts[l] == top));
            for &l in &touched {
                counts[l] = 0;
            }
            if best.contains(&label[v]) {
                continue;
            }
            best.sort_unstable();
            label[v] = best[rng.random_range(0..best.len())];
            changed = true;
        }
        if !changed {
            break;
        }
    }
    split_disconnected(&g, &label)
}

fn split_disconnected(g: &Graph, label: &[usize]) -> Partition {
    let n = g.node_count();
    let mut cell = vec![usize::MAX; n];
    let mut cells = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if cell[start] != usize::MAX {
            continue;
        }
        cell[start] = cells;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if cell[w] == usize::MAX && label[w] == label[start] {
                    cell[w] = cells;
                    queue.push_back(w);
                }
            }
        }
        cells += 1;
    }
    Partition { cell_of: cell, cell_count: cells }
}

/// Contracts every cell of `partition` into a supernode. A superlink joins
/// two supernodes iff some original link crosses their cells.
pub fn merge_by_partition(g: &Graph, partition: &Partition) -> Result<SimplifiedNetwork> {
    let base = g.simple_undirected_view();
    contract(&base, partition, Method::Bp, SizeParameter::Unset, 0)
}

fn contract(
    base: &Graph,
    partition: &Partition,
    method: Method,
    size: SizeParameter,
    seed: u64,
) -> Result<SimplifiedNetwork> {
    if partition.len() != base.node_count() {
        return Err(Error::PartialPartition(format!(
            "partition covers {} nodes, graph has {}",
            partition.len(),
            base.node_count()
        )));
    }
    let cell = partition.cell_of();
    let mut links: Vec<(usize, usize)> = base
        .links()
        .iter()
        .map(|&(u, v)| (cell[u], cell[v]))
        .filter(|(a, b)| a != b)
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    links.sort_unstable();
    links.dedup();
    let graph = Graph::from_index_links(partition.cell_count(), links, false)?;
    Ok(SimplifiedNetwork { graph, method, size, seed, mapping: Mapping::Merged(cell.to_vec()), flags: Vec::new() })
}
