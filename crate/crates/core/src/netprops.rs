//! Global and local structural properties.
//!
//! Global: density, degree mixing (assortativity) and transitivity, always on
//! the undirected simple view. Local: degree (plus in/out degree for directed
//! graphs), clustering coefficient and betweenness, one value per node.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalProperty {
    Degree,
    InDegree,
    OutDegree,
    Clustering,
    Betweenness,
}

impl LocalProperty {
    pub const ALL: [LocalProperty; 5] = [
        LocalProperty::Degree,
        LocalProperty::InDegree,
        LocalProperty::OutDegree,
        LocalProperty::Clustering,
        LocalProperty::Betweenness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LocalProperty::Degree => "degree",
            LocalProperty::InDegree => "in_degree",
            LocalProperty::OutDegree => "out_degree",
            LocalProperty::Clustering => "clustering",
            LocalProperty::Betweenness => "betweenness",
        }
    }
}

impl fmt::Display for LocalProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalProperty {
    Density,
    DegreeMixing,
    Transitivity,
}

impl GlobalProperty {
    pub const ALL: [GlobalProperty; 3] =
        [GlobalProperty::Density, GlobalProperty::DegreeMixing, GlobalProperty::Transitivity];

    pub fn as_str(self) -> &'static str {
        match self {
            GlobalProperty::Density => "density",
            GlobalProperty::DegreeMixing => "degree_mixing",
            GlobalProperty::Transitivity => "transitivity",
        }
    }
}

impl fmt::Display for GlobalProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreeMode {
    Total,
    In,
    Out,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetweennessMode {
    Exact,
    /// Brandes accumulation from `k` uniformly chosen sources, scaled by `n/k`.
    Pivots {
        k: usize,
        seed: u64,
    },
}

/// Per-node degree in index order. Directed graphs count every stored arc;
/// `In`/`Out` require a directed graph.
pub fn degree_distribution(g: &Graph, mode: DegreeMode) -> Result<Vec<usize>> {
    let n = g.node_count();
    match mode {
        DegreeMode::Total => Ok((0..n).map(|v| g.degree(v)).collect()),
        _ if !g.is_directed() => Err(Error::InvalidParameter("in/out degree needs a directed graph".into())),
        DegreeMode::In => Ok((0..n).map(|v| g.in_neighbors(v).len()).collect()),
        DegreeMode::Out => Ok((0..n).map(|v| g.neighbors(v).len()).collect()),
    }
}

/// Number of links among the neighbors of each node (simple undirected graph).
fn neighbor_links(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut mark = vec![usize::MAX; n];
    (0..n)
        .map(|v| {
            for &u in g.neighbors(v) {
                mark[u] = v;
            }
            let twice: usize =
                g.neighbors(v).iter().map(|&u| g.neighbors(u).iter().filter(|&&w| mark[w] == v).count()).sum();
            twice / 2
        })
        .collect()
}

/// Fraction of linked neighbor pairs per node; nodes of degree < 2 get 0.
pub fn local_clustering<T: Scalar>(g: &Graph) -> Vec<T> {
    let g = g.undirected_simple();
    neighbor_links(&g)
        .into_iter()
        .enumerate()
        .map(|(v, links)| {
            let k = g.neighbors(v).len();
            if k < 2 {
                T::zero()
            } else {
                T::from_usize_lossy(links) / T::from_usize_lossy(k * (k - 1) / 2)
            }
        })
        .collect()
}

/// 2m / (n(n-1)) on the undirected simple view; 0 when n <= 1.
pub fn density<T: Scalar>(g: &Graph) -> T {
    let g = g.undirected_simple();
    let n = g.node_count();
    if n <= 1 {
        return T::zero();
    }
    T::from_usize_lossy(2 * g.link_count()) / (T::from_usize_lossy(n) * T::from_usize_lossy(n - 1))
}

/// Pearson correlation of endpoint degrees over all links, each link counted
/// in both orientations. `None` without links or with zero degree variance.
pub fn degree_mixing<T: Scalar>(g: &Graph) -> Option<T> {
    let g = g.undirected_simple();
    let m = g.link_count();
    if m == 0 {
        return None;
    }
    // accumulate in f64 so f32 callers see the same cancellation behavior
    let (mut sum, mut sum_sq, mut sum_prod) = (0.0f64, 0.0f64, 0.0f64);
    for &(u, v) in g.links() {
        let (du, dv) = (g.degree(u) as f64, g.degree(v) as f64);
        sum += du + dv;
        sum_sq += du * du + dv * dv;
        sum_prod += 2.0 * du * dv;
    }
    let count = 2.0 * m as f64;
    let mean = sum / count;
    let var = sum_sq / count - mean * mean;
    if var <= f64::EPSILON * sum_sq / count {
        return None;
    }
    let cov = sum_prod / count - mean * mean;
    Some(T::from_f64_lossy(cov / var))
}

/// Closed triplets over connected triplets; `None` when there are no triplets.
pub fn transitivity<T: Scalar>(g: &Graph) -> Option<T> {
    let g = g.undirected_simple();
    let closed: usize = neighbor_links(&g).into_iter().sum();
    let triplets: usize = (0..g.node_count())
        .map(|v| {
            let k = g.neighbors(v).len();
            k * k.saturating_sub(1) / 2
        })
        .sum();
    if triplets == 0 {
        None
    } else {
        Some(T::from_usize_lossy(closed) / T::from_usize_lossy(triplets))
    }
}

const SOURCE_CHUNKS: usize = 32;

/// Unnormalized betweenness on the undirected simple view: for each node,
/// the sum over unordered pairs `{s,t}` of the share of shortest s-t paths
/// passing through it.
///
/// Sources are processed in parallel in a fixed number of contiguous chunks
/// whose partial sums are combined in chunk order, so the result does not
/// depend on the thread count.
pub fn betweenness_counts<T: Scalar>(g: &Graph, mode: BetweennessMode) -> Vec<T> {
    let g = g.undirected_simple();
    let n = g.node_count();
    let (sources, scale) = match mode {
        BetweennessMode::Pivots { k, seed } if k < n => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pivots = rand::seq::index::sample(&mut rng, n, k).into_vec();
            pivots.sort_unstable();
            (pivots, T::from_usize_lossy(n) / T::from_usize_lossy(k.max(1)))
        }
        _ => ((0..n).collect(), T::one()),
    };
    if n == 0 || sources.is_empty() {
        return vec![T::zero(); n];
    }
    let chunk = sources.len().div_ceil(SOURCE_CHUNKS);
    let partials: Vec<Vec<T>> = sources
        .par_chunks(chunk)
        .map(|chunk| {
            let mut acc = vec![T::zero(); n];
            let mut state = BrandesState::new(n);
            for &s in chunk {
                state.accumulate(&g, s, &mut acc);
            }
            acc
        })
        .collect();
    let half = T::from_f64_lossy(0.5);
    let mut total = vec![T::zero(); n];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t = *t + p;
        }
    }
    total.into_iter().map(|b| b * half * scale).collect()
}

/// Betweenness divided by `(n-1)(n-2)/2`, so values lie in [0,1]. All zeros when n < 3.
pub fn betweenness<T: Scalar>(g: &Graph, mode: BetweennessMode) -> Vec<T> {
    let n = g.node_count();
    if n < 3 {
        return vec![T::zero(); n];
    }
    let norm = T::from_usize_lossy((n - 1) * (n - 2)) * T::from_f64_lossy(0.5);
    betweenness_counts::<T>(g, mode).into_iter().map(|b| b / norm).collect()
}

struct BrandesState<T> {
    stack: Vec<usize>,
    queue: std::collections::VecDeque<usize>,
    dist: Vec<usize>,
    sigma: Vec<T>,
    delta: Vec<T>,
}

impl<T: Scalar> BrandesState<T> {
    fn new(n: usize) -> Self {
        Self {
            stack: Vec::with_capacity(n),
            queue: std::collections::VecDeque::with_capacity(n),
            dist: vec![usize::MAX; n],
            sigma: vec![T::zero(); n],
            delta: vec![T::zero(); n],
        }
    }

    /// Adds the dependencies of source `s` (both orientations) into `acc`.
    fn accumulate(&mut self, g: &Graph, s: usize, acc: &mut [T]) {
        for &v in &self.stack {
            self.dist[v] = usize::MAX;
            self.sigma[v] = T::zero();
            self.delta[v] = T::zero();
        }
        self.stack.clear();
        self.dist[s] = 0;
        self.sigma[s] = T::one();
        self.queue.push_back(s);
        while let Some(v) = self.queue.pop_front() {
            self.stack.push(v);
            for &w in g.neighbors(v) {
                if self.dist[w] == usize::MAX {
                    self.dist[w] = self.dist[v] + 1;
                    self.queue.push_back(w);
                }
                if self.dist[w] == self.dist[v] + 1 {
                    self.sigma[w] = self.sigma[w] + self.sigma[v];
                }
            }
        }
        // predecessors of w are its neighbors one step closer to s
        for i in (0..self.stack.len()).rev() {
            let w = self.stack[i];
            let coeff = (T::one() + self.delta[w]) / self.sigma[w];
            for &v in g.neighbors(w) {
                if self.dist[v] != usize::MAX && self.dist[v] + 1 == self.dist[w] {
                    self.delta[v] = self.delta[v] + self.sigma[v] * coeff;
                }
            }
            if w != s {
                acc[w] = acc[w] + self.delta[w];
            }
        }
    }
}

/// All eight properties of one graph. Undefined global values stay `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport<T> {
    pub directed: bool,
    pub node_count: usize,
    pub link_count: usize,
    pub density: T,
    pub degree_mixing: Option<T>,
    pub transitivity: Option<T>,
    pub degree: Vec<T>,
    pub in_degree: Option<Vec<T>>,
    pub out_degree: Option<Vec<T>>,
    pub clustering: Vec<T>,
    pub betweenness: Vec<T>,
}

impl<T: Scalar> PropertyReport<T> {
    pub fn global(&self, p: GlobalProperty) -> Option<T> {
        match p {
            GlobalProperty::Density => Some(self.density),
            GlobalProperty::DegreeMixing => self.degree_mixing,
            GlobalProperty::Transitivity => self.transitivity,
        }
    }

    pub fn local(&self, p: LocalProperty) -> Option<&[T]> {
        match p {
            LocalProperty::Degree => Some(&self.degree),
            LocalProperty::InDegree => self.in_degree.as_deref(),
            LocalProperty::OutDegree => self.out_degree.as_deref(),
            LocalProperty::Clustering => Some(&self.clustering),
            LocalProperty::Betweenness => Some(&self.betweenness),
        }
    }

    pub fn local_properties(&self) -> Vec<LocalProperty> {
        LocalProperty::ALL.into_iter().filter(|&p| self.local(p).is_some()).collect()
    }

    pub fn globals(&self) -> BTreeMap<GlobalProperty, Option<T>> {
        GlobalProperty::ALL.into_iter().map(|p| (p, self.global(p))).collect()
    }

    /// `node_label,value` rows for one local property.
    pub fn write_distribution_csv<W: Write>(&self, g: &Graph, p: LocalProperty, out: W) -> Result<()> {
        let values =
            self.local(p).ok_or_else(|| Error::InvalidParameter(format!("{p} is not available for this graph")))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node_label", "value"])?;
        for (v, x) in values.iter().enumerate() {
            w.write_record([g.label(v), x.to_string().as_str()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// The three global values as one JSON object; undefined values are `null`.
    pub fn globals_json(&self) -> serde_json::Value {
        let num = |x: Option<T>| x.map_or(serde_json::Value::Null, |x| serde_json::json!(x.to_f64_lossy()));
        serde_json::json!({
            "nodes": self.node_count,
            "links": self.link_count,
            "density": num(Some(self.density)),
            "degree_mixing": num(self.degree_mixing),
            "transitivity": num(self.transitivity),
        })
    }
}

fn as_scalars<T: Scalar>(counts: Vec<usize>) -> Vec<T> {
    counts.into_iter().map(T::from_usize_lossy).collect()
}

/// Computes every property. Degree distributions use the simple view that
/// keeps direction; everything else uses the undirected simple view.
pub fn full_report<T: Scalar>(g: &Graph, mode: BetweennessMode) -> PropertyReport<T> {
    let directed_view = g.simple_view();
    let undirected = g.undirected_simple();
    let (in_degree, out_degree) = if g.is_directed() {
        (
            Some(as_scalars(degree_distribution(&directed_view, DegreeMode::In).expect("directed"))),
            Some(as_scalars(degree_distribution(&directed_view, DegreeMode::Out).expect("directed"))),
        )
    } else {
        (None, None)
    };
    PropertyReport {
        directed: g.is_directed(),
        node_count: undirected.node_count(),
        link_count: undirected.link_count(),
        density: density(&undirected),
        degree_mixing: degree_mixing(&undirected),
        transitivity: transitivity(&undirected),
        degree: as_scalars(degree_distribution(&directed_view, DegreeMode::Total).expect("total degree")),
        in_degree,
        out_degree,
        clustering: local_clustering(&undirected),
        betweenness: betweenness(&undirected, mode),
    }
}
