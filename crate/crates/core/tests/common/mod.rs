//! Brute-force reference implementations shared by the integration tests.
//! Each one works from the definition and shares no code with the library.

#![allow(dead_code, clippy::needless_range_loop)]

use netsimp::graph::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// G(n, p) on indices with self-loops excluded.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut links = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                links.push((u, v));
            }
        }
    }
    Graph::from_index_links(n, links, false).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut a = vec![vec![false; n]; n];
    for &(u, v) in g.links() {
        if u != v {
            a[u][v] = true;
            a[v][u] = true;
        }
    }
    a
}

pub fn all_pairs_distances(g: &Graph) -> Vec<Vec<Option<usize>>> {
    let a = adjacency(g);
    let n = a.len();
    (0..n)
        .map(|s| {
            let mut d = vec![None; n];
            d[s] = Some(0);
            let mut frontier = vec![s];
            let mut k = 0;
            while !frontier.is_empty() {
                k += 1;
                let mut next = Vec::new();
                for &u in &frontier {
                    for v in 0..n {
                        if a[u][v] && d[v].is_none() {
                            d[v] = Some(k);
                            next.push(v);
                        }
                    }
                }
                frontier = next;
            }
            d
        })
        .collect()
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Exact non-negative fraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frac(pub u128, pub u128);

impl Frac {
    pub fn add(self, o: Frac) -> Frac {
        let (n, d) = (self.0 * o.1 + o.0 * self.1, self.1 * o.1);
        let g = gcd(n, d).max(1);
        Frac(n / g, d / g)
    }
    pub fn to_f64(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}

/// Every simple path from `s` to `t` with exactly `len` links.
fn paths(a: &[Vec<bool>], s: usize, t: usize, len: usize) -> Vec<Vec<usize>> {
    fn walk(a: &[Vec<bool>], path: &mut Vec<usize>, t: usize, left: usize, out: &mut Vec<Vec<usize>>) {
        let u = *path.last().unwrap();
        if left == 0 {
            if u == t {
                out.push(path.clone());
            }
            return;
        }
        for v in 0..a.len() {
            if a[u][v] && !path.contains(&v) {
                path.push(v);
                walk(a, path, t, left - 1, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(a, &mut vec![s], t, len, &mut out);
    out
}

/// Unnormalized betweenness by listing every shortest path of every
/// unordered pair, as exact fractions.
pub fn betweenness_by_enumeration(g: &Graph) -> Vec<Frac> {
    let a = adjacency(g);
    let dist = all_pairs_distances(g);
    let n = a.len();
    let mut b = vec![Frac(0, 1); n];
    for s in 0..n {
        for t in s + 1..n {
            let Some(d) = dist[s][t] else { continue };
            let shortest = paths(&a, s, t, d);
            let total = shortest.len() as u128;
            for v in 0..n {
                if v == s || v == t {
                    continue;
                }
                let through = shortest.iter().filter(|p| p.contains(&v)).count() as u128;
                if through > 0 {
                    b[v] = b[v].add(Frac(through, total));
                }
            }
        }
    }
    b
}

pub fn clustering_by_triples(g: &Graph) -> Vec<f64> {
    let a = adjacency(g);
    let n = a.len();
    (0..n)
        .map(|v| {
            let nb: Vec<usize> = (0..n).filter(|&u| a[v][u]).collect();
            if nb.len() < 2 {
                return 0.0;
            }
            let mut linked = 0;
            let mut pairs = 0;
            for i in 0..nb.len() {
                for j in i + 1..nb.len() {
                    pairs += 1;
                    if a[nb[i]][nb[j]] {
                        linked += 1;
                    }
                }
            }
            linked as f64 / pairs as f64
        })
        .collect()
}

/// 3 x triangles / connected triples, counted over ordered node triples.
pub fn transitivity_by_triples(g: &Graph) -> Option<f64> {
    let a = adjacency(g);
    let n = a.len();
    let (mut closed, mut open) = (0u64, 0u64);
    for v in 0..n {
        for u in 0..n {
            for w in u + 1..n {
                if u != v && w != v && a[v][u] && a[v][w] {
                    open += 1;
                    if a[u][w] {
                        closed += 1;
                    }
                }
            }
        }
    }
    (open > 0).then(|| closed as f64 / open as f64)
}

pub fn density_by_pairs(g: &Graph) -> f64 {
    let a = adjacency(g);
    let n = a.len();
    if n < 2 {
        return 0.0;
    }
    let mut linked = 0;
    for u in 0..n {
        for v in u + 1..n {
            if a[u][v] {
                linked += 1;
            }
        }
    }
    linked as f64 / (n * (n - 1) / 2) as f64
}

/// Degree assortativity in exact integer arithmetic:
/// r = (4M*sum(jk) - S^2) / (2M*sum(j^2+k^2) - S^2) with S = sum(j+k).
pub fn assortativity_exact(g: &Graph) -> Option<f64> {
    let a = adjacency(g);
    let n = a.len();
    let deg: Vec<i128> = (0..n).map(|v| a[v].iter().filter(|&&x| x).count() as i128).collect();
    let (mut m, mut s, mut sq, mut prod) = (0i128, 0i128, 0i128, 0i128);
    for u in 0..n {
        for v in u + 1..n {
            if a[u][v] {
                let (j, k) = (deg[u], deg[v]);
                m += 1;
                s += j + k;
                sq += j * j + k * k;
                prod += j * k;
            }
        }
    }
    let den = 2 * m * sq - s * s;
    (m > 0 && den != 0).then(|| (4 * m * prod - s * s) as f64 / den as f64)
}

/// Largest ECDF gap, evaluating both ECDFs by counting at every observed value.
pub fn ks_by_counting(a: &[f64], b: &[f64]) -> f64 {
    let cdf = |xs: &[f64], x: f64| xs.iter().filter(|&&v| v <= x).count() as f64 / xs.len() as f64;
    a.iter().chain(b).map(|&x| (cdf(a, x) - cdf(b, x)).abs()).fold(0.0, f64::max)
}

/// Average 1-based rank by counting smaller and equal values.
pub fn rank_by_counting(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let less = xs.iter().filter(|&&v| v < x).count() as f64;
            let equal = xs.iter().filter(|&&v| v == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Pearson correlation of the average ranks; `None` when either side is constant.
pub fn spearman_reference(pairs: &[(f64, f64)]) -> Option<f64> {
    let x = rank_by_counting(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let y = rank_by_counting(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

/// Connected in the undirected sense.
pub fn is_connected(g: &Graph) -> bool {
    g.node_count() == 0 || all_pairs_distances(g)[0].iter().all(Option::is_some)
}
