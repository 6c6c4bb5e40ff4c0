//! Vertex segmentation by k-means over arc lists.
//!
//! Each vertex is represented by the 0/1 indicator row of its outgoing arcs
//! (every undirected edge counts as two arcs). Points are compared to
//! centroids by cosine distance. Centroids are kept as integer sums of member
//! rows, which have the same direction as the mean, so every similarity is
//! computed from exact integer dot products and norms. That makes the result
//! independent of member order and of the thread that computed it.
//!
//! Rules for degenerate points:
//! * a zero row, or a centroid with zero norm, is at distance 1 (maximal);
//! * distance ties go to the smallest cluster index, so a vertex orthogonal
//!   to every centroid lands in the lowest-numbered cluster;
//! * a cluster left empty steals the point farthest from its own centroid
//!   (ties by smallest vertex id) from a cluster holding at least two.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::rng_from_seed;

pub const DEFAULT_MAX_ITER: usize = 50;

/// Assignment of every vertex to one of `k` non-empty clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub k: usize,
    pub assignment: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl Partition {
    /// Validates that every id is below `k` and every cluster is used.
    pub fn from_assignment(k: usize, assignment: Vec<usize>) -> Result<Partition> {
        let mut sizes = vec![0; k];
        for (v, &c) in assignment.iter().enumerate() {
            if c >= k {
                return Err(Error::param(format!(
                    "vertex {v} assigned to cluster {c}, but k={k}"
                )));
            }
            sizes[c] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Degenerate(format!("cluster {empty} is empty")));
        }
        Ok(Partition {
            k,
            assignment,
            sizes,
        })
    }

    /// Every vertex in cluster 0.
    pub fn single(n: usize) -> Partition {
        Partition {
            k: 1,
            assignment: vec![0; n],
            sizes: vec![n],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn cluster_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    /// Members of every cluster, each list in increasing vertex order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KMeansOutcome {
    pub partition: Partition,
    /// Vertices chosen by the seeding step, in cluster order.
    pub initial_centers: Vec<usize>,
    pub sweeps: usize,
    pub converged: bool,
}

struct Centroids {
    k: usize,
    n: usize,
    /// Row-major `k × n` counts.
    counts: Vec<u32>,
    sq_norm: Vec<u64>,
}

impl Centroids {
    fn from_rows(g: &Graph, centers: &[usize]) -> Centroids {
        let n = g.vertex_count();
        let mut c = Centroids {
            k: centers.len(),
            n,
            counts: vec![0; centers.len() * n],
            sq_norm: vec![0; centers.len()],
        };
        for (ci, &v) in centers.iter().enumerate() {
            for &j in g.adj(v) {
                c.counts[ci * n + j] += 1;
            }
        }
        c.refresh_norms();
        c
    }

    fn from_assignment(g: &Graph, k: usize, assignment: &[usize]) -> Centroids {
        let n = g.vertex_count();
        let mut c = Centroids {
            k,
            n,
            counts: vec![0; k * n],
            sq_norm: vec![0; k],
        };
        for (v, &ci) in assignment.iter().enumerate() {
            let base = ci * n;
            for &j in g.adj(v) {
                c.counts[base + j] += 1;
            }
        }
        c.refresh_norms();
        c
    }

    fn refresh_norms(&mut self) {
        for ci in 0..self.k {
            let row = &self.counts[ci * self.n..(ci + 1) * self.n];
            self.sq_norm[ci] = row.iter().map(|&x| (x as u64) * (x as u64)).sum();
        }
    }

    fn similarity(&self, g: &Graph, v: usize, ci: usize) -> f64 {
        let d = g.degree(v);
        let norm = self.sq_norm[ci];
        if d == 0 || norm == 0 {
            return 0.0;
        }
        let base = ci * self.n;
        let dot: u64 = g.adj(v).iter().map(|&j| self.counts[base + j] as u64).sum();
        dot as f64 / ((d as f64).sqrt() * (norm as f64).sqrt())
    }

    fn distance(&self, g: &Graph, v: usize, ci: usize) -> f64 {
        1.0 - self.similarity(g, v, ci)
    }

    fn nearest(&self, g: &Graph, v: usize) -> usize {
        let mut best = 0;
        let mut best_sim = self.similarity(g, v, 0);
        for ci in 1..self.k {
            let s = self.similarity(g, v, ci);
            if s > best_sim {
                best = ci;
                best_sim = s;
            }
        }
        best
    }
}

/// Cosine distance between the arc rows of `a` and `b`.
pub fn row_cosine_distance(g: &Graph, a: usize, b: usize) -> f64 {
    let (ra, rb) = (g.adj(a), g.adj(b));
    if ra.is_empty() || rb.is_empty() {
        return 1.0;
    }
    let (mut i, mut j, mut dot) = (0, 0, 0usize);
    while i < ra.len() && j < rb.len() {
        match ra[i].cmp(&rb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += 1;
                i += 1;
                j += 1;
            }
        }
    }
    1.0 - dot as f64 / ((ra.len() as f64).sqrt() * (rb.len() as f64).sqrt())
}

fn check_k(g: &Graph, k: usize) -> Result<()> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::param("cannot segment a graph with no vertices"));
    }
    if k < 1 || k > n {
        return Err(Error::param(format!(
            "k must satisfy 1 <= k <= n={n}, got {k}"
        )));
    }
    Ok(())
}

/// Farthest-point seeding: the first center is uniform over non-isolated
/// vertices; each further center is a vertex whose cosine distance to its
/// nearest chosen center is maximal, ties drawn uniformly from the seed.
pub fn seed_centers(g: &Graph, k: usize, seed: u64) -> Result<Vec<usize>> {
    check_k(g, k)?;
    let n = g.vertex_count();
    let mut rng = rng_from_seed(seed);
    let active: Vec<usize> = (0..n).filter(|&v| g.degree(v) > 0).collect();
    if active.is_empty() {
        return Ok((0..k).collect());
    }
    let mut centers = Vec::with_capacity(k);
    let mut is_center = vec![false; n];
    let first = active[rng.gen_range(0..active.len())];
    centers.push(first);
    is_center[first] = true;
    let mut nearest: Vec<f64> = active
        .iter()
        .map(|&v| row_cosine_distance(g, v, first))
        .collect();
    while centers.len() < k {
        let far = active
            .iter()
            .zip(&nearest)
            .filter(|(v, _)| !is_center[**v])
            .map(|(_, &d)| d)
            .fold(f64::NEG_INFINITY, f64::max);
        let pool: Vec<usize> = if far > 0.0 {
            active
                .iter()
                .zip(&nearest)
                .filter(|(v, &d)| !is_center[**v] && d == far)
                .map(|(&v, _)| v)
                .collect()
        } else {
            // Every remaining active row duplicates a center (or none is
            // left); fall back to any unused vertex, isolated ones included.
            (0..n).filter(|&v| !is_center[v]).collect()
        };
        let c = pool[rng.gen_range(0..pool.len())];
        centers.push(c);
        is_center[c] = true;
        for (slot, &v) in nearest.iter_mut().zip(&active) {
            *slot = slot.min(row_cosine_distance(g, v, c));
        }
    }
    Ok(centers)
}

/// Lloyd iterations starting from the given center vertices.
pub fn segment_from_centers(
    g: &Graph,
    centers: &[usize],
    max_iter: usize,
) -> Result<KMeansOutcome> {
    let k = centers.len();
    check_k(g, k)?;
    let n = g.vertex_count();
    if let Some(&bad) = centers.iter().find(|&&c| c >= n) {
        return Err(Error::VertexOutOfRange { vertex: bad, n });
    }
    let mut centroids = Centroids::from_rows(g, centers);
    let mut assignment: Vec<usize> = (0..n).map(|v| centroids.nearest(g, v)).collect();
    repair_empty(g, &centroids, &mut assignment);
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_iter {
        sweeps += 1;
        centroids = Centroids::from_assignment(g, k, &assignment);
        let mut changes = 0;
        for (v, slot) in assignment.iter_mut().enumerate() {
            let c = centroids.nearest(g, v);
            if c != *slot {
                *slot = c;
                changes += 1;
            }
        }
        changes += repair_empty(g, &centroids, &mut assignment);
        if changes == 0 {
            converged = true;
            break;
        }
    }
    let partition = Partition::from_assignment(k, assignment)?;
    Ok(KMeansOutcome {
        partition,
        initial_centers: centers.to_vec(),
        sweeps,
        converged,
    })
}

/// Refills empty clusters. Returns the number of moved vertices.
fn repair_empty(g: &Graph, centroids: &Centroids, assignment: &mut [usize]) -> usize {
    let k = centroids.k;
    let mut sizes = vec![0usize; k];
    for &c in assignment.iter() {
        sizes[c] += 1;
    }
    let mut moved = 0;
    while let Some(empty) = sizes.iter().position(|&s| s == 0) {
        let mut best: Option<(usize, f64)> = None;
        for (v, &c) in assignment.iter().enumerate() {
            if sizes[c] < 2 {
                continue;
            }
            let d = centroids.distance(g, v, c);
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((v, d));
            }
        }
        let (v, _) = best.expect("k <= n guarantees a cluster with two members");
        sizes[assignment[v]] -= 1;
        assignment[v] = empty;
        sizes[empty] += 1;
        moved += 1;
    }
    moved
}

pub fn segment_kmeans_arcs_detailed(g: &Graph, params: KMeansParams) -> Result<KMeansOutcome> {
    let centers = seed_centers(g, params.k, params.seed)?;
    segment_from_centers(g, &centers, params.max_iter)
}

/// Partitions the vertices of `g` into `k` non-empty clusters.
pub fn segment_kmeans_arcs(g: &Graph, k: usize, seed: u64, max_iter: usize) -> Result<Partition> {
    Ok(segment_kmeans_arcs_detailed(g, KMeansParams { k, seed, max_iter })?.partition)
}

/// Newman modularity `Σ_c (e_cc/m − (a_c/2m)²)`.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::EdgelessGraph);
    }
    if p.vertex_count() != g.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: g.vertex_count(),
            found: p.vertex_count(),
        });
    }
    let mut internal = vec![0usize; p.k];
    let mut degree_sum = vec![0usize; p.k];
    for u in 0..g.vertex_count() {
        degree_sum[p.cluster_of(u)] += g.degree(u);
    }
    for (u, v) in g.edges() {
        if p.cluster_of(u) == p.cluster_of(v) {
            internal[p.cluster_of(u)] += 1;
        }
    }
    let m = m as f64;
    Ok(internal
        .iter()
        .zip(&degree_sum)
        .map(|(&e, &a)| e as f64 / m - (a as f64 / (2.0 * m)).powi(2))
        .sum())
}
