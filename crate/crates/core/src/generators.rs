//! Seeded synthetic network generators.
//!
//! * Erdős–Rényi G(n, m): exactly `m` distinct pairs drawn uniformly without
//!   replacement.
//! * Watts–Strogatz: ring lattice with `ring_k` neighbours per side; each
//!   lattice edge keeps its near endpoint and has its far endpoint rewired
//!   with probability `p_rewire`. Collisions are re-drawn, and a vertex
//!   already adjacent to everyone keeps the original edge.
//! * Barabási–Albert: clique on `m_attach + 1` vertices, then each new vertex
//!   attaches to `m_attach` distinct vertices chosen proportionally to degree.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    ErdosRenyi,
    WattsStrogatz,
    BarabasiAlbert,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::ErdosRenyi,
        ModelKind::BarabasiAlbert,
        ModelKind::WattsStrogatz,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            ModelKind::ErdosRenyi => "er",
            ModelKind::WattsStrogatz => "ws",
            ModelKind::BarabasiAlbert => "ba",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "er" | "erdos_renyi" => Ok(ModelKind::ErdosRenyi),
            "ws" | "watts_strogatz" => Ok(ModelKind::WattsStrogatz),
            "ba" | "barabasi_albert" => Ok(ModelKind::BarabasiAlbert),
            other => Err(Error::param(format!("unknown model `{other}`"))),
        }
    }
}

/// Model family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    ErdosRenyi { m_edges: usize },
    WattsStrogatz { ring_k: usize, p_rewire: f64 },
    BarabasiAlbert { m_attach: usize },
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::ErdosRenyi { .. } => ModelKind::ErdosRenyi,
            Model::WattsStrogatz { .. } => ModelKind::WattsStrogatz,
            Model::BarabasiAlbert { .. } => ModelKind::BarabasiAlbert,
        }
    }

    /// `key=value` rendering used in provenance headers.
    pub fn describe(&self) -> String {
        match *self {
            Model::ErdosRenyi { m_edges } => format!("model=er m_edges={m_edges}"),
            Model::WattsStrogatz { ring_k, p_rewire } => {
                format!("model=ws ring_k={ring_k} p_rewire={p_rewire}")
            }
            Model::BarabasiAlbert { m_attach } => format!("model=ba m_attach={m_attach}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub model: Model,
    pub n: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 2 {
            return Err(Error::param(format!("need n >= 2, got {n}")));
        }
        match self.model {
            Model::ErdosRenyi { m_edges } => {
                let max = max_edges(n);
                if m_edges > max {
                    return Err(Error::param(format!(
                        "m_edges={m_edges} exceeds the {max} pairs available on {n} vertices"
                    )));
                }
            }
            Model::WattsStrogatz { ring_k, p_rewire } => {
                if ring_k < 1 || 2 * ring_k >= n {
                    return Err(Error::param(format!(
                        "ring_k must satisfy 1 <= ring_k < n/2, got ring_k={ring_k}, n={n}"
                    )));
                }
                if !(0.0..=1.0).contains(&p_rewire) {
                    return Err(Error::param(format!(
                        "p_rewire must lie in [0, 1], got {p_rewire}"
                    )));
                }
            }
            Model::BarabasiAlbert { m_attach } => {
                if m_attach < 1 || m_attach >= n {
                    return Err(Error::param(format!(
                        "m_attach must satisfy 1 <= m_attach < n, got m_attach={m_attach}, n={n}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Graph> {
        self.validate()?;
        match self.model {
            Model::ErdosRenyi { m_edges } => gen_erdos_renyi(self.n, m_edges, self.seed),
            Model::WattsStrogatz { ring_k, p_rewire } => {
                gen_watts_strogatz(self.n, ring_k, p_rewire, self.seed)
            }
            Model::BarabasiAlbert { m_attach } => gen_barabasi_albert(self.n, m_attach, self.seed),
        }
    }
}

fn max_edges(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Maps a rank in `0..n(n-1)/2` to the pair `(u, v)`, `u < v`, in
/// lexicographic order.
fn pair_from_rank(rank: usize, n: usize) -> (usize, usize) {
    // Pairs before row u: u*n - u(u+1)/2. Estimate u, then correct.
    let before = |u: usize| u * n - u * (u + 1) / 2;
    let nf = n as f64;
    let disc = (2.0 * nf - 1.0).powi(2) - 8.0 * rank as f64;
    let mut u = (((2.0 * nf - 1.0) - disc.max(0.0).sqrt()) / 2.0).floor() as usize;
    u = u.min(n - 2);
    while u > 0 && before(u) > rank {
        u -= 1;
    }
    while u + 1 < n - 1 && before(u + 1) <= rank {
        u += 1;
    }
    let v = u + 1 + (rank - before(u));
    (u, v)
}

pub fn gen_erdos_renyi(n: usize, m_edges: usize, seed: u64) -> Result<Graph> {
    GenSpec {
        model: Model::ErdosRenyi { m_edges },
        n,
        seed,
    }
    .validate()?;
    let mut rng = rng_from_seed(seed);
    let total = max_edges(n);
    let mut ranks = index::sample(&mut rng, total, m_edges).into_vec();
    ranks.sort_unstable();
    Graph::from_pairs(n, ranks.into_iter().map(|r| pair_from_rank(r, n)))
}

pub fn gen_watts_strogatz(n: usize, ring_k: usize, p_rewire: f64, seed: u64) -> Result<Graph> {
    GenSpec {
        model: Model::WattsStrogatz { ring_k, p_rewire },
        n,
        seed,
    }
    .validate()?;
    let mut rng = rng_from_seed(seed);
    let mut adjacency: Vec<HashSet<usize>> = vec![HashSet::with_capacity(2 * ring_k); n];
    let mut edges = Vec::with_capacity(n * ring_k);
    for offset in 1..=ring_k {
        for u in 0..n {
            let v = (u + offset) % n;
            adjacency[u].insert(v);
            adjacency[v].insert(u);
            edges.push((u, v));
        }
    }
    // Same sweep order as construction: ring distance outer, vertex inner.
    for edge in edges.iter_mut() {
        if !rng.gen_bool(p_rewire) {
            continue;
        }
        let (near, far) = *edge;
        if adjacency[near].len() >= n - 1 {
            continue;
        }
        let target = loop {
            let w = rng.gen_range(0..n);
            if w != near && !adjacency[near].contains(&w) {
                break w;
            }
        };
        adjacency[near].remove(&far);
        adjacency[far].remove(&near);
        adjacency[near].insert(target);
        adjacency[target].insert(near);
        *edge = (near, target);
    }
    Graph::from_pairs(n, edges)
}

pub fn gen_barabasi_albert(n: usize, m_attach: usize, seed: u64) -> Result<Graph> {
    GenSpec {
        model: Model::BarabasiAlbert { m_attach },
        n,
        seed,
    }
    .validate()?;
    let mut rng = rng_from_seed(seed);
    let m0 = m_attach + 1;
    let mut edges = Vec::with_capacity(m0 * (m0 - 1) / 2 + (n - m0) * m_attach);
    // Every edge contributes both endpoints, so a uniform draw from this
    // list is a degree-proportional draw over vertices.
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * edges.capacity());
    for u in 0..m0 {
        for v in (u + 1)..m0 {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(m_attach);
    for new in m0..n {
        chosen.clear();
        while chosen.len() < m_attach {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            edges.push((t, new));
            endpoints.push(t);
            endpoints.push(new);
        }
    }
    Graph::from_pairs(n, edges)
}
