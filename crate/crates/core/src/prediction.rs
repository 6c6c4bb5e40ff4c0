//! Edge pruning, candidate generation and top-N ranking.
//!
//! Scores used for ranking must be computed on the observed graph. Using
//! scores of the original graph would leak the held-out edges.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;

use crate::error::{Error, Result};
use crate::features::VertexScores;
use crate::graph::{EdgeList, Graph};
use crate::rng::rng_from_seed;
use crate::segmentation::Partition;

/// Observed/held-out split of a graph's edges.
#[derive(Debug, Clone, PartialEq)]
pub struct PruneSplit {
    pub observed: Graph,
    pub held_out: EdgeList,
    pub rho: f64,
    pub seed: u64,
}

impl PruneSplit {
    /// Observed edges plus held-out edges.
    pub fn original(&self) -> Result<Graph> {
        let n = self.observed.vertex_count();
        Graph::from_pairs(n, self.observed.edges().chain(self.held_out.iter()))
    }
}

/// `round(rho * m)` with halves rounded up.
pub fn held_out_count(rho: f64, m: usize) -> usize {
    (rho * m as f64 + 0.5).floor() as usize
}

/// Moves `round(rho * m)` uniformly chosen edges into the held-out set.
pub fn prune(g: &Graph, rho: f64, seed: u64) -> Result<PruneSplit> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::param(format!("rho must lie in [0, 1], got {rho}")));
    }
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let count = held_out_count(rho, edges.len()).min(edges.len());
    let mut rng = rng_from_seed(seed);
    let mut picked = index::sample(&mut rng, edges.len(), count).into_vec();
    picked.sort_unstable();
    let mut removed = vec![false; edges.len()];
    for &i in &picked {
        removed[i] = true;
    }
    let held_out: EdgeList = picked.iter().map(|&i| edges[i]).collect();
    let observed = Graph::from_pairs(
        g.vertex_count(),
        edges
            .iter()
            .zip(&removed)
            .filter(|(_, &r)| !r)
            .map(|(&e, _)| e),
    )?;
    Ok(PruneSplit {
        observed,
        held_out,
        rho,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CandidatePolicy {
    /// Every non-adjacent vertex of the target's cluster.
    IntraCluster,
    /// Vertices exactly two hops away in the observed graph.
    Foaf,
}

impl CandidatePolicy {
    pub fn name(self) -> &'static str {
        match self {
            CandidatePolicy::IntraCluster => "intra",
            CandidatePolicy::Foaf => "foaf",
        }
    }
}

impl fmt::Display for CandidatePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CandidatePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intra" | "intra_cluster" => Ok(CandidatePolicy::IntraCluster),
            "foaf" => Ok(CandidatePolicy::Foaf),
            other => Err(Error::param(format!("unknown candidate policy `{other}`"))),
        }
    }
}

fn check_dims(observed: &Graph, partition: &Partition) -> Result<()> {
    if partition.vertex_count() != observed.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: observed.vertex_count(),
            found: partition.vertex_count(),
        });
    }
    Ok(())
}

fn foaf_candidates(observed: &Graph, u: usize, mark: &mut [bool]) -> Vec<usize> {
    let mut out = Vec::new();
    mark[u] = true;
    for &w in observed.adj(u) {
        mark[w] = true;
    }
    for &w in observed.adj(u) {
        for &v in observed.adj(w) {
            if !mark[v] {
                mark[v] = true;
                out.push(v);
            }
        }
    }
    mark[u] = false;
    for &w in observed.adj(u) {
        mark[w] = false;
    }
    for &v in &out {
        mark[v] = false;
    }
    out.sort_unstable();
    out
}

/// Candidate set of `u` under `policy`, in increasing id order.
pub fn candidates(
    observed: &Graph,
    partition: &Partition,
    u: usize,
    policy: CandidatePolicy,
) -> Result<Vec<usize>> {
    check_dims(observed, partition)?;
    observed.neighbors(u)?;
    Ok(match policy {
        CandidatePolicy::IntraCluster => {
            let c = partition.cluster_of(u);
            (0..observed.vertex_count())
                .filter(|&v| {
                    v != u && partition.cluster_of(v) == c && !observed.contains_edge(u, v)
                })
                .collect()
        }
        CandidatePolicy::Foaf => {
            let mut mark = vec![false; observed.vertex_count()];
            foaf_candidates(observed, u, &mut mark)
        }
    })
}

/// Ranked candidate lists, indexed by target vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Recommendations {
    pub lists: Vec<Vec<(usize, f64)>>,
    pub scorer: String,
    pub policy: CandidatePolicy,
    pub top_n: usize,
}

impl Recommendations {
    pub fn targets(&self) -> usize {
        self.lists.len()
    }
}

/// Descending score, ascending id.
fn rank_order(scores: &[f64]) -> impl Fn(&usize, &usize) -> std::cmp::Ordering + '_ {
    move |&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b))
}

/// Top-`top_n` candidates of every vertex ranked by `scores`.
pub fn recommend(
    observed: &Graph,
    partition: &Partition,
    scores: &VertexScores,
    policy: CandidatePolicy,
    top_n: usize,
) -> Result<Recommendations> {
    check_dims(observed, partition)?;
    let n = observed.vertex_count();
    if scores.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: scores.len(),
        });
    }
    if top_n == 0 {
        return Err(Error::param("recommendation list length must be >= 1"));
    }
    let s = &scores.values;
    let lists = match policy {
        CandidatePolicy::IntraCluster => {
            let mut members = partition.members();
            for m in members.iter_mut() {
                m.sort_by(rank_order(s));
            }
            (0..n)
                .map(|u| {
                    members[partition.cluster_of(u)]
                        .iter()
                        .copied()
                        .filter(|&v| v != u && !observed.contains_edge(u, v))
                        .take(top_n)
                        .map(|v| (v, s[v]))
                        .collect()
                })
                .collect()
        }
        CandidatePolicy::Foaf => {
            let mut mark = vec![false; n];
            (0..n)
                .map(|u| {
                    let mut cands = foaf_candidates(observed, u, &mut mark);
                    cands.sort_by(rank_order(s));
                    cands.truncate(top_n);
                    cands.into_iter().map(|v| (v, s[v])).collect()
                })
                .collect()
        }
    };
    Ok(Recommendations {
        lists,
        scorer: scores.feature.name().to_string(),
        policy,
        top_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Feature;

    fn scores(values: Vec<f64>) -> VertexScores {
        VertexScores {
            feature: Feature::Degree,
            values,
        }
    }

    fn complete(n: usize) -> Graph {
        Graph::from_pairs(n, (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))).unwrap()
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(held_out_count(0.1, 100), 10);
        assert_eq!(held_out_count(0.25, 10), 3);
        assert_eq!(held_out_count(0.5, 5), 3);
        assert_eq!(held_out_count(0.0, 7), 0);
        assert_eq!(held_out_count(1.0, 7), 7);
    }

    #[test]
    fn prune_extremes() {
        let g = complete(6);
        let none = prune(&g, 0.0, 1).unwrap();
        assert!(none.held_out.is_empty());
        assert_eq!(none.observed, g);
        let all = prune(&g, 1.0, 1).unwrap();
        assert_eq!(all.observed.edge_count(), 0);
        assert_eq!(all.held_out.len(), 15);
        assert_eq!(all.original().unwrap(), g);
    }

    #[test]
    fn prune_counts_exactly() {
        let g = crate::generators::gen_erdos_renyi(50, 100, 3).unwrap();
        let split = prune(&g, 0.1, 9).unwrap();
        assert_eq!(split.held_out.len(), 10);
        assert_eq!(split.observed.edge_count(), 90);
        for (u, v) in split.held_out.iter() {
            assert!(!split.observed.contains_edge(u, v));
        }
        assert_eq!(split.original().unwrap(), g);
        assert_eq!(split, prune(&g, 0.1, 9).unwrap());
    }

    #[test]
    fn prune_rejects_bad_rho() {
        let g = complete(3);
        assert!(matches!(prune(&g, 1.5, 0), Err(Error::InvalidParameter(_))));
        assert!(prune(&g, -0.1, 0).is_err());
    }

    #[test]
    fn lone_vertex_has_no_intra_candidates() {
        let g = Graph::from_pairs(3, [(0, 1)]).unwrap();
        let p = Partition::from_assignment(2, vec![0, 0, 1]).unwrap();
        assert!(candidates(&g, &p, 2, CandidatePolicy::IntraCluster)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn foaf_on_path() {
        let g = Graph::from_pairs(3, [(0, 1), (1, 2)]).unwrap();
        let p = Partition::single(3);
        assert_eq!(
            candidates(&g, &p, 0, CandidatePolicy::Foaf).unwrap(),
            vec![2]
        );
    }

    #[test]
    fn held_out_triangle_edge_becomes_candidate() {
        // Triangle A = {0,1,2} with (0,2) held out; triangle B = {3,4,5}.
        let observed = Graph::from_pairs(6, [(0, 1), (1, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let p = Partition::from_assignment(2, vec![0, 0, 0, 1, 1, 1]).unwrap();
        assert_eq!(
            candidates(&observed, &p, 0, CandidatePolicy::IntraCluster).unwrap(),
            vec![2]
        );
        assert!(candidates(&observed, &p, 1, CandidatePolicy::IntraCluster)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn candidate_errors() {
        let g = Graph::from_pairs(3, [(0, 1)]).unwrap();
        let p = Partition::single(3);
        assert!(candidates(&g, &p, 3, CandidatePolicy::Foaf).is_err());
        assert!(candidates(&g, &Partition::single(4), 0, CandidatePolicy::Foaf).is_err());
    }

    #[test]
    fn equal_scores_rank_by_id() {
        let g = Graph::from_pairs(5, [(0, 1)]).unwrap();
        let recs = recommend(
            &g,
            &Partition::single(5),
            &scores(vec![0.5; 5]),
            CandidatePolicy::IntraCluster,
            10,
        )
        .unwrap();
        assert_eq!(
            recs.lists[0].iter().map(|x| x.0).collect::<Vec<_>>(),
            vec![2, 3, 4]
        );
        assert_eq!(
            recs.lists[3].iter().map(|x| x.0).collect::<Vec<_>>(),
            vec![0, 1, 2, 4]
        );
    }

    #[test]
    fn higher_scores_first_and_truncated() {
        let g = Graph::empty(4);
        let recs = recommend(
            &g,
            &Partition::single(4),
            &scores(vec![0.1, 0.9, 0.5, 0.7]),
            CandidatePolicy::IntraCluster,
            2,
        )
        .unwrap();
        assert_eq!(recs.lists[0], vec![(1, 0.9), (3, 0.7)]);
        assert_eq!(recs.lists[1], vec![(3, 0.7), (2, 0.5)]);
    }

    #[test]
    fn recommend_dimension_checks() {
        let g = Graph::empty(4);
        assert!(matches!(
            recommend(
                &g,
                &Partition::single(4),
                &scores(vec![0.0; 3]),
                CandidatePolicy::Foaf,
                3
            ),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(recommend(
            &g,
            &Partition::single(4),
            &scores(vec![0.0; 4]),
            CandidatePolicy::Foaf,
            0
        )
        .is_err());
    }

    #[test]
    fn foaf_recommendations_exclude_neighbours() {
        let g = Graph::from_pairs(5, [(0, 1), (1, 2), (2, 3), (1, 3), (3, 4)]).unwrap();
        let recs = recommend(
            &g,
            &Partition::single(5),
            &scores(vec![1.0, 2.0, 3.0, 4.0, 5.0]),
            CandidatePolicy::Foaf,
            5,
        )
        .unwrap();
        assert_eq!(recs.lists[0], vec![(3, 4.0), (2, 3.0)]);
        assert_eq!(recs.lists[4], vec![(2, 3.0), (1, 2.0)]);
    }
}
