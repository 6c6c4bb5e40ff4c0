//! Query-independent vertex scores and pairwise friend-of-a-friend indices.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Authority,
    Degree,
    Transitivity,
}

impl Feature {
    pub const ALL: [Feature; 3] = [Feature::Authority, Feature::Degree, Feature::Transitivity];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Authority => "authority",
            Feature::Degree => "degree",
            Feature::Transitivity => "transitivity",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "authority" => Ok(Feature::Authority),
            "degree" => Ok(Feature::Degree),
            "transitivity" => Ok(Feature::Transitivity),
            other => Err(Error::param(format!("unknown feature `{other}`"))),
        }
    }
}

/// One score per vertex for a named feature.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexScores {
    pub feature: Feature,
    pub values: Vec<f64>,
}

impl VertexScores {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Applies `f` to every score, keeping the feature label.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> VertexScores {
        VertexScores {
            feature: self.feature,
            values: self.values.iter().map(|&x| f(x)).collect(),
        }
    }
}

/// |Γ(u)| divided by the maximum degree.
pub fn degree_coefficient(g: &Graph) -> Result<VertexScores> {
    let max = g.max_degree();
    if max == 0 {
        return Err(Error::EdgelessGraph);
    }
    let max = max as f64;
    Ok(VertexScores {
        feature: Feature::Degree,
        values: (0..g.vertex_count())
            .map(|u| g.degree(u) as f64 / max)
            .collect(),
    })
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Number of edges among the neighbours of `u`.
pub fn neighborhood_edges(g: &Graph, u: usize) -> usize {
    let row = g.adj(u);
    let twice: usize = row
        .iter()
        .map(|&v| sorted_intersection_len(row, g.adj(v)))
        .sum();
    twice / 2
}

/// Local clustering coefficient. Vertices of degree 0 or 1 score 0.
pub fn transitivity_coefficient(g: &Graph) -> VertexScores {
    let values = (0..g.vertex_count())
        .map(|u| {
            let d = g.degree(u);
            if d <= 1 {
                0.0
            } else {
                let wedges = (d * (d - 1) / 2) as f64;
                neighborhood_edges(g, u) as f64 / wedges
            }
        })
        .collect();
    VertexScores {
        feature: Feature::Transitivity,
        values,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitsParams {
    /// Stop once no entry moves by more than this between sweeps.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for HitsParams {
    fn default() -> Self {
        HitsParams {
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HitsOutcome {
    pub scores: VertexScores,
    pub iterations: usize,
    pub converged: bool,
}

/// HITS authority on an undirected graph.
///
/// With a symmetric adjacency matrix the hub and authority equations share
/// one fixed point: the principal eigenvector of `A`. Each sweep computes the
/// hub sums `A·x` and moves to `normalize(x + A·x)`. The added identity keeps
/// the fixed points unchanged but makes the Perron eigenvalue strictly
/// dominant in modulus, so bipartite graphs (stars, even cycles, single
/// edges) converge instead of oscillating between the two sides.
///
/// On disconnected graphs the mass concentrates on the component with the
/// largest spectral radius; other components decay towards zero.
pub fn hits_authority(g: &Graph, params: HitsParams) -> Result<HitsOutcome> {
    if g.edge_count() == 0 {
        return Err(Error::EdgelessGraph);
    }
    if params.tol.is_nan() || params.tol <= 0.0 || params.max_iter == 0 {
        return Err(Error::param("HITS needs tol > 0 and max_iter >= 1"));
    }
    let n = g.vertex_count();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iter {
        iterations += 1;
        for (u, slot) in next.iter_mut().enumerate() {
            let hub: f64 = g.adj(u).iter().map(|&v| x[v]).sum();
            *slot = x[u] + hub;
        }
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut delta: f64 = 0.0;
        for (xi, ni) in x.iter_mut().zip(next.iter()) {
            let updated = ni / norm;
            delta = delta.max((updated - *xi).abs());
            *xi = updated;
        }
        if delta < params.tol {
            converged = true;
            break;
        }
    }
    Ok(HitsOutcome {
        scores: VertexScores {
            feature: Feature::Authority,
            values: x,
        },
        iterations,
        converged,
    })
}

/// Computes `feature` with default parameters. Non-convergence of HITS is
/// not an error here; call [`hits_authority`] directly to inspect it.
pub fn compute_feature(g: &Graph, feature: Feature) -> Result<VertexScores> {
    match feature {
        Feature::Degree => degree_coefficient(g),
        Feature::Transitivity => Ok(transitivity_coefficient(g)),
        Feature::Authority => Ok(hits_authority(g, HitsParams::default())?.scores),
    }
}

/// Degree, transitivity and authority computed on the same graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub degree: VertexScores,
    pub transitivity: VertexScores,
    pub authority: VertexScores,
}

impl FeatureSet {
    pub fn compute(g: &Graph) -> Result<FeatureSet> {
        Ok(FeatureSet {
            degree: compute_feature(g, Feature::Degree)?,
            transitivity: compute_feature(g, Feature::Transitivity)?,
            authority: compute_feature(g, Feature::Authority)?,
        })
    }

    pub fn get(&self, feature: Feature) -> &VertexScores {
        match feature {
            Feature::Degree => &self.degree,
            Feature::Transitivity => &self.transitivity,
            Feature::Authority => &self.authority,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FoafKind {
    CommonNeighbors,
    Jaccard,
    AdamicAdar,
    Salton,
    Sorensen,
}

impl FoafKind {
    pub const ALL: [FoafKind; 5] = [
        FoafKind::CommonNeighbors,
        FoafKind::Jaccard,
        FoafKind::AdamicAdar,
        FoafKind::Salton,
        FoafKind::Sorensen,
    ];
}

impl FromStr for FoafKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "common_neighbors" | "cn" => Ok(FoafKind::CommonNeighbors),
            "jaccard" => Ok(FoafKind::Jaccard),
            "adamic_adar" | "aa" => Ok(FoafKind::AdamicAdar),
            "salton" => Ok(FoafKind::Salton),
            "sorensen" => Ok(FoafKind::Sorensen),
            other => Err(Error::param(format!("unknown FOAF index `{other}`"))),
        }
    }
}

/// Locality index between two distinct vertices. Zero denominators give 0;
/// Adamic–Adar skips common neighbours of degree <= 1.
pub fn foaf_index(g: &Graph, u: usize, v: usize, kind: FoafKind) -> Result<f64> {
    let gu = g.neighbors(u)?;
    let gv = g.neighbors(v)?;
    if u == v {
        return Err(Error::param(format!(
            "FOAF index needs distinct vertices, got {u} twice"
        )));
    }
    let common = || {
        let (mut i, mut j) = (0, 0);
        std::iter::from_fn(move || {
            while i < gu.len() && j < gv.len() {
                match gu[i].cmp(&gv[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        let w = gu[i];
                        i += 1;
                        j += 1;
                        return Some(w);
                    }
                }
            }
            None
        })
    };
    let cn = common().count() as f64;
    let (du, dv) = (gu.len() as f64, gv.len() as f64);
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    Ok(match kind {
        FoafKind::CommonNeighbors => cn,
        FoafKind::Jaccard => ratio(cn, du + dv - cn),
        FoafKind::AdamicAdar => common()
            .map(|w| g.degree(w))
            .filter(|&d| d > 1)
            .map(|d| 1.0 / (d as f64).ln())
            .sum(),
        FoafKind::Salton => ratio(cn, (du * dv).sqrt()),
        FoafKind::Sorensen => ratio(2.0 * cn, du + dv),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(leaves: usize) -> Graph {
        Graph::from_pairs(leaves + 1, (1..=leaves).map(|l| (0, l))).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_pairs(n, (0..n).map(|u| (u, (u + 1) % n))).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn degree_of_star() {
        let s = degree_coefficient(&star(3)).unwrap();
        assert_eq!(s.values[0], 1.0);
        assert!(s.values[1..].iter().all(|&x| x == 1.0 / 3.0));
    }

    #[test]
    fn degree_of_regular_graph_is_one() {
        assert!(degree_coefficient(&cycle(7))
            .unwrap()
            .values
            .iter()
            .all(|&x| x == 1.0));
    }

    #[test]
    fn degree_of_path() {
        let p = Graph::from_pairs(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(
            degree_coefficient(&p).unwrap().values,
            vec![0.5, 1.0, 1.0, 0.5]
        );
    }

    #[test]
    fn degree_of_edgeless_graph_fails() {
        assert!(matches!(
            degree_coefficient(&Graph::empty(3)),
            Err(Error::EdgelessGraph)
        ));
    }

    #[test]
    fn transitivity_examples() {
        let k3 = cycle(3);
        assert_eq!(transitivity_coefficient(&k3).values, vec![1.0; 3]);
        let path = Graph::from_pairs(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(transitivity_coefficient(&path).values, vec![0.0; 3]);
        // Triangle 0-1-2 plus pendant 3 on vertex 0: wedges at 0 are 3, one closed.
        let g = Graph::from_pairs(4, [(0, 1), (1, 2), (0, 2), (0, 3)]).unwrap();
        let t = transitivity_coefficient(&g).values;
        assert!(close(t[0], 1.0 / 3.0, 1e-15));
        assert_eq!(t[3], 0.0);
    }

    #[test]
    fn hits_single_edge() {
        let g = Graph::from_pairs(2, [(0, 1)]).unwrap();
        let out = hits_authority(&g, HitsParams::default()).unwrap();
        assert!(out.converged);
        for &x in &out.scores.values {
            assert!(close(x, std::f64::consts::FRAC_1_SQRT_2, 1e-9));
        }
    }

    #[test]
    fn hits_regular_graph_is_uniform() {
        let g = cycle(9);
        let out = hits_authority(&g, HitsParams::default()).unwrap();
        let expected = 1.0 / 3.0;
        assert!(out.scores.values.iter().all(|&x| close(x, expected, 1e-9)));
    }

    #[test]
    fn hits_star_converges_despite_bipartite_spectrum() {
        let out = hits_authority(&star(4), HitsParams::default()).unwrap();
        assert!(out.converged);
        let v = &out.scores.values;
        assert!(close(v[0], 2.0 / 8f64.sqrt(), 1e-7), "center {}", v[0]);
        for &leaf in &v[1..] {
            assert!(close(leaf, 1.0 / 8f64.sqrt(), 1e-7), "leaf {leaf}");
        }
    }

    #[test]
    fn hits_reports_non_convergence() {
        let g = Graph::from_pairs(12, (0..11).map(|u| (u, u + 1))).unwrap();
        let out = hits_authority(
            &g,
            HitsParams {
                tol: 1e-14,
                max_iter: 3,
            },
        )
        .unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
        let norm: f64 = out.scores.values.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(close(norm, 1.0, 1e-12));
    }

    #[test]
    fn hits_edgeless_fails() {
        assert!(hits_authority(&Graph::empty(4), HitsParams::default()).is_err());
    }

    #[test]
    fn foaf_identical_neighbourhoods() {
        // u=0 and v=4 both adjacent to exactly {1,2,3}.
        let g = Graph::from_pairs(5, [(0, 1), (0, 2), (0, 3), (4, 1), (4, 2), (4, 3)]).unwrap();
        assert_eq!(foaf_index(&g, 0, 4, FoafKind::Jaccard).unwrap(), 1.0);
        assert_eq!(foaf_index(&g, 0, 4, FoafKind::Sorensen).unwrap(), 1.0);
        assert_eq!(foaf_index(&g, 0, 4, FoafKind::Salton).unwrap(), 1.0);
        assert_eq!(
            foaf_index(&g, 0, 4, FoafKind::CommonNeighbors).unwrap(),
            3.0
        );
    }

    #[test]
    fn foaf_disjoint_neighbourhoods() {
        let g = Graph::from_pairs(4, [(0, 1), (2, 3)]).unwrap();
        for kind in FoafKind::ALL {
            assert_eq!(foaf_index(&g, 0, 2, kind).unwrap(), 0.0, "{kind:?}");
        }
        let isolated = Graph::empty(3);
        for kind in FoafKind::ALL {
            assert_eq!(foaf_index(&isolated, 0, 1, kind).unwrap(), 0.0, "{kind:?}");
        }
    }

    #[test]
    fn foaf_partial_overlap() {
        // Γ(0)={1,2}, Γ(5)={2,3}, |Γ(2)|=4 via extra neighbours 4 and 6.
        let g = Graph::from_pairs(7, [(0, 1), (0, 2), (5, 2), (5, 3), (2, 4), (2, 6)]).unwrap();
        assert_eq!(g.degree(2), 4);
        assert_eq!(
            foaf_index(&g, 0, 5, FoafKind::CommonNeighbors).unwrap(),
            1.0
        );
        assert!(close(
            foaf_index(&g, 0, 5, FoafKind::Jaccard).unwrap(),
            1.0 / 3.0,
            1e-15
        ));
        assert!(close(
            foaf_index(&g, 0, 5, FoafKind::AdamicAdar).unwrap(),
            1.0 / 4f64.ln(),
            1e-15
        ));
        assert!(close(
            foaf_index(&g, 0, 5, FoafKind::Salton).unwrap(),
            0.5,
            1e-15
        ));
        assert!(close(
            foaf_index(&g, 0, 5, FoafKind::Sorensen).unwrap(),
            0.5,
            1e-15
        ));
    }

    #[test]
    fn foaf_errors() {
        let g = cycle(4);
        assert!(foaf_index(&g, 1, 1, FoafKind::Jaccard).is_err());
        assert!(foaf_index(&g, 1, 9, FoafKind::Jaccard).is_err());
    }
}
