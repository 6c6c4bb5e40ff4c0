//! Immutable undirected simple graphs and the edge-list text format.
//!
//! Vertices are dense ids `0..n`. Adjacency is stored in compressed rows with
//! every row strictly increasing, so membership tests are binary searches.
//!
//! Edge-list files hold one edge per line as two whitespace-separated
//! integers. Lines starting with `#` are comments, and the first
//! non-comment line may be an `n=<int>` header fixing the vertex count
//! (otherwise `n` is one more than the largest id seen).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Unordered vertex pairs. [`EdgeList::normalized`] orients each pair as
/// `(min, max)`, sorts and deduplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeList {
    pub edges: Vec<(usize, usize)>,
}

impl EdgeList {
    pub fn new(edges: Vec<(usize, usize)>) -> Self {
        EdgeList { edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn normalized(&self) -> EdgeList {
        let mut edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| if u <= v { (u, v) } else { (v, u) })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        EdgeList { edges }
    }

    /// Largest endpoint id plus one, or 0 for an empty list.
    pub fn implied_vertex_count(&self) -> usize {
        self.edges
            .iter()
            .map(|&(u, v)| u.max(v) + 1)
            .max()
            .unwrap_or(0)
    }
}

impl From<Vec<(usize, usize)>> for EdgeList {
    fn from(edges: Vec<(usize, usize)>) -> Self {
        EdgeList::new(edges)
    }
}

impl FromIterator<(usize, usize)> for EdgeList {
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        EdgeList::new(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Graph {
    /// Builds a simple graph on `n` vertices. Duplicate and reversed pairs
    /// collapse into one edge; self-loops and out-of-range endpoints are errors.
    pub fn from_edges(n: usize, edges: &EdgeList) -> Result<Graph> {
        for &(u, v) in &edges.edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
        }
        let normalized = edges.normalized();
        let mut degree = vec![0usize; n];
        for &(u, v) in &normalized.edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0usize; offsets[n]];
        // Two passes over the sorted pairs: smaller neighbours first, then
        // larger ones, which leaves every row strictly increasing.
        for &(u, v) in &normalized.edges {
            targets[cursor[v]] = u;
            cursor[v] += 1;
        }
        for &(u, v) in &normalized.edges {
            targets[cursor[u]] = v;
            cursor[u] += 1;
        }
        Ok(Graph { offsets, targets })
    }

    pub fn from_pairs<I>(n: usize, pairs: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Graph::from_edges(n, &pairs.into_iter().collect())
    }

    pub fn empty(n: usize) -> Graph {
        Graph {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    fn check(&self, u: usize) -> Result<()> {
        if u < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: u,
                n: self.vertex_count(),
            })
        }
    }

    /// Γ(u) as a strictly increasing slice.
    pub fn neighbors(&self, u: usize) -> Result<&[usize]> {
        self.check(u)?;
        Ok(self.adj(u))
    }

    /// Unchecked variant of [`Graph::neighbors`]; panics when `u >= n`.
    #[inline]
    pub fn adj(&self, u: usize) -> &[usize] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count())
            .map(|u| self.degree(u))
            .max()
            .unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> Result<bool> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.contains_edge(u, v))
    }

    /// Unchecked membership test; panics when `u >= n`.
    #[inline]
    pub fn contains_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.adj(a).binary_search(&b).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            self.adj(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn edge_list(&self) -> EdgeList {
        self.edges().collect()
    }

    /// Applies `perm` (old id → new id) to every vertex.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: self.vertex_count(),
                found: perm.len(),
            });
        }
        Graph::from_pairs(
            self.vertex_count(),
            self.edges().map(|(u, v)| (perm[u], perm[v])),
        )
    }
}

/// Parses the edge-list format. Returns the vertex count (from the header, or
/// inferred) and the edges in file order.
pub fn parse_edge_list<R: Read>(reader: R) -> Result<(usize, EdgeList)> {
    let mut header_n = None;
    let mut seen_data = false;
    let mut edges = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !seen_data {
            seen_data = true;
            if let Some(rest) = trimmed.strip_prefix("n=") {
                let n = rest.trim().parse::<usize>().map_err(|e| Error::Parse {
                    line: lineno,
                    message: format!("bad vertex-count header `{trimmed}`: {e}"),
                })?;
                header_n = Some(n);
                continue;
            }
        }
        let mut fields = trimmed.split_whitespace();
        let endpoint = |fields: &mut std::str::SplitWhitespace| -> Result<usize> {
            let tok = fields.next().ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("expected two vertex ids, got `{trimmed}`"),
            })?;
            tok.parse::<usize>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("`{tok}` is not a vertex id"),
            })
        };
        let u = endpoint(&mut fields)?;
        let v = endpoint(&mut fields)?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("trailing fields in `{trimmed}`"),
            });
        }
        edges.push((u, v));
    }
    let edges = EdgeList::new(edges);
    let implied = edges.implied_vertex_count();
    let n = match header_n {
        Some(n) if n < implied => {
            return Err(Error::VertexOutOfRange {
                vertex: implied - 1,
                n,
            })
        }
        Some(n) => n,
        None => implied,
    };
    Ok((n, edges))
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<(usize, EdgeList)> {
    parse_edge_list(File::open(path)?)
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let (n, edges) = load_edge_list(path)?;
    Graph::from_edges(n, &edges)
}

/// Writes `g` with an `n=` header so isolated trailing vertices survive a
/// round trip. Each line of `comments` is emitted first, prefixed by `# `.
pub fn write_edge_list<W: Write>(g: &Graph, comments: &[String], mut out: W) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "n={}", g.vertex_count())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    save_edge_list_with(g, &[], path)
}

pub fn save_edge_list_with(g: &Graph, comments: &[String], path: impl AsRef<Path>) -> Result<()> {
    write_edge_list(g, comments, BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Graph {
        Graph::from_pairs(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn reversed_pair_is_deduplicated() {
        let g = Graph::from_pairs(3, [(0, 1), (1, 0), (1, 2)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1).unwrap(), &[0, 2]);
    }

    #[test]
    fn empty_edge_set() {
        let g = Graph::from_pairs(2, []).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.vertex_count(), 2);
    }

    #[test]
    fn self_loop_rejected() {
        assert!(matches!(
            Graph::from_pairs(4, [(0, 0)]),
            Err(Error::SelfLoop(0))
        ));
    }

    #[test]
    fn endpoint_out_of_range_rejected() {
        assert!(matches!(
            Graph::from_pairs(3, [(0, 3)]),
            Err(Error::VertexOutOfRange { vertex: 3, n: 3 })
        ));
    }

    #[test]
    fn neighbor_queries() {
        assert_eq!(k3().neighbors(0).unwrap(), &[1, 2]);
        let isolated = Graph::from_pairs(3, [(0, 1)]).unwrap();
        assert!(isolated.neighbors(2).unwrap().is_empty());
        let path = Graph::from_pairs(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.neighbors(1).unwrap(), &[0, 2]);
        assert!(path.neighbors(3).is_err());
    }

    #[test]
    fn has_edge_queries() {
        let g = k3();
        assert!(g.has_edge(0, 1).unwrap());
        assert!(!g.has_edge(0, 0).unwrap());
        assert!(!Graph::empty(2).has_edge(0, 1).unwrap());
        assert!(g.has_edge(0, 5).is_err());
    }

    #[test]
    fn rows_are_strictly_increasing() {
        let g = Graph::from_pairs(6, [(5, 0), (3, 0), (0, 1), (4, 0), (2, 0), (1, 5)]).unwrap();
        for u in 0..6 {
            assert!(g.adj(u).windows(2).all(|w| w[0] < w[1]), "row {u}");
        }
        assert_eq!(g.adj(0), &[1, 2, 3, 4, 5]);
    }

    #[test]
    fn parse_infers_vertex_count() {
        let (n, edges) = parse_edge_list("0 1\n1 2\n".as_bytes()).unwrap();
        assert_eq!(n, 3);
        assert_eq!(edges.edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn parse_skips_comments_and_reads_header() {
        let (n, edges) = parse_edge_list("# comment\nn=7\n# more\n0 1\n".as_bytes()).unwrap();
        assert_eq!(n, 7);
        assert_eq!(edges.len(), 1);
    }

    #[test]
    fn parse_error_reports_line() {
        match parse_edge_list("0 x".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_edge_list("0 1\n\n2\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn header_smaller_than_ids_is_an_error() {
        assert!(parse_edge_list("n=2\n0 5\n".as_bytes()).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_edge_list("/nonexistent/definitely/missing.txt"),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn round_trip_keeps_isolated_vertices() {
        let g = Graph::from_pairs(6, [(0, 1), (2, 3)]).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &["provenance".into()], &mut buf).unwrap();
        let (n, edges) = parse_edge_list(buf.as_slice()).unwrap();
        assert_eq!(Graph::from_edges(n, &edges).unwrap(), g);
    }
}
