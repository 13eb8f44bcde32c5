//! Small cubic graphs and an exhaustive independent-set oracle.

use std::collections::BTreeSet;

use super::GeneratorError;

/// Largest vertex count the bitmask-based oracle accepts.
const ORACLE_MAX_VERTICES: usize = 32;

/// An undirected, simple, 3-regular graph on vertices `0..n`.
///
/// The constructor validates simplicity and regularity, so holding a
/// value of this type is proof that the graph is usable as reduction
/// input. Edges are stored as `(min, max)` pairs in sorted order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl CubicGraph {
    /// Builds a graph from an edge list given in any order and
    /// orientation. Rejects out-of-range endpoints, self-loops, and
    /// repeated edges as [`GeneratorError::NotSimple`], and any vertex of
    /// degree other than three as [`GeneratorError::NotCubic`].
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GeneratorError> {
        let mut seen = BTreeSet::new();
        let mut degree = vec![0usize; n];
        let mut normalized = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GeneratorError::NotSimple(format!(
                    "edge ({u}, {v}) mentions a vertex outside 0..{n}"
                )));
            }
            if u == v {
                return Err(GeneratorError::NotSimple(format!("self-loop at vertex {u}")));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(GeneratorError::NotSimple(format!(
                    "duplicate edge ({}, {})",
                    e.0, e.1
                )));
            }
            degree[u] += 1;
            degree[v] += 1;
            normalized.push(e);
        }
        if let Some(vertex) = (0..n).find(|&v| degree[v] != 3) {
            return Err(GeneratorError::NotCubic {
                vertex,
                degree: degree[vertex],
            });
        }
        normalized.sort_unstable();
        Ok(CubicGraph {
            n,
            edges: normalized,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// The complete graph on four vertices.
    pub fn k4() -> Self {
        CubicGraph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
            .expect("K4 is simple and cubic")
    }

    /// The complete bipartite graph on parts `{0,1,2}` and `{3,4,5}`.
    pub fn k33() -> Self {
        let edges = (0..3).flat_map(|u| (3..6).map(move |v| (u, v)));
        CubicGraph::new(6, edges).expect("K3,3 is simple and cubic")
    }

    /// The 3-dimensional hypercube: vertices are 3-bit strings, edges
    /// join strings differing in exactly one bit.
    pub fn q3() -> Self {
        let edges = (0..8usize).flat_map(|u| {
            (0..3).filter_map(move |bit| {
                let v = u ^ (1 << bit);
                (u < v).then_some((u, v))
            })
        });
        CubicGraph::new(8, edges).expect("Q3 is simple and cubic")
    }

    /// Parses an edge list: one `u v` pair per line. Blank lines and
    /// lines starting with `#` are skipped; the vertex count is one more
    /// than the largest endpoint mentioned.
    pub fn parse(text: &str) -> Result<Self, GeneratorError> {
        let mut edges = Vec::new();
        let mut max_vertex = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let endpoint = |part: Option<&str>| -> Result<usize, GeneratorError> {
                part.and_then(|p| p.parse().ok())
                    .ok_or_else(|| GeneratorError::Parse(format!(
                        "line {}: expected two vertex numbers, got {line:?}",
                        lineno + 1
                    )))
            };
            let u = endpoint(parts.next())?;
            let v = endpoint(parts.next())?;
            if parts.next().is_some() {
                return Err(GeneratorError::Parse(format!(
                    "line {}: trailing tokens after the edge {u} {v}",
                    lineno + 1
                )));
            }
            max_vertex = Some(max_vertex.unwrap_or(0).max(u).max(v));
            edges.push((u, v));
        }
        match max_vertex {
            Some(max) => CubicGraph::new(max + 1, edges),
            None => Err(GeneratorError::Parse("no edges in input".into())),
        }
    }
}

/// Decides exactly, by exhaustive search over vertex subsets, whether
/// `graph` contains an independent set of `t` vertices. Only graphs with
/// at most 32 vertices are accepted so that neighborhoods fit in a word.
pub fn independent_set_oracle(graph: &CubicGraph, t: usize) -> Result<bool, GeneratorError> {
    let n = graph.n();
    if n > ORACLE_MAX_VERTICES {
        return Err(GeneratorError::TooLarge {
            vertices: n,
            max: ORACLE_MAX_VERTICES,
        });
    }
    if t == 0 {
        return Ok(true);
    }
    if t > n {
        return Ok(false);
    }
    let mut adjacency = vec![0u32; n];
    for &(u, v) in graph.edges() {
        adjacency[u] |= 1 << v;
        adjacency[v] |= 1 << u;
    }

    // Extends a partial independent set with vertices from `first..n`,
    // skipping anything adjacent to a previous pick.
    fn extend(adjacency: &[u32], first: usize, blocked: u32, missing: usize) -> bool {
        for v in first..adjacency.len() {
            if adjacency.len() - v < missing {
                return false;
            }
            if blocked & (1 << v) != 0 {
                continue;
            }
            if missing == 1
                || extend(adjacency, v + 1, blocked | adjacency[v] | (1 << v), missing - 1)
            {
                return true;
            }
        }
        false
    }

    Ok(extend(&adjacency, 0, 0, t))
}
