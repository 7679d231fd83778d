//! Undirected, unweighted simple graphs and bipartitions of their vertices.

mod generate;
mod maxcut;

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::generate_erdos_renyi;
pub use maxcut::{
    brute_force_maxcut, is_one_exchange_optimal, one_exchange_from, one_exchange_maxcut, CutResult,
    BRUTE_FORCE_MAX_VERTICES,
};

/// A MaxCut instance. Every present edge has weight 1.
///
/// Edges are stored as `(u, v)` with `u < v`, sorted lexicographically, so
/// two graphs with the same edge set compare equal and serialize to the same
/// bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    #[serde(default)]
    seed: Option<u64>,
}

impl Graph {
    /// Builds a graph, canonicalizing edge orientation and order.
    ///
    /// Self-loops, duplicate edges and endpoints `>= n` are rejected; the
    /// message names the offending position in `edges`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("vertex count must be positive".into()));
        }
        let mut canonical = Vec::new();
        for (index, (u, v)) in edges.into_iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {index} ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("edge {index} ({u}, {v}) is a self-loop")));
            }
            canonical.push((u.min(v), u.max(v)));
        }
        canonical.sort_unstable();
        if let Some(pair) = canonical.windows(2).find(|w| w[0] == w[1]) {
            let (u, v) = pair[0];
            return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
        }
        Ok(Graph {
            n,
            edges: canonical,
            seed: None,
        })
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn complete(n: usize) -> Result<Self> {
        Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!(
                "a cycle needs at least 3 vertices, got {n}"
            )));
        }
        Graph::new(n, (0..n).map(|u| (u, (u + 1) % n)))
    }

    pub fn path(n: usize) -> Result<Self> {
        Graph::new(n, (1..n).map(|v| (v - 1, v)))
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

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Neighbour lists indexed by vertex.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n];
        if perm.len() != self.n
            || perm
                .iter()
                .any(|&p| p >= self.n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidArgument(
                "relabeling is not a permutation of the vertices".into(),
            ));
        }
        Ok(Graph::new(self.n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))?.with_seed(self.seed))
    }

    /// Cut size of the assignment whose bit `v` selects the side of vertex `v`.
    pub fn cut_of_mask(&self, mask: u64) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| ((mask >> u) ^ (mask >> v)) & 1 == 1)
            .count()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawGraph = serde_json::from_str(text).map_err(|e| Error::json("graph", e))?;
        Ok(Graph::new(raw.n, raw.edges)?.with_seed(raw.seed))
    }

    /// Canonical compact JSON: `{"n":3,"edges":[[0,1],[0,2],[1,2]],"seed":null}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization cannot fail")
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawGraph::deserialize(deserializer)?;
        Graph::new(raw.n, raw.edges)
            .map(|g| g.with_seed(raw.seed))
            .map_err(serde::de::Error::custom)
    }
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match Graph::from_json(&text) {
        Err(Error::Json { source, .. }) => Err(Error::json(path.display().to_string(), source)),
        Err(Error::InvalidGraph(msg)) => Err(Error::InvalidGraph(format!("{}: {msg}", path.display()))),
        other => other,
    }
}

pub fn write_graph(graph: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, graph.to_json()).map_err(|e| Error::io(path, e))
}

/// A two-sided assignment of vertices: `true` places a vertex in subset 1.
///
/// Subset 0 corresponds to spin +1 (Pauli-Z eigenvalue +1, qubit value 0)
/// and subset 1 to spin -1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition(Vec<bool>);

impl Partition {
    pub fn new(sides: Vec<bool>) -> Self {
        Partition(sides)
    }

    pub fn all_zeros(n: usize) -> Self {
        Partition(vec![false; n])
    }

    /// Little-endian: vertex `v` takes bit `v` of `index`.
    pub fn from_index(index: u64, n: usize) -> Self {
        Partition((0..n).map(|v| (index >> v) & 1 == 1).collect())
    }

    pub fn to_index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (v, &side)| acc | (u64::from(side) << v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn side(&self, vertex: usize) -> bool {
        self.0[vertex]
    }

    pub fn sides(&self) -> &[bool] {
        &self.0
    }

    pub fn flip(&mut self, vertex: usize) {
        self.0[vertex] = !self.0[vertex];
    }

    pub fn complement(&self) -> Self {
        Partition(self.0.iter().map(|s| !s).collect())
    }
}

/// Vertex 0 is printed first.
impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|&s| f.write_str(if s { "1" } else { "0" }))
    }
}

/// Serialized as a per-vertex array of 0/1.
impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter().map(|&s| u8::from(s)))
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let bits = Vec::<u8>::deserialize(deserializer)?;
        bits.into_iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(serde::de::Error::custom(format!(
                    "partition entry {other} is not 0 or 1"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Partition)
    }
}

/// Number of edges whose endpoints lie on different sides.
pub fn cut_value(graph: &Graph, partition: &Partition) -> Result<usize> {
    if partition.len() != graph.n() {
        return Err(Error::PartitionLength {
            expected: graph.n(),
            got: partition.len(),
        });
    }
    Ok(graph
        .edges()
        .iter()
        .filter(|&&(u, v)| partition.side(u) != partition.side(v))
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle() -> Graph {
        Graph::complete(3).unwrap()
    }

    #[test]
    fn cut_value_examples() {
        let k3 = triangle();
        assert_eq!(cut_value(&k3, &Partition::from_index(0b000, 3)).unwrap(), 0);
        assert_eq!(cut_value(&k3, &Partition::from_index(0b001, 3)).unwrap(), 2);
        let path = Graph::path(3).unwrap();
        assert_eq!(cut_value(&path, &Partition::from_index(0b010, 3)).unwrap(), 2);
    }

    #[test]
    fn cut_value_rejects_length_mismatch() {
        let err = cut_value(&triangle(), &Partition::all_zeros(2)).unwrap_err();
        assert!(matches!(err, Error::PartitionLength { expected: 3, got: 2 }));
    }

    #[test]
    fn edges_are_canonicalized() {
        let g = Graph::new(4, [(3, 1), (0, 2), (1, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 3)]);
    }

    #[test]
    fn invalid_edges_rejected() {
        assert!(Graph::new(3, [(1, 1)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
        let dup = Graph::new(3, [(0, 1), (1, 0)]).unwrap_err();
        assert!(dup.to_string().contains("duplicate"), "{dup}");
        assert!(Graph::new(0, []).is_err());
    }

    #[test]
    fn canonical_json() {
        assert_eq!(
            triangle().to_json(),
            r#"{"n":3,"edges":[[0,1],[0,2],[1,2]],"seed":null}"#
        );
        let seeded = triangle().with_seed(Some(7));
        assert_eq!(Graph::from_json(&seeded.to_json()).unwrap(), seeded);
    }

    #[test]
    fn json_self_loop_rejected() {
        let err = Graph::from_json(r#"{"n":2,"edges":[[0,0]]}"#).unwrap_err();
        assert!(err.to_string().contains("self-loop"), "{err}");
        let err = Graph::from_json(r#"{"n":2,"edges":[[0,2]]}"#).unwrap_err();
        assert!(err.to_string().contains("edge 0"), "{err}");
        let err = Graph::from_json(r#"{"n":2,"edges":[[0,1]"#).unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        let g = generate_erdos_renyi(12, 0.4, 99).unwrap();
        write_graph(&g, &path).unwrap();
        assert_eq!(read_graph(&path).unwrap(), g);
        let missing = read_graph(dir.path().join("nope.json")).unwrap_err();
        assert!(missing.is_io_or_data());
    }

    #[test]
    fn partition_display_and_index() {
        let p = Partition::from_index(0b110, 3);
        assert_eq!(p.to_string(), "011");
        assert_eq!(p.to_index(), 0b110);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[0,1,1]");
    }

    proptest! {
        #[test]
        fn cut_is_symmetric_under_complement(seed in any::<u64>(), mask in any::<u64>()) {
            let g = generate_erdos_renyi(9, 0.5, seed).unwrap();
            let p = Partition::from_index(mask, 9);
            prop_assert_eq!(cut_value(&g, &p).unwrap(), cut_value(&g, &p.complement()).unwrap());
            prop_assert_eq!(cut_value(&g, &p).unwrap(), g.cut_of_mask(mask));
            prop_assert!(cut_value(&g, &p).unwrap() <= g.edge_count());
        }
    }
}
