use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// An undirected edge with endpoints stored in increasing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(pub usize, pub usize);

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn other(&self, v: usize) -> usize {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }
}

/// A simple graph over stable vertex ids. Removing vertices never renumbers
/// the survivors, so steps recorded against one graph stay meaningful for
/// the graphs derived from it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Graph {
    vertices: BTreeSet<usize>,
    edges: BTreeSet<Edge>,
}

impl Graph {
    pub fn new(
        vertices: impl IntoIterator<Item = usize>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut g = Graph {
            vertices: vertices.into_iter().collect(),
            edges: BTreeSet::new(),
        };
        for (a, b) in edges {
            if a == b {
                return Err(Error::Hypothesis(format!("loop at vertex {a}")));
            }
            if !g.vertices.contains(&a) || !g.vertices.contains(&b) {
                return Err(Error::Hypothesis(format!(
                    "edge ({a}, {b}) references a missing vertex"
                )));
            }
            g.edges.insert(Edge::new(a, b));
        }
        Ok(g)
    }

    /// Edgeless graph on `0..n`.
    pub fn edgeless(n: usize) -> Self {
        Graph {
            vertices: (0..n).collect(),
            edges: BTreeSet::new(),
        }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        Graph::new(0..n, edges).expect("complete graph is well formed")
    }

    pub fn path(n: usize) -> Self {
        Graph::new(0..n, (1..n).map(|i| (i - 1, i))).expect("path is well formed")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycles need at least three vertices");
        Graph::new(0..n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle is well formed")
    }

    /// `self ⊔ other`, with `other`'s ids shifted past `self`'s largest id.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.vertices.iter().next_back().map_or(0, |v| v + 1);
        let mut g = self.clone();
        g.vertices.extend(other.vertices.iter().map(|v| v + shift));
        g.edges
            .extend(other.edges.iter().map(|e| Edge(e.0 + shift, e.1 + shift)));
        g
    }

    pub fn vertices(&self) -> &BTreeSet<usize> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.vertices.contains(&v)
    }

    pub fn neighbors(&self, v: usize) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter(|e| e.0 == v || e.1 == v)
            .map(|e| e.other(v))
            .collect()
    }

    pub fn degrees(&self) -> BTreeMap<usize, usize> {
        let mut deg: BTreeMap<usize, usize> = self.vertices.iter().map(|&v| (v, 0)).collect();
        for e in &self.edges {
            *deg.entry(e.0).or_default() += 1;
            *deg.entry(e.1).or_default() += 1;
        }
        deg
    }

    pub fn isolated_vertices(&self) -> Vec<usize> {
        self.degrees()
            .into_iter()
            .filter(|&(_, d)| d == 0)
            .map(|(v, _)| v)
            .collect()
    }

    pub fn has_isolated_vertex(&self) -> bool {
        let mut touched = BTreeSet::new();
        for e in &self.edges {
            touched.insert(e.0);
            touched.insert(e.1);
        }
        touched.len() < self.vertices.len()
    }

    /// `G - e`: the edge goes, its endpoints stay.
    pub fn delete_edge(&self, e: Edge) -> Result<Graph> {
        if !self.has_edge(e) {
            return Err(Error::EdgeAbsent(e.0, e.1));
        }
        let mut g = self.clone();
        g.edges.remove(&e);
        Ok(g)
    }

    /// `G ⊙ e`: removes both endpoints and all their neighbors.
    pub fn explode_edge(&self, e: Edge) -> Result<Graph> {
        if !self.has_edge(e) {
            return Err(Error::EdgeAbsent(e.0, e.1));
        }
        let mut gone: BTreeSet<usize> = BTreeSet::from([e.0, e.1]);
        for f in &self.edges {
            if f.0 == e.0 || f.0 == e.1 {
                gone.insert(f.1);
            }
            if f.1 == e.0 || f.1 == e.1 {
                gone.insert(f.0);
            }
        }
        Ok(self.remove_vertices(&gone))
    }

    pub fn remove_vertices(&self, gone: &BTreeSet<usize>) -> Graph {
        Graph {
            vertices: self.vertices.difference(gone).copied().collect(),
            edges: self
                .edges
                .iter()
                .filter(|e| !gone.contains(&e.0) && !gone.contains(&e.1))
                .copied()
                .collect(),
        }
    }

    pub fn induced(&self, keep: &BTreeSet<usize>) -> Graph {
        Graph {
            vertices: self.vertices.intersection(keep).copied().collect(),
            edges: self
                .edges
                .iter()
                .filter(|e| keep.contains(&e.0) && keep.contains(&e.1))
                .copied()
                .collect(),
        }
    }

    /// Renames vertex `v` to `map(v)`; `map` must be injective on the vertex set.
    pub fn relabel(&self, map: impl Fn(usize) -> usize) -> Graph {
        Graph {
            vertices: self.vertices.iter().map(|&v| map(v)).collect(),
            edges: self.edges.iter().map(|e| Edge::new(map(e.0), map(e.1))).collect(),
        }
    }

    /// Dense adjacency bitmasks over the vertices in increasing id order.
    pub(crate) fn masks(&self) -> (Vec<usize>, Vec<u64>) {
        let order: Vec<usize> = self.vertices.iter().copied().collect();
        assert!(order.len() <= 64, "bitmask view needs at most 64 vertices");
        let local: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut adj = vec![0u64; order.len()];
        for e in &self.edges {
            let (a, b) = (local[&e.0], local[&e.1]);
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        (order, adj)
    }

    /// Stable content hash used to identify start graphs of sequences.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for v in &self.vertices {
            hasher.update(format!("v{v};"));
        }
        for e in &self.edges {
            hasher.update(format!("e{},{};", e.0, e.1));
        }
        hex::encode(&hasher.finalize()[..8])
    }
}

/// A graph together with a partition of (a subset of) its vertices into
/// classes. Class `i` is `parts[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionedGraph {
    pub graph: Graph,
    pub parts: Vec<Vec<usize>>,
}

impl PartitionedGraph {
    /// `J|_U`: the subgraph induced by the classes listed in `classes`.
    pub fn restrict(&self, classes: &[usize]) -> PartitionedGraph {
        let keep: BTreeSet<usize> = classes
            .iter()
            .flat_map(|&i| self.parts[i].iter().copied())
            .collect();
        PartitionedGraph {
            graph: self.graph.induced(&keep),
            parts: classes.iter().map(|&i| self.parts[i].clone()).collect(),
        }
    }
}

/// Serialized graph: vertex descriptors, edges by descriptor, optional
/// partition into classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parts: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

impl GraphDocument {
    pub fn from_graph(g: &Graph, name: impl Fn(usize) -> String) -> Self {
        GraphDocument {
            vertices: g.vertices().iter().map(|&v| name(v)).collect(),
            edges: g.edges().iter().map(|e| [name(e.0), name(e.1)]).collect(),
            parts: None,
            alpha: None,
            target: None,
        }
    }

    /// The graph with vertex ids equal to positions in `vertices`.
    pub fn to_graph(&self) -> Result<Graph> {
        let index = self.index()?;
        let lookup = |name: &String| {
            index
                .get(name.as_str())
                .copied()
                .ok_or_else(|| Error::Json(format!("edge references unknown vertex `{name}`")))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for [a, b] in &self.edges {
            edges.push((lookup(a)?, lookup(b)?));
        }
        Graph::new(0..self.vertices.len(), edges)
    }

    pub fn to_partitioned(&self) -> Result<PartitionedGraph> {
        let graph = self.to_graph()?;
        let index = self.index()?;
        let parts = match &self.parts {
            Some(parts) => parts
                .iter()
                .map(|class| {
                    class
                        .iter()
                        .map(|n| {
                            index
                                .get(n.as_str())
                                .copied()
                                .ok_or_else(|| Error::Json(format!("part references unknown vertex `{n}`")))
                        })
                        .collect::<Result<Vec<usize>>>()
                })
                .collect::<Result<Vec<_>>>()?,
            None => return Err(Error::Json("graph document has no `parts`".into())),
        };
        Ok(PartitionedGraph { graph, parts })
    }

    pub fn index(&self) -> Result<BTreeMap<&str, usize>> {
        let mut index = BTreeMap::new();
        for (i, name) in self.vertices.iter().enumerate() {
            if index.insert(name.as_str(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "vertex",
                    id: name.clone(),
                });
            }
        }
        Ok(index)
    }
}
