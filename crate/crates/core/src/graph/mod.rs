//! Immutable simple graphs and the probe-counted adjacency oracle.

mod generate;
mod io;
pub mod small;

pub use generate::{generate, GraphKind};
pub use io::{load_edge_list, parse_edge_list, save_edge_list, write_edge_list};

use crate::error::{Error, Result};

/// Undirected simple graph in compressed adjacency form. Every adjacency
/// list is strictly ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    max_degree: u32,
}

impl Graph {
    /// Builds a graph from an edge list; rejects self-loops, duplicate edges
    /// and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(Error::VertexOutOfRange {
                        vertex: x as u64,
                        n,
                    });
                }
            }
            if u == v {
                return Err(Error::Input(format!("self-loop at vertex {u}")));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::Input(format!("duplicate edge {{{v}, {}}}", w[0])));
            }
        }
        Ok(Self::from_sorted_lists(adj))
    }

    /// Caller guarantees symmetric, sorted, loop-free lists.
    pub(crate) fn from_sorted_lists(adj: Vec<Vec<u32>>) -> Self {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        let mut targets = Vec::with_capacity(adj.iter().map(Vec::len).sum());
        offsets.push(0);
        let mut max_degree = 0;
        for list in adj {
            max_degree = max_degree.max(list.len() as u32);
            targets.extend_from_slice(&list);
            offsets.push(targets.len());
        }
        Graph {
            offsets,
            targets,
            max_degree,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted_lists(vec![Vec::new(); n])
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    #[inline]
    pub fn degree(&self, v: u32) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Canonical edge list: `u < v`, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n() as u32 {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Checks every structural invariant in `O(n + m log Delta)`.
    pub fn check_invariants(&self) -> Result<()> {
        let mut max = 0;
        for v in 0..self.n() as u32 {
            let list = self.neighbors(v);
            max = max.max(list.len() as u32);
            for w in list.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::Internal(format!(
                        "adjacency of {v} not strictly ascending"
                    )));
                }
            }
            for &u in list {
                if u == v {
                    return Err(Error::Internal(format!("self-loop at {v}")));
                }
                if u as usize >= self.n() || !self.has_edge(u, v) {
                    return Err(Error::Internal(format!("asymmetric edge {v} -> {u}")));
                }
            }
        }
        if max != self.max_degree {
            return Err(Error::Internal("stale max degree".into()));
        }
        Ok(())
    }

    pub fn oracle(&self) -> Oracle<'_> {
        Oracle::new(self)
    }

    fn check_vertex(&self, v: u32) -> Result<()> {
        if (v as usize) < self.n() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v as u64,
                n: self.n(),
            })
        }
    }
}

/// Query access to a graph that counts every `(v, i)` probe.
///
/// Repeated identical probes are charged again; callers cache.
#[derive(Debug)]
pub struct Oracle<'g> {
    graph: &'g Graph,
    probes: u64,
    log: Option<Vec<(u32, u32)>>,
}

impl<'g> Oracle<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        Oracle {
            graph,
            probes: 0,
            log: None,
        }
    }

    /// Records every probe as `(vertex, index)`.
    pub fn with_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn probes(&self) -> u64 {
        self.probes
    }

    pub fn log(&self) -> Option<&[(u32, u32)]> {
        self.log.as_deref()
    }

    pub fn reset(&mut self) {
        self.probes = 0;
        if let Some(log) = &mut self.log {
            log.clear();
        }
    }

    /// The `i`-th smallest neighbour of `v` (1-based), or `None` past the end.
    pub fn neighbor_probe(&mut self, v: u32, i: u32) -> Result<Option<u32>> {
        self.graph.check_vertex(v)?;
        if i == 0 {
            return Err(Error::Input("probe index is 1-based".into()));
        }
        self.probes += 1;
        if let Some(log) = &mut self.log {
            log.push((v, i));
        }
        Ok(self.graph.neighbors(v).get(i as usize - 1).copied())
    }

    /// All neighbours of `v`, probing until the first absent answer
    /// (`deg(v) + 1` probes).
    pub fn reveal_neighbors(&mut self, v: u32) -> Result<Vec<u32>> {
        self.graph.check_vertex(v)?;
        let list = self.graph.neighbors(v);
        let charged = list.len() as u32 + 1;
        self.probes += charged as u64;
        if let Some(log) = &mut self.log {
            log.extend((1..=charged).map(|i| (v, i)));
        }
        Ok(list.to_vec())
    }
}
