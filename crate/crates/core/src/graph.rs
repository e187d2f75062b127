//! Static undirected social networks.
//!
//! A [`SocialGraph`] owns a canonical edge list (pairs normalized to
//! `(min, max)` and sorted lexicographically) plus a flat CSR adjacency so
//! the activation hot loop can walk a node's incident edges without pointer
//! chasing. Graphs are immutable after construction; opinions move, the
//! network never does.

use crate::error::{Error, Result};

/// One adjacency slot: the neighbor id and the index of the connecting edge
/// in the canonical edge list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdjEntry {
    pub neighbor: u32,
    pub edge: u32,
}

/// Undirected simple graph over agents `0..n`.
#[derive(Clone, Debug)]
pub struct SocialGraph {
    n: usize,
    edges: Vec<(u32, u32)>,
    offsets: Vec<u32>,
    entries: Vec<AdjEntry>,
}

impl SocialGraph {
    /// Builds a graph from an edge list.
    ///
    /// Edges may be given in any order and orientation; they are normalized
    /// to sorted `(min, max)` pairs. Self-loops, duplicates, and out-of-range
    /// endpoints are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut normalized: Vec<(u32, u32)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::SelfLoop { agent: a as usize });
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if v as usize >= n {
                return Err(Error::EdgeOutOfRange {
                    u: u as usize,
                    v: v as usize,
                    n,
                });
            }
            normalized.push((u, v));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge {
                u: w[0].0 as usize,
                v: w[0].1 as usize,
            });
        }
        if normalized.len() > u32::MAX as usize || n > u32::MAX as usize {
            return Err(Error::invalid("graph too large for 32-bit ids"));
        }

        // CSR adjacency. Scanning the sorted edge list keeps each node's
        // neighbor list ascending: all (a, w) with a < w precede (w, b).
        let mut degree = vec![0u32; n];
        for &(u, v) in &normalized {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = vec![0u32; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut cursor: Vec<u32> = offsets[..n].to_vec();
        let mut entries = vec![
            AdjEntry {
                neighbor: 0,
                edge: 0
            };
            normalized.len() * 2
        ];
        for (e, &(u, v)) in normalized.iter().enumerate() {
            entries[cursor[u as usize] as usize] = AdjEntry {
                neighbor: v,
                edge: e as u32,
            };
            cursor[u as usize] += 1;
            entries[cursor[v as usize] as usize] = AdjEntry {
                neighbor: u,
                edge: e as u32,
            };
            cursor[v as usize] += 1;
        }

        Ok(SocialGraph {
            n,
            edges: normalized,
            offsets,
            entries,
        })
    }

    /// Path graph `0 - 1 - ... - n-1`.
    pub fn path(n: usize) -> Result<Self> {
        let edges = (0..n.saturating_sub(1)).map(|i| (i as u32, (i + 1) as u32));
        SocialGraph::new(n, edges)
    }

    /// Complete graph on `n` agents.
    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u as u32, v as u32));
            }
        }
        SocialGraph::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical (sorted, normalized) edge list.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Endpoints of edge `e` as `(min, max)`.
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        let (u, v) = self.edges[e];
        (u as usize, v as usize)
    }

    /// Incident edges of `v`, neighbors ascending.
    pub fn neighbors(&self, v: usize) -> &[AdjEntry] {
        &self.entries[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn degree(&self, v: usize) -> usize {
        (self.offsets[v + 1] - self.offsets[v]) as usize
    }

    /// Index of edge `{u, v}` if present.
    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        let key = if u < v {
            (u as u32, v as u32)
        } else {
            (v as u32, u as u32)
        };
        self.edges.binary_search(&key).ok()
    }

    /// Verifies that the adjacency structure is exactly the edge list viewed
    /// per node. Intended for tests and debugging.
    pub fn adjacency_consistent(&self) -> bool {
        let mut expected: Vec<Vec<(u32, u32)>> = vec![Vec::new(); self.n];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            expected[u as usize].push((v, e as u32));
            expected[v as usize].push((u, e as u32));
        }
        for list in &mut expected {
            list.sort_unstable();
        }
        (0..self.n).all(|v| {
            let mut got: Vec<(u32, u32)> = self
                .neighbors(v)
                .iter()
                .map(|a| (a.neighbor, a.edge))
                .collect();
            got.sort_unstable();
            got == expected[v]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_shape() {
        let g = SocialGraph::path(5).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(g.degree(0), 1);
        assert_eq!(g.degree(2), 2);
        assert!(g.adjacency_consistent());
    }

    #[test]
    fn complete_graph_shape() {
        let g = SocialGraph::complete(6).unwrap();
        assert_eq!(g.edge_count(), 15);
        assert!((0..6).all(|v| g.degree(v) == 5));
        assert!(g.adjacency_consistent());
    }

    #[test]
    fn single_node_and_empty() {
        let g = SocialGraph::path(1).unwrap();
        assert_eq!(g.edge_count(), 0);
        let g = SocialGraph::new(0, Vec::new()).unwrap();
        assert_eq!(g.n(), 0);
    }

    #[test]
    fn rejects_self_loop() {
        let err = SocialGraph::new(3, vec![(1, 1)]).unwrap_err();
        assert!(matches!(err, Error::SelfLoop { agent: 1 }));
    }

    #[test]
    fn rejects_duplicate_even_when_flipped() {
        let err = SocialGraph::new(3, vec![(0, 1), (1, 0)]).unwrap_err();
        assert!(matches!(err, Error::DuplicateEdge { u: 0, v: 1 }));
    }

    #[test]
    fn rejects_out_of_range() {
        let err = SocialGraph::new(3, vec![(0, 3)]).unwrap_err();
        assert!(matches!(err, Error::EdgeOutOfRange { n: 3, .. }));
    }

    #[test]
    fn neighbors_are_ascending_with_edge_indices() {
        let g = SocialGraph::new(5, vec![(4, 2), (0, 2), (2, 1), (2, 3)]).unwrap();
        let ns: Vec<u32> = g.neighbors(2).iter().map(|a| a.neighbor).collect();
        assert_eq!(ns, vec![0, 1, 3, 4]);
        for a in g.neighbors(2) {
            let (u, v) = g.endpoints(a.edge as usize);
            assert!(u == 2 || v == 2);
        }
    }

    #[test]
    fn find_edge_both_orientations() {
        let g = SocialGraph::path(4).unwrap();
        assert_eq!(g.find_edge(2, 1), Some(1));
        assert_eq!(g.find_edge(1, 2), Some(1));
        assert_eq!(g.find_edge(0, 3), None);
    }
}
