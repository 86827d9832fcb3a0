//! Synthetic benchmark graph families with unit edge travel times, so
//! shortest-path distances equal hop counts.

use std::collections::VecDeque;
use std::fmt;

use crate::metric::TimeDistanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// size x size four-neighbor grid.
    Grid,
    /// Balanced binary tree of the given depth (depth 0 is a single root).
    Tree,
    /// Cycle on `size` vertices.
    Cycle,
    /// Complete graph on `size` vertices.
    Complete,
}

impl Family {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "grid" => Some(Self::Grid),
            "tree" => Some(Self::Tree),
            "cycle" => Some(Self::Cycle),
            "complete" => Some(Self::Complete),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Grid => "grid",
            Self::Tree => "tree",
            Self::Cycle => "cycle",
            Self::Complete => "complete",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A generated instance: vertex labels, undirected unit edges, and the
/// hop-count metric.
pub struct Instance {
    pub ids: Vec<String>,
    pub edges: Vec<(usize, usize)>,
    pub metric: TimeDistanceMatrix,
}

/// Builds the requested family. `size` is the grid side, tree depth, cycle
/// length, or clique size.
pub fn generate(family: Family, size: usize) -> Instance {
    let (n, edges) = match family {
        Family::Grid => {
            assert!(size >= 1, "grid needs side >= 1");
            let n = size * size;
            let mut edges = Vec::new();
            for r in 0..size {
                for c in 0..size {
                    let v = r * size + c;
                    if c + 1 < size {
                        edges.push((v, v + 1));
                    }
                    if r + 1 < size {
                        edges.push((v, v + size));
                    }
                }
            }
            (n, edges)
        }
        Family::Tree => {
            let n = (1usize << (size + 1)) - 1;
            let mut edges = Vec::new();
            for v in 1..n {
                edges.push(((v - 1) / 2, v));
            }
            (n, edges)
        }
        Family::Cycle => {
            assert!(size >= 3, "cycle needs at least 3 vertices");
            let edges = (0..size).map(|v| (v, (v + 1) % size)).collect();
            (size, edges)
        }
        Family::Complete => {
            assert!(size >= 2, "complete graph needs at least 2 vertices");
            let mut edges = Vec::new();
            for i in 0..size {
                for j in (i + 1)..size {
                    edges.push((i, j));
                }
            }
            (size, edges)
        }
    };

    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in &edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }

    let mut rows = vec![vec![0.0; n]; n];
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for (t, &hops) in dist.iter().enumerate() {
            rows[s][t] = hops as f64;
        }
    }

    Instance {
        ids: (0..n).map(|i| format!("v{i}")).collect(),
        edges,
        metric: TimeDistanceMatrix::from_rows(rows).expect("hop metric is valid"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_distances_are_manhattan() {
        let inst = generate(Family::Grid, 3);
        assert_eq!(inst.ids.len(), 9);
        // Opposite corners of a 3x3 grid are 4 hops apart.
        assert_eq!(inst.metric.get(0, 8), 4.0);
        assert_eq!(inst.metric.get(0, 2), 2.0);
    }

    #[test]
    fn tree_counts_and_depth() {
        let inst = generate(Family::Tree, 3);
        assert_eq!(inst.ids.len(), 15);
        assert_eq!(inst.edges.len(), 14);
        // Two deepest leaves in different root subtrees are 6 hops apart.
        assert_eq!(inst.metric.get(7, 14), 6.0);
    }

    #[test]
    fn cycle_wraps_around() {
        let inst = generate(Family::Cycle, 5);
        assert_eq!(inst.metric.get(0, 1), 1.0);
        assert_eq!(inst.metric.get(0, 2), 2.0);
        assert_eq!(inst.metric.get(0, 3), 2.0);
        assert_eq!(inst.metric.get(0, 4), 1.0);
    }

    #[test]
    fn complete_is_all_ones() {
        let inst = generate(Family::Complete, 4);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 0.0 } else { 1.0 };
                assert_eq!(inst.metric.get(i, j), expect);
            }
        }
    }
}
