//! Sparsity-pattern graphs and geodesic distances.
//!
//! For a sparse `M` the quantity `|k - t| / β` in every bound can be replaced
//! by the geodesic distance between `k` and `t` in the undirected graph with
//! an edge `i ~ j` whenever `M_ij != 0`, `i != j`.

use std::collections::VecDeque;

use crate::bounds::{BandedContext, BoundKind, EntryBound};
use crate::error::{DecayError, Result};
use crate::matrix::Hermitian;

/// Adjacency lists of the pattern graph; self-loops are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternGraph {
    adjacency: Vec<Vec<usize>>,
}

impl PatternGraph {
    /// Edges for every stored off-diagonal entry. A positive `drop_tol`
    /// removes entries with `|M_ij| <= drop_tol`; with `drop_tol = 0` stored
    /// zeros are kept as edges.
    pub fn from_matrix<M: Hermitian + ?Sized>(m: &M, drop_tol: f64) -> Self {
        let mut adjacency = vec![Vec::new(); m.order()];
        m.for_each_entry(&mut |i, j, v| {
            if i != j && (drop_tol <= 0.0 || v.norm() > drop_tol) {
                adjacency[i].push(j);
            }
        });
        for row in &mut adjacency {
            row.sort_unstable();
            row.dedup();
        }
        // Keep the graph undirected even if a threshold breaks symmetry.
        let mut sym = adjacency.clone();
        for (i, row) in adjacency.iter().enumerate() {
            for &j in row {
                sym[j].push(i);
            }
        }
        for row in &mut sym {
            row.sort_unstable();
            row.dedup();
        }
        Self { adjacency: sym }
    }

    /// Graph from an explicit edge list over `n` vertices.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(DecayError::OutOfRange(format!("edge ({i}, {j}) in a graph of order {n}")));
            }
            if i != j {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
        for row in &mut adjacency {
            row.sort_unstable();
            row.dedup();
        }
        Ok(Self { adjacency })
    }

    pub fn order(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Breadth-first distances from `t`.
    pub fn geodesic_from(&self, t: usize) -> Result<DistanceVector> {
        let n = self.order();
        if t >= n {
            return Err(DecayError::OutOfRange(format!("source {t} in a graph of order {n}")));
        }
        let mut distances = vec![None; n];
        distances[t] = Some(0);
        let mut queue = VecDeque::from([t]);
        while let Some(i) = queue.pop_front() {
            let next = distances[i].map(|d| d + 1);
            for &j in &self.adjacency[i] {
                if distances[j].is_none() {
                    distances[j] = next;
                    queue.push_back(j);
                }
            }
        }
        Ok(DistanceVector { source: t, distances })
    }
}

/// Single-source geodesic distances; `None` marks unreachable vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceVector {
    pub source: usize,
    pub distances: Vec<Option<usize>>,
}

impl DistanceVector {
    pub fn get(&self, k: usize) -> Option<usize> {
        self.distances.get(k).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }
}

/// `geodesic_from` on the stored pattern of `m`.
pub fn geodesic_from<M: Hermitian + ?Sized>(m: &M, t: usize) -> Result<DistanceVector> {
    PatternGraph::from_matrix(m, 0.0).geodesic_from(t)
}

/// Outcome of a graph-distance bound query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphBound {
    Bound(EntryBound),
    /// `k` and `t` lie in different components; nothing is claimed.
    Unreachable,
}

/// Evaluates `kind` at the geodesic distance `d(k, t)` instead of `|k - t|/β`.
pub fn bound_with_distance(
    kind: &BoundKind,
    ctx: &BandedContext,
    dist: &DistanceVector,
    k: usize,
) -> Result<GraphBound> {
    if k >= dist.len() {
        return Err(DecayError::OutOfRange(format!("index {k} in a distance vector of length {}", dist.len())));
    }
    match dist.get(k) {
        None => Ok(GraphBound::Unreachable),
        Some(d) => kind.evaluate(ctx, d as f64).map(GraphBound::Bound),
    }
}
