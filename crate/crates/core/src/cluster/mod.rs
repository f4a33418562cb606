//! Spectral partitioning of the network.
//!
//! The pipeline is unnormalized spectral clustering: build a k-nearest-
//! neighbor adjacency over node positions (OR-symmetrized), form the graph
//! Laplacian `L = D - A`, take the eigenvectors of the k smallest
//! eigenvalues, and run k-means on the eigenvector rows. The base station is
//! excluded here and re-attached during assembly.
//!
//! Cluster subgraphs keep the *communication* edges of the parent graph (the
//! range-limited links), not the kNN edges; kNN only drives the partition.

mod eigen;
mod kmeans;

pub use eigen::{symmetric_eigen, EigenPairs};
pub use kmeans::{kmeans, KmeansResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{distance, Edge, Node, NodeRole, WsnGraph};
use crate::seeding;

/// Dense 0/1 adjacency with zero diagonal, symmetric after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    data: Vec<u8>,
}

impl AdjacencyMatrix {
    pub fn zeros(n: usize) -> Self {
        AdjacencyMatrix { n, data: vec![0; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.n + j] != 0
    }

    pub fn set(&mut self, i: usize, j: usize) {
        self.data[i * self.n + j] = 1;
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.get(i, j)).count()
    }
}

/// Integer Laplacian `L = D - A`; every row sums to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaplacianMatrix {
    n: usize,
    data: Vec<i64>,
}

impl LaplacianMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|&x| x as f64).collect()
    }
}

/// kNN adjacency over node positions: `A[i][j] = 1` iff `j` is among the
/// `k_nn` nearest neighbors of `i` (ties broken toward the lower id), then
/// symmetrized by logical OR.
pub fn knn_adjacency(graph: &WsnGraph, k_nn: usize) -> Result<AdjacencyMatrix> {
    let points: Vec<(f64, f64)> = graph.nodes.iter().map(|n| n.pos).collect();
    knn_adjacency_points(&points, k_nn)
}

/// Position-level kNN used both for whole graphs and for the base-station-
/// free node subset inside [`partition`].
pub fn knn_adjacency_points(points: &[(f64, f64)], k_nn: usize) -> Result<AdjacencyMatrix> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InvalidArgument("kNN adjacency requires at least 2 nodes".into()));
    }
    if k_nn >= n {
        return Err(Error::InvalidArgument(format!("k_nn ({k_nn}) must be < n ({n})")));
    }
    let mut adj = AdjacencyMatrix::zeros(n);
    let mut order: Vec<usize> = Vec::with_capacity(n - 1);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        order.sort_by(|&a, &b| {
            distance(points[i], points[a])
                .partial_cmp(&distance(points[i], points[b]))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        for &j in order.iter().take(k_nn) {
            adj.set(i, j);
        }
    }
    // A <- A OR A^T
    for i in 0..n {
        for j in 0..n {
            if adj.get(i, j) {
                adj.set(j, i);
            }
        }
    }
    Ok(adj)
}

/// `L = D - A` in exact integer arithmetic. Rejects asymmetric or
/// nonzero-diagonal input.
pub fn laplacian(adj: &AdjacencyMatrix) -> Result<LaplacianMatrix> {
    let n = adj.n();
    for i in 0..n {
        if adj.get(i, i) {
            return Err(Error::InvalidArgument(format!("adjacency has nonzero diagonal at {i}")));
        }
        for j in i + 1..n {
            if adj.get(i, j) != adj.get(j, i) {
                return Err(Error::AsymmetricAdjacency(i, j));
            }
        }
    }
    let mut data = vec![0i64; n * n];
    for i in 0..n {
        let mut degree = 0i64;
        for j in 0..n {
            if adj.get(i, j) {
                degree += 1;
                data[i * n + j] = -1;
            }
        }
        data[i * n + i] = degree;
    }
    Ok(LaplacianMatrix { n, data })
}

/// Eigenvectors of the k smallest Laplacian eigenvalues, columns orthonormal,
/// eigenvalues ascending.
pub fn smallest_eigenvectors(lap: &LaplacianMatrix, k: usize) -> Result<EigenPairs> {
    if k > lap.n() {
        return Err(Error::InvalidArgument(format!("k ({k}) exceeds matrix size {}", lap.n())));
    }
    let full = symmetric_eigen(&lap.to_f64(), lap.n())?;
    Ok(EigenPairs {
        values: full.values[..k].to_vec(),
        vectors: full.vectors[..k].to_vec(),
    })
}

/// An induced subgraph `G_s = (V_s, E_s)`: node copies from the parent graph
/// and exactly the parent edges with both endpoints in `V_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl Subgraph {
    pub fn node_ids(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.id).collect()
    }

    pub fn contains_role(&self, role: NodeRole) -> bool {
        self.nodes.iter().any(|n| n.role == role)
    }

    pub fn sensors(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.role == NodeRole::Sensor)
    }

    pub fn node(&self, id: usize) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }
}

/// Cluster assignment over the non-base-station nodes plus the induced
/// subgraphs. `assignment[id]` is `None` exactly for the base station.
#[derive(Debug, Clone)]
pub struct Partition {
    pub assignment: Vec<Option<usize>>,
    pub subgraphs: Vec<Subgraph>,
    pub k: usize,
    /// Propagated from k-means when a forced split was needed.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionConfig {
    /// Neighbors per node for the kNN graph.
    pub k_nn: usize,
    pub seed: u64,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig { k_nn: 10, seed: 0 }
    }
}

/// Spectral partition of the non-base-station nodes into k clusters.
pub fn partition(graph: &WsnGraph, k: usize, cfg: &PartitionConfig) -> Result<Partition> {
    if k == 0 {
        return Err(Error::InvalidArgument("partition requires k >= 1".into()));
    }
    let members: Vec<usize> = graph
        .nodes
        .iter()
        .filter(|n| n.role != NodeRole::BaseStation)
        .map(|n| n.id)
        .collect();
    if members.len() < k {
        return Err(Error::InvalidArgument(format!(
            "cannot form {k} clusters from {} non-base-station nodes",
            members.len()
        )));
    }

    let points: Vec<(f64, f64)> = members.iter().map(|&id| graph.nodes[id].pos).collect();
    let adj = knn_adjacency_points(&points, cfg.k_nn)?;
    let lap = laplacian(&adj)?;
    let eig = smallest_eigenvectors(&lap, k)?;
    let rows: Vec<Vec<f64>> = (0..members.len())
        .map(|i| eig.vectors.iter().map(|col| col[i]).collect())
        .collect();
    let km = kmeans(&rows, k, seeding::derive_seed(cfg.seed, "cluster.kmeans"))?;

    let mut assignment: Vec<Option<usize>> = vec![None; graph.len()];
    for (local, &id) in members.iter().enumerate() {
        assignment[id] = Some(km.assignment[local]);
    }
    let subgraphs = (0..k).map(|c| induced_subgraph(graph, &assignment, c)).collect();
    Ok(Partition { assignment, subgraphs, k, degenerate: km.degenerate })
}

fn induced_subgraph(graph: &WsnGraph, assignment: &[Option<usize>], cluster: usize) -> Subgraph {
    let nodes: Vec<Node> = graph
        .nodes
        .iter()
        .filter(|n| assignment[n.id] == Some(cluster))
        .cloned()
        .collect();
    let edges: Vec<Edge> = graph
        .edges
        .iter()
        .filter(|e| assignment[e.from] == Some(cluster) && assignment[e.to] == Some(cluster))
        .cloned()
        .collect();
    Subgraph { nodes, edges }
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PartitionFile {
    assignment: Vec<Option<usize>>,
    k: usize,
}

/// Partition export: `{"assignment": [cluster per node id, null for the BS],
/// "k": k}`.
pub fn partition_json(p: &Partition) -> Result<String> {
    Ok(serde_json::to_string_pretty(&PartitionFile {
        assignment: p.assignment.clone(),
        k: p.k,
    })?)
}

/// DOT rendering of one cluster subgraph.
pub fn subgraph_dot(sub: &Subgraph, cluster: usize) -> String {
    let mut s = format!("digraph cluster{cluster} {{\n");
    for n in &sub.nodes {
        s.push_str(&format!("  n{} [pos=\"{},{}!\"];\n", n.id, n.pos.0, n.pos.1));
    }
    for e in &sub.edges {
        s.push_str(&format!("  n{} -> n{};\n", e.from, e.to));
    }
    s.push_str("}\n");
    s
}
