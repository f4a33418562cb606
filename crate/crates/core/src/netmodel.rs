//! Wireless sensor network model.
//!
//! A WSN is a directed geometric graph: nodes carry a role (sensor, cluster
//! head, base station), a position, and an initial energy budget; a directed
//! edge exists between every ordered pair of distinct nodes within
//! communication range `R`, with transmission cost `epsilon * d^2` from the
//! free-space path loss model.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding;

/// Role of a node in the network. Every instance has exactly one base station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Sensor,
    ClusterHead,
    BaseStation,
}

impl fmt::Display for NodeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeRole::Sensor => "sensor",
            NodeRole::ClusterHead => "cluster_head",
            NodeRole::BaseStation => "base_station",
        };
        f.write_str(s)
    }
}

/// Initial energy budget. The base station is `Unbounded`; the distinguished
/// variant keeps infinities out of the penalty arithmetic, which squares
/// energy differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Energy {
    Finite(f64),
    Unbounded,
}

impl Energy {
    pub fn finite(self) -> Option<f64> {
        match self {
            Energy::Finite(e) => Some(e),
            Energy::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Energy::Unbounded)
    }
}

impl Serialize for Energy {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Energy::Finite(e) => ser.serialize_f64(*e),
            Energy::Unbounded => ser.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for Energy {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Energy;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or the string \"unbounded\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Energy, E> {
                Ok(Energy::Finite(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Energy, E> {
                Ok(Energy::Finite(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Energy, E> {
                Ok(Energy::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Energy, E> {
                if v == "unbounded" {
                    Ok(Energy::Unbounded)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        de.deserialize_any(V)
    }
}

/// Initial energy assigned to each role: 100 for sensors, 200 for cluster
/// heads, unbounded for the base station.
pub fn role_energy(role: NodeRole) -> Energy {
    match role {
        NodeRole::Sensor => Energy::Finite(100.0),
        NodeRole::ClusterHead => Energy::Finite(200.0),
        NodeRole::BaseStation => Energy::Unbounded,
    }
}

/// A network node. `id` equals the node's index into [`WsnGraph::nodes`].
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub pos: (f64, f64),
    pub role: NodeRole,
    pub initial_energy: Energy,
}

/// A directed communication link within range, with its free-space cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub distance: f64,
    pub cost: f64,
}

/// Euclidean distance between two points.
pub fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    (dx * dx + dy * dy).sqrt()
}

/// Parameters for random instance generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub n_sensors: usize,
    pub n_chs: usize,
    pub bs_position: (f64, f64),
    pub area: (f64, f64),
    pub comm_range: f64,
    pub epsilon: f64,
    pub rng_seed: u64,
}

impl InstanceSpec {
    /// The 109-node scenario: 100 sensors and 8 cluster heads in a 100 x 100
    /// area, base station at (50, 110), range 25.
    pub fn preset_109(rng_seed: u64) -> Self {
        InstanceSpec {
            n_sensors: 100,
            n_chs: 8,
            bs_position: (50.0, 110.0),
            area: (100.0, 100.0),
            comm_range: 25.0,
            epsilon: 1.0,
            rng_seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_sensors == 0 {
            return Err(Error::InvalidInstance("instance has zero sensors".into()));
        }
        if self.n_chs == 0 {
            return Err(Error::InvalidInstance("instance has zero cluster heads".into()));
        }
        if !(self.comm_range > 0.0) {
            return Err(Error::InvalidInstance("comm_range must be positive".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidInstance("epsilon must be positive".into()));
        }
        if !(self.area.0 > 0.0 && self.area.1 > 0.0) {
            return Err(Error::InvalidInstance("area must be positive".into()));
        }
        Ok(())
    }
}

/// The WSN as a directed geometric graph, immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WsnGraph {
    pub nodes: Vec<Node>,
    /// All established directed edges, sorted by `(from, to)`.
    pub edges: Vec<Edge>,
    pub comm_range: f64,
    pub epsilon: f64,
    pub area: (f64, f64),
    out_edges: Vec<Vec<usize>>,
}

impl WsnGraph {
    /// Build the edge set over an explicit node list: an edge `(i, j)` exists
    /// for every ordered pair with `d_ij <= R`, at cost `epsilon * d^2`.
    ///
    /// Node ids must be contiguous and equal to their index. Exactly one base
    /// station is required; sensor and cluster-head positions must lie inside
    /// the area rectangle (the base station may sit outside it).
    pub fn from_nodes(
        nodes: Vec<Node>,
        comm_range: f64,
        epsilon: f64,
        area: (f64, f64),
    ) -> Result<Self> {
        if !(comm_range > 0.0) {
            return Err(Error::InvalidInstance("comm_range must be positive".into()));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidInstance("epsilon must be positive".into()));
        }
        let n_bs = nodes.iter().filter(|n| n.role == NodeRole::BaseStation).count();
        if n_bs != 1 {
            return Err(Error::InvalidInstance(format!(
                "expected exactly one base station, found {n_bs}"
            )));
        }
        for (i, node) in nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::InvalidInstance(format!(
                    "node ids must be contiguous: id {} at index {i}",
                    node.id
                )));
            }
            if !node.pos.0.is_finite() || !node.pos.1.is_finite() {
                return Err(Error::InvalidInstance(format!("node {i} has non-finite position")));
            }
            match (node.role, node.initial_energy) {
                (NodeRole::BaseStation, _) => {}
                (_, Energy::Unbounded) => {
                    return Err(Error::InvalidInstance(format!(
                        "node {i} is not the base station but has unbounded energy"
                    )));
                }
                (_, Energy::Finite(e)) if e < 0.0 => {
                    return Err(Error::InvalidInstance(format!("node {i} has negative energy")));
                }
                _ => {}
            }
            if node.role != NodeRole::BaseStation {
                let (x, y) = node.pos;
                if x < 0.0 || x > area.0 || y < 0.0 || y > area.1 {
                    return Err(Error::InvalidInstance(format!(
                        "node {i} lies outside the {}x{} area",
                        area.0, area.1
                    )));
                }
            }
        }

        let n = nodes.len();
        let mut edges = Vec::new();
        let mut out_edges = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = distance(nodes[i].pos, nodes[j].pos);
                if d <= comm_range {
                    out_edges[i].push(edges.len());
                    edges.push(Edge { from: i, to: j, distance: d, cost: epsilon * d * d });
                }
            }
        }
        Ok(WsnGraph { nodes, edges, comm_range, epsilon, area, out_edges })
    }

    /// Indices into [`WsnGraph::edges`] of the edges leaving `node`.
    pub fn out_edge_indices(&self, node: usize) -> &[usize] {
        &self.out_edges[node]
    }

    /// The established edge from `i` to `j`, if the pair is within range.
    pub fn edge_between(&self, i: usize, j: usize) -> Option<&Edge> {
        self.out_edges[i].iter().map(|&e| &self.edges[e]).find(|e| e.to == j)
    }

    /// Id of the unique base station.
    pub fn base_station(&self) -> usize {
        self.nodes
            .iter()
            .position(|n| n.role == NodeRole::BaseStation)
            .expect("graph invariant: one base station")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Generate a random instance: the base station gets id 0 at `bs_position`,
/// then sensors, then cluster heads, all placed uniformly over the area from
/// the seeded generator (sub-seed tag `netmodel.place`).
pub fn build_network(spec: &InstanceSpec) -> Result<WsnGraph> {
    spec.validate()?;
    let mut rng = seeding::rng_for(spec.rng_seed, "netmodel.place");
    let mut nodes = Vec::with_capacity(1 + spec.n_sensors + spec.n_chs);
    nodes.push(Node {
        id: 0,
        pos: spec.bs_position,
        role: NodeRole::BaseStation,
        initial_energy: Energy::Unbounded,
    });
    let mut place = |nodes: &mut Vec<Node>, role: NodeRole, count: usize| {
        for _ in 0..count {
            let x = rng.random::<f64>() * spec.area.0;
            let y = rng.random::<f64>() * spec.area.1;
            nodes.push(Node {
                id: nodes.len(),
                pos: (x, y),
                role,
                initial_energy: role_energy(role),
            });
        }
    };
    place(&mut nodes, NodeRole::Sensor, spec.n_sensors);
    place(&mut nodes, NodeRole::ClusterHead, spec.n_chs);
    WsnGraph::from_nodes(nodes, spec.comm_range, spec.epsilon, spec.area)
}

/// Total energy consumption of the initial network: the sum of `c_ij` over
/// all established directed edges, i.e. every link active.
pub fn initial_cost(graph: &WsnGraph) -> f64 {
    graph.edges.iter().map(|e| e.cost).sum()
}

// ---------------------------------------------------------------------------
// Instance file I/O
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeWire {
    id: usize,
    x: f64,
    y: f64,
    role: NodeRole,
    energy: Energy,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    nodes: Vec<NodeWire>,
    comm_range: f64,
    epsilon: f64,
    area: (f64, f64),
}

/// Serialize a graph to the instance JSON schema.
pub fn to_instance_json(graph: &WsnGraph) -> Result<String> {
    let file = InstanceFile {
        nodes: graph
            .nodes
            .iter()
            .map(|n| NodeWire {
                id: n.id,
                x: n.pos.0,
                y: n.pos.1,
                role: n.role,
                energy: n.initial_energy,
            })
            .collect(),
        comm_range: graph.comm_range,
        epsilon: graph.epsilon,
        area: graph.area,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

/// Parse and validate an instance from its JSON form; edges are rebuilt from
/// positions, never trusted from the file.
pub fn from_instance_json(json: &str) -> Result<WsnGraph> {
    let file: InstanceFile = serde_json::from_str(json)?;
    let nodes = file
        .nodes
        .into_iter()
        .map(|w| Node { id: w.id, pos: (w.x, w.y), role: w.role, initial_energy: w.energy })
        .collect();
    WsnGraph::from_nodes(nodes, file.comm_range, file.epsilon, file.area)
}

pub fn save_instance(graph: &WsnGraph, path: &Path) -> Result<()> {
    std::fs::write(path, to_instance_json(graph)?)?;
    Ok(())
}

pub fn load_instance(path: &Path) -> Result<WsnGraph> {
    from_instance_json(&std::fs::read_to_string(path)?)
}

/// DOT export with role-based node attributes, for visual inspection.
pub fn to_dot(graph: &WsnGraph) -> String {
    let mut s = String::from("digraph wsn {\n  node [fontsize=8];\n");
    for n in &graph.nodes {
        let (shape, color) = match n.role {
            NodeRole::Sensor => ("circle", "lightblue"),
            NodeRole::ClusterHead => ("diamond", "green"),
            NodeRole::BaseStation => ("box", "red"),
        };
        s.push_str(&format!(
            "  n{} [shape={shape}, style=filled, fillcolor={color}, pos=\"{},{}!\"];\n",
            n.id, n.pos.0, n.pos.1
        ));
    }
    for e in &graph.edges {
        s.push_str(&format!("  n{} -> n{} [label=\"{:.1}\"];\n", e.from, e.to, e.cost));
    }
    s.push_str("}\n");
    s
}

/// Convenience for tests and small fixtures: nodes from `(x, y, role)` triples
/// with the role-schedule energies.
pub fn nodes_from_layout(layout: &[((f64, f64), NodeRole)]) -> Vec<Node> {
    layout
        .iter()
        .enumerate()
        .map(|(id, &(pos, role))| Node { id, pos, role, initial_energy: role_energy(role) })
        .collect()
}

/// Group node ids by role. Used by assembly and reporting.
pub fn ids_by_role(graph: &WsnGraph) -> BTreeMap<NodeRole, Vec<usize>> {
    let mut map: BTreeMap<NodeRole, Vec<usize>> = BTreeMap::new();
    for n in &graph.nodes {
        map.entry(n.role).or_default().push(n.id);
    }
    map
}

impl Ord for NodeRole {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (*self as u8).cmp(&(*other as u8))
    }
}

impl PartialOrd for NodeRole {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
