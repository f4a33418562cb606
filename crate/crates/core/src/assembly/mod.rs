//! Network-level assembly: merge per-cluster solutions, link cluster heads
//! to the base station, repair connectivity by BFS, validate constraints,
//! and compute the energy metrics.

pub mod pipeline;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::netmodel::{distance, NodeRole, WsnGraph};
use crate::qubo::NetFlow;

/// How a cluster's edges were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodTag {
    Qaoa,
    Greedy,
    ClassicalFallback,
}

/// Whether an edge came from a cluster solution or from the connectivity
/// phase (cluster-head linking and BFS repair).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Cluster,
    Repair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSel {
    pub cost: f64,
    pub phase: Phase,
}

/// A merged routing solution over the whole network.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingSolution {
    edges: BTreeMap<(usize, usize), EdgeSel>,
    pub method_per_cluster: Vec<MethodTag>,
}

impl RoutingSolution {
    pub fn new(method_per_cluster: Vec<MethodTag>) -> Self {
        RoutingSolution { edges: BTreeMap::new(), method_per_cluster }
    }

    pub fn edges(&self) -> &BTreeMap<(usize, usize), EdgeSel> {
        &self.edges
    }

    pub fn contains(&self, from: usize, to: usize) -> bool {
        self.edges.contains_key(&(from, to))
    }

    /// Insert a cluster-phase edge. Keeps the first entry on duplicates.
    pub fn add_cluster_edge(&mut self, from: usize, to: usize, cost: f64) {
        self.edges.entry((from, to)).or_insert(EdgeSel { cost, phase: Phase::Cluster });
    }

    /// Insert a repair-phase edge; a no-op if the edge already exists, which
    /// keeps repair edges disjoint from cluster edges.
    pub fn add_repair_edge(&mut self, from: usize, to: usize, cost: f64) {
        self.edges.entry((from, to)).or_insert(EdgeSel { cost, phase: Phase::Repair });
    }

    pub fn repair_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges
            .iter()
            .filter(|(_, sel)| sel.phase == Phase::Repair)
            .map(|(&pair, _)| pair)
    }

    pub fn total_cost(&self) -> f64 {
        self.edges.values().map(|sel| sel.cost).sum()
    }

    /// Node ids connected to `root` in the undirected view of the solution.
    pub fn undirected_component(&self, root: usize) -> BTreeSet<usize> {
        let mut adjacency: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(from, to) in self.edges.keys() {
            adjacency.entry(from).or_default().push(to);
            adjacency.entry(to).or_default().push(from);
        }
        let mut seen = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            if let Some(neigh) = adjacency.get(&u) {
                for &v in neigh {
                    if seen.insert(v) {
                        queue.push_back(v);
                    }
                }
            }
        }
        seen
    }
}

/// Ensure every cluster head has its uplink: directly to the base station
/// when `d <= R`, otherwise to the nearest cluster head in range. Added edges
/// are tagged repair; existing edges are not duplicated. Heads with no valid
/// target are left to [`repair_connectivity`].
pub fn connect_cluster_heads(graph: &WsnGraph, solution: &mut RoutingSolution) {
    let bs = graph.base_station();
    let bs_pos = graph.nodes[bs].pos;
    for node in &graph.nodes {
        if node.role != NodeRole::ClusterHead {
            continue;
        }
        let target = if distance(node.pos, bs_pos) <= graph.comm_range {
            Some(bs)
        } else {
            graph
                .nodes
                .iter()
                .filter(|other| {
                    other.role == NodeRole::ClusterHead
                        && other.id != node.id
                        && distance(node.pos, other.pos) <= graph.comm_range
                })
                .map(|other| (distance(node.pos, other.pos), other.id))
                .min_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
                .map(|(_, id)| id)
        };
        if let Some(target) = target {
            if !solution.contains(node.id, target) {
                let edge = graph
                    .edge_between(node.id, target)
                    .expect("in-range pair must have an established edge");
                solution.add_repair_edge(node.id, target, edge.cost);
            }
        }
    }
}

/// Nodes that could not be attached because the graph itself offers no link.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RepairReport {
    pub unreachable: Vec<usize>,
    pub added: Vec<(usize, usize)>,
}

/// BFS from the base station over the undirected view of the solution; every
/// disconnected node is attached by the minimum-cost established edge into
/// the connected component, processed in ascending distance-to-component
/// order (ties by node id, then by `(cost, target id)` for the edge).
pub fn repair_connectivity(graph: &WsnGraph, solution: &mut RoutingSolution) -> RepairReport {
    let bs = graph.base_station();
    let mut report = RepairReport::default();
    loop {
        let component = solution.undirected_component(bs);
        let detached: Vec<usize> = graph
            .nodes
            .iter()
            .map(|n| n.id)
            .filter(|id| !component.contains(id))
            .collect();
        if detached.is_empty() {
            return report;
        }

        // Geometric distance from each detached node to the component. Every
        // pair within that distance of the closest member is range-checked
        // against R by construction of E.
        let mut best: Option<(f64, usize)> = None;
        for &u in &detached {
            let du = component
                .iter()
                .map(|&c| distance(graph.nodes[u].pos, graph.nodes[c].pos))
                .fold(f64::INFINITY, f64::min);
            if du <= graph.comm_range {
                let candidate = (du, u);
                if best.map_or(true, |b| candidate < b) {
                    best = Some(candidate);
                }
            }
        }
        let Some((_, u)) = best else {
            // No detached node is in range of the component.
            report.unreachable = detached;
            return report;
        };

        let (cost, target) = graph
            .out_edge_indices(u)
            .iter()
            .map(|&ei| &graph.edges[ei])
            .filter(|e| component.contains(&e.to))
            .map(|e| (e.cost, e.to))
            .min_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
            .expect("node within range of component has an edge into it");
        solution.add_repair_edge(u, target, cost);
        report.added.push((u, target));
    }
}

/// Exact per-node constraint residuals for a solution.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ViolationReport {
    /// `|outflow - inflow - b_i|` where nonzero, over the nodes in the flow
    /// assignment.
    pub flow_violations: BTreeMap<usize, i64>,
    /// `max(0, spent - E_i)` where positive; unbounded nodes are skipped.
    pub energy_violations: BTreeMap<usize, f64>,
    /// Non-base-station nodes with no undirected path to the base station in
    /// the solution.
    pub unreached: Vec<usize>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.flow_violations.is_empty()
            && self.energy_violations.is_empty()
            && self.unreached.is_empty()
    }
}

pub fn validate(graph: &WsnGraph, solution: &RoutingSolution, flows: &NetFlow) -> ViolationReport {
    let mut report = ViolationReport::default();

    for (&node, &b) in &flows.b {
        let mut balance: i64 = -b;
        for &(from, to) in solution.edges.keys() {
            if from == node {
                balance += 1;
            }
            if to == node {
                balance -= 1;
            }
        }
        if balance != 0 {
            report.flow_violations.insert(node, balance.abs());
        }
    }

    for node in &graph.nodes {
        let Some(budget) = node.initial_energy.finite() else { continue };
        let spent: f64 = solution
            .edges
            .iter()
            .filter(|(&(from, _), _)| from == node.id)
            .map(|(_, sel)| sel.cost)
            .sum();
        if spent > budget {
            report.energy_violations.insert(node.id, spent - budget);
        }
    }

    let bs = graph.base_station();
    let component = solution.undirected_component(bs);
    report.unreached = graph
        .nodes
        .iter()
        .map(|n| n.id)
        .filter(|&id| id != bs && !component.contains(&id))
        .collect();

    report
}

/// Energy metrics; the identities `delta_c = c_initial - c_total` and
/// `reduction_pct = 100 * delta_c / c_initial` hold exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub c_initial: f64,
    pub c_total: f64,
    pub delta_c: f64,
    pub reduction_pct: f64,
}

pub fn metrics_values(c_initial: f64, c_total: f64) -> Result<MetricsReport> {
    if !(c_initial > 0.0) {
        return Err(Error::InvalidArgument("c_initial must be positive".into()));
    }
    let delta_c = c_initial - c_total;
    Ok(MetricsReport { c_initial, c_total, delta_c, reduction_pct: 100.0 * delta_c / c_initial })
}

pub fn metrics(c_initial: f64, solution: &RoutingSolution) -> Result<MetricsReport> {
    metrics_values(c_initial, solution.total_cost())
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SolutionEdgeWire {
    from: usize,
    to: usize,
    cost: f64,
    phase: Phase,
}

#[derive(Serialize)]
struct SolutionWire<'a> {
    edges: Vec<SolutionEdgeWire>,
    method_per_cluster: &'a [MethodTag],
    metrics: &'a MetricsReport,
    violations: &'a ViolationReport,
}

/// Solution JSON: edges in `(from, to)` order with their phase, per-cluster
/// method tags, metrics, and the violation report.
pub fn solution_json(
    solution: &RoutingSolution,
    metrics: &MetricsReport,
    violations: &ViolationReport,
) -> Result<String> {
    let wire = SolutionWire {
        edges: solution
            .edges
            .iter()
            .map(|(&(from, to), sel)| SolutionEdgeWire { from, to, cost: sel.cost, phase: sel.phase })
            .collect(),
        method_per_cluster: &solution.method_per_cluster,
        metrics,
        violations,
    };
    Ok(serde_json::to_string_pretty(&wire)?)
}

/// One CSV row per method run: `instance_id, method, c_initial, c_total,
/// delta_c, reduction_pct`.
pub fn metrics_csv(rows: &[(String, String, MetricsReport)]) -> String {
    let mut out = String::from("instance_id,method,c_initial,c_total,delta_c,reduction_pct\n");
    for (instance, method, m) in rows {
        out.push_str(&format!(
            "{instance},{method},{},{},{},{}\n",
            m.c_initial, m.c_total, m.delta_c, m.reduction_pct
        ));
    }
    out
}

/// DOT export of a solution; edge pen width grows with cost, repair edges
/// are dashed.
pub fn solution_dot(graph: &WsnGraph, solution: &RoutingSolution) -> String {
    let max_cost = solution.edges.values().map(|s| s.cost).fold(0.0, f64::max).max(1e-12);
    let mut s = String::from("digraph solution {\n");
    for n in &graph.nodes {
        let color = match n.role {
            NodeRole::Sensor => "lightblue",
            NodeRole::ClusterHead => "green",
            NodeRole::BaseStation => "red",
        };
        s.push_str(&format!(
            "  n{} [style=filled, fillcolor={color}, pos=\"{},{}!\"];\n",
            n.id, n.pos.0, n.pos.1
        ));
    }
    for (&(from, to), sel) in &solution.edges {
        let width = 0.5 + 3.0 * sel.cost / max_cost;
        let style = match sel.phase {
            Phase::Cluster => "solid",
            Phase::Repair => "dashed",
        };
        s.push_str(&format!(
            "  n{from} -> n{to} [penwidth={width:.3}, style={style}];\n"
        ));
    }
    s.push_str("}\n");
    s
}
