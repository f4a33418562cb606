//! Classical routing inside a subgraph.
//!
//! [`greedy_route`] is the comparison baseline: each sensor walks toward the
//! sink, always taking its cheapest outgoing edge that strictly reduces the
//! Euclidean distance to the sink. A stuck walk is replaced wholesale by that
//! sensor's minimum-cost (Dijkstra) path. The strict distance decrease bounds
//! every walk by `|V_s|` steps.
//!
//! [`shortest_path_route`] unions per-sensor minimum-cost paths directly; the
//! pipeline uses it for subproblems that exceed the simulator cap.
//!
//! Shared edges are counted once in the total: a link, once active, serves
//! all flows crossing it.

use std::collections::BTreeMap;

use crate::cluster::Subgraph;
use crate::netmodel::distance;

#[derive(Debug, Clone, PartialEq)]
pub struct GreedySolution {
    /// Selected directed edges with their costs.
    pub edges: BTreeMap<(usize, usize), f64>,
    /// Energy spent per node: the cost sum of its selected outgoing edges.
    pub per_node_energy: BTreeMap<usize, f64>,
    pub total_cost: f64,
    /// Sensors with no path to the sink.
    pub unreached: Vec<usize>,
}

impl GreedySolution {
    fn from_edges(edges: BTreeMap<(usize, usize), f64>, unreached: Vec<usize>) -> Self {
        let mut per_node_energy: BTreeMap<usize, f64> = BTreeMap::new();
        let mut total_cost = 0.0;
        for (&(from, _), &cost) in &edges {
            *per_node_energy.entry(from).or_insert(0.0) += cost;
            total_cost += cost;
        }
        GreedySolution { edges, per_node_energy, total_cost, unreached }
    }
}

/// Greedy distance-reducing walk per sensor, unioned over the subgraph.
pub fn greedy_route(sub: &Subgraph, sink: usize) -> GreedySolution {
    let sink_pos = sub.node(sink).expect("sink must belong to the subgraph").pos;
    let mut selected: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut unreached = Vec::new();

    for sensor in sub.sensors() {
        if sensor.id == sink {
            continue;
        }
        match greedy_walk(sub, sensor.id, sink, sink_pos)
            .or_else(|| dijkstra_path(sub, sensor.id, sink))
        {
            Some(path) => {
                for (from, to, cost) in path {
                    selected.insert((from, to), cost);
                }
            }
            None => unreached.push(sensor.id),
        }
    }
    GreedySolution::from_edges(selected, unreached)
}

/// Union of minimum-cost sensor-to-sink paths.
pub fn shortest_path_route(sub: &Subgraph, sink: usize) -> GreedySolution {
    let mut selected: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut unreached = Vec::new();
    for sensor in sub.sensors() {
        if sensor.id == sink {
            continue;
        }
        match dijkstra_path(sub, sensor.id, sink) {
            Some(path) => {
                for (from, to, cost) in path {
                    selected.insert((from, to), cost);
                }
            }
            None => unreached.push(sensor.id),
        }
    }
    GreedySolution::from_edges(selected, unreached)
}

/// The walk itself: cheapest strictly-distance-reducing edge at each step,
/// ties toward the lower target id. `None` when stuck before the sink.
fn greedy_walk(
    sub: &Subgraph,
    start: usize,
    sink: usize,
    sink_pos: (f64, f64),
) -> Option<Vec<(usize, usize, f64)>> {
    let mut path = Vec::new();
    let mut current = start;
    while current != sink {
        let here = sub.node(current)?.pos;
        let d_here = distance(here, sink_pos);
        let mut best: Option<(f64, usize, f64)> = None;
        for e in sub.edges.iter().filter(|e| e.from == current) {
            let d_next = distance(sub.node(e.to)?.pos, sink_pos);
            if d_next < d_here {
                let candidate = (e.cost, e.to, d_next);
                if best.map_or(true, |(c, t, _)| (e.cost, e.to) < (c, t)) {
                    best = Some(candidate);
                }
            }
        }
        let (cost, next, _) = best?;
        path.push((current, next, cost));
        current = next;
    }
    Some(path)
}

/// Deterministic Dijkstra over edge costs: the frontier pops by
/// `(distance, id)` and parents update only on strict improvement.
fn dijkstra_path(sub: &Subgraph, start: usize, sink: usize) -> Option<Vec<(usize, usize, f64)>> {
    let ids: Vec<usize> = sub.node_ids();
    let index: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let n = ids.len();
    let start_i = *index.get(&start)?;
    let sink_i = *index.get(&sink)?;

    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<(usize, f64)>> = vec![None; n];
    let mut done = vec![false; n];
    dist[start_i] = 0.0;

    loop {
        let mut current = None;
        for i in 0..n {
            if !done[i] && dist[i].is_finite() {
                match current {
                    None => current = Some(i),
                    Some(c) if dist[i] < dist[c] => current = Some(i),
                    _ => {}
                }
            }
        }
        let Some(u) = current else { break };
        if u == sink_i {
            break;
        }
        done[u] = true;
        for e in sub.edges.iter().filter(|e| e.from == ids[u]) {
            let v = index[&e.to];
            if !done[v] && dist[u] + e.cost < dist[v] {
                dist[v] = dist[u] + e.cost;
                parent[v] = Some((u, e.cost));
            }
        }
    }

    if !dist[sink_i].is_finite() {
        return None;
    }
    let mut path = Vec::new();
    let mut v = sink_i;
    while v != start_i {
        let (u, cost) = parent[v].expect("finite distance implies a parent chain");
        path.push((ids[u], ids[v], cost));
        v = u;
    }
    path.reverse();
    Some(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{nodes_from_layout, NodeRole, WsnGraph};

    fn as_subgraph(graph: &WsnGraph) -> Subgraph {
        Subgraph { nodes: graph.nodes.clone(), edges: graph.edges.clone() }
    }

    #[test]
    fn single_edge_to_sink_selected() {
        let nodes = nodes_from_layout(&[
            ((0.0, 0.0), NodeRole::Sensor),
            ((3.0, 0.0), NodeRole::BaseStation),
        ]);
        let g = WsnGraph::from_nodes(nodes, 5.0, 1.0, (10.0, 10.0)).unwrap();
        let sol = greedy_route(&as_subgraph(&g), 1);
        assert_eq!(sol.edges.len(), 1);
        assert!(sol.edges.contains_key(&(0, 1)));
        assert!((sol.total_cost - 9.0).abs() < 1e-9);
        assert!(sol.unreached.is_empty());
    }

    #[test]
    fn cheaper_two_hop_beats_direct_edge() {
        // Direct cost 25 vs 9 + 9 via a relay that is closer to the sink:
        // the walk takes the cost-9 first hop.
        let y = (9.0f64 - 6.25).sqrt();
        let nodes = nodes_from_layout(&[
            ((0.0, 0.0), NodeRole::Sensor),
            ((2.5, y), NodeRole::ClusterHead),
            ((5.0, 0.0), NodeRole::BaseStation),
        ]);
        let g = WsnGraph::from_nodes(nodes, 25.0, 1.0, (10.0, 10.0)).unwrap();
        let sol = greedy_route(&as_subgraph(&g), 2);
        assert!(sol.edges.contains_key(&(0, 1)), "walk should start with the cost-9 edge");
        assert!(sol.edges.contains_key(&(1, 2)));
        assert!(!sol.edges.contains_key(&(0, 2)));
        assert!((sol.total_cost - 18.0).abs() < 1e-9);
    }

    #[test]
    fn disconnected_sensor_is_flagged_not_fatal() {
        let nodes = nodes_from_layout(&[
            ((0.0, 0.0), NodeRole::Sensor),
            ((50.0, 50.0), NodeRole::Sensor),
            ((52.0, 50.0), NodeRole::BaseStation),
        ]);
        let g = WsnGraph::from_nodes(nodes, 5.0, 1.0, (100.0, 100.0)).unwrap();
        let sol = greedy_route(&as_subgraph(&g), 2);
        assert_eq!(sol.unreached, vec![0]);
        assert!(sol.edges.contains_key(&(1, 2)));
        assert!((sol.total_cost - 4.0).abs() < 1e-9);
    }

    #[test]
    fn stuck_walk_falls_back_to_dijkstra() {
        // The sensor's only distance-reducing neighbor is a dead end (a
        // cluster head whose sole link points back). The real route starts
        // with a distance-increasing hop, so the walk gets stuck at the dead
        // end and the sensor's path must come from Dijkstra instead.
        let nodes = nodes_from_layout(&[
            ((0.0, 6.0), NodeRole::Sensor),        // 0: sensor
            ((4.0, 7.0), NodeRole::ClusterHead),   // 1: dead end, closer to sink
            ((0.0, 1.0), NodeRole::Sensor),        // 2: detour, farther from sink
            ((4.5, 1.0), NodeRole::Sensor),        // 3
            ((8.5, 3.0), NodeRole::Sensor),        // 4
            ((10.0, 6.0), NodeRole::BaseStation),  // 5: sink
        ]);
        let g = WsnGraph::from_nodes(nodes, 5.5, 1.0, (12.0, 12.0)).unwrap();
        // Sanity on the intended topology: 1 only reaches 0.
        assert!(g.edge_between(1, 5).is_none());
        assert!(g.edge_between(1, 2).is_none());
        assert!(g.edge_between(0, 5).is_none());
        let sub = as_subgraph(&g);
        let sol = greedy_route(&sub, 5);
        assert!(sol.unreached.is_empty());
        assert!(!sol.edges.contains_key(&(0, 1)), "stuck walk must be discarded");
        for pair in [(0, 2), (2, 3), (3, 4), (4, 5)] {
            assert!(sol.edges.contains_key(&pair), "missing {pair:?}");
        }
    }

    #[test]
    fn walks_terminate_within_node_count() {
        let nodes = nodes_from_layout(&[
            ((0.0, 0.0), NodeRole::Sensor),
            ((1.0, 0.0), NodeRole::Sensor),
            ((2.0, 0.0), NodeRole::Sensor),
            ((3.0, 0.0), NodeRole::BaseStation),
        ]);
        let g = WsnGraph::from_nodes(nodes, 3.5, 1.0, (10.0, 10.0)).unwrap();
        let sub = as_subgraph(&g);
        let sol = greedy_route(&sub, 3);
        // Union of walks: every walk has at most |V_s| edges.
        assert!(sol.edges.len() <= sub.nodes.len() * sub.nodes.len());
        assert!(sol.unreached.is_empty());
    }

    #[test]
    fn shortest_path_route_is_no_worse_per_sensor() {
        let nodes = nodes_from_layout(&[
            ((0.0, 0.0), NodeRole::Sensor),
            ((2.0, 1.0), NodeRole::Sensor),
            ((4.0, 0.0), NodeRole::BaseStation),
        ]);
        let g = WsnGraph::from_nodes(nodes, 5.0, 1.0, (10.0, 10.0)).unwrap();
        let sub = as_subgraph(&g);
        let greedy = greedy_route(&sub, 2);
        let shortest = shortest_path_route(&sub, 2);
        assert!(shortest.unreached.is_empty());
        assert!(shortest.total_cost <= greedy.total_cost + 1e-9);
    }

    #[test]
    fn per_node_energy_sums_outgoing_costs() {
        let nodes = nodes_from_layout(&[
            ((0.0, 0.0), NodeRole::Sensor),
            ((1.0, 0.0), NodeRole::Sensor),
            ((2.0, 0.0), NodeRole::BaseStation),
        ]);
        let g = WsnGraph::from_nodes(nodes, 1.5, 1.0, (10.0, 10.0)).unwrap();
        let sol = greedy_route(&as_subgraph(&g), 2);
        // Node 0 -> 1 -> 2 and node 1 -> 2 share the (1, 2) edge.
        assert_eq!(sol.edges.len(), 2);
        assert!((sol.per_node_energy[&0] - 1.0).abs() < 1e-12);
        assert!((sol.per_node_energy[&1] - 1.0).abs() < 1e-12);
        assert!((sol.total_cost - 2.0).abs() < 1e-12);
    }
}
