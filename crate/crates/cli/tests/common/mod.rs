//! Shared generators for the acceptance and CLI test suites.

use rand::Rng;

use qroute_core::cluster::Subgraph;
use qroute_core::netmodel::{nodes_from_layout, Node, NodeRole, WsnGraph};
use qroute_core::qubo::IsingModel;

/// Subgraph with a guaranteed-feasible unit flow: either `k` sensors on a
/// wide circle around a sink cluster head (only sensor-sink pairs in range)
/// or a dense 4-node cluster. At most 12 directed edges.
pub fn random_feasible_subgraph(rng: &mut impl Rng, k_star: Option<usize>) -> Subgraph {
    let epsilon = 0.02 + rng.random::<f64>() * 0.05;
    let center = (50.0, 50.0);
    let mut layout = vec![(center, NodeRole::ClusterHead)];
    let star = k_star.is_some() || rng.random::<bool>();
    if star {
        let k = k_star.unwrap_or_else(|| rng.random_range(2..=4));
        assert!(k <= 4, "wider stars would bring sensors into range of each other");
        let radius = 23.0 + rng.random::<f64>() * 2.0;
        for i in 0..k {
            let angle =
                2.0 * std::f64::consts::PI * (i as f64 + rng.random::<f64>() * 0.1) / k as f64;
            layout.push((
                (center.0 + radius * angle.cos(), center.1 + radius * angle.sin()),
                NodeRole::Sensor,
            ));
        }
    } else {
        for i in 0..3 {
            let angle = 2.0 * std::f64::consts::PI * i as f64 / 3.0;
            let r = 3.0 + rng.random::<f64>() * 2.0;
            layout.push((
                (center.0 + r * angle.cos(), center.1 + r * angle.sin()),
                NodeRole::Sensor,
            ));
        }
    }
    layout.push(((0.0, 0.0), NodeRole::BaseStation));
    let nodes = nodes_from_layout(&layout);
    let graph = WsnGraph::from_nodes(nodes, 25.0, epsilon, (100.0, 100.0)).unwrap();
    let members: Vec<Node> = graph
        .nodes
        .iter()
        .filter(|n| n.role != NodeRole::BaseStation)
        .cloned()
        .collect();
    let ids: Vec<usize> = members.iter().map(|n| n.id).collect();
    let edges = graph
        .edges
        .iter()
        .filter(|e| ids.contains(&e.from) && ids.contains(&e.to))
        .cloned()
        .collect();
    Subgraph { nodes: members, edges }
}

/// Random Ising model with fields and ~half-dense couplings in `[-2, 2]`.
pub fn random_ising(rng: &mut impl Rng, n: usize) -> IsingModel {
    let h: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
    let mut couplings = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < 0.5 {
                couplings.push((i, j, rng.random::<f64>() * 4.0 - 2.0));
            }
        }
    }
    let offset = rng.random::<f64>() * 2.0 - 1.0;
    IsingModel::new(n, h, &couplings, offset).unwrap()
}

/// Direct evaluation of the spin energy plus offset, written independently
/// of the library's diagonal construction.
pub fn naive_ising_value(ising: &IsingModel, index: u64) -> f64 {
    let n = ising.n_spins();
    let z = |i: usize| if index >> i & 1 == 1 { -1.0 } else { 1.0 };
    let mut e = ising.offset();
    for i in 0..n {
        e += ising.field(i) * z(i);
        for j in i + 1..n {
            e += ising.coupling(i, j) * z(i) * z(j);
        }
    }
    e
}
