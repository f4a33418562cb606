//! Cross-module invariants on randomized inputs: Laplacian spectra vs a
//! union-find oracle, dual-path QUBO evaluation, Ising faithfulness,
//! statevector unitarity and periodicity, penalty dominance, and repair
//! minimality replay.

use proptest::prelude::*;
use rand::Rng;

use qroute_core::assembly::{
    metrics_values, repair_connectivity, validate, RoutingSolution,
};
use qroute_core::cluster::{
    knn_adjacency_points, laplacian, symmetric_eigen, Subgraph,
};
use qroute_core::netmodel::{
    build_network, distance, nodes_from_layout, Energy, InstanceSpec, Node, NodeRole, WsnGraph,
};
use qroute_core::qaoa::{
    expectation, initial_state, optimize_params, sample, solve, QaoaConfig, Statevector,
};
use qroute_core::qubo::{
    brute_force_min, build_qubo, evaluate_unexpanded, flow_dominance_bound, net_flows,
    qubo_energy, to_ising, EnergyPenalty, IsingModel, QuboWeights,
};
use qroute_core::seeding;

fn union_find_components(n: usize, linked: impl Fn(usize, usize) -> bool) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for i in 0..n {
        for j in i + 1..n {
            if linked(i, j) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

#[test]
fn laplacian_psd_and_zero_multiplicity_match_components() {
    let mut rng = seeding::rng_for(2024, "invariants.laplacian");
    for round in 0..100 {
        let n = rng.random_range(6..40);
        let k_nn = rng.random_range(1..(n - 1).min(6));
        let points: Vec<(f64, f64)> =
            (0..n).map(|_| (rng.random::<f64>() * 100.0, rng.random::<f64>() * 100.0)).collect();
        let adj = knn_adjacency_points(&points, k_nn).unwrap();
        let lap = laplacian(&adj).unwrap();
        let eig = symmetric_eigen(&lap.to_f64(), n).unwrap();

        for &v in &eig.values {
            assert!(v >= -1e-9, "round {round}: negative eigenvalue {v}");
        }
        let zero_multiplicity = eig.values.iter().filter(|&&v| v.abs() < 1e-7).count();
        let components = union_find_components(n, |i, j| adj.get(i, j));
        assert_eq!(zero_multiplicity, components, "round {round}");
    }
}

/// Random subgraph with a guaranteed-feasible unit flow and at most 14
/// directed edges. Either a star (sensors on a wide circle around the sink
/// cluster head, spaced beyond range of each other) or a dense 4-node
/// cluster where everything is mutually in range.
fn random_star(rng: &mut impl Rng) -> (Subgraph, f64) {
    let epsilon = 0.02 + rng.random::<f64>() * 0.05;
    let center = (50.0, 50.0);
    let mut layout = vec![(center, NodeRole::ClusterHead)];
    if rng.random::<bool>() {
        // Star: radius 23..25 keeps every sensor pair (angular gap >= 0.9 *
        // 2pi/4) farther apart than the range of 25.
        let k = rng.random_range(2..=4usize);
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
        // Dense: three sensors huddled near the head, complete digraph on 4
        // nodes (12 edges).
        for i in 0..3 {
            let angle = 2.0 * std::f64::consts::PI * i as f64 / 3.0;
            let r = 3.0 + rng.random::<f64>() * 2.0;
            layout.push((
                (center.0 + r * angle.cos(), center.1 + r * angle.sin()),
                NodeRole::Sensor,
            ));
        }
    }
    // A base station outside everyone's range satisfies the one-BS rule.
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
    (Subgraph { nodes: members, edges }, epsilon)
}

#[test]
fn dual_path_evaluation_matches_on_1000_random_pairs() {
    let mut rng = seeding::rng_for(7, "invariants.dualpath");
    let mut pairs = 0;
    while pairs < 1000 {
        let (sub, _) = random_star(&mut rng);
        let flows = net_flows(&sub).unwrap();
        let mode = if rng.random::<bool>() { EnergyPenalty::Verbatim } else { EnergyPenalty::OneSided };
        let weights = QuboWeights {
            lambda_flow: rng.random::<f64>() * 50.0,
            lambda_energy: rng.random::<f64>() * 0.1,
            energy_penalty: mode,
        };
        let model = build_qubo(&sub, &flows, &weights).unwrap();
        let n = model.n_vars();
        for _ in 0..25 {
            let bits: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
            let expanded = qubo_energy(&model, &bits).unwrap();
            let direct = evaluate_unexpanded(&sub, &flows, &weights, &bits).unwrap();
            assert!(
                (expanded - direct).abs() <= 1e-9 * (1.0 + direct.abs()),
                "{expanded} vs {direct}"
            );
            pairs += 1;
        }
    }
}

#[test]
fn ising_equivalence_exhaustive_up_to_12_vars() {
    let mut rng = seeding::rng_for(11, "invariants.ising");
    // Stars give up to 10 vars; pad with a wider star for 12.
    for _ in 0..10 {
        let (sub, _) = random_star(&mut rng);
        let flows = net_flows(&sub).unwrap();
        let weights = QuboWeights {
            lambda_flow: 1.0 + rng.random::<f64>() * 20.0,
            lambda_energy: rng.random::<f64>() * 0.05,
            energy_penalty: EnergyPenalty::Verbatim,
        };
        let model = build_qubo(&sub, &flows, &weights).unwrap();
        let ising = to_ising(&model).unwrap();
        let n = model.n_vars();
        assert!(n <= 12);
        for x in 0u64..1 << n {
            let bits: Vec<bool> = (0..n).map(|i| x >> i & 1 == 1).collect();
            let q = qubo_energy(&model, &bits).unwrap();
            let e = ising.energy_of_bits(&bits) + ising.offset();
            assert!((q - e).abs() <= 1e-9 * (1.0 + q.abs()), "x={x}");
        }
    }
}

fn random_ising(rng: &mut impl Rng, n: usize, integer: bool) -> IsingModel {
    let draw = |rng: &mut dyn rand::RngCore| {
        if integer {
            rng.random_range(-2i64..=2) as f64
        } else {
            rng.random::<f64>() * 4.0 - 2.0
        }
    };
    let h: Vec<f64> = (0..n).map(|_| draw(rng)).collect();
    let mut couplings = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < 0.5 {
                let v = draw(rng);
                if v != 0.0 {
                    couplings.push((i, j, v));
                }
            }
        }
    }
    IsingModel::new(n, h, &couplings, draw(rng)).unwrap()
}

#[test]
fn unitarity_holds_through_deep_circuits() {
    let mut rng = seeding::rng_for(3, "invariants.unitarity");
    let ising = random_ising(&mut rng, 10, false);
    let diag = qroute_core::qaoa::CostDiagonal::new(&ising);
    let mut psi = initial_state(10).unwrap();
    for _ in 0..8 {
        qroute_core::qaoa::apply_phase(&mut psi, &diag, rng.random::<f64>() * 6.0);
        qroute_core::qaoa::apply_mixer(&mut psi, rng.random::<f64>() * 3.0);
    }
    assert!((psi.norm() - 1.0).abs() <= 1e-10);
}

#[test]
fn expectation_is_periodic_in_gamma_for_integer_models() {
    let mut rng = seeding::rng_for(5, "invariants.periodicity");
    for _ in 0..5 {
        let ising = random_ising(&mut rng, 6, true);
        let diag = qroute_core::qaoa::CostDiagonal::new(&ising);
        let gamma = rng.random::<f64>() * 3.0;
        let beta = rng.random::<f64>() * 1.5;
        let run = |g: f64| {
            let mut psi = initial_state(6).unwrap();
            qroute_core::qaoa::apply_phase(&mut psi, &diag, g);
            qroute_core::qaoa::apply_mixer(&mut psi, beta);
            qroute_core::qaoa::expectation_with(&psi, &diag)
        };
        let a = run(gamma);
        let b = run(gamma + 2.0 * std::f64::consts::PI);
        assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{a} vs {b}");
    }
}

#[test]
fn best_expectation_is_monotone_in_restarts() {
    let mut rng = seeding::rng_for(17, "invariants.monotone");
    let ising = random_ising(&mut rng, 5, false);
    let mut last = f64::INFINITY;
    for restarts in 1..=6 {
        let out = optimize_params(&ising, 2, restarts, 80, 99).unwrap();
        assert!(out.expectation <= last + 1e-12, "restarts {restarts}");
        last = out.expectation;
    }
}

#[test]
fn optimized_expectation_beats_uniform_on_random_instances() {
    let mut rng = seeding::rng_for(23, "invariants.beats_uniform");
    for round in 0..20 {
        let ising = random_ising(&mut rng, 6, false);
        let uniform = expectation(&initial_state(6).unwrap(), &ising);
        let out = optimize_params(&ising, 2, 4, 100, round as u64).unwrap();
        assert!(out.expectation <= uniform + 1e-9, "round {round}");
    }
}

#[test]
fn decoded_value_is_min_over_sample_support() {
    let mut rng = seeding::rng_for(29, "invariants.decode");
    let (sub, _) = random_star(&mut rng);
    let flows = net_flows(&sub).unwrap();
    let weights = QuboWeights {
        lambda_flow: 30.0,
        lambda_energy: 0.01,
        energy_penalty: EnergyPenalty::Verbatim,
    };
    let model = build_qubo(&sub, &flows, &weights).unwrap();
    let cfg = QaoaConfig { p: 2, restarts: 4, max_iters: 80, shots: 512, seed: 1, ..Default::default() };
    let res = solve(&model, &cfg).unwrap();
    let min_over_support = res
        .samples
        .keys()
        .map(|&x| {
            let bits: Vec<bool> = (0..model.n_vars()).map(|i| x >> i & 1 == 1).collect();
            qubo_energy(&model, &bits).unwrap()
        })
        .fold(f64::INFINITY, f64::min);
    assert_eq!(res.decoded_value, min_over_support);
}

#[test]
fn penalty_dominance_on_random_feasible_subgraphs() {
    let mut rng = seeding::rng_for(31, "invariants.dominance");
    for round in 0..10 {
        let (sub, _) = random_star(&mut rng);
        assert!(sub.edges.len() <= 14);
        let flows = net_flows(&sub).unwrap();
        let lambda_energy = 1e-4;
        let lambda_flow = flow_dominance_bound(&sub, lambda_energy) + 1.0;
        let weights =
            QuboWeights { lambda_flow, lambda_energy, energy_penalty: EnergyPenalty::Verbatim };
        let model = build_qubo(&sub, &flows, &weights).unwrap();
        let (bits, _) = brute_force_min(&model).unwrap();
        for node in &sub.nodes {
            let mut balance = -flows.b[&node.id];
            for (e, &x) in sub.edges.iter().zip(&bits) {
                if x && e.from == node.id {
                    balance += 1;
                }
                if x && e.to == node.id {
                    balance -= 1;
                }
            }
            assert_eq!(balance, 0, "round {round}, node {}", node.id);
        }
    }
}

#[test]
fn repair_edges_are_locally_minimal_by_replay() {
    let g = build_network(&InstanceSpec {
        n_sensors: 25,
        n_chs: 2,
        bs_position: (50.0, 110.0),
        area: (100.0, 100.0),
        comm_range: 25.0,
        epsilon: 1.0,
        rng_seed: 77,
    })
    .unwrap();
    let mut solution = RoutingSolution::new(vec![]);
    let report = repair_connectivity(&g, &mut solution);

    // Replay: walk the additions in order and confirm each one was the
    // cheapest established edge from its node into the component right then.
    let mut component = std::collections::BTreeSet::from([g.base_station()]);
    for &(from, to) in &report.added {
        assert!(component.contains(&to));
        let min_cost = g
            .out_edge_indices(from)
            .iter()
            .map(|&ei| &g.edges[ei])
            .filter(|e| component.contains(&e.to))
            .map(|e| e.cost)
            .fold(f64::INFINITY, f64::min);
        let chosen = g.edge_between(from, to).unwrap().cost;
        assert!(chosen <= min_cost + 1e-12);
        component.insert(from);
        // Joining may pull in this node's whole prior component; replay here
        // has no prior cluster edges, so only the node itself joins.
    }
    // Every node in range of the growing component got attached.
    let final_component = solution.undirected_component(g.base_station());
    for &u in &report.unreachable {
        assert!(!final_component.contains(&u));
    }
}

#[test]
fn validator_is_empty_on_brute_force_solution_of_tiny_graph() {
    // Whole-graph subproblem whose brute-force minimizer under dominant
    // lambda_flow must satisfy flow conservation; the validator agrees.
    let nodes = nodes_from_layout(&[
        ((5.0, 9.0), NodeRole::BaseStation),
        ((5.0, 5.0), NodeRole::Sensor),
        ((2.0, 5.0), NodeRole::Sensor),
    ]);
    let g = WsnGraph::from_nodes(nodes, 6.0, 0.1, (10.0, 10.0)).unwrap();
    let sub = Subgraph { nodes: g.nodes.clone(), edges: g.edges.clone() };
    let flows = net_flows(&sub).unwrap();
    let lambda_flow = flow_dominance_bound(&sub, 0.0) + 1.0;
    let weights =
        QuboWeights { lambda_flow, lambda_energy: 0.0, energy_penalty: EnergyPenalty::Verbatim };
    let model = build_qubo(&sub, &flows, &weights).unwrap();
    let (bits, _) = brute_force_min(&model).unwrap();
    let mut solution = RoutingSolution::new(vec![]);
    for (e, &x) in sub.edges.iter().zip(&bits) {
        if x {
            solution.add_cluster_edge(e.from, e.to, e.cost);
        }
    }
    let report = validate(&g, &solution, &flows);
    assert!(report.flow_violations.is_empty(), "{:?}", report.flow_violations);
}

proptest! {
    #[test]
    fn metrics_identities_hold(c_initial in 1e-6f64..1e9, c_total in 0f64..1e9) {
        let m = metrics_values(c_initial, c_total).unwrap();
        prop_assert!((m.delta_c - (c_initial - c_total)).abs() <= 1e-12 * (1.0 + m.delta_c.abs()));
        let expect_pct = 100.0 * (c_initial - c_total) / c_initial;
        prop_assert!((m.reduction_pct - expect_pct).abs() <= 1e-12 * (1.0 + expect_pct.abs()));
    }

    #[test]
    fn knn_adjacency_is_symmetric_zero_diagonal(
        seed in 0u64..500,
        n in 3usize..20,
        k_nn in 1usize..4,
    ) {
        let mut rng = seeding::rng_for(seed, "invariants.knn");
        let points: Vec<(f64, f64)> =
            (0..n).map(|_| (rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0)).collect();
        let k_nn = k_nn.min(n - 1);
        let adj = knn_adjacency_points(&points, k_nn).unwrap();
        for i in 0..n {
            prop_assert!(!adj.get(i, i));
            for j in 0..n {
                prop_assert_eq!(adj.get(i, j), adj.get(j, i));
            }
        }
    }

    #[test]
    fn histogram_total_equals_shots(shots in 1u64..5000, seed in 0u64..100) {
        let psi = Statevector::uniform(3);
        let hist = sample(&psi, shots, seed);
        prop_assert_eq!(hist.values().sum::<u64>(), shots);
    }

    #[test]
    fn edge_costs_follow_the_square_law(seed in 0u64..200) {
        let g = build_network(&InstanceSpec {
            n_sensors: 10,
            n_chs: 1,
            bs_position: (50.0, 110.0),
            area: (100.0, 100.0),
            comm_range: 30.0,
            epsilon: 2.0,
            rng_seed: seed,
        }).unwrap();
        for e in &g.edges {
            prop_assert!(e.distance <= g.comm_range);
            prop_assert!((e.cost / (e.distance * e.distance) - g.epsilon).abs() < 1e-12);
            let d = distance(g.nodes[e.from].pos, g.nodes[e.to].pos);
            prop_assert_eq!(d, e.distance);
        }
    }
}

#[test]
fn energy_type_round_trips_and_guards() {
    assert_eq!(Energy::Finite(5.0).finite(), Some(5.0));
    assert!(Energy::Unbounded.is_unbounded());
}
