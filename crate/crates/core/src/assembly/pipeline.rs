//! End-to-end orchestration: partition once, solve every cluster with each
//! requested method, assemble, repair, validate, and report metrics.
//!
//! The hybrid method sends a cluster through the QAOA path only when its
//! variable count (the subgraph's directed edge count) fits the simulator
//! cap; larger clusters are processed classically with the same greedy-walk
//! routine as the baseline and tagged `classical-fallback`. Both methods run
//! on the identical graph and partition so their metrics form a paired
//! comparison, and a run whose clusters all fall back reproduces the greedy
//! totals exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::assembly::{
    connect_cluster_heads, metrics, repair_connectivity, validate, MethodTag, MetricsReport,
    RepairReport, RoutingSolution, ViolationReport,
};
use crate::baseline::greedy_route;
use crate::cluster::{partition, Partition, PartitionConfig, Subgraph};
use crate::error::{Error, Result};
use crate::netmodel::{initial_cost, NodeRole, WsnGraph};
use crate::qaoa::{solve, QaoaConfig, QaoaResult, N_MAX_SIM_HARD};
use crate::qubo::{build_qubo, default_weights, net_flows, EnergyPenalty, NetFlow, QuboWeights};
use crate::seeding;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Qaoa,
    Greedy,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Qaoa => f.write_str("qaoa"),
            Method::Greedy => f.write_str("greedy"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub k_clusters: usize,
    pub k_nn: usize,
    /// `None` means the per-cluster defaults from [`default_weights`].
    pub lambda_flow: Option<f64>,
    pub lambda_energy: Option<f64>,
    pub energy_penalty: EnergyPenalty,
    pub qaoa: QaoaConfig,
    pub methods: Vec<Method>,
    pub seed: u64,
    /// Upper bound on concurrent per-cluster solves.
    pub jobs: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k_clusters: 5,
            k_nn: 10,
            lambda_flow: None,
            lambda_energy: None,
            energy_penalty: EnergyPenalty::Verbatim,
            qaoa: QaoaConfig::default(),
            methods: vec![Method::Qaoa, Method::Greedy],
            seed: 0,
            jobs: 1,
        }
    }
}

/// Outcome of one cluster under one method.
#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub cluster: usize,
    pub tag: MethodTag,
    pub n_vars: usize,
    pub edges: BTreeMap<(usize, usize), f64>,
    pub qaoa: Option<QaoaResult>,
    /// Recorded failure or fallback reason, when any.
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub clusters: Vec<ClusterOutcome>,
    pub solution: RoutingSolution,
    pub metrics: MetricsReport,
    pub violations: ViolationReport,
    pub repair: RepairReport,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub c_initial: f64,
    pub partition: Partition,
    pub runs: Vec<MethodRun>,
}

/// Network-level net flows: +1 per sensor, 0 per cluster head, minus the
/// sensor count at the base station.
pub fn network_flows(graph: &WsnGraph) -> NetFlow {
    let bs = graph.base_station();
    let mut b = BTreeMap::new();
    let mut sensors = 0i64;
    for n in &graph.nodes {
        let flow = if n.role == NodeRole::Sensor {
            sensors += 1;
            1
        } else {
            0
        };
        b.insert(n.id, flow);
    }
    b.insert(bs, -sensors);
    NetFlow { b, sink: bs }
}

pub fn run_pipeline(graph: &WsnGraph, cfg: &PipelineConfig) -> Result<PipelineResult> {
    if cfg.methods.is_empty() {
        return Err(Error::InvalidArgument("no methods requested".into()));
    }
    if cfg.k_nn == 0 {
        return Err(Error::InvalidArgument("k_nn must be at least 1".into()));
    }
    if cfg.energy_penalty == EnergyPenalty::OneSided && cfg.methods.contains(&Method::Qaoa) {
        return Err(Error::Unsupported(
            "one-sided energy penalty has no Ising form; the qaoa method requires verbatim".into(),
        ));
    }
    let c_initial = initial_cost(graph);
    if !(c_initial > 0.0) {
        return Err(Error::InvalidInstance("graph has no edges; nothing to optimize".into()));
    }

    let part = build_partition(graph, cfg)?;
    let runs = cfg
        .methods
        .iter()
        .map(|&method| run_method(graph, &part, method, cfg, c_initial))
        .collect::<Result<Vec<_>>>()?;

    Ok(PipelineResult { c_initial, partition: part, runs })
}

/// Partition with `k` and `k_nn` clamped to what the node count supports.
fn build_partition(graph: &WsnGraph, cfg: &PipelineConfig) -> Result<Partition> {
    let non_bs: Vec<usize> = graph
        .nodes
        .iter()
        .filter(|n| n.role != NodeRole::BaseStation)
        .map(|n| n.id)
        .collect();
    if non_bs.is_empty() {
        return Err(Error::InvalidInstance("no nodes to cluster".into()));
    }
    if non_bs.len() == 1 {
        // Too small for the spectral machinery: one singleton cluster.
        let mut assignment = vec![None; graph.len()];
        assignment[non_bs[0]] = Some(0);
        let sub = Subgraph {
            nodes: vec![graph.nodes[non_bs[0]].clone()],
            edges: vec![],
        };
        return Ok(Partition { assignment, subgraphs: vec![sub], k: 1, degenerate: false });
    }
    let k = cfg.k_clusters.clamp(1, non_bs.len());
    let k_nn = cfg.k_nn.min(non_bs.len() - 1);
    partition(graph, k, &PartitionConfig { k_nn, seed: cfg.seed })
}

fn run_method(
    graph: &WsnGraph,
    part: &Partition,
    method: Method,
    cfg: &PipelineConfig,
    c_initial: f64,
) -> Result<MethodRun> {
    let clusters = parallel_map(part.subgraphs.len(), cfg.jobs.max(1), |idx| {
        let sub = &part.subgraphs[idx];
        match method {
            Method::Qaoa => solve_cluster_hybrid(sub, idx, cfg),
            Method::Greedy => solve_cluster_greedy(sub, idx),
        }
    });

    let tags = clusters.iter().map(|c| c.tag).collect();
    let mut solution = RoutingSolution::new(tags);
    for outcome in &clusters {
        for (&(from, to), &cost) in &outcome.edges {
            solution.add_cluster_edge(from, to, cost);
        }
    }
    connect_cluster_heads(graph, &mut solution);
    let repair = repair_connectivity(graph, &mut solution);
    let violations = validate(graph, &solution, &network_flows(graph));
    let metrics = metrics(c_initial, &solution)?;
    Ok(MethodRun { method, clusters, solution, metrics, violations, repair })
}

fn solve_cluster_hybrid(sub: &Subgraph, idx: usize, cfg: &PipelineConfig) -> ClusterOutcome {
    let n_vars = sub.edges.len();
    let cap = cfg.qaoa.n_max_sim.min(N_MAX_SIM_HARD);

    let flows = match net_flows(sub) {
        Ok(flows) => flows,
        Err(e) => {
            return ClusterOutcome {
                cluster: idx,
                tag: MethodTag::ClassicalFallback,
                n_vars,
                edges: BTreeMap::new(),
                qaoa: None,
                note: Some(format!("no routing possible: {e}")),
            };
        }
    };

    if n_vars <= cap {
        let weights = resolve_weights(sub, cfg);
        match build_qubo(sub, &flows, &weights).and_then(|model| {
            let mut qcfg = cfg.qaoa.clone();
            qcfg.seed = seeding::derive_seed(cfg.seed, &format!("qaoa.cluster.{idx}"));
            solve(&model, &qcfg)
        }) {
            Ok(result) => {
                let edges = sub
                    .edges
                    .iter()
                    .zip(&result.decoded_bits)
                    .filter(|(_, &bit)| bit)
                    .map(|(e, _)| ((e.from, e.to), e.cost))
                    .collect();
                return ClusterOutcome {
                    cluster: idx,
                    tag: MethodTag::Qaoa,
                    n_vars,
                    edges,
                    qaoa: Some(result),
                    note: None,
                };
            }
            Err(e) => {
                let fallback = greedy_route(sub, flows.sink);
                return ClusterOutcome {
                    cluster: idx,
                    tag: MethodTag::ClassicalFallback,
                    n_vars,
                    edges: fallback.edges,
                    qaoa: None,
                    note: Some(format!("qaoa failed, classical fallback used: {e}")),
                };
            }
        }
    }

    let fallback = greedy_route(sub, flows.sink);
    let note = (!fallback.unreached.is_empty())
        .then(|| format!("sensors without intra-cluster path: {:?}", fallback.unreached));
    ClusterOutcome {
        cluster: idx,
        tag: MethodTag::ClassicalFallback,
        n_vars,
        edges: fallback.edges,
        qaoa: None,
        note,
    }
}

fn solve_cluster_greedy(sub: &Subgraph, idx: usize) -> ClusterOutcome {
    let n_vars = sub.edges.len();
    match net_flows(sub) {
        Ok(flows) => {
            let sol = greedy_route(sub, flows.sink);
            let note = (!sol.unreached.is_empty())
                .then(|| format!("sensors without intra-cluster path: {:?}", sol.unreached));
            ClusterOutcome {
                cluster: idx,
                tag: MethodTag::Greedy,
                n_vars,
                edges: sol.edges,
                qaoa: None,
                note,
            }
        }
        Err(e) => ClusterOutcome {
            cluster: idx,
            tag: MethodTag::Greedy,
            n_vars,
            edges: BTreeMap::new(),
            qaoa: None,
            note: Some(format!("no routing possible: {e}")),
        },
    }
}

fn resolve_weights(sub: &Subgraph, cfg: &PipelineConfig) -> QuboWeights {
    let mut weights = default_weights(sub);
    if let Some(lf) = cfg.lambda_flow {
        weights.lambda_flow = lf;
    }
    if let Some(le) = cfg.lambda_energy {
        weights.lambda_energy = le;
    }
    weights.energy_penalty = cfg.energy_penalty;
    weights
}

/// Run `f(0..count)` on up to `jobs` threads; results land in index order so
/// downstream assembly is independent of scheduling.
fn parallel_map<T, F>(count: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if jobs <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..count).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(count) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= count {
                    break;
                }
                let value = f(idx);
                slots.lock().expect("no panics while holding the lock")[idx] = Some(value);
            });
        }
    });
    slots
        .into_inner()
        .expect("threads joined")
        .into_iter()
        .map(|slot| slot.expect("every index filled"))
        .collect()
}
