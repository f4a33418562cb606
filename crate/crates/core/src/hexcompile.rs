//! Compilation cost estimates for sub-QAOA circuits on heavy-hexagonal
//! hardware, under three strategies: one circuit per QPU (`single`), all
//! circuits in disjoint regions of one QPU (`clustered`), and bin-packed
//! placement across several QPUs with inter-QPU interactions counted as
//! e-bits (`modular`).
//!
//! Placement is an estimator, not a transpiler: the highest-degree logical
//! qubit lands on the highest-degree free physical qubit, its interaction
//! neighbors follow by BFS onto the nearest free qubits, and every
//! interaction edge then contributes `physical path length - 1` to the SWAP
//! estimate. SWAP reuse is not modeled, so the estimate is an upper bound.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qubo::IsingModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    HeavyHex { distance: usize },
    Custom,
}

/// Physical qubit connectivity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingMap {
    pub qubits: usize,
    /// Undirected couplers, normalized to `i < j` and sorted.
    pub couplers: Vec<(usize, usize)>,
    pub kind: MapKind,
    adjacency: Vec<Vec<usize>>,
}

impl CouplingMap {
    pub fn custom(qubits: usize, couplers: Vec<(usize, usize)>) -> Result<Self> {
        Self::build(qubits, couplers, MapKind::Custom)
    }

    fn build(qubits: usize, couplers: Vec<(usize, usize)>, kind: MapKind) -> Result<Self> {
        let mut normalized: Vec<(usize, usize)> = couplers
            .into_iter()
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        normalized.sort_unstable();
        normalized.dedup();
        let mut adjacency = vec![Vec::new(); qubits];
        for &(a, b) in &normalized {
            if a == b || b >= qubits {
                return Err(Error::InvalidArgument(format!("bad coupler ({a}, {b})")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        Ok(CouplingMap { qubits, couplers: normalized, kind, adjacency })
    }

    pub fn degree(&self, q: usize) -> usize {
        self.adjacency[q].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.qubits).map(|q| self.degree(q)).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        if self.qubits == 0 {
            return true;
        }
        self.distances_from(0).iter().all(|&d| d != usize::MAX)
    }

    /// BFS hop distances from `start`; `usize::MAX` marks unreachable.
    pub fn distances_from(&self, start: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.qubits];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Heavy-hexagon lattice of odd code distance `d >= 3`.
///
/// Construction: `d` rows of `d` data qubits; between consecutive data rows,
/// a row of `d` flag qubits, each joined to the data qubit above and below in
/// its column; syndrome qubits bridge horizontal pairs — between the two
/// leading data qubits of column pairs `(2m, 2m+1)` on the top row, between
/// flags `(2m+1, 2m+2)` on even flag rows and `(2m, 2m+1)` on odd flag rows,
/// and between data `(2m+1, 2m+2)` on the bottom row. Qubit count is
/// `(5d^2 - 2d - 1) / 2` and the maximum degree is 3.
pub fn heavy_hex_map(d: usize) -> Result<CouplingMap> {
    if d < 3 || d % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "heavy-hex distance must be an odd integer >= 3, got {d}"
        )));
    }
    let data = |r: usize, c: usize| r * d + c;
    let flag_base = d * d;
    let flag = |r: usize, c: usize| flag_base + r * d + c;
    let half = (d - 1) / 2;
    let syn_top_base = flag_base + d * (d - 1);
    let syn_row_base = syn_top_base + half;
    let syn_bot_base = syn_row_base + (d - 1) * half;
    let qubits = syn_bot_base + half;

    let mut couplers = Vec::new();
    for r in 0..d - 1 {
        for c in 0..d {
            couplers.push((flag(r, c), data(r, c)));
            couplers.push((flag(r, c), data(r + 1, c)));
        }
    }
    for m in 0..half {
        let s = syn_top_base + m;
        couplers.push((s, data(0, 2 * m)));
        couplers.push((s, data(0, 2 * m + 1)));
    }
    for r in 0..d - 1 {
        for m in 0..half {
            let s = syn_row_base + r * half + m;
            let (c1, c2) = if r % 2 == 0 { (2 * m + 1, 2 * m + 2) } else { (2 * m, 2 * m + 1) };
            couplers.push((s, flag(r, c1)));
            couplers.push((s, flag(r, c2)));
        }
    }
    for m in 0..half {
        let s = syn_bot_base + m;
        couplers.push((s, data(d - 1, 2 * m + 1)));
        couplers.push((s, data(d - 1, 2 * m + 2)));
    }
    CouplingMap::build(qubits, couplers, MapKind::HeavyHex { distance: d })
}

/// Spin interaction structure of an Ising model: one vertex per spin, one
/// edge per nonzero coupling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionGraph {
    pub n: usize,
    /// Edges normalized to `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl InteractionGraph {
    pub fn new(n: usize, mut edges: Vec<(usize, usize)>) -> Self {
        for e in edges.iter_mut() {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.sort_unstable();
        edges.dedup();
        InteractionGraph { n, edges }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }
}

pub fn interaction_graph(ising: &IsingModel) -> InteractionGraph {
    let edges = ising.couplings().into_iter().map(|(i, j, _)| (i, j)).collect();
    InteractionGraph::new(ising.n_spins(), edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Single,
    Clustered,
    Modular,
}

/// Cost estimate for one placement. E-bits count interaction edges crossing
/// QPU boundaries per layer; they are zero except for modular splits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompilationReport {
    pub strategy: Strategy,
    pub qubits_used: usize,
    /// `(logical, physical)` pairs; for multi-circuit reports the logical
    /// index is offset by the spin counts of preceding circuits and the
    /// physical index by the qubit counts of preceding QPUs.
    pub mapping: Vec<(usize, usize)>,
    /// Two-qubit gate count per QAOA layer: two CNOTs per interaction.
    pub two_qubit_gates: usize,
    pub swaps_estimated: usize,
    pub ebits: usize,
    pub depth_estimate: usize,
}

/// SWAP estimate for an explicit mapping: the sum over interaction edges of
/// `shortest physical path length - 1`.
pub fn estimate_swaps(
    interaction: &InteractionGraph,
    map: &CouplingMap,
    mapping: &[usize],
) -> Result<usize> {
    let mut total = 0;
    for &(u, v) in &interaction.edges {
        let dist = map.distances_from(mapping[u])[mapping[v]];
        if dist == usize::MAX {
            return Err(Error::Unsupported(
                "no physical path between mapped interaction partners".into(),
            ));
        }
        total += dist - 1;
    }
    Ok(total)
}

/// Greedy color count over the mapped interactions; a valid upper bound on
/// the chromatic index, used as the per-layer scheduling depth.
fn edge_coloring_bound(interaction: &InteractionGraph) -> usize {
    let mut colors: Vec<usize> = Vec::with_capacity(interaction.edges.len());
    let mut best = 0;
    for (idx, &(u, v)) in interaction.edges.iter().enumerate() {
        let mut used: Vec<usize> = interaction.edges[..idx]
            .iter()
            .zip(&colors)
            .filter(|(&(a, b), _)| a == u || b == u || a == v || b == v)
            .map(|(_, &c)| c)
            .collect();
        used.sort_unstable();
        let mut color = 0;
        for c in used {
            if c == color {
                color += 1;
            }
        }
        colors.push(color);
        best = best.max(color + 1);
    }
    best
}

/// Greedy placement of one circuit onto the free qubits of a map. Returns
/// the logical-to-physical assignment.
fn place(interaction: &InteractionGraph, map: &CouplingMap, free: &mut [bool]) -> Option<Vec<usize>> {
    let n = interaction.n;
    if n > free.iter().filter(|&&f| f).count() {
        return None;
    }
    let mut mapping = vec![usize::MAX; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(interaction.degree(v)), v));

    let pick_hub = |free: &[bool]| -> Option<usize> {
        (0..map.qubits)
            .filter(|&q| free[q])
            .max_by_key(|&q| (map.degree(q), std::cmp::Reverse(q)))
    };
    let pick_near = |free: &[bool], anchor: usize| -> Option<usize> {
        let dist = map.distances_from(anchor);
        (0..map.qubits).filter(|&q| free[q]).min_by_key(|&q| (dist[q], q))
    };

    for &root in &order {
        if mapping[root] != usize::MAX {
            continue;
        }
        let phys = pick_hub(free)?;
        mapping[root] = phys;
        free[phys] = false;

        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let mut neighbors = interaction.neighbors(u);
            neighbors.sort_by_key(|&v| (std::cmp::Reverse(interaction.degree(v)), v));
            for v in neighbors {
                if mapping[v] != usize::MAX {
                    continue;
                }
                let phys = pick_near(free, mapping[u])?;
                mapping[v] = phys;
                free[phys] = false;
                queue.push_back(v);
            }
        }
    }
    Some(mapping)
}

/// Single-circuit placement and cost estimate with `p` QAOA layers.
pub fn layout(interaction: &InteractionGraph, map: &CouplingMap, p: usize) -> Result<CompilationReport> {
    if interaction.n > map.qubits {
        return Err(Error::TooLarge { what: "circuit placement", n: interaction.n, cap: map.qubits });
    }
    let mut free = vec![true; map.qubits];
    let mapping = place(interaction, map, &mut free)
        .ok_or_else(|| Error::InfeasiblePacking { circuit: 0, spins: interaction.n })?;
    let swaps = estimate_swaps(interaction, map, &mapping)?;
    let colors = edge_coloring_bound(interaction);
    Ok(CompilationReport {
        strategy: Strategy::Single,
        qubits_used: interaction.n,
        mapping: mapping.into_iter().enumerate().collect(),
        two_qubit_gates: 2 * interaction.edges.len(),
        swaps_estimated: swaps,
        ebits: 0,
        depth_estimate: p * (colors + 3 * swaps),
    })
}

/// Multi-circuit placement under the clustered or modular strategy.
///
/// Clustered requires exactly one QPU and places every circuit in a disjoint
/// region of it. Modular bin-packs circuits onto QPUs first-fit by decreasing
/// size; a circuit that fits no single QPU is split along its interaction
/// BFS order and the crossing couplings are counted as e-bits. Circuits run
/// in parallel, so the depth estimate is the maximum over circuits.
pub fn distribute(
    isings: &[IsingModel],
    qpus: &[CouplingMap],
    strategy: Strategy,
    p: usize,
) -> Result<CompilationReport> {
    match strategy {
        Strategy::Single => Err(Error::InvalidArgument(
            "single strategy takes one circuit per QPU; use layout per circuit".into(),
        )),
        Strategy::Clustered => {
            if qpus.len() != 1 {
                return Err(Error::InvalidArgument(format!(
                    "clustered strategy uses one shared QPU, got {}",
                    qpus.len()
                )));
            }
            distribute_clustered(isings, &qpus[0], p)
        }
        Strategy::Modular => distribute_modular(isings, qpus, p),
    }
}

fn logical_offsets(isings: &[IsingModel]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(isings.len());
    let mut acc = 0;
    for ising in isings {
        offsets.push(acc);
        acc += ising.n_spins();
    }
    offsets
}

fn distribute_clustered(isings: &[IsingModel], map: &CouplingMap, p: usize) -> Result<CompilationReport> {
    let offsets = logical_offsets(isings);
    let mut order: Vec<usize> = (0..isings.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(isings[i].n_spins()), i));

    let mut free = vec![true; map.qubits];
    let mut mapping = Vec::new();
    let mut swaps = 0;
    let mut gates = 0;
    let mut depth = 0;
    for &i in &order {
        let interaction = interaction_graph(&isings[i]);
        let placed = place(&interaction, map, &mut free)
            .ok_or(Error::InfeasiblePacking { circuit: i, spins: interaction.n })?;
        let s = estimate_swaps(&interaction, map, &placed)?;
        let colors = edge_coloring_bound(&interaction);
        swaps += s;
        gates += 2 * interaction.edges.len();
        depth = depth.max(p * (colors + 3 * s));
        for (logical, phys) in placed.into_iter().enumerate() {
            mapping.push((offsets[i] + logical, phys));
        }
    }
    mapping.sort_unstable();
    Ok(CompilationReport {
        strategy: Strategy::Clustered,
        qubits_used: isings.iter().map(|m| m.n_spins()).sum(),
        mapping,
        two_qubit_gates: gates,
        swaps_estimated: swaps,
        ebits: 0,
        depth_estimate: depth,
    })
}

fn distribute_modular(isings: &[IsingModel], qpus: &[CouplingMap], p: usize) -> Result<CompilationReport> {
    if qpus.is_empty() {
        return Err(Error::InvalidArgument("modular strategy needs at least one QPU".into()));
    }
    let offsets = logical_offsets(isings);
    let qpu_offsets: Vec<usize> = {
        let mut acc = 0;
        qpus.iter()
            .map(|q| {
                let o = acc;
                acc += q.qubits;
                o
            })
            .collect()
    };
    let mut free: Vec<Vec<bool>> = qpus.iter().map(|q| vec![true; q.qubits]).collect();

    let mut order: Vec<usize> = (0..isings.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(isings[i].n_spins()), i));

    let mut mapping = Vec::new();
    let mut swaps = 0;
    let mut gates = 0;
    let mut ebits = 0;
    let mut depth = 0;

    for &i in &order {
        let interaction = interaction_graph(&isings[i]);
        gates += 2 * interaction.edges.len();

        // First fit: the first QPU whose free region holds the whole circuit.
        let mut placed_whole = false;
        for (q, map) in qpus.iter().enumerate() {
            if free[q].iter().filter(|&&f| f).count() < interaction.n {
                continue;
            }
            if let Some(placed) = place(&interaction, map, &mut free[q]) {
                let s = estimate_swaps(&interaction, map, &placed)?;
                let colors = edge_coloring_bound(&interaction);
                swaps += s;
                depth = depth.max(p * (colors + 3 * s));
                for (logical, phys) in placed.into_iter().enumerate() {
                    mapping.push((offsets[i] + logical, qpu_offsets[q] + phys));
                }
                placed_whole = true;
                break;
            }
        }
        if placed_whole {
            continue;
        }

        // Forced split: walk the interaction in BFS order, filling QPUs in
        // index order; couplings across chunks become e-bits.
        let bfs = bfs_order(&interaction);
        if bfs.len() > free.iter().map(|f| f.iter().filter(|&&x| x).count()).sum::<usize>() {
            return Err(Error::InfeasiblePacking { circuit: i, spins: interaction.n });
        }
        let mut chunk_of = vec![usize::MAX; interaction.n];
        let mut cursor = 0;
        for (q, f) in free.iter().enumerate() {
            let capacity = f.iter().filter(|&&x| x).count();
            for _ in 0..capacity {
                if cursor == bfs.len() {
                    break;
                }
                chunk_of[bfs[cursor]] = q;
                cursor += 1;
            }
        }
        for q in 0..qpus.len() {
            let members: Vec<usize> = (0..interaction.n).filter(|&v| chunk_of[v] == q).collect();
            if members.is_empty() {
                continue;
            }
            let local_index: std::collections::BTreeMap<usize, usize> =
                members.iter().enumerate().map(|(l, &v)| (v, l)).collect();
            let local_edges: Vec<(usize, usize)> = interaction
                .edges
                .iter()
                .filter(|&&(a, b)| chunk_of[a] == q && chunk_of[b] == q)
                .map(|&(a, b)| (local_index[&a], local_index[&b]))
                .collect();
            let local = InteractionGraph::new(members.len(), local_edges);
            let placed = place(&local, &qpus[q], &mut free[q])
                .ok_or(Error::InfeasiblePacking { circuit: i, spins: interaction.n })?;
            let s = estimate_swaps(&local, &qpus[q], &placed)?;
            let colors = edge_coloring_bound(&local);
            swaps += s;
            depth = depth.max(p * (colors + 3 * s));
            for (&v, &phys) in members.iter().zip(&placed) {
                mapping.push((offsets[i] + v, qpu_offsets[q] + phys));
            }
        }
        ebits += interaction
            .edges
            .iter()
            .filter(|&&(a, b)| chunk_of[a] != chunk_of[b])
            .count();
    }

    mapping.sort_unstable();
    Ok(CompilationReport {
        strategy: Strategy::Modular,
        qubits_used: isings.iter().map(|m| m.n_spins()).sum(),
        mapping,
        two_qubit_gates: gates,
        swaps_estimated: swaps,
        ebits,
        depth_estimate: depth,
    })
}

/// Spin visit order: BFS per component, roots and neighbors by descending
/// degree (ties toward the lower index).
fn bfs_order(interaction: &InteractionGraph) -> Vec<usize> {
    let n = interaction.n;
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut roots: Vec<usize> = (0..n).collect();
    roots.sort_by_key(|&v| (std::cmp::Reverse(interaction.degree(v)), v));
    for &root in &roots {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut neighbors = interaction.neighbors(u);
            neighbors.sort_by_key(|&v| (std::cmp::Reverse(interaction.degree(v)), v));
            for v in neighbors {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    order
}

/// Report JSON per the compilation schema.
pub fn report_json(report: &CompilationReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}
