//! Per-subgraph QUBO formulation of the routing problem.
//!
//! One binary variable per directed subgraph edge. The objective is the base
//! transmission cost plus two squared penalty terms: flow conservation
//! (out-degree minus in-degree equals the node's net flow) weighted by
//! `lambda_flow`, and an energy budget term `(sum of outgoing selected costs
//! minus E_i)^2` weighted by `lambda_energy`. Energy terms skip the base
//! station's unbounded budget. Squared-diagonal products fold into linear
//! coefficients via `x^2 = x`.
//!
//! The expanded coefficients are cross-checked against
//! [`evaluate_unexpanded`], which recomputes the objective directly from the
//! subgraph without ever forming coefficients.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cluster::Subgraph;
use crate::error::{Error, Result};
use crate::netmodel::NodeRole;

/// How the energy budget term is applied.
///
/// `Verbatim` squares the difference as written in the objective, penalizing
/// under-use as well as over-use. `OneSided` replaces it with
/// `max(0, sum - E_i)^2`; that form is not quadratic in the binaries, so it
/// participates in direct evaluation and brute force but cannot be converted
/// to an Ising Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyPenalty {
    Verbatim,
    OneSided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuboWeights {
    pub lambda_flow: f64,
    pub lambda_energy: f64,
    pub energy_penalty: EnergyPenalty,
}

/// Default penalties for a subgraph: `lambda_flow = 2 * max_cost * |E_s|` so
/// flow feasibility dominates, `lambda_energy = 1 / max_i E_i` so the energy
/// term cannot swamp the base cost.
pub fn default_weights(sub: &Subgraph) -> QuboWeights {
    let max_cost = sub.edges.iter().map(|e| e.cost).fold(0.0, f64::max);
    let max_energy = sub
        .nodes
        .iter()
        .filter_map(|n| n.initial_energy.finite())
        .fold(0.0, f64::max);
    QuboWeights {
        lambda_flow: 2.0 * max_cost * sub.edges.len() as f64,
        lambda_energy: if max_energy > 0.0 { 1.0 / max_energy } else { 0.0 },
        energy_penalty: EnergyPenalty::Verbatim,
    }
}

/// A `lambda_flow` strictly above this bound guarantees every minimizer of
/// the QUBO satisfies flow conservation, provided a feasible flow exists and
/// each node's total outgoing cost stays within twice its budget.
pub fn flow_dominance_bound(sub: &Subgraph, lambda_energy: f64) -> f64 {
    let cost_sum: f64 = sub.edges.iter().map(|e| e.cost).sum();
    let energy_sq_sum: f64 = sub
        .nodes
        .iter()
        .filter_map(|n| n.initial_energy.finite())
        .map(|e| e * e)
        .sum();
    cost_sum + lambda_energy * energy_sq_sum
}

/// Net flow per node of a subproblem: +1 per sensor, 0 for non-sink cluster
/// heads, minus the sensor count at the sink, so the total is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetFlow {
    pub b: BTreeMap<usize, i64>,
    pub sink: usize,
}

/// Compute net flows. The sink is the base station when the subgraph contains
/// it; otherwise the cluster head with the lowest id absorbs the flow.
/// A subgraph with no sensors yields all-zero flows.
pub fn net_flows(sub: &Subgraph) -> Result<NetFlow> {
    let sink = sub
        .nodes
        .iter()
        .find(|n| n.role == NodeRole::BaseStation)
        .or_else(|| sub.nodes.iter().find(|n| n.role == NodeRole::ClusterHead))
        .map(|n| n.id)
        .ok_or(Error::NoSink)?;
    let mut b = BTreeMap::new();
    let mut sensor_count = 0i64;
    for node in &sub.nodes {
        let flow = if node.role == NodeRole::Sensor {
            sensor_count += 1;
            1
        } else {
            0
        };
        b.insert(node.id, flow);
    }
    b.insert(sink, -sensor_count);
    Ok(NetFlow { b, sink })
}

/// Expanded quadratic binary objective over the subgraph's directed edges.
/// Variable order follows the edge order (sorted by `(from, to)`).
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    vars: Vec<(usize, usize)>,
    var_index: BTreeMap<(usize, usize), usize>,
    linear: Vec<f64>,
    quad: Vec<f64>,
    constant: f64,
    lambda_flow: f64,
    lambda_energy: f64,
    energy_penalty: EnergyPenalty,
    /// One-sided mode only: per node, `(E_i, [(var, cost)])` over its
    /// outgoing edges.
    clamped: Vec<(f64, Vec<(usize, f64)>)>,
}

fn tri_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl QuboModel {
    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    /// Directed edge for each variable position.
    pub fn vars(&self) -> &[(usize, usize)] {
        &self.vars
    }

    pub fn var_of_edge(&self, from: usize, to: usize) -> Option<usize> {
        self.var_index.get(&(from, to)).copied()
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn linear(&self, i: usize) -> f64 {
        self.linear[i]
    }

    /// Quadratic coefficient of `x_i x_j`, `i != j`.
    pub fn quadratic(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.quad[tri_index(self.n_vars(), a, b)]
    }

    pub fn lambdas(&self) -> (f64, f64) {
        (self.lambda_flow, self.lambda_energy)
    }

    pub fn energy_penalty(&self) -> EnergyPenalty {
        self.energy_penalty
    }
}

/// Build the expanded QUBO for one subgraph.
///
/// With `lambda = 0` for both penalties the model reduces to the bare cost
/// sum. In one-sided mode the energy term is kept out of the coefficients and
/// evaluated directly (see [`EnergyPenalty`]).
pub fn build_qubo(sub: &Subgraph, flows: &NetFlow, weights: &QuboWeights) -> Result<QuboModel> {
    if weights.lambda_flow < 0.0 || weights.lambda_energy < 0.0 {
        return Err(Error::InvalidArgument("penalty weights must be non-negative".into()));
    }
    let n = sub.edges.len();
    let vars: Vec<(usize, usize)> = sub.edges.iter().map(|e| (e.from, e.to)).collect();
    debug_assert!(vars.windows(2).all(|w| w[0] < w[1]), "subgraph edges must be sorted");
    let var_index: BTreeMap<(usize, usize), usize> =
        vars.iter().enumerate().map(|(i, &e)| (e, i)).collect();

    let mut linear = vec![0.0; n];
    let mut quad = vec![0.0; n * n.saturating_sub(1) / 2];
    let mut constant = 0.0;

    // Base cost.
    for (i, e) in sub.edges.iter().enumerate() {
        linear[i] += e.cost;
    }

    // Flow conservation: (out - in - b_i)^2 per node.
    let lf = weights.lambda_flow;
    if lf > 0.0 {
        for node in &sub.nodes {
            let b = *flows.b.get(&node.id).ok_or_else(|| {
                Error::InvalidArgument(format!("net flows missing node {}", node.id))
            })? as f64;
            // Signed incidence of this node: +1 outgoing, -1 incoming.
            let incident: Vec<(usize, f64)> = sub
                .edges
                .iter()
                .enumerate()
                .filter_map(|(i, e)| {
                    if e.from == node.id {
                        Some((i, 1.0))
                    } else if e.to == node.id {
                        Some((i, -1.0))
                    } else {
                        None
                    }
                })
                .collect();
            constant += lf * b * b;
            for &(i, s) in &incident {
                linear[i] += lf * (1.0 - 2.0 * b * s);
            }
            for (a, &(i, si)) in incident.iter().enumerate() {
                for &(j, sj) in &incident[a + 1..] {
                    quad[tri_index(n, i, j)] += lf * 2.0 * si * sj;
                }
            }
        }
    }

    // Energy budget: (sum of outgoing selected costs - E_i)^2, skipping the
    // unbounded base station.
    let le = weights.lambda_energy;
    let mut clamped = Vec::new();
    for node in &sub.nodes {
        let Some(energy) = node.initial_energy.finite() else { continue };
        let out: Vec<(usize, f64)> = sub
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.from == node.id)
            .map(|(i, e)| (i, e.cost))
            .collect();
        match weights.energy_penalty {
            EnergyPenalty::Verbatim => {
                if le > 0.0 {
                    constant += le * energy * energy;
                    for &(i, c) in &out {
                        linear[i] += le * (c * c - 2.0 * energy * c);
                    }
                    for (a, &(i, ci)) in out.iter().enumerate() {
                        for &(j, cj) in &out[a + 1..] {
                            quad[tri_index(n, i, j)] += le * 2.0 * ci * cj;
                        }
                    }
                }
            }
            EnergyPenalty::OneSided => {
                if !out.is_empty() {
                    clamped.push((energy, out));
                }
            }
        }
    }

    Ok(QuboModel {
        vars,
        var_index,
        linear,
        quad,
        constant,
        lambda_flow: weights.lambda_flow,
        lambda_energy: weights.lambda_energy,
        energy_penalty: weights.energy_penalty,
        clamped,
    })
}

/// Evaluate the expanded model on a bitstring (variable i = `bits[i]`).
pub fn qubo_energy(model: &QuboModel, bits: &[bool]) -> Result<f64> {
    let n = model.n_vars();
    if bits.len() != n {
        return Err(Error::LengthMismatch { got: bits.len(), expected: n });
    }
    let mut value = model.constant;
    for i in 0..n {
        if bits[i] {
            value += model.linear[i];
            for j in i + 1..n {
                if bits[j] {
                    value += model.quad[tri_index(n, i, j)];
                }
            }
        }
    }
    value += clamped_penalty(model, bits);
    Ok(value)
}

fn clamped_penalty(model: &QuboModel, bits: &[bool]) -> f64 {
    if model.clamped.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for (energy, out) in &model.clamped {
        let spent: f64 = out.iter().filter(|(i, _)| bits[*i]).map(|(_, c)| c).sum();
        let over = (spent - energy).max(0.0);
        total += over * over;
    }
    model.lambda_energy * total
}

/// Direct, unexpanded evaluation of the objective from the subgraph itself.
/// Independent of [`build_qubo`]'s coefficient algebra; used as the oracle in
/// dual-path checks. `bits[i]` corresponds to `sub.edges[i]`.
pub fn evaluate_unexpanded(
    sub: &Subgraph,
    flows: &NetFlow,
    weights: &QuboWeights,
    bits: &[bool],
) -> Result<f64> {
    if bits.len() != sub.edges.len() {
        return Err(Error::LengthMismatch { got: bits.len(), expected: sub.edges.len() });
    }
    let mut value = 0.0;
    for (e, &x) in sub.edges.iter().zip(bits) {
        if x {
            value += e.cost;
        }
    }
    for node in &sub.nodes {
        let b = *flows
            .b
            .get(&node.id)
            .ok_or_else(|| Error::InvalidArgument(format!("net flows missing node {}", node.id)))?;
        let mut balance = -(b as f64);
        for (e, &x) in sub.edges.iter().zip(bits) {
            if x && e.from == node.id {
                balance += 1.0;
            }
            if x && e.to == node.id {
                balance -= 1.0;
            }
        }
        value += weights.lambda_flow * balance * balance;

        if let Some(energy) = node.initial_energy.finite() {
            let spent: f64 = sub
                .edges
                .iter()
                .zip(bits)
                .filter(|(e, &x)| x && e.from == node.id)
                .map(|(e, _)| e.cost)
                .sum();
            let term = match weights.energy_penalty {
                EnergyPenalty::Verbatim => {
                    let diff = spent - energy;
                    diff * diff
                }
                EnergyPenalty::OneSided => {
                    let over = (spent - energy).max(0.0);
                    over * over
                }
            };
            value += weights.lambda_energy * term;
        }
    }
    Ok(value)
}

/// Enumeration cap for [`brute_force_min`].
pub const BRUTE_FORCE_CAP: usize = 24;

/// Exhaustive global minimizer. Ties break toward the lexicographically
/// smallest bitstring, i.e. the smallest index with variable 0 as the least
/// significant bit.
pub fn brute_force_min(model: &QuboModel) -> Result<(Vec<bool>, f64)> {
    let n = model.n_vars();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge { what: "brute force enumeration", n, cap: BRUTE_FORCE_CAP });
    }
    if n == 0 {
        return Ok((vec![], model.constant));
    }

    let mut bits = vec![false; n];
    let mut value = qubo_energy(model, &bits)?;
    let mut index: u64 = 0;
    let mut best_value = value;
    let mut best_index: u64 = 0;

    // Gray-code walk: step s flips bit trailing_zeros(s). The running value
    // is re-anchored periodically to keep accumulated rounding in check.
    let total: u64 = 1 << n;
    for step in 1..total {
        let bit = step.trailing_zeros() as usize;
        let mut delta = model.linear[bit];
        for j in 0..n {
            if j != bit && bits[j] {
                delta += model.quadratic(bit, j);
            }
        }
        let before_clamp = clamped_penalty(model, &bits);
        bits[bit] = !bits[bit];
        index ^= 1 << bit;
        let after_clamp = clamped_penalty(model, &bits);
        value += if bits[bit] { delta } else { -delta };
        value += after_clamp - before_clamp;
        if step % 65536 == 0 {
            value = qubo_energy(model, &bits)?;
        }
        if value < best_value || (value == best_value && index < best_index) {
            best_value = value;
            best_index = index;
        }
    }

    let best_bits: Vec<bool> = (0..n).map(|i| best_index >> i & 1 == 1).collect();
    // Exact re-evaluation of the winner.
    let best_value = qubo_energy(model, &best_bits)?;
    Ok((best_bits, best_value))
}

// ---------------------------------------------------------------------------
// Ising form
// ---------------------------------------------------------------------------

/// Spin-form equivalent of a QUBO under `x_i = (1 - z_i) / 2`. For every
/// bitstring, `ising_energy(z(x)) + offset == qubo(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    n: usize,
    h: Vec<f64>,
    j: Vec<f64>,
    offset: f64,
}

impl IsingModel {
    /// Assemble an Ising model directly from fields and couplings
    /// (`i < j` required, duplicates rejected).
    pub fn new(n: usize, h: Vec<f64>, couplings: &[(usize, usize, f64)], offset: f64) -> Result<Self> {
        if h.len() != n {
            return Err(Error::InvalidArgument(format!(
                "expected {n} fields, got {}",
                h.len()
            )));
        }
        let mut j = vec![0.0; n * n.saturating_sub(1) / 2];
        for &(a, b, v) in couplings {
            if a >= b || b >= n {
                return Err(Error::InvalidArgument(format!("bad coupling ({a}, {b})")));
            }
            let idx = tri_index(n, a, b);
            if j[idx] != 0.0 {
                return Err(Error::InvalidArgument(format!("duplicate coupling ({a}, {b})")));
            }
            j[idx] = v;
        }
        Ok(IsingModel { n, h, j, offset })
    }

    pub fn n_spins(&self) -> usize {
        self.n
    }

    pub fn field(&self, i: usize) -> f64 {
        self.h[i]
    }

    /// Coupling `J_ij`, `i != j`.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.j[tri_index(self.n, a, b)]
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Nonzero couplings as `(i, j, J_ij)` with `i < j`, ordered.
    pub fn couplings(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let v = self.j[tri_index(self.n, i, j)];
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Spin energy `sum h_i z_i + sum J_ij z_i z_j` (offset excluded) for the
    /// bitstring's spins `z_i = 1 - 2 x_i`.
    pub fn energy_of_bits(&self, bits: &[bool]) -> f64 {
        let z = |i: usize| if bits[i] { -1.0 } else { 1.0 };
        let mut e = 0.0;
        for i in 0..self.n {
            e += self.h[i] * z(i);
            for j in i + 1..self.n {
                e += self.j[tri_index(self.n, i, j)] * z(i) * z(j);
            }
        }
        e
    }
}

/// Convert a (verbatim-mode) QUBO to its Ising form.
pub fn to_ising(model: &QuboModel) -> Result<IsingModel> {
    if !model.clamped.is_empty() {
        return Err(Error::Unsupported(
            "one-sided energy penalty is not quadratic; no Ising form exists".into(),
        ));
    }
    let n = model.n_vars();
    let mut h = vec![0.0; n];
    let mut j = vec![0.0; n * n.saturating_sub(1) / 2];
    let mut offset = model.constant;
    for i in 0..n {
        h[i] -= model.linear[i] / 2.0;
        offset += model.linear[i] / 2.0;
    }
    for a in 0..n {
        for b in a + 1..n {
            let q = model.quad[tri_index(n, a, b)];
            if q != 0.0 {
                j[tri_index(n, a, b)] = q / 4.0;
                h[a] -= q / 4.0;
                h[b] -= q / 4.0;
                offset += q / 4.0;
            }
        }
    }
    Ok(IsingModel { n, h, j, offset })
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct QuboFile {
    n_vars: usize,
    constant: f64,
    linear: Vec<f64>,
    quadratic: Vec<(usize, usize, f64)>,
    var_map: Vec<(usize, usize)>,
}

/// QUBO export: nonzero quadratic entries in `(i, j)` order.
pub fn qubo_json(model: &QuboModel) -> Result<String> {
    let n = model.n_vars();
    let mut quadratic = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let q = model.quad[tri_index(n, i, j)];
            if q != 0.0 {
                quadratic.push((i, j, q));
            }
        }
    }
    let file = QuboFile {
        n_vars: n,
        constant: model.constant,
        linear: model.linear.clone(),
        quadratic,
        var_map: model.vars.clone(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

/// Rebuild a model from its export. Only the quadratic data survives a round
/// trip; penalty metadata is not part of the schema.
pub fn qubo_from_json(json: &str) -> Result<QuboModel> {
    let file: QuboFile = serde_json::from_str(json)?;
    let n = file.n_vars;
    if file.linear.len() != n || file.var_map.len() != n {
        return Err(Error::InvalidArgument("inconsistent qubo file".into()));
    }
    let mut quad = vec![0.0; n * n.saturating_sub(1) / 2];
    for (i, j, v) in file.quadratic {
        if i >= j || j >= n {
            return Err(Error::InvalidArgument(format!("bad quadratic entry ({i}, {j})")));
        }
        quad[tri_index(n, i, j)] = v;
    }
    let var_index = file.var_map.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    Ok(QuboModel {
        vars: file.var_map,
        var_index,
        linear: file.linear,
        quad,
        constant: file.constant,
        lambda_flow: 0.0,
        lambda_energy: 0.0,
        energy_penalty: EnergyPenalty::Verbatim,
        clamped: Vec::new(),
    })
}
