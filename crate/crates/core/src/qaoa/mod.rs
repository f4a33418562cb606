//! Exact QAOA simulation for Ising models.
//!
//! The ansatz alternates a diagonal cost phase `exp(-i gamma H_P)` with the
//! transverse-field mixer `exp(-i beta sum X_i)` for `p` layers, starting
//! from the uniform superposition. Angles are tuned by multi-start
//! Nelder-Mead on the exact expectation; the tuned state is then sampled and
//! the cheapest sampled bitstring (by QUBO value) is the decoded solution.
//!
//! The constant offset stays out of the phase (it is global) but is included
//! in every reported expectation.

mod nelder_mead;
mod statevector;

pub use nelder_mead::{minimize, NelderMeadOptions, NelderMeadOutcome};
pub use statevector::{apply_mixer, apply_phase, expectation_with, CostDiagonal, Statevector};

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{qubo_energy, to_ising, IsingModel, QuboModel};
use crate::seeding;

/// Hard simulator cap: a 25-qubit statevector is half a gigabyte.
pub const N_MAX_SIM_HARD: usize = 25;

/// Layer angles; `gammas` and `betas` both have length `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn p(&self) -> usize {
        debug_assert_eq!(self.gammas.len(), self.betas.len());
        self.gammas.len()
    }

    pub fn zeros(p: usize) -> Self {
        QaoaParams { gammas: vec![0.0; p], betas: vec![0.0; p] }
    }

    fn from_flat(flat: &[f64]) -> Self {
        let p = flat.len() / 2;
        QaoaParams { gammas: flat[..p].to_vec(), betas: flat[p..].to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaConfig {
    pub p: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub shots: u64,
    pub n_max_sim: usize,
    pub seed: u64,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        QaoaConfig { p: 3, restarts: 20, max_iters: 200, shots: 4096, n_max_sim: 25, seed: 0 }
    }
}

/// Uniform superposition over `n` qubits, `1 <= n <= 25`.
pub fn initial_state(n: usize) -> Result<Statevector> {
    if n == 0 {
        return Err(Error::InvalidArgument("statevector needs at least one qubit".into()));
    }
    if n > N_MAX_SIM_HARD {
        return Err(Error::TooLarge { what: "statevector simulation", n, cap: N_MAX_SIM_HARD });
    }
    Ok(Statevector::uniform(n))
}

/// Cost layer on a statevector. Builds the diagonal on each call; loops that
/// re-apply the same Hamiltonian should hold a [`CostDiagonal`] and use
/// [`apply_phase`].
pub fn apply_cost_layer(psi: &mut Statevector, ising: &IsingModel, gamma: f64) {
    let diag = CostDiagonal::new(ising);
    apply_phase(psi, &diag, gamma);
}

/// Mixer layer on a statevector.
pub fn apply_mixer_layer(psi: &mut Statevector, beta: f64) {
    apply_mixer(psi, beta);
}

/// `<psi|H_P|psi>` including the model's constant offset.
pub fn expectation(psi: &Statevector, ising: &IsingModel) -> f64 {
    let diag = CostDiagonal::new(ising);
    expectation_with(psi, &diag)
}

/// Build the ansatz state for the given angles into `psi`.
fn build_ansatz(psi: &mut Statevector, diag: &CostDiagonal, params: &QaoaParams) {
    psi.reset_uniform();
    for (gamma, beta) in params.gammas.iter().zip(&params.betas) {
        apply_phase(psi, diag, *gamma);
        apply_mixer(psi, *beta);
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub params: QaoaParams,
    pub expectation: f64,
    /// `(iteration, best expectation so far)` across all restarts, recorded
    /// on improvement.
    pub trace: Vec<(usize, f64)>,
    /// False when the winning restart stopped at the iteration cap.
    pub converged: bool,
}

/// Multi-start Nelder-Mead over the `2p` angles.
///
/// The first start is the zero angles (whose state is the uniform
/// superposition, so the result can never end up above that baseline); each
/// further restart draws `gamma in [0, pi)` and `beta in [0, pi/2)` from the
/// sub-seed `(seed, "qaoa.restart.{r}")`, making the best-so-far value
/// non-increasing in the restart count for nested seeds.
pub fn optimize_params(
    ising: &IsingModel,
    p: usize,
    restarts: usize,
    max_iters: usize,
    seed: u64,
) -> Result<OptimizeOutcome> {
    if p == 0 {
        return Err(Error::InvalidArgument("optimization requires p >= 1".into()));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("optimization requires at least one restart".into()));
    }
    let n = ising.n_spins();
    if n == 0 || n > N_MAX_SIM_HARD {
        return Err(Error::TooLarge { what: "statevector simulation", n, cap: N_MAX_SIM_HARD });
    }
    let diag = CostDiagonal::new(ising);
    let mut psi = Statevector::uniform(n);

    let opts = NelderMeadOptions { max_iters, initial_step: 0.1, ftol: 1e-10 };
    let mut best: Option<(f64, QaoaParams, bool)> = None;
    let mut trace: Vec<(usize, f64)> = Vec::new();
    let mut global_iter = 0usize;

    for r in 0..restarts {
        let start = if r == 0 {
            vec![0.0; 2 * p]
        } else {
            let mut rng = seeding::rng_for(seed, &format!("qaoa.restart.{r}"));
            let mut v = Vec::with_capacity(2 * p);
            for _ in 0..p {
                v.push(rng.random::<f64>() * std::f64::consts::PI);
            }
            for _ in 0..p {
                v.push(rng.random::<f64>() * std::f64::consts::FRAC_PI_2);
            }
            v
        };
        let outcome = minimize(
            |flat| {
                let params = QaoaParams::from_flat(flat);
                build_ansatz(&mut psi, &diag, &params);
                expectation_with(&psi, &diag)
            },
            &start,
            &opts,
        );
        for &value in &outcome.history {
            global_iter += 1;
            if trace.last().is_none_or(|&(_, v)| value < v) {
                trace.push((global_iter, value));
            }
        }
        let better = best.as_ref().is_none_or(|(b, _, _)| outcome.fx < *b);
        if better {
            best = Some((outcome.fx, QaoaParams::from_flat(&outcome.x), outcome.converged));
        }
    }

    let (expectation, params, converged) = best.expect("at least one restart ran");
    Ok(OptimizeOutcome { params, expectation, trace, converged })
}

/// Multinomial measurement emulation: `shots` draws from `|psi_x|^2`,
/// deterministic per seed. The histogram total always equals `shots`.
pub fn sample(psi: &Statevector, shots: u64, seed: u64) -> BTreeMap<u64, u64> {
    let probs = psi.probabilities();
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cumulative.push(acc);
    }
    let total = acc;
    let mut rng = seeding::rng_for(seed, "qaoa.sample");
    let mut histogram: BTreeMap<u64, u64> = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= u).min(probs.len() - 1);
        *histogram.entry(idx as u64).or_insert(0) += 1;
    }
    histogram
}

/// Full QAOA result for one QUBO.
#[derive(Debug, Clone)]
pub struct QaoaResult {
    pub n_vars: usize,
    pub best_params: QaoaParams,
    pub best_expectation: f64,
    /// Sampled basis indices (variable 0 = least significant bit) to counts.
    pub samples: BTreeMap<u64, u64>,
    pub decoded_bits: Vec<bool>,
    pub decoded_value: f64,
    pub trace: Vec<(usize, f64)>,
    pub converged: bool,
}

/// Convert, optimize, sample, decode.
///
/// Decoding takes the minimum-QUBO-value string among the sampled ones, ties
/// toward the smaller basis index. `p = 0` skips optimization and samples the
/// uniform superposition. A model with zero variables short-circuits to the
/// constant.
pub fn solve(model: &QuboModel, cfg: &QaoaConfig) -> Result<QaoaResult> {
    let n = model.n_vars();
    let cap = cfg.n_max_sim.min(N_MAX_SIM_HARD);
    if n > cap {
        return Err(Error::TooLarge { what: "qaoa solve", n, cap });
    }
    if n == 0 {
        return Ok(QaoaResult {
            n_vars: 0,
            best_params: QaoaParams::zeros(cfg.p),
            best_expectation: model.constant(),
            samples: BTreeMap::new(),
            decoded_bits: vec![],
            decoded_value: model.constant(),
            trace: vec![],
            converged: true,
        });
    }

    let ising = to_ising(model)?;
    let diag = CostDiagonal::new(&ising);
    let mut psi = Statevector::uniform(n);

    let (params, best_expectation, trace, converged) = if cfg.p == 0 {
        let e = expectation_with(&psi, &diag);
        (QaoaParams::zeros(0), e, vec![], true)
    } else {
        let out = optimize_params(&ising, cfg.p, cfg.restarts, cfg.max_iters, cfg.seed)?;
        (out.params, out.expectation, out.trace, out.converged)
    };

    build_ansatz(&mut psi, &diag, &params);
    let samples = sample(&psi, cfg.shots, cfg.seed);

    let mut decoded: Option<(f64, u64, Vec<bool>)> = None;
    for &index in samples.keys() {
        let bits: Vec<bool> = (0..n).map(|i| index >> i & 1 == 1).collect();
        let value = qubo_energy(model, &bits)?;
        let better = match &decoded {
            None => true,
            Some((best_v, best_i, _)) => value < *best_v || (value == *best_v && index < *best_i),
        };
        if better {
            decoded = Some((value, index, bits));
        }
    }
    let (decoded_value, _, decoded_bits) = decoded.expect("shots >= 1 yields samples");

    Ok(QaoaResult {
        n_vars: n,
        best_params: params,
        best_expectation,
        samples,
        decoded_bits,
        decoded_value,
        trace,
        converged,
    })
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

/// Render a basis index as a bitstring, variable 0 at the least significant
/// (rightmost) position.
pub fn bitstring(index: u64, n: usize) -> String {
    (0..n).rev().map(|i| if index >> i & 1 == 1 { '1' } else { '0' }).collect()
}

#[derive(Serialize)]
struct DecodedWire {
    bits: String,
    value: f64,
}

#[derive(Serialize)]
struct ResultWire {
    p: usize,
    gammas: Vec<f64>,
    betas: Vec<f64>,
    expectation: f64,
    histogram: BTreeMap<String, u64>,
    decoded: DecodedWire,
    trace: Vec<(usize, f64)>,
}

/// Result export with bitstring histogram keys.
pub fn result_json(result: &QaoaResult) -> Result<String> {
    let wire = ResultWire {
        p: result.best_params.p(),
        gammas: result.best_params.gammas.clone(),
        betas: result.best_params.betas.clone(),
        expectation: result.best_expectation,
        histogram: result
            .samples
            .iter()
            .map(|(&idx, &count)| (bitstring(idx, result.n_vars), count))
            .collect(),
        decoded: DecodedWire {
            bits: result
                .decoded_bits
                .iter()
                .rev()
                .map(|&b| if b { '1' } else { '0' })
                .collect(),
            value: result.decoded_value,
        },
        trace: result.trace.clone(),
    };
    Ok(serde_json::to_string_pretty(&wire)?)
}
