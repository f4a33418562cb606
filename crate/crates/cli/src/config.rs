//! Run configuration: JSON config file merged with command-line flags.
//! Flags win over the file; the file wins over built-in defaults. Unknown
//! keys in the file are rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;

use qroute_core::assembly::pipeline::{Method, PipelineConfig};
use qroute_core::qaoa::QaoaConfig;
use qroute_core::qubo::EnergyPenalty;

pub const OUTPUT_DIR_ENV: &str = "QROUTE_OUTPUT_DIR";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub instance: Option<PathBuf>,
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub k_clusters: Option<usize>,
    pub k_nn: Option<usize>,
    pub lambda_flow: Option<f64>,
    pub lambda_energy: Option<f64>,
    pub energy_penalty: Option<String>,
    pub methods: Option<Vec<String>>,
    pub jobs: Option<usize>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub qaoa: QaoaFileConfig,
    #[serde(default)]
    pub hex: HexFileConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaoaFileConfig {
    pub p: Option<usize>,
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub shots: Option<u64>,
    pub n_max_sim: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HexFileConfig {
    pub d: Option<usize>,
    pub strategy: Option<String>,
    pub qpus: Option<usize>,
}

pub fn load_file_config(path: Option<&Path>) -> anyhow::Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let cfg: FileConfig = serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?;
            Ok(cfg)
        }
    }
}

pub fn parse_energy_penalty(s: &str) -> anyhow::Result<EnergyPenalty> {
    match s {
        "verbatim" => Ok(EnergyPenalty::Verbatim),
        "one_sided" | "one-sided" => Ok(EnergyPenalty::OneSided),
        other => bail!("unknown energy penalty mode '{other}' (verbatim | one_sided)"),
    }
}

pub fn parse_methods(s: &str) -> anyhow::Result<Vec<Method>> {
    let mut methods = Vec::new();
    for part in s.split(',') {
        match part.trim() {
            "qaoa" => methods.push(Method::Qaoa),
            "greedy" => methods.push(Method::Greedy),
            other => bail!("unknown method '{other}' (qaoa | greedy)"),
        }
    }
    if methods.is_empty() {
        bail!("no methods given");
    }
    Ok(methods)
}

/// Assemble the pipeline configuration from defaults, config file, and flags.
#[allow(clippy::too_many_arguments)]
pub struct PipelineFlags {
    pub k_clusters: Option<usize>,
    pub k_nn: Option<usize>,
    pub lambda_flow: Option<f64>,
    pub lambda_energy: Option<f64>,
    pub energy_penalty: Option<String>,
    pub methods: Option<String>,
    pub p: Option<usize>,
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub shots: Option<u64>,
    pub n_max_sim: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

pub fn resolve_pipeline(file: &FileConfig, flags: &PipelineFlags) -> anyhow::Result<PipelineConfig> {
    let defaults = PipelineConfig::default();
    let qdef = QaoaConfig::default();

    let energy_penalty = match flags.energy_penalty.as_deref().or(file.energy_penalty.as_deref()) {
        Some(s) => parse_energy_penalty(s)?,
        None => defaults.energy_penalty,
    };
    let methods = match &flags.methods {
        Some(s) => parse_methods(s)?,
        None => match &file.methods {
            Some(list) => parse_methods(&list.join(","))?,
            None => defaults.methods.clone(),
        },
    };
    let n_max_sim = flags.n_max_sim.or(file.qaoa.n_max_sim).unwrap_or(qdef.n_max_sim);
    if n_max_sim > qroute_core::qaoa::N_MAX_SIM_HARD {
        bail!(
            "n_max_sim {} exceeds the simulator cap of {}",
            n_max_sim,
            qroute_core::qaoa::N_MAX_SIM_HARD
        );
    }

    Ok(PipelineConfig {
        k_clusters: flags.k_clusters.or(file.k_clusters).unwrap_or(defaults.k_clusters),
        k_nn: flags.k_nn.or(file.k_nn).unwrap_or(defaults.k_nn),
        lambda_flow: flags.lambda_flow.or(file.lambda_flow),
        lambda_energy: flags.lambda_energy.or(file.lambda_energy),
        energy_penalty,
        qaoa: QaoaConfig {
            p: flags.p.or(file.qaoa.p).unwrap_or(qdef.p),
            restarts: flags.restarts.or(file.qaoa.restarts).unwrap_or(qdef.restarts),
            max_iters: flags.max_iters.or(file.qaoa.max_iters).unwrap_or(qdef.max_iters),
            shots: flags.shots.or(file.qaoa.shots).unwrap_or(qdef.shots),
            n_max_sim,
            seed: 0, // overridden per cluster from the top-level seed
        },
        methods,
        seed: flags.seed.or(file.seed).unwrap_or(0),
        jobs: flags.jobs.or(file.jobs).unwrap_or(1),
    })
}

/// Output directory: flag, then config file, then env var, then `.`.
pub fn resolve_output_dir(flag: Option<&Path>, file: &FileConfig) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = &file.output_dir {
        return dir.clone();
    }
    if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(".")
}
