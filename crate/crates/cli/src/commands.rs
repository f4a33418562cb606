//! Subcommand implementations. Every file written here is deterministic for
//! a fixed configuration and seed.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use qroute_core::assembly::pipeline::{run_pipeline, PipelineConfig, PipelineResult};
use qroute_core::assembly::{metrics_csv, solution_dot, solution_json};
use qroute_core::cluster::{partition, subgraph_dot, partition_json, Partition, PartitionConfig};
use qroute_core::hexcompile::{
    distribute, heavy_hex_map, interaction_graph, layout, CompilationReport, Strategy,
};
use qroute_core::netmodel::{
    build_network, initial_cost, load_instance, save_instance, to_dot, InstanceSpec, NodeRole,
    WsnGraph,
};
use qroute_core::qaoa::result_json;
use qroute_core::qubo::{build_qubo, default_weights, net_flows, qubo_json, to_ising, IsingModel};

use crate::config::{self, FileConfig, PipelineFlags};
use crate::error::{runtime, validation, CliError, CliResult};

pub fn preset_spec(name: &str, seed: u64) -> CliResult<InstanceSpec> {
    match name {
        "paper109" => Ok(InstanceSpec::preset_109(seed)),
        other => Err(validation(format!("unknown preset '{other}' (available: paper109)"))),
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(runtime)?;
        }
    }
    std::fs::write(path, contents).map_err(runtime)?;
    Ok(())
}

/// Resolve the instance: an explicit file, a preset, or whatever the config
/// file names. Returns the graph plus an identifier for the metrics CSV.
pub fn resolve_instance(
    instance: Option<&Path>,
    preset: Option<&str>,
    seed: u64,
    file_cfg: &FileConfig,
) -> CliResult<(WsnGraph, String)> {
    let instance = instance.map(Path::to_path_buf).or_else(|| file_cfg.instance.clone());
    let preset = preset.map(str::to_string).or_else(|| file_cfg.preset.clone());
    match (instance, preset) {
        (Some(_), Some(_)) => {
            Err(validation("give either an instance file or a preset, not both"))
        }
        (Some(path), None) => {
            let graph = load_instance(&path)?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "instance".into());
            Ok((graph, id))
        }
        (None, Some(name)) => {
            let graph = build_network(&preset_spec(&name, seed)?)?;
            Ok((graph, format!("{name}-seed{seed}")))
        }
        (None, None) => Err(validation("no instance given (use --instance or --preset)")),
    }
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

pub struct GenerateArgs {
    pub preset: Option<String>,
    pub sensors: Option<usize>,
    pub chs: Option<usize>,
    pub bs: Option<(f64, f64)>,
    pub area: Option<(f64, f64)>,
    pub range: Option<f64>,
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

pub fn cmd_generate(args: &GenerateArgs, out_dir: &Path) -> CliResult<()> {
    let spec = match (&args.preset, args.sensors) {
        (Some(name), None) => {
            let mut spec = preset_spec(name, args.seed)?;
            if let Some(r) = args.range {
                spec.comm_range = r;
            }
            if let Some(e) = args.epsilon {
                spec.epsilon = e;
            }
            spec
        }
        (None, Some(sensors)) => InstanceSpec {
            n_sensors: sensors,
            n_chs: args.chs.unwrap_or(1),
            bs_position: args.bs.unwrap_or((50.0, 110.0)),
            area: args.area.unwrap_or((100.0, 100.0)),
            comm_range: args.range.unwrap_or(25.0),
            epsilon: args.epsilon.unwrap_or(1.0),
            rng_seed: args.seed,
        },
        (Some(_), Some(_)) => {
            return Err(validation("give either --preset or --sensors, not both"))
        }
        (None, None) => return Err(validation("give --preset or --sensors")),
    };
    let graph = build_network(&spec)?;
    let path = args.out.clone().unwrap_or_else(|| out_dir.join("instance.json"));
    save_instance(&graph, &path)?;
    println!(
        "wrote {} ({} nodes, {} directed edges, C_initial = {})",
        path.display(),
        graph.len(),
        graph.edges.len(),
        initial_cost(&graph)
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// cluster
// ---------------------------------------------------------------------------

pub fn cmd_cluster(
    graph: &WsnGraph,
    k: usize,
    k_nn: usize,
    seed: u64,
    out_dir: &Path,
) -> CliResult<()> {
    let part = partition(graph, k, &PartitionConfig { k_nn, seed })?;
    write_file(&out_dir.join("partition.json"), &partition_json(&part)?)?;
    for (i, sub) in part.subgraphs.iter().enumerate() {
        write_file(&out_dir.join(format!("cluster{i}.dot")), &subgraph_dot(sub, i))?;
    }
    println!(
        "partitioned {} nodes into {} clusters ({} files in {})",
        graph.len() - 1,
        part.k,
        part.k + 1,
        out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// solve / compare
// ---------------------------------------------------------------------------

pub fn cmd_solve(
    graph: &WsnGraph,
    instance_id: &str,
    cfg: &PipelineConfig,
    out_dir: &Path,
    print_table: bool,
) -> CliResult<PipelineResult> {
    let result = run_pipeline(graph, cfg)?;

    write_file(&out_dir.join("instance.json"), &qroute_core::netmodel::to_instance_json(graph)?)?;
    write_file(&out_dir.join("partition.json"), &partition_json(&result.partition)?)?;

    let mut csv_rows = Vec::new();
    for run in &result.runs {
        let method = run.method.to_string();
        write_file(
            &out_dir.join(format!("solution_{method}.json")),
            &solution_json(&run.solution, &run.metrics, &run.violations)?,
        )?;
        write_file(
            &out_dir.join(format!("solution_{method}.dot")),
            &solution_dot(graph, &run.solution),
        )?;
        for cluster in &run.clusters {
            if let Some(qaoa) = &cluster.qaoa {
                write_file(
                    &out_dir.join(format!("qaoa_cluster{}.json", cluster.cluster)),
                    &result_json(qaoa)?,
                )?;
            }
        }
        csv_rows.push((instance_id.to_string(), method, run.metrics));
    }
    write_file(&out_dir.join("metrics.csv"), &metrics_csv(&csv_rows))?;

    for run in &result.runs {
        println!(
            "{:>6}: C_total = {:.1}, reduction = {:.2}%, repair edges = {}, unreached = {}",
            run.method.to_string(),
            run.metrics.c_total,
            run.metrics.reduction_pct,
            run.solution.repair_edges().count(),
            run.violations.unreached.len(),
        );
        for cluster in &run.clusters {
            if let Some(note) = &cluster.note {
                println!("        cluster {}: {note}", cluster.cluster);
            }
        }
    }
    if print_table {
        print_comparison(&result);
    }
    println!("outputs in {}", out_dir.display());
    Ok(result)
}

fn print_comparison(result: &PipelineResult) {
    println!("\n{:<10} {:>14} {:>14} {:>12}", "method", "C_total", "delta_C", "reduction");
    for run in &result.runs {
        println!(
            "{:<10} {:>14.1} {:>14.1} {:>11.2}%",
            run.method.to_string(),
            run.metrics.c_total,
            run.metrics.delta_c,
            run.metrics.reduction_pct
        );
    }
    let both: Vec<_> = result.runs.iter().map(|r| r.metrics.c_total).collect();
    if both.len() == 2 {
        let gap = (both[1] - both[0]).abs();
        println!("paired gap |ΔC_total| = {gap:.1} on C_initial = {:.1}", result.c_initial);
    }
}

// ---------------------------------------------------------------------------
// compile-report
// ---------------------------------------------------------------------------

pub struct CompileArgs {
    pub strategy: String,
    pub d: Option<usize>,
    pub qpus: usize,
    pub p: usize,
}

/// Smallest odd heavy-hex distance whose lattice holds `spins` qubits.
fn fit_distance(spins: usize) -> usize {
    let mut d = 3;
    while (5 * d * d - 2 * d - 1) / 2 < spins {
        d += 2;
    }
    d
}

/// Per-cluster Ising models, built with the same weight rules as the solver.
/// Clusters without a sink yield `None`.
fn cluster_isings(part: &Partition, cfg: &PipelineConfig) -> CliResult<Vec<Option<IsingModel>>> {
    let mut isings = Vec::new();
    for sub in &part.subgraphs {
        let Ok(flows) = net_flows(sub) else {
            isings.push(None);
            continue;
        };
        let mut weights = default_weights(sub);
        if let Some(lf) = cfg.lambda_flow {
            weights.lambda_flow = lf;
        }
        if let Some(le) = cfg.lambda_energy {
            weights.lambda_energy = le;
        }
        let model = build_qubo(sub, &flows, &weights)?;
        isings.push(Some(to_ising(&model)?));
    }
    Ok(isings)
}

pub fn cmd_compile_report(
    graph: &WsnGraph,
    cfg: &PipelineConfig,
    args: &CompileArgs,
    out_dir: &Path,
    export_qubos: bool,
) -> CliResult<()> {
    let non_bs = graph.nodes.iter().filter(|n| n.role != NodeRole::BaseStation).count();
    let k = cfg.k_clusters.clamp(1, non_bs.max(1));
    let k_nn = cfg.k_nn.min(non_bs.saturating_sub(1)).max(1);
    let part = partition(graph, k, &PartitionConfig { k_nn, seed: cfg.seed })?;

    if export_qubos {
        for (i, sub) in part.subgraphs.iter().enumerate() {
            if let Ok(flows) = net_flows(sub) {
                let mut weights = default_weights(sub);
                if let Some(lf) = cfg.lambda_flow {
                    weights.lambda_flow = lf;
                }
                if let Some(le) = cfg.lambda_energy {
                    weights.lambda_energy = le;
                }
                let model = build_qubo(sub, &flows, &weights)?;
                write_file(&out_dir.join(format!("qubo_cluster{i}.json")), &qubo_json(&model)?)?;
            }
        }
    }

    let isings = cluster_isings(&part, cfg)?;
    let present: Vec<&IsingModel> = isings.iter().flatten().collect();
    if present.is_empty() {
        return Err(validation("no cluster produced a model to compile"));
    }
    let strategies: Vec<Strategy> = match args.strategy.as_str() {
        "single" => vec![Strategy::Single],
        "clustered" => vec![Strategy::Clustered],
        "modular" => vec![Strategy::Modular],
        "all" => vec![Strategy::Single, Strategy::Clustered, Strategy::Modular],
        other => return Err(validation(format!("unknown strategy '{other}'"))),
    };

    for strategy in strategies {
        match strategy {
            Strategy::Single => {
                let mut reports: Vec<CompilationReport> = Vec::new();
                for ising in &present {
                    let graph = interaction_graph(ising);
                    let d = args.d.unwrap_or_else(|| fit_distance(graph.n));
                    let map = heavy_hex_map(d)?;
                    reports.push(layout(&graph, &map, args.p)?);
                }
                let json = serde_json::to_string_pretty(&reports).map_err(runtime)?;
                write_file(&out_dir.join("compile_single.json"), &json)?;
                println!(
                    "single: {} circuits, swaps = {:?}, ebits all 0",
                    reports.len(),
                    reports.iter().map(|r| r.swaps_estimated).collect::<Vec<_>>()
                );
            }
            Strategy::Clustered => {
                let total: usize = present.iter().map(|m| m.n_spins()).sum();
                let d = args.d.unwrap_or_else(|| fit_distance(total));
                let map = heavy_hex_map(d)?;
                let owned: Vec<IsingModel> = present.iter().map(|&m| m.clone()).collect();
                let report = distribute(&owned, &[map], Strategy::Clustered, args.p)?;
                write_file(
                    &out_dir.join("compile_clustered.json"),
                    &qroute_core::hexcompile::report_json(&report)?,
                )?;
                println!(
                    "clustered: d = {d}, qubits_used = {}, swaps = {}, ebits = {}",
                    report.qubits_used, report.swaps_estimated, report.ebits
                );
            }
            Strategy::Modular => {
                let largest = present.iter().map(|m| m.n_spins()).max().unwrap_or(0);
                let d = args.d.unwrap_or_else(|| fit_distance(largest));
                let qpus: Vec<_> = (0..args.qpus.max(1))
                    .map(|_| heavy_hex_map(d))
                    .collect::<Result<_, _>>()?;
                let owned: Vec<IsingModel> = present.iter().map(|&m| m.clone()).collect();
                let report = distribute(&owned, &qpus, Strategy::Modular, args.p)?;
                write_file(
                    &out_dir.join("compile_modular.json"),
                    &qroute_core::hexcompile::report_json(&report)?,
                )?;
                println!(
                    "modular: {} QPUs of d = {d}, swaps = {}, ebits = {}",
                    args.qpus, report.swaps_estimated, report.ebits
                );
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// export-dot
// ---------------------------------------------------------------------------

pub fn cmd_export_dot(graph: &WsnGraph, out: Option<&Path>, out_dir: &Path) -> CliResult<()> {
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| out_dir.join("network.dot"));
    write_file(&path, &to_dot(graph))?;
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// shared flag plumbing
// ---------------------------------------------------------------------------

pub fn pipeline_from(file_cfg: &FileConfig, flags: PipelineFlags) -> CliResult<PipelineConfig> {
    config::resolve_pipeline(file_cfg, &flags).map_err(validation_from)
}

fn validation_from(e: impl Display) -> CliError {
    validation(e.to_string())
}
