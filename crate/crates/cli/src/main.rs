//! `qroute` — hybrid classical-quantum routing optimization for wireless
//! sensor networks: instance generation, spectral clustering, per-cluster
//! QUBO/QAOA or greedy solving, connectivity repair, energy metrics, and
//! heavy-hex compilation cost reports.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use commands::{CompileArgs, GenerateArgs};
use config::PipelineFlags;
use error::{validation, CliResult};

#[derive(Parser)]
#[command(
    name = "qroute",
    version,
    about = "Energy-efficient WSN routing with a hybrid classical-quantum pipeline"
)]
struct Cli {
    /// Directory for output files (default: $QROUTE_OUTPUT_DIR or .)
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// JSON config file; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance JSON file
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Built-in scenario (paper109: 100 sensors, 8 CHs, BS at (50,110))
    #[arg(long)]
    preset: Option<String>,
    /// Top-level seed; all randomness derives from it
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SolveFlags {
    /// Number of spectral clusters
    #[arg(long)]
    k: Option<usize>,
    /// Neighbors per node in the kNN graph
    #[arg(long)]
    k_nn: Option<usize>,
    /// Flow-conservation penalty weight (default: per-cluster 2*max_cost*|E_s|)
    #[arg(long)]
    lambda_flow: Option<f64>,
    /// Energy penalty weight (default: per-cluster 1/max E_i)
    #[arg(long)]
    lambda_energy: Option<f64>,
    /// Energy penalty form: verbatim | one_sided
    #[arg(long)]
    energy_penalty: Option<String>,
    /// Comma-separated methods: qaoa,greedy
    #[arg(long)]
    methods: Option<String>,
    /// QAOA layers
    #[arg(long)]
    p: Option<usize>,
    /// Optimizer restarts
    #[arg(long)]
    restarts: Option<usize>,
    /// Nelder-Mead iteration cap per restart
    #[arg(long)]
    max_iters: Option<usize>,
    /// Measurement shots
    #[arg(long)]
    shots: Option<u64>,
    /// Largest cluster (in variables) simulated exactly; bigger ones fall
    /// back to the classical method
    #[arg(long)]
    n_max_sim: Option<usize>,
    /// Concurrent per-cluster solves
    #[arg(long)]
    jobs: Option<usize>,
}

impl SolveFlags {
    fn into_pipeline_flags(self, seed: Option<u64>) -> PipelineFlags {
        PipelineFlags {
            k_clusters: self.k,
            k_nn: self.k_nn,
            lambda_flow: self.lambda_flow,
            lambda_energy: self.lambda_energy,
            energy_penalty: self.energy_penalty,
            methods: self.methods,
            p: self.p,
            restarts: self.restarts,
            max_iters: self.max_iters,
            shots: self.shots,
            n_max_sim: self.n_max_sim,
            seed,
            jobs: self.jobs,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file
    Generate {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Sensor count (alternative to --preset)
        #[arg(long)]
        sensors: Option<usize>,
        /// Cluster-head count
        #[arg(long)]
        chs: Option<usize>,
        /// Base station position as X,Y
        #[arg(long, value_parser = parse_pair)]
        bs: Option<(f64, f64)>,
        /// Area as WIDTH,HEIGHT
        #[arg(long, value_parser = parse_pair)]
        area: Option<(f64, f64)>,
        /// Communication range R
        #[arg(long)]
        range: Option<f64>,
        /// Energy coefficient epsilon
        #[arg(long)]
        epsilon: Option<f64>,
        /// Output file (default <output-dir>/instance.json)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectrally partition an instance and export the clusters
    Cluster {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        k_nn: Option<usize>,
    },
    /// Run the full pipeline and write solutions, metrics, and DOT files
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        flags: SolveFlags,
    },
    /// Solve with both methods and print a paired comparison
    Compare {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        flags: SolveFlags,
    },
    /// Estimate heavy-hex compilation cost per strategy
    CompileReport {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        k_nn: Option<usize>,
        /// single | clustered | modular | all
        #[arg(long, default_value = "all")]
        strategy: String,
        /// Heavy-hex code distance (odd, >= 3); auto-sized when omitted
        #[arg(long)]
        d: Option<usize>,
        /// QPU count for the modular strategy
        #[arg(long, default_value_t = 4)]
        qpus: usize,
        /// QAOA layers assumed in depth estimates
        #[arg(long, default_value_t = 3)]
        p: usize,
        /// Also export per-cluster QUBO JSON files
        #[arg(long)]
        export_qubos: bool,
    },
    /// Export the instance graph as DOT
    ExportDot {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected X,Y but got '{s}'"));
    }
    let x = parts[0].trim().parse().map_err(|e| format!("bad number '{}': {e}", parts[0]))?;
    let y = parts[1].trim().parse().map_err(|e| format!("bad number '{}': {e}", parts[1]))?;
    Ok((x, y))
}

fn solve_like(
    instance: InstanceArgs,
    mut flags: SolveFlags,
    file_cfg: &config::FileConfig,
    out_dir: &std::path::Path,
    compare: bool,
) -> CliResult<()> {
    if compare {
        flags.methods = Some("qaoa,greedy".into());
    }
    let seed = instance.seed.or(file_cfg.seed).unwrap_or(0);
    let (graph, id) = commands::resolve_instance(
        instance.instance.as_deref(),
        instance.preset.as_deref(),
        seed,
        file_cfg,
    )?;
    let cfg = commands::pipeline_from(file_cfg, flags.into_pipeline_flags(Some(seed)))?;
    commands::cmd_solve(&graph, &id, &cfg, out_dir, compare)?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let file_cfg = config::load_file_config(cli.config.as_deref()).map_err(validation)?;
    let out_dir = config::resolve_output_dir(cli.output_dir.as_deref(), &file_cfg);

    match cli.command {
        Command::Generate { instance, sensors, chs, bs, area, range, epsilon, out } => {
            let seed = instance.seed.or(file_cfg.seed).unwrap_or(0);
            let args = GenerateArgs {
                preset: instance.preset.or_else(|| file_cfg.preset.clone()),
                sensors,
                chs,
                bs,
                area,
                range,
                epsilon,
                seed,
                out,
            };
            commands::cmd_generate(&args, &out_dir)
        }
        Command::Cluster { instance, k, k_nn } => {
            let seed = instance.seed.or(file_cfg.seed).unwrap_or(0);
            let (graph, _) = commands::resolve_instance(
                instance.instance.as_deref(),
                instance.preset.as_deref(),
                seed,
                &file_cfg,
            )?;
            let k = k.or(file_cfg.k_clusters).unwrap_or(5);
            let k_nn = k_nn.or(file_cfg.k_nn).unwrap_or(10);
            commands::cmd_cluster(&graph, k, k_nn, seed, &out_dir)
        }
        Command::Solve { instance, flags } => {
            solve_like(instance, flags, &file_cfg, &out_dir, false)
        }
        Command::Compare { instance, flags } => {
            solve_like(instance, flags, &file_cfg, &out_dir, true)
        }
        Command::CompileReport { instance, k, k_nn, strategy, d, qpus, p, export_qubos } => {
            let seed = instance.seed.or(file_cfg.seed).unwrap_or(0);
            let (graph, _) = commands::resolve_instance(
                instance.instance.as_deref(),
                instance.preset.as_deref(),
                seed,
                &file_cfg,
            )?;
            let flags = PipelineFlags {
                k_clusters: k,
                k_nn,
                lambda_flow: None,
                lambda_energy: None,
                energy_penalty: None,
                methods: None,
                p: None,
                restarts: None,
                max_iters: None,
                shots: None,
                n_max_sim: None,
                seed: Some(seed),
                jobs: None,
            };
            let cfg = commands::pipeline_from(&file_cfg, flags)?;
            let strategy = file_cfg
                .hex
                .strategy
                .clone()
                .filter(|_| strategy == "all")
                .unwrap_or(strategy);
            let args = CompileArgs {
                strategy,
                d: d.or(file_cfg.hex.d),
                qpus: if qpus == 4 { file_cfg.hex.qpus.unwrap_or(qpus) } else { qpus },
                p,
            };
            commands::cmd_compile_report(&graph, &cfg, &args, &out_dir, export_qubos)
        }
        Command::ExportDot { instance, out } => {
            let seed = instance.seed.or(file_cfg.seed).unwrap_or(0);
            let (graph, _) = commands::resolve_instance(
                instance.instance.as_deref(),
                instance.preset.as_deref(),
                seed,
                &file_cfg,
            )?;
            commands::cmd_export_dot(&graph, out.as_deref(), &out_dir)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprintln!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
