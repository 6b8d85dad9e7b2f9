//! Command-line front end: graph generation, teacher pretraining, student
//! distillation, evaluation, hyperparameter sweeps and ablations.
//!
//! Exit codes: 0 success, 1 internal error, 2 input/validation error,
//! 3 checkpoint/graph compatibility error. All outputs are deterministic
//! functions of their inputs and seeds.

use clap::{Parser, Subcommand};
use hire::distill::{KernelMode, Variant};
use hire::eval::{evaluate_model, SplitKind};
use hire::graph::save_graph;
use hire::train::{
    distill_student, grid_sweep, pretrain_teacher, SweepAxis, SweepGrids, TrainConfig,
};
use hire_cli::checkpoint::{load_checkpoint, metrics_json, save_checkpoint, Checkpoint};
use hire_cli::config::{self, ExperimentConfig};
use hire_cli::reports::{ablation_csv, history_csv, sweep_csv, AblationRow};
use hire_cli::CliError;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "hire", version, about = "Heterogeneous graph distillation engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic heterogeneous graph file
    Gen {
        /// Bundled schema preset (acm-like, imdb-like, dblp-like)
        #[arg(long, conflicts_with = "schema")]
        preset: Option<String>,
        /// Path to a schema JSON file
        #[arg(long)]
        schema: Option<PathBuf>,
        /// Node/edge count multiplier
        #[arg(long)]
        scale: Option<f64>,
        /// Generation seed (overrides the schema's seed)
        #[arg(long)]
        seed: Option<u64>,
        /// Portion of the train pool kept as the train split
        #[arg(long, default_value_t = 1.0)]
        train_fraction: f64,
        /// Output graph file
        #[arg(long)]
        out: PathBuf,
    },
    /// Pretrain a teacher with cross-entropy
    TrainTeacher {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        train_fraction: Option<f64>,
        #[arg(long)]
        scale: Option<f64>,
        /// Output directory (defaults to the config's output_dir)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a student against a frozen teacher checkpoint
    Distill {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        teacher: PathBuf,
        /// Loss variant: ce, nkd, rkd or hire
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        /// RBF kernel bandwidth
        #[arg(long)]
        sigma: Option<f64>,
        /// Kernel mode: exact or taylor2
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        train_fraction: Option<f64>,
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on a graph split
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        /// Split to evaluate: train, val, test or all
        #[arg(long, default_value = "test")]
        split: String,
        #[arg(long, default_value = "metrics.json")]
        out: PathBuf,
    },
    /// Hyperparameter grid sweep over distillation runs
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        teacher: PathBuf,
        /// "full" or an axis slice: tau, alpha or beta
        #[arg(long, default_value = "full")]
        axes: String,
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the ce/nkd/rkd/hire variants over seeds 0..=4
    Ablate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        teacher: PathBuf,
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let code = match std::panic::catch_unwind(run) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {}", e.message);
            e.code
        }
        Err(_) => {
            eprintln!("error: internal failure");
            1
        }
    };
    std::process::exit(code);
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {}", dir.display(), e)))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))
}

struct DistillOverrides {
    variant: Option<String>,
    alpha: Option<f64>,
    beta: Option<f64>,
    tau: Option<f64>,
    sigma: Option<f64>,
    kernel: Option<String>,
    seed: Option<u64>,
    train_fraction: Option<f64>,
}

fn apply_overrides(train: &mut TrainConfig, ov: &DistillOverrides) -> Result<(), CliError> {
    if let Some(v) = &ov.variant {
        train.distill.variant = Variant::parse(v).map_err(CliError::from_hire)?;
    }
    if let Some(a) = ov.alpha {
        train.distill.alpha = a;
    }
    if let Some(b) = ov.beta {
        train.distill.beta = b;
    }
    if let Some(t) = ov.tau {
        train.distill.tau = t;
    }
    if let Some(s) = ov.sigma {
        train.distill.sigma_rbf = s;
    }
    if let Some(k) = &ov.kernel {
        train.distill.kernel_mode = KernelMode::parse(k).map_err(CliError::from_hire)?;
    }
    if let Some(s) = ov.seed {
        train.seed = s;
    }
    if let Some(f) = ov.train_fraction {
        train.train_fraction = f;
    }
    train.validate().map_err(CliError::from_hire)
}

fn run() -> Result<(), CliError> {
    match Cli::parse().command {
        Command::Gen { preset, schema, scale, seed, train_fraction, out } => {
            let schema = match (preset, schema) {
                (Some(name), None) => config::preset(&name)?,
                (None, Some(path)) => config::load_schema(&path)?,
                (None, None) => return Err(CliError::input("gen needs --preset or --schema")),
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            let g = config::build_graph(&schema, scale, seed, train_fraction)?;
            save_graph(&g, &out).map_err(|e| CliError::input(format!("{}: {}", out.display(), e)))?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::TrainTeacher { config, seed, train_fraction, scale, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.train.seed = s;
            }
            if let Some(f) = train_fraction {
                cfg.train.train_fraction = f;
            }
            cfg.train.validate().map_err(CliError::from_hire)?;
            let g = cfg.resolve_graph(scale)?;
            let (params, _history) = pretrain_teacher(&g, &cfg.train).map_err(CliError::from_hire)?;
            let report =
                evaluate_model(&g, &params, SplitKind::Test, cfg.train.seed).map_err(CliError::from_hire)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            ensure_dir(&dir)?;
            let ckpt = Checkpoint {
                kind: "teacher",
                graph: &g,
                params: &params,
                attention: None,
                train_config: &cfg.train,
                seed: cfg.train.seed,
                final_metrics: Some(&report),
            };
            save_checkpoint(&ckpt, &dir.join("teacher-checkpoint.json"))?;
            write_file(&dir.join("metrics.json"), &metrics_json(&report))?;
            println!(
                "teacher trained: test micro-F1 {:.4}, macro-F1 {:.4} -> {}",
                report.micro_f1,
                report.macro_f1,
                dir.display()
            );
            Ok(())
        }
        Command::Distill {
            config,
            teacher,
            variant,
            alpha,
            beta,
            tau,
            sigma,
            kernel,
            seed,
            train_fraction,
            scale,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            apply_overrides(
                &mut cfg.train,
                &DistillOverrides { variant, alpha, beta, tau, sigma, kernel, seed, train_fraction },
            )?;
            let g = cfg.resolve_graph(scale)?;
            let loaded = load_checkpoint(&teacher, &g)?;
            let (student, attention, history) =
                distill_student(&g, &loaded.params, &cfg.train).map_err(CliError::from_hire)?;
            let report =
                evaluate_model(&g, &student, SplitKind::Test, cfg.train.seed).map_err(CliError::from_hire)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            ensure_dir(&dir)?;
            let ckpt = Checkpoint {
                kind: "student",
                graph: &g,
                params: &student,
                attention: Some(&attention),
                train_config: &cfg.train,
                seed: cfg.train.seed,
                final_metrics: Some(&report),
            };
            save_checkpoint(&ckpt, &dir.join("student-checkpoint.json"))?;
            write_file(&dir.join("history.csv"), &history_csv(&g, &history))?;
            write_file(&dir.join("metrics.json"), &metrics_json(&report))?;
            println!(
                "student ({}) trained: test micro-F1 {:.4}, macro-F1 {:.4} -> {}",
                cfg.train.distill.variant,
                report.micro_f1,
                report.macro_f1,
                dir.display()
            );
            Ok(())
        }
        Command::Eval { checkpoint, graph, split, out } => {
            let g = hire::graph::load_graph(&graph)
                .map_err(|e| CliError::input(format!("{}: {}", graph.display(), e)))?;
            let loaded = load_checkpoint(&checkpoint, &g)?;
            let split = SplitKind::parse(&split).map_err(CliError::from_hire)?;
            let report =
                evaluate_model(&g, &loaded.params, split, loaded.seed).map_err(CliError::from_hire)?;
            write_file(&out, &metrics_json(&report))?;
            println!(
                "{}: micro-F1 {:.4}, macro-F1 {:.4}, NMI {:.4}, ARI {:.4}",
                report.split, report.micro_f1, report.macro_f1, report.nmi, report.ari
            );
            Ok(())
        }
        Command::Sweep { config, teacher, axes, scale, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let g = cfg.resolve_graph(scale)?;
            let loaded = load_checkpoint(&teacher, &g)?;
            let seeds = cfg.sweep_seeds.clone().unwrap_or_else(|| vec![0]);
            let grids = match axes.as_str() {
                "full" => SweepGrids::full(seeds),
                axis => SweepGrids::axis(
                    SweepAxis::parse(axis).map_err(CliError::from_hire)?,
                    &cfg.train.distill,
                    seeds,
                ),
            };
            let rows = grid_sweep(&g, &loaded.params, &cfg.train, &grids).map_err(CliError::from_hire)?;
            let path = out.unwrap_or_else(|| cfg.output_dir.join("sweep.csv"));
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    ensure_dir(dir)?;
                }
            }
            write_file(&path, &sweep_csv(&rows))?;
            println!("swept {} cells -> {}", rows.len(), path.display());
            Ok(())
        }
        Command::Ablate { config, teacher, scale, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let g = cfg.resolve_graph(scale)?;
            let loaded = load_checkpoint(&teacher, &g)?;
            let variants: Vec<Variant> = match &cfg.variants {
                None => Variant::ALL.to_vec(),
                Some(names) => names
                    .iter()
                    .map(|n| Variant::parse(n).map_err(CliError::from_hire))
                    .collect::<Result<_, _>>()?,
            };
            let mut rows = Vec::new();
            for &variant in &variants {
                for seed in ABLATION_SEEDS {
                    let mut train = cfg.train.clone();
                    train.seed = seed;
                    train.distill.variant = variant;
                    let (student, _, _) =
                        distill_student(&g, &loaded.params, &train).map_err(CliError::from_hire)?;
                    let (micro, macro_) =
                        hire::eval::classification_scores(&g, &student, SplitKind::Test)
                            .map_err(CliError::from_hire)?;
                    rows.push(AblationRow {
                        variant: variant.as_str().to_string(),
                        seed,
                        test_micro_f1: micro,
                        test_macro_f1: macro_,
                    });
                }
            }
            let path = out.unwrap_or_else(|| cfg.output_dir.join("ablation.csv"));
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    ensure_dir(dir)?;
                }
            }
            write_file(&path, &ablation_csv(&rows))?;
            println!("ablation over {} variants x {} seeds -> {}", variants.len(), ABLATION_SEEDS.len(), path.display());
            Ok(())
        }
    }
}

/// Seed set for the ablation command.
const ABLATION_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
