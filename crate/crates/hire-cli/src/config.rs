//! Experiment configuration files, bundled schema presets and graph
//! resolution.
//!
//! A config names its data source either as a `dataset` path (a graph
//! JSON file) or a `schema` (inline synthetic-generator parameters or the
//! name of a bundled preset) — exactly one of the two. The graph seed is
//! the schema's own `seed` field, independent of the training seed, so
//! runs with different training seeds share one dataset.

use crate::CliError;
use hire::graph::{
    generate_synthetic, load_graph, split_target_nodes, HetGraph, SchemaNodeType, SchemaRelation,
    SyntheticSchema,
};
use hire::rng::substream;
use hire::train::TrainConfig;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SchemaField {
    /// Name of a bundled preset ("acm-like", "imdb-like", "dblp-like").
    Preset(String),
    Inline(Box<SyntheticSchema>),
}

#[derive(Debug, Clone, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub schema: Option<SchemaField>,
    /// Node/edge count multiplier applied to a schema source.
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Variant subset for the ablation command (defaults to all four).
    #[serde(default)]
    pub variants: Option<Vec<String>>,
    /// Seed list for the sweep command (defaults to [0]).
    #[serde(default)]
    pub sweep_seeds: Option<Vec<u64>>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))?;
        cfg.train.validate().map_err(CliError::from_hire)?;
        match (&cfg.dataset, &cfg.schema) {
            (Some(_), Some(_)) => {
                Err(CliError::input("config must set exactly one of 'dataset' and 'schema', found both"))
            }
            (None, None) => {
                Err(CliError::input("config must set exactly one of 'dataset' and 'schema', found neither"))
            }
            _ => Ok(cfg),
        }
    }

    /// Materialize the graph this config describes. Dataset files are
    /// loaded with their stored splits; schema sources generate and then
    /// split with `train_fraction`.
    pub fn resolve_graph(&self, scale_override: Option<f64>) -> Result<HetGraph, CliError> {
        match (&self.dataset, &self.schema) {
            (Some(path), None) => load_graph(path)
                .map_err(|e| CliError::input(format!("{}: {}", path.display(), e))),
            (None, Some(field)) => {
                let schema = resolve_schema(field)?;
                let scale = scale_override.or(self.scale);
                build_graph(&schema, scale, None, self.train.train_fraction)
            }
            _ => unreachable!("validated in load"),
        }
    }
}

/// Resolve a schema field to concrete generator parameters.
pub fn resolve_schema(field: &SchemaField) -> Result<SyntheticSchema, CliError> {
    match field {
        SchemaField::Inline(s) => Ok((**s).clone()),
        SchemaField::Preset(name) => preset(name),
    }
}

/// Generate and split a graph from a schema. `seed_override` replaces the
/// schema's own seed.
pub fn build_graph(
    schema: &SyntheticSchema,
    scale: Option<f64>,
    seed_override: Option<u64>,
    train_fraction: f64,
) -> Result<HetGraph, CliError> {
    let mut schema = schema.clone();
    if let Some(seed) = seed_override {
        schema.seed = seed;
    }
    if let Some(factor) = scale {
        schema = schema.scaled(factor).map_err(CliError::from_hire)?;
    }
    let g = generate_synthetic(&schema, &mut substream(schema.seed, "graph-gen"))
        .map_err(CliError::from_hire)?;
    split_target_nodes(&g, train_fraction, &mut substream(schema.seed, "graph-split"))
        .map_err(CliError::from_hire)
}

/// Load a schema from a JSON file.
pub fn load_schema(path: &Path) -> Result<SyntheticSchema, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))
}

/// Bundled preset names.
pub const PRESET_NAMES: [&str; 3] = ["acm-like", "imdb-like", "dblp-like"];

/// Bundled schema presets shaped like the common bibliographic and movie
/// benchmark graphs.
pub fn preset(name: &str) -> Result<SyntheticSchema, CliError> {
    let types = |spec: &[(&str, usize, usize)]| -> Vec<SchemaNodeType> {
        spec.iter()
            .map(|&(name, count, dim)| SchemaNodeType { name: name.into(), count, feature_dim: dim })
            .collect()
    };
    let rels = |spec: &[(&str, &str, &str, usize)]| -> Vec<SchemaRelation> {
        spec.iter()
            .map(|&(name, src, dst, edge_count)| SchemaRelation {
                name: name.into(),
                src: src.into(),
                dst: dst.into(),
                edge_count,
            })
            .collect()
    };
    match name {
        "acm-like" => Ok(SyntheticSchema {
            node_types: types(&[("paper", 4025, 32), ("author", 17351, 16), ("field", 72, 16)]),
            relations: rels(&[
                ("paper-author", "paper", "author", 13407),
                ("paper-field", "paper", "field", 4025),
            ]),
            target_type: "paper".into(),
            num_classes: 3,
            intra_class_affinity: 0.8,
            class_separation: 2.0,
            label_noise_rate: 0.15,
            seed: 0,
        }),
        "imdb-like" => Ok(SyntheticSchema {
            node_types: types(&[("movie", 4278, 32), ("director", 2081, 16), ("actor", 5257, 16)]),
            relations: rels(&[
                ("movie-director", "movie", "director", 4278),
                ("movie-actor", "movie", "actor", 12828),
            ]),
            target_type: "movie".into(),
            num_classes: 3,
            intra_class_affinity: 0.8,
            class_separation: 2.0,
            label_noise_rate: 0.15,
            seed: 0,
        }),
        "dblp-like" => Ok(SyntheticSchema {
            node_types: types(&[
                ("author", 4057, 32),
                ("paper", 14328, 16),
                ("term", 7723, 16),
                ("conf", 20, 16),
            ]),
            relations: rels(&[
                ("paper-author", "paper", "author", 19645),
                ("paper-term", "paper", "term", 85810),
                ("paper-conf", "paper", "conf", 14328),
            ]),
            target_type: "author".into(),
            num_classes: 4,
            intra_class_affinity: 0.8,
            class_separation: 2.0,
            label_noise_rate: 0.15,
            seed: 0,
        }),
        other => Err(CliError::input(format!(
            "unknown preset '{}' (available: {})",
            other,
            PRESET_NAMES.join(", ")
        ))),
    }
}
