//! Checkpoint persistence.
//!
//! Checkpoints are JSON documents with a fixed key order and floats at 17
//! significant digits, so a save → load → save cycle is byte-identical.
//! Every checkpoint carries a schema fingerprint (SHA-256 over the
//! graph's type names, counts, relation triples and class count); loading
//! a checkpoint onto a graph with a different fingerprint is a
//! compatibility error.

use crate::CliError;
use hire::distill::AttentionParams;
use hire::eval::MetricsReport;
use hire::graph::HetGraph;
use hire::jsonio;
use hire::rgcn::{ModelParams, RgcnLayerParams};
use hire::tensor::Tensor;
use hire::train::TrainConfig;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::path::Path;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// SHA-256 fingerprint of a graph's schema.
pub fn schema_fingerprint(g: &HetGraph) -> String {
    let mut hasher = Sha256::new();
    hasher.update(g.schema_signature().as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{:02x}", b)).collect()
}

/// A trained model ready to persist.
pub struct Checkpoint<'a> {
    pub kind: &'a str,
    pub graph: &'a HetGraph,
    pub params: &'a ModelParams,
    pub attention: Option<&'a AttentionParams>,
    pub train_config: &'a TrainConfig,
    pub seed: u64,
    pub final_metrics: Option<&'a MetricsReport>,
}

fn push_tensor(out: &mut String, t: &Tensor) {
    out.push_str(&format!("{{\"rows\":{},\"cols\":{},\"data\":", t.rows(), t.cols()));
    jsonio::push_f64_array(out, t.data());
    out.push('}');
}

fn push_named_tensors(out: &mut String, names: &[&str], tensors: &[Tensor]) {
    out.push('[');
    for (i, (name, t)) in names.iter().zip(tensors).enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"name\":");
        jsonio::push_str(out, name);
        out.push_str(&format!(",\"rows\":{},\"cols\":{},\"data\":", t.rows(), t.cols()));
        jsonio::push_f64_array(out, t.data());
        out.push('}');
    }
    out.push(']');
}

fn push_layer(out: &mut String, g: &HetGraph, layer: &RgcnLayerParams) {
    let rel_names: Vec<&str> = g.relations().iter().map(|r| r.name.as_str()).collect();
    let type_names: Vec<&str> = g.node_types().iter().map(|t| t.name.as_str()).collect();
    out.push_str("{\"relation_weights\":");
    push_named_tensors(out, &rel_names, &layer.rel_weights);
    out.push_str(",\"self_weights\":");
    push_named_tensors(out, &type_names, &layer.self_weights);
    out.push('}');
}

fn push_train_config(out: &mut String, cfg: &TrainConfig) {
    out.push_str(&format!(
        "{{\"learning_rate\":{},\"weight_decay\":{},\"dropout\":{},\"epochs\":{},\"hidden_dim\":{},\"attention_dim\":{},\"seed\":{},\"train_fraction\":{},\"select_last_epoch\":{},\"distill\":{{\"alpha\":{},\"beta\":{},\"tau\":{},\"sigma_rbf\":{},\"kernel_mode\":\"{}\",\"variant\":\"{}\"}}}}",
        jsonio::fmt_f64(cfg.learning_rate),
        jsonio::fmt_f64(cfg.weight_decay),
        jsonio::fmt_f64(cfg.dropout),
        cfg.epochs,
        cfg.hidden_dim,
        cfg.attention_dim,
        cfg.seed,
        jsonio::fmt_f64(cfg.train_fraction),
        cfg.select_last_epoch,
        jsonio::fmt_f64(cfg.distill.alpha),
        jsonio::fmt_f64(cfg.distill.beta),
        jsonio::fmt_f64(cfg.distill.tau),
        jsonio::fmt_f64(cfg.distill.sigma_rbf),
        cfg.distill.kernel_mode.as_str(),
        cfg.distill.variant.as_str(),
    ));
}

/// Metrics JSON body (shared by metrics files and checkpoints).
pub fn metrics_json(report: &MetricsReport) -> String {
    let mut out = String::new();
    out.push_str("{\"split\":");
    jsonio::push_str(&mut out, &report.split);
    out.push_str(&format!(
        ",\"seed\":{},\"micro_f1\":{},\"macro_f1\":{},\"nmi\":{},\"ari\":{},\"per_class\":[",
        report.seed,
        jsonio::fmt_f64(report.micro_f1),
        jsonio::fmt_f64(report.macro_f1),
        jsonio::fmt_f64(report.nmi),
        jsonio::fmt_f64(report.ari),
    ));
    for (i, c) in report.per_class.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!(
            "{{\"precision\":{},\"recall\":{},\"f1\":{}}}",
            jsonio::fmt_f64(c.precision),
            jsonio::fmt_f64(c.recall),
            jsonio::fmt_f64(c.f1),
        ));
    }
    out.push_str("]}");
    out
}

/// Serialize a checkpoint to its canonical JSON text.
pub fn serialize_checkpoint(ckpt: &Checkpoint) -> String {
    let mut out = String::new();
    out.push_str(&format!("{{\"format_version\":{},\"kind\":", CHECKPOINT_FORMAT_VERSION));
    jsonio::push_str(&mut out, ckpt.kind);
    out.push_str(",\"schema_fingerprint\":");
    jsonio::push_str(&mut out, &schema_fingerprint(ckpt.graph));
    out.push_str(&format!(",\"seed\":{},\"train_config\":", ckpt.seed));
    push_train_config(&mut out, ckpt.train_config);
    out.push_str(",\"params\":{\"layer1\":");
    push_layer(&mut out, ckpt.graph, &ckpt.params.layer1);
    out.push_str(",\"layer2\":");
    push_layer(&mut out, ckpt.graph, &ckpt.params.layer2);
    out.push_str(",\"classifier_weight\":");
    push_tensor(&mut out, &ckpt.params.classifier_weight);
    out.push_str(",\"classifier_bias\":");
    push_tensor(&mut out, &ckpt.params.classifier_bias);
    out.push_str("},\"attention\":");
    match ckpt.attention {
        None => out.push_str("null"),
        Some(att) => {
            out.push_str("{\"weight\":");
            push_tensor(&mut out, &att.weight);
            out.push_str(",\"bias\":");
            push_tensor(&mut out, &att.bias);
            out.push_str(",\"query\":");
            push_tensor(&mut out, &att.query);
            out.push('}');
        }
    }
    out.push_str(",\"final_metrics\":");
    match ckpt.final_metrics {
        None => out.push_str("null"),
        Some(report) => out.push_str(&metrics_json(report)),
    }
    out.push('}');
    out
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, serialize_checkpoint(ckpt))
        .map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))
}

// ── Loading ──────────────────────────────────────────────────────────

#[derive(Deserialize)]
struct TensorFile {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TensorFile {
    fn into_tensor(self) -> Result<Tensor, CliError> {
        Tensor::new(self.rows, self.cols, self.data).map_err(CliError::from_hire)
    }
}

#[derive(Deserialize)]
struct NamedTensorFile {
    name: String,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct LayerFile {
    relation_weights: Vec<NamedTensorFile>,
    self_weights: Vec<NamedTensorFile>,
}

#[derive(Deserialize)]
struct ParamsFile {
    layer1: LayerFile,
    layer2: LayerFile,
    classifier_weight: TensorFile,
    classifier_bias: TensorFile,
}

#[derive(Deserialize)]
struct AttentionFile {
    weight: TensorFile,
    bias: TensorFile,
    query: TensorFile,
}

#[derive(Deserialize)]
struct CheckpointFile {
    format_version: u32,
    kind: String,
    schema_fingerprint: String,
    seed: u64,
    train_config: TrainConfig,
    params: ParamsFile,
    attention: Option<AttentionFile>,
    #[allow(dead_code)]
    #[serde(default)]
    final_metrics: Option<serde_json::Value>,
}

/// A checkpoint loaded and validated against a graph.
pub struct LoadedCheckpoint {
    pub kind: String,
    pub seed: u64,
    pub train_config: TrainConfig,
    pub params: ModelParams,
    pub attention: Option<AttentionParams>,
}

fn ordered_tensors(
    files: Vec<NamedTensorFile>,
    expected_names: &[&str],
    what: &str,
) -> Result<Vec<Tensor>, CliError> {
    let mut out = Vec::with_capacity(expected_names.len());
    for &name in expected_names {
        let file = files
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| CliError::compat(format!("checkpoint lacks {} weight for '{}'", what, name)))?;
        out.push(
            Tensor::new(file.rows, file.cols, file.data.clone()).map_err(CliError::from_hire)?,
        );
    }
    Ok(out)
}

/// Load a checkpoint and verify it belongs to `graph`'s schema.
pub fn load_checkpoint(path: &Path, graph: &HetGraph) -> Result<LoadedCheckpoint, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))?;
    let file: CheckpointFile = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))?;
    if file.format_version != CHECKPOINT_FORMAT_VERSION {
        return Err(CliError::compat(format!(
            "checkpoint format version {} is not supported (expected {})",
            file.format_version, CHECKPOINT_FORMAT_VERSION
        )));
    }
    let expected = schema_fingerprint(graph);
    if file.schema_fingerprint != expected {
        return Err(CliError::compat(format!(
            "schema mismatch: checkpoint fingerprint {} does not match graph fingerprint {}",
            file.schema_fingerprint, expected
        )));
    }
    let rel_names: Vec<&str> = graph.relations().iter().map(|r| r.name.as_str()).collect();
    let type_names: Vec<&str> = graph.node_types().iter().map(|t| t.name.as_str()).collect();
    let layer = |f: LayerFile, activation: bool| -> Result<RgcnLayerParams, CliError> {
        Ok(RgcnLayerParams {
            rel_weights: ordered_tensors(f.relation_weights, &rel_names, "relation")?,
            self_weights: ordered_tensors(f.self_weights, &type_names, "self-loop")?,
            activation,
        })
    };
    let params = ModelParams {
        layer1: layer(file.params.layer1, true)?,
        layer2: layer(file.params.layer2, false)?,
        classifier_weight: file.params.classifier_weight.into_tensor()?,
        classifier_bias: file.params.classifier_bias.into_tensor()?,
    };
    let attention = match file.attention {
        None => None,
        Some(a) => Some(AttentionParams {
            weight: a.weight.into_tensor()?,
            bias: a.bias.into_tensor()?,
            query: a.query.into_tensor()?,
        }),
    };
    Ok(LoadedCheckpoint {
        kind: file.kind,
        seed: file.seed,
        train_config: file.train_config,
        params,
        attention,
    })
}
