//! Two-layer relational graph convolution encoder.
//!
//! Each layer computes, for every node `u` of every type,
//!
//! ```text
//! h'_u = σ( Σ_r  mean_{v ∈ N_u^r} W_r h_v  +  W_0 h_u )
//! ```
//!
//! where the mean runs over incoming neighbors under relation `r` (zero
//! when there are none, so isolated nodes keep their self-loop term) and
//! `W_0` is a per-type self-loop weight. Layer 1 applies a relu; layer 2
//! is linear so its embeddings feed both the classifier and the
//! relation-level distillation kernel unsquashed. The same encoder serves
//! as teacher and student.

use crate::error::{Error, Result};
use crate::graph::HetGraph;
use crate::tensor::{glorot_init, Tape, Tensor, Var};
use rand::Rng;

/// Default hidden width of both convolution layers.
pub const DEFAULT_HIDDEN: usize = 16;

/// Weights of one convolution layer: one matrix per graph relation
/// (aligned with the graph's relation order) and one self-loop matrix per
/// node type.
#[derive(Debug, Clone, PartialEq)]
pub struct RgcnLayerParams {
    pub rel_weights: Vec<Tensor>,
    pub self_weights: Vec<Tensor>,
    pub activation: bool,
}

/// Full model: two convolution layers plus a linear classifier head on
/// the target type.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub layer1: RgcnLayerParams,
    pub layer2: RgcnLayerParams,
    pub classifier_weight: Tensor,
    pub classifier_bias: Tensor,
}

impl ModelParams {
    /// Glorot-initialized parameters sized for `g` with the given hidden
    /// width. Draw order is fixed: layer-1 relation weights in graph
    /// order, layer-1 self-loops in type order, the same for layer 2,
    /// then the classifier.
    pub fn init<R: Rng>(g: &HetGraph, hidden: usize, rng: &mut R) -> Result<Self> {
        let mut l1_rel = Vec::with_capacity(g.relations().len());
        for r in g.relations() {
            let d_src = g.node_types()[r.src_type].feature_dim;
            l1_rel.push(glorot_init(d_src, hidden, rng)?);
        }
        let mut l1_self = Vec::with_capacity(g.num_node_types());
        for t in g.node_types() {
            l1_self.push(glorot_init(t.feature_dim, hidden, rng)?);
        }
        let mut l2_rel = Vec::with_capacity(g.relations().len());
        for _ in g.relations() {
            l2_rel.push(glorot_init(hidden, hidden, rng)?);
        }
        let mut l2_self = Vec::with_capacity(g.num_node_types());
        for _ in g.node_types() {
            l2_self.push(glorot_init(hidden, hidden, rng)?);
        }
        Ok(ModelParams {
            layer1: RgcnLayerParams { rel_weights: l1_rel, self_weights: l1_self, activation: true },
            layer2: RgcnLayerParams { rel_weights: l2_rel, self_weights: l2_self, activation: false },
            classifier_weight: glorot_init(hidden, g.num_classes(), rng)?,
            classifier_bias: Tensor::zeros(1, g.num_classes()),
        })
    }

    /// Hidden width (rows of the classifier weight).
    pub fn hidden_dim(&self) -> usize {
        self.classifier_weight.rows()
    }

    /// All parameter tensors in a fixed order (the optimizer's order).
    pub fn flat(&self) -> Vec<&Tensor> {
        let mut v: Vec<&Tensor> = Vec::new();
        v.extend(self.layer1.rel_weights.iter());
        v.extend(self.layer1.self_weights.iter());
        v.extend(self.layer2.rel_weights.iter());
        v.extend(self.layer2.self_weights.iter());
        v.push(&self.classifier_weight);
        v.push(&self.classifier_bias);
        v
    }

    pub fn flat_mut(&mut self) -> Vec<&mut Tensor> {
        let mut v: Vec<&mut Tensor> = Vec::new();
        v.extend(self.layer1.rel_weights.iter_mut());
        v.extend(self.layer1.self_weights.iter_mut());
        v.extend(self.layer2.rel_weights.iter_mut());
        v.extend(self.layer2.self_weights.iter_mut());
        v.push(&mut self.classifier_weight);
        v.push(&mut self.classifier_bias);
        v
    }
}

/// Tape handles for one layer's weights.
#[derive(Debug, Clone)]
pub struct LayerVars {
    pub rel_weights: Vec<Var>,
    pub self_weights: Vec<Var>,
    pub activation: bool,
}

/// Tape handles for the full model, mirroring [`ModelParams::flat`] order.
#[derive(Debug, Clone)]
pub struct ModelVars {
    pub layer1: LayerVars,
    pub layer2: LayerVars,
    pub classifier_weight: Var,
    pub classifier_bias: Var,
}

impl ModelVars {
    /// Put every parameter on the tape. Trainable registration makes the
    /// leaves gradient-bearing; teacher parameters register as constants.
    pub fn register(tape: &mut Tape, params: &ModelParams, trainable: bool) -> ModelVars {
        let reg_layer = |tape: &mut Tape, layer: &RgcnLayerParams| LayerVars {
            rel_weights: layer.rel_weights.iter().map(|w| tape.leaf(w.clone(), trainable)).collect(),
            self_weights: layer.self_weights.iter().map(|w| tape.leaf(w.clone(), trainable)).collect(),
            activation: layer.activation,
        };
        let layer1 = reg_layer(tape, &params.layer1);
        let layer2 = reg_layer(tape, &params.layer2);
        ModelVars {
            layer1,
            layer2,
            classifier_weight: tape.leaf(params.classifier_weight.clone(), trainable),
            classifier_bias: tape.leaf(params.classifier_bias.clone(), trainable),
        }
    }

    /// Leaves in [`ModelParams::flat`] order.
    pub fn flat(&self) -> Vec<Var> {
        let mut v = Vec::new();
        v.extend(self.layer1.rel_weights.iter().copied());
        v.extend(self.layer1.self_weights.iter().copied());
        v.extend(self.layer2.rel_weights.iter().copied());
        v.extend(self.layer2.self_weights.iter().copied());
        v.push(self.classifier_weight);
        v.push(self.classifier_bias);
        v
    }
}

/// Forward mode: training applies inverted dropout between the layers,
/// evaluation never touches the rng.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Result of a forward pass: layer-2 embeddings per type and the
/// classifier logits for the target type.
#[derive(Debug, Clone)]
pub struct ForwardOutput {
    pub hidden_by_type: Vec<Var>,
    pub logits: Var,
}

/// One relational convolution over all types.
pub fn rgcn_layer(
    tape: &mut Tape,
    g: &HetGraph,
    h_by_type: &[Var],
    layer: &LayerVars,
) -> Result<Vec<Var>> {
    if h_by_type.len() != g.num_node_types() {
        return Err(Error::Config(format!(
            "{} input embeddings for {} node types",
            h_by_type.len(),
            g.num_node_types()
        )));
    }
    if layer.rel_weights.len() != g.relations().len() {
        return Err(Error::Config(format!(
            "layer has {} relation weights but the graph has {} relations",
            layer.rel_weights.len(),
            g.relations().len()
        )));
    }
    if layer.self_weights.len() != g.num_node_types() {
        return Err(Error::Config(format!(
            "layer has {} self-loop weights but the graph has {} node types",
            layer.self_weights.len(),
            g.num_node_types()
        )));
    }
    let mut out = Vec::with_capacity(g.num_node_types());
    for t in 0..g.num_node_types() {
        // self-loop term first, then relation terms in graph order
        let mut acc = tape.matmul(h_by_type[t], layer.self_weights[t])?;
        for (ri, rel) in g.relations().iter().enumerate() {
            if rel.dst_type != t {
                continue;
            }
            let agg = tape.neighbor_mean(h_by_type[rel.src_type], &rel.edges, g.node_count(t))?;
            let msg = tape.matmul(agg, layer.rel_weights[ri])?;
            acc = tape.add(acc, msg)?;
        }
        out.push(if layer.activation { tape.relu(acc) } else { acc });
    }
    Ok(out)
}

/// Full two-layer forward pass. In `Train` mode an inverted dropout mask
/// (scaled by `1/(1-rate)`) is applied between the layers, consuming the
/// rng per type in order; `Eval` mode ignores the rng entirely. With
/// `dropout_rate == 0` the two modes produce identical tapes.
pub fn forward<R: Rng>(
    tape: &mut Tape,
    g: &HetGraph,
    vars: &ModelVars,
    dropout_rate: f64,
    rng: &mut R,
    mode: Mode,
) -> Result<ForwardOutput> {
    if !(0.0..1.0).contains(&dropout_rate) {
        return Err(Error::Config(format!("dropout_rate must lie in [0,1), got {}", dropout_rate)));
    }
    let h0: Vec<Var> = (0..g.num_node_types()).map(|t| tape.constant(g.features(t).clone())).collect();
    let mut h1 = rgcn_layer(tape, g, &h0, &vars.layer1)?;
    if mode == Mode::Train && dropout_rate > 0.0 {
        let keep = 1.0 - dropout_rate;
        for h in h1.iter_mut() {
            let (r, c) = {
                let t = tape.value(*h);
                (t.rows(), t.cols())
            };
            let mask_data: Vec<f64> =
                (0..r * c).map(|_| if rng.gen_bool(keep) { 1.0 / keep } else { 0.0 }).collect();
            let mask = tape.constant(Tensor::new(r, c, mask_data)?);
            *h = tape.mul(*h, mask)?;
        }
    }
    let h2 = rgcn_layer(tape, g, &h1, &vars.layer2)?;
    let target = g.target_type();
    let scores = tape.matmul(h2[target], vars.classifier_weight)?;
    let ones = tape.constant(Tensor::filled(g.node_count(target), 1, 1.0));
    let bias_rows = tape.matmul(ones, vars.classifier_bias)?;
    let logits = tape.add(scores, bias_rows)?;
    Ok(ForwardOutput { hidden_by_type: h2, logits })
}

/// Forward pass in eval mode (deterministic, no dropout).
pub fn forward_eval(tape: &mut Tape, g: &HetGraph, vars: &ModelVars) -> Result<ForwardOutput> {
    let mut unused = crate::rng::substream(0, "eval-forward-unused");
    forward(tape, g, vars, 0.0, &mut unused, Mode::Eval)
}

/// Evaluate the model on plain parameters, returning concrete per-type
/// hidden embeddings and target logits.
pub fn eval_outputs(g: &HetGraph, params: &ModelParams) -> Result<(Vec<Tensor>, Tensor)> {
    let mut tape = Tape::new();
    let vars = ModelVars::register(&mut tape, params, false);
    let out = forward_eval(&mut tape, g, &vars)?;
    let hidden = out.hidden_by_type.iter().map(|&v| tape.value(v).clone()).collect();
    let logits = tape.value(out.logits).clone();
    Ok((hidden, logits))
}

/// Row-wise argmax; ties break toward the lowest class index.
pub fn predict(logits: &Tensor) -> Vec<usize> {
    let (n, c) = logits.shape();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let row = logits.row(i);
        let mut best = 0usize;
        for j in 1..c {
            if row[j] > row[best] {
                best = j;
            }
        }
        out.push(best);
    }
    out
}
