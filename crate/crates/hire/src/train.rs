//! Training loops: teacher pretraining, student distillation and
//! hyperparameter sweeps.
//!
//! Both loops are full-batch: every epoch builds one tape, runs one
//! backward pass and applies one Adam step. A run's randomness comes from
//! one master seed split into named substreams ("model-init",
//! "attention-init", "dropout"), so a cross-entropy-variant student run
//! consumes exactly the streams a teacher pretraining run does and
//! reproduces it bit for bit. Parameters from the epoch with the best
//! validation micro-F1 are returned (ties to the earliest epoch).

use crate::distill::{
    hire_loss, metacorr, type_attention_value, type_mean_embeddings_value, AttentionParams,
    AttentionVars, DistillConfig, StudentForward, TeacherForward,
};
use crate::error::{Error, Result};
use crate::eval::{classification_scores, SplitKind};
use crate::graph::HetGraph;
use crate::rgcn::{self, eval_outputs, Mode, ModelParams, ModelVars, DEFAULT_HIDDEN};
use crate::rng::substream;
use crate::tensor::{Tape, Tensor};
use serde::Deserialize;

/// Hyperparameters of one training run.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub dropout: f64,
    pub epochs: usize,
    pub hidden_dim: usize,
    pub attention_dim: usize,
    pub seed: u64,
    /// Portion of the train pool actually used for supervision.
    pub train_fraction: f64,
    pub distill: DistillConfig,
    /// Return the last epoch's parameters instead of the best-validation
    /// checkpoint.
    pub select_last_epoch: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            weight_decay: 5e-4,
            dropout: 0.0,
            epochs: 200,
            hidden_dim: DEFAULT_HIDDEN,
            attention_dim: DEFAULT_HIDDEN,
            seed: 0,
            train_fraction: 1.0,
            distill: DistillConfig::default(),
            select_last_epoch: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config(format!("learning_rate must be > 0, got {}", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout must lie in [0,1), got {}", self.dropout)));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::Config(format!("weight_decay must be >= 0, got {}", self.weight_decay)));
        }
        if self.hidden_dim == 0 || self.attention_dim == 0 {
            return Err(Error::Config("hidden_dim and attention_dim must be positive".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must lie in (0,1], got {}",
                self.train_fraction
            )));
        }
        self.distill.validate()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Adam moment buffers. β1 = 0.9, β2 = 0.999, ε = 1e-8.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    step: u64,
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

impl AdamState {
    /// Zero moments shaped like `params`.
    pub fn new(params: &[&Tensor]) -> Self {
        AdamState {
            m: params.iter().map(|p| Tensor::zeros(p.rows(), p.cols())).collect(),
            v: params.iter().map(|p| Tensor::zeros(p.rows(), p.cols())).collect(),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One in-place Adam update. Weight decay enters the gradient
/// (`g += wd·θ`) before the moment update; moments are bias-corrected.
pub fn adam_step(
    params: &mut [&mut Tensor],
    grads: &[Tensor],
    state: &mut AdamState,
    lr: f64,
    weight_decay: f64,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::Shape {
            op: "adam_step",
            detail: format!(
                "{} params, {} grads, {} moment buffers",
                params.len(),
                grads.len(),
                state.m.len()
            ),
        });
    }
    for (i, p) in params.iter().enumerate() {
        if p.shape() != grads[i].shape() || p.shape() != state.m[i].shape() {
            return Err(Error::Shape {
                op: "adam_step",
                detail: format!("parameter {} shape mismatch", i),
            });
        }
    }
    state.step += 1;
    let bc1 = 1.0 - ADAM_BETA1.powi(state.step as i32);
    let bc2 = 1.0 - ADAM_BETA2.powi(state.step as i32);
    for (i, p) in params.iter_mut().enumerate() {
        let m = state.m[i].data_mut();
        let v = state.v[i].data_mut();
        let g = grads[i].data();
        for (e, theta) in p.data_mut().iter_mut().enumerate() {
            let grad = g[e] + weight_decay * *theta;
            m[e] = ADAM_BETA1 * m[e] + (1.0 - ADAM_BETA1) * grad;
            v[e] = ADAM_BETA2 * v[e] + (1.0 - ADAM_BETA2) * grad * grad;
            let m_hat = m[e] / bc1;
            let v_hat = v[e] / bc2;
            *theta -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }
    Ok(())
}

/// Per-epoch log record.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub total: f64,
    pub ce: f64,
    pub kd: f64,
    pub rkd: f64,
    /// Student type-attention coefficients (empty for teacher runs).
    pub attention: Vec<f64>,
    /// Diagnostic: the same attention layer applied to the frozen teacher
    /// means. Logged only; enters no loss.
    pub teacher_attention: Vec<f64>,
    pub val_micro_f1: f64,
}

/// Full training trajectory plus the selected checkpoint epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct RunHistory {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
}

fn gather_rows(t: &Tensor, indices: &[usize]) -> Result<Tensor> {
    let mut rows = Vec::with_capacity(indices.len());
    for &i in indices {
        rows.push(t.row(i).to_vec());
    }
    Tensor::from_rows(&rows)
}

fn grads_for(tape: &Tape, vars: &[crate::tensor::Var]) -> Vec<Tensor> {
    vars.iter()
        .map(|&v| {
            tape.grad(v).cloned().unwrap_or_else(|| {
                let t = tape.value(v);
                Tensor::zeros(t.rows(), t.cols())
            })
        })
        .collect()
}

struct Selection<T> {
    best: T,
    best_epoch: usize,
    best_val: f64,
}

impl<T: Clone> Selection<T> {
    fn new(initial: T) -> Self {
        Selection { best: initial, best_epoch: 0, best_val: f64::NEG_INFINITY }
    }

    fn observe(&mut self, epoch: usize, val: f64, current: &T) {
        if val > self.best_val {
            self.best_val = val;
            self.best_epoch = epoch;
            self.best = current.clone();
        }
    }
}

/// Pretrain a teacher with plain cross-entropy on the train split.
/// Returns the best-validation parameters and the per-epoch history.
pub fn pretrain_teacher(g: &HetGraph, cfg: &TrainConfig) -> Result<(ModelParams, RunHistory)> {
    cfg.validate()?;
    let train = &g.splits().train;
    if train.is_empty() {
        return Err(Error::Degenerate("train split is empty".into()));
    }
    let labels: Vec<usize> = train.iter().map(|&i| g.labels()[i]).collect();
    let val_available = !g.splits().val.is_empty();

    let mut params = ModelParams::init(g, cfg.hidden_dim, &mut substream(cfg.seed, "model-init"))?;
    let mut dropout_rng = substream(cfg.seed, "dropout");
    let mut adam = AdamState::new(&params.flat());
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut selection = Selection::new(params.clone());

    for epoch in 0..cfg.epochs {
        let mut tape = Tape::new();
        let vars = ModelVars::register(&mut tape, &params, true);
        let out = rgcn::forward(&mut tape, g, &vars, cfg.dropout, &mut dropout_rng, Mode::Train)?;
        let logits_train = tape.select_rows(out.logits, train)?;
        let loss = crate::distill::cross_entropy(&mut tape, logits_train, &labels)?;
        let loss_value = tape.value(loss).scalar_value()?;
        tape.backward(loss)?;
        let grads = grads_for(&tape, &vars.flat());
        adam_step(&mut params.flat_mut(), &grads, &mut adam, cfg.learning_rate, cfg.weight_decay)?;

        let val_micro_f1 =
            if val_available { classification_scores(g, &params, SplitKind::Val)?.0 } else { 0.0 };
        history.push(EpochRecord {
            total: loss_value,
            ce: loss_value,
            kd: 0.0,
            rkd: 0.0,
            attention: Vec::new(),
            teacher_attention: Vec::new(),
            val_micro_f1,
        });
        selection.observe(epoch, val_micro_f1, &params);
    }

    let (best, best_epoch) = if cfg.select_last_epoch || !val_available {
        (params, cfg.epochs - 1)
    } else {
        (selection.best, selection.best_epoch)
    };
    Ok((best, RunHistory { epochs: history, best_epoch }))
}

/// Distill a student against a frozen teacher, starting from a random
/// initialization.
pub fn distill_student(
    g: &HetGraph,
    teacher: &ModelParams,
    cfg: &TrainConfig,
) -> Result<(ModelParams, AttentionParams, RunHistory)> {
    distill_student_with_init(g, teacher, cfg, None)
}

/// Distillation with an explicit student initialization (used to verify
/// the zero-gap identities; `None` draws from the "model-init" stream).
pub fn distill_student_with_init(
    g: &HetGraph,
    teacher: &ModelParams,
    cfg: &TrainConfig,
    init: Option<ModelParams>,
) -> Result<(ModelParams, AttentionParams, RunHistory)> {
    cfg.validate()?;
    let train = &g.splits().train;
    if train.is_empty() {
        return Err(Error::Degenerate("train split is empty".into()));
    }
    let labels: Vec<usize> = train.iter().map(|&i| g.labels()[i]).collect();
    let val_available = !g.splits().val.is_empty();
    let dcfg = &cfg.distill;
    let train_attention = dcfg.effective_beta() > 0.0;

    // teacher outputs are computed once in eval mode and frozen
    let (t_hidden, t_logits) = eval_outputs(g, teacher)?;
    let t_logits_train = gather_rows(&t_logits, train)?;
    let t_means = type_mean_embeddings_value(&t_hidden)?;
    let t_corr = metacorr(&t_means, dcfg.sigma_rbf, dcfg.kernel_mode)?;

    let mut params = match init {
        Some(p) => p,
        None => ModelParams::init(g, cfg.hidden_dim, &mut substream(cfg.seed, "model-init"))?,
    };
    let mut attention =
        AttentionParams::init(cfg.hidden_dim, cfg.attention_dim, &mut substream(cfg.seed, "attention-init"))?;
    let mut dropout_rng = substream(cfg.seed, "dropout");

    let mut adam = {
        let mut refs: Vec<&Tensor> = params.flat();
        if train_attention {
            refs.extend(attention.flat());
        }
        AdamState::new(&refs)
    };

    let mut history = Vec::with_capacity(cfg.epochs);
    let mut selection = Selection::new((params.clone(), attention.clone()));

    for epoch in 0..cfg.epochs {
        let mut tape = Tape::new();
        let vars = ModelVars::register(&mut tape, &params, true);
        let att_vars = AttentionVars::register(&mut tape, &attention, train_attention);
        let out = rgcn::forward(&mut tape, g, &vars, cfg.dropout, &mut dropout_rng, Mode::Train)?;
        let logits_train = tape.select_rows(out.logits, train)?;
        let (total, parts) = hire_loss(
            &mut tape,
            &StudentForward { logits_train, hidden_by_type: &out.hidden_by_type },
            &TeacherForward { logits_train: &t_logits_train, metacorr: &t_corr },
            &labels,
            &att_vars,
            dcfg,
        )?;

        // pre-update attention coefficients over the student and teacher
        // type means, for the trajectory log
        let s_hidden: Vec<Tensor> =
            out.hidden_by_type.iter().map(|&h| tape.value(h).clone()).collect();
        let s_means = type_mean_embeddings_value(&s_hidden)?;
        let att_student = type_attention_value(&s_means, &attention)?;
        let att_teacher = type_attention_value(&t_means, &attention)?;

        tape.backward(total)?;
        let mut leaf_vars = vars.flat();
        if train_attention {
            leaf_vars.extend(att_vars.flat());
        }
        let grads = grads_for(&tape, &leaf_vars);
        {
            let mut refs: Vec<&mut Tensor> = params.flat_mut();
            if train_attention {
                refs.extend(attention.flat_mut());
            }
            adam_step(&mut refs, &grads, &mut adam, cfg.learning_rate, cfg.weight_decay)?;
        }

        let val_micro_f1 =
            if val_available { classification_scores(g, &params, SplitKind::Val)?.0 } else { 0.0 };
        history.push(EpochRecord {
            total: parts.total,
            ce: parts.ce,
            kd: parts.kd,
            rkd: parts.rkd,
            attention: att_student,
            teacher_attention: att_teacher,
            val_micro_f1,
        });
        selection.observe(epoch, val_micro_f1, &(params.clone(), attention.clone()));
    }

    let ((best_params, best_att), best_epoch) = if cfg.select_last_epoch || !val_available {
        ((params, attention), cfg.epochs - 1)
    } else {
        (selection.best, selection.best_epoch)
    };
    Ok((best_params, best_att, RunHistory { epochs: history, best_epoch }))
}

/// Axis grids for the hyperparameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrids {
    pub taus: Vec<f64>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl SweepGrids {
    /// The full search grids: τ ∈ {1..10}, α ∈ {0.0, 0.1, …, 1.0},
    /// β ∈ {0.01, 0.1, 1, 10, 100}.
    pub fn full(seeds: Vec<u64>) -> Self {
        SweepGrids {
            taus: (1..=10).map(|t| t as f64).collect(),
            alphas: (0..=10).map(|a| a as f64 / 10.0).collect(),
            betas: vec![0.01, 0.1, 1.0, 10.0, 100.0],
            seeds,
        }
    }

    /// A single-axis slice: vary one hyperparameter over its full grid
    /// with the other two pinned at `base`.
    pub fn axis(axis: SweepAxis, base: &DistillConfig, seeds: Vec<u64>) -> Self {
        let full = SweepGrids::full(seeds.clone());
        match axis {
            SweepAxis::Tau => SweepGrids { taus: full.taus, alphas: vec![base.alpha], betas: vec![base.beta], seeds },
            SweepAxis::Alpha => SweepGrids { taus: vec![base.tau], alphas: full.alphas, betas: vec![base.beta], seeds },
            SweepAxis::Beta => SweepGrids { taus: vec![base.tau], alphas: vec![base.alpha], betas: full.betas, seeds },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.taus.is_empty() || self.alphas.is_empty() || self.betas.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config("sweep grids must be nonempty".into()));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.taus.len() * self.alphas.len() * self.betas.len() * self.seeds.len()
    }
}

/// One swept hyperparameter axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Tau,
    Alpha,
    Beta,
}

impl SweepAxis {
    pub fn parse(s: &str) -> Result<SweepAxis> {
        match s.to_ascii_lowercase().as_str() {
            "tau" => Ok(SweepAxis::Tau),
            "alpha" => Ok(SweepAxis::Alpha),
            "beta" => Ok(SweepAxis::Beta),
            other => Err(Error::Config(format!("unknown sweep axis '{}'", other))),
        }
    }
}

/// One sweep result row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub tau: f64,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub test_micro_f1: f64,
    pub test_macro_f1: f64,
}

/// Run one distillation per grid cell and report test-set classification
/// scores. Cells run in a fixed order (τ, α, β, then seed), each fully
/// isolated; the row order is part of the output contract.
pub fn grid_sweep(
    g: &HetGraph,
    teacher: &ModelParams,
    base_cfg: &TrainConfig,
    grids: &SweepGrids,
) -> Result<Vec<SweepRow>> {
    grids.validate()?;
    let mut rows = Vec::with_capacity(grids.cell_count());
    for &tau in &grids.taus {
        for &alpha in &grids.alphas {
            for &beta in &grids.betas {
                for &seed in &grids.seeds {
                    let mut cfg = base_cfg.clone();
                    cfg.seed = seed;
                    cfg.distill.tau = tau;
                    cfg.distill.alpha = alpha;
                    cfg.distill.beta = beta;
                    let (student, _, _) = distill_student(g, teacher, &cfg)?;
                    let (micro, macro_) = classification_scores(g, &student, SplitKind::Test)?;
                    rows.push(SweepRow {
                        tau,
                        alpha,
                        beta,
                        seed,
                        test_micro_f1: micro,
                        test_macro_f1: macro_,
                    });
                }
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distill::Variant;
    use crate::graph::{generate_synthetic, split_target_nodes, SchemaNodeType, SchemaRelation, SyntheticSchema};
    use crate::rng::substream;

    fn small_graph(count: usize, separation: f64, noise: f64, seed: u64) -> HetGraph {
        let schema = SyntheticSchema {
            node_types: vec![
                SchemaNodeType { name: "paper".into(), count, feature_dim: 8 },
                SchemaNodeType { name: "author".into(), count: count / 2 + 2, feature_dim: 6 },
            ],
            relations: vec![SchemaRelation {
                name: "paper-author".into(),
                src: "paper".into(),
                dst: "author".into(),
                edge_count: count * 2,
            }],
            target_type: "paper".into(),
            num_classes: 3,
            intra_class_affinity: 0.85,
            class_separation: separation,
            label_noise_rate: noise,
            seed,
        };
        let g = generate_synthetic(&schema, &mut substream(seed, "graph")).unwrap();
        split_target_nodes(&g, 1.0, &mut substream(seed, "split")).unwrap()
    }

    fn quick_cfg(epochs: usize, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs,
            hidden_dim: 8,
            attention_dim: 8,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn adam_zero_gradient_leaves_params_unchanged() {
        let mut p = Tensor::from_rows(&[vec![1.0, -2.0]]).unwrap();
        let g = Tensor::zeros(1, 2);
        let mut state = AdamState::new(&[&p]);
        adam_step(&mut [&mut p], &[g], &mut state, 0.1, 0.0).unwrap();
        assert_eq!(p.data(), &[1.0, -2.0]);
    }

    #[test]
    fn adam_first_step_is_signed_unit_step() {
        let mut p = Tensor::scalar(1.0);
        let g = Tensor::scalar(0.5);
        let mut state = AdamState::new(&[&p]);
        adam_step(&mut [&mut p], &[g], &mut state, 0.1, 0.0).unwrap();
        // bias correction makes m̂ = g and v̂ = g², so the first update is
        // -lr·g/(|g|+ε)
        let expected = 1.0 - 0.1 * 0.5 / (0.5 + ADAM_EPS);
        assert!((p.data()[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn adam_identical_runs_stay_identical() {
        let mut p1 = Tensor::from_rows(&[vec![0.3, 0.7], vec![-0.1, 0.4]]).unwrap();
        let mut p2 = p1.clone();
        let mut s1 = AdamState::new(&[&p1]);
        let mut s2 = AdamState::new(&[&p2]);
        for step in 0..5 {
            let g = Tensor::filled(2, 2, 0.1 * (step as f64 + 1.0));
            adam_step(&mut [&mut p1], &[g.clone()], &mut s1, 0.05, 1e-3).unwrap();
            adam_step(&mut [&mut p2], &[g], &mut s2, 0.05, 1e-3).unwrap();
        }
        assert_eq!(p1, p2);
    }

    #[test]
    fn adam_rejects_shape_mismatch() {
        let mut p = Tensor::zeros(2, 2);
        let g = Tensor::zeros(2, 3);
        let mut state = AdamState::new(&[&p]);
        assert!(matches!(
            adam_step(&mut [&mut p], &[g], &mut state, 0.1, 0.0),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn pretrain_separable_graph_reaches_full_train_accuracy() {
        let g = small_graph(60, 6.0, 0.0, 3);
        let mut cfg = quick_cfg(120, 3);
        cfg.select_last_epoch = true;
        let (teacher, history) = pretrain_teacher(&g, &cfg).unwrap();
        assert_eq!(history.epochs.len(), 120);
        let (train_micro, _) = classification_scores(&g, &teacher, SplitKind::Train).unwrap();
        assert_eq!(train_micro, 1.0);
    }

    #[test]
    fn pretrain_is_deterministic() {
        let g = small_graph(40, 3.0, 0.1, 5);
        let cfg = quick_cfg(10, 5);
        let (a, ha) = pretrain_teacher(&g, &cfg).unwrap();
        let (b, hb) = pretrain_teacher(&g, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ha, hb);
    }

    #[test]
    fn pretrain_single_epoch_history() {
        let g = small_graph(30, 3.0, 0.0, 1);
        let cfg = quick_cfg(1, 1);
        let (_, history) = pretrain_teacher(&g, &cfg).unwrap();
        assert_eq!(history.epochs.len(), 1);
        assert_eq!(history.best_epoch, 0);
    }

    #[test]
    fn ce_variant_reproduces_teacher_training_bitwise() {
        let g = small_graph(40, 3.0, 0.1, 7);
        let mut cfg = quick_cfg(12, 7);
        cfg.distill.variant = Variant::Ce;
        let (teacher, _) = pretrain_teacher(&g, &cfg).unwrap();
        let (student, _, _) = distill_student(&g, &teacher, &cfg).unwrap();
        let (reference, _) = pretrain_teacher(&g, &cfg).unwrap();
        assert_eq!(student, reference);
    }

    #[test]
    fn student_from_teacher_weights_has_zero_gaps_at_epoch_zero() {
        let g = small_graph(40, 3.0, 0.1, 11);
        let mut cfg = quick_cfg(2, 11);
        cfg.distill.variant = Variant::Hire;
        let (teacher, _) = pretrain_teacher(&g, &cfg).unwrap();
        let (_, _, history) =
            distill_student_with_init(&g, &teacher, &cfg, Some(teacher.clone())).unwrap();
        assert!(history.epochs[0].kd.abs() < 1e-12, "kd gap {}", history.epochs[0].kd);
        assert!(history.epochs[0].rkd.abs() < 1e-12, "rkd gap {}", history.epochs[0].rkd);
    }

    #[test]
    fn teacher_params_are_frozen_during_distillation() {
        let g = small_graph(30, 3.0, 0.0, 13);
        let cfg = quick_cfg(5, 13);
        let (teacher, _) = pretrain_teacher(&g, &cfg).unwrap();
        let snapshot = teacher.clone();
        let _ = distill_student(&g, &teacher, &cfg).unwrap();
        assert_eq!(teacher, snapshot);
    }

    #[test]
    fn history_bookkeeping_and_attention_simplex() {
        let g = small_graph(40, 3.0, 0.1, 17);
        let mut cfg = quick_cfg(8, 17);
        cfg.distill.variant = Variant::Hire;
        cfg.distill.alpha = 0.3;
        cfg.distill.beta = 2.0;
        let (teacher, _) = pretrain_teacher(&g, &cfg).unwrap();
        let (_, _, history) = distill_student(&g, &teacher, &cfg).unwrap();
        assert_eq!(history.epochs.len(), 8);
        for rec in &history.epochs {
            let composed = (1.0 - cfg.distill.alpha) * rec.ce
                + cfg.distill.alpha * rec.kd
                + cfg.distill.beta * rec.rkd;
            assert!((rec.total - composed).abs() < 1e-9, "total {} vs {}", rec.total, composed);
            let sum: f64 = rec.attention.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            let t_sum: f64 = rec.teacher_attention.iter().sum();
            assert!((t_sum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn distillation_is_deterministic() {
        let g = small_graph(30, 3.0, 0.1, 19);
        let cfg = quick_cfg(6, 19);
        let (teacher, _) = pretrain_teacher(&g, &cfg).unwrap();
        let a = distill_student(&g, &teacher, &cfg).unwrap();
        let b = distill_student(&g, &teacher, &cfg).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert_eq!(a.2, b.2);
    }

    #[test]
    fn sweep_shapes_for_single_cell_and_slices() {
        let g = small_graph(30, 4.0, 0.0, 23);
        let cfg = quick_cfg(2, 23);
        let (teacher, _) = pretrain_teacher(&g, &cfg).unwrap();

        let single = SweepGrids {
            taus: vec![2.0],
            alphas: vec![0.5],
            betas: vec![1.0],
            seeds: vec![0, 1],
        };
        let rows = grid_sweep(&g, &teacher, &cfg, &single).unwrap();
        assert_eq!(rows.len(), 2);

        let tau_slice = SweepGrids::axis(SweepAxis::Tau, &cfg.distill, vec![0]);
        assert_eq!(tau_slice.cell_count(), 10);
        let alpha_slice = SweepGrids::axis(SweepAxis::Alpha, &cfg.distill, vec![0]);
        assert_eq!(alpha_slice.cell_count(), 11);
        let beta_slice = SweepGrids::axis(SweepAxis::Beta, &cfg.distill, vec![0]);
        assert_eq!(beta_slice.cell_count(), 5);
        assert_eq!(SweepGrids::full(vec![0]).cell_count(), 550);

        let empty = SweepGrids { taus: vec![], alphas: vec![0.1], betas: vec![1.0], seeds: vec![0] };
        assert!(matches!(grid_sweep(&g, &teacher, &cfg, &empty), Err(Error::Config(_))));
    }
}
