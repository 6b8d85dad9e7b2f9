//! Classification metrics, clustering evaluation and attention traces.
//!
//! Micro-F1 for single-label multiclass prediction equals global
//! accuracy; macro-F1 is the unweighted mean of per-class F1 with absent
//! classes scoring 0. Clustering quality is judged by running k-means on
//! L2-normalized embeddings and comparing the assignment against gold
//! labels with NMI (normalized by the arithmetic mean of the entropies)
//! and the adjusted Rand index.

use crate::error::{Error, Result};
use crate::graph::HetGraph;
use crate::rgcn::{eval_outputs, predict, ModelParams};
use crate::rng::substream_indexed;
use crate::tensor::Tensor;
use crate::train::RunHistory;
use rand::Rng;

/// Precision/recall/F1 for one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Full evaluation of one split.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub split: String,
    pub seed: u64,
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub nmi: f64,
    pub ari: f64,
    pub per_class: Vec<ClassMetrics>,
}

/// Which target nodes to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Train,
    Val,
    Test,
    /// Every target node regardless of split membership.
    All,
}

impl SplitKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplitKind::Train => "train",
            SplitKind::Val => "val",
            SplitKind::Test => "test",
            SplitKind::All => "all",
        }
    }

    pub fn parse(s: &str) -> Result<SplitKind> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(SplitKind::Train),
            "val" => Ok(SplitKind::Val),
            "test" => Ok(SplitKind::Test),
            "all" => Ok(SplitKind::All),
            other => Err(Error::Config(format!("unknown split '{}'", other))),
        }
    }

    /// Node indices of this split in `g`.
    pub fn indices(&self, g: &HetGraph) -> Vec<usize> {
        match self {
            SplitKind::Train => g.splits().train.clone(),
            SplitKind::Val => g.splits().val.clone(),
            SplitKind::Test => g.splits().test.clone(),
            SplitKind::All => (0..g.node_count(g.target_type())).collect(),
        }
    }
}

/// Micro-F1 (= accuracy for single-label multiclass), macro-F1 and
/// per-class precision/recall/F1. Classes absent from both `pred` and
/// `gold` score 0 everywhere.
pub fn micro_macro_f1(
    pred: &[usize],
    gold: &[usize],
    num_classes: usize,
) -> Result<(f64, f64, Vec<ClassMetrics>)> {
    if pred.is_empty() || gold.is_empty() {
        return Err(Error::Degenerate("empty prediction or label slice".into()));
    }
    if pred.len() != gold.len() {
        return Err(Error::Shape {
            op: "micro_macro_f1",
            detail: format!("{} predictions vs {} labels", pred.len(), gold.len()),
        });
    }
    if let Some(&bad) = pred.iter().chain(gold).find(|&&l| l >= num_classes) {
        return Err(Error::Validation(format!("label {} out of range for {} classes", bad, num_classes)));
    }
    let n = pred.len() as f64;
    let mut tp = vec![0usize; num_classes];
    let mut fp = vec![0usize; num_classes];
    let mut fn_ = vec![0usize; num_classes];
    let mut correct = 0usize;
    for (&p, &g) in pred.iter().zip(gold) {
        if p == g {
            tp[p] += 1;
            correct += 1;
        } else {
            fp[p] += 1;
            fn_[g] += 1;
        }
    }
    let micro = correct as f64 / n;
    let mut per_class = Vec::with_capacity(num_classes);
    let mut macro_sum = 0.0;
    for c in 0..num_classes {
        let (tp, fp, fn_) = (tp[c] as f64, fp[c] as f64, fn_[c] as f64);
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        macro_sum += f1;
        per_class.push(ClassMetrics { precision, recall, f1 });
    }
    Ok((micro, macro_sum / num_classes as f64, per_class))
}

/// Outcome of one k-means run on L2-normalized rows.
#[derive(Debug, Clone, PartialEq)]
pub struct KmeansOutcome {
    pub assignments: Vec<usize>,
    /// Final within-cluster sum of squared distances.
    pub objective: f64,
    /// Objective after each Lloyd iteration (non-increasing).
    pub objective_trace: Vec<f64>,
}

fn l2_normalize_rows(x: &Tensor) -> Tensor {
    let (n, d) = x.shape();
    let mut out = x.clone();
    for i in 0..n {
        let norm: f64 = x.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for j in 0..d {
                out.set(i, j, x.at(i, j) / norm);
            }
        }
    }
    out
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// One seeded k-means run: normalize rows, k-means++ seeding, Lloyd
/// iterations to an assignment fixpoint (or `max_iters`), empty clusters
/// re-seeded to the point farthest from its current center.
pub fn kmeans_once<R: Rng>(x: &Tensor, k: usize, rng: &mut R, max_iters: usize) -> Result<KmeansOutcome> {
    let (n, d) = x.shape();
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if n < k {
        return Err(Error::Degenerate(format!("{} points cannot form {} clusters", n, k)));
    }
    let x = l2_normalize_rows(x);

    // k-means++ seeding
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(x.row(rng.gen_range(0..n)).to_vec());
    while centers.len() < k {
        let weights: Vec<f64> = (0..n)
            .map(|i| centers.iter().map(|c| dist2(x.row(i), c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.gen_range(0.0..total);
            let mut chosen = n - 1;
            for (i, &w) in weights.iter().enumerate() {
                if r < w {
                    chosen = i;
                    break;
                }
                r -= w;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centers.push(x.row(pick).to_vec());
    }

    let assign = |centers: &[Vec<f64>]| -> Vec<usize> {
        (0..n)
            .map(|i| {
                let mut best = 0usize;
                let mut best_d = dist2(x.row(i), &centers[0]);
                for (c, center) in centers.iter().enumerate().skip(1) {
                    let dd = dist2(x.row(i), center);
                    if dd < best_d {
                        best_d = dd;
                        best = c;
                    }
                }
                best
            })
            .collect()
    };
    let objective_of = |assignments: &[usize], centers: &[Vec<f64>]| -> f64 {
        assignments.iter().enumerate().map(|(i, &a)| dist2(x.row(i), &centers[a])).sum()
    };

    let mut assignments = assign(&centers);
    let mut trace = Vec::new();
    for _ in 0..max_iters {
        // recompute centers as cluster means
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (i, &a) in assignments.iter().enumerate() {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(x.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for s in sums[c].iter_mut() {
                    *s /= counts[c] as f64;
                }
                centers[c] = sums[c].clone();
            } else {
                // re-seed an empty cluster to the farthest point from its
                // current center
                let far = (0..n)
                    .max_by(|&a, &b| {
                        dist2(x.row(a), &centers[c])
                            .partial_cmp(&dist2(x.row(b), &centers[c]))
                            .expect("finite distances")
                    })
                    .expect("n >= k >= 1");
                centers[c] = x.row(far).to_vec();
            }
        }
        let next = assign(&centers);
        trace.push(objective_of(&next, &centers));
        let done = next == assignments;
        assignments = next;
        if done {
            break;
        }
    }
    let objective = objective_of(&assignments, &final_centers(&x, &assignments, k, d));
    Ok(KmeansOutcome { assignments, objective, objective_trace: trace })
}

fn final_centers(x: &Tensor, assignments: &[usize], k: usize, d: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (i, &a) in assignments.iter().enumerate() {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(x.row(i)) {
            *s += v;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            for s in sums[c].iter_mut() {
                *s /= counts[c] as f64;
            }
        }
    }
    sums
}

/// Cluster assignments from one seeded k-means run.
pub fn kmeans<R: Rng>(x: &Tensor, k: usize, rng: &mut R, max_iters: usize) -> Result<Vec<usize>> {
    kmeans_once(x, k, rng, max_iters).map(|o| o.assignments)
}

fn counts_of(xs: &[usize]) -> Vec<usize> {
    let m = xs.iter().max().map_or(0, |&m| m + 1);
    let mut c = vec![0usize; m];
    for &x in xs {
        c[x] += 1;
    }
    c
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information with arithmetic-mean normalization:
/// `I(a;b) / ((H(a)+H(b))/2)`, natural logs, defined as 1 when both
/// partitions are single-cluster.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Degenerate("empty partition".into()));
    }
    if a.len() != b.len() {
        return Err(Error::Shape {
            op: "nmi",
            detail: format!("{} vs {} elements", a.len(), b.len()),
        });
    }
    let n = a.len() as f64;
    let ca = counts_of(a);
    let cb = counts_of(b);
    let mut joint = std::collections::BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_insert(0usize) += 1;
    }
    let mut mi = 0.0;
    for (&(x, y), &c) in &joint {
        let p = c as f64 / n;
        mi += p * ((n * c as f64) / (ca[x] as f64 * cb[y] as f64)).ln();
    }
    let (ha, hb) = (entropy(&ca, n), entropy(&cb, n));
    let denom = 0.5 * (ha + hb);
    if denom == 0.0 {
        // both partitions are single-cluster: identical by definition
        return Ok(1.0);
    }
    Ok((mi / denom).clamp(0.0, 1.0))
}

fn comb2(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index from the pair-counting contingency formula:
/// `(index - expected) / (max - expected)`; 1 when the denominator
/// vanishes (the two partitions agree perfectly in the degenerate cases).
pub fn ari(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Degenerate("empty partition".into()));
    }
    if a.len() != b.len() {
        return Err(Error::Shape {
            op: "ari",
            detail: format!("{} vs {} elements", a.len(), b.len()),
        });
    }
    let n = a.len() as f64;
    let ca = counts_of(a);
    let cb = counts_of(b);
    let mut joint = std::collections::BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_insert(0usize) += 1;
    }
    let index: f64 = joint.values().map(|&c| comb2(c as f64)).sum();
    let sum_a: f64 = ca.iter().map(|&c| comb2(c as f64)).sum();
    let sum_b: f64 = cb.iter().map(|&c| comb2(c as f64)).sum();
    let pairs = comb2(n);
    if pairs == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / pairs;
    let max_index = 0.5 * (sum_a + sum_b);
    if (max_index - expected).abs() < 1e-15 {
        return Ok(1.0);
    }
    Ok((index - expected) / (max_index - expected))
}

/// Number of k-means restarts inside [`evaluate_model`]; the assignment
/// with the lowest objective wins.
pub const KMEANS_RESTARTS: usize = 10;

/// Default Lloyd iteration cap.
pub const KMEANS_MAX_ITERS: usize = 300;

/// Eval-mode forward pass followed by classification metrics on the
/// split and clustering metrics (k = class count) on the split's hidden
/// embeddings.
pub fn evaluate_model(g: &HetGraph, params: &ModelParams, split: SplitKind, seed: u64) -> Result<MetricsReport> {
    let indices = split.indices(g);
    if indices.is_empty() {
        return Err(Error::Degenerate(format!("split '{}' is empty", split.as_str())));
    }
    let (hidden, logits) = eval_outputs(g, params)?;
    let preds_all = predict(&logits);
    let preds: Vec<usize> = indices.iter().map(|&i| preds_all[i]).collect();
    let gold: Vec<usize> = indices.iter().map(|&i| g.labels()[i]).collect();
    let (micro_f1, macro_f1, per_class) = micro_macro_f1(&preds, &gold, g.num_classes())?;

    let target_hidden = &hidden[g.target_type()];
    let mut rows = Vec::with_capacity(indices.len());
    for &i in &indices {
        rows.push(target_hidden.row(i).to_vec());
    }
    let embeddings = Tensor::from_rows(&rows)?;
    let k = g.num_classes();
    let mut best: Option<KmeansOutcome> = None;
    for restart in 0..KMEANS_RESTARTS {
        let mut rng = substream_indexed(seed, "kmeans-restart", restart as u64);
        let outcome = kmeans_once(&embeddings, k, &mut rng, KMEANS_MAX_ITERS)?;
        if best.as_ref().map_or(true, |b| outcome.objective < b.objective) {
            best = Some(outcome);
        }
    }
    let assignments = best.expect("at least one restart").assignments;
    let nmi_score = nmi(&assignments, &gold)?;
    let ari_score = ari(&assignments, &gold)?;

    Ok(MetricsReport {
        split: split.as_str().to_string(),
        seed,
        micro_f1,
        macro_f1,
        nmi: nmi_score,
        ari: ari_score,
        per_class,
    })
}

/// Classification-only evaluation (used by training loops and sweeps).
pub fn classification_scores(g: &HetGraph, params: &ModelParams, split: SplitKind) -> Result<(f64, f64)> {
    let indices = split.indices(g);
    if indices.is_empty() {
        return Err(Error::Degenerate(format!("split '{}' is empty", split.as_str())));
    }
    let (_, logits) = eval_outputs(g, params)?;
    let preds_all = predict(&logits);
    let preds: Vec<usize> = indices.iter().map(|&i| preds_all[i]).collect();
    let gold: Vec<usize> = indices.iter().map(|&i| g.labels()[i]).collect();
    let (micro, macro_, _) = micro_macro_f1(&preds, &gold, g.num_classes())?;
    Ok((micro, macro_))
}

/// One attention coefficient observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttentionTraceRow {
    pub epoch: usize,
    pub type_index: usize,
    pub coefficient: f64,
}

/// Tidy per-(epoch, type) table of recorded attention coefficients.
pub fn attention_trace(history: &RunHistory) -> Result<Vec<AttentionTraceRow>> {
    if history.epochs.is_empty() {
        return Err(Error::Degenerate("empty run history".into()));
    }
    let mut rows = Vec::new();
    for (epoch, record) in history.epochs.iter().enumerate() {
        for (type_index, &coefficient) in record.attention.iter().enumerate() {
            rows.push(AttentionTraceRow { epoch, type_index, coefficient });
        }
    }
    Ok(rows)
}
