//! CSV report writers: training histories, sweeps and ablations.
//!
//! Metrics print with 6 decimals; row order is fixed so reruns produce
//! byte-identical files.

use hire::graph::HetGraph;
use hire::train::{RunHistory, SweepRow};

fn f(v: f64) -> String {
    format!("{:.6}", v)
}

/// Per-epoch history: `epoch,total,ce,kd,rkd,att_<type>…`.
pub fn history_csv(g: &HetGraph, history: &RunHistory) -> String {
    let mut out = String::from("epoch,total,ce,kd,rkd");
    for t in g.node_types() {
        out.push_str(&format!(",att_{}", t.name));
    }
    out.push('\n');
    for (epoch, rec) in history.epochs.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{}",
            epoch,
            f(rec.total),
            f(rec.ce),
            f(rec.kd),
            f(rec.rkd)
        ));
        for t in 0..g.num_node_types() {
            let coefficient = rec.attention.get(t).copied().unwrap_or(0.0);
            out.push_str(&format!(",{}", f(coefficient)));
        }
        out.push('\n');
    }
    out
}

/// Sweep results: `tau,alpha,beta,seed,test_micro_f1,test_macro_f1`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("tau,alpha,beta,seed,test_micro_f1,test_macro_f1\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            f(r.tau),
            f(r.alpha),
            f(r.beta),
            r.seed,
            f(r.test_micro_f1),
            f(r.test_macro_f1)
        ));
    }
    out
}

/// One ablation result.
pub struct AblationRow {
    pub variant: String,
    pub seed: u64,
    pub test_micro_f1: f64,
    pub test_macro_f1: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Ablation results: one row per (variant, seed) plus per-variant mean
/// and (population) standard-deviation summary rows.
pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from("variant,seed,test_micro_f1,test_macro_f1\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.variant,
            r.seed,
            f(r.test_micro_f1),
            f(r.test_macro_f1)
        ));
    }
    let mut variants: Vec<&str> = Vec::new();
    for r in rows {
        if !variants.contains(&r.variant.as_str()) {
            variants.push(&r.variant);
        }
    }
    for v in variants {
        let micro: Vec<f64> = rows.iter().filter(|r| r.variant == v).map(|r| r.test_micro_f1).collect();
        let macro_: Vec<f64> = rows.iter().filter(|r| r.variant == v).map(|r| r.test_macro_f1).collect();
        out.push_str(&format!("{},mean,{},{}\n", v, f(mean(&micro)), f(mean(&macro_))));
        out.push_str(&format!("{},std,{},{}\n", v, f(std_dev(&micro)), f(std_dev(&macro_))));
    }
    out
}
