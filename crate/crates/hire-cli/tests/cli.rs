//! End-to-end behavior of the `hire` binary: file outputs, exit codes,
//! determinism and checkpoint round-trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hire() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hire"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    hire().args(args).current_dir(dir).output().expect("spawn hire")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "command failed: {}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_config(dir: &Path, scale: f64, epochs: usize) -> PathBuf {
    let path = dir.join("config.json");
    let text = format!(
        r#"{{"schema": "acm-like", "scale": {scale},
            "train": {{"epochs": {epochs}, "hidden_dim": 8, "attention_dim": 8, "train_fraction": 0.2}},
            "output_dir": "out"}}"#
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn gen_writes_loadable_graph_with_preset_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["gen", "--preset", "acm-like", "--scale", "0.02", "--seed", "1", "--out", "acm.json"],
        dir.path(),
    );
    assert_ok(&out);
    let g = hire::graph::load_graph(&dir.path().join("acm.json")).unwrap();
    assert_eq!(g.num_node_types(), 3);
    assert_eq!(g.num_classes(), 3);

    let out = run(
        &["gen", "--preset", "dblp-like", "--scale", "0.02", "--seed", "1", "--out", "dblp.json"],
        dir.path(),
    );
    assert_ok(&out);
    let g = hire::graph::load_graph(&dir.path().join("dblp.json")).unwrap();
    assert_eq!(g.num_node_types(), 4);
    assert_eq!(g.num_classes(), 4);
}

#[test]
fn gen_same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        let out = run(
            &["gen", "--preset", "imdb-like", "--scale", "0.02", "--seed", "7", "--out", name],
            dir.path(),
        );
        assert_ok(&out);
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn gen_unknown_preset_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["gen", "--preset", "nope", "--out", "x.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_teacher_writes_checkpoint_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), 0.02, 3);
    let out = run(&["train-teacher", "--config", "config.json", "--seed", "0"], dir.path());
    assert_ok(&out);
    assert!(dir.path().join("out/teacher-checkpoint.json").exists());
    assert!(dir.path().join("out/metrics.json").exists());
}

#[test]
fn train_teacher_missing_config_exits_2_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["train-teacher", "--config", "missing-config.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("missing-config.json"), "stderr: {stderr}");
}

#[test]
fn train_teacher_missing_graph_file_exits_2_with_path() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("config.json"),
        r#"{"dataset": "no-such-graph.json", "train": {"epochs": 1}}"#,
    )
    .unwrap();
    let out = run(&["train-teacher", "--config", "config.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no-such-graph.json"), "stderr: {stderr}");
}

#[test]
fn config_with_both_sources_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("config.json"),
        r#"{"dataset": "g.json", "schema": "acm-like", "train": {"epochs": 1}}"#,
    )
    .unwrap();
    let out = run(&["train-teacher", "--config", "config.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn teacher_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), 0.02, 3);
    let out = run(
        &["train-teacher", "--config", "config.json", "--seed", "3", "--out", "run1"],
        dir.path(),
    );
    assert_ok(&out);
    let out = run(
        &["train-teacher", "--config", "config.json", "--seed", "3", "--out", "run2"],
        dir.path(),
    );
    assert_ok(&out);
    for file in ["teacher-checkpoint.json", "metrics.json"] {
        let a = std::fs::read(dir.path().join("run1").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("run2").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn distill_writes_history_with_expected_columns() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), 0.02, 3);
    assert_ok(&run(&["train-teacher", "--config", "config.json"], dir.path()));
    let out = run(
        &[
            "distill",
            "--config",
            "config.json",
            "--teacher",
            "out/teacher-checkpoint.json",
            "--variant",
            "hire",
            "--out",
            "student",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let history = std::fs::read_to_string(dir.path().join("student/history.csv")).unwrap();
    let header = history.lines().next().unwrap();
    assert_eq!(header, "epoch,total,ce,kd,rkd,att_paper,att_author,att_field");
    assert_eq!(history.lines().count(), 1 + 3);
    assert!(dir.path().join("student/student-checkpoint.json").exists());
    assert!(dir.path().join("student/metrics.json").exists());
}

#[test]
fn distill_schema_mismatch_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), 0.02, 3);
    assert_ok(&run(&["train-teacher", "--config", "config.json"], dir.path()));
    // same shapes, different class count via a different preset
    std::fs::write(
        dir.path().join("other.json"),
        r#"{"schema": "dblp-like", "scale": 0.02,
            "train": {"epochs": 3, "hidden_dim": 8, "attention_dim": 8, "train_fraction": 0.2},
            "output_dir": "out2"}"#,
    )
    .unwrap();
    let out = run(
        &["distill", "--config", "other.json", "--teacher", "out/teacher-checkpoint.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("schema mismatch"), "stderr: {stderr}");
}

#[test]
fn distill_ce_matches_teacher_metrics() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), 0.02, 4);
    assert_ok(&run(&["train-teacher", "--config", "config.json", "--seed", "2"], dir.path()));
    let out = run(
        &[
            "distill",
            "--config",
            "config.json",
            "--teacher",
            "out/teacher-checkpoint.json",
            "--variant",
            "ce",
            "--seed",
            "2",
            "--out",
            "ce-student",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let teacher_metrics = std::fs::read(dir.path().join("out/metrics.json")).unwrap();
    let student_metrics = std::fs::read(dir.path().join("ce-student/metrics.json")).unwrap();
    assert_eq!(teacher_metrics, student_metrics);
}

#[test]
fn eval_writes_metrics_for_requested_split() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), 0.02, 3);
    assert_ok(&run(&["train-teacher", "--config", "config.json"], dir.path()));
    assert_ok(&run(
        &["gen", "--preset", "acm-like", "--scale", "0.02", "--train-fraction", "0.2", "--out", "g.json"],
        dir.path(),
    ));
    let out = run(
        &[
            "eval",
            "--checkpoint",
            "out/teacher-checkpoint.json",
            "--graph",
            "g.json",
            "--split",
            "val",
            "--out",
            "val-metrics.json",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let metrics = std::fs::read_to_string(dir.path().join("val-metrics.json")).unwrap();
    assert!(metrics.starts_with("{\"split\":\"val\""));
}

#[test]
fn checkpoint_round_trip_is_bitwise_lossless() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), 0.02, 3);
    assert_ok(&run(&["train-teacher", "--config", "config.json"], dir.path()));

    let cfg = hire_cli::config::ExperimentConfig::load(&dir.path().join("config.json")).unwrap();
    let g = cfg.resolve_graph(None).unwrap();
    let ckpt_path = dir.path().join("out/teacher-checkpoint.json");
    let original = std::fs::read_to_string(&ckpt_path).unwrap();
    let loaded = hire_cli::checkpoint::load_checkpoint(&ckpt_path, &g).unwrap();

    // re-serialize from the loaded parameters; the params/attention
    // sections must be byte-identical
    let parsed: serde_json::Value = serde_json::from_str(&original).unwrap();
    let reserialized = hire_cli::checkpoint::serialize_checkpoint(&hire_cli::checkpoint::Checkpoint {
        kind: &loaded.kind,
        graph: &g,
        params: &loaded.params,
        attention: loaded.attention.as_ref(),
        train_config: &loaded.train_config,
        seed: loaded.seed,
        final_metrics: None,
    });
    let reparsed: serde_json::Value = serde_json::from_str(&reserialized).unwrap();
    assert_eq!(parsed["params"], reparsed["params"]);
    assert_eq!(parsed["attention"], reparsed["attention"]);
    assert_eq!(parsed["train_config"], reparsed["train_config"]);
    assert_eq!(parsed["schema_fingerprint"], reparsed["schema_fingerprint"]);
}

#[test]
fn ablate_emits_variant_by_seed_rows_plus_summaries() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), 0.02, 2);
    assert_ok(&run(&["train-teacher", "--config", "config.json"], dir.path()));
    let out = run(
        &[
            "ablate",
            "--config",
            "config.json",
            "--teacher",
            "out/teacher-checkpoint.json",
            "--out",
            "ablation.csv",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let csv = std::fs::read_to_string(dir.path().join("ablation.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "variant,seed,test_micro_f1,test_macro_f1");
    // 4 variants x 5 seeds data rows + 4 x (mean, std) summaries
    assert_eq!(lines.len(), 1 + 20 + 8);
    for variant in ["ce", "nkd", "rkd", "hire"] {
        assert_eq!(lines.iter().filter(|l| l.starts_with(&format!("{variant},"))).count(), 5 + 2);
        assert!(lines.iter().any(|l| l.starts_with(&format!("{variant},mean,"))));
        assert!(lines.iter().any(|l| l.starts_with(&format!("{variant},std,"))));
    }

    // deterministic rerun
    let out = run(
        &[
            "ablate",
            "--config",
            "config.json",
            "--teacher",
            "out/teacher-checkpoint.json",
            "--out",
            "ablation2.csv",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let csv2 = std::fs::read_to_string(dir.path().join("ablation2.csv")).unwrap();
    assert_eq!(csv, csv2);
}

#[test]
fn sweep_axis_slices_have_expected_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), 0.02, 1);
    assert_ok(&run(&["train-teacher", "--config", "config.json"], dir.path()));
    for (axis, expect) in [("tau", 10usize), ("alpha", 11), ("beta", 5)] {
        let out_name = format!("sweep-{axis}.csv");
        let out = run(
            &[
                "sweep",
                "--config",
                "config.json",
                "--teacher",
                "out/teacher-checkpoint.json",
                "--axes",
                axis,
                "--out",
                &out_name,
            ],
            dir.path(),
        );
        assert_ok(&out);
        let csv = std::fs::read_to_string(dir.path().join(&out_name)).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "tau,alpha,beta,seed,test_micro_f1,test_macro_f1");
        assert_eq!(csv.lines().count() - 1, expect, "axis {axis}");
    }
}
