//! Property tests for the structural invariants.

use hire::distill::{metacorr, KernelMode};
use hire::eval::{ari, micro_macro_f1, nmi};
use hire::graph::{
    generate_synthetic, parse_graph, serialize_graph, split_target_nodes, SchemaNodeType,
    SchemaRelation, SyntheticSchema,
};
use hire::rng::substream;
use hire::tensor::{glorot_init, Tape, Tensor};
use proptest::prelude::*;

fn arb_schema() -> impl Strategy<Value = SyntheticSchema> {
    (
        3usize..24,
        2usize..16,
        1usize..5,
        1usize..5,
        2usize..4,
        0usize..40,
        0.05f64..0.95,
        0.0f64..3.0,
        0.0f64..0.5,
    )
        .prop_map(|(n_a, n_b, d_a, d_b, classes, edges, p_in, sep, noise)| SyntheticSchema {
            node_types: vec![
                SchemaNodeType { name: "alpha".into(), count: n_a, feature_dim: d_a },
                SchemaNodeType { name: "beta".into(), count: n_b, feature_dim: d_b },
            ],
            relations: vec![SchemaRelation {
                name: "link".into(),
                src: "alpha".into(),
                dst: "beta".into(),
                edge_count: edges.min(n_a * n_b),
            }],
            target_type: "alpha".into(),
            num_classes: classes,
            intra_class_affinity: p_in,
            class_separation: sep,
            label_noise_rate: noise,
            seed: 0,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graph_round_trip_is_exact(schema in arb_schema(), seed in 0u64..1000) {
        let g = generate_synthetic(&schema, &mut substream(seed, "prop-gen")).unwrap();
        let g = if g.node_count(0) >= g.num_classes() {
            split_target_nodes(&g, 1.0, &mut substream(seed, "prop-split")).unwrap()
        } else {
            g
        };
        let text = serialize_graph(&g);
        let back = parse_graph(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(serialize_graph(&back), text);
    }

    #[test]
    fn softmax_rows_form_distributions(
        rows in 1usize..5,
        cols in 1usize..6,
        tau in 0.5f64..10.0,
        seed in 0u64..1000,
    ) {
        let mut rng = substream(seed, "prop-softmax");
        let mut z = glorot_init(rows, cols, &mut rng).unwrap();
        for v in z.data_mut() {
            *v *= 50.0; // stress the max-subtraction path
        }
        let mut tape = Tape::new();
        let zv = tape.constant(z);
        let p = tape.softmax_rows(zv, tau).unwrap();
        let out = tape.value(p);
        for i in 0..rows {
            let sum: f64 = out.row(i).iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            for &v in out.row(i) {
                prop_assert!(v > 0.0 && v < 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn gradient_accumulation_is_additive(seed in 0u64..1000) {
        // a leaf consumed twice accumulates the sum of per-use gradients
        let mut rng = substream(seed, "prop-accum");
        let x = glorot_init(3, 3, &mut rng).unwrap();
        let c1 = glorot_init(3, 3, &mut rng).unwrap();
        let c2 = glorot_init(3, 3, &mut rng).unwrap();

        let grad_with = |uses: &[&Tensor]| -> Tensor {
            let mut tape = Tape::new();
            let xv = tape.leaf(x.clone(), true);
            let mut total = None;
            for c in uses {
                let cv = tape.constant((*c).clone());
                let prod = tape.mul(xv, cv).unwrap();
                let s = tape.reduce(prod, hire::tensor::Reduction::Sum, hire::tensor::Axis::All).unwrap();
                total = Some(match total {
                    None => s,
                    Some(t) => tape.add(t, s).unwrap(),
                });
            }
            tape.backward(total.unwrap()).unwrap();
            tape.grad(xv).unwrap().clone()
        };
        let joint = grad_with(&[&c1, &c2]);
        let g1 = grad_with(&[&c1]);
        let g2 = grad_with(&[&c2]);
        for e in 0..9 {
            prop_assert!((joint.data()[e] - (g1.data()[e] + g2.data()[e])).abs() < 1e-12);
        }
    }

    #[test]
    fn clustering_metrics_ignore_label_names(
        a in proptest::collection::vec(0usize..4, 2..12),
        b_shift in 1usize..4,
        seed in 0u64..1000,
    ) {
        // relabeling either argument leaves NMI/ARI unchanged
        let mut rng = substream(seed, "prop-labels");
        use rand::Rng;
        let b: Vec<usize> = a.iter().map(|_| rng.gen_range(0..4)).collect();
        let a2: Vec<usize> = a.iter().map(|&x| (x + b_shift) % 4).collect();
        prop_assert!((nmi(&a, &b).unwrap() - nmi(&a2, &b).unwrap()).abs() < 1e-12);
        prop_assert!((ari(&a, &b).unwrap() - ari(&a2, &b).unwrap()).abs() < 1e-12);

        // and consistent relabeling leaves classification metrics unchanged
        let (micro, macro_1, _) = micro_macro_f1(&a, &b, 4).unwrap();
        let b2: Vec<usize> = b.iter().map(|&x| (x + b_shift) % 4).collect();
        let (micro2, macro_2, _) = micro_macro_f1(&a2, &b2, 4).unwrap();
        prop_assert_eq!(micro, micro2);
        prop_assert!((macro_1 - macro_2).abs() < 1e-12);
    }

    #[test]
    fn metacorr_is_symmetric_with_unit_diagonal(
        k in 1usize..6,
        d in 1usize..6,
        sigma in 0.2f64..5.0,
        seed in 0u64..1000,
    ) {
        let h = glorot_init(k, d, &mut substream(seed, "prop-mc")).unwrap();
        for mode in [KernelMode::Exact, KernelMode::Taylor2] {
            let m = metacorr(&h, sigma, mode).unwrap();
            for i in 0..k {
                for j in 0..k {
                    prop_assert!((m.at(i, j) - m.at(j, i)).abs() < 1e-12);
                }
                if mode == KernelMode::Exact {
                    prop_assert_eq!(m.at(i, i), 1.0);
                    for j in 0..k {
                        prop_assert!(m.at(i, j) > 0.0 && m.at(i, j) <= 1.0);
                    }
                }
            }
        }
    }
}
