//! Property tests for the structural invariants: row-sum identities,
//! symmetry, τ ranges, linearity, the ε = 0 reduction, and config
//! round-trips.

use ngc::harness::{parse_seed_spec, ExperimentConfig};
use ngc::{
    flip_features, row_normalize, Graph, GraphKind, Matrix, NeumannOperator, NormMode,
    RobustOperator, SimilarityMode,
};
use proptest::prelude::*;

fn er_graph() -> impl Strategy<Value = Graph> {
    (2usize..60, 0.05f64..0.5, any::<u64>())
        .prop_map(|(n, p, seed)| Graph::canonical(GraphKind::ErdosRenyi { p }, n, seed).unwrap())
}

fn small_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(-10.0f64..10.0, rows * cols)
        .prop_map(move |v| Matrix::from_vec(rows, cols, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rw_row_sums_match_the_identity(
        graph in er_graph(),
        lambda in 0.0f64..64.0,
        order in 0usize..32,
    ) {
        let op = NeumannOperator::new(graph.normalize(NormMode::Rw), lambda, order).unwrap();
        let rows = op.row_sums().unwrap();
        prop_assert!(rows.max_deviation < 1e-10, "deviation {}", rows.max_deviation);
    }

    #[test]
    fn sym_operator_is_symmetric(
        graph in er_graph(),
        lambda in 0.0f64..32.0,
        order in 0usize..16,
        cols in 1usize..4,
    ) {
        let n = graph.node_count();
        let op = NeumannOperator::new(graph.normalize(NormMode::Sym), lambda, order).unwrap();
        let x = Matrix::from_fn(n, cols, |i, j| ((i * 7 + j * 13) % 11) as f64 - 5.0);
        let forward = op.propagate(&x).unwrap();
        let transposed = op.propagate_transpose(&x).unwrap();
        let gap = forward.sub(&transposed).unwrap().max_abs();
        prop_assert!(gap <= 1e-12, "asymmetry {gap}");
    }

    #[test]
    fn rw_tau_lies_in_its_range(
        graph in er_graph(),
        lambda in 0.0f64..64.0,
        order in 0usize..24,
    ) {
        let n = graph.node_count();
        let op = NeumannOperator::new(graph.normalize(NormMode::Rw), lambda, order).unwrap();
        let report = op.connectivity_factor(n, 0, 0).unwrap();
        prop_assert!(report.exact);
        prop_assert!(report.tau >= 1.0 - 1e-9, "tau {} below 1", report.tau);
        prop_assert!(report.tau <= n as f64 + 1e-9, "tau {} above n = {n}", report.tau);
    }

    #[test]
    fn propagation_is_linear(
        graph in er_graph(),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let n = graph.node_count();
        let op = NeumannOperator::new(graph.normalize(NormMode::Rw), 8.0, 10).unwrap();
        let x = Matrix::from_fn(n, 2, |i, j| ((i + 3 * j) % 7) as f64 - 3.0);
        let y = Matrix::from_fn(n, 2, |i, j| ((2 * i + j) % 5) as f64 - 2.0);
        let mut combined = x.clone();
        combined.scale(a);
        combined.axpy(b, &y).unwrap();
        let left = op.propagate(&combined).unwrap();
        let mut right = op.propagate(&x).unwrap();
        right.scale(a);
        right.axpy(b, &op.propagate(&y).unwrap()).unwrap();
        let gap = left.sub(&right).unwrap().max_abs();
        prop_assert!(gap <= 1e-10, "nonlinearity {gap}");
    }

    #[test]
    fn zero_epsilon_robust_filter_reduces_to_plain(
        graph in er_graph(),
        lambda in 0.5f64..32.0,
        order in 1usize..16,
        seed in any::<u64>(),
    ) {
        let n = graph.node_count();
        let x = Matrix::from_fn(n, 3, |i, j| (((i * 31 + j * 17 + seed as usize) % 13) as f64) / 6.0 - 1.0);
        let base = NeumannOperator::new(graph.normalize(NormMode::Rw), lambda, order).unwrap();
        let plain = base.propagate(&x).unwrap();
        let robust = RobustOperator::new(base, 0.0, SimilarityMode::Dense, &x).unwrap();
        let gap = robust.propagate(&x).unwrap().sub(&plain).unwrap().max_abs();
        prop_assert!(gap <= 1e-12, "reduction gap {gap}");
    }

    #[test]
    fn flip_probability_zero_and_one_are_identity_and_complement(
        rows in 1usize..12,
        cols in 1usize..6,
        bits in any::<u64>(),
        seed in any::<u64>(),
    ) {
        let x = Matrix::from_fn(rows, cols, |i, j| ((bits >> ((i * cols + j) % 64)) & 1) as f64);
        let same = flip_features(&x, 0.0, seed).unwrap();
        let flipped = flip_features(&x, 1.0, seed).unwrap();
        for i in 0..rows {
            for j in 0..cols {
                prop_assert_eq!(same.get(i, j), x.get(i, j));
                prop_assert_eq!(flipped.get(i, j), 1.0 - x.get(i, j));
            }
        }
    }

    #[test]
    fn row_normalize_produces_unit_rows(m in small_matrix(5, 4)) {
        let normalized = row_normalize(&m);
        for i in 0..5 {
            let raw: f64 = (0..4).map(|j| m.get(i, j).abs()).sum();
            let sum: f64 = (0..4).map(|j| normalized.get(i, j).abs()).sum();
            if raw == 0.0 {
                prop_assert_eq!(sum, 0.0);
            } else {
                prop_assert!((sum - 1.0).abs() <= 1e-12, "row {i} L1 mass {sum}");
            }
        }
    }

    #[test]
    fn config_canonical_form_is_a_fixed_point(
        seeds_hi in 0u64..6,
        n in 4usize..200,
        lambda_num in 1u32..512,
        order in 1usize..40,
        level_num in 0u32..16,
        steps in 1usize..200,
        with_sweep in any::<bool>(),
    ) {
        let mut text = format!(
            "experiment = noise_sweep\nseeds = 0..{seeds_hi}\ngraph.source = generator\ngraph.kind = sbm\ngraph.n = {n}\nfilter.lambda = {}\nfilter.order = {order}\nnoise.level = {}\ntrain.steps = {steps}\n",
            lambda_num as f64 / 8.0,
            level_num as f64 / 4.0,
        );
        if with_sweep {
            text.push_str("sweep.values = 0.5, 1.25, 2\n");
        }
        let first = ExperimentConfig::parse(&text, "<prop>").unwrap();
        let canonical = first.to_canonical_string();
        let second = ExperimentConfig::parse(&canonical, "<prop>").unwrap();
        prop_assert_eq!(&second, &first);
        prop_assert_eq!(second.to_canonical_string(), canonical);
    }

    #[test]
    fn seed_specs_round_trip(spec_kind in 0usize..3, a in 0u64..50, b in 0u64..50, c in 0u64..50) {
        let spec = match spec_kind {
            0 => format!("{}..{}", a.min(b), a.max(b)),
            1 => format!("{a},{b},{c}"),
            _ => format!("{a}"),
        };
        let seeds = parse_seed_spec(&spec).unwrap();
        prop_assert!(!seeds.is_empty());
        let rendered = ngc::harness::config::seeds_to_string(&seeds);
        let reparsed = parse_seed_spec(&rendered).unwrap();
        prop_assert_eq!(reparsed, seeds);
    }
}
