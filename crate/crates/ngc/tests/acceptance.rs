//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N (...): PASS/FAIL` line with the measured quantities.
//!
//! Run with ordered output:
//! `cargo test --test acceptance -- --test-threads=1 --nocapture`
//!
//! Criteria 9–11 run classification pipelines whose split
//! (60 train / 10 val per class) was fixed by a calibration run before the
//! thresholds were frozen; see the repository README for the recorded
//! margins.

use ngc::harness::{load_dataset, run_experiment, ExperimentOutput};
use ngc::{
    evaluate_accuracy, exact_solve, flip_features, inner_objective, least_squares_optimum,
    mse_loss, row_normalize, train_gd, verify_concentration, worst_case_delta, ExperimentConfig,
    Graph, GraphKind, Matrix, NeumannOperator, NormMode, RobustOperator, SimilarityMode,
    StepSize, TrainConfig,
};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

fn report(number: u32, name: &str, passed: bool, detail: &str) {
    let status = if passed { "PASS" } else { "FAIL" };
    println!("criterion {number} ({name}): {status} — {detail}");
    assert!(passed, "criterion {number} ({name}) failed: {detail}");
}

fn cfg(text: &str) -> ExperimentConfig {
    let cfg = ExperimentConfig::parse(text, "<acceptance>").expect("config parses");
    cfg.validate().expect("config validates");
    cfg
}

/// accuracy_test values keyed by (seed, sweep_value), in row order.
fn test_accuracies(output: &ExperimentOutput, sweep_value: &str) -> Vec<(u64, f64)> {
    output
        .rows
        .iter()
        .filter(|r| r.metric == "accuracy_test" && r.sweep_value == sweep_value)
        .map(|r| (r.seed, r.value))
        .collect()
}

#[test]
fn criterion_01_rw_row_sum_identity() {
    let mut rng = ChaCha12Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for g in 0..100u64 {
        let n = rng.random_range(2..=500);
        let p = rng.random_range(0.002..0.06);
        let graph = Graph::canonical(GraphKind::ErdosRenyi { p }, n, g).unwrap();
        for (lambda, order) in [(1.0, 2), (32.0, 16), (64.0, 64)] {
            let op = NeumannOperator::new(graph.normalize(NormMode::Rw), lambda, order).unwrap();
            let rows = op.row_sums().unwrap();
            worst = worst.max(rows.max_deviation);
            checked += 1;
        }
    }
    report(
        1,
        "rw row-sum identity",
        worst < 1e-10,
        &format!("{checked} graph/filter pairs, max deviation {worst:.3e} (< 1e-10 required)"),
    );
}

#[test]
fn criterion_02_truncation_oracle() {
    let mut rng = ChaCha12Rng::seed_from_u64(202);
    let depths = [4usize, 16, 64];
    let mut worst_margin = f64::INFINITY;
    let mut failures = 0usize;
    for g in 0..20u64 {
        let n = rng.random_range(8..=200);
        let p = rng.random_range(0.02..0.2);
        let lambda = [1.0, 8.0, 32.0][g as usize % 3];
        let graph = Graph::canonical(GraphKind::ErdosRenyi { p }, n, 1000 + g).unwrap();
        let adjacency = graph.normalize(NormMode::Sym);
        let x = Matrix::from_fn(n, 3, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let exact = exact_solve(&adjacency, lambda, &x, n).unwrap();
        let op = NeumannOperator::new(adjacency, lambda, 64).unwrap();
        let truncated = op.propagate_depths(&x, &depths).unwrap();
        let r = op.decay_ratio();
        for (stage, &s) in depths.iter().enumerate() {
            let rel = truncated[stage].sub(&exact).unwrap().frobenius_norm()
                / x.frobenius_norm();
            let bound = r.powi(s as i32 + 1);
            worst_margin = worst_margin.min(bound - rel);
            // Tiny negative margins are roundoff: deep truncations match the
            // exact solve to machine precision and both sides sit near 1e-20.
            if rel > bound + 1e-12 {
                failures += 1;
            }
        }
    }
    report(
        2,
        "sym truncation oracle",
        failures == 0,
        &format!(
            "20 graphs x 3 depths, worst bound margin {worst_margin:.3e} (>= -1e-12 roundoff allowance)"
        ),
    );
}

#[test]
fn criterion_03_case_study() {
    let compute = |kind, n| {
        let graph = Graph::canonical(kind, n, 0).unwrap();
        let op = NeumannOperator::new(graph.normalize(NormMode::Rw), 64.0, 64).unwrap();
        op.connectivity_factor(n, 0, 0).unwrap()
    };
    let isolated = compute(GraphKind::Isolated, 4);
    let complete = compute(GraphKind::Complete, 4);
    let star = compute(GraphKind::Star, 4);
    let ring = compute(GraphKind::Ring, 8);

    let ok = (isolated.tau - 4.0).abs() <= 1e-9
        && (complete.tau - 1.0018).abs() <= 1e-3
        && star.tau > complete.tau
        && (1.0..=8.0).contains(&ring.tau)
        && isolated.predictor > star.predictor
        && star.predictor > ring.predictor
        && complete.predictor < star.predictor
        && complete.predictor < isolated.predictor;
    report(
        3,
        "small-graph case study",
        ok,
        &format!(
            "tau: isolated {:.12}, complete {:.12}, star {:.12}, ring {:.12}; predictors {:.4} > {:.4} > {:.4}, complete lowest of size-4 at {:.4}",
            isolated.tau, complete.tau, star.tau, ring.tau,
            isolated.predictor, star.predictor, ring.predictor, complete.predictor
        ),
    );
}

#[test]
fn criterion_04_concentration_monte_carlo() {
    let graph = Graph::canonical(GraphKind::Ring, 512, 0).unwrap();
    let op = NeumannOperator::new(graph.normalize(NormMode::Rw), 32.0, 16).unwrap();
    let budget = 1.0 / 32.0;
    let mut worst_rate: f64 = 0.0;
    for sigma in [0.5, 1.0, 2.0] {
        let rep = verify_concentration(&op, 32, sigma, 2000, 404, 512).unwrap();
        worst_rate = worst_rate.max(rep.violation_rate);
    }
    report(
        4,
        "concentration Monte Carlo",
        worst_rate <= budget,
        &format!(
            "ring-512, d=32, 2000 trials at sigma in {{0.5, 1, 2}}; worst violation rate {worst_rate:.5} vs budget {budget:.5}"
        ),
    );
}

#[test]
fn criterion_05_inner_max_optimality() {
    let mut rng = ChaCha12Rng::seed_from_u64(505);
    let epsilon = 0.7;
    let mut worst_closed_form_err: f64 = 0.0;
    let mut beaten = 0usize;
    for _ in 0..20 {
        let n = rng.random_range(2..=10);
        let d = rng.random_range(1..=4);
        let f = Matrix::from_fn(n, d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let best = worst_case_delta(&f, epsilon).unwrap();
        let h_star = inner_objective(&best.delta, &f).unwrap();
        let ff_t = f.matmul(&f.transpose()).unwrap();
        worst_closed_form_err =
            worst_closed_form_err.max((h_star - epsilon * ff_t.frobenius_norm()).abs());
        for _ in 0..10_000 {
            let raw = Matrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let mut sym = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    sym.set(i, j, 0.5 * (raw.get(i, j) + raw.get(j, i)));
                }
            }
            let norm = sym.frobenius_norm();
            if norm == 0.0 {
                continue;
            }
            sym.scale(epsilon / norm);
            if inner_objective(&sym, &f).unwrap() > h_star + 1e-12 {
                beaten += 1;
            }
        }
    }
    report(
        5,
        "inner-max closed form",
        beaten == 0 && worst_closed_form_err <= 1e-9,
        &format!(
            "20 instances x 10^4 samples: {beaten} samples beat the closed form; worst |h* - eps*||FF^T||_F| = {worst_closed_form_err:.3e}"
        ),
    );
}

#[test]
fn criterion_06_robust_reduction() {
    let mut rng = ChaCha12Rng::seed_from_u64(606);
    let mut worst_eps0: f64 = 0.0;
    for g in 0..20u64 {
        let n = rng.random_range(4..=30);
        let p = rng.random_range(0.1..0.4);
        let graph = Graph::canonical(GraphKind::ErdosRenyi { p }, n, 2000 + g).unwrap();
        let d = rng.random_range(1..=4);
        let x = Matrix::from_fn(n, d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let lambda = [2.0, 16.0][g as usize % 2];
        let order = [4usize, 16][(g / 2) as usize % 2];
        let base = NeumannOperator::new(graph.normalize(NormMode::Rw), lambda, order).unwrap();
        let plain = base.propagate(&x).unwrap();
        let robust = RobustOperator::new(base, 0.0, SimilarityMode::Dense, &x).unwrap();
        let diff = robust.propagate(&x).unwrap().sub(&plain).unwrap().max_abs();
        worst_eps0 = worst_eps0.max(diff);
    }

    // On a complete graph the edge mask keeps every entry, so masked and
    // dense similarity must agree.
    let graph = Graph::canonical(GraphKind::Complete, 12, 0).unwrap();
    let x = Matrix::from_fn(12, 3, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let mk = |sim| {
        let base = NeumannOperator::new(graph.normalize(NormMode::Rw), 8.0, 12).unwrap();
        RobustOperator::new(base, 0.3, sim, &x).unwrap().propagate(&x).unwrap()
    };
    let masked_gap =
        mk(SimilarityMode::EdgeMasked).sub(&mk(SimilarityMode::Dense)).unwrap().max_abs();

    report(
        6,
        "robust-filter reduction",
        worst_eps0 <= 1e-12 && masked_gap <= 1e-10,
        &format!(
            "eps=0 worst |robust - plain| {worst_eps0:.3e} (<= 1e-12); complete-graph masked-vs-dense {masked_gap:.3e} (<= 1e-10)"
        ),
    );
}

#[test]
fn criterion_07_gradient_and_descent() {
    let mut rng = ChaCha12Rng::seed_from_u64(707);

    // Analytic gradient of the masked squared loss vs central differences.
    let (m, d, c) = (30, 4, 2);
    let z = Matrix::from_fn(m, d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let y = Matrix::from_fn(m, c, |i, j| if i % c == j { 1.0 } else { 0.0 });
    let w = Matrix::from_fn(d, c, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let mask = vec![true; m];
    let loss_at = |w: &Matrix| {
        mse_loss(&z, &y, &mask, &ngc::LinearModel { weights: w.clone() }).unwrap()
    };
    let residual = z.matmul(&w).unwrap().sub(&y).unwrap();
    let mut analytic = z.transpose_matmul(&residual).unwrap();
    analytic.scale(2.0);
    let h = 1e-6;
    let mut fd = Matrix::zeros(d, c);
    for i in 0..d {
        for j in 0..c {
            let mut wp = w.clone();
            wp.set(i, j, w.get(i, j) + h);
            let mut wm = w.clone();
            wm.set(i, j, w.get(i, j) - h);
            fd.set(i, j, (loss_at(&wp) - loss_at(&wm)) / (2.0 * h));
        }
    }
    let rel = fd.sub(&analytic).unwrap().frobenius_norm() / analytic.frobenius_norm();

    // Descent at alpha = 1/L: non-increasing traces, least-squares-level
    // final loss.
    let mut worst_increase: f64 = 0.0;
    let mut worst_excess: f64 = 0.0;
    for _ in 0..10 {
        let (m, d, c) = (60, 5, 3);
        let z = Matrix::from_fn(m, d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let y = Matrix::from_fn(m, c, |i, j| if i % c == j { 1.0 } else { 0.0 });
        let mask = vec![true; m];
        let cfg = TrainConfig { steps: 500, ..TrainConfig::default() };
        let run = train_gd(&z, &y, &mask, &cfg).unwrap();
        for pair in run.loss_trace.windows(2) {
            worst_increase = worst_increase.max(pair[1] - pair[0]);
        }
        let oracle = least_squares_optimum(&z, &y, &mask).unwrap();
        let oracle_loss = mse_loss(&z, &y, &mask, &oracle).unwrap();
        worst_excess = worst_excess.max(run.loss_trace.last().unwrap() - oracle_loss);
    }

    report(
        7,
        "gradient and descent",
        rel <= 1e-5 && worst_increase <= 1e-12 && worst_excess <= 1e-8,
        &format!(
            "finite-difference relative error {rel:.3e} (<= 1e-5); worst trace increase {worst_increase:.3e}; worst final-vs-oracle excess {worst_excess:.3e} (<= 1e-8)"
        ),
    );
}

#[test]
fn criterion_08_gap_trend() {
    // Fixed expected degree 10 at every size, as stated; the probabilities
    // are re-derived per n so the graphs stay equally sparse while n grows.
    let config = cfg("experiment = theorem1_trend
seeds = 0..9
graph.source = generator
graph.kind = sbm
graph.expected_degree = 10
graph.in_out_ratio = 4
data.d = 50
noise.level = 1
train.steps = 500
");
    let output = run_experiment(&config).unwrap();
    let check = output
        .checks
        .items
        .iter()
        .find(|c| c.name == "gap_decreases_with_n")
        .expect("trend check present");
    report(
        8,
        "optimization-gap size trend",
        check.passed,
        &format!(
            "gap decreasing across n = 200 -> 800 -> 2000 in {} (>= 8/10 seeds needed)",
            check.detail
        ),
    );
}

fn classification_pair(base: &str, sweep_value: &str) -> (usize, usize, f64) {
    let ngc_cfg = cfg(&format!("{base}filter.kind = ngc\n"));
    let id_cfg = cfg(&format!("{base}filter.kind = identity\n"));
    let ngc_out = run_experiment(&ngc_cfg).unwrap();
    let id_out = run_experiment(&id_cfg).unwrap();
    let ngc_acc = test_accuracies(&ngc_out, sweep_value);
    let id_acc = test_accuracies(&id_out, sweep_value);
    assert_eq!(ngc_acc.len(), id_acc.len());
    assert!(!ngc_acc.is_empty(), "no accuracy rows for sweep value {sweep_value}");
    let mut wins = 0usize;
    let mut margin_sum = 0.0;
    for ((seed_a, a), (seed_b, b)) in ngc_acc.iter().zip(&id_acc) {
        assert_eq!(seed_a, seed_b);
        if a > b {
            wins += 1;
        }
        margin_sum += a - b;
    }
    (wins, ngc_acc.len(), margin_sum / ngc_acc.len() as f64)
}

const CLASSIFICATION_BASE: &str = "seeds = 0..9
graph.source = generator
graph.kind = sbm
graph.n = 1000
filter.lambda = 32
filter.order = 16
data.d = 50
data.train_per_class = 60
data.val_per_class = 10
";

#[test]
fn criterion_09_denoising_margin() {
    let base = format!("experiment = noise_sweep\n{CLASSIFICATION_BASE}sweep.values = 2\n");
    let (wins, total, margin) = classification_pair(&base, "2.0");
    report(
        9,
        "denoising accuracy margin",
        wins * 10 >= total * 9 && margin >= 0.10,
        &format!(
            "filtered beats identity in {wins}/{total} seeds (>= 9 needed), mean margin {:.1} points (>= 10 needed)",
            margin * 100.0
        ),
    );
}

#[test]
fn criterion_10_depth_sweep() {
    let config = cfg(&format!(
        "experiment = depth_sweep\n{CLASSIFICATION_BASE}noise.level = 2\nsweep.values = 1, 16\n"
    ));
    let output = run_experiment(&config).unwrap();
    let shallow = test_accuracies(&output, "1");
    let deep = test_accuracies(&output, "16");
    assert_eq!(shallow.len(), deep.len());
    let wins = shallow
        .iter()
        .zip(&deep)
        .filter(|((_, s), (_, d))| d >= s)
        .count();
    report(
        10,
        "depth helps under noise",
        wins * 10 >= shallow.len() * 8,
        &format!(
            "order-16 accuracy >= order-1 accuracy in {wins}/{} seeds (>= 8 needed)",
            shallow.len()
        ),
    );
}

#[test]
fn criterion_11_flip_noise() {
    let base = format!(
        "experiment = flip_sweep\n{CLASSIFICATION_BASE}noise.kind = flip\nsweep.values = 0.4\n"
    );
    let (wins, total, margin) = classification_pair(&base, "0.4");
    report(
        11,
        "flip-noise robustness",
        wins * 10 >= total * 9,
        &format!(
            "filtered beats identity at flip 0.4 in {wins}/{total} seeds (>= 9 needed), mean margin {:.1} points",
            margin * 100.0
        ),
    );
}

#[test]
fn criterion_12_citation_dataset() {
    // Optional: needs a user-supplied export of the citation dataset in the
    // four-file layout documented in the README.
    let dir = std::path::Path::new("data/cora");
    let paths = [
        dir.join("edges.txt"),
        dir.join("features.csv"),
        dir.join("labels.csv"),
        dir.join("split.csv"),
    ];
    if paths.iter().any(|p| !p.exists()) {
        println!(
            "criterion 12 (citation dataset): SKIP — no export found at data/cora/{{edges.txt, features.csv, labels.csv, split.csv}}"
        );
        return;
    }
    let as_str = |i: usize| paths[i].to_str().unwrap();
    let data = load_dataset(as_str(0), as_str(1), as_str(2), as_str(3)).unwrap();
    let flipped = flip_features(&data.features, 0.1, 12).unwrap();
    let x = row_normalize(&flipped);
    let op = NeumannOperator::new(data.graph.normalize(NormMode::Sym), 64.0, 32).unwrap();
    let z = op.propagate(&x).unwrap();
    let y = Matrix::from_fn(data.labels.len(), data.classes, |i, j| {
        if data.labels[i] == j {
            1.0
        } else {
            0.0
        }
    });
    let cfg = TrainConfig {
        steps: 100,
        step_size: StepSize::Auto,
        weight_decay: 1e-5,
        ..TrainConfig::default()
    };
    let run = train_gd(&z, &y, &data.masks.train, &cfg).unwrap();
    let acc = evaluate_accuracy(&run.model, &z, &data.labels, &data.masks.test).unwrap();
    report(
        12,
        "citation dataset",
        (acc - 0.775).abs() <= 0.025,
        &format!("test accuracy {:.1} vs 77.5 +/- 2.5", acc * 100.0),
    );
}
