//! The experiment runners behind `ngc run`.
//!
//! [`run_experiment`] turns a validated [`ExperimentConfig`] into tidy
//! result rows plus a set of named pass/fail checks (consumed by the CLI's
//! `--check` flag); [`execute`] additionally writes `results.csv`,
//! `config.effective`, and `manifest.json` to the output directory and maps
//! the outcome to an exit code (0 ok, 2 when a requested check failed).
//!
//! The classification pipeline is always the same ordering:
//! graph → normalize → inject noise → (L1 row-normalize) → propagate →
//! train → evaluate. Sweeps reuse one noise draw per seed across their
//! axis (the draw is scaled or thresholded per sweep value), which pairs
//! the comparisons and removes draw-to-draw variance from within-seed
//! contrasts; seeds provide the independent replicates.

use crate::error::{Error, Result};
use crate::filter::{exact_solve, NeumannOperator, DEFAULT_SOLVE_CAP};
use crate::graph::Graph;
use crate::harness::config::{
    fmt_f64, ExperimentConfig, ExperimentKind, FilterKind, FilterSection, GraphSource,
};
use crate::harness::dataset::load_dataset;
use crate::harness::results::{write_manifest, write_results, ResultRow};
use crate::harness::synth::{synthesize_dataset, FeatureFamily, SynthSpec};
use crate::matrix::Matrix;
use crate::noise::{
    flip_features, optimization_gap, row_normalize, verify_concentration, NoiseKind, NoiseSpec,
    NoisyDataset, SplitMasks,
};
use crate::robust::RobustOperator;
use crate::rng;
use crate::train::{evaluate_accuracy, train_gd, TrainConfig};
use rand_distr::{Distribution, StandardNormal};
use std::path::Path;

/// Exact-τ computation is skipped above this many nodes (τ is then sampled
/// and reported as a lower bound).
pub const TAU_EXACT_CAP: usize = 4096;
/// Rows sampled for τ on graphs above [`TAU_EXACT_CAP`].
const TAU_SAMPLE_ROWS: usize = 256;

/// One named pass/fail outcome of a run.
#[derive(Debug, Clone)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckItem {
    fn new(name: &str, passed: bool, detail: String) -> CheckItem {
        CheckItem { name: name.to_string(), passed, detail }
    }
}

/// All checks of a run.
#[derive(Debug, Clone, Default)]
pub struct CheckOutcome {
    pub items: Vec<CheckItem>,
}

impl CheckOutcome {
    #[must_use]
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|c| c.passed)
    }
}

/// Result rows plus checks, before anything touches the filesystem.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub checks: CheckOutcome,
}

/// Run the configured experiment in memory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::TauReport => run_tau_report(cfg),
        ExperimentKind::VerifyNeumann => run_verify_neumann(cfg),
        ExperimentKind::VerifyLemma1 => run_verify_concentration(cfg),
        ExperimentKind::Theorem1Trend => run_gap_trend(cfg),
        ExperimentKind::NoiseSweep => run_noise_sweep(cfg),
        ExperimentKind::FlipSweep => run_flip_sweep(cfg),
        ExperimentKind::DepthSweep => run_depth_sweep(cfg),
        ExperimentKind::RownormAblation => run_rownorm_ablation(cfg),
    }
}

/// Run and persist: writes `results.csv`, `config.effective`, and
/// `manifest.json` into `cfg.output`, prints a short summary, and returns
/// the process exit code (0, or 2 when `check` was requested and failed).
pub fn execute(cfg: &ExperimentConfig, check: bool) -> Result<i32> {
    let output = run_experiment(cfg)?;
    let dir = Path::new(&cfg.output);
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    write_results(&dir.join("results.csv"), &output.rows)?;
    let effective = dir.join("config.effective");
    std::fs::write(&effective, cfg.to_canonical_string())
        .map_err(|e| Error::io(effective.display().to_string(), e))?;
    write_manifest(&dir.join("manifest.json"), cfg)?;
    println!(
        "{}: wrote {} rows to {}",
        cfg.experiment,
        output.rows.len(),
        dir.join("results.csv").display()
    );
    for item in &output.checks.items {
        println!(
            "check {}: {} ({})",
            item.name,
            if item.passed { "PASS" } else { "FAIL" },
            item.detail
        );
    }
    if check && !output.checks.all_passed() {
        return Ok(2);
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

/// A dataset ready for the classification pipeline, whatever its origin.
struct BaseData {
    graph: Graph,
    clean: Matrix,
    labels: Vec<usize>,
    classes: usize,
    masks: SplitMasks,
    binary: bool,
}

/// Materialize the per-seed dataset: loaded from files, or synthesized on a
/// block model (classification experiments always use SBM structure).
fn base_data(cfg: &ExperimentConfig, family: FeatureFamily, n: usize, seed: u64) -> Result<BaseData> {
    if cfg.graph.source == GraphSource::Files {
        let data = load_dataset(
            &cfg.graph.edges,
            &cfg.graph.features,
            &cfg.graph.labels,
            &cfg.graph.split,
        )?;
        return Ok(BaseData {
            graph: data.graph,
            clean: data.features,
            labels: data.labels,
            classes: data.classes,
            masks: data.masks,
            binary: data.binary,
        });
    }
    let (p_in, p_out) = cfg.graph.sbm_probabilities(n)?;
    let spec = SynthSpec {
        n,
        blocks: cfg.graph.blocks,
        p_in,
        p_out,
        d: cfg.data.d,
        family,
        sigma_feat: cfg.data.sigma_feat,
        bern_high: cfg.data.bern_high,
        bern_low: cfg.data.bern_low,
        train_per_class: cfg.data.train_per_class,
        val_per_class: cfg.data.val_per_class,
    };
    let data = synthesize_dataset(&spec, seed)?;
    Ok(BaseData {
        graph: data.graph,
        clean: data.clean,
        labels: data.labels,
        classes: data.classes,
        masks: data.masks,
        binary: family == FeatureFamily::Bernoulli,
    })
}

fn train_config(cfg: &ExperimentConfig) -> TrainConfig {
    TrainConfig {
        step_size: cfg.train.step_size,
        steps: cfg.train.steps,
        enforce_step_rule: true,
        weight_decay: cfg.train.weight_decay,
    }
}

/// Propagate observed features through the configured filter.
fn apply_filter(filter: &FilterSection, graph: &Graph, x: &Matrix) -> Result<Matrix> {
    match filter.kind {
        FilterKind::Identity => Ok(x.clone()),
        FilterKind::Ngc => {
            let op = NeumannOperator::new(graph.normalize(filter.mode), filter.lambda, filter.order)?;
            op.propagate(x)
        }
        FilterKind::Rngc => {
            let base =
                NeumannOperator::new(graph.normalize(filter.mode), filter.lambda, filter.order)?;
            let robust = RobustOperator::new(base, filter.epsilon, filter.similarity, x)?;
            robust.propagate_features()
        }
    }
}

struct PipelineScores {
    accuracy_test: f64,
    accuracy_val: f64,
    train_loss: f64,
}

/// Train on filtered features, evaluate accuracy on val/test masks.
fn classify(
    cfg: &ExperimentConfig,
    data: &BaseData,
    observed: &Matrix,
) -> Result<PipelineScores> {
    let x = if cfg.noise.row_normalize { row_normalize(observed) } else { observed.clone() };
    let z = apply_filter(&cfg.filter, &data.graph, &x)?;
    let y = Matrix::from_fn(data.clean.rows(), data.classes, |i, j| {
        if data.labels[i] == j {
            1.0
        } else {
            0.0
        }
    });
    let run = train_gd(&z, &y, &data.masks.train, &train_config(cfg))?;
    Ok(PipelineScores {
        accuracy_test: evaluate_accuracy(&run.model, &z, &data.labels, &data.masks.test)?,
        accuracy_val: evaluate_accuracy(&run.model, &z, &data.labels, &data.masks.val)?,
        train_loss: *run.loss_trace.last().unwrap_or(&f64::NAN),
    })
}

fn push(rows: &mut Vec<ResultRow>, cfg: &ExperimentConfig, seed: u64, sweep: &str, sv: &str, metric: &str, value: f64) {
    rows.push(ResultRow::new(cfg.experiment.as_str(), seed, sweep, sv, metric, value));
}

fn pass_fraction_item(name: &str, hits: usize, total: usize, needed: f64) -> CheckItem {
    let frac = hits as f64 / total.max(1) as f64;
    CheckItem::new(
        name,
        frac >= needed - 1e-12,
        format!("{hits}/{total} seeds ({:.0}% needed)", needed * 100.0),
    )
}

// ---------------------------------------------------------------------------
// tau_report
// ---------------------------------------------------------------------------

fn tau_rows_for_graph(
    cfg: &ExperimentConfig,
    rows: &mut Vec<ResultRow>,
    seed: u64,
    tag: &str,
    graph: &Graph,
) -> Result<(f64, f64, bool)> {
    let n = graph.node_count();
    let op = NeumannOperator::new(graph.normalize(cfg.filter.mode), cfg.filter.lambda, cfg.filter.order)?;
    let report = if n <= TAU_EXACT_CAP {
        op.connectivity_factor(TAU_EXACT_CAP, 0, seed)?
    } else {
        op.connectivity_factor(TAU_EXACT_CAP, TAU_SAMPLE_ROWS.min(n), seed)?
    };
    push(rows, cfg, seed, "graph", tag, "tau", report.tau);
    push(rows, cfg, seed, "graph", tag, "predictor", report.predictor);
    push(rows, cfg, seed, "graph", tag, "tau_over_n", report.tau / n as f64);
    push(rows, cfg, seed, "graph", tag, "tau_exact", f64::from(report.exact));
    Ok((report.tau, report.predictor, report.exact))
}

fn run_tau_report(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    use crate::graph::GraphKind;
    let mut rows = Vec::new();
    let mut checks = CheckOutcome::default();
    match cfg.graph.source {
        GraphSource::CaseStudy => {
            // Deterministic graphs: one pass, first seed labels the rows.
            let seed = cfg.seeds[0];
            let suite: [(&str, GraphKind, usize); 4] = [
                ("isolated4", GraphKind::Isolated, 4),
                ("complete4", GraphKind::Complete, 4),
                ("star4", GraphKind::Star, 4),
                ("ring8", GraphKind::Ring, 8),
            ];
            let mut tau = std::collections::HashMap::new();
            let mut pred = std::collections::HashMap::new();
            for (tag, kind, n) in suite {
                let graph = Graph::canonical(kind, n, seed)?;
                let (t, p, _) = tau_rows_for_graph(cfg, &mut rows, seed, tag, &graph)?;
                tau.insert(tag, t);
                pred.insert(tag, p);
            }
            checks.items.push(CheckItem::new(
                "isolated_tau_is_n",
                (tau["isolated4"] - 4.0).abs() <= 1e-9,
                format!("tau(isolated4) = {}", fmt_f64(tau["isolated4"])),
            ));
            checks.items.push(CheckItem::new(
                "ring_tau_in_range",
                (1.0..=8.0).contains(&tau["ring8"]),
                format!("tau(ring8) = {}", fmt_f64(tau["ring8"])),
            ));
            // The reference values and orderings below are calibrated to the
            // canonical case-study setting λ = S = 64; other settings still
            // get the structural checks above.
            if (cfg.filter.lambda - 64.0).abs() < 1e-12 && cfg.filter.order == 64 {
                checks.items.push(CheckItem::new(
                    "complete_tau_near_one",
                    (tau["complete4"] - 1.0018).abs() <= 1e-3,
                    format!("tau(complete4) = {}", fmt_f64(tau["complete4"])),
                ));
                checks.items.push(CheckItem::new(
                    "star_above_complete",
                    tau["star4"] > tau["complete4"],
                    format!("tau(star4) = {} vs tau(complete4) = {}", fmt_f64(tau["star4"]), fmt_f64(tau["complete4"])),
                ));
                checks.items.push(CheckItem::new(
                    "predictor_ordering_size4",
                    pred["isolated4"] > pred["star4"] && pred["star4"] > pred["complete4"],
                    format!(
                        "predictor isolated {} > star {} > complete {}",
                        fmt_f64(pred["isolated4"]),
                        fmt_f64(pred["star4"]),
                        fmt_f64(pred["complete4"])
                    ),
                ));
                checks.items.push(CheckItem::new(
                    "star_predictor_above_ring",
                    pred["star4"] > pred["ring8"],
                    format!("predictor star4 {} vs ring8 {}", fmt_f64(pred["star4"]), fmt_f64(pred["ring8"])),
                ));
            }
        }
        GraphSource::Files => {
            let data = load_dataset(
                &cfg.graph.edges,
                &cfg.graph.features,
                &cfg.graph.labels,
                &cfg.graph.split,
            )?;
            tau_rows_for_graph(cfg, &mut rows, cfg.seeds[0], "file", &data.graph)?;
        }
        GraphSource::Generator => {
            let tag = format!("{}{}", cfg.graph.kind.as_str(), cfg.graph.n);
            for &seed in &cfg.seeds {
                let graph = Graph::canonical(cfg.graph.graph_kind(cfg.graph.n)?, cfg.graph.n, seed)?;
                tau_rows_for_graph(cfg, &mut rows, seed, &tag, &graph)?;
            }
        }
    }
    if cfg.filter.mode == crate::graph::NormMode::Rw {
        let in_range = rows
            .iter()
            .filter(|r| r.metric == "tau")
            .all(|r| r.value >= 1.0 - 1e-9);
        checks.items.push(CheckItem::new(
            "tau_at_least_one",
            in_range,
            "rw-mode tau is bounded below by 1".into(),
        ));
    }
    Ok(ExperimentOutput { rows, checks })
}

// ---------------------------------------------------------------------------
// verify_neumann
// ---------------------------------------------------------------------------

fn run_verify_neumann(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut rows = Vec::new();
    let mut max_dev = 0.0f64;
    let mut worst_margin = f64::INFINITY;
    let mut truncation_checked = false;
    for &seed in &cfg.seeds {
        let graph = match cfg.graph.source {
            GraphSource::Files => {
                load_dataset(&cfg.graph.edges, &cfg.graph.features, &cfg.graph.labels, &cfg.graph.split)?.graph
            }
            _ => Graph::canonical(cfg.graph.graph_kind(cfg.graph.n)?, cfg.graph.n, seed)?,
        };
        let n = graph.node_count();

        // Row-sum identity (exact in rw mode).
        let rw = NeumannOperator::new(
            graph.normalize(crate::graph::NormMode::Rw),
            cfg.filter.lambda,
            cfg.filter.order,
        )?;
        let sums = rw.row_sums()?;
        push(&mut rows, cfg, seed, "check", "row_sum", "row_sum_constant", sums.expected);
        push(&mut rows, cfg, seed, "check", "row_sum", "row_sum_max_dev", sums.max_deviation);
        max_dev = max_dev.max(sums.max_deviation);

        // Truncation error against the exact solve (certified in sym mode).
        if n <= DEFAULT_SOLVE_CAP {
            truncation_checked = true;
            let sym = NeumannOperator::new(
                graph.normalize(crate::graph::NormMode::Sym),
                cfg.filter.lambda,
                cfg.filter.order,
            )?;
            let mut feat_rng = rng::stream(seed, "verify.features");
            let x = Matrix::from_fn(n, cfg.data.d, |_, _| StandardNormal.sample(&mut feat_rng));
            let truncated = sym.propagate(&x)?;
            let exact = exact_solve(sym.adjacency(), cfg.filter.lambda, &x, DEFAULT_SOLVE_CAP)?;
            let ratio = truncated.sub(&exact)?.frobenius_norm() / x.frobenius_norm();
            let bound = sym.decay_ratio().powi(cfg.filter.order as i32 + 1);
            push(&mut rows, cfg, seed, "check", "truncation", "truncation_ratio", ratio);
            push(&mut rows, cfg, seed, "check", "truncation", "truncation_bound", bound);
            worst_margin = worst_margin.min(bound - ratio);
        }
    }
    let mut checks = CheckOutcome::default();
    checks.items.push(CheckItem::new(
        "row_sum_identity",
        max_dev < 1e-10,
        format!("max deviation {}", fmt_f64(max_dev)),
    ));
    if truncation_checked {
        checks.items.push(CheckItem::new(
            "truncation_bound",
            worst_margin >= -1e-12,
            format!("worst margin (bound - ratio) {}", fmt_f64(worst_margin)),
        ));
    }
    Ok(ExperimentOutput { rows, checks })
}

// ---------------------------------------------------------------------------
// verify_lemma1 (concentration)
// ---------------------------------------------------------------------------

fn run_verify_concentration(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let sigmas = cfg.sweep_values();
    for &s in &sigmas {
        if s <= 0.0 {
            return Err(Error::InvalidConfig {
                key: "sweep.values".into(),
                reason: format!("concentration check needs sigma > 0, got {s}"),
            });
        }
    }
    let mut rows = Vec::new();
    let mut worst_rate = 0.0f64;
    for &seed in &cfg.seeds {
        let graph = match cfg.graph.source {
            GraphSource::Files => {
                load_dataset(&cfg.graph.edges, &cfg.graph.features, &cfg.graph.labels, &cfg.graph.split)?.graph
            }
            _ => Graph::canonical(cfg.graph.graph_kind(cfg.graph.n)?, cfg.graph.n, seed)?,
        };
        let op = NeumannOperator::new(graph.normalize(cfg.filter.mode), cfg.filter.lambda, cfg.filter.order)?;
        for &sigma in &sigmas {
            let report = verify_concentration(
                &op,
                cfg.data.d,
                sigma,
                cfg.noise.trials,
                seed,
                TAU_EXACT_CAP.max(graph.node_count()),
            )?;
            let sv = fmt_f64(sigma);
            let trials = report.trials as f64;
            let mean_peak = report.observed.iter().sum::<f64>() / trials;
            let max_peak = report.observed.iter().cloned().fold(0.0, f64::max);
            let mean_frob = report.frobenius.iter().sum::<f64>() / trials;
            push(&mut rows, cfg, seed, "sigma", &sv, "violation_rate", report.violation_rate);
            push(&mut rows, cfg, seed, "sigma", &sv, "bound", report.bound);
            push(&mut rows, cfg, seed, "sigma", &sv, "mean_peak_sq", mean_peak);
            push(&mut rows, cfg, seed, "sigma", &sv, "max_peak_sq", max_peak);
            push(&mut rows, cfg, seed, "sigma", &sv, "mean_frobenius_sq", mean_frob);
            push(&mut rows, cfg, seed, "sigma", &sv, "tau", report.tau);
            worst_rate = worst_rate.max(report.violation_rate);
        }
    }
    let budget = 1.0 / cfg.data.d as f64;
    let checks = CheckOutcome {
        items: vec![CheckItem::new(
            "violation_rate_within_budget",
            worst_rate <= budget,
            format!("worst rate {} vs budget 1/d = {}", fmt_f64(worst_rate), fmt_f64(budget)),
        )],
    };
    Ok(ExperimentOutput { rows, checks })
}

// ---------------------------------------------------------------------------
// theorem1_trend (optimization gap vs n)
// ---------------------------------------------------------------------------

fn run_gap_trend(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    if cfg.graph.source != GraphSource::Generator {
        return Err(Error::InvalidConfig {
            key: "graph.source".into(),
            reason: "the gap trend sweeps the graph size and requires generated data".into(),
        });
    }
    let sizes: Vec<usize> = cfg.sweep_values().iter().map(|&v| v as usize).collect();
    let mut rows = Vec::new();
    let mut decreasing_seeds = 0usize;
    for &seed in &cfg.seeds {
        let mut gaps = Vec::with_capacity(sizes.len());
        for &n in &sizes {
            let data = base_data(cfg, FeatureFamily::Gaussian, n, seed)?;
            let noise_spec = NoiseSpec {
                kind: NoiseKind::Gaussian,
                sigma: cfg.noise.sigma,
                level: cfg.noise.level,
                flip_prob: 0.0,
            };
            let (_, observed) = noise_spec.apply(&data.clean, seed)?;
            let (clean_used, observed_used) = if cfg.noise.row_normalize {
                (row_normalize(&data.clean), row_normalize(&observed))
            } else {
                (data.clean.clone(), observed)
            };
            let noise_used = observed_used.sub(&clean_used)?;
            let dataset = NoisyDataset::new(
                clean_used,
                noise_used,
                observed_used,
                data.labels.clone(),
                data.classes,
                data.masks.clone(),
            )?;
            let op = NeumannOperator::new(
                data.graph.normalize(cfg.filter.mode),
                cfg.filter.lambda,
                cfg.filter.order,
            )?;
            let report = optimization_gap(&op, &dataset, &train_config(cfg), n)?;
            let sv = n.to_string();
            push(&mut rows, cfg, seed, "n", &sv, "gap", report.gap);
            push(&mut rows, cfg, seed, "n", &sv, "gap_per_row", report.gap_per_row);
            push(&mut rows, cfg, seed, "n", &sv, "predictor", report.predictor);
            push(&mut rows, cfg, seed, "n", &sv, "tau", report.tau);
            push(&mut rows, cfg, seed, "n", &sv, "weight_norm", report.weight_norm);
            push(&mut rows, cfg, seed, "n", &sv, "clean_optimum_loss", report.clean_optimum_loss);
            gaps.push(report.gap);
        }
        if gaps.windows(2).all(|w| w[1] < w[0]) {
            decreasing_seeds += 1;
        }
    }
    let checks = CheckOutcome {
        items: vec![pass_fraction_item(
            "gap_decreases_with_n",
            decreasing_seeds,
            cfg.seeds.len(),
            0.8,
        )],
    };
    Ok(ExperimentOutput { rows, checks })
}

// ---------------------------------------------------------------------------
// noise_sweep / flip_sweep / depth_sweep / rownorm_ablation
// ---------------------------------------------------------------------------

fn accuracy_sanity_item(rows: &[ResultRow]) -> CheckItem {
    let ok = rows
        .iter()
        .filter(|r| r.metric.starts_with("accuracy"))
        .all(|r| r.value.is_finite() && (0.0..=1.0).contains(&r.value));
    CheckItem::new("accuracies_valid", ok, "all accuracies finite and within [0, 1]".into())
}

fn run_noise_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let levels = cfg.sweep_values();
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let data = base_data(cfg, FeatureFamily::Gaussian, cfg.graph.n, seed)?;
        for &xi in &levels {
            let noise_spec =
                NoiseSpec { kind: NoiseKind::Gaussian, sigma: cfg.noise.sigma, level: xi, flip_prob: 0.0 };
            let (_, observed) = noise_spec.apply(&data.clean, seed)?;
            let scores = classify(cfg, &data, &observed)?;
            let sv = fmt_f64(xi);
            push(&mut rows, cfg, seed, "xi", &sv, "accuracy_test", scores.accuracy_test);
            push(&mut rows, cfg, seed, "xi", &sv, "accuracy_val", scores.accuracy_val);
            push(&mut rows, cfg, seed, "xi", &sv, "train_loss", scores.train_loss);
        }
    }
    let checks = CheckOutcome { items: vec![accuracy_sanity_item(&rows)] };
    Ok(ExperimentOutput { rows, checks })
}

fn run_flip_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let probs = cfg.sweep_values();
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let data = base_data(cfg, FeatureFamily::Bernoulli, cfg.graph.n, seed)?;
        if !data.binary {
            return Err(Error::InvalidConfig {
                key: "graph.features".into(),
                reason: "flip_sweep requires binary 0/1 features".into(),
            });
        }
        for &p in &probs {
            let observed = flip_features(&data.clean, p, seed)?;
            let scores = classify(cfg, &data, &observed)?;
            let sv = fmt_f64(p);
            push(&mut rows, cfg, seed, "p", &sv, "accuracy_test", scores.accuracy_test);
            push(&mut rows, cfg, seed, "p", &sv, "accuracy_val", scores.accuracy_val);
            push(&mut rows, cfg, seed, "p", &sv, "train_loss", scores.train_loss);
        }
    }
    let checks = CheckOutcome { items: vec![accuracy_sanity_item(&rows)] };
    Ok(ExperimentOutput { rows, checks })
}

fn run_depth_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut depths: Vec<usize> = cfg.sweep_values().iter().map(|&v| v as usize).collect();
    depths.sort_unstable();
    depths.dedup();
    if depths.is_empty() {
        return Err(Error::InvalidConfig {
            key: "sweep.values".into(),
            reason: "depth_sweep needs at least one depth".into(),
        });
    }
    let mut rows = Vec::new();
    let mut deep_wins = 0usize;
    for &seed in &cfg.seeds {
        let data = base_data(cfg, FeatureFamily::Gaussian, cfg.graph.n, seed)?;
        let noise_spec = NoiseSpec {
            kind: NoiseKind::Gaussian,
            sigma: cfg.noise.sigma,
            level: cfg.noise.level,
            flip_prob: 0.0,
        };
        let (_, observed) = noise_spec.apply(&data.clean, seed)?;
        let x = if cfg.noise.row_normalize { row_normalize(&observed) } else { observed };
        // One coefficient sweep produces every requested depth.
        let op = NeumannOperator::new(
            data.graph.normalize(cfg.filter.mode),
            cfg.filter.lambda,
            *depths.last().unwrap(),
        )?;
        let snapshots = op.propagate_depths(&x, &depths)?;
        let y = Matrix::from_fn(data.clean.rows(), data.classes, |i, j| {
            if data.labels[i] == j {
                1.0
            } else {
                0.0
            }
        });
        let mut first_acc = None;
        let mut last_acc = 0.0;
        for (&depth, z) in depths.iter().zip(&snapshots) {
            let run = train_gd(z, &y, &data.masks.train, &train_config(cfg))?;
            let acc_test = evaluate_accuracy(&run.model, z, &data.labels, &data.masks.test)?;
            let acc_val = evaluate_accuracy(&run.model, z, &data.labels, &data.masks.val)?;
            let sv = depth.to_string();
            push(&mut rows, cfg, seed, "depth", &sv, "accuracy_test", acc_test);
            push(&mut rows, cfg, seed, "depth", &sv, "accuracy_val", acc_val);
            push(&mut rows, cfg, seed, "depth", &sv, "train_loss", *run.loss_trace.last().unwrap());
            first_acc.get_or_insert(acc_test);
            last_acc = acc_test;
        }
        if last_acc >= first_acc.unwrap_or(0.0) {
            deep_wins += 1;
        }
    }
    let mut checks = CheckOutcome { items: vec![accuracy_sanity_item(&rows)] };
    if depths.len() > 1 {
        checks.items.push(pass_fraction_item("deepest_at_least_shallowest", deep_wins, cfg.seeds.len(), 0.8));
    }
    Ok(ExperimentOutput { rows, checks })
}

fn run_rownorm_ablation(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let levels = cfg.sweep_values();
    let mut rows = Vec::new();
    let mut improved = 0usize;
    let mut trials = 0usize;
    for &seed in &cfg.seeds {
        let data = base_data(cfg, FeatureFamily::Gaussian, cfg.graph.n, seed)?;
        let op = NeumannOperator::new(
            data.graph.normalize(cfg.filter.mode),
            cfg.filter.lambda,
            cfg.filter.order,
        )?;
        let y = Matrix::from_fn(data.clean.rows(), data.classes, |i, j| {
            if data.labels[i] == j {
                1.0
            } else {
                0.0
            }
        });
        for &xi in &levels {
            let noise_spec =
                NoiseSpec { kind: NoiseKind::Gaussian, sigma: cfg.noise.sigma, level: xi, flip_prob: 0.0 };
            let (noise, observed) = noise_spec.apply(&data.clean, seed)?;
            // Filtered-noise distortion with and without L1 row scaling.
            let raw_distortion = op.propagate(&noise)?.frobenius_norm();
            let norm_diff = row_normalize(&observed).sub(&row_normalize(&data.clean))?;
            let norm_distortion = op.propagate(&norm_diff)?.frobenius_norm();
            trials += 1;
            if norm_distortion <= raw_distortion {
                improved += 1;
            }
            // Downstream accuracy both ways (bypassing cfg.noise.row_normalize).
            let acc = |x: &Matrix| -> Result<f64> {
                let z = op.propagate(x)?;
                let run = train_gd(&z, &y, &data.masks.train, &train_config(cfg))?;
                evaluate_accuracy(&run.model, &z, &data.labels, &data.masks.test)
            };
            let accuracy_raw = acc(&observed)?;
            let accuracy_norm = acc(&row_normalize(&observed))?;
            let sv = fmt_f64(xi);
            push(&mut rows, cfg, seed, "xi", &sv, "distortion_raw", raw_distortion);
            push(&mut rows, cfg, seed, "xi", &sv, "distortion_norm", norm_distortion);
            push(&mut rows, cfg, seed, "xi", &sv, "rownorm_improved", f64::from(norm_distortion <= raw_distortion));
            push(&mut rows, cfg, seed, "xi", &sv, "accuracy_raw", accuracy_raw);
            push(&mut rows, cfg, seed, "xi", &sv, "accuracy_norm", accuracy_norm);
        }
    }
    let frac = improved as f64 / trials.max(1) as f64;
    let checks = CheckOutcome {
        items: vec![CheckItem::new(
            "rownorm_shrinks_distortion",
            frac >= 0.9,
            format!("improved on {improved}/{trials} trials (soft property, 90% needed)"),
        )],
    };
    Ok(ExperimentOutput { rows, checks })
}
