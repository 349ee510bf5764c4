//! Experiment configuration: a flat `key.path = value` text format.
//!
//! One experiment is one file. Every key has a default, so the minimal
//! config is a single `experiment = ...` line; unknown keys are rejected
//! with their line number rather than ignored. Full-line comments start
//! with `#`; values run to the end of the line.
//!
//! ```text
//! experiment = noise_sweep
//! seeds = 0..9
//! graph.kind = sbm
//! graph.n = 1000
//! filter.lambda = 32
//! sweep.values = 0, 0.5, 1, 2, 4
//! ```
//!
//! [`ExperimentConfig::to_canonical_string`] serializes every field in a
//! fixed order; parsing that text reproduces the config exactly (the
//! round-trip contract), and the harness writes it next to each result set
//! so a run is reproducible from its output directory alone.

use crate::error::{Error, Result};
use crate::graph::{GraphKind, NormMode};
use crate::noise::NoiseKind;
use crate::robust::SimilarityMode;
use crate::train::StepSize;
use std::collections::HashSet;
use std::fmt;

/// The eight runnable experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Connectivity factor τ (and its predictor) per graph.
    TauReport,
    /// Row-sum identity and truncation-error checks for the filter.
    VerifyNeumann,
    /// Monte-Carlo check of the noise concentration bound.
    VerifyLemma1,
    /// Optimization gap vs. graph size (the shrinking-gap trend).
    Theorem1Trend,
    /// Classification accuracy across Gaussian noise levels.
    NoiseSweep,
    /// Classification accuracy across flip probabilities (binary features).
    FlipSweep,
    /// Classification accuracy across truncation orders S.
    DepthSweep,
    /// Effect of L1 row normalization under heavy noise.
    RownormAblation,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::TauReport,
        ExperimentKind::VerifyNeumann,
        ExperimentKind::VerifyLemma1,
        ExperimentKind::Theorem1Trend,
        ExperimentKind::NoiseSweep,
        ExperimentKind::FlipSweep,
        ExperimentKind::DepthSweep,
        ExperimentKind::RownormAblation,
    ];

    #[must_use]
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::TauReport => "tau_report",
            ExperimentKind::VerifyNeumann => "verify_neumann",
            ExperimentKind::VerifyLemma1 => "verify_lemma1",
            ExperimentKind::Theorem1Trend => "theorem1_trend",
            ExperimentKind::NoiseSweep => "noise_sweep",
            ExperimentKind::FlipSweep => "flip_sweep",
            ExperimentKind::DepthSweep => "depth_sweep",
            ExperimentKind::RownormAblation => "rownorm_ablation",
        }
    }

    fn parse(s: &str) -> Option<ExperimentKind> {
        Self::ALL.iter().copied().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the graph (and any dataset) comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphSource {
    /// Generate from `graph.kind` and its parameters.
    Generator,
    /// Load from the four dataset files (`graph.edges`, `.features`,
    /// `.labels`, `.split`).
    Files,
    /// The fixed four-graph τ case study (isolated-4, complete-4, star-4,
    /// ring-8); only meaningful for `tau_report`.
    CaseStudy,
}

impl GraphSource {
    #[must_use]
    pub fn as_str(self) -> &'static str {
        match self {
            GraphSource::Generator => "generator",
            GraphSource::Files => "files",
            GraphSource::CaseStudy => "case_study",
        }
    }
}

/// Generator family named by `graph.kind`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Isolated,
    Star,
    Complete,
    Ring,
    Er,
    Sbm,
}

impl GeneratorKind {
    #[must_use]
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorKind::Isolated => "isolated",
            GeneratorKind::Star => "star",
            GeneratorKind::Complete => "complete",
            GeneratorKind::Ring => "ring",
            GeneratorKind::Er => "er",
            GeneratorKind::Sbm => "sbm",
        }
    }
}

/// Which propagation the pipeline uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    /// Truncated Neumann propagation.
    Ngc,
    /// The robust (similarity-corrected) variant.
    Rngc,
    /// No propagation — features pass through untouched (the baseline).
    Identity,
}

impl FilterKind {
    #[must_use]
    pub fn as_str(self) -> &'static str {
        match self {
            FilterKind::Ngc => "ngc",
            FilterKind::Rngc => "rngc",
            FilterKind::Identity => "identity",
        }
    }
}

/// `graph.*` keys.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSection {
    pub source: GraphSource,
    pub kind: GeneratorKind,
    pub n: usize,
    /// Edge probability (`er`).
    pub p: f64,
    /// Block count (`sbm`).
    pub blocks: usize,
    /// Explicit block-model probabilities; leave both at 0 to derive them
    /// from `expected_degree` and `in_out_ratio` at the current `n`.
    pub p_in: f64,
    pub p_out: f64,
    /// Target mean degree used when deriving block probabilities.
    pub expected_degree: f64,
    /// `p_in / p_out` used when deriving block probabilities.
    pub in_out_ratio: f64,
    /// Dataset file paths (`files` source).
    pub edges: String,
    pub features: String,
    pub labels: String,
    pub split: String,
}

impl Default for GraphSection {
    fn default() -> Self {
        GraphSection {
            source: GraphSource::Generator,
            kind: GeneratorKind::Ring,
            n: 512,
            p: 0.02,
            blocks: 2,
            p_in: 0.0,
            p_out: 0.0,
            expected_degree: 10.0,
            in_out_ratio: 4.0,
            edges: String::new(),
            features: String::new(),
            labels: String::new(),
            split: String::new(),
        }
    }
}

impl GraphSection {
    /// Resolve the generator parameters into a [`GraphKind`] at node count
    /// `n` (callers sweeping over sizes pass each size in turn). Block-model
    /// probabilities left at 0 are derived so the expected degree matches
    /// `expected_degree` with `p_in/p_out = in_out_ratio`.
    pub fn graph_kind(&self, n: usize) -> Result<GraphKind> {
        Ok(match self.kind {
            GeneratorKind::Isolated => GraphKind::Isolated,
            GeneratorKind::Star => GraphKind::Star,
            GeneratorKind::Complete => GraphKind::Complete,
            GeneratorKind::Ring => GraphKind::Ring,
            GeneratorKind::Er => GraphKind::ErdosRenyi { p: self.p },
            GeneratorKind::Sbm => {
                let (p_in, p_out) = self.block_probabilities(n)?;
                GraphKind::Sbm { blocks: self.blocks, p_in, p_out }
            }
        })
    }

    /// Block-model probabilities at node count `n`: the explicit
    /// `(p_in, p_out)` when both are set, otherwise the pair derived from
    /// `expected_degree` and `in_out_ratio`. Classification experiments use
    /// this directly (their datasets are always block models).
    pub fn sbm_probabilities(&self, n: usize) -> Result<(f64, f64)> {
        self.block_probabilities(n)
    }

    fn block_probabilities(&self, n: usize) -> Result<(f64, f64)> {
        let explicit = (self.p_in > 0.0, self.p_out > 0.0);
        match explicit {
            (true, true) => Ok((self.p_in, self.p_out)),
            (false, false) => {
                let size = n as f64 / self.blocks as f64;
                let within = (size - 1.0).max(0.0);
                let across = n as f64 - size;
                let denom = self.in_out_ratio * within + across;
                if denom <= 0.0 {
                    return Err(Error::InvalidConfig {
                        key: "graph.expected_degree".into(),
                        reason: format!("cannot place degree {} on {} nodes", self.expected_degree, n),
                    });
                }
                let p_out = self.expected_degree / denom;
                let p_in = self.in_out_ratio * p_out;
                if p_in > 1.0 || p_out > 1.0 {
                    return Err(Error::InvalidConfig {
                        key: "graph.expected_degree".into(),
                        reason: format!(
                            "degree {} at n = {n} needs p_in = {p_in:.4} > 1",
                            self.expected_degree
                        ),
                    });
                }
                Ok((p_in, p_out))
            }
            _ => Err(Error::InvalidConfig {
                key: "graph.p_in".into(),
                reason: "set both graph.p_in and graph.p_out, or neither".into(),
            }),
        }
    }
}

/// `filter.*` keys.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSection {
    pub kind: FilterKind,
    pub lambda: f64,
    pub order: usize,
    /// Robust-variant radius ε (`rngc` only).
    pub epsilon: f64,
    pub mode: NormMode,
    pub similarity: SimilarityMode,
}

impl Default for FilterSection {
    fn default() -> Self {
        FilterSection {
            kind: FilterKind::Ngc,
            lambda: 32.0,
            order: 16,
            epsilon: 0.1,
            mode: NormMode::Rw,
            similarity: SimilarityMode::Dense,
        }
    }
}

/// `noise.*` keys.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSection {
    pub kind: NoiseKind,
    pub sigma: f64,
    /// Noise scale ξ.
    pub level: f64,
    pub flip_prob: f64,
    /// L1-normalize feature rows after noise injection (ablation flag).
    pub row_normalize: bool,
    /// Monte-Carlo trials for the concentration check.
    pub trials: usize,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection {
            kind: NoiseKind::Gaussian,
            sigma: 1.0,
            level: 1.0,
            flip_prob: 0.0,
            row_normalize: true,
            trials: 2000,
        }
    }
}

/// `data.*` keys (synthetic dataset geometry).
#[derive(Debug, Clone, PartialEq)]
pub struct DataSection {
    /// Feature dimension.
    pub d: usize,
    /// Within-class feature standard deviation (Gaussian family).
    pub sigma_feat: f64,
    /// Bernoulli on-probability for a class's own coordinates.
    pub bern_high: f64,
    /// Bernoulli on-probability for other classes' coordinates.
    pub bern_low: f64,
    pub train_per_class: usize,
    pub val_per_class: usize,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            d: 50,
            sigma_feat: 1.0,
            bern_high: 0.6,
            bern_low: 0.1,
            train_per_class: 20,
            val_per_class: 30,
        }
    }
}

/// `train.*` keys.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSection {
    pub step_size: StepSize,
    pub steps: usize,
    pub weight_decay: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection { step_size: StepSize::Auto, steps: 500, weight_decay: 0.0 }
    }
}

/// A fully-defaulted experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seeds: Vec<u64>,
    /// Output directory for `results.csv`, `config.effective`, `manifest.json`.
    pub output: String,
    pub graph: GraphSection,
    pub filter: FilterSection,
    pub noise: NoiseSection,
    pub data: DataSection,
    pub train: TrainSection,
    /// The swept axis (meaning depends on the experiment); empty selects the
    /// experiment's default sweep (see [`ExperimentConfig::sweep_values`]).
    pub sweep: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::TauReport,
            seeds: vec![0],
            output: "out".into(),
            graph: GraphSection::default(),
            filter: FilterSection::default(),
            noise: NoiseSection::default(),
            data: DataSection::default(),
            train: TrainSection::default(),
            sweep: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    /// Parse and validate a config. `path` labels error messages.
    pub fn parse(text: &str, path: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: HashSet<String> = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = lineno + 1;
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::ParseError {
                    path: path.into(),
                    line: lineno,
                    message: format!("expected `key = value`, got `{raw}`"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::ParseError {
                    path: path.into(),
                    line: lineno,
                    message: format!("duplicate key `{key}`"),
                });
            }
            cfg.set(key, value).map_err(|e| match e {
                // Attach the file position to per-key errors.
                Error::InvalidConfig { key, reason } => Error::ParseError {
                    path: path.into(),
                    line: lineno,
                    message: format!("config field `{key}`: {reason}"),
                },
                Error::UnknownKey { key, .. } => {
                    Error::UnknownKey { path: path.into(), line: lineno, key }
                }
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read and parse a config file.
    pub fn from_file(path: &str) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => {
                self.experiment = ExperimentKind::parse(value).ok_or_else(|| invalid(
                    key,
                    format!(
                        "unknown experiment `{value}` (expected one of: {})",
                        ExperimentKind::ALL.map(ExperimentKind::as_str).join(", ")
                    ),
                ))?;
            }
            "seeds" => self.seeds = parse_seed_spec(value).map_err(|r| invalid(key, r))?,
            "output" => self.output = value.to_string(),
            "graph.source" => {
                self.graph.source = match value {
                    "generator" => GraphSource::Generator,
                    "files" => GraphSource::Files,
                    "case_study" => GraphSource::CaseStudy,
                    _ => return Err(invalid(key, format!("unknown source `{value}` (generator | files | case_study)"))),
                }
            }
            "graph.kind" => {
                self.graph.kind = match value {
                    "isolated" => GeneratorKind::Isolated,
                    "star" => GeneratorKind::Star,
                    "complete" => GeneratorKind::Complete,
                    "ring" => GeneratorKind::Ring,
                    "er" => GeneratorKind::Er,
                    "sbm" => GeneratorKind::Sbm,
                    _ => return Err(invalid(key, format!("unknown kind `{value}` (isolated | star | complete | ring | er | sbm)"))),
                }
            }
            "graph.n" => self.graph.n = parse_usize(key, value)?,
            "graph.p" => self.graph.p = parse_f64(key, value)?,
            "graph.blocks" => self.graph.blocks = parse_usize(key, value)?,
            "graph.p_in" => self.graph.p_in = parse_f64(key, value)?,
            "graph.p_out" => self.graph.p_out = parse_f64(key, value)?,
            "graph.expected_degree" => self.graph.expected_degree = parse_f64(key, value)?,
            "graph.in_out_ratio" => self.graph.in_out_ratio = parse_f64(key, value)?,
            "graph.edges" => self.graph.edges = value.to_string(),
            "graph.features" => self.graph.features = value.to_string(),
            "graph.labels" => self.graph.labels = value.to_string(),
            "graph.split" => self.graph.split = value.to_string(),
            "filter.kind" => {
                self.filter.kind = match value {
                    "ngc" => FilterKind::Ngc,
                    "rngc" => FilterKind::Rngc,
                    "identity" => FilterKind::Identity,
                    _ => return Err(invalid(key, format!("unknown filter `{value}` (ngc | rngc | identity)"))),
                }
            }
            "filter.lambda" => self.filter.lambda = parse_f64(key, value)?,
            "filter.order" => self.filter.order = parse_usize(key, value)?,
            "filter.epsilon" => self.filter.epsilon = parse_f64(key, value)?,
            "filter.mode" => {
                self.filter.mode = match value {
                    "rw" => NormMode::Rw,
                    "sym" => NormMode::Sym,
                    _ => return Err(invalid(key, format!("unknown mode `{value}` (rw | sym)"))),
                }
            }
            "filter.similarity" => {
                self.filter.similarity = match value {
                    "dense" => SimilarityMode::Dense,
                    "edge_masked" => SimilarityMode::EdgeMasked,
                    _ => return Err(invalid(key, format!("unknown similarity `{value}` (dense | edge_masked)"))),
                }
            }
            "noise.kind" => {
                self.noise.kind = match value {
                    "gaussian" => NoiseKind::Gaussian,
                    "flip" => NoiseKind::Flip,
                    _ => return Err(invalid(key, format!("unknown noise kind `{value}` (gaussian | flip)"))),
                }
            }
            "noise.sigma" => self.noise.sigma = parse_f64(key, value)?,
            "noise.level" => self.noise.level = parse_f64(key, value)?,
            "noise.flip_prob" => self.noise.flip_prob = parse_f64(key, value)?,
            "noise.row_normalize" => self.noise.row_normalize = parse_bool(key, value)?,
            "noise.trials" => self.noise.trials = parse_usize(key, value)?,
            "data.d" => self.data.d = parse_usize(key, value)?,
            "data.sigma_feat" => self.data.sigma_feat = parse_f64(key, value)?,
            "data.bern_high" => self.data.bern_high = parse_f64(key, value)?,
            "data.bern_low" => self.data.bern_low = parse_f64(key, value)?,
            "data.train_per_class" => self.data.train_per_class = parse_usize(key, value)?,
            "data.val_per_class" => self.data.val_per_class = parse_usize(key, value)?,
            "train.step_size" => {
                self.train.step_size = if value == "auto" {
                    StepSize::Auto
                } else {
                    StepSize::Fixed(parse_f64(key, value)?)
                }
            }
            "train.steps" => self.train.steps = parse_usize(key, value)?,
            "train.weight_decay" => self.train.weight_decay = parse_f64(key, value)?,
            "sweep.values" => {
                self.sweep = if value.is_empty() {
                    Vec::new()
                } else {
                    value
                        .split(',')
                        .map(|t| parse_f64(key, t.trim()))
                        .collect::<Result<Vec<_>>>()?
                }
            }
            _ => {
                return Err(Error::UnknownKey { path: String::new(), line: 0, key: key.to_string() });
            }
        }
        Ok(())
    }

    /// Semantic validation (ranges, cross-field consistency).
    pub fn validate(&self) -> Result<()> {
        fn prob(key: &str, v: f64) -> Result<()> {
            if !(0.0..=1.0).contains(&v) || v.is_nan() {
                return Err(invalid(key, format!("{v} is not a probability in [0, 1]")));
            }
            Ok(())
        }
        fn nonneg(key: &str, v: f64) -> Result<()> {
            if v < 0.0 || !v.is_finite() {
                return Err(invalid(key, format!("must be finite and >= 0, got {v}")));
            }
            Ok(())
        }

        if self.seeds.is_empty() {
            return Err(invalid("seeds", "need at least one seed".into()));
        }
        let mut dedup = HashSet::new();
        for &s in &self.seeds {
            if !dedup.insert(s) {
                return Err(invalid("seeds", format!("duplicate seed {s}")));
            }
        }
        if self.graph.n == 0 {
            return Err(invalid("graph.n", "need at least one node".into()));
        }
        if self.graph.blocks == 0 {
            return Err(invalid("graph.blocks", "need at least one block".into()));
        }
        prob("graph.p", self.graph.p)?;
        prob("graph.p_in", self.graph.p_in)?;
        prob("graph.p_out", self.graph.p_out)?;
        nonneg("graph.expected_degree", self.graph.expected_degree)?;
        if self.graph.in_out_ratio <= 0.0 || !self.graph.in_out_ratio.is_finite() {
            return Err(invalid("graph.in_out_ratio", format!("must be finite and > 0, got {}", self.graph.in_out_ratio)));
        }
        if self.graph.source == GraphSource::Files {
            for (key, v) in [
                ("graph.edges", &self.graph.edges),
                ("graph.features", &self.graph.features),
                ("graph.labels", &self.graph.labels),
                ("graph.split", &self.graph.split),
            ] {
                if v.is_empty() {
                    return Err(invalid(key, "required when graph.source = files".into()));
                }
            }
        }
        if self.graph.source == GraphSource::CaseStudy && self.experiment != ExperimentKind::TauReport {
            return Err(invalid(
                "graph.source",
                "case_study is only valid for experiment = tau_report".into(),
            ));
        }
        nonneg("filter.lambda", self.filter.lambda)?;
        nonneg("filter.epsilon", self.filter.epsilon)?;
        if self.noise.sigma <= 0.0 || !self.noise.sigma.is_finite() {
            return Err(invalid("noise.sigma", format!("must be finite and > 0, got {}", self.noise.sigma)));
        }
        nonneg("noise.level", self.noise.level)?;
        prob("noise.flip_prob", self.noise.flip_prob)?;
        if self.noise.trials == 0 {
            return Err(invalid("noise.trials", "need at least one trial".into()));
        }
        if self.data.d == 0 {
            return Err(invalid("data.d", "need at least one feature column".into()));
        }
        nonneg("data.sigma_feat", self.data.sigma_feat)?;
        prob("data.bern_high", self.data.bern_high)?;
        prob("data.bern_low", self.data.bern_low)?;
        if self.data.train_per_class == 0 {
            return Err(invalid("data.train_per_class", "need at least one training node per class".into()));
        }
        if let StepSize::Fixed(a) = self.train.step_size {
            if a <= 0.0 || !a.is_finite() {
                return Err(invalid("train.step_size", format!("must be `auto` or a finite positive number, got {a}")));
            }
        }
        if self.train.steps == 0 {
            return Err(invalid("train.steps", "need at least one step".into()));
        }
        nonneg("train.weight_decay", self.train.weight_decay)?;
        for &v in &self.sweep {
            if !v.is_finite() {
                return Err(invalid("sweep.values", format!("{v} is not finite")));
            }
        }
        match self.experiment {
            ExperimentKind::DepthSweep => {
                if self.filter.kind != FilterKind::Ngc {
                    return Err(invalid("filter.kind", "depth_sweep requires filter.kind = ngc".into()));
                }
                for &v in &self.sweep_values() {
                    if v < 0.0 || v.fract() != 0.0 {
                        return Err(invalid("sweep.values", format!("depth_sweep needs nonnegative integer depths, got {v}")));
                    }
                }
            }
            ExperimentKind::Theorem1Trend => {
                for &v in &self.sweep_values() {
                    if v < 2.0 || v.fract() != 0.0 {
                        return Err(invalid("sweep.values", format!("theorem1_trend needs integer node counts >= 2, got {v}")));
                    }
                }
            }
            ExperimentKind::FlipSweep => {
                for &v in &self.sweep_values() {
                    prob("sweep.values", v)?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// The effective sweep axis: explicit `sweep.values`, or the
    /// experiment's default when none were given.
    #[must_use]
    pub fn sweep_values(&self) -> Vec<f64> {
        if !self.sweep.is_empty() {
            return self.sweep.clone();
        }
        match self.experiment {
            ExperimentKind::TauReport | ExperimentKind::VerifyNeumann => vec![],
            ExperimentKind::VerifyLemma1 => vec![0.5, 1.0, 2.0],
            ExperimentKind::Theorem1Trend => vec![200.0, 800.0, 2000.0],
            ExperimentKind::NoiseSweep => vec![0.0, 0.5, 1.0, 2.0, 4.0],
            ExperimentKind::FlipSweep => vec![0.0, 0.1, 0.2, 0.3, 0.4],
            ExperimentKind::DepthSweep => vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            ExperimentKind::RownormAblation => vec![10.0],
        }
    }

    /// Canonical serialization: every field, fixed order, parseable by
    /// [`ExperimentConfig::parse`].
    #[must_use]
    pub fn to_canonical_string(&self) -> String {
        let mut s = String::new();
        let push = |s: &mut String, k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        push(&mut s, "experiment", self.experiment.as_str().into());
        push(&mut s, "seeds", seeds_to_string(&self.seeds));
        push(&mut s, "output", self.output.clone());
        push(&mut s, "graph.source", self.graph.source.as_str().into());
        push(&mut s, "graph.kind", self.graph.kind.as_str().into());
        push(&mut s, "graph.n", self.graph.n.to_string());
        push(&mut s, "graph.p", fmt_f64(self.graph.p));
        push(&mut s, "graph.blocks", self.graph.blocks.to_string());
        push(&mut s, "graph.p_in", fmt_f64(self.graph.p_in));
        push(&mut s, "graph.p_out", fmt_f64(self.graph.p_out));
        push(&mut s, "graph.expected_degree", fmt_f64(self.graph.expected_degree));
        push(&mut s, "graph.in_out_ratio", fmt_f64(self.graph.in_out_ratio));
        push(&mut s, "graph.edges", self.graph.edges.clone());
        push(&mut s, "graph.features", self.graph.features.clone());
        push(&mut s, "graph.labels", self.graph.labels.clone());
        push(&mut s, "graph.split", self.graph.split.clone());
        push(&mut s, "filter.kind", self.filter.kind.as_str().into());
        push(&mut s, "filter.lambda", fmt_f64(self.filter.lambda));
        push(&mut s, "filter.order", self.filter.order.to_string());
        push(&mut s, "filter.epsilon", fmt_f64(self.filter.epsilon));
        push(&mut s, "filter.mode", self.filter.mode.to_string());
        push(&mut s, "filter.similarity", self.filter.similarity.to_string());
        push(&mut s, "noise.kind", match self.noise.kind {
            NoiseKind::Gaussian => "gaussian".into(),
            NoiseKind::Flip => "flip".into(),
        });
        push(&mut s, "noise.sigma", fmt_f64(self.noise.sigma));
        push(&mut s, "noise.level", fmt_f64(self.noise.level));
        push(&mut s, "noise.flip_prob", fmt_f64(self.noise.flip_prob));
        push(&mut s, "noise.row_normalize", self.noise.row_normalize.to_string());
        push(&mut s, "noise.trials", self.noise.trials.to_string());
        push(&mut s, "data.d", self.data.d.to_string());
        push(&mut s, "data.sigma_feat", fmt_f64(self.data.sigma_feat));
        push(&mut s, "data.bern_high", fmt_f64(self.data.bern_high));
        push(&mut s, "data.bern_low", fmt_f64(self.data.bern_low));
        push(&mut s, "data.train_per_class", self.data.train_per_class.to_string());
        push(&mut s, "data.val_per_class", self.data.val_per_class.to_string());
        push(&mut s, "train.step_size", match self.train.step_size {
            StepSize::Auto => "auto".into(),
            StepSize::Fixed(a) => fmt_f64(a),
        });
        push(&mut s, "train.steps", self.train.steps.to_string());
        push(&mut s, "train.weight_decay", fmt_f64(self.train.weight_decay));
        push(
            &mut s,
            "sweep.values",
            self.sweep.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(", "),
        );
        s
    }
}

fn invalid(key: &str, reason: String) -> Error {
    Error::InvalidConfig { key: key.to_string(), reason }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value.parse::<f64>().map_err(|_| invalid(key, format!("`{value}` is not a number")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.parse::<usize>().map_err(|_| invalid(key, format!("`{value}` is not a nonnegative integer")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(invalid(key, format!("`{value}` is not a boolean (true | false)"))),
    }
}

/// Shortest-roundtrip float formatting (`32` → `32.0`, `0.1` → `0.1`).
#[must_use]
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Parse a seed list: comma-separated items, each `a..b` (inclusive) or a
/// single integer. `0..9` means the ten seeds 0 through 9.
pub fn parse_seed_spec(spec: &str) -> std::result::Result<Vec<u64>, String> {
    let mut seeds = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(format!("empty item in seed list `{spec}`"));
        }
        if let Some((a, b)) = item.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| format!("`{item}` is not a seed range"))?;
            let b: u64 = b.trim().parse().map_err(|_| format!("`{item}` is not a seed range"))?;
            if b < a {
                return Err(format!("seed range `{item}` runs backwards"));
            }
            if b - a >= 10_000 {
                return Err(format!("seed range `{item}` has more than 10000 seeds"));
            }
            seeds.extend(a..=b);
        } else {
            seeds.push(item.parse().map_err(|_| format!("`{item}` is not a seed"))?);
        }
    }
    Ok(seeds)
}

/// Inverse of [`parse_seed_spec`] for contiguous or arbitrary lists.
#[must_use]
pub fn seeds_to_string(seeds: &[u64]) -> String {
    if seeds.len() > 1 {
        let contiguous = seeds.windows(2).all(|w| w[1] == w[0] + 1);
        if contiguous {
            return format!("{}..{}", seeds[0], seeds[seeds.len() - 1]);
        }
    }
    seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = ExperimentConfig::parse("experiment = noise_sweep\n", "test.cfg").unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::NoiseSweep);
        assert_eq!(cfg.seeds, vec![0]);
        assert_eq!(cfg.filter.lambda, 32.0);
        assert_eq!(cfg.filter.order, 16);
        assert_eq!(cfg.sweep_values(), vec![0.0, 0.5, 1.0, 2.0, 4.0]);
    }

    #[test]
    fn unknown_key_rejected_with_position() {
        let err = ExperimentConfig::parse("experiment = tau_report\nfoo.bar = 1\n", "x.cfg").unwrap_err();
        match err {
            Error::UnknownKey { key, .. } => assert_eq!(key, "foo.bar"),
            other => panic!("expected UnknownKey, got {other}"),
        }
    }

    #[test]
    fn duplicate_key_rejected() {
        let err = ExperimentConfig::parse("graph.n = 5\ngraph.n = 6\n", "x.cfg").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("x.cfg:2"), "{msg}");
        assert!(msg.contains("duplicate"), "{msg}");
    }

    #[test]
    fn bad_value_reports_line() {
        let err = ExperimentConfig::parse("graph.n = many\n", "x.cfg").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("x.cfg:1"), "{msg}");
        assert!(msg.contains("graph.n"), "{msg}");
    }

    #[test]
    fn round_trip_is_identity() {
        let text = "\
experiment = depth_sweep
seeds = 0..9
graph.kind = sbm
graph.n = 300
noise.level = 2.0
sweep.values = 1, 4, 16
train.steps = 250
";
        let cfg = ExperimentConfig::parse(text, "a.cfg").unwrap();
        let canonical = cfg.to_canonical_string();
        let reparsed = ExperimentConfig::parse(&canonical, "b.cfg").unwrap();
        assert_eq!(cfg, reparsed);
        // Canonical form is a fixed point.
        assert_eq!(canonical, reparsed.to_canonical_string());
    }

    #[test]
    fn seed_specs() {
        assert_eq!(parse_seed_spec("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_seed_spec("7").unwrap(), vec![7]);
        assert_eq!(parse_seed_spec("1, 5, 9..10").unwrap(), vec![1, 5, 9, 10]);
        assert!(parse_seed_spec("5..2").is_err());
        assert_eq!(seeds_to_string(&[0, 1, 2]), "0..2");
        assert_eq!(seeds_to_string(&[4]), "4");
        assert_eq!(seeds_to_string(&[1, 5]), "1, 5");
    }

    #[test]
    fn files_source_requires_paths() {
        let err = ExperimentConfig::parse("graph.source = files\n", "x.cfg").unwrap_err();
        assert!(err.to_string().contains("graph.edges"), "{err}");
    }

    #[test]
    fn depth_sweep_validation() {
        let err =
            ExperimentConfig::parse("experiment = depth_sweep\nfilter.kind = identity\n", "x.cfg").unwrap_err();
        assert!(err.to_string().contains("depth_sweep"), "{err}");
        let err =
            ExperimentConfig::parse("experiment = depth_sweep\nsweep.values = 1.5\n", "x.cfg").unwrap_err();
        assert!(err.to_string().contains("integer"), "{err}");
    }

    #[test]
    fn case_study_limited_to_tau_report() {
        let ok = ExperimentConfig::parse("experiment = tau_report\ngraph.source = case_study\n", "x.cfg");
        assert!(ok.is_ok());
        let err = ExperimentConfig::parse("experiment = noise_sweep\ngraph.source = case_study\n", "x.cfg");
        assert!(err.is_err());
    }

    #[test]
    fn sbm_probabilities_derive_from_degree() {
        let cfg = ExperimentConfig::parse("graph.kind = sbm\n", "x.cfg").unwrap();
        // Expected degree 10, ratio 4, two blocks.
        let GraphKind::Sbm { p_in, p_out, .. } = cfg.graph.graph_kind(1000).unwrap() else {
            panic!("expected SBM")
        };
        assert!((p_in / p_out - 4.0).abs() < 1e-12);
        let size = 500.0;
        let degree = p_in * (size - 1.0) + p_out * 500.0;
        assert!((degree - 10.0).abs() < 1e-9, "expected degree {degree}");
        // Explicit probabilities win.
        let cfg =
            ExperimentConfig::parse("graph.kind = sbm\ngraph.p_in = 0.5\ngraph.p_out = 0.1\n", "x.cfg").unwrap();
        let GraphKind::Sbm { p_in, p_out, .. } = cfg.graph.graph_kind(100).unwrap() else {
            panic!("expected SBM")
        };
        assert_eq!((p_in, p_out), (0.5, 0.1));
        // Setting only one is an error.
        let cfg = ExperimentConfig::parse("graph.kind = sbm\ngraph.p_in = 0.5\n", "x.cfg").unwrap();
        assert!(cfg.graph.graph_kind(100).is_err());
    }

    #[test]
    fn canonical_default_parses() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_canonical_string();
        let reparsed = ExperimentConfig::parse(&text, "default.cfg").unwrap();
        assert_eq!(cfg, reparsed);
    }
}
