//! Graph signal denoising by truncated Neumann-series convolution.
//!
//! The library centers on one linear operator. Given a graph with
//! self-looped normalized adjacency `Ã` (symmetric or random-walk), decay
//! parameter `λ ≥ 0`, and truncation order `S`, the Neumann operator is
//!
//! ```text
//!   Ã_S = 1/(λ+1) · Σ_{s=0}^{S} r^s Ã^s,   r = λ/(λ+1),
//! ```
//!
//! the truncation of the Neumann-series solution of the graph-smoothing
//! problem `min_F ||F - X||² + λ·tr(Fᵀ L F)`. Applied to noisy node
//! features it averages signal along edges while i.i.d. noise cancels; how
//! much cancels is governed by a connectivity factor `τ ∈ [1, n]` measuring
//! how concentrated the operator's rows are.
//!
//! What's here:
//!
//! * [`graph`] — graph construction (canonical families + edge lists),
//!   CSR normalized adjacency in both modes.
//! * [`filter`] — the operator itself: propagation, depth sweeps, row-sum
//!   checks, the connectivity factor τ, exact (untruncated) solves, and
//!   smoothness energies.
//! * [`robust`] — an adversarial variant that propagates through
//!   `Ã - ε·XXᵀ/||XXᵀ||_F`, plus the closed-form worst-case perturbation
//!   it defends against.
//! * [`noise`] — noise models (Gaussian, feature flips), the entrywise
//!   concentration bound with its Monte-Carlo verifier, and the
//!   noisy-training optimization-gap report.
//! * [`train`] — plain gradient descent on the masked least-squares
//!   objective, with the exact optimum as reference.
//! * [`harness`] — config-file driven experiments with seeded, tidy-CSV
//!   output (also exposed through the `ngc` binary).
//!
//! Everything is deterministic given a seed: random streams are derived
//! from `(seed, purpose-name, index)` so results never depend on call
//! order or thread scheduling.

#![forbid(unsafe_code)]

pub mod error;
pub mod filter;
pub mod graph;
pub mod harness;
pub mod matrix;
pub mod noise;
pub mod rng;
pub mod robust;
pub mod train;

pub use error::{Error, Result};
pub use filter::{
    exact_solve, smoothness_energy, ConnectivityReport, NeumannOperator, RowSumReport,
    DEFAULT_MATERIALIZE_CAP, DEFAULT_SOLVE_CAP,
};
pub use graph::{
    block_of, parse_edge_list, parse_edge_list_lines, read_edge_list, Graph, GraphKind, NormMode,
    NormalizedAdjacency, SpectralEstimate,
};
pub use harness::ExperimentConfig;
pub use matrix::Matrix;
pub use noise::{
    concentration_bound, flip_features, inject_gaussian, optimization_gap, row_normalize,
    verify_concentration, ConcentrationParams, ConcentrationReport, GapReport, Injection,
    NoiseKind, NoiseSpec, NoisyDataset, SplitMasks,
};
pub use robust::{
    exact_robust_solve, inner_objective, worst_case_delta, Perturbation, RobustOperator,
    SimilarityMode,
};
pub use train::{
    estimate_smoothness_constant, evaluate_accuracy, least_squares_optimum, mse_loss, train_gd,
    LinearModel, StepSize, TrainConfig, TrainRun,
};
