//! Truncated Neumann propagation and its diagnostics.
//!
//! The denoising objective `min_F ||F - X||² + λ·tr(F^T L̃ F)` has the closed
//! form `F = (I + λL̃)^{-1} X` with `L̃ = I - Ã`. Expanding the inverse as a
//! Neumann series and truncating at order `S` gives the propagation operator
//! implemented here:
//!
//! ```text
//!   Ã_S = 1/(λ+1) · Σ_{s=0}^{S} (λ/(λ+1))^s Ã^s,        r = λ/(λ+1) < 1
//! ```
//!
//! [`NeumannOperator::propagate`] evaluates `Ã_S X` with `S` sparse products
//! and never materializes `Ã^s`. Companion diagnostics:
//!
//! * [`exact_solve`] — dense solve of `(I + λL̃)F = X`, the truncation-error
//!   oracle (`||Ã_S X - F|| ≤ r^{S+1}·||X||` in sym mode).
//! * [`NeumannOperator::row_sums`] — in rw mode every row of `Ã_S` sums to
//!   the constant `R = 1 - r^{S+1}`, a cheap end-to-end correctness check.
//! * [`NeumannOperator::connectivity_factor`] — the connectivity factor
//!   `τ = max_i n·Σ_j [Ã_S]²_ij / R²`, which measures how evenly each row
//!   spreads its mass: `τ = 1` on a perfectly mixing graph, `τ = n` on
//!   isolated nodes. Low τ means aggregation averages noise away faster
//!   (see [`crate::noise`] for the quantitative bound).
//! * [`smoothness_energy`] — the edge-sum form of `tr(F^T L̃ F)`.

use crate::error::{Error, Result};
use crate::graph::{NormMode, NormalizedAdjacency};
use crate::matrix::Matrix;
use crate::rng;
use rand::Rng;

/// Default node cap for dense exact solves.
pub const DEFAULT_SOLVE_CAP: usize = 2000;
/// Default node cap for dense operator materialization and exact τ.
pub const DEFAULT_MATERIALIZE_CAP: usize = 5000;

/// The truncated Neumann propagation operator `Ã_S`.
///
/// Immutable; construction validates `λ ≥ 0` (finite) and owns the
/// normalized adjacency. `λ = 0` is allowed and degenerates to the identity
/// filter (`r = 0`, only the `s = 0` term survives).
#[derive(Debug, Clone)]
pub struct NeumannOperator {
    adjacency: NormalizedAdjacency,
    lambda: f64,
    order: usize,
}

/// Per-row sums of `Ã_S` against the closed-form constant `R`.
#[derive(Debug, Clone)]
pub struct RowSumReport {
    /// Row sums, computed by propagating the all-ones vector.
    pub sums: Vec<f64>,
    /// The closed-form constant `R = 1 - r^{S+1}`.
    pub expected: f64,
    /// `max_i |sums[i] - expected|`.
    pub max_deviation: f64,
    /// Normalization mode; the identity is exact only for `rw`.
    pub mode: NormMode,
}

/// Connectivity factor report: `τ_i = n·Σ_j [Ã_S]²_ij / R²` and `τ = max_i τ_i`.
#[derive(Debug, Clone)]
pub struct ConnectivityReport {
    /// Per-row factors. Length `n` when `exact`, else one entry per sampled row.
    pub tau_i: Vec<f64>,
    /// `max` over the computed rows. A lower bound on the true τ when sampled.
    pub tau: f64,
    /// The denoising predictor `τ·ln(n)/n`.
    pub predictor: f64,
    /// Whether every row was computed (vs. a uniform row sample).
    pub exact: bool,
    /// Number of sampled rows (0 when exact).
    pub sampled_rows: usize,
    /// Sampled row indices aligned with `tau_i`; `None` when exact.
    pub rows: Option<Vec<usize>>,
    /// Normalization mode; the `[1, n]` range is certified only for `rw`.
    pub mode: NormMode,
}

impl NeumannOperator {
    /// Create the operator. `lambda` must be finite and nonnegative.
    pub fn new(adjacency: NormalizedAdjacency, lambda: f64, order: usize) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("must be finite and >= 0, got {lambda}"),
            });
        }
        Ok(NeumannOperator { adjacency, lambda, order })
    }

    #[must_use]
    pub fn adjacency(&self) -> &NormalizedAdjacency {
        &self.adjacency
    }

    #[must_use]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[must_use]
    pub fn order(&self) -> usize {
        self.order
    }

    /// Geometric decay ratio `r = λ/(λ+1) ∈ [0, 1)`.
    #[must_use]
    pub fn decay_ratio(&self) -> f64 {
        self.lambda / (self.lambda + 1.0)
    }

    /// Row-sum constant `R = 1 - r^{S+1} ∈ (0, 1]`.
    #[must_use]
    pub fn row_sum_constant(&self) -> f64 {
        1.0 - self.decay_ratio().powi(self.order as i32 + 1)
    }

    /// Apply the operator: `Ã_S x`, using `S` sparse-dense products.
    ///
    /// # Examples
    /// ```
    /// use ngc::{Graph, GraphKind, Matrix, NeumannOperator, NormMode};
    /// let g = Graph::canonical(GraphKind::Ring, 8, 0).unwrap();
    /// let op = NeumannOperator::new(g.normalize(NormMode::Rw), 32.0, 16).unwrap();
    /// let x = Matrix::from_fn(8, 2, |i, j| (i + j) as f64);
    /// let y = op.propagate(&x).unwrap();
    /// assert_eq!(y.shape(), (8, 2));
    /// ```
    pub fn propagate(&self, x: &Matrix) -> Result<Matrix> {
        self.propagate_impl(x, false)
    }

    /// Apply the transposed operator `Ã_S^T x` (used for extracting rows of
    /// `Ã_S`: row `i` equals `Ã_S^T e_i`).
    pub fn propagate_transpose(&self, x: &Matrix) -> Result<Matrix> {
        self.propagate_impl(x, true)
    }

    fn propagate_impl(&self, x: &Matrix, transpose: bool) -> Result<Matrix> {
        let r = self.decay_ratio();
        let inv = 1.0 / (self.lambda + 1.0);
        let mut out = x.clone();
        out.scale(inv);
        let mut z = x.clone();
        let mut coeff = inv;
        for _s in 1..=self.order {
            coeff *= r;
            if coeff == 0.0 {
                break; // λ = 0: only the s = 0 term contributes
            }
            z = if transpose { self.adjacency.apply_transpose(&z)? } else { self.adjacency.apply(&z)? };
            out.axpy(coeff, &z)?;
        }
        Ok(out)
    }

    /// One sweep, many truncation depths: returns `Ã_{S'} x` for each
    /// requested depth `S'` in `depths` (strictly increasing). The sweep runs
    /// to the largest requested depth; the operator's own `order` only
    /// provides λ. Cost is a single pass of `max(depths)` sparse products.
    pub fn propagate_depths(&self, x: &Matrix, depths: &[usize]) -> Result<Vec<Matrix>> {
        if depths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter {
                name: "depths",
                reason: "must be strictly increasing".into(),
            });
        }
        let Some(&max_depth) = depths.last() else {
            return Ok(Vec::new());
        };
        let r = self.decay_ratio();
        let inv = 1.0 / (self.lambda + 1.0);
        let mut out = Vec::with_capacity(depths.len());
        let mut acc = x.clone();
        acc.scale(inv);
        let mut z = x.clone();
        let mut coeff = inv;
        let mut next = 0;
        for s in 0..=max_depth {
            if s > 0 {
                coeff *= r;
                if coeff != 0.0 {
                    z = self.adjacency.apply(&z)?;
                    acc.axpy(coeff, &z)?;
                }
            }
            if next < depths.len() && depths[next] == s {
                out.push(acc.clone());
                next += 1;
            }
        }
        Ok(out)
    }

    /// Dense `n×n` materialization of `Ã_S`, obtained by propagating the
    /// identity matrix. Capped at `cap` nodes.
    pub fn materialize(&self, cap: usize) -> Result<Matrix> {
        let n = self.adjacency.node_count();
        if n > cap {
            return Err(Error::CapExceeded { op: "materialize", cap, n });
        }
        self.propagate(&Matrix::identity(n))
    }

    /// Row sums of `Ã_S` against the closed form `R = 1 - r^{S+1}`.
    ///
    /// In rw mode the identity is exact (`Ã` is row-stochastic, so each
    /// `Ã^s` is too); in sym mode the report is diagnostic-only.
    pub fn row_sums(&self) -> Result<RowSumReport> {
        let n = self.adjacency.node_count();
        let ones = Matrix::from_vec(n, 1, vec![1.0; n])?;
        let sums = self.propagate(&ones)?;
        let expected = self.row_sum_constant();
        let sums: Vec<f64> = sums.as_slice().to_vec();
        let max_deviation = sums.iter().map(|s| (s - expected).abs()).fold(0.0, f64::max);
        Ok(RowSumReport { sums, expected, max_deviation, mode: self.adjacency.mode() })
    }

    /// Connectivity factor `τ`.
    ///
    /// * `n ≤ row_cap`: exact — every row norm of `Ã_S` is computed by
    ///   pushing identity blocks through the transposed recurrence, so the
    ///   dense `n×n` operator is never stored.
    /// * `n > row_cap`: `sample_rows` rows are drawn uniformly without
    ///   replacement (seeded); the reported `tau` is then a lower bound and
    ///   the report says so via `exact = false`.
    ///
    /// For rw mode every `τ_i` lies in `[1, n]`; sym-mode values are computed
    /// with the same formula but that range is not certified.
    pub fn connectivity_factor(
        &self,
        row_cap: usize,
        sample_rows: usize,
        seed: u64,
    ) -> Result<ConnectivityReport> {
        let n = self.adjacency.node_count();
        let exact = n <= row_cap;
        let rows: Vec<usize> = if exact {
            (0..n).collect()
        } else {
            if sample_rows == 0 {
                return Err(Error::InvalidParameter {
                    name: "sample_rows",
                    reason: "sampled τ needs at least one row".into(),
                });
            }
            if sample_rows > n {
                return Err(Error::SampleTooLarge { requested: sample_rows, n });
            }
            sample_without_replacement(n, sample_rows, seed)
        };

        let r2 = self.row_sum_constant().powi(2);
        let nf = n as f64;
        let mut tau_i = Vec::with_capacity(rows.len());
        // Blocked so memory stays at O(n·block) regardless of n.
        const BLOCK: usize = 256;
        for chunk in rows.chunks(BLOCK) {
            let mut basis = Matrix::zeros(n, chunk.len());
            for (k, &i) in chunk.iter().enumerate() {
                basis.set(i, k, 1.0);
            }
            // Column k of Ã_S^T e_i is row i of Ã_S.
            let block_rows = self.propagate_transpose(&basis)?;
            let mut sq = vec![0.0f64; chunk.len()];
            for row in 0..n {
                for (k, v) in block_rows.row(row).iter().enumerate() {
                    sq[k] += v * v;
                }
            }
            tau_i.extend(sq.into_iter().map(|s| nf * s / r2));
        }

        let tau = tau_i.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(ConnectivityReport {
            tau,
            predictor: tau * nf.ln() / nf,
            exact,
            sampled_rows: if exact { 0 } else { rows.len() },
            rows: if exact { None } else { Some(rows) },
            tau_i,
            mode: self.adjacency.mode(),
        })
    }
}

/// `k` distinct values from `0..n`, uniformly, by partial Fisher–Yates.
fn sample_without_replacement(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut r = rng::stream(seed, "tau.row_sample");
    for i in 0..k {
        let j = i + r.random_range(0..(n - i));
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool.sort_unstable();
    pool
}

/// Dense closed-form solve of the denoising system `(I + λ(I - Ã))F = X`.
///
/// This is the oracle the truncated operator approximates; the system matrix
/// is symmetric positive definite in sym mode (Cholesky) and strictly
/// diagonally dominant in rw mode (LU). Capped at `cap` nodes.
pub fn exact_solve(
    adjacency: &NormalizedAdjacency,
    lambda: f64,
    x: &Matrix,
    cap: usize,
) -> Result<Matrix> {
    let n = adjacency.node_count();
    if n > cap {
        return Err(Error::CapExceeded { op: "exact_solve", cap, n });
    }
    if x.rows() != n {
        return Err(Error::DimensionMismatch {
            op: "exact_solve",
            expected: format!("{n} rows"),
            got: format!("{} rows", x.rows()),
        });
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("must be finite and >= 0, got {lambda}"),
        });
    }
    // System matrix (1+λ)I - λÃ, built densely.
    let mut system = adjacency.apply(&Matrix::identity(n))?;
    system.scale(-lambda);
    for i in 0..n {
        system.set(i, i, system.get(i, i) + 1.0 + lambda);
    }
    let a = system.to_dmatrix();
    let b = x.to_dmatrix();
    let solution = match adjacency.mode() {
        NormMode::Sym => a
            .cholesky()
            .ok_or(Error::FactorizationFailed("exact_solve (Cholesky)"))?
            .solve(&b),
        NormMode::Rw => a
            .lu()
            .solve(&b)
            .ok_or(Error::FactorizationFailed("exact_solve (LU)"))?,
    };
    Ok(Matrix::from_dmatrix(&solution))
}

/// Smoothness energy of `f` over the graph: the edge-sum form of
/// `tr(F^T L̃ F)`, each undirected edge counted once.
///
/// * sym: `Σ_{(i,j)∈E} ||f_i/√d̃_i - f_j/√d̃_j||²` — exactly equals the
///   trace form (the self-loop terms cancel).
/// * rw: `Σ_{(i,j)∈E} ½(1/d̃_i + 1/d̃_j)·||f_i - f_j||²` — the symmetrized
///   edge weighting; it coincides with the sym value on regular graphs.
pub fn smoothness_energy(f: &Matrix, adjacency: &NormalizedAdjacency) -> Result<f64> {
    let n = adjacency.node_count();
    if f.rows() != n {
        return Err(Error::DimensionMismatch {
            op: "smoothness_energy",
            expected: format!("{n} rows"),
            got: format!("{} rows", f.rows()),
        });
    }
    let deg = adjacency.self_loop_degrees();
    let mut total = 0.0;
    for (i, j) in adjacency.edge_iter() {
        let (fi, fj) = (f.row(i), f.row(j));
        match adjacency.mode() {
            NormMode::Sym => {
                let (si, sj) = (deg[i].sqrt(), deg[j].sqrt());
                total += fi
                    .iter()
                    .zip(fj)
                    .map(|(a, b)| {
                        let d = a / si - b / sj;
                        d * d
                    })
                    .sum::<f64>();
            }
            NormMode::Rw => {
                let w = 0.5 * (1.0 / deg[i] + 1.0 / deg[j]);
                total += w
                    * fi
                        .iter()
                        .zip(fj)
                        .map(|(a, b)| {
                            let d = a - b;
                            d * d
                        })
                        .sum::<f64>();
            }
        }
    }
    Ok(total)
}
