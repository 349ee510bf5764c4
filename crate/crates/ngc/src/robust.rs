//! Adversarial graph signal denoising: worst-case perturbations and the
//! robust propagation operator.
//!
//! The adversarial variant hardens denoising against a virtual Laplacian
//! perturbation `δ` chosen inside a Frobenius ball of radius ε. The inner
//! maximization has a closed form ([`worst_case_delta`]):
//!
//! ```text
//!   argmax_{||δ||_F ≤ ε} <δ, F F^T>  =  ε · F F^T / ||F F^T||_F
//! ```
//!
//! Folding that maximizer back into the Neumann recurrence shifts every
//! propagation step by the normalized feature-similarity matrix
//! `M = ε·X X^T / ||X X^T||_F`:
//!
//! ```text
//!   robust:  1/(λ+1) · Σ_{s=0}^{S} [r·(Ã - M)]^s X
//! ```
//!
//! [`RobustOperator`] implements this in two variants: `dense` applies `M`
//! through skinny products `X(X^T z)` without materializing it, and
//! `edge_masked` keeps only the entries of `M` on the sparsity pattern of
//! `Ã` (neighbors plus diagonal) for scalability. With `ε = 0` both reduce
//! bit-for-bit to the base operator.
//!
//! The perturbation weakens the contraction that makes the series converge,
//! so [`RobustOperator::contraction_estimate`] reports `r·||Ã - M||₂`; a
//! value below 1 certifies convergence of the deep expansion.

use crate::error::{Error, Result};
use crate::filter::NeumannOperator;
use crate::graph::{NormalizedAdjacency, SpectralEstimate};
use crate::matrix::Matrix;

/// How the similarity correction `M` is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimilarityMode {
    /// Full-rank correction, applied via `X (X^T z)`.
    Dense,
    /// Correction restricted to the adjacency pattern plus the diagonal.
    EdgeMasked,
}

impl std::fmt::Display for SimilarityMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SimilarityMode::Dense => "dense",
            SimilarityMode::EdgeMasked => "edge_masked",
        })
    }
}

/// A symmetric perturbation inside the Frobenius ball.
#[derive(Debug, Clone)]
pub struct Perturbation {
    /// Dense symmetric `n×n` perturbation matrix.
    pub delta: Matrix,
    /// `||delta||_F` (equals ε except in the degenerate case).
    pub radius: f64,
    /// Set when the input features were identically zero, making the
    /// maximizing direction undefined; `delta` is zero then.
    pub degenerate: bool,
}

/// Closed-form maximizer of `<δ, F F^T>` over `||δ||_F ≤ ε`.
///
/// Returns `ε·F F^T/||F F^T||_F`, which is symmetric, has Frobenius norm
/// exactly ε, and (by Cauchy–Schwarz) beats every feasible perturbation.
/// A zero `f` has no maximizing direction: the result is flagged
/// [`Perturbation::degenerate`] and carries a zero matrix.
pub fn worst_case_delta(f: &Matrix, epsilon: f64) -> Result<Perturbation> {
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: format!("must be finite and >= 0, got {epsilon}"),
        });
    }
    let gram = f.matmul(&f.transpose())?;
    let norm = gram.frobenius_norm();
    if norm == 0.0 {
        return Ok(Perturbation {
            delta: Matrix::zeros(f.rows(), f.rows()),
            radius: 0.0,
            degenerate: true,
        });
    }
    let mut delta = gram;
    delta.scale(epsilon / norm);
    Ok(Perturbation { delta, radius: epsilon, degenerate: false })
}

/// Inner objective `h(δ) = <δ, F F^T>` (Frobenius inner product).
///
/// Evaluated as `<δ F, F>`, avoiding the `n×n` Gram matrix.
pub fn inner_objective(delta: &Matrix, f: &Matrix) -> Result<f64> {
    if delta.rows() != f.rows() || delta.cols() != f.rows() {
        return Err(Error::DimensionMismatch {
            op: "inner_objective",
            expected: format!("{0}x{0} perturbation", f.rows()),
            got: format!("{}x{}", delta.rows(), delta.cols()),
        });
    }
    delta.matmul(f)?.frobenius_dot(f)
}

/// Correction values on the adjacency sparsity pattern (edge-masked mode).
#[derive(Debug, Clone)]
struct MaskedCorrection {
    /// Row start offsets into `vals`, mirroring the adjacency pattern.
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl MaskedCorrection {
    fn build(adjacency: &NormalizedAdjacency, x: &Matrix, scale: f64) -> MaskedCorrection {
        let n = adjacency.node_count();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(adjacency.nnz());
        let mut vals = Vec::with_capacity(adjacency.nnz());
        row_ptr.push(0);
        for i in 0..n {
            let (cols, _) = adjacency.sparse_row(i);
            let xi = x.row(i);
            for &j in cols {
                let dot: f64 = xi.iter().zip(x.row(j)).map(|(a, b)| a * b).sum();
                col_idx.push(j);
                vals.push(scale * dot);
            }
            row_ptr.push(col_idx.len());
        }
        MaskedCorrection { row_ptr, col_idx, vals }
    }

    fn apply(&self, x: &Matrix) -> Matrix {
        let n = self.row_ptr.len() - 1;
        let mut out = Matrix::zeros(n, x.cols());
        for i in 0..n {
            let span = self.row_ptr[i]..self.row_ptr[i + 1];
            let out_row = out.row_mut(i);
            for (&j, &v) in self.col_idx[span.clone()].iter().zip(&self.vals[span]) {
                for (o, &xv) in out_row.iter_mut().zip(x.row(j)) {
                    *o += v * xv;
                }
            }
        }
        out
    }
}

/// The robust propagation operator: the base Neumann operator with every
/// step shifted by the feature-similarity correction `M`.
#[derive(Debug, Clone)]
pub struct RobustOperator {
    base: NeumannOperator,
    epsilon: f64,
    similarity: SimilarityMode,
    /// `||X X^T||_F`, computed exactly as `||X^T X||_F` (a `d×d` norm).
    gram_norm: f64,
    /// Features that define `M` (dense mode applies `M z = scale·X(X^T z)`).
    features: Matrix,
    /// Precomputed masked correction (edge-masked mode only).
    masked: Option<MaskedCorrection>,
    /// `X = 0` leaves `M` undefined; propagation falls back to the base
    /// operator and this flag records that it did.
    degenerate: bool,
}

impl RobustOperator {
    /// Build the operator from a base filter, a radius, and the feature
    /// matrix that defines the similarity correction.
    ///
    /// A zero feature matrix is accepted but flags the operator
    /// [`Self::is_degenerate`]; propagation then equals the base operator.
    pub fn new(
        base: NeumannOperator,
        epsilon: f64,
        similarity: SimilarityMode,
        features: &Matrix,
    ) -> Result<Self> {
        if epsilon < 0.0 || !epsilon.is_finite() {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: format!("must be finite and >= 0, got {epsilon}"),
            });
        }
        let n = base.adjacency().node_count();
        if features.rows() != n {
            return Err(Error::DimensionMismatch {
                op: "RobustOperator::new",
                expected: format!("{n} feature rows"),
                got: format!("{} rows", features.rows()),
            });
        }
        // ||X X^T||_F = ||X^T X||_F: both equal sqrt(Σ σ_i^4).
        let gram_norm = features.transpose_matmul(features)?.frobenius_norm();
        let degenerate = gram_norm == 0.0;
        let scale = if degenerate || epsilon == 0.0 { 0.0 } else { epsilon / gram_norm };
        let masked = match similarity {
            SimilarityMode::EdgeMasked if scale != 0.0 => {
                Some(MaskedCorrection::build(base.adjacency(), features, scale))
            }
            _ => None,
        };
        Ok(RobustOperator {
            base,
            epsilon,
            similarity,
            gram_norm,
            features: features.clone(),
            masked,
            degenerate,
        })
    }

    #[must_use]
    pub fn base(&self) -> &NeumannOperator {
        &self.base
    }

    #[must_use]
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[must_use]
    pub fn similarity(&self) -> SimilarityMode {
        self.similarity
    }

    /// Cached `||X X^T||_F`.
    #[must_use]
    pub fn gram_norm(&self) -> f64 {
        self.gram_norm
    }

    /// True when the defining features were identically zero and the
    /// operator silently equals its base.
    #[must_use]
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// `M z` (zero when ε = 0 or degenerate).
    fn correction(&self, z: &Matrix) -> Result<Option<Matrix>> {
        if self.degenerate || self.epsilon == 0.0 {
            return Ok(None);
        }
        match (&self.masked, self.similarity) {
            (Some(m), SimilarityMode::EdgeMasked) => Ok(Some(m.apply(z))),
            (_, SimilarityMode::Dense) => {
                let t = self.features.transpose_matmul(z)?; // X^T z  (d×c)
                let mut mz = self.features.matmul(&t)?; // X (X^T z)  (n×c)
                mz.scale(self.epsilon / self.gram_norm);
                Ok(Some(mz))
            }
            (None, SimilarityMode::EdgeMasked) => unreachable!("masked correction built in new()"),
        }
    }

    /// Apply the robust operator to `x`.
    ///
    /// Same recurrence as the base filter with `Ã` replaced by `Ã - M`;
    /// with ε = 0 the correction step is skipped entirely, so the result is
    /// bit-identical to [`NeumannOperator::propagate`].
    pub fn propagate(&self, x: &Matrix) -> Result<Matrix> {
        let r = self.base.decay_ratio();
        let inv = 1.0 / (self.base.lambda() + 1.0);
        let mut out = x.clone();
        out.scale(inv);
        let mut z = x.clone();
        let mut coeff = inv;
        for _s in 1..=self.base.order() {
            coeff *= r;
            if coeff == 0.0 {
                break;
            }
            let az = self.base.adjacency().apply(&z)?;
            z = match self.correction(&z)? {
                None => az,
                Some(mz) => {
                    let mut next = az;
                    next.axpy(-1.0, &mz)?;
                    next
                }
            };
            out.axpy(coeff, &z)?;
        }
        Ok(out)
    }

    /// Propagate the operator's own defining features (the usual usage:
    /// the correction and the signal are the same observed matrix).
    pub fn propagate_features(&self) -> Result<Matrix> {
        self.propagate(&self.features)
    }

    /// Power-iteration estimate of `r·||Ã - M||₂`.
    ///
    /// Below 1 the robust Neumann series converges; at or above 1 deep
    /// expansions are unreliable and callers should warn. Uses iteration on
    /// `B^T B` with `B = Ã - M` (`M` is symmetric in both modes).
    pub fn contraction_estimate(&self, iters: usize, tol: f64) -> Result<SpectralEstimate> {
        if iters == 0 {
            return Err(Error::InvalidParameter {
                name: "iters",
                reason: "power iteration needs at least one step".into(),
            });
        }
        let n = self.base.adjacency().node_count();
        let apply_b = |v: &Matrix| -> Result<Matrix> {
            let mut bv = self.base.adjacency().apply(v)?;
            if let Some(mv) = self.correction(v)? {
                bv.axpy(-1.0, &mv)?;
            }
            Ok(bv)
        };
        let apply_bt = |v: &Matrix| -> Result<Matrix> {
            let mut btv = self.base.adjacency().apply_transpose(v)?;
            if let Some(mv) = self.correction(v)? {
                btv.axpy(-1.0, &mv)?; // M^T = M
            }
            Ok(btv)
        };
        let mut v = Matrix::from_vec(n, 1, vec![1.0 / (n as f64).sqrt(); n])?;
        let mut sigma = 0.0;
        let mut residual = f64::INFINITY;
        let mut used = 0;
        for it in 1..=iters {
            used = it;
            let w = apply_bt(&apply_b(&v)?)?; // B^T B v
            let norm = w.frobenius_norm();
            if norm == 0.0 {
                return Ok(SpectralEstimate { value: 0.0, residual: 0.0, converged: true, iters: it });
            }
            let eig = norm; // dominant eigenvalue of B^T B (v unit-norm)
            let mut diff = w.clone();
            diff.axpy(-eig, &v)?;
            residual = diff.frobenius_norm() / eig.max(1.0);
            sigma = eig.sqrt();
            v = w;
            v.scale(1.0 / norm);
            if residual < tol {
                break;
            }
        }
        Ok(SpectralEstimate {
            value: self.base.decay_ratio() * sigma,
            residual,
            converged: residual < tol,
            iters: used,
        })
    }
}

/// Dense solve of the robust fixed-point system
/// `((1+λ)I - λ(Ã - M))F = X` with `M = ε·X X^T/||X X^T||_F` built from `x`.
///
/// This is the `S → ∞` limit of [`RobustOperator::propagate`] whenever the
/// series converges (`r·||Ã - M||₂ < 1`); used as an oracle for deep
/// expansions. Capped at `cap` nodes.
pub fn exact_robust_solve(
    adjacency: &NormalizedAdjacency,
    lambda: f64,
    epsilon: f64,
    similarity: SimilarityMode,
    x: &Matrix,
    cap: usize,
) -> Result<Matrix> {
    let n = adjacency.node_count();
    if n > cap {
        return Err(Error::CapExceeded { op: "exact_robust_solve", cap, n });
    }
    // Dense Ã - M.
    let mut b = adjacency.apply(&Matrix::identity(n))?;
    let gram_norm = x.transpose_matmul(x)?.frobenius_norm();
    if epsilon > 0.0 && gram_norm > 0.0 {
        let scale = epsilon / gram_norm;
        match similarity {
            SimilarityMode::Dense => {
                let gram = x.matmul(&x.transpose())?;
                b.axpy(-scale, &gram)?;
            }
            SimilarityMode::EdgeMasked => {
                let masked = MaskedCorrection::build(adjacency, x, scale);
                let dense_masked = masked.apply(&Matrix::identity(n));
                b.axpy(-1.0, &dense_masked)?;
            }
        }
    }
    // System (1+λ)I - λ(Ã - M).
    b.scale(-lambda);
    for i in 0..n {
        b.set(i, i, b.get(i, i) + 1.0 + lambda);
    }
    let solution = b
        .to_dmatrix()
        .lu()
        .solve(&x.to_dmatrix())
        .ok_or(Error::FactorizationFailed("exact_robust_solve (LU)"))?;
    Ok(Matrix::from_dmatrix(&solution))
}
