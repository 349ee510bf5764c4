//! Linear-model training on aggregated features.
//!
//! The model is a single weight matrix `W` (no bias, no nonlinearity) fitted
//! to one-hot labels with the summed MSE loss over the training mask:
//!
//! ```text
//!   f(W) = ||Z_m W - Y_m||²_F,      ∇f(W) = 2 Z_m^T (Z_m W - Y_m)
//! ```
//!
//! where `Z` is the (already aggregated) feature matrix and `m` restricts to
//! masked rows. The gradient is `L`-Lipschitz with `L = 2σ_max(Z_m)²`, so
//! fixed-step gradient descent with `α ≤ 1/L` descends monotonically on this
//! convex quadratic; [`estimate_smoothness_constant`] supplies `L` and
//! [`TrainConfig`] defaults to `α = 1/L`. [`least_squares_optimum`] is the
//! closed-form minimizer used as the convergence oracle.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A trained linear model: dense `d×c` weights.
#[derive(Debug, Clone)]
pub struct LinearModel {
    /// Weight matrix `W` (features × classes).
    pub weights: Matrix,
}

impl LinearModel {
    /// `(d, c)` dimensions.
    #[must_use]
    pub fn dims(&self) -> (usize, usize) {
        self.weights.shape()
    }
}

/// Step-size policy for gradient descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// `α = 1/L` with `L` estimated from the masked features.
    Auto,
    /// Fixed `α`, validated against `1/L` unless enforcement is disabled.
    Fixed(f64),
}

/// Gradient-descent configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub step_size: StepSize,
    /// Number of gradient steps `k ≥ 1`.
    pub steps: usize,
    /// When `true` (default), a fixed step size larger than `1/L` is
    /// rejected. Disabling it permits the `1/L < α < 2/L` regime (still
    /// convergent on a quadratic) and beyond; divergence is then detected
    /// and reported via [`TrainRun::diverged`] rather than prevented.
    pub enforce_step_rule: bool,
    /// Optional L2 penalty `wd·||W||²_F` added to the objective — an
    /// experiment-parity knob, not part of the convergence analysis (which
    /// assumes the plain loss). The trained objective stays convex and
    /// `(L + 2·wd)`-smooth, so the step rule adapts automatically.
    pub weight_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            step_size: StepSize::Auto,
            steps: 500,
            enforce_step_rule: true,
            weight_decay: 0.0,
        }
    }
}

/// Everything a training run produces.
#[derive(Debug, Clone)]
pub struct TrainRun {
    pub model: LinearModel,
    /// The trained objective `f(W^(t))` for `t = 0..=k` (length `steps + 1`);
    /// includes the L2 term when `weight_decay > 0`.
    pub loss_trace: Vec<f64>,
    /// `||W^(t)||_F` for `t = 0..=k` (boundedness diagnostic, never enforced).
    pub weight_norm_trace: Vec<f64>,
    /// Step size actually used.
    pub step_size: f64,
    /// Estimated smoothness constant of the trained objective
    /// (`2σ_max(Z_m)²`, plus `2·wd` when weight decay is on).
    pub smoothness: f64,
    /// Set when the loss blew up (only reachable with enforcement disabled).
    pub diverged: bool,
}

/// Smoothness constant `L = 2σ_max(Z)²` of the summed-MSE gradient.
///
/// `σ_max(Z)²` is the dominant eigenvalue of `Z^T Z`, estimated by power
/// iteration to relative tolerance `1e-6`.
pub fn estimate_smoothness_constant(z: &Matrix) -> Result<f64> {
    let gram = z.transpose_matmul(z)?; // d×d
    let d = gram.rows();
    if d == 0 || gram.max_abs() == 0.0 {
        return Err(Error::InvalidParameter {
            name: "z",
            reason: "smoothness constant of a zero matrix is undefined".into(),
        });
    }
    let mut v = Matrix::from_vec(d, 1, vec![1.0 / (d as f64).sqrt(); d])?;
    let mut eig = 0.0f64;
    for _ in 0..10_000 {
        let w = gram.matmul(&v)?;
        let norm = w.frobenius_norm();
        if norm == 0.0 {
            // The start vector was orthogonal to the range; perturb the
            // first coordinate and continue (cannot persist: Z^T Z is PSD
            // and nonzero).
            v.set(0, 0, v.get(0, 0) + 1.0);
            let n2 = v.frobenius_norm();
            v.scale(1.0 / n2);
            continue;
        }
        let prev = eig;
        eig = norm; // v is unit-norm, so ||Gv|| estimates the dominant eigenvalue
        v = w;
        v.scale(1.0 / norm);
        if (eig - prev).abs() <= 1e-6 * eig {
            break;
        }
    }
    Ok(2.0 * eig)
}

/// Summed MSE loss `||Z_m W - Y_m||²_F` over masked rows.
pub fn mse_loss(z: &Matrix, y: &Matrix, mask: &[bool], model: &LinearModel) -> Result<f64> {
    check_alignment("mse_loss", z, y, mask)?;
    let zm = z.select_rows(mask);
    let ym = y.select_rows(mask);
    let residual = zm.matmul(&model.weights)?.sub(&ym)?;
    Ok(residual.frobenius_norm().powi(2))
}

/// Fixed-step gradient descent from `W^(0) = 0`.
///
/// Update: `W ← W - α·2 Z_m^T (Z_m W - Y_m)`. With the default `α = 1/L`
/// the loss trace is non-increasing (convex quadratic).
///
/// # Examples
/// ```
/// use ngc::{train_gd, Matrix, StepSize, TrainConfig};
/// // Z = Y = I: one step at α = 1/L = 0.5 lands exactly on W = Y.
/// let z = Matrix::identity(2);
/// let run = train_gd(&z, &z, &[true, true],
///                    &TrainConfig { step_size: StepSize::Fixed(0.5), steps: 1, ..Default::default() })
///     .unwrap();
/// assert!((run.model.weights.get(0, 0) - 1.0).abs() < 1e-12);
/// assert!((run.model.weights.get(0, 1)).abs() < 1e-12);
/// ```
pub fn train_gd(z: &Matrix, y: &Matrix, mask: &[bool], cfg: &TrainConfig) -> Result<TrainRun> {
    check_alignment("train_gd", z, y, mask)?;
    if cfg.steps == 0 {
        return Err(Error::InvalidParameter { name: "steps", reason: "need at least one step".into() });
    }
    if mask.iter().all(|&m| !m) {
        return Err(Error::EmptyMask("train_gd"));
    }
    let wd = cfg.weight_decay;
    if wd < 0.0 || !wd.is_finite() {
        return Err(Error::InvalidParameter {
            name: "weight_decay",
            reason: format!("must be finite and >= 0, got {wd}"),
        });
    }
    let zm = z.select_rows(mask);
    let ym = y.select_rows(mask);
    let smoothness = estimate_smoothness_constant(&zm)? + 2.0 * wd;
    let limit = 1.0 / smoothness;
    let alpha = match cfg.step_size {
        StepSize::Auto => limit,
        StepSize::Fixed(a) => {
            if a <= 0.0 || !a.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "step_size",
                    reason: format!("must be finite and > 0, got {a}"),
                });
            }
            // Small relative slack so α = 1/L from a caller's own estimate
            // of L is not rejected for rounding reasons.
            if cfg.enforce_step_rule && a > limit * (1.0 + 1e-9) {
                return Err(Error::StepSizeTooLarge { alpha: a, limit });
            }
            a
        }
    };

    let (d, c) = (z.cols(), y.cols());
    let mut w = Matrix::zeros(d, c);
    let mut loss_trace = Vec::with_capacity(cfg.steps + 1);
    let mut weight_norm_trace = Vec::with_capacity(cfg.steps + 1);
    let mut diverged = false;
    let initial_residual_sq = ym.frobenius_norm().powi(2); // f(0)
    loss_trace.push(initial_residual_sq);
    weight_norm_trace.push(0.0);
    for _ in 0..cfg.steps {
        let residual = zm.matmul(&w)?.sub(&ym)?;
        let grad = zm.transpose_matmul(&residual)?; // Z_m^T (Z_m W - Y_m)
        if wd > 0.0 {
            w.scale(1.0 - 2.0 * alpha * wd);
        }
        w.axpy(-2.0 * alpha, &grad)?;
        let w_norm = w.frobenius_norm();
        let loss = zm.matmul(&w)?.sub(&ym)?.frobenius_norm().powi(2) + wd * w_norm * w_norm;
        loss_trace.push(loss);
        weight_norm_trace.push(w_norm);
        if !loss.is_finite() || loss > 1e12 * (initial_residual_sq + 1.0) {
            diverged = true;
            break;
        }
    }
    Ok(TrainRun {
        model: LinearModel { weights: w },
        loss_trace,
        weight_norm_trace,
        step_size: alpha,
        smoothness,
        diverged,
    })
}

/// Closed-form minimizer of the masked loss via ridge-stabilized normal
/// equations: `(Z_m^T Z_m + 1e-10·I) W = Z_m^T Y_m`.
///
/// The tiny ridge guarantees solvability when `Z_m^T Z_m` is singular while
/// perturbing well-posed solutions below observable tolerance.
pub fn least_squares_optimum(z: &Matrix, y: &Matrix, mask: &[bool]) -> Result<LinearModel> {
    check_alignment("least_squares_optimum", z, y, mask)?;
    if mask.iter().all(|&m| !m) {
        return Err(Error::EmptyMask("least_squares_optimum"));
    }
    let zm = z.select_rows(mask);
    let ym = y.select_rows(mask);
    let mut gram = zm.transpose_matmul(&zm)?;
    for i in 0..gram.rows() {
        gram.set(i, i, gram.get(i, i) + 1e-10);
    }
    let rhs = zm.transpose_matmul(&ym)?;
    let solution = gram
        .to_dmatrix()
        .cholesky()
        .ok_or(Error::FactorizationFailed("least_squares_optimum (Cholesky)"))?
        .solve(&rhs.to_dmatrix());
    Ok(LinearModel { weights: Matrix::from_dmatrix(&solution) })
}

/// Fraction of masked rows whose argmax prediction matches the label.
///
/// Prediction is `argmax_j (Z W)_ij`; ties break toward the lowest class
/// index (so an all-zero model predicts class 0 everywhere).
pub fn evaluate_accuracy(
    model: &LinearModel,
    z: &Matrix,
    labels: &[usize],
    mask: &[bool],
) -> Result<f64> {
    if z.rows() != labels.len() || z.rows() != mask.len() {
        return Err(Error::DimensionMismatch {
            op: "evaluate_accuracy",
            expected: format!("{} rows, labels and mask to match", z.rows()),
            got: format!("{} labels, {} mask entries", labels.len(), mask.len()),
        });
    }
    let total = mask.iter().filter(|&&m| m).count();
    if total == 0 {
        return Err(Error::EmptyMask("evaluate_accuracy"));
    }
    let scores = z.matmul(&model.weights)?;
    let mut correct = 0usize;
    for i in 0..z.rows() {
        if !mask[i] {
            continue;
        }
        let row = scores.row(i);
        let mut best = 0usize;
        for (j, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = j; // strict: ties keep the lowest index
            }
        }
        if best == labels[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / total as f64)
}

fn check_alignment(op: &'static str, z: &Matrix, y: &Matrix, mask: &[bool]) -> Result<()> {
    if z.rows() != y.rows() || z.rows() != mask.len() {
        return Err(Error::DimensionMismatch {
            op,
            expected: format!("{} rows in features, labels, and mask", z.rows()),
            got: format!("{} label rows, {} mask entries", y.rows(), mask.len()),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn random_matrix(n: usize, d: usize, scale: f64, salt: usize) -> Matrix {
        Matrix::from_fn(n, d, |i, j| {
            let t = ((i * 41 + j * 29 + salt * 13 + 5) % 103) as f64 / 103.0;
            scale * (t - 0.5)
        })
    }

    fn one_hot(labels: &[usize], c: usize) -> Matrix {
        Matrix::from_fn(labels.len(), c, |i, j| if labels[i] == j { 1.0 } else { 0.0 })
    }

    #[test]
    fn smoothness_of_identity_and_scaled_identity() {
        assert_abs_diff_eq!(estimate_smoothness_constant(&Matrix::identity(2)).unwrap(), 2.0, epsilon = 1e-9);
        let mut z = Matrix::identity(3);
        z.scale(3.0);
        assert_abs_diff_eq!(estimate_smoothness_constant(&z).unwrap(), 18.0, epsilon = 1e-6);
    }

    #[test]
    fn smoothness_matches_dense_svd() {
        let z = random_matrix(20, 5, 1.0, 1);
        let l = estimate_smoothness_constant(&z).unwrap();
        let svd = z.to_dmatrix().svd(false, false);
        let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let expected = 2.0 * sigma_max * sigma_max;
        assert!((l - expected).abs() <= 1e-5 * expected, "L = {l}, SVD oracle = {expected}");
    }

    #[test]
    fn zero_matrix_has_no_smoothness_constant() {
        assert!(estimate_smoothness_constant(&Matrix::zeros(4, 3)).is_err());
    }

    #[test]
    fn identity_problem_converges_in_one_step() {
        let z = Matrix::identity(2);
        let y = Matrix::identity(2);
        let cfg = TrainConfig { step_size: StepSize::Fixed(0.5), steps: 1, ..Default::default() };
        let run = train_gd(&z, &y, &[true, true], &cfg).unwrap();
        assert!(run.model.weights.sub(&y).unwrap().max_abs() < 1e-15);
        assert!(run.loss_trace[1] < 1e-25);
    }

    #[test]
    fn loss_is_non_increasing_at_safe_step_size() {
        for salt in 0..10 {
            let z = random_matrix(30, 6, 1.0, salt);
            let labels: Vec<usize> = (0..30).map(|i| (i * (salt + 2)) % 3).collect();
            let y = one_hot(&labels, 3);
            let mask = vec![true; 30];
            let cfg = TrainConfig { step_size: StepSize::Auto, steps: 500, ..Default::default() };
            let run = train_gd(&z, &y, &mask, &cfg).unwrap();
            assert!(!run.diverged);
            for w in run.loss_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "loss increased: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn gradient_descent_reaches_least_squares_loss() {
        let z = random_matrix(40, 5, 1.0, 7);
        let labels: Vec<usize> = (0..40).map(|i| i % 4).collect();
        let y = one_hot(&labels, 4);
        let mask = vec![true; 40];
        let cfg = TrainConfig { step_size: StepSize::Auto, steps: 4000, ..Default::default() };
        let run = train_gd(&z, &y, &mask, &cfg).unwrap();
        let opt = least_squares_optimum(&z, &y, &mask).unwrap();
        let opt_loss = mse_loss(&z, &y, &mask, &opt).unwrap();
        let final_loss = *run.loss_trace.last().unwrap();
        assert!(
            final_loss <= opt_loss + 1e-8,
            "final {final_loss} vs optimum {opt_loss}"
        );
    }

    #[test]
    fn convergence_rate_bound_holds() {
        // f(W^k) - f* <= ||W^0 - W*||²_F / (2 k α) for the convex quadratic.
        let z = random_matrix(25, 4, 1.0, 3);
        let labels: Vec<usize> = (0..25).map(|i| i % 2).collect();
        let y = one_hot(&labels, 2);
        let mask = vec![true; 25];
        let opt = least_squares_optimum(&z, &y, &mask).unwrap();
        let f_star = mse_loss(&z, &y, &mask, &opt).unwrap();
        let w_star_norm_sq = opt.weights.frobenius_norm().powi(2);
        for k in [5usize, 20, 100] {
            let cfg = TrainConfig { step_size: StepSize::Auto, steps: k, ..Default::default() };
            let run = train_gd(&z, &y, &mask, &cfg).unwrap();
            let bound = w_star_norm_sq / (2.0 * k as f64 * run.step_size);
            let gap = run.loss_trace.last().unwrap() - f_star;
            assert!(gap <= bound + 1e-9, "k={k}: gap {gap} > bound {bound}");
        }
    }

    #[test]
    fn least_squares_identity_recovers_labels() {
        let z = Matrix::identity(3);
        let y = one_hot(&[0, 2, 1], 3);
        let opt = least_squares_optimum(&z, &y, &[true, true, true]).unwrap();
        assert!(opt.weights.sub(&y).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn least_squares_gradient_vanishes_at_optimum() {
        let z = random_matrix(30, 6, 1.0, 9);
        let labels: Vec<usize> = (0..30).map(|i| (i * 7) % 3).collect();
        let y = one_hot(&labels, 3);
        let mask: Vec<bool> = (0..30).map(|i| i % 5 != 0).collect();
        let opt = least_squares_optimum(&z, &y, &mask).unwrap();
        let zm = z.select_rows(&mask);
        let ym = y.select_rows(&mask);
        let residual = zm.matmul(&opt.weights).unwrap().sub(&ym).unwrap();
        let mut grad = zm.transpose_matmul(&residual).unwrap();
        grad.scale(2.0);
        assert!(grad.frobenius_norm() <= 1e-6, "gradient norm {}", grad.frobenius_norm());
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        for salt in 0..10 {
            let z = random_matrix(6, 3, 1.0, salt);
            let labels: Vec<usize> = (0..6).map(|i| i % 2).collect();
            let y = one_hot(&labels, 2);
            let mask = vec![true; 6];
            let w = random_matrix(3, 2, 0.8, salt + 50);
            let zm = z.select_rows(&mask);
            let ym = y.select_rows(&mask);
            let residual = zm.matmul(&w).unwrap().sub(&ym).unwrap();
            let mut analytic = zm.transpose_matmul(&residual).unwrap();
            analytic.scale(2.0);
            let h = 1e-6;
            for i in 0..3 {
                for j in 0..2 {
                    let mut wp = w.clone();
                    wp.set(i, j, w.get(i, j) + h);
                    let mut wm = w.clone();
                    wm.set(i, j, w.get(i, j) - h);
                    let fp = mse_loss(&z, &y, &mask, &LinearModel { weights: wp }).unwrap();
                    let fm = mse_loss(&z, &y, &mask, &LinearModel { weights: wm }).unwrap();
                    let numeric = (fp - fm) / (2.0 * h);
                    let a = analytic.get(i, j);
                    let scale = a.abs().max(numeric.abs()).max(1e-3);
                    assert!(
                        (a - numeric).abs() <= 1e-5 * scale,
                        "({i},{j}): analytic {a} vs numeric {numeric}"
                    );
                }
            }
        }
    }

    #[test]
    fn oversized_step_rejected_then_permitted_without_enforcement() {
        let z = random_matrix(20, 4, 1.0, 2);
        let labels: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let y = one_hot(&labels, 2);
        let mask = vec![true; 20];
        let l = estimate_smoothness_constant(&z).unwrap();
        let too_big = TrainConfig {
            step_size: StepSize::Fixed(1.9 / l),
            steps: 200,
            ..Default::default()
        };
        assert!(matches!(train_gd(&z, &y, &mask, &too_big), Err(Error::StepSizeTooLarge { .. })));
        // 1/L < α < 2/L still converges on a quadratic once enforcement is off.
        let permitted = TrainConfig { enforce_step_rule: false, ..too_big };
        let run = train_gd(&z, &y, &mask, &permitted).unwrap();
        assert!(!run.diverged);
        let opt = least_squares_optimum(&z, &y, &mask).unwrap();
        let opt_loss = mse_loss(&z, &y, &mask, &opt).unwrap();
        assert!(run.loss_trace.last().unwrap() - opt_loss < 1e-4);
        // Beyond 2/L the quadratic diverges; the guard reports it.
        let divergent = TrainConfig {
            step_size: StepSize::Fixed(3.0 / l),
            steps: 500,
            enforce_step_rule: false,
            ..Default::default()
        };
        let run = train_gd(&z, &y, &mask, &divergent).unwrap();
        assert!(run.diverged);
    }

    #[test]
    fn weight_decay_shrinks_weights_and_still_descends() {
        let z = random_matrix(30, 5, 1.0, 4);
        let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let y = one_hot(&labels, 3);
        let mask = vec![true; 30];
        let plain = train_gd(&z, &y, &mask, &TrainConfig { steps: 800, ..Default::default() }).unwrap();
        let decayed = train_gd(
            &z,
            &y,
            &mask,
            &TrainConfig { steps: 800, weight_decay: 0.5, ..Default::default() },
        )
        .unwrap();
        assert!(!decayed.diverged);
        for w in decayed.loss_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "penalized loss increased: {} -> {}", w[0], w[1]);
        }
        let plain_norm = plain.weight_norm_trace.last().unwrap();
        let decayed_norm = decayed.weight_norm_trace.last().unwrap();
        assert!(decayed_norm < plain_norm, "decay did not shrink ||W||: {decayed_norm} vs {plain_norm}");
    }

    #[test]
    fn accuracy_perfect_chance_and_ties() {
        let z = Matrix::identity(3);
        let y = one_hot(&[0, 1, 2], 3);
        let model = LinearModel { weights: y.clone() };
        let acc = evaluate_accuracy(&model, &z, &[0, 1, 2], &[true, true, true]).unwrap();
        assert_eq!(acc, 1.0);
        // All-zero weights: every prediction ties and resolves to class 0.
        let zero = LinearModel { weights: Matrix::zeros(3, 3) };
        let acc = evaluate_accuracy(&zero, &z, &[0, 1, 2], &[true, true, true]).unwrap();
        assert_abs_diff_eq!(acc, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_mask_rejected() {
        let z = Matrix::identity(2);
        let y = one_hot(&[0, 1], 2);
        assert!(matches!(
            evaluate_accuracy(&LinearModel { weights: Matrix::zeros(2, 2) }, &z, &[0, 1], &[false, false]),
            Err(Error::EmptyMask(_))
        ));
        assert!(matches!(
            train_gd(&z, &y, &[false, false], &TrainConfig::default()),
            Err(Error::EmptyMask(_))
        ));
    }
}
