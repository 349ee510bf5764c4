//! Worst-case similarity perturbation: closed form vs random search.
//!
//! The robust filter's inner maximization — find the symmetric perturbation
//! Δ with ||Δ||_F ≤ ε that most increases the similarity objective
//! ⟨Δ, FF^T⟩ — has the closed-form solution Δ* = ε·FF^T/||FF^T||_F with
//! value ε·||FF^T||_F. This example draws random feasible perturbations and
//! confirms none of them beats the closed form, then checks that the robust
//! operator at ε = 0 reduces to the plain one.
//!
//! Run with: `cargo run --release --example robust_inner_max`

use ngc::{
    inner_objective, worst_case_delta, Graph, GraphKind, Matrix, NeumannOperator, NormMode,
    RobustOperator, SimilarityMode,
};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use std::error::Error;

fn main() -> Result<(), Box<dyn Error>> {
    let n = 8;
    let d = 3;
    let epsilon = 0.5;
    let samples = 100_000;

    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let features = Matrix::from_fn(n, d, |_, _| rng.random::<f64>() * 2.0 - 1.0);

    let best = worst_case_delta(&features, epsilon)?;
    let closed_form = inner_objective(&best.delta, &features)?;
    println!("closed-form objective: {closed_form:.9}");

    // Random symmetric perturbations on the Frobenius sphere of radius ε.
    let mut beaten = 0usize;
    let mut best_random = f64::NEG_INFINITY;
    for _ in 0..samples {
        let raw = Matrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let mut sym = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                sym.set(i, j, 0.5 * (raw.get(i, j) + raw.get(j, i)));
            }
        }
        let scale = epsilon / sym.frobenius_norm();
        sym.scale(scale);
        let value = inner_objective(&sym, &features)?;
        best_random = best_random.max(value);
        if value > closed_form {
            beaten += 1;
        }
    }
    println!("best of {samples} random feasible perturbations: {best_random:.9}");
    println!("random draws beating the closed form: {beaten}");

    // ε = 0 turns the robust operator into the plain filter.
    let graph = Graph::canonical(GraphKind::Ring, n, 0)?;
    let base = NeumannOperator::new(graph.normalize(NormMode::Rw), 4.0, 8)?;
    let plain = base.propagate(&features)?;
    let robust = RobustOperator::new(base, 0.0, SimilarityMode::Dense, &features)?;
    let robust_out = robust.propagate(&features)?;
    let gap = robust_out.sub(&plain)?.max_abs();
    println!();
    println!("robust output at epsilon = 0 vs plain filter, max |difference|: {gap:.3e}");
    Ok(())
}
