//! Monte-Carlo check of the noise-concentration bound.
//!
//! Draws i.i.d. Gaussian noise matrices, pushes them through the filter, and
//! compares the largest squared entry of the output against the
//! high-probability bound 2τR²σ²(4·ln n + ln 2d)/n. The bound is loose by
//! design, so the expected violation rate is zero; anything above 1/d would
//! contradict it.
//!
//! Run with: `cargo run --release --example concentration_check`

use ngc::{verify_concentration, Graph, GraphKind, NeumannOperator, NormMode};
use std::error::Error;

fn main() -> Result<(), Box<dyn Error>> {
    let n = 512;
    let d = 32;
    let trials = 2000;

    let graph = Graph::canonical(GraphKind::Ring, n, 0)?;
    let op = NeumannOperator::new(graph.normalize(NormMode::Rw), 32.0, 16)?;

    println!("ring n = {n}, d = {d}, lambda = 32, order = 16, {trials} trials per sigma");
    println!(
        "{:>6} {:>12} {:>14} {:>14} {:>10}",
        "sigma", "bound", "mean peak^2", "max peak^2", "violations"
    );
    for sigma in [0.5, 1.0, 2.0] {
        let report = verify_concentration(&op, d, sigma, trials, 42, n)?;
        let mean_peak = report.observed.iter().sum::<f64>() / report.observed.len() as f64;
        let max_peak = report.observed.iter().cloned().fold(0.0, f64::max);
        println!(
            "{:>6} {:>12.5} {:>14.5} {:>14.5} {:>10.4}",
            sigma, report.bound, mean_peak, max_peak, report.violation_rate
        );
    }

    let tau = verify_concentration(&op, d, 1.0, 1, 42, n)?.tau;
    println!();
    println!("tau = {tau:.6} (exact, all rows)");
    println!("violation rate must stay at or below 1/d = {:.5}", 1.0 / d as f64);
    Ok(())
}
