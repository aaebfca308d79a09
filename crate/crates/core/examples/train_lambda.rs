//! Trains `λ*` with the stochastic dual gradient iteration, compares it with a
//! grid search and writes the iteration trace.
//!
//! cargo run --example train_lambda -- [trace.csv]

use std::fs::File;

use marc_sim::trainer::{best_grid_point, grid_evaluate, lambda_grid};
use marc_sim::{train_lambda, SubsetCatalog, SystemConfig, TrainerParams};

fn main() -> marc_sim::Result<()> {
    let cfg = SystemConfig::from_db(3, 1, 1, 10.0, &[-6.0, -9.0, -8.0, -16.0, -13.0, -15.0, 0.0])?;
    let catalog = SubsetCatalog::new(&cfg);
    let params = TrainerParams::default();
    let result = train_lambda(&cfg, &catalog, &params);
    println!(
        "λ* = {:.4} after {} iterations (|Δλ| = {:.2e}, converged = {}, case II = {})",
        result.lambda_star, result.iterations, result.residual, result.converged, result.case2
    );
    for row in result.trace.iter().step_by(10) {
        println!("  s={:>3} λ={:>8.4} Δλ={:>8.4} δ={:.4}", row.iteration, row.lambda, row.delta_lambda, row.step);
    }

    let grid = lambda_grid(-1.0, 5.0, 0.05);
    let points = grid_evaluate(&cfg, &catalog, &grid, params.batch_slots, params.seed);
    let best = best_grid_point(&points);
    println!("grid search: λ = {:.2} with |R̄_A − R̄_D| = {:.4}", best.lambda, best.residual());

    if let Some(path) = std::env::args().nth(1) {
        result.write_trace_csv(File::create(&path)?)?;
        println!("trace written to {path}");
    }
    Ok(())
}
