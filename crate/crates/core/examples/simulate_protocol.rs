//! Runs the buffer-aided protocol at a trained `λ*` next to direct-only
//! transmission on the same channel trace.
//!
//! cargo run --example simulate_protocol -- [slots]

use marc_sim::{
    run_direct_baseline, run_simulation, train_lambda, ActionKind, SubsetCatalog, SystemConfig, TrainerParams,
};

fn main() -> marc_sim::Result<()> {
    let slots: u64 = std::env::args().nth(1).map_or(500_000, |s| s.parse().expect("slots"));
    let seed = 1;
    for (k_r, k_b) in [(1, 1), (2, 3)] {
        let cfg = SystemConfig::from_db(3, k_r, k_b, 10.0, &[-6.0, -9.0, -8.0, -16.0, -13.0, -15.0, 0.0])?;
        let catalog = SubsetCatalog::new(&cfg);
        let dual = train_lambda(&cfg, &catalog, &TrainerParams::default()).dual();

        let adaptive = run_simulation(&cfg, &catalog, dual, slots, seed);
        let direct = run_direct_baseline(&cfg, &catalog, slots, seed);
        println!("K_R={k_r} K_B={k_b}  λ* = {:.4}", dual.lambda());
        println!(
            "  adaptive τ̄ = {:.4} ± {:.4}   direct τ̄ = {:.4}   gain {:.4} ± {:.4}",
            adaptive.tau_bar,
            adaptive.tau_standard_error(),
            direct.tau_bar,
            adaptive.tau_bar - direct.tau_bar,
            adaptive.paired_standard_error(&direct)
        );
        println!(
            "  R̄_A = {:.4}  R̄_D = {:.4}  Q(N) = {:.2}  peak Q = {:.2}",
            adaptive.arrival_rate, adaptive.departure_rate, adaptive.final_buffer, adaptive.buffer_peak
        );
        for kind in ActionKind::ALL {
            println!("  {kind:?}: {:.3} of slots", adaptive.action_frequency(kind));
        }
    }
    Ok(())
}
