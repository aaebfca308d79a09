//! How the dual variable `λ` shifts the per-slot choice between A1, A2 and A3.
//!
//! cargo run --example policy_decisions

use marc_sim::policy::select_action_with_metrics;
use marc_sim::{ChannelSampler, DualVariable, SubsetCatalog, SystemConfig};

fn main() -> marc_sim::Result<()> {
    let cfg = SystemConfig::from_db(3, 1, 1, 10.0, &[-6.0, -9.0, -8.0, -16.0, -13.0, -15.0, 0.0])?;
    let catalog = SubsetCatalog::new(&cfg);
    let state = ChannelSampler::new(&cfg, 3, 0).sample_slot(0);
    println!("U→R {:.3?}  U→B {:.3?}  R→B {:.3}", state.snr_ur, state.snr_ub, state.snr_rb);

    for lambda in [-1.5, -1.0, -0.8, -0.5, 0.0, 0.5, 2.0] {
        let dual = DualVariable(lambda);
        let d = select_action_with_metrics(&state, &catalog, dual);
        let subset = d.action.subset(&catalog);
        print!("λ = {lambda:>5}: {:?} {subset:<3} metric {:.4}", d.action.kind, d.metric_value);
        if dual.is_case_two() {
            print!("  (direct transmission only)");
        }
        println!();
        if let Some(all) = d.all_metrics {
            for (a, m) in all {
                println!("      {:?} {:<3} {m:.4}", a.kind, a.subset(&catalog).to_string());
            }
        }
    }

    // Share of slots per action as λ grows.
    let mut sampler = ChannelSampler::new(&cfg, 3, 0);
    let states: Vec<_> = (0..20_000).map(|i| sampler.sample_slot(i)).collect();
    println!("\n{:>6} {:>6} {:>6} {:>6}", "λ", "A1", "A2", "A3");
    for lambda in [-0.9, -0.6, -0.3, 0.0, 0.5] {
        let mut counts = [0usize; 3];
        for st in &states {
            counts[marc_sim::select_action(st, &catalog, DualVariable(lambda)).action.kind.index()] += 1;
        }
        let f = counts.map(|c| c as f64 / states.len() as f64);
        println!("{lambda:>6} {:>6.3} {:>6.3} {:>6.3}", f[0], f[1], f[2]);
    }
    Ok(())
}
