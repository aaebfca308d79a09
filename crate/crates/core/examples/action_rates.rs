//! Rates of the three transmission actions on one hand-picked channel state.
//!
//! cargo run --example action_rates

use marc_sim::rates::{a1_rate, a2_feasible, a2_rates, a3_rates};
use marc_sim::{ActionKind, BufferState, ChannelState, SystemConfig, SubsetCatalog};

fn main() -> marc_sim::Result<()> {
    let cfg = SystemConfig::from_db(3, 2, 2, 10.0, &[-6.0, -9.0, -8.0, -16.0, -13.0, -15.0, 0.0])?;
    let catalog = SubsetCatalog::new(&cfg);
    // γ per link: U→R, U→B, R→B.
    let state = ChannelState::new(0, vec![4.0, 0.5, 2.0], vec![1.0, 0.8, 0.1], 6.0);
    let buffer = BufferState::new(1.5);

    println!("A1: direct multiple access");
    for &s in catalog.subsets(ActionKind::A1) {
        println!("  {s:<4} sum-rate {:.4}", a1_rate(&state, s).sum_rate_direct);
    }

    println!("A2: UEs transmit, BS decodes part, RS stores the rest");
    for &s in catalog.subsets(ActionKind::A2) {
        match a2_rates(&state, s) {
            Ok(r) => println!("  {s:<4} direct {:.4}  stored {:.4}", r.sum_rate_direct, r.relay_rate),
            Err(_) => println!("  {s:<4} infeasible (feasible = {})", a2_feasible(&state, s)),
        }
    }

    println!("A3: RS forwards buffered bits alongside UEs (Q = {})", buffer.q);
    for &s in catalog.subsets(ActionKind::A3) {
        let clamped = a3_rates(&state, s, buffer, false);
        let decoupled = a3_rates(&state, s, buffer, true);
        println!(
            "  {s:<4} direct {:.4}  relay {:.4} (unclamped {:.4})",
            clamped.sum_rate_direct, clamped.relay_rate, decoupled.relay_rate
        );
    }

    let mut q = buffer;
    if let Some(&s) = catalog.subsets(ActionKind::A2).iter().find(|&&s| a2_feasible(&state, s)) {
        q.apply(&a2_rates(&state, s)?);
        println!("buffer after A2 on {s}: {:.4}", q.q);
    }
    Ok(())
}
