use marc_sim::trainer::{batch_stats, lambda_grid, SelectionRule};
use marc_sim::policy::select_relaxed;
use marc_sim::*;

fn fig4(k_r: usize, k_b: usize) -> SystemConfig {
    SystemConfig::from_db(3, k_r, k_b, 10.0, &[-6.0, -9.0, -8.0, -16.0, -13.0, -15.0, 0.0]).unwrap()
}

fn relay_useless() -> SystemConfig {
    SystemConfig::from_db(3, 1, 1, 10.0, &[-40.0, -40.0, -40.0, -16.0, -13.0, -15.0, 0.0]).unwrap()
}

fn std_dev(x: &[f64]) -> f64 {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

#[test]
fn gradient_signs_at_extremes() {
    let cfg = relay_useless()
        .with_gain(LinkId::RelayBase, db_to_linear(-60.0))
        .unwrap();
    let cat = SubsetCatalog::new(&cfg);
    for lambda in [-1.0, 0.0, 2.0] {
        let d = estimate_gradient(DualVariable(lambda), &cfg, &cat, 50_000, 3);
        assert!(d <= 0.0 && d.abs() < 1e-4, "λ={lambda}: {d}");
    }

    let cfg = fig4(2, 3);
    let cat = SubsetCatalog::new(&cfg);
    let d = estimate_gradient(DualVariable(1e3), &cfg, &cat, 50_000, 3);
    assert!(d <= 0.0, "{d}");
}

#[test]
fn gradient_decreases_in_lambda() {
    let cfg = fig4(1, 1);
    let cat = SubsetCatalog::new(&cfg);
    let grads: Vec<f64> = [-0.9, -0.6, -0.3, 0.0, 0.5]
        .iter()
        .map(|&l| batch_stats(&cfg, &cat, DualVariable(l), 50_000, 4, 1, SelectionRule::Relaxed).gradient())
        .collect();
    assert!(grads.windows(2).all(|w| w[1] <= w[0]), "{grads:?}");
    assert!(grads[0] > 0.0 && grads[4] < 0.0);
}

#[test]
fn relay_useless_degenerates_to_case_two() {
    let cfg = relay_useless();
    let cat = SubsetCatalog::new(&cfg);
    let t = train_lambda(&cfg, &cat, &TrainerParams::default());
    assert!(t.case2 && t.lambda_star <= -1.0);
    let r = run_simulation(&cfg, &cat, t.dual(), 200_000, 2);
    assert!(r.action_frequency(ActionKind::A1) >= 0.99);
}

#[test]
fn grid_matches_case_two_when_relay_useless() {
    let cfg = relay_useless();
    let cat = SubsetCatalog::new(&cfg);
    let grid = lambda_grid(-1.0, 5.0, 0.05);
    let lambda = grid_search_lambda(&cfg, &cat, &grid, 50_000, 6);
    assert_eq!(lambda, -1.0);
    let mut sampler = ChannelSampler::new(&cfg, 6, 0);
    for slot in 0..20_000 {
        let st = sampler.sample_slot(slot);
        let grid_pick = select_relaxed(&st, &cat, DualVariable(lambda)).action;
        let case_two = select_action(&st, &cat, DualVariable(-1.0)).action;
        assert_eq!(grid_pick, case_two, "slot {slot}");
    }
}

#[test]
fn training_is_deterministic() {
    let cfg = fig4(1, 1);
    let cat = SubsetCatalog::new(&cfg);
    let params = TrainerParams {
        batch_slots: 20_000,
        seed: 12,
        ..TrainerParams::default()
    };
    let a = train_lambda(&cfg, &cat, &params);
    let b = train_lambda(&cfg, &cat, &params);
    assert_eq!(a, b);
    let c = train_lambda(&cfg, &cat, &TrainerParams { seed: 13, ..params });
    assert_ne!(a.trace, c.trace);
}

#[test]
fn step_size_insensitivity() {
    let cfg = fig4(1, 1);
    let cat = SubsetCatalog::new(&cfg);
    let base = TrainerParams::default();
    let full = train_lambda(&cfg, &cat, &base);
    let half = train_lambda(&cfg, &cat, &TrainerParams { step0: base.step0 / 2.0, ..base });
    assert!(full.converged && half.converged);
    assert!((full.lambda_star - half.lambda_star).abs() <= 0.05, "{} vs {}", full.lambda_star, half.lambda_star);
}

#[test]
fn trace_records_every_iteration() {
    let cfg = fig4(1, 1);
    let cat = SubsetCatalog::new(&cfg);
    let t = train_lambda(&cfg, &cat, &TrainerParams { batch_slots: 20_000, ..TrainerParams::default() });
    assert_eq!(t.trace.len(), t.iterations);
    assert!(t.trace.iter().all(|r| r.lambda >= -1.0));
    assert_eq!(t.trace.last().unwrap().delta_lambda.abs(), t.residual);
}

#[test]
fn estimator_variance_scales_with_batch() {
    let cfg = fig4(1, 1);
    let cat = SubsetCatalog::new(&cfg);
    let dual = DualVariable(-0.64);
    let estimates = |batch: u64| -> Vec<f64> {
        (0..300u64).map(|seed| estimate_gradient(dual, &cfg, &cat, batch, 1000 + seed)).collect()
    };
    let ratio = std_dev(&estimates(5_000)) / std_dev(&estimates(10_000));
    assert!((ratio / std::f64::consts::SQRT_2 - 1.0).abs() < 0.2, "ratio {ratio}");
}
