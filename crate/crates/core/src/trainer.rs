//! Stochastic gradient search for the dual variable `λ*` that balances relay
//! buffer arrivals and departures, plus a grid-search cross-check.
//!
//! Expectations are estimated on fresh Monte-Carlo batches with the buffer
//! decoupled from the channel: an A3 slot always drains its full relay rate.
//! The iterate is kept in `[-1, ∞)`; at `λ = -1` the gradient is taken with
//! the three-family rule (the right-hand limit), and a non-positive value
//! there means the relay should not be used at all.

use std::io::Write;

use rayon::prelude::*;

use crate::channel::{ChannelSampler, ChannelState, SystemConfig};
use crate::error::Result;
use crate::numfmt::sig6;
use crate::policy::{select_action, select_relaxed, Decision, DualVariable};
use crate::rates::{a2_feasible, a3_unclamped_relay_rate, cap, ActionKind, SubsetCatalog};

/// Channel epoch reserved for grid search; trainer iteration `s` uses `s + 1`.
pub const GRID_EPOCH: u64 = u64::MAX;

const CHUNK_SLOTS: u64 = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepSchedule {
    /// `δ[s] = δ₀`
    Constant,
    /// `δ[s] = δ₀ / (1 + s)`
    Inverse,
    /// `δ[s] = δ₀ / √(1 + s)`
    InverseSqrt,
}

impl StepSchedule {
    pub fn step(self, step0: f64, iteration: usize) -> f64 {
        let s = iteration as f64;
        match self {
            StepSchedule::Constant => step0,
            StepSchedule::Inverse => step0 / (1.0 + s),
            StepSchedule::InverseSqrt => step0 / (1.0 + s).sqrt(),
        }
    }
}

impl std::str::FromStr for StepSchedule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "constant" => Ok(StepSchedule::Constant),
            "inverse" => Ok(StepSchedule::Inverse),
            "inverse_sqrt" => Ok(StepSchedule::InverseSqrt),
            other => Err(format!(
                "unknown step schedule `{other}` (expected constant, inverse or inverse_sqrt)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainerParams {
    pub lambda_init: f64,
    pub step0: f64,
    pub step_schedule: StepSchedule,
    /// Monte-Carlo slots per gradient estimate; 10⁴ or more is advisable.
    pub batch_slots: u64,
    /// Stop once `|Δλ| ≤ tol`.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for TrainerParams {
    fn default() -> Self {
        TrainerParams {
            lambda_init: 0.0,
            step0: 1.0,
            step_schedule: StepSchedule::InverseSqrt,
            batch_slots: 100_000,
            tol: 1e-3,
            max_iters: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub lambda: f64,
    pub delta_lambda: f64,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainerResult {
    pub lambda_star: f64,
    pub iterations: usize,
    /// `|Δλ|` at the last iteration.
    pub residual: f64,
    pub converged: bool,
    /// `λ* ≤ -1`: direct transmission only.
    pub case2: bool,
    pub trace: Vec<TraceRow>,
}

impl TrainerResult {
    pub fn dual(&self) -> DualVariable {
        DualVariable(self.lambda_star)
    }

    /// CSV with columns `iteration,lambda,delta_lambda,step`.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "lambda", "delta_lambda", "step"])?;
        for row in &self.trace {
            w.write_record([
                row.iteration.to_string(),
                sig6(row.lambda),
                sig6(row.delta_lambda),
                sig6(row.step),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Which argmax rule a batch evaluation applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionRule {
    /// The two-case rule used by the protocol itself.
    Standard,
    /// Three-family argmax for every `λ`, see [`select_relaxed`].
    Relaxed,
}

/// Per-slot means of a decoupled batch.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BatchStats {
    pub slots: u64,
    pub arrival: f64,
    pub departure: f64,
    /// Decoupled throughput: A1 `C(Σγ_B)`, A2 `C(Σγ_B)`, A3 `C(Σγ_B) + r`.
    pub throughput: f64,
}

impl BatchStats {
    /// `Δλ`: mean arrival minus mean departure.
    pub fn gradient(&self) -> f64 {
        self.arrival - self.departure
    }

    fn add(mut self, other: BatchStats) -> BatchStats {
        self.slots += other.slots;
        self.arrival += other.arrival;
        self.departure += other.departure;
        self.throughput += other.throughput;
        self
    }

    fn into_means(mut self) -> BatchStats {
        let n = self.slots.max(1) as f64;
        self.arrival /= n;
        self.departure /= n;
        self.throughput /= n;
        self
    }
}

/// Arrival, departure and decoupled throughput of one decided slot.
fn slot_contribution(state: &ChannelState, catalog: &SubsetCatalog, decision: &Decision) -> (f64, f64, f64) {
    let subset = decision.action.subset(catalog);
    match decision.action.kind {
        ActionKind::A1 => (0.0, 0.0, cap(subset.sum(&state.snr_ub))),
        ActionKind::A2 if a2_feasible(state, subset) => {
            let direct = cap(subset.sum(&state.snr_ub));
            (cap(subset.sum(&state.snr_ur)) - direct, 0.0, direct)
        }
        ActionKind::A2 => (0.0, 0.0, 0.0),
        ActionKind::A3 => {
            let r = a3_unclamped_relay_rate(state, subset);
            (0.0, r, cap(subset.sum(&state.snr_ub)) + r)
        }
    }
}

fn decide(state: &ChannelState, catalog: &SubsetCatalog, dual: DualVariable, rule: SelectionRule) -> Decision {
    match rule {
        SelectionRule::Standard => select_action(state, catalog, dual),
        SelectionRule::Relaxed => select_relaxed(state, catalog, dual),
    }
}

/// Decoupled batch statistics over the given channel states.
pub fn batch_stats_from_states(
    states: &[ChannelState],
    catalog: &SubsetCatalog,
    dual: DualVariable,
    rule: SelectionRule,
) -> BatchStats {
    states
        .iter()
        .map(|st| {
            let (a, d, t) = slot_contribution(st, catalog, &decide(st, catalog, dual, rule));
            BatchStats {
                slots: 1,
                arrival: a,
                departure: d,
                throughput: t,
            }
        })
        .fold(BatchStats::default(), BatchStats::add)
        .into_means()
}

/// Decoupled batch statistics over slots `0..batch` of channel epoch `epoch`.
///
/// Slots are processed in fixed-size chunks that may run in parallel; chunk
/// sums are combined in order so the result does not depend on scheduling.
pub fn batch_stats(
    cfg: &SystemConfig,
    catalog: &SubsetCatalog,
    dual: DualVariable,
    batch: u64,
    seed: u64,
    epoch: u64,
    rule: SelectionRule,
) -> BatchStats {
    let chunks = batch.div_ceil(CHUNK_SLOTS);
    let partial: Vec<BatchStats> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sampler = ChannelSampler::new(cfg, seed, epoch);
            let mut state = ChannelState::zeroed(cfg.ues());
            let mut acc = BatchStats::default();
            for slot in c * CHUNK_SLOTS..((c + 1) * CHUNK_SLOTS).min(batch) {
                sampler.sample_into(slot, &mut state);
                let (a, d, t) = slot_contribution(&state, catalog, &decide(&state, catalog, dual, rule));
                acc.slots += 1;
                acc.arrival += a;
                acc.departure += d;
                acc.throughput += t;
            }
            acc
        })
        .collect();
    partial.into_iter().fold(BatchStats::default(), BatchStats::add).into_means()
}

/// Monte-Carlo estimate of `Δλ = R̄_A - R̄_D` under the decoupled policy at `dual`.
pub fn estimate_gradient(
    dual: DualVariable,
    cfg: &SystemConfig,
    catalog: &SubsetCatalog,
    batch: u64,
    seed: u64,
) -> f64 {
    batch_stats(cfg, catalog, dual, batch, seed, 1, SelectionRule::Standard).gradient()
}

/// Projected stochastic gradient iteration `λ[s+1] = max(-1, λ[s] + δ[s]·Δλ[s])`.
pub fn train_lambda(cfg: &SystemConfig, catalog: &SubsetCatalog, params: &TrainerParams) -> TrainerResult {
    let mut lambda = params.lambda_init.max(-1.0);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut residual = f64::INFINITY;

    for s in 0..params.max_iters {
        let epoch = s as u64 + 1;
        let delta = batch_stats(
            cfg,
            catalog,
            DualVariable(lambda),
            params.batch_slots,
            params.seed,
            epoch,
            SelectionRule::Relaxed,
        )
        .gradient();
        let step = params.step_schedule.step(params.step0, s);
        trace.push(TraceRow {
            iteration: s,
            lambda,
            delta_lambda: delta,
            step,
        });
        residual = delta.abs();
        log::debug!("iteration {s}: λ={lambda:.6} Δλ={delta:.6}");
        if residual <= params.tol || (lambda <= -1.0 && delta <= 0.0) {
            converged = true;
            break;
        }
        lambda = (lambda + step * delta).max(-1.0);
    }

    TrainerResult {
        lambda_star: lambda,
        iterations: trace.len(),
        residual,
        converged,
        case2: lambda <= -1.0,
        trace,
    }
}

/// One evaluated grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub lambda: f64,
    pub stats: BatchStats,
}

impl GridPoint {
    pub fn residual(&self) -> f64 {
        self.stats.gradient().abs()
    }
}

/// Evaluates every grid `λ` on one shared batch (common random numbers).
/// Uses the three-family rule so that `λ = -1` is not trivially balanced.
pub fn grid_evaluate(cfg: &SystemConfig, catalog: &SubsetCatalog, grid: &[f64], batch: u64, seed: u64) -> Vec<GridPoint> {
    grid.iter()
        .map(|&lambda| GridPoint {
            lambda,
            stats: batch_stats(
                cfg,
                catalog,
                DualVariable(lambda),
                batch,
                seed,
                GRID_EPOCH,
                SelectionRule::Relaxed,
            ),
        })
        .collect()
}

/// The grid `λ` with the smallest balance residual; higher decoupled throughput breaks ties.
pub fn grid_search_lambda(cfg: &SystemConfig, catalog: &SubsetCatalog, grid: &[f64], batch: u64, seed: u64) -> f64 {
    assert!(!grid.is_empty(), "grid search needs at least one point");
    best_grid_point(&grid_evaluate(cfg, catalog, grid, batch, seed)).lambda
}

pub fn best_grid_point(points: &[GridPoint]) -> GridPoint {
    let mut best = points[0];
    for &p in &points[1..] {
        let better = p.residual() < best.residual()
            || (p.residual() == best.residual() && p.stats.throughput > best.stats.throughput);
        if better {
            best = p;
        }
    }
    best
}

/// `start, start+step, ..., stop` (inclusive, rounded to the step grid).
pub fn lambda_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}
