//! Slot-by-slot execution of the protocol with the real, clamped relay buffer.

use std::io::Write;

use crate::channel::{ChannelSampler, ChannelState, SystemConfig};
use crate::error::Result;
use crate::numfmt::sig6;
use crate::policy::{select_action, Action, Decision, DualVariable};
use crate::rates::{a1_rate, a2_rates, a3_rates, ActionKind, BufferState, SubsetCatalog};

/// Channel epoch used by evaluation runs. Trainer batches use other epochs.
pub const EVAL_EPOCH: u64 = 0;

/// Number of contiguous blocks used for batch-means standard errors.
pub const SE_BLOCKS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotOutcome {
    pub slot: u64,
    pub action: Action,
    /// Information decoded at the BS in this slot.
    pub delivered: f64,
    pub buffer_before: f64,
    pub buffer_after: f64,
    /// Bits stored at the RS (A2).
    pub arrival: f64,
    /// Bits drained from the RS (A3).
    pub departure: f64,
}

/// Executes `decision` on `state`, updating `buffer` in place.
///
/// The A3 drain is clamped by the buffer content. An A2 decision on an
/// infeasible subset delivers and stores nothing.
pub fn apply_action(
    state: &ChannelState,
    catalog: &SubsetCatalog,
    decision: &Decision,
    buffer: &mut BufferState,
) -> SlotOutcome {
    let action = decision.action;
    let subset = action.subset(catalog);
    let before = *buffer;
    let (delivered, arrival, departure) = match action.kind {
        ActionKind::A1 => (a1_rate(state, subset).sum_rate_direct, 0.0, 0.0),
        ActionKind::A2 => match a2_rates(state, subset) {
            Ok(r) => (r.sum_rate_direct, r.relay_rate, 0.0),
            Err(_) => (0.0, 0.0, 0.0),
        },
        ActionKind::A3 => {
            let r = a3_rates(state, subset, before, false);
            (r.sum_rate_direct + r.relay_rate, 0.0, r.relay_rate)
        }
    };
    buffer.q = (before.q + arrival - departure).max(0.0);
    SlotOutcome {
        slot: state.slot_index,
        action,
        delivered,
        buffer_before: before.q,
        buffer_after: buffer.q,
        arrival,
        departure,
    }
}

/// Aggregate statistics of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationReport {
    pub slots: u64,
    /// Average delivered sum-rate per slot.
    pub tau_bar: f64,
    pub arrival_rate: f64,
    pub departure_rate: f64,
    /// Indexed by [`ActionKind::index`].
    pub action_counts: [u64; 3],
    /// Per-subset selection counts, indexed like the catalog lists.
    pub subset_counts: [Vec<u64>; 3],
    /// Delivered information summed per action kind.
    pub delivered_by_kind: [f64; 3],
    pub total_delivered: f64,
    pub total_arrival: f64,
    pub total_departure: f64,
    pub final_buffer: f64,
    pub buffer_peak: f64,
    /// Mean throughput of each of the contiguous blocks used for standard errors.
    pub block_throughput: Vec<f64>,
}

impl SimulationReport {
    /// `|R̄_A - R̄_D|`.
    pub fn residual(&self) -> f64 {
        (self.arrival_rate - self.departure_rate).abs()
    }

    /// `|R̄_A - R̄_D| / max(R̄_A, R̄_D, 1e-6)`.
    pub fn relative_residual(&self) -> f64 {
        self.residual() / self.arrival_rate.max(self.departure_rate).max(1e-6)
    }

    pub fn action_frequency(&self, kind: ActionKind) -> f64 {
        self.action_counts[kind.index()] as f64 / self.slots as f64
    }

    /// Batch-means standard error of `tau_bar`.
    pub fn tau_standard_error(&self) -> f64 {
        standard_error(&self.block_throughput)
    }

    /// Batch-means standard error of `self.tau_bar - other.tau_bar` on a shared channel trace.
    pub fn paired_standard_error(&self, other: &SimulationReport) -> f64 {
        let diffs: Vec<f64> = self
            .block_throughput
            .iter()
            .zip(&other.block_throughput)
            .map(|(a, b)| a - b)
            .collect();
        standard_error(&diffs)
    }
}

/// Neumaier-compensated running sum; keeps million-term totals exact to a few ulps.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn standard_error(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// How a run chooses its action every slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Policy {
    /// Selection metrics at the given `λ`.
    Adaptive(DualVariable),
    /// Best A1 subset only; relay unused.
    DirectOnly,
}

impl Policy {
    pub fn decide(&self, state: &ChannelState, catalog: &SubsetCatalog) -> Decision {
        match *self {
            Policy::Adaptive(dual) => select_action(state, catalog, dual),
            Policy::DirectOnly => select_action(state, catalog, DualVariable(-1.0)),
        }
    }
}

/// Runs `slots` slots with `Q(0) = 0`, calling `observer` after every slot.
pub fn run_with_observer<F>(
    cfg: &SystemConfig,
    catalog: &SubsetCatalog,
    policy: Policy,
    slots: u64,
    seed: u64,
    mut observer: F,
) -> SimulationReport
where
    F: FnMut(&ChannelState, &SlotOutcome),
{
    assert!(slots >= 1, "a run needs at least one slot");
    let mut sampler = ChannelSampler::new(cfg, seed, EVAL_EPOCH);
    let mut state = ChannelState::zeroed(cfg.ues());
    let mut buffer = BufferState::default();

    let blocks = SE_BLOCKS.min(slots as usize);
    let mut block_throughput = Vec::with_capacity(blocks);
    let mut block = 0;
    let mut block_sum = 0.0;
    let mut block_len = 0u64;
    let block_end = |b: usize| (b as u64 + 1) * slots / blocks as u64;

    let mut action_counts = [0u64; 3];
    let mut subset_counts = [
        vec![0u64; catalog.a1.len()],
        vec![0u64; catalog.a2.len()],
        vec![0u64; catalog.a3.len()],
    ];
    let mut delivered_by_kind = [CompensatedSum::default(); 3];
    let mut total_delivered = CompensatedSum::default();
    let mut total_arrival = CompensatedSum::default();
    let mut total_departure = CompensatedSum::default();
    let mut buffer_peak = 0.0f64;

    for slot in 0..slots {
        sampler.sample_into(slot, &mut state);
        let decision = policy.decide(&state, catalog);
        let outcome = apply_action(&state, catalog, &decision, &mut buffer);
        observer(&state, &outcome);

        let kind = outcome.action.kind.index();
        action_counts[kind] += 1;
        subset_counts[kind][outcome.action.subset_index] += 1;
        delivered_by_kind[kind].add(outcome.delivered);
        total_delivered.add(outcome.delivered);
        total_arrival.add(outcome.arrival);
        total_departure.add(outcome.departure);
        buffer_peak = buffer_peak.max(buffer.q);

        block_sum += outcome.delivered;
        block_len += 1;
        if slot + 1 == block_end(block) {
            block_throughput.push(block_sum / block_len as f64);
            block += 1;
            block_sum = 0.0;
            block_len = 0;
        }
    }

    let n = slots as f64;
    let (total_delivered, total_arrival, total_departure) =
        (total_delivered.value(), total_arrival.value(), total_departure.value());
    SimulationReport {
        slots,
        tau_bar: total_delivered / n,
        arrival_rate: total_arrival / n,
        departure_rate: total_departure / n,
        action_counts,
        subset_counts,
        delivered_by_kind: delivered_by_kind.map(|s| s.value()),
        total_delivered,
        total_arrival,
        total_departure,
        final_buffer: buffer.q,
        buffer_peak,
        block_throughput,
    }
}

pub fn run_simulation(
    cfg: &SystemConfig,
    catalog: &SubsetCatalog,
    dual: DualVariable,
    slots: u64,
    seed: u64,
) -> SimulationReport {
    run_with_observer(cfg, catalog, Policy::Adaptive(dual), slots, seed, |_, _| {})
}

/// A1-only reference run on the same channel trace as [`run_simulation`] with equal seed.
pub fn run_direct_baseline(cfg: &SystemConfig, catalog: &SubsetCatalog, slots: u64, seed: u64) -> SimulationReport {
    run_with_observer(cfg, catalog, Policy::DirectOnly, slots, seed, |_, _| {})
}

/// Per-slot CSV trace: `run,slot,action_kind,subset,delivered,arrival,departure,buffer_after`.
pub struct SlotTraceWriter<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> SlotTraceWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut out = csv::Writer::from_writer(out);
        out.write_record([
            "run",
            "slot",
            "action_kind",
            "subset",
            "delivered",
            "arrival",
            "departure",
            "buffer_after",
        ])?;
        Ok(SlotTraceWriter { out })
    }

    pub fn record(&mut self, run: &str, catalog: &SubsetCatalog, outcome: &SlotOutcome) -> Result<()> {
        self.out.write_record([
            run.to_string(),
            outcome.slot.to_string(),
            outcome.action.kind.to_string(),
            outcome.action.subset(catalog).to_string(),
            sig6(outcome.delivered),
            sig6(outcome.arrival),
            sig6(outcome.departure),
            sig6(outcome.buffer_after),
        ])?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        self.out.into_inner().map_err(|e| e.into_error().into())
    }
}
