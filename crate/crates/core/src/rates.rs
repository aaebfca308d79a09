//! Candidate transmitter subsets and the instantaneous rates of actions A1, A2 and A3.

use std::fmt;

use itertools::Itertools;

use crate::channel::{ChannelState, SystemConfig};
use crate::error::{Error, Result};

/// `C(x) = log₂(1 + x)`.
pub fn capacity(snr: f64) -> Result<f64> {
    if !(snr.is_finite() && snr >= 0.0) {
        return Err(Error::Domain(snr));
    }
    Ok(cap(snr))
}

/// Unchecked capacity for SNRs already known to be finite and non-negative.
#[inline]
pub(crate) fn cap(snr: f64) -> f64 {
    debug_assert!(snr >= 0.0, "negative SNR {snr}");
    snr.ln_1p() * std::f64::consts::LOG2_E
}

/// A set of UEs stored as a bit mask; bit `k` is UE `k` (zero-based).
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UeSet(u32);

impl UeSet {
    pub const EMPTY: UeSet = UeSet(0);

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        UeSet(indices.into_iter().fold(0, |mask, k| mask | (1 << k)))
    }

    pub fn from_mask(mask: u32) -> Self {
        UeSet(mask)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, ue: usize) -> bool {
        self.0 & (1 << ue) != 0
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let k = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(k)
        })
    }

    /// Sum of `values[k]` over the members.
    #[inline]
    pub fn sum(self, values: &[f64]) -> f64 {
        self.iter().map(|k| values[k]).sum()
    }
}

impl fmt::Debug for UeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.iter().map(|k| k + 1).join(","))
    }
}

/// One-based compact label, e.g. `13` for `{U1, U3}` and `-` for the empty set.
impl fmt::Display for UeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("-");
        }
        let sep = if self.iter().any(|k| k >= 9) { "+" } else { "" };
        write!(f, "{}", self.iter().map(|k| k + 1).join(sep))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    A1,
    A2,
    A3,
}

impl ActionKind {
    pub const ALL: [ActionKind; 3] = [ActionKind::A1, ActionKind::A2, ActionKind::A3];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActionKind::A1 => "A1",
            ActionKind::A2 => "A2",
            ActionKind::A3 => "A3",
        })
    }
}

/// Every admissible transmitter subset per action, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetCatalog {
    /// Size `min{K_B, M}`.
    pub a1: Vec<UeSet>,
    /// Size `K_R`.
    pub a2: Vec<UeSet>,
    /// Size `K_B - 1`; the single empty set when `K_B = 1`.
    pub a3: Vec<UeSet>,
}

impl SubsetCatalog {
    pub fn new(cfg: &SystemConfig) -> Self {
        let m = cfg.ues();
        SubsetCatalog {
            a1: combinations(m, cfg.k_b().min(m)),
            a2: combinations(m, cfg.k_r()),
            a3: combinations(m, cfg.k_b() - 1),
        }
    }

    pub fn subsets(&self, kind: ActionKind) -> &[UeSet] {
        match kind {
            ActionKind::A1 => &self.a1,
            ActionKind::A2 => &self.a2,
            ActionKind::A3 => &self.a3,
        }
    }

    pub fn len(&self) -> usize {
        self.a1.len() + self.a2.len() + self.a3.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn enumerate_subsets(cfg: &SystemConfig) -> SubsetCatalog {
    SubsetCatalog::new(cfg)
}

fn combinations(m: usize, k: usize) -> Vec<UeSet> {
    (0..m).combinations(k).map(UeSet::from_indices).collect()
}

/// Realized rates of one action in bits/symbol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionRates {
    pub kind: ActionKind,
    pub subset_index: usize,
    /// Rate decoded at the BS in this slot: `ΣR_{U_k}` (A1), `ΣR⁽¹⁾` (A2), `ΣR_{U_k''}` (A3).
    pub sum_rate_direct: f64,
    /// Rate added to the buffer (A2, `ΣR⁽²⁾`) or drained from it (A3, `R_R`); 0 for A1.
    pub relay_rate: f64,
}

impl ActionRates {
    /// Signed change of the relay buffer caused by this action.
    pub fn buffer_delta(&self) -> f64 {
        match self.kind {
            ActionKind::A1 => 0.0,
            ActionKind::A2 => self.relay_rate,
            ActionKind::A3 => -self.relay_rate,
        }
    }
}

/// Normalized information queued at the relay, `Q(i)` in bits/symbol.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BufferState {
    pub q: f64,
}

impl BufferState {
    pub fn new(q: f64) -> Self {
        debug_assert!(q >= 0.0);
        BufferState { q }
    }

    pub fn apply(&mut self, rates: &ActionRates) {
        self.q = (self.q + rates.buffer_delta()).max(0.0);
    }
}

/// A1: the subset is decoded by the BS at the polymatroid sum-rate corner.
pub fn a1_rate(state: &ChannelState, subset: UeSet) -> ActionRates {
    ActionRates {
        kind: ActionKind::A1,
        subset_index: 0,
        sum_rate_direct: cap(subset.sum(&state.snr_ub)),
        relay_rate: 0.0,
    }
}

/// `𝒳_A2`: every non-empty sub-subset has a larger sum-SNR at the RS than at
/// the BS. Member-wise strict dominance is equivalent and linear in `|subset|`.
pub fn a2_feasible(state: &ChannelState, subset: UeSet) -> bool {
    subset.iter().all(|k| state.snr_ur[k] > state.snr_ub[k])
}

/// A2: BS partially decodes at `C(Σγ_B)`, RS stores the remainder `C(Σγ_R) - C(Σγ_B)`.
pub fn a2_rates(state: &ChannelState, subset: UeSet) -> Result<ActionRates> {
    if subset.is_empty() || !a2_feasible(state, subset) {
        return Err(Error::A2Infeasible);
    }
    let direct = cap(subset.sum(&state.snr_ub));
    let relay_total = cap(subset.sum(&state.snr_ur));
    Ok(ActionRates {
        kind: ActionKind::A2,
        subset_index: 0,
        sum_rate_direct: direct,
        relay_rate: relay_total - direct,
    })
}

/// Relay rate of A3 when the RS is decoded first with the UEs as interference.
#[inline]
pub fn a3_unclamped_relay_rate(state: &ChannelState, subset: UeSet) -> f64 {
    cap(state.snr_rb / (1.0 + subset.sum(&state.snr_ub)))
}

/// A3: the subset sends new data to the BS while the RS forwards buffered
/// bits. With `decouple` the drain ignores the buffer level.
pub fn a3_rates(state: &ChannelState, subset: UeSet, buffer: BufferState, decouple: bool) -> ActionRates {
    let interference = subset.sum(&state.snr_ub);
    let unclamped = cap(state.snr_rb / (1.0 + interference));
    let relay_rate = if decouple { unclamped } else { unclamped.min(buffer.q) };
    ActionRates {
        kind: ActionKind::A3,
        subset_index: 0,
        sum_rate_direct: cap(interference),
        relay_rate,
    }
}
