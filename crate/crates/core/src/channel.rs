//! Block Rayleigh fading for the UE→RS, UE→BS and RS→BS links.
//!
//! Every link owns an independent ChaCha8 stream keyed by
//! `(seed, epoch, link)`. The draw for slot `i` sits at a fixed position in
//! that stream, so a slot can be regenerated in isolation and adding a UE never
//! moves the draws of the existing links. Only the channel power `|h|²` is
//! produced; it is exponential with mean `Ω_XY`, and the SNR is `Γ·|h|²`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest UE count supported; UE subsets are stored as 32-bit masks.
pub const MAX_UES: usize = 32;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Identifies one wireless link. UE indices are zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkId {
    UeRelay(usize),
    UeBase(usize),
    RelayBase,
}

impl LinkId {
    /// Stable stream identifier; depends only on the link, never on `M`.
    pub fn stream_id(self) -> u64 {
        match self {
            LinkId::UeRelay(m) => (1 << 32) | m as u64,
            LinkId::UeBase(m) => (2 << 32) | m as u64,
            LinkId::RelayBase => 3 << 32,
        }
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkId::UeRelay(m) => write!(f, "U{}R", m + 1),
            LinkId::UeBase(m) => write!(f, "U{}B", m + 1),
            LinkId::RelayBase => f.write_str("RB"),
        }
    }
}

/// Node counts, access limits, SNR budget and average link gains (linear scale).
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    ues: usize,
    k_r: usize,
    k_b: usize,
    gamma: f64,
    ue_relay: Vec<f64>,
    ue_base: Vec<f64>,
    relay_base: f64,
}

impl SystemConfig {
    /// `omega` is ordered `[U1R..UMR, U1B..UMB, RB]` and must have `2M+1` entries.
    pub fn new(ues: usize, k_r: usize, k_b: usize, gamma: f64, omega: &[f64]) -> Result<Self> {
        if ues == 0 || ues > MAX_UES {
            return Err(Error::Config(format!(
                "number of UEs must be in 1..={MAX_UES}, got {ues}"
            )));
        }
        if omega.len() != 2 * ues + 1 {
            return Err(Error::Config(format!(
                "expected {} gains for M={ues}, got {}",
                2 * ues + 1,
                omega.len()
            )));
        }
        let cfg = SystemConfig {
            ues,
            k_r,
            k_b,
            gamma,
            ue_relay: omega[..ues].to_vec(),
            ue_base: omega[ues..2 * ues].to_vec(),
            relay_base: omega[2 * ues],
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same as [`SystemConfig::new`] with `Γ` and `Ω` given in dB.
    pub fn from_db(ues: usize, k_r: usize, k_b: usize, gamma_db: f64, omega_db: &[f64]) -> Result<Self> {
        let omega: Vec<f64> = omega_db.iter().copied().map(db_to_linear).collect();
        Self::new(ues, k_r, k_b, db_to_linear(gamma_db), &omega)
    }

    fn validate(&self) -> Result<()> {
        let m = self.ues;
        if !(1..=m).contains(&self.k_r) {
            return Err(Error::Config(format!("K_R must be in 1..={m}, got {}", self.k_r)));
        }
        if !(1..=m + 1).contains(&self.k_b) {
            return Err(Error::Config(format!("K_B must be in 1..={}, got {}", m + 1, self.k_b)));
        }
        if self.k_b < self.k_r {
            log::warn!("K_B={} is smaller than K_R={}", self.k_b, self.k_r);
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::Config(format!("SNR budget must be positive, got {}", self.gamma)));
        }
        for link in self.links() {
            let g = self.gain(link);
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::Config(format!("gain of link {link} must be positive, got {g}")));
            }
        }
        Ok(())
    }

    pub fn ues(&self) -> usize {
        self.ues
    }

    pub fn k_r(&self) -> usize {
        self.k_r
    }

    pub fn k_b(&self) -> usize {
        self.k_b
    }

    /// `Γ = P/N₀`, linear.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Average channel gain `Ω_XY`, linear.
    pub fn gain(&self, link: LinkId) -> f64 {
        match link {
            LinkId::UeRelay(m) => self.ue_relay[m],
            LinkId::UeBase(m) => self.ue_base[m],
            LinkId::RelayBase => self.relay_base,
        }
    }

    /// All `2M+1` links in the canonical `[U1R..UMR, U1B..UMB, RB]` order.
    pub fn links(&self) -> impl Iterator<Item = LinkId> + '_ {
        (0..self.ues)
            .map(LinkId::UeRelay)
            .chain((0..self.ues).map(LinkId::UeBase))
            .chain(std::iter::once(LinkId::RelayBase))
    }

    /// The gain vector in canonical order.
    pub fn omega(&self) -> Vec<f64> {
        self.links().map(|l| self.gain(l)).collect()
    }

    pub fn with_gain(&self, link: LinkId, gain: f64) -> Result<Self> {
        let mut cfg = self.clone();
        match link {
            LinkId::UeRelay(m) if m < self.ues => cfg.ue_relay[m] = gain,
            LinkId::UeBase(m) if m < self.ues => cfg.ue_base[m] = gain,
            LinkId::RelayBase => cfg.relay_base = gain,
            _ => return Err(Error::Config(format!("link {link} does not exist for M={}", self.ues))),
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.gamma = gamma;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_access(&self, k_r: usize, k_b: usize) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.k_r = k_r;
        cfg.k_b = k_b;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Instantaneous SNRs of one slot.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelState {
    pub slot_index: u64,
    /// `γ_{U_mR}(i)`
    pub snr_ur: Vec<f64>,
    /// `γ_{U_mB}(i)`
    pub snr_ub: Vec<f64>,
    /// `γ_{RB}(i)`
    pub snr_rb: f64,
}

impl ChannelState {
    pub fn new(slot_index: u64, snr_ur: Vec<f64>, snr_ub: Vec<f64>, snr_rb: f64) -> Self {
        debug_assert_eq!(snr_ur.len(), snr_ub.len());
        ChannelState {
            slot_index,
            snr_ur,
            snr_ub,
            snr_rb,
        }
    }

    pub fn zeroed(ues: usize) -> Self {
        ChannelState::new(0, vec![0.0; ues], vec![0.0; ues], 0.0)
    }

    pub fn ues(&self) -> usize {
        self.snr_ub.len()
    }

    pub fn snr(&self, link: LinkId) -> f64 {
        match link {
            LinkId::UeRelay(m) => self.snr_ur[m],
            LinkId::UeBase(m) => self.snr_ub[m],
            LinkId::RelayBase => self.snr_rb,
        }
    }
}

/// One link's random stream. The unit-mean exponential draw for a given
/// `(seed, epoch, link, slot)` is always the same.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    /// Separates independent experiments sharing a seed (evaluation, each
    /// trainer iteration, ...).
    pub epoch: u64,
    pub link: LinkId,
}

impl RngStream {
    pub fn new(seed: u64, epoch: u64, link: LinkId) -> Self {
        RngStream { seed, epoch, link }
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.epoch.to_le_bytes());
        key[16..24].copy_from_slice(&self.link.stream_id().to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }

    /// `|h|²/Ω` for this link at `slot`, computed without any cached state.
    pub fn draw(&self, slot: u64) -> f64 {
        let mut rng = self.rng();
        rng.set_word_pos(slot_word_pos(slot));
        unit_exponential(&mut rng)
    }
}

// Each slot consumes exactly one u64, i.e. two 32-bit words.
fn slot_word_pos(slot: u64) -> u128 {
    u128::from(slot) * 2
}

fn unit_exponential(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random();
    -(-u).ln_1p()
}

/// Sequential sampler over all links of a configuration. Produces the same
/// values as [`RngStream::draw`] but keeps the streams open so consecutive
/// slots cost one buffered read per link.
#[derive(Clone, Debug)]
pub struct ChannelSampler {
    means: Vec<f64>,
    streams: Vec<ChaCha8Rng>,
    ues: usize,
}

impl ChannelSampler {
    pub fn new(cfg: &SystemConfig, seed: u64, epoch: u64) -> Self {
        let means = cfg.links().map(|l| cfg.gamma() * cfg.gain(l)).collect();
        let streams = cfg.links().map(|l| RngStream::new(seed, epoch, l).rng()).collect();
        ChannelSampler {
            means,
            streams,
            ues: cfg.ues(),
        }
    }

    pub fn sample_slot(&mut self, slot: u64) -> ChannelState {
        let mut state = ChannelState::zeroed(self.ues);
        self.sample_into(slot, &mut state);
        state
    }

    /// Overwrites `state` with the realization of `slot`.
    pub fn sample_into(&mut self, slot: u64, state: &mut ChannelState) {
        let m = self.ues;
        state.slot_index = slot;
        state.snr_ur.resize(m, 0.0);
        state.snr_ub.resize(m, 0.0);
        let pos = slot_word_pos(slot);
        for (k, (rng, &mean)) in self.streams.iter_mut().zip(&self.means).enumerate() {
            if rng.get_word_pos() != pos {
                rng.set_word_pos(pos);
            }
            let snr = mean * unit_exponential(rng);
            if k < m {
                state.snr_ur[k] = snr;
            } else if k < 2 * m {
                state.snr_ub[k - m] = snr;
            } else {
                state.snr_rb = snr;
            }
        }
    }
}

/// Stateless convenience form of [`ChannelSampler::sample_slot`].
pub fn sample_slot(cfg: &SystemConfig, seed: u64, epoch: u64, slot: u64) -> ChannelState {
    let snr = |link: LinkId| cfg.gamma() * cfg.gain(link) * RngStream::new(seed, epoch, link).draw(slot);
    let m = cfg.ues();
    ChannelState::new(
        slot,
        (0..m).map(|k| snr(LinkId::UeRelay(k))).collect(),
        (0..m).map(|k| snr(LinkId::UeBase(k))).collect(),
        snr(LinkId::RelayBase),
    )
}
