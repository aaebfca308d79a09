//! Monte-Carlo simulator for the buffer-aided multiple-access relay channel.
//!
//! `M` UEs send uplink data to a BS, optionally through a relay (RS) with an
//! unbounded buffer. In every block-fading slot exactly one action runs:
//!
//! * **A1** – `min{K_B, M}` UEs are decoded directly by the BS;
//! * **A2** – `K_R` UEs are fully decoded at the RS while the BS decodes them
//!   partially; the remainder is stored in the relay buffer;
//! * **A3** – the RS forwards buffered information while `K_B - 1` UEs send
//!   new messages to the BS.
//!
//! The action is chosen by maximizing a per-slot metric parametrized by a dual
//! variable `λ` ([`policy`]), `λ` is trained so that the buffer is balanced
//! ([`trainer`]), and [`sim`] measures throughput with the real buffer.
//! [`experiment`] drives scenario files and parameter sweeps.

pub mod channel;
pub mod error;
pub mod experiment;
pub mod numfmt;
pub mod policy;
pub mod rates;
pub mod sim;
pub mod trainer;

pub use channel::{db_to_linear, linear_to_db, ChannelSampler, ChannelState, LinkId, RngStream, SystemConfig};
pub use error::{Error, Result};
pub use policy::{select_action, Action, Decision, DualVariable};
pub use rates::{capacity, ActionKind, ActionRates, BufferState, SubsetCatalog, UeSet};
pub use sim::{run_direct_baseline, run_simulation, CompensatedSum, Policy, SimulationReport, SlotOutcome};
pub use trainer::{estimate_gradient, grid_search_lambda, train_lambda, StepSchedule, TrainerParams, TrainerResult};
