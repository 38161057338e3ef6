//! Phasor-domain power swing simulator for a grid-forming inverter with
//! virtual-impedance current limiting, seen through a distance relay.
//!
//! Quantities are per-unit; angles are radians unless a name says `_deg`.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod limiter;
pub mod network;
pub mod params;
pub mod phasor;
pub mod relay;
pub mod scenario;
pub mod trajectory;

pub use analysis::{classify_stability, p_delta_curve, Classification, PDeltaCurve, StabilityVerdict};
pub use dynamics::{run_scenario, ApclParams, Event, EventKind, SimulationRecord, Simulator};
pub use error::{Error, Result};
pub use limiter::{LimiterConfig, Strategy, ViValue};
pub use network::{solve_network, NetworkSolution, Topology};
pub use params::SystemParams;
pub use phasor::Phasor;
pub use relay::{RelayEvent, RelaySettings};
pub use scenario::{builtin_case, load_scenario, Scenario};
