//! Discrete-event simulator of an 802.11 WLAN with dynamic buffer sizing.
//!
//! The crate is organized around six subsystems:
//!
//! - [`sim`]: deterministic event kernel (virtual clock, event queue, seeded
//!   RNG streams, CSV trace sink).
//! - [`mac`]: slot-level CSMA/CA channel model (DCF and EDCA contention,
//!   frame timing, bit-error channel, frame aggregation, per-packet service
//!   time measurement).
//! - [`transport`]: packet-level TCP AIMD and UDP flow models over an
//!   emulated wired backhaul.
//! - [`bufsizing`]: the queue limit controllers — fixed drop-tail, eBDP,
//!   adaptive limit tuning (ALT), and their hybrid combination — together
//!   with the drop-tail queue they govern.
//! - [`analysis`]: closed-form model of the buffer limit dynamics at TCP
//!   congestion events: stability test, fixed point, utilization bounds,
//!   and a Monte-Carlo event-level oracle.
//! - [`harness`]: scenario configuration, the integrated simulation world,
//!   metrics, sweeps, and CSV output.

pub mod analysis;
pub mod bufsizing;
pub mod harness;
pub mod mac;
pub mod sim;
pub mod transport;

pub use analysis::{FlowEnsemble, ModelParams, StabilityVerdict};
pub use bufsizing::{AltState, AstarState, BufferController, EbdpState, Queue};
pub use harness::{run_scenario, MetricsReport, ScenarioConfig};
pub use mac::{ChannelModel, MacClassParams, PhyParams, PhyPreset};
pub use sim::{RngStream, Scheduler, SimTime, TraceKind, TraceRecord, TraceSink};
pub use transport::{FlowDirection, TcpFlow, UdpFlow, WiredLink};
