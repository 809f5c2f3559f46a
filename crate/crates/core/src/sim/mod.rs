//! Deterministic event-driven simulation kernel.
//!
//! A simulation instance is single-threaded: one [`Scheduler`] owns the
//! virtual clock and the pending event set. Parameter sweeps run many
//! independent instances concurrently; nothing in here is shared.

mod rng;
mod scheduler;
mod time;
mod trace;

pub use rng::RngStream;
pub use scheduler::{EventHandle, KernelStats, ScheduleError, Scheduler};
pub use time::SimTime;
pub use trace::{TraceKind, TraceRecord, TraceSink};
