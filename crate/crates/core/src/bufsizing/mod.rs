//! Dynamic buffer sizing controllers and the drop-tail queue they govern.
//!
//! Three controllers operate on a queue's admission limit:
//!
//! - **eBDP** emulates the bandwidth-delay product: it smooths the measured
//!   per-packet MAC service time `T_serv` and sets the limit to
//!   `min(T_max / T_serv + c, Q_max)`.
//! - **ALT** (adaptive limit tuning) integrates queue idle/busy time over
//!   fixed observation intervals: `q += a1*t_i - b1*t_b`, clamped to
//!   `[q_min, q_max]`.
//! - The hybrid controller takes `min(eBDP, ALT)`, combining eBDP's fast
//!   reaction to service-rate changes with ALT's ability to exploit
//!   statistical multiplexing.
//!
//! Limits are real-valued; admission compares integer occupancy against the
//! un-rounded limit. Shrinking a limit below the current occupancy never
//! evicts queued packets, it only blocks admissions until the queue drains.

mod alt;
mod ebdp;
mod queue;

pub use alt::AltState;
pub use ebdp::EbdpState;
pub use queue::{Admission, PacketBytes, Queue};

/// Admission limit policy for one queue.
#[derive(Debug, Clone)]
pub enum BufferController {
    Fixed(f64),
    Ebdp(EbdpState),
    Alt(AltState),
    Astar(AstarState),
}

/// Combined controller state: effective limit is the minimum of the two
/// constituent limits.
#[derive(Debug, Clone)]
pub struct AstarState {
    pub ebdp: EbdpState,
    pub alt: AltState,
}

impl AstarState {
    pub fn limit(&self) -> f64 {
        self.ebdp.limit().min(self.alt.limit())
    }
}

impl BufferController {
    /// Current admission limit in packets.
    pub fn limit(&self) -> f64 {
        match self {
            BufferController::Fixed(n) => *n,
            BufferController::Ebdp(e) => e.limit(),
            BufferController::Alt(a) => a.limit(),
            BufferController::Astar(s) => s.limit(),
        }
    }

    /// Feed one MAC service-time sample covering `packets` packets.
    pub fn on_service_sample(&mut self, t_s: f64, t_e: f64, packets: u32) {
        match self {
            BufferController::Ebdp(e) => {
                let _ = e.update_service_time_packets(t_s, t_e, packets);
            }
            BufferController::Astar(s) => {
                let _ = s.ebdp.update_service_time_packets(t_s, t_e, packets);
            }
            _ => {}
        }
    }

    /// Accumulate queue idle/busy sojourn time for ALT-bearing controllers.
    pub fn accumulate(&mut self, occupancy: usize, dt: f64) {
        match self {
            BufferController::Alt(a) => a.accumulate(occupancy, dt),
            BufferController::Astar(s) => s.alt.accumulate(occupancy, dt),
            _ => {}
        }
    }

    /// Close an ALT observation interval. Returns the new ALT limit when one
    /// is present.
    pub fn interval_update(&mut self) -> Option<f64> {
        match self {
            BufferController::Alt(a) => Some(a.interval_update()),
            BufferController::Astar(s) => Some(s.alt.interval_update()),
            _ => None,
        }
    }

    pub fn observation_interval(&self) -> Option<f64> {
        match self {
            BufferController::Alt(a) => Some(a.interval),
            BufferController::Astar(s) => Some(s.alt.interval),
            _ => None,
        }
    }
}
