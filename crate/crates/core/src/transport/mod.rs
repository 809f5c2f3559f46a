//! Packet-level TCP AIMD and UDP flow models plus the emulated wired
//! backhaul that carries traffic between the AP and the wired hosts.

mod tcp;
mod udp;
mod wired;

pub use tcp::{RtoVerdict, TcpFlow, RTO_CAP, RTO_FLOOR, SRTT_GAIN};
pub use udp::UdpFlow;
pub use wired::{FifoLane, WiredLink};

/// Direction of a flow relative to the WLAN.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowDirection {
    /// Wired host to wireless station; data queues at the AP.
    Download,
    /// Wireless station to wired host; data queues at the station.
    Upload,
}

impl FlowDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            FlowDirection::Download => "download",
            FlowDirection::Upload => "upload",
        }
    }
}
