use super::FlowDirection;

/// Open-loop UDP source.
///
/// `interval` is the mean inter-packet gap (draws are exponential); an
/// interval of zero means a saturated source that keeps its station queue
/// permanently backlogged.
#[derive(Debug, Clone)]
pub struct UdpFlow {
    pub id: u32,
    pub direction: FlowDirection,
    pub station: u16,
    pub packet_size: u32,
    pub interval: f64,
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
}

impl UdpFlow {
    pub fn new(
        id: u32,
        direction: FlowDirection,
        station: u16,
        packet_size: u32,
        interval: f64,
    ) -> UdpFlow {
        UdpFlow { id, direction, station, packet_size, interval, sent: 0, delivered: 0, dropped: 0 }
    }

    pub fn saturated(&self) -> bool {
        self.interval <= 0.0
    }
}
