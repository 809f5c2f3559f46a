//! TCP modeled as pure AIMD congestion avoidance.
//!
//! The congestion window grows by one packet per RTT (`cwnd += 1/cwnd` per
//! ACK, capped by the advertised window) and multiplies by the backoff
//! factor at congestion events. Loss detection is idealized: a drop is
//! observed by the source one smoothed RTT after it happens, and drops
//! within one RTT window collapse into a single congestion event. A coarse
//! RTO (max(1 s, 2·sRTT), doubling on repeats, capped at 64 s) resets the
//! window to one packet.

use super::FlowDirection;

/// Smoothed RTT gain (1/8).
pub const SRTT_GAIN: f64 = 0.125;
/// RTO never drops below one second.
pub const RTO_FLOOR: f64 = 1.0;
/// RTO backoff cap.
pub const RTO_CAP: f64 = 64.0;

/// Outcome of an RTO check event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RtoVerdict {
    /// Stale or idle check; no follow-up.
    Disarm,
    /// Progress happened since arming; re-check at the given time.
    Rearm(f64),
    /// Timer expired: window collapsed, retransmission due.
    TimedOut,
}

#[derive(Debug, Clone)]
pub struct TcpFlow {
    pub id: u32,
    pub direction: FlowDirection,
    /// WLAN station index carrying this flow (1-based; AP is node 0).
    pub station: u16,
    pub cwnd: f64,
    pub awnd: f64,
    pub beta: f64,
    /// Two-way wired propagation delay.
    pub rtt_wired: f64,
    srtt: Option<f64>,
    max_srtt: f64,
    in_flight: u32,
    /// Window accounting epoch; bumped on RTO so that stale ACK/loss
    /// notifications cannot double-free window slots.
    epoch: u32,
    /// Drops at or before this time belong to an already-handled event.
    loss_cutoff: f64,
    rto_gen: u32,
    consecutive_rtos: u32,
    last_progress: f64,
    pub sent: u64,
    pub acked: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub backoffs: u64,
    pub rtos: u64,
    /// Total packets to transfer, for finite (short) flows.
    pub size_packets: Option<u64>,
    pub started_at: f64,
    pub completed_at: Option<f64>,
}

impl TcpFlow {
    /// Long-lived flow. Starts at the advertised window so the AIMD
    /// decrease pulls it onto the sawtooth within a few RTTs; the ramp is
    /// over well inside the measurement warmup.
    pub fn new_long(
        id: u32,
        direction: FlowDirection,
        station: u16,
        awnd: f64,
        beta: f64,
        rtt_wired: f64,
        now: f64,
    ) -> TcpFlow {
        TcpFlow::new(id, direction, station, awnd, awnd, beta, rtt_wired, None, now)
    }

    /// Finite transfer starting from a two-packet window.
    pub fn new_short(
        id: u32,
        direction: FlowDirection,
        station: u16,
        awnd: f64,
        beta: f64,
        rtt_wired: f64,
        size_packets: u64,
        now: f64,
    ) -> TcpFlow {
        TcpFlow::new(id, direction, station, 2.0, awnd, beta, rtt_wired, Some(size_packets), now)
    }

    #[allow(clippy::too_many_arguments)]
    fn new(
        id: u32,
        direction: FlowDirection,
        station: u16,
        cwnd0: f64,
        awnd: f64,
        beta: f64,
        rtt_wired: f64,
        size_packets: Option<u64>,
        now: f64,
    ) -> TcpFlow {
        TcpFlow {
            id,
            direction,
            station,
            cwnd: cwnd0.max(1.0).min(awnd),
            awnd,
            beta,
            rtt_wired,
            srtt: None,
            max_srtt: 0.0,
            in_flight: 0,
            epoch: 0,
            loss_cutoff: -1.0,
            rto_gen: 0,
            consecutive_rtos: 0,
            last_progress: now,
            sent: 0,
            acked: 0,
            delivered: 0,
            dropped: 0,
            backoffs: 0,
            rtos: 0,
            size_packets,
            started_at: now,
            completed_at: None,
        }
    }

    pub fn srtt(&self) -> f64 {
        self.srtt.unwrap_or(self.rtt_wired)
    }

    pub fn max_srtt(&self) -> f64 {
        self.max_srtt
    }

    pub fn in_flight(&self) -> u32 {
        self.in_flight
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn completed(&self) -> bool {
        self.completed_at.is_some()
    }

    /// Window has room and source data remains.
    pub fn can_send(&self) -> bool {
        if self.completed() {
            return false;
        }
        if let Some(n) = self.size_packets {
            if self.sent >= n {
                return false;
            }
        }
        (self.in_flight as f64) < self.cwnd.min(self.awnd)
    }

    pub fn register_send(&mut self, now: f64) {
        if self.in_flight == 0 {
            self.last_progress = now;
        }
        self.in_flight += 1;
        self.sent += 1;
    }

    /// Process one cumulative ACK carrying an RTT sample.
    pub fn on_ack(&mut self, now: f64, rtt_sample: f64, pkt_epoch: u32) {
        self.acked += 1;
        let s = match self.srtt {
            None => rtt_sample,
            Some(prev) => (1.0 - SRTT_GAIN) * prev + SRTT_GAIN * rtt_sample,
        };
        self.srtt = Some(s);
        self.max_srtt = self.max_srtt.max(s);
        if pkt_epoch == self.epoch {
            self.in_flight = self.in_flight.saturating_sub(1);
            if self.cwnd < self.awnd {
                self.cwnd = (self.cwnd + 1.0 / self.cwnd).min(self.awnd);
            }
        }
        self.last_progress = now;
        self.consecutive_rtos = 0;
        if let Some(n) = self.size_packets {
            if self.acked >= n && self.completed_at.is_none() {
                self.completed_at = Some(now);
            }
        }
    }

    /// Handle a loss notification for a packet dropped at `drop_time`.
    /// Returns true when this constitutes a new congestion event (backoff
    /// applied); losses inside the current RTT window are absorbed.
    pub fn on_loss_event(&mut self, drop_time: f64, pkt_epoch: u32) -> bool {
        if pkt_epoch == self.epoch {
            self.in_flight = self.in_flight.saturating_sub(1);
        } else {
            return false;
        }
        if drop_time <= self.loss_cutoff {
            return false;
        }
        self.cwnd = (self.beta * self.cwnd).max(1.0);
        self.loss_cutoff = drop_time + self.srtt();
        self.backoffs += 1;
        true
    }

    /// Current retransmission timeout duration.
    pub fn rto_duration(&self) -> f64 {
        let base = (2.0 * self.srtt()).max(RTO_FLOOR);
        (base * (1u64 << self.consecutive_rtos.min(16)) as f64).min(RTO_CAP)
    }

    /// Arm a new RTO check chain; returns (generation, fire time).
    pub fn arm_rto(&mut self, now: f64) -> (u32, f64) {
        self.rto_gen = self.rto_gen.wrapping_add(1);
        (self.rto_gen, now + self.rto_duration())
    }

    /// Evaluate a firing RTO check for chain `gen`.
    pub fn rto_check(&mut self, now: f64, gen: u32) -> RtoVerdict {
        if gen != self.rto_gen || self.in_flight == 0 || self.completed() {
            return RtoVerdict::Disarm;
        }
        let dur = self.rto_duration();
        let deadline = self.last_progress + dur;
        if now + 1e-12 < deadline {
            return RtoVerdict::Rearm(deadline);
        }
        // Timeout: collapse the window, forget outstanding packets.
        self.cwnd = 1.0;
        self.in_flight = 0;
        self.epoch = self.epoch.wrapping_add(1);
        self.consecutive_rtos += 1;
        self.rtos += 1;
        self.last_progress = now;
        RtoVerdict::TimedOut
    }
}
