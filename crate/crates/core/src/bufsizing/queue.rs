use std::collections::VecDeque;

use super::BufferController;
use crate::sim::SimTime;

/// Outcome of an admission attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    /// Admitted; holds the occupancy after the enqueue.
    Admitted(usize),
    /// Dropped at the tail; holds the (unchanged) occupancy.
    Dropped(usize),
}

/// Byte size used for frame timing and wired serialization.
pub trait PacketBytes {
    fn wire_bytes(&self) -> u32;
}

/// Drop-tail FIFO governed by a [`BufferController`].
///
/// Admission compares the integer occupancy against the real-valued limit:
/// a packet enters iff `occupancy < limit`. Shrinking the limit never evicts
/// queued packets. The queue also keeps the exact sojourn-time accounting
/// the ALT controller needs and time-integrals of occupancy and limit for
/// reporting.
#[derive(Debug)]
pub struct Queue<P> {
    pkts: VecDeque<P>,
    pub ctl: BufferController,
    head_since: Option<SimTime>,
    last_touch: SimTime,
    drops: u64,
    drops_since_reset: u64,
    admitted: u64,
    served: u64,
    occ_integral: f64,
    limit_integral: f64,
    occ_max: usize,
    stats_since: SimTime,
}

impl<P: PacketBytes> Queue<P> {
    pub fn new(ctl: BufferController) -> Queue<P> {
        Queue {
            pkts: VecDeque::new(),
            ctl,
            head_since: None,
            last_touch: SimTime::ZERO,
            drops: 0,
            drops_since_reset: 0,
            admitted: 0,
            served: 0,
            occ_integral: 0.0,
            limit_integral: 0.0,
            occ_max: 0,
            stats_since: SimTime::ZERO,
        }
    }

    pub fn occupancy(&self) -> usize {
        self.pkts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pkts.is_empty()
    }

    pub fn limit(&self) -> f64 {
        self.ctl.limit()
    }

    pub fn head_since(&self) -> Option<SimTime> {
        self.head_since
    }

    pub fn drops(&self) -> u64 {
        self.drops
    }

    pub fn drops_since_reset(&self) -> u64 {
        self.drops_since_reset
    }

    pub fn served(&self) -> u64 {
        self.served
    }

    pub fn admitted(&self) -> u64 {
        self.admitted
    }

    /// Total payload bytes of the first `k` packets.
    pub fn head_bytes(&self, k: usize) -> u64 {
        self.pkts.iter().take(k).map(|p| p.wire_bytes() as u64).sum()
    }

    /// Integrate occupancy/limit over the elapsed span and feed the ALT
    /// sojourn accounting, all with pre-change values.
    fn advance_time(&mut self, now: SimTime) {
        let dt = now - self.last_touch;
        debug_assert!(dt >= -1e-12, "queue time went backwards by {dt}");
        if dt > 0.0 {
            let occ = self.pkts.len();
            self.ctl.accumulate(occ, dt);
            self.occ_integral += occ as f64 * dt;
            self.limit_integral += self.ctl.limit() * dt;
            self.last_touch = now;
        }
    }

    /// Drop-tail admission.
    pub fn try_enqueue(&mut self, p: P, now: SimTime) -> Admission {
        self.advance_time(now);
        let occ = self.pkts.len();
        if (occ as f64) < self.ctl.limit() {
            if self.pkts.is_empty() {
                self.head_since = Some(now);
            }
            self.pkts.push_back(p);
            self.admitted += 1;
            self.occ_max = self.occ_max.max(self.pkts.len());
            Admission::Admitted(self.pkts.len())
        } else {
            self.drops += 1;
            self.drops_since_reset += 1;
            Admission::Dropped(occ)
        }
    }

    /// Dequeue the `k` packets of a successfully acknowledged frame,
    /// reporting the head-of-queue service span to the controller.
    /// Returns the packets and the `(t_s, t_e)` pair.
    pub fn complete_service(&mut self, k: usize, now: SimTime) -> (Vec<P>, (SimTime, SimTime)) {
        self.advance_time(now);
        let t_s = self.head_since.expect("service completion on empty queue");
        self.ctl.on_service_sample(t_s.secs(), now.secs(), k as u32);
        let out = self.pop_frame(k, now);
        self.served += out.len() as u64;
        (out, (t_s, now))
    }

    /// Discard the head frame without a service sample (retry limit hit).
    pub fn drop_head_frame(&mut self, k: usize, now: SimTime) -> Vec<P> {
        self.advance_time(now);
        let out = self.pop_frame(k, now);
        self.drops += out.len() as u64;
        self.drops_since_reset += out.len() as u64;
        out
    }

    fn pop_frame(&mut self, k: usize, now: SimTime) -> Vec<P> {
        let k = k.min(self.pkts.len());
        let out: Vec<P> = self.pkts.drain(..k).collect();
        self.head_since = if self.pkts.is_empty() { None } else { Some(now) };
        out
    }

    /// Close an ALT observation interval, if this queue runs one.
    pub fn tick(&mut self, now: SimTime) -> Option<f64> {
        self.advance_time(now);
        self.ctl.interval_update()
    }

    /// Restart the reporting integrals (used at the warmup boundary).
    pub fn reset_stats(&mut self, now: SimTime) {
        self.advance_time(now);
        self.occ_integral = 0.0;
        self.limit_integral = 0.0;
        self.occ_max = self.pkts.len();
        self.drops_since_reset = 0;
        self.stats_since = now;
    }

    /// (mean occupancy, max occupancy, mean limit) since the last reset.
    pub fn stats(&mut self, now: SimTime) -> (f64, usize, f64) {
        self.advance_time(now);
        let span = now - self.stats_since;
        if span <= 0.0 {
            return (self.pkts.len() as f64, self.occ_max, self.ctl.limit());
        }
        (self.occ_integral / span, self.occ_max, self.limit_integral / span)
    }
}
