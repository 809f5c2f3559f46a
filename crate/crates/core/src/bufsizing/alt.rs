//! Adaptive limit tuning.
//!
//! Over each observation interval of `t` seconds the queue's sojourn time is
//! split into idle time `t_i` (occupancy at or below the threshold) and busy
//! time `t_b` (above it). At the interval boundary the limit integrates
//! `q <- clamp(q + a1*t_i - b1*t_b, q_min, q_max)`: a buffer that sits empty
//! too long grows, one that never drains shrinks. In balance
//! `a1*E[t_i] = b1*E[t_b]`, which lower-bounds utilization by
//! `1/(1 + b1/a1)`.

#[derive(Debug, Clone, PartialEq)]
pub struct AltState {
    q_alt: f64,
    /// Increase gain `a1` in packets per idle second.
    pub a1: f64,
    /// Decrease gain `b1` in packets per busy second.
    pub b1: f64,
    /// Observation interval `t` in seconds.
    pub interval: f64,
    /// Occupancy threshold below which the queue counts as idle.
    pub q_thr: usize,
    pub q_min: f64,
    pub q_max: f64,
    t_i_accum: f64,
    t_b_accum: f64,
}

impl AltState {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a1: f64,
        b1: f64,
        interval: f64,
        q_thr: f64,
        q_min: f64,
        q_max: f64,
        q_initial: f64,
    ) -> AltState {
        debug_assert!(a1 > 0.0 && b1 > 0.0 && interval > 0.0 && q_min <= q_max);
        AltState {
            q_alt: q_initial.clamp(q_min, q_max),
            a1,
            b1,
            interval,
            q_thr: q_thr as usize,
            q_min,
            q_max,
            t_i_accum: 0.0,
            t_b_accum: 0.0,
        }
    }

    pub fn limit(&self) -> f64 {
        self.q_alt
    }

    pub fn accumulators(&self) -> (f64, f64) {
        (self.t_i_accum, self.t_b_accum)
    }

    /// Attribute `dt` seconds spent at `occupancy` to idle or busy time.
    pub fn accumulate(&mut self, occupancy: usize, dt: f64) {
        debug_assert!(dt >= 0.0);
        if occupancy <= self.q_thr {
            self.t_i_accum += dt;
        } else {
            self.t_b_accum += dt;
        }
    }

    /// Close the current observation interval: integrate, clamp, reset the
    /// accumulators, and return the new limit.
    pub fn interval_update(&mut self) -> f64 {
        let q = self.q_alt + self.a1 * self.t_i_accum - self.b1 * self.t_b_accum;
        self.q_alt = q.clamp(self.q_min, self.q_max);
        self.t_i_accum = 0.0;
        self.t_b_accum = 0.0;
        self.q_alt
    }
}
