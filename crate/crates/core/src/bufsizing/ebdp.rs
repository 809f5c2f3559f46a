//! Emulated-BDP controller.
//!
//! The MAC reports, per transmitted frame, the time between a packet
//! reaching the head of the interface queue and the receipt of its MAC ACK.
//! Exponential smoothing of those samples gives the mean service time
//! `T_serv`; the buffer limit is then `min(T_max / T_serv + c, Q_max)`,
//! i.e. the buffer that drains in roughly `T_max` seconds, over-provisioned
//! by `c` packets to absorb short-term service fluctuations.

#[derive(Debug, Clone, PartialEq)]
pub struct EbdpState {
    /// Smoothed mean per-packet service time, none until the first sample.
    t_serv: Option<f64>,
    /// Smoothing weight `W`.
    pub w: f64,
    /// Target queuing delay `T_max` in seconds.
    pub t_max: f64,
    /// Over-provisioning packets `c`.
    pub c: f64,
    /// Upper limit on the buffer size.
    pub q_max: f64,
}

/// Service-time samples must span a positive duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonPositiveSample(pub f64);

impl std::fmt::Display for NonPositiveSample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "non-positive service time sample: {}", self.0)
    }
}

impl std::error::Error for NonPositiveSample {}

impl EbdpState {
    pub fn new(t_max: f64, c: f64, w: f64, q_max: f64) -> EbdpState {
        debug_assert!(w > 0.0 && w < 1.0);
        EbdpState { t_serv: None, w, t_max, c, q_max }
    }

    pub fn t_serv(&self) -> Option<f64> {
        self.t_serv
    }

    /// Fold in one per-packet service time sample:
    /// `T_serv <- (1-W)*T_serv + W*(t_e - t_s)`. The first sample
    /// initializes `T_serv` directly.
    pub fn update_service_time(&mut self, t_s: f64, t_e: f64) -> Result<(), NonPositiveSample> {
        self.update_service_time_packets(t_s, t_e, 1)
    }

    /// Like [`EbdpState::update_service_time`], for a frame that served
    /// `packets` packets in one exchange (frame aggregation): the span is
    /// attributed evenly so `1/T_serv` stays the per-packet service rate.
    pub fn update_service_time_packets(
        &mut self,
        t_s: f64,
        t_e: f64,
        packets: u32,
    ) -> Result<(), NonPositiveSample> {
        let span = t_e - t_s;
        if span <= 0.0 {
            return Err(NonPositiveSample(span));
        }
        debug_assert!(packets >= 1);
        let sample = span / packets as f64;
        self.t_serv = Some(match self.t_serv {
            None => sample,
            Some(prev) => (1.0 - self.w) * prev + self.w * sample,
        });
        Ok(())
    }

    /// Current limit `min(T_max / T_serv + c, Q_max)`. Before the first
    /// sample the controller reports `Q_max` so startup is never throttled.
    pub fn limit(&self) -> f64 {
        match self.t_serv {
            None => self.q_max,
            Some(t) => (self.t_max / t + self.c).min(self.q_max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state() -> EbdpState {
        EbdpState::new(0.2, 5.0, 0.001, 1600.0)
    }

    #[test]
    fn smoothing_step_matches_direct_evaluation() {
        let mut s = state();
        s.update_service_time(0.0, 1e-3).unwrap();
        s.update_service_time(0.0, 2e-3).unwrap();
        // 0.999 * 1ms + 0.001 * 2ms = 1.001 ms.
        assert!((s.t_serv().unwrap() - 1.001e-3).abs() < 1e-12);
    }

    #[test]
    fn first_sample_initializes_directly() {
        let mut s = state();
        s.update_service_time(1.0, 1.0 + 3e-3).unwrap();
        assert_eq!(s.t_serv().unwrap(), 3e-3);
    }

    #[test]
    fn constant_samples_converge_to_fixed_point() {
        let mut s = state();
        s.update_service_time(0.0, 5e-3).unwrap();
        for _ in 0..20_000 {
            s.update_service_time(0.0, 2e-3).unwrap();
        }
        assert!((s.t_serv().unwrap() - 2e-3).abs() < 1e-9);
    }

    #[test]
    fn smoothing_window_accuracy_fraction() {
        // After t updates the weight on history is (1-W)^t, so the fraction
        // of the estimate drawn from the window is x = 1-(1-W)^t; for
        // W=0.001 and t=1000 that is ~0.632 (reported as ~0.64).
        let x = 1.0 - (1.0f64 - 0.001).powi(1000);
        assert!((x - 0.632).abs() < 1e-3, "x = {x}");

        let mut s = state();
        s.update_service_time(0.0, 1e-3).unwrap();
        for _ in 0..1000 {
            s.update_service_time(0.0, 2e-3).unwrap();
        }
        // Estimate has moved fraction x of the way from 1ms to 2ms.
        let expect = 1e-3 + x * 1e-3;
        assert!((s.t_serv().unwrap() - expect).abs() < 2e-6);
    }

    #[test]
    fn limit_formula_and_cap() {
        let mut s = state();
        s.update_service_time(0.0, 0.6e-3).unwrap();
        // 0.2/0.0006 + 5 = 338.33; consistent with ~330-350 packet buffers
        // for a single station at 54 Mbps.
        assert!((s.limit() - 338.333).abs() < 0.01);

        s.update_service_time(0.0, 0.6e-3).unwrap();
        let mut fast = state();
        fast.update_service_time(0.0, 0.01e-3).unwrap();
        assert_eq!(fast.limit(), 1600.0);
    }

    #[test]
    fn ten_contenders_service_time_gives_small_limit() {
        // With ~10 contending stations the per-packet service time is an
        // order of magnitude larger; at ~3.1 ms the rule yields ~70 packets.
        let mut s = state();
        s.update_service_time(0.0, 3.08e-3).unwrap();
        assert!((s.limit() - 69.9).abs() < 0.5, "limit {}", s.limit());
    }

    #[test]
    fn uninitialized_reports_q_max_and_rejects_bad_samples() {
        let mut s = state();
        assert_eq!(s.limit(), 1600.0);
        assert!(s.update_service_time(1.0, 1.0).is_err());
        assert!(s.update_service_time(1.0, 0.5).is_err());
        assert_eq!(s.limit(), 1600.0);
    }

    #[test]
    fn limit_monotone_in_service_time() {
        let mut prev = f64::INFINITY;
        for us in [100, 300, 600, 1000, 3000, 10000] {
            let mut s = state();
            s.update_service_time(0.0, us as f64 * 1e-6).unwrap();
            assert!(s.limit() <= prev);
            prev = s.limit();
        }
    }

    #[test]
    fn aggregated_sample_counts_per_packet_rate() {
        let mut s = state();
        // 8 packets in one 4 ms exchange = 0.5 ms per packet.
        s.update_service_time_packets(0.0, 4e-3, 8).unwrap();
        assert_eq!(s.t_serv().unwrap(), 0.5e-3);
    }
}
