use super::MacClassParams;
use crate::sim::RngStream;

/// Per-(node, access class) contention state.
///
/// A backlogged entity holds a backoff counter drawn uniformly from
/// `[0, cw-1]`; the counter decrements once per idle slot after the class
/// AIFS has been observed, and the entity transmits when it reaches zero.
#[derive(Debug, Clone)]
pub struct MacEntity {
    pub node: u16,
    pub params: MacClassParams,
    cw: u32,
    backoff: Option<u32>,
    retries: u32,
    aifs_wait: u32,
}

impl MacEntity {
    pub fn new(node: u16, params: MacClassParams) -> MacEntity {
        debug_assert!(params.validate().is_ok());
        MacEntity { node, params, cw: params.cw_min, backoff: None, retries: 0, aifs_wait: 0 }
    }

    pub fn cw(&self) -> u32 {
        self.cw
    }

    pub fn retries(&self) -> u32 {
        self.retries
    }

    pub fn backoff(&self) -> Option<u32> {
        self.backoff
    }

    /// Draw a fresh countdown if none is pending (a queue just became
    /// backlogged, or the previous frame left the MAC).
    pub fn ensure_backoff(&mut self, rng: &mut RngStream) {
        if self.backoff.is_none() {
            self.backoff = Some(rng.below(self.cw));
        }
    }

    /// Ready to transmit in the current slot.
    pub fn ready(&self) -> bool {
        self.aifs_wait == 0 && self.backoff == Some(0)
    }

    /// One idle slot elapsed: consume remaining AIFS first, then count down.
    pub fn on_idle_slot(&mut self) {
        if self.aifs_wait > 0 {
            self.aifs_wait -= 1;
        } else if let Some(b) = self.backoff {
            if b > 0 {
                self.backoff = Some(b - 1);
            }
        }
    }

    /// The medium just went busy-then-idle: re-arm the differential AIFS
    /// wait (slots beyond the shortest configured AIFS).
    pub fn rearm_aifs(&mut self, aifs_min: u32) {
        self.aifs_wait = self.params.aifs.saturating_sub(aifs_min);
    }

    fn double_cw(&mut self) {
        self.cw = (self.cw * 2).min(self.params.cw_max);
    }

    /// Collision observed: double the window and redraw.
    pub fn on_collision(&mut self, rng: &mut RngStream) {
        self.double_cw();
        self.backoff = Some(rng.below(self.cw));
    }

    /// Frame acknowledged: reset window and retries; redraw a countdown if
    /// the queue still holds packets.
    pub fn on_success(&mut self, still_backlogged: bool, rng: &mut RngStream) {
        self.cw = self.params.cw_min;
        self.retries = 0;
        self.backoff = if still_backlogged { Some(rng.below(self.cw)) } else { None };
    }

    /// Frame lost to channel error. Returns true when the retry limit is
    /// exceeded and the frame must be discarded.
    pub fn on_frame_error(&mut self, retry_limit: u32, rng: &mut RngStream) -> bool {
        self.double_cw();
        self.retries += 1;
        let exhausted = self.retries > retry_limit;
        if exhausted {
            self.retries = 0;
            self.cw = self.params.cw_min;
        }
        self.backoff = Some(rng.below(self.cw));
        exhausted
    }

    /// Queue drained with no transmission pending.
    pub fn clear_backoff(&mut self) {
        self.backoff = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> RngStream {
        RngStream::new(42, 0)
    }

    #[test]
    fn collision_doubles_cw_up_to_cap() {
        let mut e = MacEntity::new(1, MacClassParams { cw_min: 32, cw_max: 64, aifs: 2 });
        let mut r = rng();
        e.ensure_backoff(&mut r);
        e.on_collision(&mut r);
        assert_eq!(e.cw(), 64);
        e.on_collision(&mut r);
        assert_eq!(e.cw(), 64);
        e.on_success(true, &mut r);
        assert_eq!(e.cw(), 32);
        assert!(e.backoff().unwrap() < 32);
    }

    #[test]
    fn retry_limit_discards_frame_and_resets() {
        let mut e = MacEntity::new(0, MacClassParams::EDCA_DATA);
        let mut r = rng();
        e.ensure_backoff(&mut r);
        for _ in 0..11 {
            assert!(!e.on_frame_error(11, &mut r));
        }
        assert_eq!(e.retries(), 11);
        // 12th failure exceeds the limit of 11.
        assert!(e.on_frame_error(11, &mut r));
        assert_eq!(e.retries(), 0);
        assert_eq!(e.cw(), 32);
    }

    #[test]
    fn aifs_consumed_before_countdown() {
        let mut e = MacEntity::new(2, MacClassParams { cw_min: 4, cw_max: 8, aifs: 4 });
        let mut r = rng();
        e.ensure_backoff(&mut r);
        let b0 = e.backoff().unwrap();
        e.rearm_aifs(2);
        e.on_idle_slot();
        e.on_idle_slot();
        assert_eq!(e.backoff().unwrap(), b0);
        e.on_idle_slot();
        assert_eq!(e.backoff().unwrap(), b0.saturating_sub(1));
    }

    #[test]
    fn fresh_backoff_mean_matches_uniform_oracle() {
        // Brute-force mean of uniform{0..31} is 15.5; the empirical mean of
        // fresh draws should approach it.
        let oracle: f64 = (0..32).map(|x| x as f64).sum::<f64>() / 32.0;
        assert_eq!(oracle, 15.5);
        let mut e = MacEntity::new(0, MacClassParams { cw_min: 32, cw_max: 1024, aifs: 2 });
        let mut r = rng();
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            e.ensure_backoff(&mut r);
            sum += e.backoff().unwrap() as f64;
            e.on_success(false, &mut r);
        }
        let mean = sum / n as f64;
        assert!((mean - oracle).abs() < 0.1, "mean {mean}");
    }
}
