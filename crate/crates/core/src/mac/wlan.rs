use super::{
    collision_duration, frame_duration_total, success_exchange_duration, ChannelModel, MacEntity,
    PhyParams, MAC_HEADER_BYTES,
};
use crate::sim::{RngStream, SimTime};

/// Queue visibility the channel needs to grant transmissions: per-entity
/// backlog and the payload size of the head-of-queue frame.
pub trait FrameSource {
    fn backlog(&self, entity: usize) -> usize;
    /// Total payload bytes of the first `k` queued packets.
    fn frame_payload_bytes(&self, entity: usize, k: usize) -> u64;
}

/// A granted transmission. The MAC ACK (or its timeout) lands at `data_end`;
/// the medium is contended again from `channel_free_at`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxGrant {
    pub entity: usize,
    pub packets: usize,
    pub error: bool,
    pub data_end: SimTime,
    pub channel_free_at: SimTime,
}

/// Result of evaluating one channel decision point.
#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    /// No entity is backlogged; the channel sleeps until an enqueue wakes it.
    Quiescent,
    IdleSlot { next_at: SimTime },
    Transmit(TxGrant),
    Collision { participants: Vec<usize>, next_at: SimTime },
}

/// Airtime bookkeeping. Idle slots, busy exchanges and quiescent gaps
/// partition the whole simulated timeline.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChannelStats {
    pub idle_slots: u64,
    pub busy_time: f64,
    pub quiescent_time: f64,
    pub collisions: u64,
    pub successes: u64,
    pub frame_errors: u64,
}

/// The shared wireless channel and every contending MAC entity on it.
pub struct Wlan {
    pub phy: PhyParams,
    pub channel: ChannelModel,
    entities: Vec<MacEntity>,
    rngs: Vec<RngStream>,
    noise: RngStream,
    aifs_min: u32,
    stats: ChannelStats,
    wins: Vec<u64>,
    quiescent_since: Option<SimTime>,
}

impl Wlan {
    pub fn new(phy: PhyParams, channel: ChannelModel, entities: Vec<MacEntity>, seed: u64) -> Wlan {
        let aifs_min = entities.iter().map(|e| e.params.aifs).min().unwrap_or(2);
        let rngs = (0..entities.len())
            .map(|i| RngStream::new(seed, 100 + i as u64))
            .collect();
        let wins = vec![0; entities.len()];
        Wlan {
            phy,
            channel,
            entities,
            rngs,
            noise: RngStream::new(seed, 1),
            aifs_min,
            stats: ChannelStats::default(),
            wins,
            quiescent_since: None,
        }
    }

    pub fn entity(&self, idx: usize) -> &MacEntity {
        &self.entities[idx]
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn stats(&self) -> ChannelStats {
        self.stats
    }

    pub fn wins(&self) -> &[u64] {
        &self.wins
    }

    pub fn aifs_min(&self) -> u32 {
        self.aifs_min
    }

    /// Leave quiescence because a packet arrived on an empty WLAN.
    pub fn wake(&mut self, now: SimTime) {
        if let Some(since) = self.quiescent_since.take() {
            self.stats.quiescent_time += now - since;
        }
    }

    /// Close out accounting at the end of a run.
    pub fn finish(&mut self, now: SimTime) {
        self.wake(now);
    }

    fn frame_airtime(&self, src: &impl FrameSource, entity: usize) -> (usize, u64, f64) {
        let k = (self.channel.aggregation_k as usize).min(src.backlog(entity)).max(1);
        let payload = src.frame_payload_bytes(entity, k);
        (k, payload, frame_duration_total(payload, &self.phy))
    }

    /// Evaluate one channel decision point at `now`.
    pub fn step(&mut self, now: SimTime, src: &impl FrameSource) -> StepOutcome {
        let n = self.entities.len();
        let mut any_backlogged = false;
        let mut ready: Vec<usize> = Vec::new();
        for i in 0..n {
            if src.backlog(i) > 0 {
                any_backlogged = true;
                self.entities[i].ensure_backoff(&mut self.rngs[i]);
                if self.entities[i].ready() {
                    ready.push(i);
                }
            }
        }

        if !any_backlogged {
            self.quiescent_since.get_or_insert(now);
            return StepOutcome::Quiescent;
        }

        match ready.len() {
            0 => {
                for i in 0..n {
                    if src.backlog(i) > 0 {
                        self.entities[i].on_idle_slot();
                    }
                }
                self.stats.idle_slots += 1;
                StepOutcome::IdleSlot { next_at: now + self.phy.slot }
            }
            1 => {
                let winner = ready[0];
                let (k, payload, t_data) = self.frame_airtime(src, winner);
                let bits = 8 * (MAC_HEADER_BYTES as u64 + payload);
                let p_err = self.channel.frame_error_probability(bits);
                let error = self.noise.chance(p_err);
                let exchange = success_exchange_duration(t_data, &self.phy, self.aifs_min);
                let data_end = now + (t_data + self.phy.sifs + super::ack_duration(&self.phy));
                let free = now + exchange;
                self.stats.busy_time += exchange;
                if error {
                    self.stats.frame_errors += 1;
                }
                for e in &mut self.entities {
                    e.rearm_aifs(self.aifs_min);
                }
                StepOutcome::Transmit(TxGrant {
                    entity: winner,
                    packets: k,
                    error,
                    data_end,
                    channel_free_at: free,
                })
            }
            _ => {
                let mut longest: f64 = 0.0;
                for &i in &ready {
                    let (_, _, t_data) = self.frame_airtime(src, i);
                    longest = longest.max(t_data);
                }
                let dur = collision_duration(longest, &self.phy, self.aifs_min);
                for &i in &ready {
                    self.entities[i].on_collision(&mut self.rngs[i]);
                }
                for e in &mut self.entities {
                    e.rearm_aifs(self.aifs_min);
                }
                self.stats.collisions += 1;
                self.stats.busy_time += dur;
                StepOutcome::Collision { participants: ready, next_at: now + dur }
            }
        }
    }

    /// Resolve a granted transmission once the ACK (or its absence) is in.
    /// For channel errors, returns true when the retry limit was exceeded
    /// and the head frame must be discarded.
    pub fn finish_tx(&mut self, entity: usize, error: bool, still_backlogged: bool) -> bool {
        if error {
            self.entities[entity].on_frame_error(self.phy.retry_limit, &mut self.rngs[entity])
        } else {
            self.stats.successes += 1;
            self.wins[entity] += 1;
            self.entities[entity].on_success(still_backlogged, &mut self.rngs[entity]);
            false
        }
    }

    /// A queue drained without a pending transmission.
    pub fn entity_idle(&mut self, entity: usize) {
        self.entities[entity].clear_backoff();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mac::{MacClassParams, PhyPreset};

    /// Saturated source: every entity always has packets of a fixed size.
    struct Saturated {
        n: usize,
        bytes: u64,
    }

    impl FrameSource for Saturated {
        fn backlog(&self, _e: usize) -> usize {
            if self.n > 0 {
                1_000_000
            } else {
                0
            }
        }
        fn frame_payload_bytes(&self, _e: usize, k: usize) -> u64 {
            k as u64 * self.bytes
        }
    }

    fn drive(wlan: &mut Wlan, src: &Saturated, until_successes: u64) -> SimTime {
        let mut now = SimTime::ZERO;
        while wlan.stats().successes < until_successes {
            match wlan.step(now, src) {
                StepOutcome::Quiescent => panic!("saturated source went quiet"),
                StepOutcome::IdleSlot { next_at } => now = next_at,
                StepOutcome::Transmit(g) => {
                    wlan.finish_tx(g.entity, g.error, true);
                    now = g.channel_free_at;
                }
                StepOutcome::Collision { next_at, .. } => now = next_at,
            }
        }
        now
    }

    #[test]
    fn single_saturated_station_mean_idle_slots() {
        // One contender never collides; idle slots per access average the
        // mean of uniform{0..31} = 15.5.
        let phy = PhyPreset::G54.params();
        let ents = vec![MacEntity::new(0, MacClassParams::DCF)];
        let mut wlan = Wlan::new(phy, ChannelModel::default(), ents, 9);
        let src = Saturated { n: 1, bytes: 1000 };
        drive(&mut wlan, &src, 100_000);
        let s = wlan.stats();
        let per_access = s.idle_slots as f64 / s.successes as f64;
        assert!((per_access - 15.5).abs() < 0.2, "idle slots per access {per_access}");
        assert_eq!(s.collisions, 0);
    }

    #[test]
    fn twelve_saturated_stations_share_evenly() {
        let phy = PhyPreset::G54.params();
        let ents: Vec<_> = (0..12)
            .map(|i| MacEntity::new(i as u16, MacClassParams::DCF))
            .collect();
        let mut wlan = Wlan::new(phy, ChannelModel::default(), ents, 5);
        let src = Saturated { n: 12, bytes: 1000 };
        drive(&mut wlan, &src, 120_000);
        let total: u64 = wlan.wins().iter().sum();
        for (i, &w) in wlan.wins().iter().enumerate() {
            let share = w as f64 / total as f64;
            assert!(
                (share - 1.0 / 12.0).abs() < 0.05 / 12.0 * 12.0_f64.sqrt() + 0.004,
                "station {i} share {share}"
            );
            // The coarse acceptance bound: within 5% relative of 1/12.
            assert!((share * 12.0 - 1.0).abs() < 0.05, "station {i} share {share}");
        }
        assert!(wlan.stats().collisions > 0);
    }

    #[test]
    fn airtime_partitions_elapsed_time() {
        let phy = PhyPreset::G54.params();
        let ents: Vec<_> = (0..3)
            .map(|i| MacEntity::new(i as u16, MacClassParams::DCF))
            .collect();
        let mut wlan = Wlan::new(phy, ChannelModel::default(), ents, 11);
        let src = Saturated { n: 3, bytes: 1000 };
        let end = drive(&mut wlan, &src, 20_000);
        wlan.finish(end);
        let s = wlan.stats();
        let accounted = s.idle_slots as f64 * phy.slot + s.busy_time + s.quiescent_time;
        let rel = (accounted - end.secs()).abs() / end.secs();
        assert!(rel < 1e-9, "accounted {accounted} vs elapsed {end}");
    }

    #[test]
    fn ber_zero_always_succeeds_and_retries_stay_zero() {
        let phy = PhyPreset::G54.params();
        let ents = vec![MacEntity::new(0, MacClassParams::DCF)];
        let mut wlan = Wlan::new(phy, ChannelModel::default(), ents, 3);
        let src = Saturated { n: 1, bytes: 1000 };
        drive(&mut wlan, &src, 5_000);
        assert_eq!(wlan.stats().frame_errors, 0);
        assert_eq!(wlan.entity(0).retries(), 0);
    }

    #[test]
    fn prioritized_class_wins_more_often() {
        // cw_min 4 / AIFS 2 against cw_min 32 / AIFS 6: the prioritized
        // entity should take well over half the transmission opportunities.
        let phy = PhyPreset::G54.params();
        let ents = vec![
            MacEntity::new(0, MacClassParams::EDCA_ACK),
            MacEntity::new(1, MacClassParams::EDCA_DATA),
        ];
        let mut wlan = Wlan::new(phy, ChannelModel::default(), ents, 13);
        let src = Saturated { n: 2, bytes: 1000 };
        drive(&mut wlan, &src, 20_000);
        let w = wlan.wins();
        assert!(
            w[0] > 4 * w[1],
            "ack-class wins {} vs data-class wins {}",
            w[0],
            w[1]
        );
    }
}
