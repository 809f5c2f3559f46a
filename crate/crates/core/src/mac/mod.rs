//! Slot-level CSMA/CA channel model.
//!
//! The channel alternates between atomic periods: idle slots (all backlogged
//! entities count down), successful exchanges (data + SIFS + MAC ACK + DIFS)
//! and collision exchanges. Contention follows DCF rules, with per-class
//! CW_min/CW_max/AIFS enabling EDCA operation; the countdown halts while the
//! medium is busy and resumes once it has been idle for the class AIFS.

mod entity;
mod timing;
mod wlan;

pub use entity::MacEntity;
pub use timing::{
    ack_duration, collision_duration, difs, frame_duration, frame_duration_total,
    success_exchange_duration,
};
pub use wlan::{ChannelStats, FrameSource, StepOutcome, TxGrant, Wlan};

/// MAC/PHY timing constants.
///
/// Defaults correspond to an 802.11g PHY: SIFS 10 µs, 9 µs slots, retry
/// limit 11, 1000-byte payload, 54 Mbps data / 6 Mbps basic rates with PLCP
/// carried at 6 Mbps (20 µs of preamble+header overhead).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhyParams {
    pub sifs: f64,
    pub slot: f64,
    pub data_rate: f64,
    pub basic_rate: f64,
    pub plcp_rate: f64,
    pub plcp_overhead: f64,
    pub payload_default: u32,
    pub retry_limit: u32,
}

/// Frame overheads shared by every PHY preset.
pub const MAC_HEADER_BYTES: u32 = 28;
pub const MAC_ACK_BYTES: u32 = 14;
/// TCP ACK payload carried in its own (small) frame.
pub const TCP_ACK_BYTES: u32 = 40;

impl Default for PhyParams {
    fn default() -> Self {
        PhyPreset::G54.params()
    }
}

impl PhyParams {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("sifs", self.sifs),
            ("slot", self.slot),
            ("data_rate", self.data_rate),
            ("basic_rate", self.basic_rate),
            ("plcp_rate", self.plcp_rate),
            ("plcp_overhead", self.plcp_overhead),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(format!("phy.{name} must be positive"));
            }
        }
        if self.retry_limit < 1 {
            return Err("phy.retry_limit must be >= 1".into());
        }
        Ok(())
    }
}

/// Named PHY presets from the evaluated rate set.
///
/// `B1`/`B11` emulate 802.11b rates (192 µs long preamble, 20 µs slots);
/// `G54` is plain 802.11g; `N216` models an 802.11n-like mode where 8
/// packets are aggregated into each frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhyPreset {
    B1,
    B11,
    G54,
    N216,
}

impl PhyPreset {
    pub fn parse(s: &str) -> Option<PhyPreset> {
        match s {
            "1/1" => Some(PhyPreset::B1),
            "11/1" => Some(PhyPreset::B11),
            "54/6" => Some(PhyPreset::G54),
            "216/54" => Some(PhyPreset::N216),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PhyPreset::B1 => "1/1",
            PhyPreset::B11 => "11/1",
            PhyPreset::G54 => "54/6",
            PhyPreset::N216 => "216/54",
        }
    }

    pub fn params(self) -> PhyParams {
        match self {
            PhyPreset::B1 => PhyParams {
                sifs: 10e-6,
                slot: 20e-6,
                data_rate: 1e6,
                basic_rate: 1e6,
                plcp_rate: 1e6,
                plcp_overhead: 192e-6,
                payload_default: 1000,
                retry_limit: 11,
            },
            PhyPreset::B11 => PhyParams {
                sifs: 10e-6,
                slot: 20e-6,
                data_rate: 11e6,
                basic_rate: 1e6,
                plcp_rate: 1e6,
                plcp_overhead: 192e-6,
                payload_default: 1000,
                retry_limit: 11,
            },
            PhyPreset::G54 => PhyParams {
                sifs: 10e-6,
                slot: 9e-6,
                data_rate: 54e6,
                basic_rate: 6e6,
                plcp_rate: 6e6,
                plcp_overhead: 20e-6,
                payload_default: 1000,
                retry_limit: 11,
            },
            PhyPreset::N216 => PhyParams {
                sifs: 10e-6,
                slot: 9e-6,
                data_rate: 216e6,
                basic_rate: 54e6,
                plcp_rate: 6e6,
                plcp_overhead: 20e-6,
                payload_default: 1000,
                retry_limit: 11,
            },
        }
    }

    /// Packets aggregated per frame under this preset.
    pub fn default_aggregation(self) -> u32 {
        match self {
            PhyPreset::N216 => 8,
            _ => 1,
        }
    }
}

/// Channel error and aggregation model.
///
/// A transmitted frame of `b` bits fails independently with probability
/// `1 - (1 - ber)^b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub ber: f64,
    pub aggregation_k: u32,
}

impl Default for ChannelModel {
    fn default() -> Self {
        ChannelModel { ber: 0.0, aggregation_k: 1 }
    }
}

impl ChannelModel {
    pub fn frame_error_probability(&self, frame_bits: u64) -> f64 {
        if self.ber <= 0.0 {
            return 0.0;
        }
        1.0 - (1.0 - self.ber).powi(frame_bits as i32)
    }
}

/// Per-class contention parameters. `cw_min`/`cw_max` are window sizes in
/// counts (a fresh backoff is uniform on `[0, cw-1]`), `aifs` is in slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacClassParams {
    pub cw_min: u32,
    pub cw_max: u32,
    pub aifs: u32,
}

impl MacClassParams {
    /// Data class under EDCA.
    pub const EDCA_DATA: MacClassParams = MacClassParams { cw_min: 32, cw_max: 1024, aifs: 6 };
    /// Prioritized class used for TCP ACKs under EDCA.
    pub const EDCA_ACK: MacClassParams = MacClassParams { cw_min: 4, cw_max: 8, aifs: 2 };
    /// Single class shared by all traffic under plain DCF.
    pub const DCF: MacClassParams = MacClassParams { cw_min: 32, cw_max: 1024, aifs: 2 };

    pub fn validate(&self) -> Result<(), String> {
        if self.cw_min < 1 || self.cw_min > self.cw_max {
            return Err(format!(
                "contention window must satisfy 1 <= cw_min ({}) <= cw_max ({})",
                self.cw_min, self.cw_max
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_error_probability_matches_direct_evaluation() {
        // 1028-byte frame = 8224 bits at BER 1e-5.
        let ch = ChannelModel { ber: 1e-5, aggregation_k: 1 };
        let p = ch.frame_error_probability(8224);
        // Independent route: exp(b * ln(1-p)).
        let oracle = 1.0 - (8224.0 * (1.0f64 - 1e-5).ln()).exp();
        assert!((p - oracle).abs() < 1e-12);
        assert!((p - 0.0790).abs() < 5e-4, "p = {p}");
    }

    #[test]
    fn zero_ber_never_errors() {
        let ch = ChannelModel::default();
        assert_eq!(ch.frame_error_probability(1_000_000), 0.0);
    }

    #[test]
    fn preset_names_round_trip() {
        for p in [PhyPreset::B1, PhyPreset::B11, PhyPreset::G54, PhyPreset::N216] {
            assert_eq!(PhyPreset::parse(p.name()), Some(p));
            p.params().validate().unwrap();
        }
        assert_eq!(PhyPreset::N216.default_aggregation(), 8);
    }
}
