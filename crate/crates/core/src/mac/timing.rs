//! Frame and exchange durations derived from the PHY timing constants.

use super::{PhyParams, MAC_ACK_BYTES, MAC_HEADER_BYTES};

/// Airtime of a data frame carrying `k_agg` packets of `payload_bytes` each.
///
/// One MAC header (28 bytes) is charged per frame regardless of aggregation.
pub fn frame_duration(payload_bytes: u32, k_agg: u32, phy: &PhyParams) -> f64 {
    debug_assert!(payload_bytes > 0 && k_agg >= 1);
    frame_duration_total(k_agg as u64 * payload_bytes as u64, phy)
}

/// Airtime of a data frame with the given total payload byte count (for
/// frames aggregating packets of mixed sizes).
pub fn frame_duration_total(total_payload_bytes: u64, phy: &PhyParams) -> f64 {
    phy.plcp_overhead + 8.0 * (MAC_HEADER_BYTES as u64 + total_payload_bytes) as f64 / phy.data_rate
}

/// Airtime of the MAC-level ACK (14 bytes at the basic rate).
pub fn ack_duration(phy: &PhyParams) -> f64 {
    phy.plcp_overhead + 8.0 * MAC_ACK_BYTES as f64 / phy.basic_rate
}

/// DIFS for a class with the given AIFS slot count.
pub fn difs(phy: &PhyParams, aifs_slots: u32) -> f64 {
    phy.sifs + aifs_slots as f64 * phy.slot
}

/// Channel occupancy of a successful exchange: data, SIFS, MAC ACK, then
/// DIFS before the next countdown.
pub fn success_exchange_duration(t_data: f64, phy: &PhyParams, aifs_slots: u32) -> f64 {
    t_data + phy.sifs + ack_duration(phy) + difs(phy, aifs_slots)
}

/// Channel occupancy of a collision: the longest involved frame plus DIFS.
/// No EIFS is modeled.
pub fn collision_duration(t_data_longest: f64, phy: &PhyParams, aifs_slots: u32) -> f64 {
    t_data_longest + difs(phy, aifs_slots)
}
