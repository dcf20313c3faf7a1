//! IEEE 802.11a DCF (basic access) in a single collision domain.

mod dcf;

pub use dcf::{DcfStation, MacFrame, StationState, TxRecord, WifiEvent, WifiMac, WifiStats};

use thiserror::Error;

use crate::radio::McsTable;
use crate::sim::SimTime;

pub const SLOT_US: u64 = 9;
pub const SIFS_US: u64 = 16;
pub const DIFS_US: u64 = SIFS_US + 2 * SLOT_US;
pub const CW_MIN: u32 = 15;
pub const CW_MAX: u32 = 1023;
pub const PLCP_US: u64 = 20;
pub const SYMBOL_US: u64 = 4;
/// Largest MSDU the MAC accepts.
pub const MAX_MSDU_BYTES: u32 = 2304;
/// MAC header (24) + FCS (4) + LLC/SNAP (8).
pub const MAC_OVERHEAD_BYTES: u32 = 36;
pub const ACK_BYTES: u32 = 14;

/// Data bits per OFDM symbol for 6, 9, 12, 18, 24, 36, 48, 54 Mb/s.
pub const BITS_PER_SYMBOL: [u32; 8] = [24, 36, 48, 72, 96, 144, 192, 216];

#[derive(Debug, Error, PartialEq)]
pub enum WifiError {
    #[error("MCS index {0} out of range")]
    BadMcs(usize),
    #[error("frame of {0} bytes exceeds the {MAX_MSDU_BYTES}-byte MSDU limit")]
    Oversize(u32),
    #[error("node {0} is not a station")]
    UnknownStation(crate::net::NodeId),
}

/// Air time of a PSDU of `psdu_bytes` at rate index `mcs`: PLCP preamble and
/// header, then SERVICE (16) + data + tail (6) bits padded to whole symbols.
pub fn tx_duration(psdu_bytes: u32, mcs: usize) -> Result<SimTime, WifiError> {
    let bps = *BITS_PER_SYMBOL.get(mcs).ok_or(WifiError::BadMcs(mcs))? as u64;
    let bits = 16 + 8 * psdu_bytes as u64 + 6;
    Ok(SimTime::from_micros(PLCP_US + SYMBOL_US * bits.div_ceil(bps)))
}

pub fn rate_mbps(mcs: usize) -> f64 {
    BITS_PER_SYMBOL[mcs] as f64 / SYMBOL_US as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct DcfConfig {
    pub cw_min: u32,
    pub cw_max: u32,
    pub retry_limit: u32,
    pub queue_frames: usize,
    pub table: McsTable,
}

impl Default for DcfConfig {
    fn default() -> Self {
        DcfConfig {
            cw_min: CW_MIN,
            cw_max: CW_MAX,
            retry_limit: 7,
            queue_frames: 400,
            table: McsTable::wifi_80211a(),
        }
    }
}

impl DcfConfig {
    /// Contention window after `failures` consecutive failures.
    pub fn cw_after(&self, failures: u32) -> u32 {
        let grown = (self.cw_min as u64 + 1) << failures.min(20);
        (grown - 1).min(self.cw_max as u64) as u32
    }

    pub fn ack_duration(&self) -> SimTime {
        tx_duration(ACK_BYTES, 0).expect("lowest rate exists")
    }
}
