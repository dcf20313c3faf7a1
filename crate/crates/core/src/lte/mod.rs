//! Single-cell LTE: PRB grid, CQI-driven TBS, round-robin uplink and
//! proportional-fair downlink scheduling, RLC AM with ARQ, SR/grant latency.

mod ran;
mod rlc;
mod sched;

pub use ran::{LteEvent, LteRan, LteStats, SrState, TransportBlock, TtiRecord, UeContext};
pub use rlc::{RlcBearer, RlcChunk, RlcStats};
pub use sched::{schedule_downlink, schedule_uplink, DlCandidate, PfState, PrbAllocation, RrState};

use thiserror::Error;

use crate::radio::McsTable;

pub const SUBCARRIERS_PER_PRB: u32 = 12;
pub const SYMBOLS_PER_SUBFRAME: u32 = 14;
pub const PRB_BANDWIDTH_HZ: f64 = 180e3;

/// Spectral efficiency (bits per resource element) for CQI 1..=15.
pub const CQI_EFFICIENCY: [f64; 15] = [
    0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141, 2.4063, 2.7305, 3.3223,
    3.9023, 4.5234, 5.1152, 5.5547,
];

#[derive(Debug, Error, PartialEq)]
pub enum LteError {
    #[error("CQI {0} outside 1..=15")]
    BadCqi(u8),
    #[error("PRB count {n} outside 1..={max}")]
    BadPrbCount { n: u32, max: u32 },
    #[error("node {0} is not attached to the cell")]
    UnknownNode(crate::net::NodeId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LteConfig {
    pub n_prb: u32,
    /// Fraction of resource elements lost to control and reference signals.
    pub overhead: f64,
    pub sr_period_ms: u64,
    pub grant_delay_tti: u64,
    pub rlc_retx_ms: u64,
    pub max_retx: u32,
    pub rlc_buffer_bytes: usize,
    pub cqi_period_ms: u64,
    /// Highest CQI usable on the uplink.
    pub ul_max_cqi: u8,
    pub pf_window_tti: f64,
    pub efficiency: [f64; 15],
    pub table: McsTable,
}

impl Default for LteConfig {
    fn default() -> Self {
        LteConfig {
            n_prb: 100,
            overhead: 0.25,
            sr_period_ms: 5,
            grant_delay_tti: 1,
            rlc_retx_ms: 8,
            max_retx: 4,
            rlc_buffer_bytes: 1_000_000,
            cqi_period_ms: 10,
            ul_max_cqi: 15,
            pf_window_tti: 100.0,
            efficiency: CQI_EFFICIENCY,
            table: McsTable::lte_cqi(),
        }
    }
}

impl LteConfig {
    /// Transport block size in bits for `n_prb` PRBs at `cqi`.
    pub fn tbs(&self, cqi: u8, n_prb: u32) -> Result<u32, LteError> {
        if !(1..=15).contains(&cqi) {
            return Err(LteError::BadCqi(cqi));
        }
        if n_prb == 0 || n_prb > self.n_prb {
            return Err(LteError::BadPrbCount {
                n: n_prb,
                max: self.n_prb,
            });
        }
        let res = (SUBCARRIERS_PER_PRB * SYMBOLS_PER_SUBFRAME * n_prb) as f64;
        Ok((self.efficiency[cqi as usize - 1] * res * (1.0 - self.overhead)).floor() as u32)
    }

    /// Smallest PRB count whose TBS carries `bytes`, capped at `max_prb`.
    pub fn prbs_for(&self, cqi: u8, bytes: u64, max_prb: u32) -> u32 {
        let mut n = 1;
        while n < max_prb {
            if self.tbs(cqi, n).map_or(0, |b| b as u64 / 8) >= bytes {
                break;
            }
            n += 1;
        }
        n.min(max_prb)
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.n_prb as f64 * PRB_BANDWIDTH_HZ
    }
}
