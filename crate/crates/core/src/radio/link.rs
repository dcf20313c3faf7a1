use super::pathloss::PathlossBreakdown;
use super::RadioError;

/// Ascending SINR thresholds, one per modulation-and-coding index.
#[derive(Clone, Debug, PartialEq)]
pub struct McsTable {
    pub thresholds_db: Vec<f64>,
    /// Half-width of the linear error ramp around each threshold.
    pub softness_db: f64,
}

impl McsTable {
    pub fn new(thresholds_db: Vec<f64>, softness_db: f64) -> Result<Self, RadioError> {
        if thresholds_db.is_empty() {
            return Err(RadioError::Table("empty threshold table".into()));
        }
        if thresholds_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(RadioError::Table(
                "thresholds must be strictly increasing".into(),
            ));
        }
        if !(softness_db >= 0.0) {
            return Err(RadioError::Table("softness must be >= 0".into()));
        }
        Ok(McsTable {
            thresholds_db,
            softness_db,
        })
    }

    /// 802.11a rates 6, 9, 12, 18, 24, 36, 48, 54 Mb/s: minimum receiver
    /// sensitivity (-82 ... -65 dBm) referenced to a -86 dBm noise level.
    pub fn wifi_80211a() -> Self {
        McsTable {
            thresholds_db: vec![4.0, 5.0, 7.0, 9.0, 12.0, 16.0, 20.0, 21.0],
            softness_db: 1.0,
        }
    }

    /// LTE CQI 1..=15 switching points (index 0 is CQI 1).
    pub fn lte_cqi() -> Self {
        McsTable {
            thresholds_db: vec![
                -6.7, -4.7, -2.3, 0.2, 2.4, 4.3, 5.9, 8.1, 10.3, 11.7, 14.1, 16.3, 18.7, 21.0, 22.7,
            ],
            softness_db: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.thresholds_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds_db.is_empty()
    }

    pub fn lowest_db(&self) -> f64 {
        self.thresholds_db[0]
    }

    /// Highest index whose threshold is <= `sinr_db` (inclusive lower bound).
    pub fn select(&self, sinr_db: f64) -> Option<usize> {
        self.thresholds_db.iter().rposition(|&t| t <= sinr_db)
    }

    /// Soft-edge error probability for a frame sent at `mcs`.
    pub fn error_prob(&self, sinr_db: f64, mcs: usize) -> f64 {
        let thr = self.thresholds_db[mcs];
        let w = self.softness_db;
        if w == 0.0 {
            return if sinr_db >= thr { 0.0 } else { 1.0 };
        }
        ((thr + w - sinr_db) / (2.0 * w)).clamp(0.0, 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkState {
    pub sinr_db: f64,
    /// Index into the technology's [`McsTable`]; the lowest index when disconnected.
    pub selected_mcs: usize,
    pub per: f64,
    pub connected: bool,
}

impl LinkState {
    /// Perfect link at `mcs`, for tests and the null channel.
    pub fn ideal(mcs: usize) -> Self {
        LinkState {
            sinr_db: f64::INFINITY,
            selected_mcs: mcs,
            per: 0.0,
            connected: true,
        }
    }
}

/// Thermal noise over `bandwidth_hz` plus receiver noise figure.
pub fn noise_floor_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    -174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// Interference-free SINR, rate selection and frame error probability.
pub fn link_state(
    tx_power_dbm: f64,
    pl: &PathlossBreakdown,
    noise_floor_dbm: f64,
    table: &McsTable,
) -> LinkState {
    let sinr_db = tx_power_dbm - pl.total_db - noise_floor_dbm;
    link_state_from_sinr(sinr_db, table)
}

pub fn link_state_from_sinr(sinr_db: f64, table: &McsTable) -> LinkState {
    match table.select(sinr_db) {
        Some(mcs) => LinkState {
            sinr_db,
            selected_mcs: mcs,
            per: table.error_prob(sinr_db, mcs),
            connected: true,
        },
        None => LinkState {
            sinr_db,
            selected_mcs: 0,
            per: 1.0,
            connected: false,
        },
    }
}

/// Frame error probability of a `payload_bytes` frame under `ls`.
///
/// The threshold model does not depend on frame length; the size is only
/// validated.
pub fn packet_error_prob(
    ls: &LinkState,
    table: &McsTable,
    payload_bytes: u32,
) -> Result<f64, RadioError> {
    if payload_bytes == 0 {
        return Err(RadioError::EmptyPayload);
    }
    if !ls.connected {
        return Ok(1.0);
    }
    Ok(table.error_prob(ls.sinr_db, ls.selected_mcs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::pathloss::Regime;
    use proptest::prelude::*;

    fn pl(total: f64) -> PathlossBreakdown {
        PathlossBreakdown::new(total, 0.0, 0.0, Regime::Nlos)
    }

    #[test]
    fn strong_link_selects_highest_rate() {
        let t = McsTable::wifi_80211a();
        let ls = link_state(20.0, &pl(80.0), -94.0, &t);
        assert!((ls.sinr_db - 34.0).abs() < 1e-12);
        assert_eq!(ls.selected_mcs, 7);
        assert!(ls.connected);
        assert_eq!(ls.per, 0.0);
    }

    #[test]
    fn below_lowest_threshold_disconnects() {
        let t = McsTable::wifi_80211a();
        let ls = link_state_from_sinr(t.lowest_db() - 0.01, &t);
        assert!(!ls.connected);
        assert_eq!(ls.per, 1.0);
    }

    #[test]
    fn threshold_is_inclusive() {
        let t = McsTable::wifi_80211a();
        let ls = link_state_from_sinr(12.0, &t);
        assert_eq!(ls.selected_mcs, 4);
    }

    #[test]
    fn soft_edge_values() {
        let t = McsTable::wifi_80211a();
        let thr = t.thresholds_db[3];
        let at = |sinr: f64| {
            let ls = LinkState {
                sinr_db: sinr,
                selected_mcs: 3,
                per: 0.0,
                connected: true,
            };
            packet_error_prob(&ls, &t, 1500).unwrap()
        };
        assert_eq!(at(thr + 5.0), 0.0);
        assert_eq!(at(thr - 5.0), 1.0);
        assert!((at(thr) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_payload_rejected() {
        let t = McsTable::lte_cqi();
        assert!(packet_error_prob(&LinkState::ideal(0), &t, 0).is_err());
    }

    #[test]
    fn noise_floor_20mhz() {
        assert!((noise_floor_dbm(20e6, 7.0) - (-93.99)).abs() < 0.01);
    }

    #[test]
    fn table_validation() {
        assert!(McsTable::new(vec![], 1.0).is_err());
        assert!(McsTable::new(vec![1.0, 1.0], 1.0).is_err());
        assert!(McsTable::new(vec![1.0, 2.0], -1.0).is_err());
        assert!(McsTable::new(vec![1.0, 2.0], 0.0).is_ok());
    }

    proptest! {
        #[test]
        fn mcs_is_monotone_in_sinr(a in -20.0f64..40.0, b in -20.0f64..40.0) {
            let t = McsTable::lte_cqi();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let sl = link_state_from_sinr(lo, &t);
            let sh = link_state_from_sinr(hi, &t);
            prop_assert!(sl.selected_mcs <= sh.selected_mcs);
            prop_assert!(!sl.connected || sh.connected);
        }

        #[test]
        fn sinr_strictly_decreasing_in_loss(l in 0.0f64..200.0, dl in 0.001f64..50.0) {
            let t = McsTable::wifi_80211a();
            let a = link_state(20.0, &pl(l), -94.0, &t);
            let b = link_state(20.0, &pl(l + dl), -94.0, &t);
            prop_assert!(b.sinr_db < a.sinr_db);
            prop_assert!((0.0..=1.0).contains(&a.per));
            prop_assert_eq!(a.connected, a.sinr_db >= t.lowest_db());
        }
    }
}
