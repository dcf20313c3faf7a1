use std::collections::BTreeMap;

use super::LteConfig;
use crate::net::NodeId;

/// Contiguous PRB interval `[start, start + len)` granted to one UE.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrbAllocation {
    pub ue: NodeId,
    pub start: u32,
    pub len: u32,
}

impl PrbAllocation {
    pub fn end(&self) -> u32 {
        self.start + self.len
    }
}

#[derive(Clone, Debug, Default)]
pub struct RrState {
    pointer: u64,
}

/// Round-robin uplink split: equal contiguous blocks, remainder PRBs to the
/// first UEs in an order whose starting point rotates every TTI.
pub fn schedule_uplink(rr: &mut RrState, ues: &[NodeId], n_prb: u32) -> Vec<PrbAllocation> {
    let k = ues.len();
    if k == 0 {
        return Vec::new();
    }
    let offset = (rr.pointer % k as u64) as usize;
    rr.pointer += 1;
    let order = ues[offset..].iter().chain(&ues[..offset]);
    let served = k.min(n_prb as usize) as u32;
    let base = n_prb / served;
    let extra = n_prb % served;
    let mut start = 0;
    order
        .take(served as usize)
        .enumerate()
        .map(|(i, &ue)| {
            let len = base + u32::from((i as u32) < extra);
            let a = PrbAllocation { ue, start, len };
            start += len;
            a
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DlCandidate {
    pub ue: NodeId,
    pub cqi: u8,
    pub backlog_bytes: u64,
}

/// Exponentially smoothed served rate per UE.
#[derive(Clone, Debug, Default)]
pub struct PfState {
    avg_rate: BTreeMap<NodeId, f64>,
}

impl PfState {
    pub fn avg_rate(&self, ue: NodeId) -> Option<f64> {
        self.avg_rate.get(&ue).copied()
    }
}

const PF_MIN_RATE: f64 = 1.0;

/// Proportional-fair downlink: UEs in decreasing order of
/// full-band-rate / average-rate (ties to the lower id) take the PRBs their
/// backlog needs until the grid is exhausted.
pub fn schedule_downlink(
    pf: &mut PfState,
    cands: &[DlCandidate],
    cfg: &LteConfig,
) -> Vec<PrbAllocation> {
    let n_prb = cfg.n_prb;
    let mut ranked: Vec<(f64, DlCandidate)> = cands
        .iter()
        .filter(|c| (1..=15).contains(&c.cqi) && c.backlog_bytes > 0)
        .map(|c| {
            let inst = cfg.tbs(c.cqi, n_prb).expect("valid cqi") as f64 / 8.0 * 1000.0;
            let avg = pf.avg_rate.get(&c.ue).copied().unwrap_or(PF_MIN_RATE);
            (inst / avg.max(PF_MIN_RATE), *c)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.ue.cmp(&b.1.ue)));

    let mut out = Vec::new();
    let mut start = 0;
    for (_, c) in &ranked {
        let left = n_prb - start;
        if left == 0 {
            break;
        }
        let len = cfg.prbs_for(c.cqi, c.backlog_bytes, left);
        out.push(PrbAllocation {
            ue: c.ue,
            start,
            len,
        });
        start += len;
    }

    let alpha = 1.0 / cfg.pf_window_tti;
    for c in cands {
        pf.avg_rate.entry(c.ue).or_insert(PF_MIN_RATE);
    }
    for (ue, avg) in pf.avg_rate.iter_mut() {
        let served = out
            .iter()
            .find(|a| a.ue == *ue)
            .and_then(|a| {
                let cqi = cands.iter().find(|c| c.ue == *ue)?.cqi;
                Some(cfg.tbs(cqi, a.len).ok()? as f64 / 8.0 * 1000.0)
            })
            .unwrap_or(0.0);
        *avg = ((1.0 - alpha) * *avg + alpha * served).max(PF_MIN_RATE);
    }
    out
}
