use std::collections::{BTreeMap, VecDeque};

use super::rlc::{RlcBearer, RlcChunk};
use super::sched::{schedule_downlink, schedule_uplink, DlCandidate, PfState, PrbAllocation, RrState};
use super::{LteConfig, LteError};
use crate::net::{DropLayer, Frame, LinkCtx, LinkOutput, NodeId};
use crate::sim::{RngStream, SimTime};

const TTI: SimTime = SimTime::from_micros(1_000);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LteEvent {
    Tti,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SrState {
    Idle,
    /// Scheduling request sent; the UE may be granted from this instant.
    Waiting(SimTime),
    Active,
}

#[derive(Clone, Debug)]
pub struct UeContext {
    pub node: NodeId,
    pub cqi_ul: u8,
    pub cqi_dl: u8,
    pub sr: SrState,
    ul: RlcBearer,
    dl: RlcBearer,
}

impl UeContext {
    pub fn uplink(&self) -> &RlcBearer {
        &self.ul
    }

    pub fn downlink(&self) -> &RlcBearer {
        &self.dl
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportBlock {
    pub tti: u64,
    pub ue: NodeId,
    pub uplink: bool,
    pub start_prb: u32,
    pub n_prb: u32,
    pub cqi: u8,
    pub size_bits: u32,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TtiRecord {
    pub tti: u64,
    pub uplink: Vec<PrbAllocation>,
    pub downlink: Vec<PrbAllocation>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LteStats {
    pub tbs_ul: u64,
    pub tbs_dl: u64,
    pub tb_failures: u64,
    pub rlc_drops: u64,
    pub queue_drops: u64,
    pub delivered_bytes_ul: u64,
    pub delivered_bytes_dl: u64,
    pub prb_ul: BTreeMap<NodeId, u64>,
    pub prb_dl: BTreeMap<NodeId, u64>,
}

#[derive(Clone, Debug)]
struct InFlight {
    arrive: SimTime,
    ue: usize,
    uplink: bool,
    chunks: Vec<RlcChunk>,
    ok: bool,
}

/// One eNB serving a fixed set of UEs. Driven by a 1 ms `Tti` event.
pub struct LteRan {
    cfg: LteConfig,
    enb: NodeId,
    ues: Vec<UeContext>,
    index: BTreeMap<NodeId, usize>,
    rr: RrState,
    pf: PfState,
    in_flight: VecDeque<InFlight>,
    rng: RngStream,
    started: bool,
    stats: LteStats,
    tti_log: Option<Vec<TtiRecord>>,
    tb_log: Option<Vec<TransportBlock>>,
}

impl LteRan {
    pub fn new(cfg: LteConfig, enb: NodeId, ues: &[NodeId], seed: u64) -> Self {
        let retx = SimTime::from_millis(cfg.rlc_retx_ms);
        let ctxs: Vec<UeContext> = ues
            .iter()
            .map(|&node| UeContext {
                node,
                cqi_ul: 0,
                cqi_dl: 0,
                sr: SrState::Idle,
                ul: RlcBearer::new(cfg.rlc_buffer_bytes, cfg.max_retx, retx),
                dl: RlcBearer::new(cfg.rlc_buffer_bytes, cfg.max_retx, retx),
            })
            .collect();
        let index = ues.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        LteRan {
            cfg,
            enb,
            ues: ctxs,
            index,
            rr: RrState::default(),
            pf: PfState::default(),
            in_flight: VecDeque::new(),
            rng: RngStream::new(seed, "lte.harq"),
            started: false,
            stats: LteStats::default(),
            tti_log: None,
            tb_log: None,
        }
    }

    pub fn config(&self) -> &LteConfig {
        &self.cfg
    }

    pub fn enb(&self) -> NodeId {
        self.enb
    }

    pub fn stats(&self) -> &LteStats {
        &self.stats
    }

    pub fn ue(&self, node: NodeId) -> Option<&UeContext> {
        self.index.get(&node).map(|&i| &self.ues[i])
    }

    pub fn record_ttis(&mut self) {
        self.tti_log.get_or_insert_with(Vec::new);
        self.tb_log.get_or_insert_with(Vec::new);
    }

    pub fn tti_log(&self) -> &[TtiRecord] {
        self.tti_log.as_deref().unwrap_or(&[])
    }

    pub fn transport_blocks(&self) -> &[TransportBlock] {
        self.tb_log.as_deref().unwrap_or(&[])
    }

    /// Schedules the first TTI at the next millisecond boundary.
    pub fn start(&mut self, ctx: &mut LinkCtx<'_, LteEvent>) {
        if !self.started {
            self.started = true;
            let at = SimTime::from_millis(ctx.now.as_micros().div_ceil(1000));
            ctx.at(at, LteEvent::Tti);
        }
    }

    /// First instant a UE whose buffer just became non-empty at `now` can
    /// be granted.
    pub fn grant_time(&self, ue: NodeId, now: SimTime) -> SimTime {
        let us = now.as_micros();
        let delay = self.cfg.grant_delay_tti * 1000;
        if self.cfg.sr_period_ms == 0 {
            return SimTime::from_micros((us / 1000 + 1) * 1000);
        }
        let period = self.cfg.sr_period_ms * 1000;
        let offset = (ue.0 as u64 % self.cfg.sr_period_ms) * 1000;
        let opportunity = if us <= offset {
            offset
        } else {
            offset + (us - offset).div_ceil(period) * period
        };
        SimTime::from_micros(opportunity + delay)
    }

    pub fn enqueue(&mut self, ctx: &mut LinkCtx<'_, LteEvent>, frame: Frame) -> Result<(), LteError> {
        let now = ctx.now;
        let (idx, uplink) = if frame.src == self.enb {
            (*self.index.get(&frame.dst).ok_or(LteError::UnknownNode(frame.dst))?, false)
        } else {
            if frame.dst != self.enb {
                return Err(LteError::UnknownNode(frame.dst));
            }
            (*self.index.get(&frame.src).ok_or(LteError::UnknownNode(frame.src))?, true)
        };
        let grant = self.grant_time(self.ues[idx].node, now);
        let ue = &mut self.ues[idx];
        let bearer = if uplink { &mut ue.ul } else { &mut ue.dl };
        if let Err(frame) = bearer.push(frame) {
            self.stats.queue_drops += 1;
            ctx.emit(LinkOutput::Dropped {
                frame,
                at: now,
                layer: DropLayer::Queue,
            });
            return Ok(());
        }
        if uplink && ue.sr == SrState::Idle {
            ue.sr = SrState::Waiting(grant);
        }
        self.start(ctx);
        Ok(())
    }

    pub fn handle(&mut self, ctx: &mut LinkCtx<'_, LteEvent>, ev: LteEvent) {
        match ev {
            LteEvent::Tti => self.tti(ctx),
        }
    }

    fn tti(&mut self, ctx: &mut LinkCtx<'_, LteEvent>) {
        let now = ctx.now;
        let tti = now.as_micros() / 1000;
        let mut outputs = Vec::new();

        while self.in_flight.front().is_some_and(|f| f.arrive <= now) {
            let f = self.in_flight.pop_front().expect("front");
            let ue = &mut self.ues[f.ue];
            let bearer = if f.uplink { &mut ue.ul } else { &mut ue.dl };
            bearer.on_result(now, &f.chunks, f.ok, &mut outputs);
        }
        for o in &outputs {
            match o {
                LinkOutput::Delivered { frame, .. } if frame.src == self.enb => {
                    self.stats.delivered_bytes_dl += frame.bytes as u64
                }
                LinkOutput::Delivered { frame, .. } => self.stats.delivered_bytes_ul += frame.bytes as u64,
                LinkOutput::Dropped { .. } => self.stats.rlc_drops += 1,
            }
        }

        if self.cfg.cqi_period_ms == 0 || tti.is_multiple_of(self.cfg.cqi_period_ms) || self.ues.iter().all(|u| u.cqi_ul == 0 && u.cqi_dl == 0) {
            self.update_cqi(ctx);
        }

        for ue in self.ues.iter_mut() {
            if let SrState::Waiting(t) = ue.sr {
                if t <= now {
                    ue.sr = SrState::Active;
                }
            }
        }

        let ul_cands: Vec<NodeId> = self
            .ues
            .iter()
            .filter(|u| u.sr == SrState::Active && u.cqi_ul > 0 && u.ul.ready_bytes(now) > 0)
            .map(|u| u.node)
            .collect();
        let ul_alloc = schedule_uplink(&mut self.rr, &ul_cands, self.cfg.n_prb);
        for a in &ul_alloc {
            self.transmit(ctx, tti, *a, true);
        }
        for ue in self.ues.iter_mut() {
            if ue.sr == SrState::Active && ue.ul.outstanding_bytes() == 0 {
                ue.sr = SrState::Idle;
            }
        }

        let dl_cands: Vec<DlCandidate> = self
            .ues
            .iter()
            .filter(|u| u.cqi_dl > 0 && u.dl.ready_bytes(now) > 0)
            .map(|u| DlCandidate {
                ue: u.node,
                cqi: u.cqi_dl,
                backlog_bytes: u.dl.ready_bytes(now) as u64,
            })
            .collect();
        let dl_alloc = schedule_downlink(&mut self.pf, &dl_cands, &self.cfg);
        for a in &dl_alloc {
            self.transmit(ctx, tti, *a, false);
        }

        if let Some(log) = self.tti_log.as_mut() {
            if !ul_alloc.is_empty() || !dl_alloc.is_empty() {
                log.push(TtiRecord {
                    tti,
                    uplink: ul_alloc,
                    downlink: dl_alloc,
                });
            }
        }
        for o in outputs {
            ctx.emit(o);
        }
        ctx.at(now + TTI, LteEvent::Tti);
    }

    fn update_cqi(&mut self, ctx: &mut LinkCtx<'_, LteEvent>) {
        for ue in self.ues.iter_mut() {
            let ul = ctx.radio.link(ue.node, self.enb, ctx.now);
            let dl = ctx.radio.link(self.enb, ue.node, ctx.now);
            let cqi = |sinr: f64| self.cfg.table.select(sinr).map_or(0, |m| m as u8 + 1);
            ue.cqi_ul = if ul.connected { cqi(ul.sinr_db).min(self.cfg.ul_max_cqi) } else { 0 };
            ue.cqi_dl = if dl.connected { cqi(dl.sinr_db) } else { 0 };
        }
    }

    fn transmit(&mut self, ctx: &mut LinkCtx<'_, LteEvent>, tti: u64, a: PrbAllocation, uplink: bool) {
        let now = ctx.now;
        let idx = self.index[&a.ue];
        let ue = &mut self.ues[idx];
        let cqi = if uplink { ue.cqi_ul } else { ue.cqi_dl };
        let bits = self.cfg.tbs(cqi, a.len).expect("scheduled with a valid CQI");
        let bearer = if uplink { &mut ue.ul } else { &mut ue.dl };
        let chunks = bearer.pull(now, bits / 8);
        if chunks.is_empty() {
            return;
        }
        let (tx, rx) = if uplink { (a.ue, self.enb) } else { (self.enb, a.ue) };
        let ls = ctx.radio.link(tx, rx, now);
        let per = if ls.connected {
            self.cfg.table.error_prob(ls.sinr_db, cqi as usize - 1)
        } else {
            1.0
        };
        let ok = !self.rng.chance(per);
        if !ok {
            self.stats.tb_failures += 1;
        }
        let (count, prbs) = if uplink {
            (&mut self.stats.tbs_ul, &mut self.stats.prb_ul)
        } else {
            (&mut self.stats.tbs_dl, &mut self.stats.prb_dl)
        };
        *count += 1;
        *prbs.entry(a.ue).or_default() += a.len as u64;
        if let Some(log) = self.tb_log.as_mut() {
            log.push(TransportBlock {
                tti,
                ue: a.ue,
                uplink,
                start_prb: a.start,
                n_prb: a.len,
                cqi,
                size_bits: bits,
                ok,
            });
        }
        self.in_flight.push_back(InFlight {
            arrive: now + TTI,
            ue: idx,
            uplink,
            chunks,
            ok,
        });
    }
}
