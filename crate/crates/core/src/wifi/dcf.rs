use std::collections::{BTreeMap, VecDeque};

use super::{tx_duration, DcfConfig, WifiError, DIFS_US, MAC_OVERHEAD_BYTES, MAX_MSDU_BYTES, SIFS_US, SLOT_US};
use crate::net::{DropLayer, Frame, LinkCtx, LinkOutput, NodeId};
use crate::sim::{RngStream, SimTime};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StationState {
    Idle,
    /// Has a frame, backoff frozen while the medium is busy.
    Deferring,
    BackingOff,
    Transmitting,
    WaitingAck,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MacFrame {
    pub frame: Frame,
    /// Rate index used for the latest attempt.
    pub mcs: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct DcfStation {
    pub node: NodeId,
    pub contention_window: u32,
    pub backoff_counter: u32,
    pub retry_count: u32,
    pub tx_queue: VecDeque<MacFrame>,
    pub state: StationState,
    /// First slot boundary at which the counter runs, once the medium is idle.
    resume_at: Option<SimTime>,
    /// Earliest time the station may start sensing DIFS.
    ready_from: SimTime,
    head_since: SimTime,
    rng: RngStream,
}

impl DcfStation {
    fn tx_time(&self) -> Option<SimTime> {
        match self.state {
            StationState::BackingOff => self
                .resume_at
                .map(|r| r + SimTime::from_micros(self.backoff_counter as u64 * SLOT_US)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WifiEvent {
    /// Earliest backoff expiry; stale generations are ignored.
    Contend { gen: u64 },
    Deliver { station: usize, frame: Frame },
    TxDone { station: usize, success: bool },
}

/// One medium-occupancy interval.
#[derive(Clone, Debug, PartialEq)]
pub struct TxRecord {
    pub start: SimTime,
    pub end: SimTime,
    pub stations: Vec<NodeId>,
    pub collided: bool,
    pub phy_error: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WifiStats {
    pub successes: u64,
    pub collisions: u64,
    pub phy_errors: u64,
    pub retry_drops: u64,
    pub queue_drops: u64,
    pub delivered_bytes: u64,
    /// Per-station sum and count of head-of-line-to-ACK delays, µs.
    pub access_delay: BTreeMap<NodeId, (u64, u64)>,
}

impl WifiStats {
    pub fn mean_access_delay_us(&self, node: NodeId) -> Option<f64> {
        self.access_delay
            .get(&node)
            .filter(|(_, n)| *n > 0)
            .map(|(s, n)| *s as f64 / *n as f64)
    }
}

/// DCF MAC shared by every station in one collision domain.
pub struct WifiMac {
    cfg: DcfConfig,
    stations: Vec<DcfStation>,
    index: BTreeMap<NodeId, usize>,
    /// Medium is idle from this instant on (may lie in the future during an exchange).
    idle_from: SimTime,
    gen: u64,
    stats: WifiStats,
    tx_log: Option<Vec<TxRecord>>,
}

impl WifiMac {
    /// `nodes` become stations in the given order; each draws from its own
    /// `wifi.backoff.<node>` stream.
    pub fn new(cfg: DcfConfig, nodes: &[NodeId], seed: u64) -> Self {
        let stations: Vec<DcfStation> = nodes
            .iter()
            .map(|&node| DcfStation {
                node,
                contention_window: cfg.cw_min,
                backoff_counter: 0,
                retry_count: 0,
                tx_queue: VecDeque::new(),
                state: StationState::Idle,
                resume_at: None,
                ready_from: SimTime::ZERO,
                head_since: SimTime::ZERO,
                rng: RngStream::new(seed, &format!("wifi.backoff.{}", node.0)),
            })
            .collect();
        let index = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        WifiMac {
            cfg,
            stations,
            index,
            idle_from: SimTime::ZERO,
            gen: 0,
            stats: WifiStats::default(),
            tx_log: None,
        }
    }

    pub fn config(&self) -> &DcfConfig {
        &self.cfg
    }

    pub fn stats(&self) -> &WifiStats {
        &self.stats
    }

    pub fn station(&self, node: NodeId) -> Option<&DcfStation> {
        self.index.get(&node).map(|&i| &self.stations[i])
    }

    pub fn record_transmissions(&mut self) {
        self.tx_log.get_or_insert_with(Vec::new);
    }

    pub fn transmissions(&self) -> &[TxRecord] {
        self.tx_log.as_deref().unwrap_or(&[])
    }

    pub fn queue_len(&self, node: NodeId) -> usize {
        self.station(node).map_or(0, |s| s.tx_queue.len())
    }

    /// Hands a frame to the source station's MAC queue.
    pub fn enqueue(&mut self, ctx: &mut LinkCtx<'_, WifiEvent>, frame: Frame) -> Result<(), WifiError> {
        if frame.bytes > MAX_MSDU_BYTES {
            return Err(WifiError::Oversize(frame.bytes));
        }
        let idx = *self
            .index
            .get(&frame.src)
            .ok_or(WifiError::UnknownStation(frame.src))?;
        if !self.index.contains_key(&frame.dst) {
            return Err(WifiError::UnknownStation(frame.dst));
        }
        let now = ctx.now;
        let st = &mut self.stations[idx];
        if st.tx_queue.len() >= self.cfg.queue_frames {
            self.stats.queue_drops += 1;
            ctx.emit(LinkOutput::Dropped {
                frame,
                at: now,
                layer: DropLayer::Queue,
            });
            return Ok(());
        }
        st.tx_queue.push_back(MacFrame { frame, mcs: None });
        if st.state == StationState::Idle {
            st.head_since = now;
            self.start_access(idx, now);
            self.reschedule(ctx);
        }
        Ok(())
    }

    pub fn handle(&mut self, ctx: &mut LinkCtx<'_, WifiEvent>, ev: WifiEvent) {
        match ev {
            WifiEvent::Contend { gen } if gen == self.gen => self.contend(ctx),
            WifiEvent::Contend { .. } => {}
            WifiEvent::Deliver { frame, .. } => {
                self.stats.delivered_bytes += frame.bytes as u64;
                ctx.emit(LinkOutput::Delivered { frame, at: ctx.now });
            }
            WifiEvent::TxDone { station, success } => self.finish(ctx, station, success),
        }
    }

    fn start_access(&mut self, idx: usize, now: SimTime) {
        let st = &mut self.stations[idx];
        st.backoff_counter = st.rng.below_inclusive(st.contention_window);
        st.state = StationState::BackingOff;
        st.resume_at = None;
        st.ready_from = now;
    }

    /// Next slot-grid instant at or after `t`; the grid starts DIFS after the
    /// medium went idle.
    fn align(&self, t: SimTime) -> SimTime {
        let origin = self.idle_from + SimTime::from_micros(DIFS_US);
        if t <= origin {
            return origin;
        }
        let k = (t - origin).as_micros().div_ceil(SLOT_US);
        origin + SimTime::from_micros(k * SLOT_US)
    }

    fn reschedule(&mut self, ctx: &mut LinkCtx<'_, WifiEvent>) {
        let idle_from = self.idle_from;
        for i in 0..self.stations.len() {
            let st = &self.stations[i];
            if matches!(st.state, StationState::BackingOff | StationState::Deferring)
                && st.resume_at.is_none()
            {
                let start = st.ready_from.max(idle_from) + SimTime::from_micros(DIFS_US);
                let resume = self.align(start);
                let st = &mut self.stations[i];
                st.resume_at = Some(resume);
                st.state = StationState::BackingOff;
            }
        }
        let next = self.stations.iter().filter_map(DcfStation::tx_time).min();
        self.gen += 1;
        if let Some(at) = next {
            ctx.at(at.max(ctx.now), WifiEvent::Contend { gen: self.gen });
        }
    }

    fn contend(&mut self, ctx: &mut LinkCtx<'_, WifiEvent>) {
        let now = ctx.now;
        let winners: Vec<usize> = (0..self.stations.len())
            .filter(|&i| self.stations[i].tx_time() == Some(now))
            .collect();
        if winners.is_empty() {
            self.reschedule(ctx);
            return;
        }
        // everyone else freezes with the slots already counted down
        for st in self.stations.iter_mut() {
            if st.state == StationState::BackingOff && st.tx_time() != Some(now) {
                if let Some(r) = st.resume_at {
                    if now > r {
                        let elapsed = ((now - r).as_micros() / SLOT_US) as u32;
                        st.backoff_counter -= elapsed.min(st.backoff_counter);
                    }
                }
                st.resume_at = None;
                st.state = StationState::Deferring;
            }
        }

        let mut data_end = now;
        let mut phy_ok = true;
        for &i in &winners {
            let head = self.stations[i].tx_queue.front().expect("backing off with a frame").frame;
            let ls = ctx.radio.link(head.src, head.dst, now);
            let mcs = ls.selected_mcs.min(self.cfg.table.len() - 1);
            let dur = tx_duration(head.bytes + MAC_OVERHEAD_BYTES, mcs).expect("valid rate index");
            data_end = data_end.max(now + dur);
            let st = &mut self.stations[i];
            st.tx_queue.front_mut().expect("head").mcs = Some(mcs);
            st.state = StationState::Transmitting;
            st.resume_at = None;
            if winners.len() == 1 {
                phy_ok = !st.rng.chance(ls.per);
            }
        }
        let collided = winners.len() > 1;
        let success = !collided && phy_ok;
        let exchange_end =
            data_end + SimTime::from_micros(SIFS_US) + self.cfg.ack_duration();
        if collided {
            self.stats.collisions += 1;
        } else if !phy_ok {
            self.stats.phy_errors += 1;
        }
        if let Some(log) = self.tx_log.as_mut() {
            log.push(TxRecord {
                start: now,
                end: data_end,
                stations: winners.iter().map(|&i| self.stations[i].node).collect(),
                collided,
                phy_error: !collided && !phy_ok,
            });
        }
        for &i in &winners {
            self.stations[i].state = StationState::WaitingAck;
            if success {
                let frame = self.stations[i].tx_queue.front().expect("head").frame;
                ctx.at(data_end, WifiEvent::Deliver { station: i, frame });
            }
            // the ACK (or its timeout) closes the exchange
            ctx.at(exchange_end, WifiEvent::TxDone { station: i, success });
        }
        self.idle_from = if success { exchange_end } else { data_end };
        self.reschedule(ctx);
    }

    fn finish(&mut self, ctx: &mut LinkCtx<'_, WifiEvent>, idx: usize, success: bool) {
        let now = ctx.now;
        let cfg_retry = self.cfg.retry_limit;
        let st = &mut self.stations[idx];
        if success {
            st.tx_queue.pop_front().expect("acked frame");
            let entry = self.stats.access_delay.entry(st.node).or_default();
            entry.0 += (now - st.head_since).as_micros();
            entry.1 += 1;
            self.stats.successes += 1;
            st.retry_count = 0;
            st.contention_window = self.cfg.cw_min;
        } else {
            st.retry_count += 1;
            if st.retry_count > cfg_retry {
                let dropped = st.tx_queue.pop_front().expect("failed frame");
                self.stats.retry_drops += 1;
                st.retry_count = 0;
                st.contention_window = self.cfg.cw_min;
                ctx.emit(LinkOutput::Dropped {
                    frame: dropped.frame,
                    at: now,
                    layer: DropLayer::Mac,
                });
            } else {
                st.contention_window = self.cfg.cw_after(st.retry_count);
            }
        }
        let st = &mut self.stations[idx];
        if st.tx_queue.is_empty() {
            st.state = StationState::Idle;
        } else {
            if st.retry_count == 0 {
                st.head_since = now;
            }
            self.start_access(idx, now);
        }
        self.reschedule(ctx);
    }
}
