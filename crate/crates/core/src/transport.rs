//! Reliable byte stream with NewReno congestion control, sans-IO.
//!
//! The sender turns bursts into MSS-sized segments (a segment never spans two
//! bursts), the receiver delivers in order and acknowledges every segment.
//! Timers are reported as deadlines tagged with a generation; stale
//! generations are ignored by [`TcpSender::on_rto`].

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::sim::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransportMode {
    Reliable,
    Datagram,
}

impl TransportMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TransportMode::Reliable => "reliable",
            TransportMode::Datagram => "datagram",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "reliable" => Some(TransportMode::Reliable),
            "datagram" => Some(TransportMode::Datagram),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TcpConfig {
    pub mss: u32,
    /// IP + TCP header bytes added to every segment on the wire.
    pub header_bytes: u32,
    pub initial_cwnd_segments: u32,
    pub initial_ssthresh: u64,
    pub min_rto: SimTime,
    pub max_rto: SimTime,
    pub initial_rto: SimTime,
    pub send_buffer: u64,
}

impl Default for TcpConfig {
    fn default() -> Self {
        TcpConfig {
            mss: 1460,
            header_bytes: 40,
            initial_cwnd_segments: 2,
            initial_ssthresh: 65_536,
            min_rto: SimTime::from_millis(200),
            max_rto: SimTime::from_secs(60),
            initial_rto: SimTime::from_secs(1),
            send_buffer: 256 * 1024,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("send buffer full: {buffered} + {requested} bytes exceeds {capacity}")]
pub struct BufferFull {
    pub buffered: u64,
    pub requested: u64,
    pub capacity: u64,
}

/// Number of packets a burst of `bytes` becomes at segment size `mss`.
pub fn segment_count(bytes: u64, mss: u32) -> u64 {
    bytes.div_ceil(mss as u64)
}

/// Payload sizes of the packets of one burst.
pub fn segment_sizes(bytes: u64, mss: u32) -> Vec<u32> {
    let n = segment_count(bytes, mss);
    (0..n)
        .map(|i| (bytes - i * mss as u64).min(mss as u64) as u32)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub seq: u64,
    pub len: u32,
    pub burst: u64,
    /// Packet index within the burst.
    pub index: u32,
    pub sent_at: SimTime,
    pub is_retx: bool,
}

impl Segment {
    pub fn end(&self) -> u64 {
        self.seq + self.len as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcState {
    SlowStart,
    CongestionAvoidance,
    FastRecovery,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TcpAction {
    Send(Segment),
    /// Arm (or re-arm) the retransmission timer; `None` disarms it.
    Timer { deadline: Option<SimTime>, gen: u64 },
    Completed { burst: u64 },
}

#[derive(Clone, Copy, Debug)]
struct Burst {
    id: u64,
    start: u64,
    end: u64,
}

#[derive(Clone, Debug)]
pub struct TcpSender {
    cfg: TcpConfig,
    pub cwnd: u64,
    pub ssthresh: u64,
    pub state: CcState,
    pub rto: SimTime,
    srtt: Option<f64>,
    rttvar: f64,
    snd_una: u64,
    snd_nxt: u64,
    snd_max: u64,
    write_seq: u64,
    recover: u64,
    dupacks: u32,
    bursts: VecDeque<Burst>,
    timed: Option<(u64, SimTime)>,
    timer_gen: u64,
    timer_armed: bool,
    rto_count: u64,
    fast_retransmits: u64,
}

impl TcpSender {
    pub fn new(cfg: TcpConfig) -> Self {
        let cwnd = cfg.initial_cwnd_segments.max(1) as u64 * cfg.mss as u64;
        let ssthresh = cfg.initial_ssthresh;
        TcpSender {
            cwnd,
            ssthresh,
            state: if cwnd < ssthresh { CcState::SlowStart } else { CcState::CongestionAvoidance },
            rto: cfg.initial_rto,
            srtt: None,
            rttvar: 0.0,
            snd_una: 0,
            snd_nxt: 0,
            snd_max: 0,
            write_seq: 0,
            recover: 0,
            dupacks: 0,
            bursts: VecDeque::new(),
            timed: None,
            timer_gen: 0,
            timer_armed: false,
            rto_count: 0,
            fast_retransmits: 0,
            cfg,
        }
    }

    pub fn config(&self) -> &TcpConfig {
        &self.cfg
    }

    pub fn flight_size(&self) -> u64 {
        self.snd_max - self.snd_una
    }

    pub fn snd_una(&self) -> u64 {
        self.snd_una
    }

    pub fn buffered(&self) -> u64 {
        self.write_seq - self.snd_una
    }

    pub fn srtt(&self) -> Option<SimTime> {
        self.srtt.map(SimTime::from_secs_f64)
    }

    pub fn rto_count(&self) -> u64 {
        self.rto_count
    }

    pub fn fast_retransmits(&self) -> u64 {
        self.fast_retransmits
    }

    pub fn idle(&self) -> bool {
        self.snd_una == self.write_seq
    }

    /// Queues a burst; a zero-byte burst completes immediately.
    pub fn send_burst(&mut self, now: SimTime, burst: u64, bytes: u64) -> Result<Vec<TcpAction>, BufferFull> {
        if bytes == 0 {
            return Ok(vec![TcpAction::Completed { burst }]);
        }
        if self.buffered() + bytes > self.cfg.send_buffer {
            return Err(BufferFull {
                buffered: self.buffered(),
                requested: bytes,
                capacity: self.cfg.send_buffer,
            });
        }
        self.bursts.push_back(Burst {
            id: burst,
            start: self.write_seq,
            end: self.write_seq + bytes,
        });
        self.write_seq += bytes;
        let mut out = Vec::new();
        self.fill(now, &mut out);
        Ok(out)
    }

    fn segment_at(&self, seq: u64, now: SimTime) -> Segment {
        let b = self
            .bursts
            .iter()
            .find(|b| b.start <= seq && seq < b.end)
            .expect("sequence inside a queued burst");
        let mss = self.cfg.mss as u64;
        let offset = seq - b.start;
        Segment {
            seq,
            len: (b.end - seq).min(mss) as u32,
            burst: b.id,
            index: (offset / mss) as u32,
            sent_at: now,
            is_retx: seq < self.snd_max,
        }
    }

    fn emit(&mut self, seg: Segment, out: &mut Vec<TcpAction>) {
        if seg.is_retx {
            // Karn: never time a retransmitted range
            if self.timed.is_some_and(|(end, _)| end > seg.seq) {
                self.timed = None;
            }
        } else if self.timed.is_none() {
            self.timed = Some((seg.end(), seg.sent_at));
        }
        self.snd_max = self.snd_max.max(seg.end());
        out.push(TcpAction::Send(seg));
    }

    fn fill(&mut self, now: SimTime, out: &mut Vec<TcpAction>) {
        while self.snd_nxt < self.write_seq {
            let seg = self.segment_at(self.snd_nxt, now);
            let in_flight = self.snd_nxt - self.snd_una;
            if in_flight + seg.len as u64 > self.cwnd {
                break;
            }
            self.snd_nxt = seg.end();
            self.emit(seg, out);
        }
        if !self.timer_armed && self.snd_una < self.snd_max {
            self.arm(now, out);
        }
    }

    fn arm(&mut self, now: SimTime, out: &mut Vec<TcpAction>) {
        self.timer_gen += 1;
        self.timer_armed = true;
        out.push(TcpAction::Timer {
            deadline: Some(now + self.rto),
            gen: self.timer_gen,
        });
    }

    fn disarm(&mut self, out: &mut Vec<TcpAction>) {
        self.timer_gen += 1;
        self.timer_armed = false;
        out.push(TcpAction::Timer {
            deadline: None,
            gen: self.timer_gen,
        });
    }

    fn sample_rtt(&mut self, r: f64) {
        match self.srtt {
            None => {
                self.srtt = Some(r);
                self.rttvar = r / 2.0;
            }
            Some(s) => {
                self.rttvar = 0.75 * self.rttvar + 0.25 * (s - r).abs();
                self.srtt = Some(0.875 * s + 0.125 * r);
            }
        }
        let g = 0.001;
        let rto = self.srtt.expect("set") + (4.0 * self.rttvar).max(g);
        self.rto = SimTime::from_secs_f64(rto).max(self.cfg.min_rto).min(self.cfg.max_rto);
    }

    fn retransmit_head(&mut self, now: SimTime, out: &mut Vec<TcpAction>) {
        let seg = self.segment_at(self.snd_una, now);
        self.snd_nxt = self.snd_nxt.max(seg.end());
        self.emit(seg, out);
    }

    /// Cumulative acknowledgement `ack` (next byte expected by the receiver).
    pub fn on_ack(&mut self, now: SimTime, ack: u64) -> Vec<TcpAction> {
        let mut out = Vec::new();
        let mss = self.cfg.mss as u64;
        if ack > self.snd_max {
            return out;
        }
        if ack > self.snd_una {
            let acked = ack - self.snd_una;
            self.snd_una = ack;
            self.snd_nxt = self.snd_nxt.max(ack);
            if let Some((end, t)) = self.timed {
                if ack >= end {
                    self.sample_rtt((now - t).as_secs_f64());
                    self.timed = None;
                }
            }
            match self.state {
                CcState::FastRecovery if ack >= self.recover => {
                    self.cwnd = self.ssthresh;
                    self.state = CcState::CongestionAvoidance;
                }
                CcState::FastRecovery => {
                    self.retransmit_head(now, &mut out);
                    self.cwnd = (self.cwnd.saturating_sub(acked) + mss).max(mss);
                }
                CcState::SlowStart => {
                    self.cwnd += mss;
                    if self.cwnd >= self.ssthresh {
                        self.state = CcState::CongestionAvoidance;
                    }
                }
                CcState::CongestionAvoidance => {
                    self.cwnd += (mss * mss / self.cwnd).max(1);
                }
            }
            if self.state != CcState::FastRecovery {
                self.dupacks = 0;
            }
            while self.bursts.front().is_some_and(|b| b.end <= self.snd_una) {
                let b = self.bursts.pop_front().expect("front");
                out.push(TcpAction::Completed { burst: b.id });
            }
            if self.snd_una == self.snd_max {
                self.disarm(&mut out);
            } else {
                self.arm(now, &mut out);
            }
        } else if ack == self.snd_una && self.snd_una < self.snd_max {
            self.dupacks += 1;
            if self.state == CcState::FastRecovery {
                self.cwnd += mss;
            } else if self.dupacks == 3 {
                self.ssthresh = (self.flight_size() / 2).max(2 * mss);
                self.recover = self.snd_max;
                self.fast_retransmits += 1;
                self.retransmit_head(now, &mut out);
                self.cwnd = self.ssthresh + 3 * mss;
                self.state = CcState::FastRecovery;
            }
        }
        self.fill(now, &mut out);
        out
    }

    /// Retransmission timer expiry; ignored unless `gen` is current.
    pub fn on_rto(&mut self, now: SimTime, gen: u64) -> Vec<TcpAction> {
        let mut out = Vec::new();
        if gen != self.timer_gen || !self.timer_armed || self.snd_una == self.snd_max {
            return out;
        }
        let mss = self.cfg.mss as u64;
        self.rto_count += 1;
        self.ssthresh = (self.flight_size() / 2).max(2 * mss);
        self.cwnd = mss;
        self.state = CcState::SlowStart;
        self.rto = (self.rto + self.rto).min(self.cfg.max_rto);
        self.dupacks = 0;
        self.recover = self.snd_max;
        self.timed = None;
        self.snd_nxt = self.snd_una;
        self.timer_armed = false;
        self.fill(now, &mut out);
        out
    }
}

/// In-order reassembly; acknowledges every arriving segment.
#[derive(Clone, Debug, Default)]
pub struct TcpReceiver {
    rcv_nxt: u64,
    ooo: BTreeMap<u64, Segment>,
}

impl TcpReceiver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rcv_nxt(&self) -> u64 {
        self.rcv_nxt
    }

    /// Returns the cumulative ACK and the segments newly delivered in order.
    pub fn on_segment(&mut self, seg: Segment) -> (u64, Vec<Segment>) {
        let mut delivered = Vec::new();
        if seg.end() > self.rcv_nxt {
            if seg.seq == self.rcv_nxt {
                self.rcv_nxt = seg.end();
                delivered.push(seg);
                while let Some(next) = self.ooo.remove(&self.rcv_nxt) {
                    self.rcv_nxt = next.end();
                    delivered.push(next);
                }
            } else if seg.seq > self.rcv_nxt {
                self.ooo.entry(seg.seq).or_insert(seg);
            }
        }
        (self.rcv_nxt, delivered)
    }
}
