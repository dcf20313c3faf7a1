use std::collections::{BTreeMap, VecDeque};

use crate::net::{DropLayer, Frame, LinkOutput};
use crate::sim::SimTime;

/// A byte range of one SDU carried in a transport block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RlcChunk {
    pub sn: u64,
    pub bytes: u32,
    /// 1 for the first transmission.
    pub attempt: u32,
}

#[derive(Clone, Debug)]
struct Sdu {
    frame: Frame,
    sent: u32,
    received: u32,
    dropped: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RlcStats {
    pub delivered: u64,
    pub dropped: u64,
    pub overflow: u64,
    pub retransmissions: u64,
}

/// RLC acknowledged-mode bearer: segmentation into grant-sized chunks,
/// retransmission of failed chunks after a fixed delay, in-order delivery.
#[derive(Clone, Debug)]
pub struct RlcBearer {
    capacity: usize,
    max_retx: u32,
    retx_delay: SimTime,
    sdus: BTreeMap<u64, Sdu>,
    next_sn: u64,
    send_sn: u64,
    deliver_sn: u64,
    retx: VecDeque<(SimTime, RlcChunk)>,
    buffered: usize,
    in_flight: usize,
    stats: RlcStats,
}

impl RlcBearer {
    pub fn new(capacity: usize, max_retx: u32, retx_delay: SimTime) -> Self {
        RlcBearer {
            capacity,
            max_retx,
            retx_delay,
            sdus: BTreeMap::new(),
            next_sn: 0,
            send_sn: 0,
            deliver_sn: 0,
            retx: VecDeque::new(),
            buffered: 0,
            in_flight: 0,
            stats: RlcStats::default(),
        }
    }

    pub fn stats(&self) -> &RlcStats {
        &self.stats
    }

    /// Bytes waiting for first transmission or retransmission.
    pub fn buffered_bytes(&self) -> usize {
        self.buffered
    }

    /// Buffered plus bytes in transport blocks not yet resolved.
    pub fn outstanding_bytes(&self) -> usize {
        self.buffered + self.in_flight
    }

    pub fn ready_bytes(&self, now: SimTime) -> usize {
        let retx_pending: usize = self.retx.iter().map(|(_, c)| c.bytes as usize).sum();
        let retx_ready: usize = self
            .retx
            .iter()
            .filter(|(t, _)| *t <= now)
            .map(|(_, c)| c.bytes as usize)
            .sum();
        self.buffered - retx_pending + retx_ready
    }

    /// Tail drop: the frame is handed back when the buffer cannot hold it.
    pub fn push(&mut self, frame: Frame) -> Result<(), Frame> {
        if self.buffered + frame.bytes as usize > self.capacity {
            self.stats.overflow += 1;
            return Err(frame);
        }
        self.buffered += frame.bytes as usize;
        self.sdus.insert(
            self.next_sn,
            Sdu {
                frame,
                sent: 0,
                received: 0,
                dropped: false,
            },
        );
        self.next_sn += 1;
        Ok(())
    }

    /// Fills a grant of `budget` bytes, ready retransmissions first.
    pub fn pull(&mut self, now: SimTime, budget: u32) -> Vec<RlcChunk> {
        let mut left = budget;
        let mut out = Vec::new();
        let mut i = 0;
        while left > 0 && i < self.retx.len() {
            let (ready, chunk) = self.retx[i];
            if ready > now {
                i += 1;
                continue;
            }
            if chunk.bytes <= left {
                self.retx.remove(i);
                out.push(chunk);
                left -= chunk.bytes;
            } else {
                self.retx[i].1.bytes -= left;
                out.push(RlcChunk { bytes: left, ..chunk });
                left = 0;
            }
        }
        while left > 0 && self.send_sn < self.next_sn {
            let Some(sdu) = self.sdus.get_mut(&self.send_sn) else {
                self.send_sn += 1;
                continue;
            };
            let rest = sdu.frame.bytes - sdu.sent;
            if sdu.dropped || rest == 0 {
                self.send_sn += 1;
                continue;
            }
            let take = rest.min(left);
            sdu.sent += take;
            left -= take;
            out.push(RlcChunk {
                sn: self.send_sn,
                bytes: take,
                attempt: 1,
            });
        }
        let taken = (budget - left) as usize;
        self.buffered -= taken;
        self.in_flight += taken;
        out
    }

    /// Applies the HARQ outcome of a transport block carrying `chunks`.
    pub fn on_result(&mut self, now: SimTime, chunks: &[RlcChunk], ok: bool, out: &mut Vec<LinkOutput>) {
        for c in chunks {
            self.in_flight -= c.bytes as usize;
            let Some(sdu) = self.sdus.get_mut(&c.sn) else { continue };
            if sdu.dropped {
                continue;
            }
            if ok {
                sdu.received += c.bytes;
            } else if c.attempt > self.max_retx {
                sdu.dropped = true;
                let unsent = (sdu.frame.bytes - sdu.sent) as usize;
                let frame = sdu.frame;
                let queued: usize = self
                    .retx
                    .iter()
                    .filter(|(_, r)| r.sn == c.sn)
                    .map(|(_, r)| r.bytes as usize)
                    .sum();
                self.retx.retain(|(_, r)| r.sn != c.sn);
                self.buffered -= unsent + queued;
                self.stats.dropped += 1;
                out.push(LinkOutput::Dropped {
                    frame,
                    at: now,
                    layer: DropLayer::Rlc,
                });
            } else {
                self.stats.retransmissions += 1;
                self.buffered += c.bytes as usize;
                self.retx.push_back((
                    now + self.retx_delay,
                    RlcChunk {
                        attempt: c.attempt + 1,
                        ..*c
                    },
                ));
            }
        }
        self.deliver_in_order(now, out);
    }

    fn deliver_in_order(&mut self, now: SimTime, out: &mut Vec<LinkOutput>) {
        while self.deliver_sn < self.next_sn {
            let Some(sdu) = self.sdus.get(&self.deliver_sn) else {
                self.deliver_sn += 1;
                continue;
            };
            if sdu.dropped {
                self.sdus.remove(&self.deliver_sn);
            } else if sdu.received == sdu.frame.bytes {
                let frame = sdu.frame;
                self.sdus.remove(&self.deliver_sn);
                self.stats.delivered += 1;
                out.push(LinkOutput::Delivered { frame, at: now });
            } else {
                break;
            }
            self.deliver_sn += 1;
        }
    }
}
