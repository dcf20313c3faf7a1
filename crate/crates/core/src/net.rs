//! Types shared by every access-network model (WiFi DCF, LTE, null channel).

use std::fmt;

use crate::radio::LinkState;
use crate::sim::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const UAV: NodeId = NodeId(0);
    /// WiFi access point or LTE eNodeB.
    pub const BASE_STATION: NodeId = NodeId(1);

    pub fn ground(index: usize) -> NodeId {
        NodeId(2 + index as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FrameId(pub u64);

/// A network-layer packet handed to an access network for one radio hop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Frame {
    pub id: FrameId,
    pub src: NodeId,
    pub dst: NodeId,
    /// Network-layer size (IP header included).
    pub bytes: u32,
    pub enqueued_at: SimTime,
}

/// Where a packet was lost.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DropLayer {
    /// Transport send buffer overflow at the UAV.
    Source,
    /// Tail drop in a MAC or RLC queue.
    Queue,
    /// WiFi retry limit exceeded.
    Mac,
    /// LTE RLC ARQ gave up.
    Rlc,
    /// Null-channel loss draw.
    Channel,
    /// Still undelivered when the run ended.
    InFlight,
}

impl DropLayer {
    pub const ALL: [DropLayer; 6] = [
        DropLayer::Source,
        DropLayer::Queue,
        DropLayer::Mac,
        DropLayer::Rlc,
        DropLayer::Channel,
        DropLayer::InFlight,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DropLayer::Source => "source",
            DropLayer::Queue => "queue",
            DropLayer::Mac => "mac",
            DropLayer::Rlc => "rlc",
            DropLayer::Channel => "channel",
            DropLayer::InFlight => "in_flight",
        }
    }

    pub fn parse(s: &str) -> Option<DropLayer> {
        DropLayer::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkOutput {
    Delivered { frame: Frame, at: SimTime },
    Dropped { frame: Frame, at: SimTime, layer: DropLayer },
}

/// Radio conditions seen by the access networks.
pub trait RadioEnv {
    /// Link quality for a transmission from `tx` to `rx` at `now`.
    fn link(&mut self, tx: NodeId, rx: NodeId, now: SimTime) -> LinkState;
}

/// Collects what an access-network model wants to happen next: timer events in
/// its own event type and frames leaving the hop.
pub struct LinkCtx<'a, E> {
    pub now: SimTime,
    pub radio: &'a mut dyn RadioEnv,
    timers: Vec<(SimTime, E)>,
    outputs: Vec<LinkOutput>,
}

impl<'a, E> LinkCtx<'a, E> {
    pub fn new(now: SimTime, radio: &'a mut dyn RadioEnv) -> Self {
        LinkCtx {
            now,
            radio,
            timers: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn at(&mut self, when: SimTime, ev: E) {
        debug_assert!(when >= self.now);
        self.timers.push((when, ev));
    }

    pub fn emit(&mut self, out: LinkOutput) {
        self.outputs.push(out);
    }

    pub fn into_parts(self) -> (Vec<(SimTime, E)>, Vec<LinkOutput>) {
        (self.timers, self.outputs)
    }
}
