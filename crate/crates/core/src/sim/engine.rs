use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashSet};

use thiserror::Error;

use super::rng::RngStream;
use super::time::SimTime;

/// Identifies the node or module an event is addressed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TargetId(pub u16);

#[derive(Clone, Debug, PartialEq)]
pub struct Event<P> {
    pub fire_at: SimTime,
    pub sequence: u64,
    pub target: TargetId,
    pub payload: P,
}

/// Returned by [`Scheduler::schedule`]; cancels the event if it has not fired yet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("past event: scheduled at {at} while clock is {now}")]
    PastEvent { now: SimTime, at: SimTime },
    #[error("no handler for event target {0:?}")]
    UnhandledTarget(TargetId),
    #[error("model error at {at}: {msg}")]
    Model { at: SimTime, msg: String },
}

struct Queued<P>(Event<P>);

impl<P> PartialEq for Queued<P> {
    fn eq(&self, other: &Self) -> bool {
        self.0.fire_at == other.0.fire_at && self.0.sequence == other.0.sequence
    }
}

impl<P> Eq for Queued<P> {}

impl<P> PartialOrd for Queued<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<P> Ord for Queued<P> {
    // reversed: BinaryHeap is a max-heap and we want the earliest (time, sequence)
    fn cmp(&self, other: &Self) -> Ordering {
        (other.0.fire_at, other.0.sequence).cmp(&(self.0.fire_at, self.0.sequence))
    }
}

/// Clock plus pending-event queue. Handlers receive it mutably to schedule follow-ups.
pub struct Scheduler<P> {
    now: SimTime,
    next_sequence: u64,
    queue: BinaryHeap<Queued<P>>,
    cancelled: HashSet<u64>,
}

impl<P> Default for Scheduler<P> {
    fn default() -> Self {
        Scheduler {
            now: SimTime::ZERO,
            next_sequence: 0,
            queue: BinaryHeap::new(),
            cancelled: HashSet::new(),
        }
    }
}

impl<P> Scheduler<P> {
    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn schedule(
        &mut self,
        at: SimTime,
        target: TargetId,
        payload: P,
    ) -> Result<EventHandle, SimError> {
        if at < self.now {
            return Err(SimError::PastEvent { now: self.now, at });
        }
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        self.queue.push(Queued(Event {
            fire_at: at,
            sequence,
            target,
            payload,
        }));
        Ok(EventHandle(sequence))
    }

    pub fn schedule_in(
        &mut self,
        delay: SimTime,
        target: TargetId,
        payload: P,
    ) -> Result<EventHandle, SimError> {
        self.schedule(self.now + delay, target, payload)
    }

    pub fn cancel(&mut self, handle: EventHandle) {
        self.cancelled.insert(handle.0);
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    fn pop_until(&mut self, end: SimTime) -> Option<Event<P>> {
        loop {
            let head = self.queue.peek()?;
            if head.0.fire_at > end {
                return None;
            }
            let Queued(ev) = self.queue.pop().expect("peeked");
            if self.cancelled.remove(&ev.sequence) {
                continue;
            }
            return Some(ev);
        }
    }
}

pub trait Handler<P> {
    fn handle(&mut self, sched: &mut Scheduler<P>, event: Event<P>) -> Result<(), SimError>;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub dispatched: u64,
    pub end: SimTime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub fire_at: SimTime,
    pub sequence: u64,
    pub target: TargetId,
}

/// Single-threaded discrete-event engine: scheduler, root seed, named RNG streams.
pub struct Engine<P> {
    sched: Scheduler<P>,
    seed: u64,
    streams: BTreeMap<String, RngStream>,
    trace: Option<Vec<TraceEntry>>,
}

impl<P> Engine<P> {
    pub fn new(seed: u64) -> Self {
        Engine {
            sched: Scheduler::default(),
            seed,
            streams: BTreeMap::new(),
            trace: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn now(&self) -> SimTime {
        self.sched.now
    }

    pub fn scheduler(&mut self) -> &mut Scheduler<P> {
        &mut self.sched
    }

    pub fn schedule(
        &mut self,
        at: SimTime,
        target: TargetId,
        payload: P,
    ) -> Result<EventHandle, SimError> {
        self.sched.schedule(at, target, payload)
    }

    /// Returns the substream for `label`, creating it on first use.
    pub fn rng_stream(&mut self, label: &str) -> &mut RngStream {
        let seed = self.seed;
        self.streams
            .entry(label.to_owned())
            .or_insert_with(|| RngStream::new(seed, label))
    }

    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> &[TraceEntry] {
        self.trace.as_deref().unwrap_or(&[])
    }

    /// Dispatches every event with `fire_at <= end` in (time, sequence) order,
    /// then leaves the clock at `end`.
    pub fn run_until<H: Handler<P>>(
        &mut self,
        end: SimTime,
        handler: &mut H,
    ) -> Result<RunStats, SimError> {
        if end < self.sched.now {
            return Err(SimError::PastEvent {
                now: self.sched.now,
                at: end,
            });
        }
        let mut dispatched = 0;
        while let Some(ev) = self.sched.pop_until(end) {
            debug_assert!(ev.fire_at >= self.sched.now);
            self.sched.now = ev.fire_at;
            if let Some(trace) = self.trace.as_mut() {
                trace.push(TraceEntry {
                    fire_at: ev.fire_at,
                    sequence: ev.sequence,
                    target: ev.target,
                });
            }
            handler.handle(&mut self.sched, ev)?;
            dispatched += 1;
        }
        self.sched.now = end;
        Ok(RunStats { dispatched, end })
    }
}
