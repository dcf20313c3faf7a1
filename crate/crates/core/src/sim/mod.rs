//! Deterministic discrete-event engine.

mod engine;
mod rng;
mod time;

pub use engine::{
    Engine, Event, EventHandle, Handler, RunStats, Scheduler, SimError, TargetId, TraceEntry,
};
pub use rng::RngStream;
pub use time::SimTime;
