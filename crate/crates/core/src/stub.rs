//! Idealized channel: fixed delay with optional uniform jitter, independent
//! loss, unlimited capacity.

use crate::sim::{RngStream, SimTime};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StubParams {
    pub delay: SimTime,
    pub loss_prob: f64,
    /// Half-width of the uniform jitter around `delay`.
    pub jitter: SimTime,
}

impl Default for StubParams {
    fn default() -> Self {
        StubParams {
            delay: SimTime::ZERO,
            loss_prob: 0.0,
            jitter: SimTime::ZERO,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StubChannel {
    params: StubParams,
    rng: RngStream,
}

impl StubChannel {
    pub fn new(params: StubParams, seed: u64) -> Self {
        StubChannel {
            params,
            rng: RngStream::new(seed, "stub.channel"),
        }
    }

    pub fn params(&self) -> &StubParams {
        &self.params
    }

    /// Arrival time of a packet handed over at `now`, or `None` if lost.
    pub fn transfer(&mut self, now: SimTime) -> Option<SimTime> {
        if self.params.loss_prob > 0.0 && self.rng.chance(self.params.loss_prob) {
            return None;
        }
        let base = (now + self.params.delay).as_micros() as f64;
        let j = self.params.jitter.as_micros() as f64;
        let at = if j > 0.0 {
            base + j * (2.0 * self.rng.uniform() - 1.0)
        } else {
            base
        };
        Some(SimTime::from_micros(at.round().max(now.as_micros() as f64) as u64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_is_instant() {
        let mut c = StubChannel::new(StubParams::default(), 1);
        let t = SimTime::from_millis(5);
        assert_eq!(c.transfer(t), Some(t));
    }

    #[test]
    fn fixed_delay() {
        let p = StubParams {
            delay: SimTime::from_millis(50),
            ..StubParams::default()
        };
        let mut c = StubChannel::new(p, 1);
        assert_eq!(c.transfer(SimTime::from_millis(5)), Some(SimTime::from_millis(55)));
    }

    #[test]
    fn total_loss() {
        let p = StubParams {
            loss_prob: 1.0,
            ..StubParams::default()
        };
        let mut c = StubChannel::new(p, 1);
        assert!((0..100).all(|_| c.transfer(SimTime::ZERO).is_none()));
    }

    #[test]
    fn jitter_stays_in_window() {
        let p = StubParams {
            delay: SimTime::from_millis(20),
            jitter: SimTime::from_millis(5),
            loss_prob: 0.0,
        };
        let mut c = StubChannel::new(p, 3);
        for _ in 0..1000 {
            let d = c.transfer(SimTime::from_secs(1)).unwrap() - SimTime::from_secs(1);
            assert!(d >= SimTime::from_millis(15) && d <= SimTime::from_millis(25));
        }
    }
}
