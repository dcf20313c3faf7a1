//! Traffic sources (telemetry, task offload, exogenous) and the remote
//! state estimator at the ground control station.

use crate::mobility::{UavState, Vec3};
use crate::sim::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BurstKind {
    Telemetry,
    Task,
    Exogenous,
}

impl BurstKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BurstKind::Telemetry => "telemetry",
            BurstKind::Task => "task",
            BurstKind::Exogenous => "exogenous",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "telemetry" => Some(BurstKind::Telemetry),
            "task" => Some(BurstKind::Task),
            "exogenous" => Some(BurstKind::Exogenous),
            _ => None,
        }
    }
}

/// One application emission (τ_i, B_i).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Burst {
    pub id: u64,
    pub kind: BurstKind,
    pub tau: SimTime,
    pub size_bytes: u64,
    pub n_packets: u32,
    pub payload: Option<UavState>,
}

/// Periodic snapshots at τ_i = i / freq, i = 1, 2, ...
#[derive(Clone, Debug)]
pub struct TelemetrySource {
    pub freq_hz: f64,
    pub payload_bytes: u32,
}

impl TelemetrySource {
    pub fn tau(&self, i: u64) -> SimTime {
        SimTime::from_secs_f64(i as f64 / self.freq_hz)
    }

    /// Number of emissions in (0, horizon].
    pub fn count(&self, horizon: SimTime) -> u64 {
        let mut n = (horizon.as_secs_f64() * self.freq_hz).floor() as u64;
        while n > 0 && self.tau(n) > horizon {
            n -= 1;
        }
        while self.tau(n + 1) <= horizon {
            n += 1;
        }
        n
    }
}

/// A task of `size_bytes` every `period`, first at one period.
#[derive(Clone, Debug)]
pub struct TaskSource {
    pub size_bytes: u64,
    pub period: SimTime,
}

impl TaskSource {
    pub fn tau(&self, i: u64) -> SimTime {
        SimTime::from_micros(self.period.as_micros() * i)
    }
}

/// Constant-rate stream of fixed-size packets from one ground node.
#[derive(Clone, Debug)]
pub struct ExogenousSource {
    pub rate_bps: f64,
    pub packet_bytes: u32,
    /// Fraction of one interval by which this node's stream is shifted.
    pub phase: f64,
}

impl ExogenousSource {
    pub fn interval_us(&self) -> f64 {
        self.packet_bytes as f64 * 8.0 / self.rate_bps * 1e6
    }

    pub fn emit_time(&self, k: u64) -> SimTime {
        SimTime::from_secs_f64((self.phase + k as f64) * self.interval_us() * 1e-6)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorMode {
    ZeroOrderHold,
    ConstantVelocity,
}

impl EstimatorMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorMode::ZeroOrderHold => "zoh",
            EstimatorMode::ConstantVelocity => "cv",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "zoh" => Some(EstimatorMode::ZeroOrderHold),
            "cv" => Some(EstimatorMode::ConstantVelocity),
            _ => None,
        }
    }
}

/// Estimate s̃(t) kept by the ground control station.
#[derive(Clone, Debug)]
pub struct Estimator {
    pub mode: EstimatorMode,
    latest: Option<(SimTime, UavState)>,
    last_rx: SimTime,
}

impl Estimator {
    pub fn new(mode: EstimatorMode) -> Self {
        Estimator {
            mode,
            latest: None,
            last_rx: SimTime::ZERO,
        }
    }

    /// Accepts a snapshot taken at `tau`; older snapshots than the current
    /// one are discarded. Returns whether it was applied.
    pub fn ingest(&mut self, tau: SimTime, state: UavState, rx_time: SimTime) -> bool {
        if self.latest.is_some_and(|(t, _)| tau <= t) {
            return false;
        }
        self.latest = Some((tau, state));
        self.last_rx = self.last_rx.max(rx_time);
        true
    }

    pub fn snapshot_time(&self) -> Option<SimTime> {
        self.latest.map(|(t, _)| t)
    }

    pub fn last_rx(&self) -> SimTime {
        self.last_rx
    }

    pub fn estimate(&self, t: SimTime) -> Option<Vec3> {
        let (tau, s) = self.latest?;
        Some(match self.mode {
            EstimatorMode::ZeroOrderHold => s.p,
            EstimatorMode::ConstantVelocity => {
                let dt = t.as_secs_f64() - tau.as_secs_f64();
                s.p + s.v * dt
            }
        })
    }
}

pub fn position_error(truth: Vec3, estimate: Vec3, three_d: bool) -> f64 {
    let d = truth - estimate;
    if three_d {
        d.norm()
    } else {
        d.horizontal_norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(x: f64, vx: f64) -> UavState {
        UavState {
            p: Vec3::new(x, 0.0, 30.0),
            v: Vec3::new(vx, 0.0, 0.0),
            b: 1.0,
        }
    }

    #[test]
    fn telemetry_schedule() {
        let s = TelemetrySource { freq_hz: 10.0, payload_bytes: 128 };
        assert_eq!(s.tau(1), SimTime::from_millis(100));
        assert_eq!(s.tau(2), SimTime::from_millis(200));
        assert_eq!(s.count(SimTime::from_secs(60)), 600);
        assert_eq!(s.count(SimTime::from_micros(99_999)), 0);
        let s3 = TelemetrySource { freq_hz: 3.0, payload_bytes: 128 };
        assert_eq!(s3.count(SimTime::from_secs(10)), 30);
    }

    #[test]
    fn exogenous_intervals() {
        let s = |r: f64| ExogenousSource { rate_bps: r, packet_bytes: 800, phase: 0.0 };
        assert!((s(6e6).interval_us() - 1066.6667).abs() < 1e-3);
        assert!((s(1e6).interval_us() - 6400.0).abs() < 1e-9);
    }

    #[test]
    fn task_schedule() {
        let t = TaskSource { size_bytes: 50_000, period: SimTime::from_secs(1) };
        assert_eq!(t.tau(3), SimTime::from_secs(3));
    }

    #[test]
    fn zoh_error_is_distance_travelled_since_snapshot() {
        let mut e = Estimator::new(EstimatorMode::ZeroOrderHold);
        assert_eq!(e.estimate(SimTime::ZERO), None);
        e.ingest(SimTime::from_millis(100), state(0.5, 5.0), SimTime::from_millis(100));
        let t = SimTime::from_millis(160);
        let truth = Vec3::new(5.0 * 0.16, 0.0, 30.0);
        let err = position_error(truth, e.estimate(t).unwrap(), true);
        assert!((err - 5.0 * 0.06).abs() < 1e-12);
    }

    #[test]
    fn cv_is_exact_for_constant_velocity() {
        let mut e = Estimator::new(EstimatorMode::ConstantVelocity);
        e.ingest(SimTime::from_millis(100), state(0.5, 5.0), SimTime::from_millis(130));
        for ms in [100u64, 130, 250, 1000] {
            let t = SimTime::from_millis(ms);
            let truth = Vec3::new(5.0 * t.as_secs_f64(), 0.0, 30.0);
            assert!(position_error(truth, e.estimate(t).unwrap(), true) < 1e-12);
        }
    }

    #[test]
    fn older_snapshots_discarded() {
        let mut e = Estimator::new(EstimatorMode::ZeroOrderHold);
        assert!(e.ingest(SimTime::from_millis(200), state(2.0, 0.0), SimTime::from_millis(210)));
        assert!(!e.ingest(SimTime::from_millis(100), state(1.0, 0.0), SimTime::from_millis(220)));
        assert_eq!(e.estimate(SimTime::from_secs(1)).unwrap().x, 2.0);
    }

    #[test]
    fn planar_error_ignores_altitude() {
        let a = Vec3::new(0.0, 0.0, 0.0);
        let b = Vec3::new(3.0, 4.0, 12.0);
        assert_eq!(position_error(a, b, false), 5.0);
        assert_eq!(position_error(a, b, true), 13.0);
    }
}
