//! UAV kinematics and ground-node placement.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Sub};

use thiserror::Error;

use crate::sim::{RngStream, SimTime};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn horizontal_norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

pub fn distance(a: Vec3, b: Vec3) -> f64 {
    (a - b).norm()
}

/// Kinematic snapshot s(t): position, velocity, battery fraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UavState {
    pub p: Vec3,
    pub v: Vec3,
    pub b: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum MobilityError {
    #[error("trajectory needs at least two waypoints")]
    TooFewWaypoints,
    #[error("waypoints {0} and {1} coincide")]
    RepeatedWaypoint(usize, usize),
    #[error("cruise speed must be positive, got {0}")]
    BadSpeed(f64),
    #[error("{what} must be non-negative, got {value}")]
    Negative { what: &'static str, value: f64 },
}

#[derive(Clone, Copy, Debug)]
struct Leg {
    from: Vec3,
    to: Vec3,
    start: f64,
    duration: f64,
}

#[derive(Clone, Debug)]
enum Path {
    Waypoints { legs: Vec<Leg>, dwell: f64, period: f64, looped: bool },
    Orbit { center: Vec3, radius: f64, speed: f64 },
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    path: Path,
    cruise_speed: f64,
    drain_per_s: f64,
}

impl Trajectory {
    /// Legs between consecutive waypoints at `cruise_speed`, with a `dwell_s`
    /// pause at every waypoint reached. A looped path returns to the first
    /// waypoint and repeats.
    pub fn waypoints(points: &[Vec3], cruise_speed: f64, dwell_s: f64, looped: bool) -> Result<Self, MobilityError> {
        if points.len() < 2 {
            return Err(MobilityError::TooFewWaypoints);
        }
        if !(cruise_speed > 0.0 && cruise_speed.is_finite()) {
            return Err(MobilityError::BadSpeed(cruise_speed));
        }
        if !(dwell_s >= 0.0) {
            return Err(MobilityError::Negative { what: "dwell", value: dwell_s });
        }
        let n = points.len();
        let pairs = if looped { n } else { n - 1 };
        let mut legs = Vec::with_capacity(pairs);
        let mut t = 0.0;
        for i in 0..pairs {
            let (from, to) = (points[i], points[(i + 1) % n]);
            let len = distance(from, to);
            if len == 0.0 {
                return Err(MobilityError::RepeatedWaypoint(i, (i + 1) % n));
            }
            let duration = len / cruise_speed;
            legs.push(Leg { from, to, start: t, duration });
            t += duration + dwell_s;
        }
        Ok(Trajectory {
            path: Path::Waypoints { legs, dwell: dwell_s, period: t, looped },
            cruise_speed,
            drain_per_s: 0.0,
        })
    }

    /// Closed rectangle centred on `center`, flown counter-clockwise from the
    /// south-west corner.
    pub fn rectangle(center: Vec3, width: f64, height: f64, cruise_speed: f64, dwell_s: f64) -> Result<Self, MobilityError> {
        let (hw, hh) = (width / 2.0, height / 2.0);
        let c = |dx: f64, dy: f64| Vec3::new(center.x + dx, center.y + dy, center.z);
        Self::waypoints(
            &[c(-hw, -hh), c(hw, -hh), c(hw, hh), c(-hw, hh)],
            cruise_speed,
            dwell_s,
            true,
        )
    }

    /// Circle of constant `radius` around `center` at `speed`; zero radius or
    /// zero speed hovers.
    pub fn orbit(center: Vec3, radius: f64, speed: f64) -> Result<Self, MobilityError> {
        if !(radius >= 0.0) {
            return Err(MobilityError::Negative { what: "orbit radius", value: radius });
        }
        if !(speed >= 0.0 && speed.is_finite()) {
            return Err(MobilityError::BadSpeed(speed));
        }
        Ok(Trajectory {
            path: Path::Orbit { center, radius, speed },
            cruise_speed: speed,
            drain_per_s: 0.0,
        })
    }

    pub fn with_drain(mut self, per_s: f64) -> Self {
        self.drain_per_s = per_s;
        self
    }

    pub fn cruise_speed(&self) -> f64 {
        self.cruise_speed
    }

    pub fn state_at(&self, t: SimTime) -> UavState {
        let s = t.as_secs_f64();
        let (p, v) = match &self.path {
            Path::Orbit { center, radius, speed } => {
                if *radius == 0.0 || *speed == 0.0 {
                    (*center + Vec3::new(*radius, 0.0, 0.0), Vec3::ZERO)
                } else {
                    let w = speed / radius;
                    let a = (w * s) % TAU;
                    let p = *center + Vec3::new(radius * a.cos(), radius * a.sin(), 0.0);
                    let v = Vec3::new(-speed * a.sin(), speed * a.cos(), 0.0);
                    (p, v)
                }
            }
            Path::Waypoints { legs, dwell, period, looped } => {
                let last = legs.last().expect("at least one leg");
                let s = if *looped {
                    s % period
                } else if s >= last.start + last.duration {
                    return UavState { p: last.to, v: Vec3::ZERO, b: self.battery(s) };
                } else {
                    s
                };
                let i = legs.partition_point(|l| l.start <= s) - 1;
                let leg = legs[i];
                let into = s - leg.start;
                if into < leg.duration {
                    let dir = (leg.to - leg.from) * (1.0 / leg.duration);
                    (leg.from + dir * into, dir)
                } else {
                    debug_assert!(into <= leg.duration + dwell + 1e-9);
                    (leg.to, Vec3::ZERO)
                }
            }
        };
        UavState { p, v, b: self.battery(s) }
    }

    fn battery(&self, s: f64) -> f64 {
        (1.0 - self.drain_per_s * s).clamp(0.0, 1.0)
    }
}

/// `n` static points i.i.d. uniform over a disc of `radius` around `center`,
/// all at `center.z`.
pub fn place_ground_nodes(n: usize, center: Vec3, radius: f64, rng: &mut RngStream) -> Vec<Vec3> {
    (0..n)
        .map(|_| {
            let r = radius * rng.uniform().sqrt();
            let theta = TAU * rng.uniform();
            Vec3::new(center.x + r * theta.cos(), center.y + r * theta.sin(), center.z)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn secs(s: f64) -> SimTime {
        SimTime::from_secs_f64(s)
    }

    #[test]
    fn distances() {
        let o = Vec3::ZERO;
        assert_eq!(distance(o, o), 0.0);
        assert_eq!(distance(o, Vec3::new(3.0, 4.0, 0.0)), 5.0);
        assert_eq!(distance(Vec3::new(0.0, 0.0, 10.0), Vec3::new(30.0, 40.0, 10.0)), 50.0);
    }

    #[test]
    fn start_and_midpoint_of_leg() {
        let a = Vec3::new(0.0, 0.0, 30.0);
        let b = Vec3::new(40.0, 0.0, 30.0);
        let tr = Trajectory::waypoints(&[a, b], 5.0, 2.0, false).unwrap();
        let s0 = tr.state_at(SimTime::ZERO);
        assert_eq!(s0.p, a);
        assert_eq!(s0.v, Vec3::new(5.0, 0.0, 0.0));
        let s4 = tr.state_at(secs(4.0));
        assert!((s4.p.x - 20.0).abs() < 1e-9);
        let end = tr.state_at(secs(100.0));
        assert_eq!(end.p, b);
        assert_eq!(end.v, Vec3::ZERO);
    }

    #[test]
    fn dwell_holds_position() {
        let tr = Trajectory::rectangle(Vec3::new(0.0, 0.0, 30.0), 80.0, 60.0, 5.0, 2.0).unwrap();
        // first leg 80 m at 5 m/s ends at 16 s, dwell to 18 s
        for t in [16.0, 16.5, 17.999] {
            let s = tr.state_at(secs(t));
            assert!((s.p.x - 40.0).abs() < 1e-9 && (s.p.y + 30.0).abs() < 1e-9);
            assert_eq!(s.v, Vec3::ZERO);
        }
        assert!(tr.state_at(secs(18.5)).v.norm() > 0.0);
    }

    #[test]
    fn rectangle_loops() {
        let tr = Trajectory::rectangle(Vec3::new(0.0, 0.0, 30.0), 80.0, 60.0, 5.0, 2.0).unwrap();
        let period = 2.0 * (80.0 + 60.0) / 5.0 + 4.0 * 2.0;
        let a = tr.state_at(secs(3.3));
        let b = tr.state_at(secs(3.3 + period));
        assert!(distance(a.p, b.p) < 1e-6);
    }

    #[test]
    fn rejects_bad_trajectories() {
        let a = Vec3::ZERO;
        assert_eq!(Trajectory::waypoints(&[a], 1.0, 0.0, false).unwrap_err(), MobilityError::TooFewWaypoints);
        assert!(matches!(Trajectory::waypoints(&[a, a], 1.0, 0.0, false), Err(MobilityError::RepeatedWaypoint(0, 1))));
        assert!(matches!(
            Trajectory::waypoints(&[a, Vec3::new(1.0, 0.0, 0.0)], 0.0, 0.0, false),
            Err(MobilityError::BadSpeed(_))
        ));
    }

    #[test]
    fn orbit_keeps_radius_and_speed() {
        let c = Vec3::new(0.0, 0.0, 30.0);
        let tr = Trajectory::orbit(c, 20.0, 10.0).unwrap();
        for i in 0..100 {
            let s = tr.state_at(secs(i as f64 * 0.37));
            assert!(((s.p - c).horizontal_norm() - 20.0).abs() < 1e-9);
            assert!((s.v.norm() - 10.0).abs() < 1e-9);
        }
    }

    #[test]
    fn battery_drains_linearly() {
        let tr = Trajectory::orbit(Vec3::ZERO, 10.0, 1.0).unwrap().with_drain(0.001);
        assert_eq!(tr.state_at(SimTime::ZERO).b, 1.0);
        assert!((tr.state_at(secs(100.0)).b - 0.9).abs() < 1e-12);
        assert_eq!(tr.state_at(secs(5000.0)).b, 0.0);
    }

    #[test]
    fn empty_layout() {
        let mut rng = RngStream::new(1, "ground");
        assert!(place_ground_nodes(0, Vec3::ZERO, 10.0, &mut rng).is_empty());
    }

    #[test]
    fn disc_area_law() {
        let mut rng = RngStream::new(5, "ground");
        let pts = place_ground_nodes(100_000, Vec3::ZERO, 10.0, &mut rng);
        assert!(pts.iter().all(|p| p.horizontal_norm() <= 10.0));
        let inner = pts.iter().filter(|p| p.horizontal_norm() < 10.0 / 2f64.sqrt()).count();
        let f = inner as f64 / pts.len() as f64;
        assert!((f - 0.5).abs() <= 0.01, "{f}");
    }
}
