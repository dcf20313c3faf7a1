use proptest::prelude::*;

use uavsim::mobility::{distance, place_ground_nodes, Trajectory, Vec3};
use uavsim::sim::{RngStream, SimTime};

fn trajectories() -> impl Strategy<Value = Trajectory> {
    prop_oneof![
        (10.0f64..120.0, 10.0f64..120.0, 0.5f64..25.0, 0.0f64..5.0).prop_map(|(w, h, v, d)| {
            Trajectory::rectangle(Vec3::new(0.0, 0.0, 30.0), w, h, v, d).unwrap()
        }),
        (1.0f64..60.0, 0.5f64..25.0).prop_map(|(r, v)| Trajectory::orbit(Vec3::new(0.0, 0.0, 30.0), r, v).unwrap()),
    ]
}

proptest! {
    #[test]
    fn motion_is_continuous_and_speed_bounded(
        tr in trajectories(),
        t0 in 0u64..600_000_000,
        dt in 1u64..2_000_000,
    ) {
        let a = tr.state_at(SimTime::from_micros(t0));
        let b = tr.state_at(SimTime::from_micros(t0 + dt));
        let bound = tr.cruise_speed() * dt as f64 * 1e-6 + 1e-9;
        prop_assert!(distance(a.p, b.p) <= bound, "{} > {}", distance(a.p, b.p), bound);
        prop_assert!(a.v.norm() <= tr.cruise_speed() + 1e-9);
        prop_assert!(b.b <= a.b);
    }

    #[test]
    fn rectangle_stays_in_distance_band(
        w in 10.0f64..120.0,
        h in 10.0f64..120.0,
        t in 0u64..600_000_000,
    ) {
        let tr = Trajectory::rectangle(Vec3::new(0.0, 0.0, 30.0), w, h, 5.0, 2.0).unwrap();
        let d = tr.state_at(SimTime::from_micros(t)).p.horizontal_norm();
        prop_assert!(d >= w.min(h) / 2.0 - 1e-9);
        prop_assert!(d <= (w / 2.0).hypot(h / 2.0) + 1e-9);
    }

    #[test]
    fn ground_nodes_inside_disc(n in 0usize..200, r in 0.1f64..100.0, seed in 0u64..1000) {
        let mut rng = RngStream::new(seed, "ground.layout");
        let c = Vec3::new(3.0, -2.0, 1.5);
        let pts = place_ground_nodes(n, c, r, &mut rng);
        prop_assert_eq!(pts.len(), n);
        for p in pts {
            prop_assert!(distance(p, c) <= r + 1e-9);
            prop_assert_eq!(p.z, 1.5);
        }
    }
}
