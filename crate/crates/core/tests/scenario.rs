use proptest::prelude::*;

use uavsim::config::{ScenarioConfig, Technology, TrajectoryKind};
use uavsim::metrics::{write_packets, write_run, ERROR_HEADER};
use uavsim::net::DropLayer;
use uavsim::sim::SimTime;
use uavsim::transport::TransportMode;
use uavsim::world::{run, uplink_state};

fn stub(delay_ms: f64, loss: f64) -> ScenarioConfig {
    ScenarioConfig {
        technology: Technology::Stub,
        uav_trajectory: TrajectoryKind::Orbit,
        uav_orbit_radius_m: 20.0,
        uav_speed_mps: 5.0,
        stub_delay_ms: delay_ms,
        stub_loss: loss,
        ..ScenarioConfig::default()
    }
}

#[test]
fn ideal_channel_error_is_half_the_update_distance() {
    let o = run(&stub(0.0, 0.0), "ideal").unwrap();
    let e = o.summary.error_m.unwrap();
    // v / (2 f) = 5 / 20
    assert!((e.mean - 0.25).abs() < 0.0125, "{}", e.mean);
    assert!(o.errors.iter().all(|s| s.err <= 0.5 + 1e-6));
}

#[test]
fn fixed_delay_shows_up_exactly_in_every_delta() {
    let o = run(&stub(50.0, 0.0), "delay").unwrap();
    let complete: Vec<_> = o.records.iter().filter(|r| r.complete()).collect();
    assert!(complete.len() >= 598);
    assert!(complete.iter().all(|r| r.delta == Some(SimTime::from_millis(50))));
}

#[test]
fn total_loss_delivers_nothing() {
    let mut c = stub(0.0, 1.0);
    c.transport_mode = TransportMode::Datagram;
    let o = run(&c, "loss").unwrap();
    assert!(o.records.iter().all(|r| r.omega.iter().all(|w| !w)));
    assert!(o.errors.is_empty(), "no estimate before the first delivery");
    assert_eq!(o.summary.drops.get(&DropLayer::Channel).copied(), Some(o.summary.emitted));
}

#[test]
fn one_skipped_update_peaks_near_one_metre() {
    let mut c = stub(0.0, 0.03);
    c.transport_mode = TransportMode::Datagram;
    let o = run(&c, "skip").unwrap();
    let ok: Vec<bool> = o.records.iter().map(|r| r.omega[0]).collect();
    let mut checked = 0;
    for i in 1..ok.len() - 1 {
        if !ok[i] && ok[i - 1] && ok[i + 1] {
            let (lo, hi) = (o.records[i].tau, o.records[i + 1].tau);
            let peak = o
                .errors
                .iter()
                .filter(|s| s.t > lo && s.t < hi)
                .map(|s| s.err)
                .fold(0.0, f64::max);
            // last grid point before the next update sits 5 ms short of 200 ms
            assert!((0.95..=1.0).contains(&peak), "peak {peak} after lost update {i}");
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn csv_matches_in_memory_summary() {
    let c = ScenarioConfig {
        ground_n_nodes: 4,
        horizon_s: 20.0,
        task_size_kb: 30.0,
        ..ScenarioConfig::default()
    };
    let o = run(&c, "csv").unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run(dir.path(), &o.summary, &o.records, &o.errors).unwrap();

    let mut r = csv::Reader::from_path(dir.path().join("error.csv")).unwrap();
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ERROR_HEADER);
    let errs: Vec<f64> = r.records().map(|x| x.unwrap()[8].parse().unwrap()).collect();
    let mean = errs.iter().sum::<f64>() / errs.len() as f64;
    assert!((mean - o.summary.error_m.unwrap().mean).abs() < 1e-9);

    let mut r = csv::Reader::from_path(dir.path().join("bursts.csv")).unwrap();
    let delays: Vec<f64> = r
        .records()
        .map(|x| x.unwrap())
        .filter(|x| &x[2] == "task" && !x[6].is_empty())
        .map(|x| x[6].parse::<f64>().unwrap() / 1000.0)
        .collect();
    let mean = delays.iter().sum::<f64>() / delays.len() as f64;
    assert!((mean - o.summary.delay_ms.unwrap().mean).abs() < 1e-9);

    let cfg = ScenarioConfig::load(&dir.path().join("scenario.cfg")).unwrap();
    assert_eq!(cfg, c);
}

#[test]
fn wifi_disconnects_where_lte_still_reaches() {
    let mut c = ScenarioConfig {
        uav_trajectory: TrajectoryKind::Orbit,
        uav_orbit_radius_m: 60.0,
        shadowing_sigma_db: 0.0,
        ..ScenarioConfig::default()
    };
    assert!(!uplink_state(&c, SimTime::ZERO).unwrap().connected);
    c.technology = Technology::Lte;
    assert!(uplink_state(&c, SimTime::ZERO).unwrap().connected);
    c.uav_orbit_radius_m = 10.0;
    c.technology = Technology::Wifi;
    assert_eq!(uplink_state(&c, SimTime::ZERO).unwrap().selected_mcs, 7);
}

#[test]
fn task_burst_packet_count() {
    let mut c = stub(0.0, 0.0);
    c.task_size_kb = 150.0;
    c.telemetry_enabled = false;
    c.horizon_s = 3.0;
    let o = run(&c, "task").unwrap();
    assert_eq!(o.records.len(), 3);
    assert!(o.records.iter().all(|r| r.n_packets() == 103 && r.size_bytes == 150_000));
}

fn scenario() -> impl Strategy<Value = ScenarioConfig> {
    (
        prop_oneof![Just(Technology::Wifi), Just(Technology::Lte), Just(Technology::Stub)],
        0usize..6,
        5.0f64..50.0,
        prop_oneof![Just(TransportMode::Reliable), Just(TransportMode::Datagram)],
        prop_oneof![Just(0.0), 10.0f64..80.0],
        any::<u64>(),
    )
        .prop_map(|(tech, nodes, radius, mode, task, seed)| ScenarioConfig {
            technology: tech,
            horizon_s: 5.0,
            seed,
            ground_n_nodes: nodes,
            exogenous_rate_mbps: 4.0,
            uav_trajectory: TrajectoryKind::Orbit,
            uav_orbit_radius_m: radius,
            transport_mode: mode,
            task_size_kb: task,
            trace_exogenous: true,
            stub_delay_ms: 10.0,
            stub_jitter_ms: 5.0,
            stub_loss: 0.1,
            ..ScenarioConfig::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_packet_is_accounted_for_and_runs_repeat(c in scenario()) {
        let a = run(&c, "p").unwrap();
        prop_assert!(a.summary.conserved(), "{:?}", a.summary);
        for r in &a.records {
            prop_assert!(r.check().is_ok(), "{:?}", r.check());
        }
        let b = run(&c, "p").unwrap();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_packets(&mut x, "p", &a.records).unwrap();
        write_packets(&mut y, "p", &b.records).unwrap();
        prop_assert_eq!(x, y);
    }
}
