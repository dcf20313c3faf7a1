use std::collections::BTreeMap;

use uavsim::net::{DropLayer, Frame, FrameId, LinkCtx, LinkOutput, NodeId, RadioEnv};
use uavsim::radio::LinkState;
use uavsim::sim::{Engine, Event, Handler, RngStream, Scheduler, SimError, SimTime, TargetId};
use uavsim::wifi::{tx_duration, DcfConfig, WifiEvent, WifiMac, DIFS_US, MAC_OVERHEAD_BYTES, SIFS_US, SLOT_US};

const MAC: TargetId = TargetId(0);
const AP: NodeId = NodeId(100);

struct FixedRadio(LinkState);

impl RadioEnv for FixedRadio {
    fn link(&mut self, _: NodeId, _: NodeId, _: SimTime) -> LinkState {
        self.0
    }
}

/// Drives a WifiMac from the engine; optionally keeps some stations saturated.
struct Bench {
    mac: WifiMac,
    radio: FixedRadio,
    outputs: Vec<LinkOutput>,
    saturate: Vec<NodeId>,
    frame_bytes: u32,
    next_id: u64,
}

impl Bench {
    fn new(cfg: DcfConfig, stations: &[NodeId], seed: u64, link: LinkState) -> Self {
        let mut nodes = stations.to_vec();
        nodes.push(AP);
        let mut mac = WifiMac::new(cfg, &nodes, seed);
        mac.record_transmissions();
        Bench {
            mac,
            radio: FixedRadio(link),
            outputs: Vec::new(),
            saturate: Vec::new(),
            frame_bytes: 1500,
            next_id: 0,
        }
    }

    fn push(&mut self, sched: &mut Scheduler<WifiEvent>, src: NodeId, bytes: u32) {
        let now = sched.now();
        let frame = Frame {
            id: FrameId(self.next_id),
            src,
            dst: AP,
            bytes,
            enqueued_at: now,
        };
        self.next_id += 1;
        let mut ctx = LinkCtx::new(now, &mut self.radio);
        self.mac.enqueue(&mut ctx, frame).unwrap();
        flush(sched, &mut self.outputs, ctx);
    }


    fn top_up(&mut self, sched: &mut Scheduler<WifiEvent>) {
        for node in self.saturate.clone() {
            while self.mac.queue_len(node) < 2 {
                self.push(sched, node, self.frame_bytes);
            }
        }
    }

    fn delivered(&self) -> Vec<Frame> {
        self.outputs
            .iter()
            .filter_map(|o| match o {
                LinkOutput::Delivered { frame, .. } => Some(*frame),
                _ => None,
            })
            .collect()
    }
}

fn flush(sched: &mut Scheduler<WifiEvent>, outputs: &mut Vec<LinkOutput>, ctx: LinkCtx<'_, WifiEvent>) {
    let (timers, outs) = ctx.into_parts();
    for (at, ev) in timers {
        sched.schedule(at, MAC, ev).unwrap();
    }
    outputs.extend(outs);
}

impl Handler<WifiEvent> for Bench {
    fn handle(&mut self, sched: &mut Scheduler<WifiEvent>, ev: Event<WifiEvent>) -> Result<(), SimError> {
        let mut ctx = LinkCtx::new(sched.now(), &mut self.radio);
        self.mac.handle(&mut ctx, ev.payload);
        flush(sched, &mut self.outputs, ctx);
        self.top_up(sched);
        Ok(())
    }
}

fn run_saturated(n: usize, seed: u64, horizon: SimTime, link: LinkState, frame_bytes: u32) -> Bench {
    let nodes: Vec<NodeId> = (0..n as u32).map(NodeId).collect();
    let mut bench = Bench::new(DcfConfig::default(), &nodes, seed, link);
    bench.saturate = nodes;
    bench.frame_bytes = frame_bytes;
    let mut eng = Engine::new(seed);
    bench.top_up(eng.scheduler());
    eng.run_until(horizon, &mut bench).unwrap();
    bench
}

#[test]
fn lone_station_first_bit_after_difs_plus_backoff() {
    for seed in 0..20 {
        let mut bench = Bench::new(DcfConfig::default(), &[NodeId(0)], seed, LinkState::ideal(7));
        let mut eng = Engine::new(seed);
        bench.push(eng.scheduler(), NodeId(0), 1500);
        eng.run_until(SimTime::from_millis(10), &mut bench).unwrap();
        let b = RngStream::new(seed, "wifi.backoff.0").below_inclusive(15) as u64;
        let tx = &bench.mac.transmissions()[0];
        assert_eq!(tx.start.as_micros(), DIFS_US + b * SLOT_US);
        assert_eq!(tx.end - tx.start, tx_duration(1500 + MAC_OVERHEAD_BYTES, 7).unwrap());
        assert!(!tx.collided);
        assert_eq!(bench.delivered().len(), 1);
        assert_eq!(bench.outputs.len(), 1);
    }
}

#[test]
fn identical_backoff_collides_and_doubles_window() {
    // find a seed where both stations draw the same first backoff
    let seed = (0..10_000u64)
        .find(|&s| {
            RngStream::new(s, "wifi.backoff.0").below_inclusive(15)
                == RngStream::new(s, "wifi.backoff.1").below_inclusive(15)
        })
        .expect("some seed collides");
    let mut bench = Bench::new(DcfConfig::default(), &[NodeId(0), NodeId(1)], seed, LinkState::ideal(7));
    let mut eng = Engine::new(seed);
    bench.push(eng.scheduler(), NodeId(0), 1500);
    bench.push(eng.scheduler(), NodeId(1), 1500);
    // stop right after the first exchange closes
    let first_end = {
        let mut probe = Engine::new(seed);
        let mut b2 = Bench::new(DcfConfig::default(), &[NodeId(0), NodeId(1)], seed, LinkState::ideal(7));
        b2.push(probe.scheduler(), NodeId(0), 1500);
        b2.push(probe.scheduler(), NodeId(1), 1500);
        probe.run_until(SimTime::from_micros(5_000), &mut b2).unwrap();
        b2.mac.transmissions()[0].end
    };
    let ack = DcfConfig::default().ack_duration();
    eng.run_until(first_end + SimTime::from_micros(SIFS_US) + ack, &mut bench).unwrap();
    let tx = &bench.mac.transmissions()[0];
    assert!(tx.collided);
    assert_eq!(tx.stations.len(), 2);
    for n in [NodeId(0), NodeId(1)] {
        let st = bench.mac.station(n).unwrap();
        assert_eq!(st.contention_window, 31);
        assert_eq!(st.retry_count, 1);
    }
}

#[test]
fn retry_limit_drops_after_eight_attempts() {
    let dead = LinkState {
        sinr_db: -10.0,
        selected_mcs: 0,
        per: 1.0,
        connected: false,
    };
    let mut bench = Bench::new(DcfConfig::default(), &[NodeId(0)], 3, dead);
    let mut eng = Engine::new(3);
    bench.push(eng.scheduler(), NodeId(0), 500);
    eng.run_until(SimTime::from_secs(1), &mut bench).unwrap();
    assert_eq!(bench.mac.transmissions().len(), 8);
    assert!(bench.mac.transmissions().iter().all(|t| t.phy_error));
    match bench.outputs.as_slice() {
        [LinkOutput::Dropped { layer, .. }] => assert_eq!(*layer, DropLayer::Mac),
        other => panic!("unexpected outputs {other:?}"),
    }
    let st = bench.mac.station(NodeId(0)).unwrap();
    assert_eq!(st.contention_window, 15);
}

#[test]
fn saturated_throughput_matches_closed_form_cycle() {
    // E[cycle] = DIFS + (CWmin/2)·slot + data + SIFS + ACK
    let data = tx_duration(1500 + MAC_OVERHEAD_BYTES, 7).unwrap().as_micros() as f64;
    let ack = DcfConfig::default().ack_duration().as_micros() as f64;
    let cycle = DIFS_US as f64 + 7.5 * SLOT_US as f64 + data + SIFS_US as f64 + ack;
    let expected_mbps = 1500.0 * 8.0 / cycle;
    let bench = run_saturated(1, 1, SimTime::from_secs(10), LinkState::ideal(7), 1500);
    let got = bench.mac.stats().delivered_bytes as f64 * 8.0 / 10.0 / 1e6;
    assert!(((got - expected_mbps) / expected_mbps).abs() < 0.02, "got {got} expected {expected_mbps}");
}

#[test]
fn successful_frames_never_overlap() {
    let bench = run_saturated(6, 9, SimTime::from_secs(2), LinkState::ideal(7), 800);
    let log = bench.mac.transmissions();
    assert!(log.iter().any(|t| t.collided));
    for w in log.windows(2) {
        assert!(w[0].end <= w[1].start, "{:?} overlaps {:?}", w[0], w[1]);
    }
    for t in log {
        assert_eq!(t.collided, t.stations.len() > 1);
    }
}

#[test]
fn access_delay_grows_with_contenders() {
    let mut means = Vec::new();
    for n in [1usize, 2, 4, 8] {
        let mut acc = 0.0;
        for seed in 0..10 {
            let b = run_saturated(n, seed, SimTime::from_millis(500), LinkState::ideal(7), 800);
            let stats = b.mac.stats();
            let per_station: Vec<f64> = (0..n as u32)
                .filter_map(|i| stats.mean_access_delay_us(NodeId(i)))
                .collect();
            acc += per_station.iter().sum::<f64>() / per_station.len() as f64;
        }
        means.push(acc / 10.0);
    }
    assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
}

#[test]
fn queue_tail_drop() {
    let cfg = DcfConfig {
        queue_frames: 2,
        ..DcfConfig::default()
    };
    let mut bench = Bench::new(cfg, &[NodeId(0)], 1, LinkState::ideal(7));
    let mut eng = Engine::new(1);
    for _ in 0..5 {
        bench.push(eng.scheduler(), NodeId(0), 100);
    }
    let drops = bench
        .outputs
        .iter()
        .filter(|o| matches!(o, LinkOutput::Dropped { layer: DropLayer::Queue, .. }))
        .count();
    assert_eq!(drops, 3);
    eng.run_until(SimTime::from_secs(1), &mut bench).unwrap();
    assert_eq!(bench.delivered().len(), 2);
}

#[test]
fn oversize_frames_rejected() {
    let mut bench = Bench::new(DcfConfig::default(), &[NodeId(0)], 1, LinkState::ideal(7));
    let mut radio = FixedRadio(LinkState::ideal(7));
    let mut ctx = LinkCtx::new(SimTime::ZERO, &mut radio);
    let frame = Frame {
        id: FrameId(0),
        src: NodeId(0),
        dst: AP,
        bytes: 2305,
        enqueued_at: SimTime::ZERO,
    };
    assert!(bench.mac.enqueue(&mut ctx, frame).is_err());
}

#[test]
fn lossy_link_without_retries_delivers_one_minus_per() {
    let cfg = DcfConfig {
        retry_limit: 0,
        ..DcfConfig::default()
    };
    let link = LinkState {
        sinr_db: 10.0,
        selected_mcs: 3,
        per: 0.2,
        connected: true,
    };
    let mut bench = Bench::new(cfg, &[NodeId(0)], 21, link);
    let mut eng = Engine::new(21);
    let n = 10_000;
    // spread arrivals so the queue never overflows
    for i in 0..n {
        let at = SimTime::from_micros(i * 500);
        eng.run_until(at, &mut bench).unwrap();
        bench.push(eng.scheduler(), NodeId(0), 200);
    }
    eng.run_until(SimTime::from_secs(10), &mut bench).unwrap();
    let mut by_kind: BTreeMap<&str, usize> = BTreeMap::new();
    for o in &bench.outputs {
        let k = match o {
            LinkOutput::Delivered { .. } => "ok",
            LinkOutput::Dropped { layer: DropLayer::Mac, .. } => "mac",
            LinkOutput::Dropped { .. } => "other",
        };
        *by_kind.entry(k).or_default() += 1;
    }
    assert_eq!(by_kind.get("other"), None);
    let frac = *by_kind.get("ok").unwrap() as f64 / n as f64;
    assert!((frac - 0.8).abs() <= 0.02, "{frac}");
}
