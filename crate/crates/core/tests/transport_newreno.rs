use std::collections::VecDeque;

use proptest::prelude::*;

use uavsim::sim::{Engine, Event, Handler, RngStream, Scheduler, SimError, SimTime, TargetId};
use uavsim::transport::{CcState, Segment, TcpAction, TcpConfig, TcpReceiver, TcpSender};

fn sends(actions: &[TcpAction]) -> Vec<Segment> {
    actions
        .iter()
        .filter_map(|a| match a {
            TcpAction::Send(s) => Some(*s),
            _ => None,
        })
        .collect()
}

/// Segments travel one at a time through a FIFO pipe, ACKs come back
/// instantly, and the first transmission of each listed index is lost.
#[test]
fn two_losses_in_one_window_recover_without_timeout() {
    let mss = 1000u64;
    let cfg = TcpConfig {
        mss: mss as u32,
        initial_cwnd_segments: 10,
        initial_ssthresh: 64_000,
        ..TcpConfig::default()
    };
    let mut tx = TcpSender::new(cfg);
    let mut rx = TcpReceiver::new();
    let mut pipe: VecDeque<Segment> = sends(&tx.send_burst(SimTime::ZERO, 0, 10 * mss).unwrap()).into();
    assert_eq!(pipe.len(), 10);

    let mut t = SimTime::ZERO;
    let mut cwnd_trace = Vec::new();
    let mut retx = Vec::new();
    let mut completed = false;
    while let Some(seg) = pipe.pop_front() {
        t = t + SimTime::from_millis(1);
        if !seg.is_retx && (seg.index == 3 || seg.index == 7) {
            continue;
        }
        let (ack, _) = rx.on_segment(seg);
        let out = tx.on_ack(t, ack);
        cwnd_trace.push(tx.cwnd);
        completed |= out.iter().any(|a| matches!(a, TcpAction::Completed { burst: 0 }));
        for s in sends(&out) {
            if s.is_retx {
                retx.push(s.index);
            }
            pipe.push_back(s);
        }
    }

    // hand trace:
    //   acks 1000..3000 in slow start: 11k 12k 13k
    //   dups from 4, 5: unchanged; 3rd dup (6): ssthresh 3500, cwnd 3500 + 3k
    //   dups from 8, 9 inflate: 7500 8500
    //   retx 3 -> ack 7000 (partial): 8500 - 4000 + 1000, retransmit 7
    //   retx 7 -> ack 10000 (full): cwnd = ssthresh
    assert_eq!(
        cwnd_trace,
        vec![11_000, 12_000, 13_000, 13_000, 13_000, 6_500, 7_500, 8_500, 5_500, 3_500]
    );
    assert_eq!(retx, vec![3, 7]);
    assert_eq!(tx.ssthresh, 3_500);
    assert_eq!(tx.state, CcState::CongestionAvoidance);
    assert_eq!(tx.rto_count(), 0);
    assert_eq!(tx.fast_retransmits(), 1);
    assert!(completed);
    assert_eq!(rx.rcv_nxt(), 10 * mss);
}

fn timer(actions: &[TcpAction]) -> Option<(u64, SimTime)> {
    actions.iter().rev().find_map(|a| match a {
        TcpAction::Timer { gen, deadline: Some(d) } => Some((*gen, *d)),
        _ => None,
    })
}

#[test]
fn rto_settles_after_delivery_resumes() {
    let mut tx = TcpSender::new(TcpConfig::default());
    let rtt = SimTime::from_millis(100);
    let mut now = SimTime::ZERO;
    let mut out = tx.send_burst(now, 0, 200_000).unwrap();
    // warm up with a few clean round trips
    for _ in 0..4 {
        now = now + rtt;
        let segs = sends(&out);
        out = Vec::new();
        for s in segs {
            out.extend(tx.on_ack(now, s.end()));
        }
    }
    assert!(tx.rto < SimTime::from_secs(1));
    // blackout: three consecutive expiries
    let mut pending = timer(&out).expect("timer armed");
    let mut last = Vec::new();
    for _ in 0..3 {
        now = pending.1;
        last = tx.on_rto(now, pending.0);
        pending = timer(&last).expect("re-armed");
    }
    assert!(tx.rto >= SimTime::from_millis(1600));
    // delivery resumes at 100 ms RTT
    let mut samples = 0;
    let mut segs = sends(&last);
    while tx.rto >= SimTime::from_secs(1) {
        assert!(samples < 10, "rto still {} after {samples} samples", tx.rto);
        now = now + rtt;
        let mut next = Vec::new();
        for s in segs {
            next.extend(sends(&tx.on_ack(now, s.end())));
        }
        samples += 1;
        segs = next;
    }
    assert!(tx.srtt().unwrap() < SimTime::from_millis(300));
}

#[derive(Clone, Copy, Debug)]
enum Ev {
    Arrive(Segment),
    Ack(u64),
    Rto(u64),
}

/// Sender and receiver joined by a 10 Mb/s bottleneck with 10 ms one-way
/// delay and random segment loss.
struct Pipe {
    tx: TcpSender,
    rx: TcpReceiver,
    link_free: SimTime,
    loss: f64,
    rng: RngStream,
    completed: Vec<(u64, SimTime)>,
    delivered_bytes: u64,
}

const T: TargetId = TargetId(0);

impl Pipe {
    fn apply(&mut self, sched: &mut Scheduler<Ev>, actions: Vec<TcpAction>) {
        let now = sched.now();
        for a in actions {
            match a {
                TcpAction::Send(s) => {
                    let ser = SimTime::from_secs_f64((s.len as f64 + 40.0) * 8.0 / 10e6);
                    self.link_free = self.link_free.max(now) + ser;
                    if !self.rng.chance(self.loss) {
                        sched
                            .schedule(self.link_free + SimTime::from_millis(10), T, Ev::Arrive(s))
                            .unwrap();
                    }
                }
                TcpAction::Timer { deadline: Some(d), gen } => {
                    sched.schedule(d, T, Ev::Rto(gen)).unwrap();
                }
                TcpAction::Timer { deadline: None, .. } => {}
                TcpAction::Completed { burst } => self.completed.push((burst, now)),
            }
        }
    }
}

impl Handler<Ev> for Pipe {
    fn handle(&mut self, sched: &mut Scheduler<Ev>, ev: Event<Ev>) -> Result<(), SimError> {
        let now = sched.now();
        let actions = match ev.payload {
            Ev::Arrive(s) => {
                let (ack, d) = self.rx.on_segment(s);
                self.delivered_bytes += d.iter().map(|s| s.len as u64).sum::<u64>();
                sched.schedule_in(SimTime::from_millis(10), T, Ev::Ack(ack))?;
                Vec::new()
            }
            Ev::Ack(a) => self.tx.on_ack(now, a),
            Ev::Rto(g) => self.tx.on_rto(now, g),
        };
        self.apply(sched, actions);
        Ok(())
    }
}

fn run_pipe(seed: u64, loss: f64, bursts: &[u64]) -> Pipe {
    let mut p = Pipe {
        tx: TcpSender::new(TcpConfig::default()),
        rx: TcpReceiver::new(),
        link_free: SimTime::ZERO,
        loss,
        rng: RngStream::new(seed, "pipe.loss"),
        completed: Vec::new(),
        delivered_bytes: 0,
    };
    let mut eng = Engine::new(seed);
    for (i, &b) in bursts.iter().enumerate() {
        let a = p.tx.send_burst(SimTime::ZERO, i as u64, b).unwrap();
        p.apply(eng.scheduler(), a);
    }
    eng.run_until(SimTime::from_secs(120), &mut p).unwrap();
    p
}

#[test]
fn completion_time_grows_with_burst_size() {
    let sizes = [1_000u64, 10_000, 50_000, 150_000];
    let mut means = Vec::new();
    for &size in &sizes {
        let mut acc = 0.0;
        for seed in 0..10 {
            let p = run_pipe(seed, 0.02, &[size]);
            assert_eq!(p.completed.len(), 1);
            acc += p.completed[0].1.as_secs_f64();
        }
        means.push(acc / 10.0);
    }
    assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lossy_pipe_delivers_every_burst_once_in_order(
        seed in 0u64..10_000,
        loss in 0.0f64..0.2,
        bursts in prop::collection::vec(1u64..40_000, 1..6),
    ) {
        let p = run_pipe(seed, loss, &bursts);
        let total: u64 = bursts.iter().sum();
        prop_assert_eq!(p.delivered_bytes, total);
        let ids: Vec<u64> = p.completed.iter().map(|c| c.0).collect();
        prop_assert_eq!(ids, (0..bursts.len() as u64).collect::<Vec<_>>());
        prop_assert!(p.tx.cwnd >= p.tx.config().mss as u64);
        prop_assert!(p.tx.idle());
    }
}
