//! One simulated run: UAV, base station, ground nodes and the ground control
//! station wired through the selected access network.
//!
//! Uplink packets cross the radio hop to the base station, then a fixed
//! backhaul delay to the ground control station (GCS). Transport ACKs take
//! the reverse path.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::apps::{position_error, Burst, BurstKind, Estimator, ExogenousSource, TaskSource, TelemetrySource};
use crate::config::{ScenarioConfig, Technology, TrajectoryKind};
use crate::lte::{LteConfig, LteEvent, LteRan, LteStats, TtiRecord};
use crate::metrics::{ErrorSample, LedgerError, PhiLedger, PhiRecord, RunSummary};
use crate::mobility::{distance, place_ground_nodes, MobilityError, Trajectory, UavState, Vec3};
use crate::net::{DropLayer, Frame, FrameId, LinkCtx, LinkOutput, NodeId, RadioEnv};
use crate::radio::{link_state_from_sinr, noise_floor_dbm, LinkState, McsTable, PathlossModel, Shadowing};
use crate::sim::{Engine, Event, EventHandle, Handler, RngStream, Scheduler, SimError, SimTime, TargetId};
use crate::stub::{StubChannel, StubParams};
use crate::transport::{segment_sizes, Segment, TcpAction, TcpConfig, TcpReceiver, TcpSender, TransportMode};
use crate::wifi::{DcfConfig, WifiEvent, WifiMac, WifiStats};

const WORLD: TargetId = TargetId(0);
const UDP_HEADER_BYTES: u32 = 28;
const TELEMETRY_FLOW: usize = 0;
const TASK_FLOW: usize = 1;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Mobility(#[from] MobilityError),
    #[error("ledger: {0}")]
    Ledger(#[from] LedgerError),
}

/// Propagation, shadowing and rate selection for the current geometry.
pub struct RadioModel {
    pathloss: PathlossModel,
    shadowing: Shadowing,
    frequency_hz: f64,
    noise_dbm: f64,
    table: McsTable,
    ue_power_dbm: f64,
    bs_power_dbm: f64,
    bs: Vec3,
    trajectory: Trajectory,
    ground: Vec<Vec3>,
}

impl RadioModel {
    pub fn position(&self, node: NodeId, t: SimTime) -> Vec3 {
        match node {
            NodeId::UAV => self.trajectory.state_at(t).p,
            NodeId::BASE_STATION => self.bs,
            NodeId(n) => self.ground[n as usize - 2],
        }
    }
}

impl RadioEnv for RadioModel {
    fn link(&mut self, tx: NodeId, rx: NodeId, now: SimTime) -> LinkState {
        let mobile = if tx == NodeId::BASE_STATION { rx } else { tx };
        let pm = self.position(mobile, now);
        let pb = self.position(if mobile == tx { rx } else { tx }, now);
        let d = distance(pm, pb).max(1.0);
        let Ok(pl) = self.pathloss.breakdown(d, self.frequency_hz, pb.z, pm.z) else {
            return link_state_from_sinr(f64::NEG_INFINITY, &self.table);
        };
        let shadow = self.shadowing.sample_db(tx, rx, [pm.x, pm.y, pm.z]);
        let power = if tx == NodeId::BASE_STATION {
            self.bs_power_dbm
        } else {
            self.ue_power_dbm
        };
        link_state_from_sinr(power - pl.total_db - shadow - self.noise_dbm, &self.table)
    }
}

enum Access {
    Wifi(WifiMac),
    Lte(LteRan),
    Stub(StubChannel),
}

#[derive(Clone, Copy, Debug)]
enum Packet {
    Segment { flow: usize, seg: Segment },
    Ack { flow: usize, ack: u64 },
    Datagram { burst: Option<u64>, index: u32 },
}

#[derive(Clone, Copy, Debug)]
enum Ev {
    Wifi(WifiEvent),
    Lte(LteEvent),
    /// A frame leaves the radio hop at its receiver.
    Arrive(Frame),
    ToGcs(FrameId),
    ToBs(FrameId),
    Telemetry(u64),
    Task(u64),
    Exogenous { node: usize, k: u64 },
    Rto { flow: usize, gen: u64 },
    Sample(u64),
}

struct Flow {
    sender: TcpSender,
    receiver: TcpReceiver,
    timer: Option<EventHandle>,
}

/// Everything a finished run produced.
pub struct RunOutput {
    pub summary: RunSummary,
    pub records: Vec<PhiRecord>,
    pub errors: Vec<ErrorSample>,
    pub wifi: Option<WifiStats>,
    pub lte: Option<LteStats>,
    /// Per-TTI allocations, when requested and the run used LTE.
    pub tti_log: Vec<TtiRecord>,
    pub events: u64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub record_ttis: bool,
}

struct World {
    horizon: SimTime,
    mode: TransportMode,
    mss: u32,
    header_bytes: u32,
    backhaul: SimTime,
    three_d: bool,
    sample_step_us: f64,
    trace_exogenous: bool,
    radio: RadioModel,
    access: Access,
    telemetry: Option<TelemetrySource>,
    task: Option<TaskSource>,
    exogenous: Vec<ExogenousSource>,
    flows: Vec<Flow>,
    packets: HashMap<FrameId, Packet>,
    telemetry_payload: BTreeMap<u64, (SimTime, UavState)>,
    next_frame: u64,
    next_burst: u64,
    ledger: PhiLedger,
    estimator: Estimator,
    errors: Vec<ErrorSample>,
}

fn model_err(now: SimTime, e: impl std::fmt::Display) -> SimError {
    SimError::Model {
        at: now,
        msg: e.to_string(),
    }
}

impl World {
    fn new(cfg: &ScenarioConfig) -> Result<Self, RunError> {
        let seed = cfg.seed;
        let uav_center = Vec3::new(0.0, 0.0, cfg.uav_altitude_m);
        let trajectory = match cfg.uav_trajectory {
            TrajectoryKind::Rectangle => Trajectory::rectangle(
                uav_center,
                cfg.uav_rect_width_m,
                cfg.uav_rect_height_m,
                cfg.uav_speed_mps,
                cfg.uav_dwell_s,
            )?,
            TrajectoryKind::Orbit => Trajectory::orbit(uav_center, cfg.uav_orbit_radius_m, cfg.uav_speed_mps)?,
        }
        .with_drain(cfg.uav_drain_per_s);
        let mut layout_rng = RngStream::new(seed, "ground.layout");
        let ground = place_ground_nodes(
            cfg.ground_n_nodes,
            Vec3::new(0.0, 0.0, cfg.ground_height_m),
            cfg.ground_radius_m,
            &mut layout_rng,
        );
        let key = (RngStream::new(seed, "shadowing.key").uniform() * (1u64 << 53) as f64) as u64;
        let pathloss = PathlossModel {
            regime: cfg.pathloss_regime,
            c_model: cfg.pathloss_c_model,
            c_offset_db: cfg.pathloss_c_offset_db,
            diffraction_coeff_db: cfg.pathloss_diffraction_coeff_db,
            diffraction_floor_db: cfg.pathloss_diffraction_floor_db,
            wall_loss_db: cfg.pathloss_l_ew_db,
            altitude_gain_db_per_m: cfg.pathloss_g_h_db_per_m,
            altitude_gain_cap_db: cfg.pathloss_g_h_cap_db,
        };
        let softness = cfg.radio_softness_db;
        let (frequency_hz, bandwidth_hz, table, ue_power, bs_power) = match cfg.technology {
            Technology::Lte => (
                cfg.lte_frequency_ghz * 1e9,
                cfg.lte_n_prb as f64 * crate::lte::PRB_BANDWIDTH_HZ,
                McsTable::lte_cqi(),
                cfg.lte_ue_tx_power_dbm,
                cfg.lte_enb_tx_power_dbm,
            ),
            _ => (
                cfg.wifi_frequency_ghz * 1e9,
                cfg.wifi_bandwidth_mhz * 1e6,
                McsTable::wifi_80211a(),
                cfg.wifi_tx_power_dbm,
                cfg.wifi_tx_power_dbm,
            ),
        };
        let table = McsTable::new(table.thresholds_db, softness).expect("built-in table is valid");
        let radio = RadioModel {
            pathloss,
            shadowing: Shadowing::new(cfg.shadowing_sigma_db, cfg.shadowing_cell_m, key),
            frequency_hz,
            noise_dbm: noise_floor_dbm(bandwidth_hz, cfg.radio_noise_figure_db),
            table: table.clone(),
            ue_power_dbm: ue_power,
            bs_power_dbm: bs_power,
            bs: Vec3::new(0.0, 0.0, cfg.bs_height_m),
            trajectory,
            ground,
        };

        let grounds: Vec<NodeId> = (0..cfg.ground_n_nodes).map(NodeId::ground).collect();
        let (access, backhaul_ms) = match cfg.technology {
            Technology::Wifi => {
                let mut nodes = vec![NodeId::UAV, NodeId::BASE_STATION];
                nodes.extend(&grounds);
                let dcf = DcfConfig {
                    retry_limit: cfg.wifi_retry_limit,
                    queue_frames: cfg.wifi_queue_frames,
                    table,
                    ..DcfConfig::default()
                };
                (Access::Wifi(WifiMac::new(dcf, &nodes, seed)), cfg.wifi_backhaul_ms)
            }
            Technology::Lte => {
                let mut ues = vec![NodeId::UAV];
                ues.extend(&grounds);
                let lte = LteConfig {
                    n_prb: cfg.lte_n_prb,
                    overhead: cfg.lte_overhead,
                    sr_period_ms: cfg.lte_sr_period_ms,
                    rlc_retx_ms: cfg.lte_rlc_retx_ms,
                    max_retx: cfg.lte_max_retx,
                    rlc_buffer_bytes: cfg.lte_rlc_buffer_bytes,
                    cqi_period_ms: cfg.lte_cqi_period_ms,
                    ul_max_cqi: cfg.lte_ul_max_cqi,
                    table,
                    ..LteConfig::default()
                };
                (Access::Lte(LteRan::new(lte, NodeId::BASE_STATION, &ues, seed)), cfg.lte_core_delay_ms)
            }
            Technology::Stub => {
                let p = StubParams {
                    delay: SimTime::from_secs_f64(cfg.stub_delay_ms / 1000.0),
                    loss_prob: cfg.stub_loss,
                    jitter: SimTime::from_secs_f64(cfg.stub_jitter_ms / 1000.0),
                };
                (Access::Stub(StubChannel::new(p, seed)), 0.0)
            }
        };

        let tcp = TcpConfig {
            mss: cfg.transport_mss,
            min_rto: SimTime::from_secs_f64(cfg.transport_min_rto_ms / 1000.0),
            send_buffer: cfg.transport_send_buffer_bytes,
            ..TcpConfig::default()
        };
        let header_bytes = match cfg.transport_mode {
            TransportMode::Reliable => tcp.header_bytes,
            TransportMode::Datagram => UDP_HEADER_BYTES,
        };
        let flows = (0..2)
            .map(|_| Flow {
                sender: TcpSender::new(tcp.clone()),
                receiver: TcpReceiver::new(),
                timer: None,
            })
            .collect();
        let exogenous = (0..cfg.ground_n_nodes)
            .map(|i| ExogenousSource {
                rate_bps: cfg.exogenous_rate_mbps * 1e6,
                packet_bytes: cfg.exogenous_packet_bytes,
                phase: RngStream::new(seed, &format!("exogenous.phase.{i}")).uniform(),
            })
            .collect();

        Ok(World {
            horizon: SimTime::from_secs_f64(cfg.horizon_s),
            mode: cfg.transport_mode,
            mss: cfg.transport_mss,
            header_bytes,
            backhaul: SimTime::from_secs_f64(backhaul_ms / 1000.0),
            three_d: cfg.error_three_d,
            sample_step_us: cfg.error_sample_ms * 1000.0,
            trace_exogenous: cfg.trace_exogenous,
            radio,
            access,
            telemetry: cfg.telemetry_enabled.then(|| TelemetrySource {
                freq_hz: cfg.telemetry_freq_hz,
                payload_bytes: cfg.telemetry_payload_bytes,
            }),
            task: (cfg.task_bytes() > 0).then(|| TaskSource {
                size_bytes: cfg.task_bytes(),
                period: SimTime::from_secs_f64(cfg.task_period_s),
            }),
            exogenous,
            flows,
            packets: HashMap::new(),
            telemetry_payload: BTreeMap::new(),
            next_frame: 0,
            next_burst: 0,
            ledger: PhiLedger::new(),
            estimator: Estimator::new(cfg.estimator_mode),
            errors: Vec::new(),
        })
    }

    fn sample_time(&self, k: u64) -> SimTime {
        SimTime::from_micros(((k as f64 + 0.5) * self.sample_step_us).round() as u64)
    }

    fn start(&mut self, sched: &mut Scheduler<Ev>) -> Result<(), SimError> {
        let h = self.horizon;
        let mut at = |t: SimTime, ev: Ev| -> Result<(), SimError> {
            if t <= h {
                sched.schedule(t, WORLD, ev)?;
            }
            Ok(())
        };
        if let Some(s) = &self.telemetry {
            at(s.tau(1), Ev::Telemetry(1))?;
        }
        if let Some(s) = &self.task {
            at(s.tau(1), Ev::Task(1))?;
        }
        for (node, s) in self.exogenous.iter().enumerate() {
            at(s.emit_time(0), Ev::Exogenous { node, k: 0 })?;
        }
        at(self.sample_time(0), Ev::Sample(0))?;
        if let Access::Lte(ran) = &mut self.access {
            let mut ctx = LinkCtx::new(sched.now(), &mut self.radio);
            ran.start(&mut ctx);
            let (timers, outputs) = ctx.into_parts();
            self.flush(sched, timers.into_iter().map(|(t, e)| (t, Ev::Lte(e))).collect(), outputs)?;
        }
        Ok(())
    }

    fn flush(&mut self, sched: &mut Scheduler<Ev>, timers: Vec<(SimTime, Ev)>, outputs: Vec<LinkOutput>) -> Result<(), SimError> {
        for (t, ev) in timers {
            sched.schedule(t, WORLD, ev)?;
        }
        for out in outputs {
            match out {
                LinkOutput::Delivered { frame, at } if at > sched.now() => {
                    sched.schedule(at, WORLD, Ev::Arrive(frame))?;
                }
                LinkOutput::Delivered { frame, .. } => self.arrive(sched, frame)?,
                LinkOutput::Dropped { frame, at, layer } => self.dropped(sched.now(), frame, at, layer)?,
            }
        }
        Ok(())
    }

    /// Hands `pkt` to the access network for one radio hop.
    fn send(&mut self, sched: &mut Scheduler<Ev>, src: NodeId, dst: NodeId, bytes: u32, pkt: Packet) -> Result<(), SimError> {
        let now = sched.now();
        let id = FrameId(self.next_frame);
        self.next_frame += 1;
        self.packets.insert(id, pkt);
        let frame = Frame {
            id,
            src,
            dst,
            bytes,
            enqueued_at: now,
        };
        match &mut self.access {
            Access::Wifi(mac) => {
                let mut ctx = LinkCtx::new(now, &mut self.radio);
                mac.enqueue(&mut ctx, frame).map_err(|e| model_err(now, e))?;
                let (timers, outputs) = ctx.into_parts();
                self.flush(sched, timers.into_iter().map(|(t, e)| (t, Ev::Wifi(e))).collect(), outputs)
            }
            Access::Lte(ran) => {
                let mut ctx = LinkCtx::new(now, &mut self.radio);
                ran.enqueue(&mut ctx, frame).map_err(|e| model_err(now, e))?;
                let (timers, outputs) = ctx.into_parts();
                self.flush(sched, timers.into_iter().map(|(t, e)| (t, Ev::Lte(e))).collect(), outputs)
            }
            Access::Stub(ch) => match ch.transfer(now) {
                Some(at) => sched.schedule(at, WORLD, Ev::Arrive(frame)).map(|_| ()),
                None => self.dropped(now, frame, now, DropLayer::Channel),
            },
        }
    }

    fn dropped(&mut self, now: SimTime, frame: Frame, at: SimTime, layer: DropLayer) -> Result<(), SimError> {
        if let Some(Packet::Datagram { burst: Some(b), index }) = self.packets.remove(&frame.id) {
            self.ledger.dropped(b, index, at, layer).map_err(|e| model_err(now, e))?;
        }
        Ok(())
    }

    fn arrive(&mut self, sched: &mut Scheduler<Ev>, frame: Frame) -> Result<(), SimError> {
        let now = sched.now();
        if frame.dst == NodeId::BASE_STATION {
            if frame.src != NodeId::UAV {
                if let Some(Packet::Datagram { burst: Some(b), index }) = self.packets.remove(&frame.id) {
                    self.ledger.delivered(b, index, now).map_err(|e| model_err(now, e))?;
                }
                return Ok(());
            }
            sched.schedule(now + self.backhaul, WORLD, Ev::ToGcs(frame.id))?;
            return Ok(());
        }
        if let Some(Packet::Ack { flow, ack }) = self.packets.remove(&frame.id) {
            let actions = self.flows[flow].sender.on_ack(now, ack);
            self.apply(sched, flow, actions)?;
        }
        Ok(())
    }

    fn at_gcs(&mut self, sched: &mut Scheduler<Ev>, id: FrameId) -> Result<(), SimError> {
        let now = sched.now();
        match self.packets.remove(&id) {
            Some(Packet::Segment { flow, seg }) => {
                let (ack, delivered) = self.flows[flow].receiver.on_segment(seg);
                for s in delivered {
                    self.app_delivery(now, s.burst, s.index)?;
                }
                let ack_id = FrameId(self.next_frame);
                self.next_frame += 1;
                self.packets.insert(ack_id, Packet::Ack { flow, ack });
                sched.schedule(now + self.backhaul, WORLD, Ev::ToBs(ack_id))?;
            }
            Some(Packet::Datagram { burst: Some(b), index }) => self.app_delivery(now, b, index)?,
            _ => {}
        }
        Ok(())
    }

    fn app_delivery(&mut self, now: SimTime, burst: u64, index: u32) -> Result<(), SimError> {
        self.ledger.delivered(burst, index, now).map_err(|e| model_err(now, e))?;
        if let Some((tau, state)) = self.telemetry_payload.remove(&burst) {
            self.estimator.ingest(tau, state, now);
        }
        Ok(())
    }

    fn apply(&mut self, sched: &mut Scheduler<Ev>, flow: usize, actions: Vec<TcpAction>) -> Result<(), SimError> {
        let now = sched.now();
        for a in actions {
            match a {
                TcpAction::Send(seg) => {
                    self.ledger.emitted(seg.burst, seg.index, now).map_err(|e| model_err(now, e))?;
                    let bytes = seg.len + self.header_bytes;
                    self.send(sched, NodeId::UAV, NodeId::BASE_STATION, bytes, Packet::Segment { flow, seg })?;
                }
                TcpAction::Timer { deadline, gen } => {
                    if let Some(h) = self.flows[flow].timer.take() {
                        sched.cancel(h);
                    }
                    if let Some(t) = deadline {
                        self.flows[flow].timer = Some(sched.schedule(t.max(now), WORLD, Ev::Rto { flow, gen })?);
                    }
                }
                TcpAction::Completed { .. } => {}
            }
        }
        Ok(())
    }

    fn emit_burst(&mut self, sched: &mut Scheduler<Ev>, flow: usize, burst: Burst) -> Result<(), SimError> {
        let now = sched.now();
        self.ledger.open(&burst).map_err(|e| model_err(now, e))?;
        if let Some(state) = burst.payload {
            self.telemetry_payload.insert(burst.id, (burst.tau, state));
        }
        match self.mode {
            TransportMode::Reliable => match self.flows[flow].sender.send_burst(now, burst.id, burst.size_bytes) {
                Ok(actions) => self.apply(sched, flow, actions),
                Err(_) => {
                    self.telemetry_payload.remove(&burst.id);
                    self.ledger.source_drop(burst.id, now).map_err(|e| model_err(now, e))
                }
            },
            TransportMode::Datagram => {
                for (i, len) in segment_sizes(burst.size_bytes, self.mss).into_iter().enumerate() {
                    let index = i as u32;
                    self.ledger.emitted(burst.id, index, now).map_err(|e| model_err(now, e))?;
                    let pkt = Packet::Datagram {
                        burst: Some(burst.id),
                        index,
                    };
                    self.send(sched, NodeId::UAV, NodeId::BASE_STATION, len + self.header_bytes, pkt)?;
                }
                Ok(())
            }
        }
    }

    fn new_burst(&mut self, kind: BurstKind, tau: SimTime, size_bytes: u64, payload: Option<UavState>) -> Burst {
        let id = self.next_burst;
        self.next_burst += 1;
        Burst {
            id,
            kind,
            tau,
            size_bytes,
            n_packets: segment_sizes(size_bytes, self.mss).len() as u32,
            payload,
        }
    }

    fn finish(self, run_id: &str, cfg: &ScenarioConfig, events: u64) -> RunOutput {
        let records = self.ledger.finalize(self.horizon);
        let summary = RunSummary::build(run_id, cfg.seed, &records, &self.errors, cfg.to_text());
        let (wifi, lte, tti_log) = match &self.access {
            Access::Wifi(m) => (Some(m.stats().clone()), None, Vec::new()),
            Access::Lte(r) => (None, Some(r.stats().clone()), r.tti_log().to_vec()),
            Access::Stub(_) => (None, None, Vec::new()),
        };
        RunOutput {
            summary,
            records,
            errors: self.errors,
            wifi,
            lte,
            tti_log,
            events,
        }
    }
}

impl Handler<Ev> for World {
    fn handle(&mut self, sched: &mut Scheduler<Ev>, event: Event<Ev>) -> Result<(), SimError> {
        let now = sched.now();
        let horizon = self.horizon;
        match event.payload {
            Ev::Wifi(ev) => {
                let Access::Wifi(mac) = &mut self.access else { return Ok(()) };
                let mut ctx = LinkCtx::new(now, &mut self.radio);
                mac.handle(&mut ctx, ev);
                let (timers, outputs) = ctx.into_parts();
                self.flush(sched, timers.into_iter().map(|(t, e)| (t, Ev::Wifi(e))).collect(), outputs)?;
            }
            Ev::Lte(ev) => {
                let Access::Lte(ran) = &mut self.access else { return Ok(()) };
                let mut ctx = LinkCtx::new(now, &mut self.radio);
                ran.handle(&mut ctx, ev);
                let (timers, outputs) = ctx.into_parts();
                self.flush(sched, timers.into_iter().map(|(t, e)| (t, Ev::Lte(e))).collect(), outputs)?;
            }
            Ev::Arrive(frame) => self.arrive(sched, frame)?,
            Ev::ToGcs(id) => self.at_gcs(sched, id)?,
            Ev::ToBs(id) => {
                if let Some(pkt) = self.packets.remove(&id) {
                    let bytes = self.header_bytes;
                    self.send(sched, NodeId::BASE_STATION, NodeId::UAV, bytes, pkt)?;
                }
            }
            Ev::Telemetry(i) => {
                let src = self.telemetry.clone().expect("telemetry enabled");
                let state = self.radio.trajectory.state_at(now);
                let b = self.new_burst(BurstKind::Telemetry, now, src.payload_bytes as u64, Some(state));
                self.emit_burst(sched, TELEMETRY_FLOW, b)?;
                if src.tau(i + 1) <= horizon {
                    sched.schedule(src.tau(i + 1), WORLD, Ev::Telemetry(i + 1))?;
                }
            }
            Ev::Task(i) => {
                let src = self.task.clone().expect("task enabled");
                let b = self.new_burst(BurstKind::Task, now, src.size_bytes, None);
                self.emit_burst(sched, TASK_FLOW, b)?;
                if src.tau(i + 1) <= horizon {
                    sched.schedule(src.tau(i + 1), WORLD, Ev::Task(i + 1))?;
                }
            }
            Ev::Exogenous { node, k } => {
                let src = self.exogenous[node].clone();
                let burst = if self.trace_exogenous {
                    let b = self.new_burst(BurstKind::Exogenous, now, src.packet_bytes as u64, None);
                    self.ledger.open(&b).map_err(|e| model_err(now, e))?;
                    self.ledger.emitted(b.id, 0, now).map_err(|e| model_err(now, e))?;
                    Some(b.id)
                } else {
                    None
                };
                let pkt = Packet::Datagram { burst, index: 0 };
                self.send(sched, NodeId::ground(node), NodeId::BASE_STATION, src.packet_bytes, pkt)?;
                let next = src.emit_time(k + 1);
                if next <= horizon {
                    sched.schedule(next, WORLD, Ev::Exogenous { node, k: k + 1 })?;
                }
            }
            Ev::Rto { flow, gen } => {
                self.flows[flow].timer = None;
                let actions = self.flows[flow].sender.on_rto(now, gen);
                self.apply(sched, flow, actions)?;
            }
            Ev::Sample(k) => {
                if let Some(est) = self.estimator.estimate(now) {
                    let truth = self.radio.trajectory.state_at(now).p;
                    self.errors.push(ErrorSample {
                        t: now,
                        truth,
                        estimate: est,
                        err: position_error(truth, est, self.three_d),
                    });
                }
                let next = self.sample_time(k + 1);
                if next <= horizon {
                    sched.schedule(next, WORLD, Ev::Sample(k + 1))?;
                }
            }
        }
        Ok(())
    }
}

/// Runs one scenario to its horizon.
pub fn run(cfg: &ScenarioConfig, run_id: &str) -> Result<RunOutput, RunError> {
    run_with(cfg, run_id, RunOptions::default())
}

pub fn run_with(cfg: &ScenarioConfig, run_id: &str, opts: RunOptions) -> Result<RunOutput, RunError> {
    let mut world = World::new(cfg)?;
    if let (true, Access::Lte(ran)) = (opts.record_ttis, &mut world.access) {
        ran.record_ttis();
    }
    let mut engine: Engine<Ev> = Engine::new(cfg.seed);
    world.start(engine.scheduler())?;
    let stats = engine.run_until(world.horizon, &mut world)?;
    Ok(world.finish(run_id, cfg, stats.dispatched))
}

/// UAV and ground-node positions at `t`, for inspection.
pub fn geometry(cfg: &ScenarioConfig, t: SimTime) -> Result<(Vec3, Vec<Vec3>), RunError> {
    let w = World::new(cfg)?;
    Ok((w.radio.trajectory.state_at(t).p, w.radio.ground.clone()))
}

/// Instantaneous UAV to base-station uplink state at `t`.
pub fn uplink_state(cfg: &ScenarioConfig, t: SimTime) -> Result<LinkState, RunError> {
    let mut w = World::new(cfg)?;
    Ok(w.radio.link(NodeId::UAV, NodeId::BASE_STATION, t))
}
