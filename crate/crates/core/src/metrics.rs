//! Φ ledger: per-packet emission and delivery bookkeeping, burst records,
//! position-error series and run summaries, plus their CSV forms.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::apps::{Burst, BurstKind};
use crate::mobility::Vec3;
use crate::net::DropLayer;
use crate::sim::SimTime;

pub const PACKETS_HEADER: [&str; 9] = [
    "run_id", "burst_id", "kind", "seq", "tau_us", "emit_us", "deliver_us", "omega", "layer_dropped",
];
pub const BURSTS_HEADER: [&str; 8] = [
    "run_id", "burst_id", "kind", "size_bytes", "n_packets", "tau_us", "delta_us", "complete",
];
pub const ERROR_HEADER: [&str; 9] = [
    "run_id", "t_us", "true_x", "true_y", "true_z", "est_x", "est_y", "est_z", "err_m",
];

#[derive(Debug, Error, PartialEq)]
pub enum LedgerError {
    #[error("burst {0} opened twice")]
    DuplicateBurst(u64),
    #[error("unknown burst {0}")]
    UnknownBurst(u64),
    #[error("burst {burst} has no packet {index}")]
    BadIndex { burst: u64, index: u32 },
    #[error("packet {index} of burst {burst} delivered twice")]
    DuplicateDelivery { burst: u64, index: u32 },
    #[error("packet {index} of burst {burst} already resolved")]
    AlreadyResolved { burst: u64, index: u32 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PacketSlot {
    pub emit: Option<SimTime>,
    pub deliver: Option<SimTime>,
    pub dropped: Option<(SimTime, DropLayer)>,
}

#[derive(Clone, Debug)]
struct Entry {
    kind: BurstKind,
    tau: SimTime,
    size_bytes: u64,
    packets: Vec<PacketSlot>,
}

/// Append-only collector for one run.
#[derive(Clone, Debug, Default)]
pub struct PhiLedger {
    bursts: BTreeMap<u64, Entry>,
}

impl PhiLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn open(&mut self, burst: &Burst) -> Result<(), LedgerError> {
        if self.bursts.contains_key(&burst.id) {
            return Err(LedgerError::DuplicateBurst(burst.id));
        }
        self.bursts.insert(
            burst.id,
            Entry {
                kind: burst.kind,
                tau: burst.tau,
                size_bytes: burst.size_bytes,
                packets: vec![PacketSlot::default(); burst.n_packets as usize],
            },
        );
        Ok(())
    }

    pub fn contains(&self, burst: u64) -> bool {
        self.bursts.contains_key(&burst)
    }

    fn slot(&mut self, burst: u64, index: u32) -> Result<&mut PacketSlot, LedgerError> {
        self.bursts
            .get_mut(&burst)
            .ok_or(LedgerError::UnknownBurst(burst))?
            .packets
            .get_mut(index as usize)
            .ok_or(LedgerError::BadIndex { burst, index })
    }

    /// Records the first time a packet left the source; later calls are no-ops.
    pub fn emitted(&mut self, burst: u64, index: u32, at: SimTime) -> Result<(), LedgerError> {
        let s = self.slot(burst, index)?;
        s.emit.get_or_insert(at);
        Ok(())
    }

    pub fn delivered(&mut self, burst: u64, index: u32, at: SimTime) -> Result<(), LedgerError> {
        let s = self.slot(burst, index)?;
        if s.deliver.is_some() {
            return Err(LedgerError::DuplicateDelivery { burst, index });
        }
        if s.dropped.is_some() {
            return Err(LedgerError::AlreadyResolved { burst, index });
        }
        s.deliver = Some(at);
        Ok(())
    }

    pub fn dropped(&mut self, burst: u64, index: u32, at: SimTime, layer: DropLayer) -> Result<(), LedgerError> {
        let s = self.slot(burst, index)?;
        if s.deliver.is_some() || s.dropped.is_some() {
            return Err(LedgerError::AlreadyResolved { burst, index });
        }
        s.dropped = Some((at, layer));
        Ok(())
    }

    /// Drops every packet of a burst that never entered the network.
    pub fn source_drop(&mut self, burst: u64, at: SimTime) -> Result<(), LedgerError> {
        let n = self.bursts.get(&burst).ok_or(LedgerError::UnknownBurst(burst))?.packets.len();
        for i in 0..n as u32 {
            self.dropped(burst, i, at, DropLayer::Source)?;
        }
        Ok(())
    }

    pub fn is_complete(&self, burst: u64) -> bool {
        self.bursts
            .get(&burst)
            .is_some_and(|e| e.packets.iter().all(|p| p.deliver.is_some()))
    }

    /// Closes the ledger at `end`: unresolved packets are lost in flight.
    pub fn finalize(&self, end: SimTime) -> Vec<PhiRecord> {
        self.bursts
            .iter()
            .map(|(&id, e)| {
                let packets: Vec<PacketSlot> = e
                    .packets
                    .iter()
                    .map(|p| {
                        let mut p = *p;
                        if p.deliver.is_none() && p.dropped.is_none() {
                            p.dropped = Some((end, DropLayer::InFlight));
                        }
                        p
                    })
                    .collect();
                PhiRecord::new(id, e.kind, e.tau, e.size_bytes, packets)
            })
            .collect()
    }
}

/// Φ applied to one burst: per-packet delivery times t(n), indicators ω(n),
/// and Δ = max t(n) − τ (None stands for ∞).
#[derive(Clone, Debug, PartialEq)]
pub struct PhiRecord {
    pub burst: u64,
    pub kind: BurstKind,
    pub tau: SimTime,
    pub size_bytes: u64,
    pub packets: Vec<PacketSlot>,
    pub t: Vec<Option<SimTime>>,
    pub omega: Vec<bool>,
    pub delta: Option<SimTime>,
}

impl PhiRecord {
    pub fn new(burst: u64, kind: BurstKind, tau: SimTime, size_bytes: u64, packets: Vec<PacketSlot>) -> Self {
        let t: Vec<Option<SimTime>> = packets.iter().map(|p| p.deliver).collect();
        let omega: Vec<bool> = t.iter().map(Option::is_some).collect();
        let delta = if omega.iter().all(|&w| w) {
            Some(t.iter().flatten().max().map_or(SimTime::ZERO, |m| m.saturating_sub(tau)))
        } else {
            None
        };
        PhiRecord {
            burst,
            kind,
            tau,
            size_bytes,
            packets,
            t,
            omega,
            delta,
        }
    }

    pub fn n_packets(&self) -> usize {
        self.packets.len()
    }

    pub fn complete(&self) -> bool {
        self.delta.is_some()
    }

    pub fn check(&self) -> Result<(), String> {
        let n = self.packets.len();
        if self.t.len() != n || self.omega.len() != n {
            return Err(format!("burst {}: length mismatch", self.burst));
        }
        for (i, p) in self.packets.iter().enumerate() {
            if self.omega[i] != self.t[i].is_some() {
                return Err(format!("burst {}: omega/t mismatch at {i}", self.burst));
            }
            if p.deliver.is_some() == p.dropped.is_some() {
                return Err(format!("burst {}: packet {i} must be exactly one of delivered/dropped", self.burst));
            }
            if let (Some(e), Some(d)) = (p.emit, p.deliver) {
                if d < e || e < self.tau {
                    return Err(format!("burst {}: packet {i} times out of order", self.burst));
                }
            }
        }
        let expect = if self.omega.iter().all(|&w| w) {
            Some(self.t.iter().flatten().max().map_or(SimTime::ZERO, |m| m.saturating_sub(self.tau)))
        } else {
            None
        };
        if expect != self.delta {
            return Err(format!("burst {}: delta {:?} != {:?}", self.burst, self.delta, expect));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorSample {
    pub t: SimTime,
    pub truth: Vec3,
    pub estimate: Vec3,
    pub err: f64,
}

/// Mean, sample variance and 95th percentile (linear interpolation between
/// order statistics).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub p95: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Option<Moments> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let variance = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Some(Moments {
            n,
            mean,
            variance,
            p95: quantile(values, 0.95),
        })
    }
}

pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub run_id: String,
    pub seed: u64,
    pub error_m: Option<Moments>,
    /// Δ over complete bursts of the run's primary application, ms.
    pub delay_ms: Option<Moments>,
    pub delay_kind: BurstKind,
    pub incomplete_fraction: f64,
    /// Delivered over emitted UAV packets.
    pub delivery_ratio: f64,
    pub emitted: u64,
    pub delivered: u64,
    pub drops: BTreeMap<DropLayer, u64>,
    pub config: String,
}

impl RunSummary {
    pub fn build(run_id: &str, seed: u64, records: &[PhiRecord], errors: &[ErrorSample], config: String) -> Self {
        let delay_kind = if records.iter().any(|r| r.kind == BurstKind::Task) {
            BurstKind::Task
        } else {
            BurstKind::Telemetry
        };
        let primary: Vec<&PhiRecord> = records.iter().filter(|r| r.kind == delay_kind).collect();
        let delays: Vec<f64> = primary
            .iter()
            .filter_map(|r| r.delta)
            .map(|d| d.as_micros() as f64 / 1000.0)
            .collect();
        let incomplete_fraction = if primary.is_empty() {
            0.0
        } else {
            primary.iter().filter(|r| !r.complete()).count() as f64 / primary.len() as f64
        };
        let mut emitted = 0;
        let mut delivered = 0;
        let mut uav_emitted = 0u64;
        let mut uav_delivered = 0u64;
        let mut drops = BTreeMap::new();
        for r in records {
            for p in &r.packets {
                emitted += 1;
                let ok = p.deliver.is_some();
                if ok {
                    delivered += 1;
                }
                if let Some((_, layer)) = p.dropped {
                    *drops.entry(layer).or_insert(0) += 1;
                }
                if r.kind != BurstKind::Exogenous {
                    uav_emitted += 1;
                    uav_delivered += ok as u64;
                }
            }
        }
        let errs: Vec<f64> = errors.iter().map(|e| e.err).collect();
        RunSummary {
            run_id: run_id.to_string(),
            seed,
            error_m: Moments::of(&errs),
            delay_ms: Moments::of(&delays),
            delay_kind,
            incomplete_fraction,
            delivery_ratio: if uav_emitted == 0 { 1.0 } else { uav_delivered as f64 / uav_emitted as f64 },
            emitted,
            delivered,
            drops,
            config,
        }
    }

    pub fn in_flight(&self) -> u64 {
        self.drops.get(&DropLayer::InFlight).copied().unwrap_or(0)
    }

    /// emitted == delivered + every drop layer (in-flight included).
    pub fn conserved(&self) -> bool {
        self.emitted == self.delivered + self.drops.values().sum::<u64>()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let m = |name: &str, v: &Option<Moments>, s: &mut String| {
            if let Some(v) = v {
                s.push_str(&format!(
                    "{name}_mean = {}\n{name}_variance = {}\n{name}_p95 = {}\n{name}_n = {}\n",
                    v.mean, v.variance, v.p95, v.n
                ));
            }
        };
        s.push_str(&format!("run_id = {}\nseed = {}\n", self.run_id, self.seed));
        m("error_m", &self.error_m, &mut s);
        m("delay_ms", &self.delay_ms, &mut s);
        s.push_str(&format!(
            "delay_kind = {}\nincomplete_fraction = {}\ndelivery_ratio = {}\nemitted = {}\ndelivered = {}\n",
            self.delay_kind.as_str(),
            self.incomplete_fraction,
            self.delivery_ratio,
            self.emitted,
            self.delivered
        ));
        for layer in DropLayer::ALL {
            s.push_str(&format!(
                "dropped_{} = {}\n",
                layer.as_str(),
                self.drops.get(&layer).copied().unwrap_or(0)
            ));
        }
        s
    }
}

fn opt_us(t: Option<SimTime>) -> String {
    t.map(|t| t.as_micros().to_string()).unwrap_or_default()
}

pub fn write_packets<W: io::Write>(w: W, run_id: &str, records: &[PhiRecord]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(PACKETS_HEADER)?;
    for r in records {
        for (i, p) in r.packets.iter().enumerate() {
            out.write_record([
                run_id.to_string(),
                r.burst.to_string(),
                r.kind.as_str().to_string(),
                i.to_string(),
                r.tau.as_micros().to_string(),
                opt_us(p.emit),
                opt_us(p.deliver),
                u8::from(p.deliver.is_some()).to_string(),
                p.dropped.map(|(_, l)| l.as_str().to_string()).unwrap_or_default(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_bursts<W: io::Write>(w: W, run_id: &str, records: &[PhiRecord]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(BURSTS_HEADER)?;
    for r in records {
        out.write_record([
            run_id.to_string(),
            r.burst.to_string(),
            r.kind.as_str().to_string(),
            r.size_bytes.to_string(),
            r.n_packets().to_string(),
            r.tau.as_micros().to_string(),
            opt_us(r.delta),
            u8::from(r.complete()).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_error<W: io::Write>(w: W, run_id: &str, samples: &[ErrorSample]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(ERROR_HEADER)?;
    for s in samples {
        out.write_record([
            run_id.to_string(),
            s.t.as_micros().to_string(),
            s.truth.x.to_string(),
            s.truth.y.to_string(),
            s.truth.z.to_string(),
            s.estimate.x.to_string(),
            s.estimate.y.to_string(),
            s.estimate.z.to_string(),
            s.err.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes packets.csv, bursts.csv, error.csv and summary.txt into `dir`.
pub fn write_run(dir: &Path, summary: &RunSummary, records: &[PhiRecord], errors: &[ErrorSample]) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let id = &summary.run_id;
    let file = |name: &str| std::fs::File::create(dir.join(name)).map(io::BufWriter::new);
    write_packets(file("packets.csv")?, id, records)?;
    write_bursts(file("bursts.csv")?, id, records)?;
    write_error(file("error.csv")?, id, errors)?;
    std::fs::write(dir.join("summary.txt"), summary.to_text())?;
    std::fs::write(dir.join("scenario.cfg"), &summary.config)?;
    Ok(())
}
