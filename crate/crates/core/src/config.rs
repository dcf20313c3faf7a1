//! Flat `key = value` scenario files with `#` comments.
//!
//! Presets are applied first, explicit keys afterwards, so a file can start
//! from a regime and override single values. [`ScenarioConfig::to_text`]
//! writes every key in a fixed order; parsing that text reproduces the same
//! configuration.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::apps::EstimatorMode;
use crate::radio::{CModel, Regime};
use crate::transport::TransportMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Technology {
    Wifi,
    Lte,
    Stub,
}

impl Technology {
    pub fn as_str(self) -> &'static str {
        match self {
            Technology::Wifi => "wifi",
            Technology::Lte => "lte",
            Technology::Stub => "stub",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrajectoryKind {
    Rectangle,
    Orbit,
}

impl TrajectoryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TrajectoryKind::Rectangle => "rectangle",
            TrajectoryKind::Orbit => "orbit",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    NoLoad,
    HighLoad,
    LowDistance,
    HighDistance,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::NoLoad, Preset::HighLoad, Preset::LowDistance, Preset::HighDistance];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::NoLoad => "no_load",
            Preset::HighLoad => "high_load",
            Preset::LowDistance => "low_distance",
            Preset::HighDistance => "high_distance",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Preset::ALL.into_iter().find(|p| p.as_str() == s)
    }

    pub fn apply(self, c: &mut ScenarioConfig) {
        match self {
            Preset::NoLoad => c.ground_n_nodes = 0,
            Preset::HighLoad => {
                c.ground_n_nodes = 8;
                c.exogenous_rate_mbps = 6.0;
            }
            Preset::LowDistance => {
                c.uav_trajectory = TrajectoryKind::Orbit;
                c.uav_orbit_radius_m = 10.0;
            }
            Preset::HighDistance => {
                c.uav_trajectory = TrajectoryKind::Orbit;
                c.uav_orbit_radius_m = 40.0;
            }
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("{key}: {reason} (got `{value}`)")]
    Invalid { key: String, value: String, reason: String },
    #[error("{0}")]
    Io(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub technology: Technology,
    pub horizon_s: f64,
    pub seed: u64,
    pub presets: Vec<Preset>,

    pub pathloss_regime: Regime,
    pub pathloss_c_model: CModel,
    pub pathloss_c_offset_db: f64,
    pub pathloss_diffraction_coeff_db: f64,
    pub pathloss_diffraction_floor_db: f64,
    pub pathloss_l_ew_db: f64,
    pub pathloss_g_h_db_per_m: f64,
    pub pathloss_g_h_cap_db: f64,
    pub shadowing_sigma_db: f64,
    pub shadowing_cell_m: f64,
    pub radio_noise_figure_db: f64,
    pub radio_softness_db: f64,

    pub wifi_bandwidth_mhz: f64,
    pub wifi_frequency_ghz: f64,
    pub wifi_tx_power_dbm: f64,
    pub wifi_retry_limit: u32,
    pub wifi_queue_frames: usize,
    pub wifi_backhaul_ms: f64,

    pub lte_bandwidth_mhz: f64,
    pub lte_n_prb: u32,
    pub lte_frequency_ghz: f64,
    pub lte_ue_tx_power_dbm: f64,
    pub lte_enb_tx_power_dbm: f64,
    pub lte_sr_period_ms: u64,
    pub lte_max_retx: u32,
    pub lte_overhead: f64,
    pub lte_rlc_retx_ms: u64,
    pub lte_rlc_buffer_bytes: usize,
    pub lte_cqi_period_ms: u64,
    pub lte_ul_max_cqi: u8,
    pub lte_core_delay_ms: f64,

    pub transport_mode: TransportMode,
    pub transport_mss: u32,
    pub transport_min_rto_ms: f64,
    pub transport_send_buffer_bytes: u64,

    pub uav_trajectory: TrajectoryKind,
    pub uav_speed_mps: f64,
    pub uav_altitude_m: f64,
    pub uav_dwell_s: f64,
    pub uav_rect_width_m: f64,
    pub uav_rect_height_m: f64,
    pub uav_orbit_radius_m: f64,
    pub uav_drain_per_s: f64,
    pub bs_height_m: f64,
    pub ground_n_nodes: usize,
    pub ground_radius_m: f64,
    pub ground_height_m: f64,

    pub telemetry_enabled: bool,
    pub telemetry_freq_hz: f64,
    pub telemetry_payload_bytes: u32,
    pub task_size_kb: f64,
    pub task_period_s: f64,
    pub exogenous_rate_mbps: f64,
    pub exogenous_packet_bytes: u32,
    pub estimator_mode: EstimatorMode,
    pub error_sample_ms: f64,
    pub error_three_d: bool,
    pub trace_exogenous: bool,

    pub stub_delay_ms: f64,
    pub stub_loss: f64,
    pub stub_jitter_ms: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            technology: Technology::Wifi,
            horizon_s: 60.0,
            seed: 1,
            presets: Vec::new(),

            pathloss_regime: Regime::Nlos,
            pathloss_c_model: CModel::LowerBound,
            pathloss_c_offset_db: 0.0,
            pathloss_diffraction_coeff_db: 100.0,
            pathloss_diffraction_floor_db: -132.8,
            pathloss_l_ew_db: 0.0,
            pathloss_g_h_db_per_m: -0.1,
            pathloss_g_h_cap_db: -6.0,
            shadowing_sigma_db: 3.0,
            shadowing_cell_m: 1.0,
            radio_noise_figure_db: 7.0,
            radio_softness_db: 1.0,

            wifi_bandwidth_mhz: 20.0,
            wifi_frequency_ghz: 5.18,
            wifi_tx_power_dbm: 20.0,
            wifi_retry_limit: 7,
            wifi_queue_frames: 400,
            wifi_backhaul_ms: 1.0,

            lte_bandwidth_mhz: 20.0,
            lte_n_prb: 100,
            lte_frequency_ghz: 2.0,
            lte_ue_tx_power_dbm: 23.0,
            lte_enb_tx_power_dbm: 30.0,
            lte_sr_period_ms: 5,
            lte_max_retx: 4,
            lte_overhead: 0.25,
            lte_rlc_retx_ms: 8,
            lte_rlc_buffer_bytes: 1_000_000,
            lte_cqi_period_ms: 10,
            lte_ul_max_cqi: 9,
            lte_core_delay_ms: 5.0,

            transport_mode: TransportMode::Reliable,
            transport_mss: 1460,
            transport_min_rto_ms: 200.0,
            transport_send_buffer_bytes: 256 * 1024,

            uav_trajectory: TrajectoryKind::Rectangle,
            uav_speed_mps: 5.0,
            uav_altitude_m: 30.0,
            uav_dwell_s: 2.0,
            uav_rect_width_m: 80.0,
            uav_rect_height_m: 60.0,
            uav_orbit_radius_m: 20.0,
            uav_drain_per_s: 0.001,
            bs_height_m: 10.0,
            ground_n_nodes: 0,
            ground_radius_m: 10.0,
            ground_height_m: 1.5,

            telemetry_enabled: true,
            telemetry_freq_hz: 10.0,
            telemetry_payload_bytes: 128,
            task_size_kb: 0.0,
            task_period_s: 1.0,
            exogenous_rate_mbps: 6.0,
            exogenous_packet_bytes: 800,
            estimator_mode: EstimatorMode::ZeroOrderHold,
            error_sample_ms: 10.0,
            error_three_d: true,
            trace_exogenous: false,

            stub_delay_ms: 0.0,
            stub_loss: 0.0,
            stub_jitter_ms: 0.0,
        }
    }
}

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

fn num(key: &str, v: &str, lo: f64, hi: f64) -> Result<f64, ConfigError> {
    let x: f64 = v.parse().map_err(|_| invalid(key, v, "not a number"))?;
    if !x.is_finite() || x < lo || x > hi {
        return Err(invalid(key, v, format!("must be within [{lo}, {hi}]")));
    }
    Ok(x)
}

fn positive(key: &str, v: &str, hi: f64) -> Result<f64, ConfigError> {
    let x = num(key, v, 0.0, hi)?;
    if x == 0.0 {
        return Err(invalid(key, v, "must be positive"));
    }
    Ok(x)
}

fn int(key: &str, v: &str, lo: i64, hi: i64) -> Result<i64, ConfigError> {
    let x: i64 = v.parse().map_err(|_| invalid(key, v, "not an integer"))?;
    if x < lo || x > hi {
        return Err(invalid(key, v, format!("must be within [{lo}, {hi}]")));
    }
    Ok(x)
}

fn boolean(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(invalid(key, v, "expected true or false")),
    }
}

fn choice<T: Copy>(key: &str, v: &str, options: &[(&str, T)]) -> Result<T, ConfigError> {
    options
        .iter()
        .find(|(name, _)| *name == v)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            invalid(key, v, format!("expected one of {}", names.join(", ")))
        })
}

fn c_model_str(m: CModel) -> &'static str {
    match m {
        CModel::Zero => "zero",
        CModel::LowerBound => "lower_bound",
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            pairs.push((i + 1, k.to_string(), v.to_string()));
        }
        let mut cfg = ScenarioConfig::default();
        for (_, k, v) in pairs.iter().filter(|(_, k, _)| k == "preset") {
            cfg.set(k, v)?;
        }
        for (line, k, v) in pairs.iter().filter(|(_, k, _)| k != "preset") {
            match cfg.set(k, v) {
                Err(ConfigError::UnknownKey { key, .. }) => return Err(ConfigError::UnknownKey { key, line: *line }),
                other => other?,
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one key; `preset` applies the named presets immediately.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        let k = key;
        match k {
            "technology" => {
                self.technology = choice(k, v, &[("wifi", Technology::Wifi), ("lte", Technology::Lte), ("stub", Technology::Stub)])?
            }
            "horizon_s" => self.horizon_s = positive(k, v, 1e6)?,
            "seed" => self.seed = v.parse().map_err(|_| invalid(k, v, "not an unsigned integer"))?,
            "preset" => {
                let mut ps = Vec::new();
                for name in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let p = Preset::parse(name).ok_or_else(|| {
                        invalid(k, name, "expected no_load, high_load, low_distance or high_distance")
                    })?;
                    p.apply(self);
                    ps.push(p);
                }
                self.presets = ps;
            }

            "pathloss.regime" => self.pathloss_regime = choice(k, v, &[("los", Regime::Los), ("nlos", Regime::Nlos)])?,
            "pathloss.c_model" => {
                self.pathloss_c_model = choice(k, v, &[("zero", CModel::Zero), ("lower_bound", CModel::LowerBound)])?
            }
            "pathloss.c_offset_db" => self.pathloss_c_offset_db = num(k, v, -100.0, 100.0)?,
            "pathloss.diffraction_coeff_db" => self.pathloss_diffraction_coeff_db = num(k, v, 0.0, 500.0)?,
            "pathloss.diffraction_floor_db" => self.pathloss_diffraction_floor_db = num(k, v, -1000.0, 1000.0)?,
            "pathloss.l_ew_db" => self.pathloss_l_ew_db = num(k, v, 0.0, 100.0)?,
            "pathloss.g_h_db_per_m" => self.pathloss_g_h_db_per_m = num(k, v, -10.0, 0.0)?,
            "pathloss.g_h_cap_db" => self.pathloss_g_h_cap_db = num(k, v, -100.0, 0.0)?,
            "shadowing.sigma_db" => self.shadowing_sigma_db = num(k, v, 0.0, 30.0)?,
            "shadowing.cell_m" => self.shadowing_cell_m = positive(k, v, 1e4)?,
            "radio.noise_figure_db" => self.radio_noise_figure_db = num(k, v, 0.0, 30.0)?,
            "radio.softness_db" => self.radio_softness_db = num(k, v, 0.0, 20.0)?,

            "wifi.standard" => {
                choice(k, v, &[("802.11a", ())])?;
            }
            "wifi.bandwidth_mhz" => self.wifi_bandwidth_mhz = choice(k, v, &[("20", 20.0)])?,
            "wifi.frequency_ghz" => self.wifi_frequency_ghz = positive(k, v, 100.0)?,
            "wifi.tx_power_dbm" => self.wifi_tx_power_dbm = num(k, v, -30.0, 40.0)?,
            "wifi.retry_limit" => self.wifi_retry_limit = int(k, v, 0, 32)? as u32,
            "wifi.queue_frames" => self.wifi_queue_frames = int(k, v, 1, 1_000_000)? as usize,
            "wifi.backhaul_ms" => self.wifi_backhaul_ms = num(k, v, 0.0, 10_000.0)?,

            "lte.bandwidth_mhz" => {
                self.lte_bandwidth_mhz =
                    choice(k, v, &[("1.4", 1.4), ("3", 3.0), ("5", 5.0), ("10", 10.0), ("15", 15.0), ("20", 20.0)])?
            }
            "lte.n_prb" => self.lte_n_prb = int(k, v, 1, 110)? as u32,
            "lte.frequency_ghz" => self.lte_frequency_ghz = positive(k, v, 100.0)?,
            "lte.ue_tx_power_dbm" => self.lte_ue_tx_power_dbm = num(k, v, -30.0, 40.0)?,
            "lte.enb_tx_power_dbm" => self.lte_enb_tx_power_dbm = num(k, v, -30.0, 60.0)?,
            "lte.sr_period_ms" => self.lte_sr_period_ms = int(k, v, 0, 1000)? as u64,
            "lte.rlc_mode" => {
                choice(k, v, &[("am", ())])?;
            }
            "lte.max_retx" => self.lte_max_retx = int(k, v, 0, 64)? as u32,
            "lte.overhead" => self.lte_overhead = num(k, v, 0.0, 0.99)?,
            "lte.rlc_retx_ms" => self.lte_rlc_retx_ms = int(k, v, 0, 10_000)? as u64,
            "lte.rlc_buffer_bytes" => self.lte_rlc_buffer_bytes = int(k, v, 1, 1 << 40)? as usize,
            "lte.cqi_period_ms" => self.lte_cqi_period_ms = int(k, v, 1, 100_000)? as u64,
            "lte.ul_max_cqi" => self.lte_ul_max_cqi = int(k, v, 1, 15)? as u8,
            "lte.core_delay_ms" => self.lte_core_delay_ms = num(k, v, 0.0, 10_000.0)?,

            "transport.mode" => {
                self.transport_mode = TransportMode::parse(v).ok_or_else(|| invalid(k, v, "expected reliable or datagram"))?
            }
            "transport.mss" => self.transport_mss = int(k, v, 64, 2264)? as u32,
            "transport.min_rto_ms" => self.transport_min_rto_ms = positive(k, v, 60_000.0)?,
            "transport.send_buffer_bytes" => self.transport_send_buffer_bytes = int(k, v, 1, 1 << 40)? as u64,

            "uav.trajectory" => {
                self.uav_trajectory =
                    choice(k, v, &[("rectangle", TrajectoryKind::Rectangle), ("orbit", TrajectoryKind::Orbit)])?
            }
            "uav.speed_mps" => self.uav_speed_mps = num(k, v, 0.0, 200.0)?,
            "uav.altitude_m" => self.uav_altitude_m = positive(k, v, 10_000.0)?,
            "uav.dwell_s" => self.uav_dwell_s = num(k, v, 0.0, 3600.0)?,
            "uav.rect_width_m" => self.uav_rect_width_m = positive(k, v, 100_000.0)?,
            "uav.rect_height_m" => self.uav_rect_height_m = positive(k, v, 100_000.0)?,
            "uav.orbit_radius_m" => self.uav_orbit_radius_m = num(k, v, 0.0, 100_000.0)?,
            "uav.drain_per_s" => self.uav_drain_per_s = num(k, v, 0.0, 1.0)?,
            "bs.height_m" => self.bs_height_m = positive(k, v, 10_000.0)?,
            "ground.n_nodes" => self.ground_n_nodes = int(k, v, 0, 1000)? as usize,
            "ground.radius_m" => self.ground_radius_m = positive(k, v, 100_000.0)?,
            "ground.height_m" => self.ground_height_m = positive(k, v, 10_000.0)?,

            "telemetry.enabled" => self.telemetry_enabled = boolean(k, v)?,
            "telemetry.freq_hz" => self.telemetry_freq_hz = positive(k, v, 1000.0)?,
            "telemetry.payload_bytes" => self.telemetry_payload_bytes = int(k, v, 1, 65_535)? as u32,
            "task.size_kb" => self.task_size_kb = num(k, v, 0.0, 100_000.0)?,
            "task.period_s" => self.task_period_s = positive(k, v, 3600.0)?,
            "exogenous.rate_mbps" => self.exogenous_rate_mbps = positive(k, v, 10_000.0)?,
            "exogenous.packet_bytes" => self.exogenous_packet_bytes = int(k, v, 1, 2304)? as u32,
            "estimator.mode" => {
                self.estimator_mode = EstimatorMode::parse(v).ok_or_else(|| invalid(k, v, "expected zoh or cv"))?
            }
            "error.sample_ms" => self.error_sample_ms = positive(k, v, 60_000.0)?,
            "error.three_d" => self.error_three_d = boolean(k, v)?,
            "trace.exogenous" => self.trace_exogenous = boolean(k, v)?,

            "stub.delay_ms" => self.stub_delay_ms = num(k, v, 0.0, 1e6)?,
            "stub.loss" => self.stub_loss = num(k, v, 0.0, 1.0)?,
            "stub.jitter_ms" => self.stub_jitter_ms = num(k, v, 0.0, 1e6)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    key: key.to_string(),
                    line: 0,
                })
            }
        }
        Ok(())
    }

    /// Cross-key checks.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let max_prb = (self.lte_bandwidth_mhz * 1000.0 / 180.0).floor() as u32;
        if self.lte_n_prb > max_prb {
            return Err(invalid(
                "lte.n_prb",
                &self.lte_n_prb.to_string(),
                format!("more PRBs than {} MHz carries ({max_prb})", self.lte_bandwidth_mhz),
            ));
        }
        if self.telemetry_enabled && self.telemetry_payload_bytes > self.transport_mss {
            return Err(invalid(
                "telemetry.payload_bytes",
                &self.telemetry_payload_bytes.to_string(),
                "telemetry must fit in one packet (transport.mss)",
            ));
        }
        if self.uav_trajectory == TrajectoryKind::Rectangle && self.uav_speed_mps == 0.0 {
            return Err(invalid("uav.speed_mps", "0", "rectangle trajectory needs a positive speed"));
        }
        if self.stub_jitter_ms > self.stub_delay_ms {
            return Err(invalid(
                "stub.jitter_ms",
                &self.stub_jitter_ms.to_string(),
                "jitter cannot exceed stub.delay_ms",
            ));
        }
        Ok(())
    }

    pub fn task_bytes(&self) -> u64 {
        (self.task_size_kb * 1000.0).round() as u64
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let f = |x: f64| x.to_string();
        let presets: Vec<&str> = self.presets.iter().map(|p| p.as_str()).collect();
        let mut e = vec![
            ("technology", self.technology.as_str().to_string()),
            ("horizon_s", f(self.horizon_s)),
            ("seed", self.seed.to_string()),
        ];
        if !presets.is_empty() {
            e.push(("preset", presets.join(",")));
        }
        e.extend([
            ("pathloss.regime", self.pathloss_regime.as_str().to_string()),
            ("pathloss.c_model", c_model_str(self.pathloss_c_model).to_string()),
            ("pathloss.c_offset_db", f(self.pathloss_c_offset_db)),
            ("pathloss.diffraction_coeff_db", f(self.pathloss_diffraction_coeff_db)),
            ("pathloss.diffraction_floor_db", f(self.pathloss_diffraction_floor_db)),
            ("pathloss.l_ew_db", f(self.pathloss_l_ew_db)),
            ("pathloss.g_h_db_per_m", f(self.pathloss_g_h_db_per_m)),
            ("pathloss.g_h_cap_db", f(self.pathloss_g_h_cap_db)),
            ("shadowing.sigma_db", f(self.shadowing_sigma_db)),
            ("shadowing.cell_m", f(self.shadowing_cell_m)),
            ("radio.noise_figure_db", f(self.radio_noise_figure_db)),
            ("radio.softness_db", f(self.radio_softness_db)),
            ("wifi.standard", "802.11a".to_string()),
            ("wifi.bandwidth_mhz", f(self.wifi_bandwidth_mhz)),
            ("wifi.frequency_ghz", f(self.wifi_frequency_ghz)),
            ("wifi.tx_power_dbm", f(self.wifi_tx_power_dbm)),
            ("wifi.retry_limit", self.wifi_retry_limit.to_string()),
            ("wifi.queue_frames", self.wifi_queue_frames.to_string()),
            ("wifi.backhaul_ms", f(self.wifi_backhaul_ms)),
            ("lte.bandwidth_mhz", f(self.lte_bandwidth_mhz)),
            ("lte.n_prb", self.lte_n_prb.to_string()),
            ("lte.frequency_ghz", f(self.lte_frequency_ghz)),
            ("lte.ue_tx_power_dbm", f(self.lte_ue_tx_power_dbm)),
            ("lte.enb_tx_power_dbm", f(self.lte_enb_tx_power_dbm)),
            ("lte.sr_period_ms", self.lte_sr_period_ms.to_string()),
            ("lte.rlc_mode", "am".to_string()),
            ("lte.max_retx", self.lte_max_retx.to_string()),
            ("lte.overhead", f(self.lte_overhead)),
            ("lte.rlc_retx_ms", self.lte_rlc_retx_ms.to_string()),
            ("lte.rlc_buffer_bytes", self.lte_rlc_buffer_bytes.to_string()),
            ("lte.cqi_period_ms", self.lte_cqi_period_ms.to_string()),
            ("lte.ul_max_cqi", self.lte_ul_max_cqi.to_string()),
            ("lte.core_delay_ms", f(self.lte_core_delay_ms)),
            ("transport.mode", self.transport_mode.as_str().to_string()),
            ("transport.mss", self.transport_mss.to_string()),
            ("transport.min_rto_ms", f(self.transport_min_rto_ms)),
            ("transport.send_buffer_bytes", self.transport_send_buffer_bytes.to_string()),
            ("uav.trajectory", self.uav_trajectory.as_str().to_string()),
            ("uav.speed_mps", f(self.uav_speed_mps)),
            ("uav.altitude_m", f(self.uav_altitude_m)),
            ("uav.dwell_s", f(self.uav_dwell_s)),
            ("uav.rect_width_m", f(self.uav_rect_width_m)),
            ("uav.rect_height_m", f(self.uav_rect_height_m)),
            ("uav.orbit_radius_m", f(self.uav_orbit_radius_m)),
            ("uav.drain_per_s", f(self.uav_drain_per_s)),
            ("bs.height_m", f(self.bs_height_m)),
            ("ground.n_nodes", self.ground_n_nodes.to_string()),
            ("ground.radius_m", f(self.ground_radius_m)),
            ("ground.height_m", f(self.ground_height_m)),
            ("telemetry.enabled", self.telemetry_enabled.to_string()),
            ("telemetry.freq_hz", f(self.telemetry_freq_hz)),
            ("telemetry.payload_bytes", self.telemetry_payload_bytes.to_string()),
            ("task.size_kb", f(self.task_size_kb)),
            ("task.period_s", f(self.task_period_s)),
            ("exogenous.rate_mbps", f(self.exogenous_rate_mbps)),
            ("exogenous.packet_bytes", self.exogenous_packet_bytes.to_string()),
            ("estimator.mode", self.estimator_mode.as_str().to_string()),
            ("error.sample_ms", f(self.error_sample_ms)),
            ("error.three_d", self.error_three_d.to_string()),
            ("trace.exogenous", self.trace_exogenous.to_string()),
            ("stub.delay_ms", f(self.stub_delay_ms)),
            ("stub.loss", f(self.stub_loss)),
            ("stub.jitter_ms", f(self.stub_jitter_ms)),
        ]);
        e
    }

    pub fn to_text(&self) -> String {
        self.entries().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
