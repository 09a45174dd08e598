//! Experiment description and single-run driver.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::aodv::{self, AodvConfig, AodvNode};
use crate::crp::{CrpConfig, CrpNode};
use crate::error::Error;
use crate::gpsr::{GpsrConfig, GpsrNode};
use crate::metrics::{LogRecord, MetricsRow, RunMeta};
use crate::mobility::{random_waypoint_trace, Area, WaypointTrace};
use crate::packet::NodeId;
use crate::radio::RadioConfig;
use crate::rng::RngStream;
use crate::sim::{SimConfig, Simulation, World};
use crate::time::SimTime;
use crate::traffic::{make_streams, CbrStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProtocolKind {
    Aodv,
    Gpsr,
    Crp,
    /// GPSR with perimeter mode disabled.
    GpsrGreedyOnly,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 4] =
        [ProtocolKind::Aodv, ProtocolKind::Gpsr, ProtocolKind::Crp, ProtocolKind::GpsrGreedyOnly];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Aodv => "aodv",
            ProtocolKind::Gpsr => "gpsr",
            ProtocolKind::Crp => "crp",
            ProtocolKind::GpsrGreedyOnly => "gpsr_greedy_only",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        ProtocolKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or(Error::Validation { field: "protocol", reason: "expected one of aodv, gpsr, crp, gpsr_greedy_only" })
    }
}

/// AODV knobs; times in seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AodvSettings {
    pub route_lifetime: f64,
    pub max_retries: u32,
    pub buffer_cap: u32,
    pub control_size: u32,
    /// Overrides the computed discovery timeout when set.
    pub discovery_timeout: Option<f64>,
    pub hello: bool,
    pub hello_interval: f64,
    pub allowed_hello_loss: u32,
    pub hello_size: u32,
}

impl Default for AodvSettings {
    fn default() -> Self {
        AodvSettings {
            route_lifetime: 10.0,
            max_retries: 2,
            buffer_cap: 64,
            control_size: 64,
            discovery_timeout: None,
            hello: false,
            hello_interval: 1.0,
            allowed_hello_loss: 2,
            hello_size: 32,
        }
    }
}

/// GPSR knobs (also used by the combined protocol's beacons); seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GpsrSettings {
    pub beacon_interval: f64,
    pub beacon_jitter: f64,
    pub neighbor_timeout: f64,
    pub beacon_size: u32,
    pub perimeter_enabled: bool,
}

impl Default for GpsrSettings {
    fn default() -> Self {
        GpsrSettings { beacon_interval: 1.0, beacon_jitter: 0.25, neighbor_timeout: 4.5, beacon_size: 32, perimeter_enabled: true }
    }
}

/// One experiment. Defaults reproduce the 30-node, 1000 m x 1000 m,
/// 512-byte, 4 packets/s, 500 s load scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub scenario_id: String,
    pub n_nodes: u32,
    pub area: Area,
    pub protocol: ProtocolKind,
    pub radio: RadioConfig,
    /// m/s
    pub speed: f64,
    /// seconds
    pub pause: f64,
    pub n_streams: u32,
    /// packets per second per stream
    pub rate: f64,
    pub packet_size: u32,
    /// seconds
    pub duration: f64,
    pub seed: u64,
    /// Streams start uniformly in `[traffic_warmup, traffic_warmup + 10 s)`.
    pub traffic_warmup: f64,
    pub data_ttl: u32,
    pub rreq_ttl: u32,
    pub aodv: AodvSettings,
    pub gpsr: GpsrSettings,
    pub crp: CrpConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            scenario_id: String::from("default"),
            n_nodes: 30,
            area: Area::new(1000.0, 1000.0),
            protocol: ProtocolKind::Crp,
            radio: RadioConfig::default(),
            speed: 20.0,
            pause: 40.0,
            n_streams: 20,
            rate: 4.0,
            packet_size: 512,
            duration: 500.0,
            seed: 1,
            traffic_warmup: 0.0,
            data_ttl: 32,
            rreq_ttl: 32,
            aodv: AodvSettings::default(),
            gpsr: GpsrSettings::default(),
            crp: CrpConfig::default(),
        }
    }
}

fn invalid(field: &'static str, reason: &'static str) -> Error {
    Error::Validation { field, reason }
}

fn positive(field: &'static str, v: f64) -> Result<(), Error> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, "must be a positive finite number"))
    }
}

fn non_negative(field: &'static str, v: f64) -> Result<(), Error> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, "must be a non-negative finite number"))
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n_nodes < 2 {
            return Err(invalid("n_nodes", "need at least two nodes"));
        }
        positive("area_width", self.area.width)?;
        positive("area_height", self.area.height)?;
        positive("range", self.radio.range)?;
        if self.radio.bandwidth_bps == 0 {
            return Err(invalid("bandwidth", "must be positive"));
        }
        positive("speed", self.speed)?;
        non_negative("pause", self.pause)?;
        if self.n_streams == 0 {
            return Err(invalid("n_streams", "must be at least 1"));
        }
        positive("rate", self.rate)?;
        if self.packet_size == 0 {
            return Err(invalid("packet_size", "must be positive"));
        }
        non_negative("duration", self.duration)?;
        non_negative("traffic_warmup", self.traffic_warmup)?;
        if self.data_ttl == 0 {
            return Err(invalid("ttl", "must be at least 1"));
        }
        if self.rreq_ttl == 0 {
            return Err(invalid("rreq_ttl", "must be at least 1"));
        }
        positive("route_lifetime", self.aodv.route_lifetime)?;
        if self.aodv.buffer_cap == 0 {
            return Err(invalid("buffer_cap", "must be at least 1"));
        }
        if self.aodv.control_size == 0 {
            return Err(invalid("control_size", "must be positive"));
        }
        if let Some(t) = self.aodv.discovery_timeout {
            positive("discovery_timeout", t)?;
        }
        positive("hello_interval", self.aodv.hello_interval)?;
        if self.aodv.allowed_hello_loss == 0 {
            return Err(invalid("allowed_hello_loss", "must be at least 1"));
        }
        positive("beacon_interval", self.gpsr.beacon_interval)?;
        non_negative("beacon_jitter", self.gpsr.beacon_jitter)?;
        if self.gpsr.beacon_jitter >= self.gpsr.beacon_interval {
            return Err(invalid("beacon_jitter", "must be smaller than beacon_interval"));
        }
        positive("neighbor_timeout", self.gpsr.neighbor_timeout)?;
        if self.gpsr.beacon_size == 0 || self.aodv.hello_size == 0 {
            return Err(invalid("beacon_size", "must be positive"));
        }
        Ok(())
    }

    pub fn horizon(&self) -> SimTime {
        SimTime::from_secs_f64(self.duration)
    }

    pub fn sim_config(&self, record_log: bool) -> SimConfig {
        SimConfig { radio: self.radio, data_ttl: self.data_ttl, horizon: self.horizon(), seed: self.seed, record_log }
    }

    /// Random-waypoint traces for every node. Depends only on the seed and
    /// the mobility fields, so every protocol sees the same motion.
    pub fn traces(&self) -> Vec<WaypointTrace> {
        let mut rng = RngStream::new(self.seed, "mobility");
        (0..self.n_nodes)
            .map(|i| {
                random_waypoint_trace(
                    NodeId(i),
                    self.area,
                    self.speed,
                    SimTime::from_secs_f64(self.pause),
                    self.horizon(),
                    &mut rng,
                )
            })
            .collect()
    }

    pub fn streams(&self) -> Vec<CbrStream> {
        let mut rng = RngStream::new(self.seed, "traffic");
        make_streams(
            self.n_streams as usize,
            self.n_nodes,
            self.packet_size,
            SimTime::from_secs_f64(1.0 / self.rate).max(SimTime::from_micros(1)),
            SimTime::from_secs_f64(self.traffic_warmup),
            self.horizon(),
            &mut rng,
        )
    }

    pub fn aodv_config(&self) -> AodvConfig {
        let a = &self.aodv;
        let mut cfg = AodvConfig::new(&self.radio, self.rreq_ttl);
        cfg.route_lifetime = SimTime::from_secs_f64(a.route_lifetime);
        cfg.max_retries = a.max_retries;
        cfg.buffer_cap = a.buffer_cap as usize;
        cfg.control_size = a.control_size;
        cfg.discovery_timeout = match a.discovery_timeout {
            Some(t) => SimTime::from_secs_f64(t),
            None => aodv::discovery_timeout(&self.radio, self.rreq_ttl, a.control_size),
        };
        cfg.hello = a.hello;
        cfg.hello_interval = SimTime::from_secs_f64(a.hello_interval);
        cfg.allowed_hello_loss = a.allowed_hello_loss;
        cfg.hello_size = a.hello_size;
        cfg
    }

    pub fn gpsr_config(&self) -> GpsrConfig {
        let g = &self.gpsr;
        GpsrConfig {
            beacon_interval: SimTime::from_secs_f64(g.beacon_interval),
            beacon_jitter: SimTime::from_secs_f64(g.beacon_jitter),
            neighbor_timeout: SimTime::from_secs_f64(g.neighbor_timeout),
            beacon_size: g.beacon_size,
            perimeter_enabled: g.perimeter_enabled && self.protocol != ProtocolKind::GpsrGreedyOnly,
        }
    }

    pub fn meta(&self) -> RunMeta {
        RunMeta {
            protocol: String::from(self.protocol.name()),
            scenario_id: self.scenario_id.clone(),
            seed: self.seed,
            n_nodes: self.n_nodes,
            pause_s: self.pause,
            rate_pps: self.rate,
        }
    }

    /// Builds a ready-to-run simulation on the given traces and streams.
    pub fn build(&self, traces: Vec<WaypointTrace>, streams: Vec<CbrStream>, record_log: bool) -> AnySimulation {
        let cfg = self.sim_config(record_log);
        let ids = (0..traces.len() as u32).map(NodeId);
        match self.protocol {
            ProtocolKind::Aodv => {
                let a = self.aodv_config();
                let nodes = ids.map(|id| AodvNode::new(id, a, self.seed)).collect();
                AnySimulation::Aodv(Simulation::new(cfg, traces, streams, nodes))
            }
            ProtocolKind::Gpsr | ProtocolKind::GpsrGreedyOnly => {
                let g = self.gpsr_config();
                let nodes = ids.map(|id| GpsrNode::new(id, g, self.seed)).collect();
                AnySimulation::Gpsr(Simulation::new(cfg, traces, streams, nodes))
            }
            ProtocolKind::Crp => {
                let (g, a) = (self.gpsr_config(), self.aodv_config());
                let nodes = ids.map(|id| CrpNode::new(id, self.crp, g, a, self.seed)).collect();
                AnySimulation::Crp(Simulation::new(cfg, traces, streams, nodes))
            }
        }
    }
}

/// A simulation of any supported protocol.
pub enum AnySimulation {
    Aodv(Simulation<AodvNode>),
    Gpsr(Simulation<GpsrNode>),
    Crp(Simulation<CrpNode>),
}

impl AnySimulation {
    pub fn run(&mut self) -> usize {
        match self {
            AnySimulation::Aodv(s) => s.run(),
            AnySimulation::Gpsr(s) => s.run(),
            AnySimulation::Crp(s) => s.run(),
        }
    }

    pub fn world(&self) -> &World {
        match self {
            AnySimulation::Aodv(s) => s.world(),
            AnySimulation::Gpsr(s) => s.world(),
            AnySimulation::Crp(s) => s.world(),
        }
    }

    pub fn finish(&self, meta: RunMeta) -> Result<MetricsRow, Error> {
        match self {
            AnySimulation::Aodv(s) => s.finish(meta),
            AnySimulation::Gpsr(s) => s.finish(meta),
            AnySimulation::Crp(s) => s.finish(meta),
        }
    }
}

/// Result of a run that kept its event log.
pub struct RunOutput {
    pub row: MetricsRow,
    pub log: Option<Vec<LogRecord>>,
}

/// Runs `scenario` on explicit traces and streams.
pub fn run_with(
    scenario: &Scenario,
    traces: Vec<WaypointTrace>,
    streams: Vec<CbrStream>,
    record_log: bool,
) -> Result<RunOutput, Error> {
    scenario.validate()?;
    let mut sim = scenario.build(traces, streams, record_log);
    sim.run();
    let row = sim.finish(scenario.meta())?;
    let log = sim.world().log().map(|l| l.to_vec());
    Ok(RunOutput { row, log })
}

/// Generates traces and traffic from the scenario's seed, runs it to the
/// end and returns the metrics row.
pub fn run_one(scenario: &Scenario) -> Result<MetricsRow, Error> {
    scenario.validate()?;
    run_with(scenario, scenario.traces(), scenario.streams(), false).map(|o| o.row)
}
