//! The `key = value` scenario format.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Times are in seconds, distances in metres, sizes in bytes. Keys that are
//! not given keep their defaults; unknown keys are an error.

use std::fmt::Write as _;
use std::str::FromStr;

use manet_core::mobility::Area;
use manet_core::{ProtocolKind, Scenario, SimTime};

use crate::sweep::Axis;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },
}

impl From<manet_core::Error> for ScenarioError {
    fn from(e: manet_core::Error) -> Self {
        match e {
            manet_core::Error::Validation { field, reason } => {
                ScenarioError::Validation { field: field.to_string(), reason: reason.to_string() }
            }
            other => ScenarioError::Validation { field: "scenario".into(), reason: other.to_string() },
        }
    }
}

/// Sweep settings a scenario file may carry; command-line flags win.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepDefaults {
    pub axis: Option<Axis>,
    pub values: Option<Vec<String>>,
    pub reps: Option<u32>,
    pub protocols: Option<Vec<ProtocolKind>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioFile {
    pub scenario: Scenario,
    pub sweep: SweepDefaults,
}

fn parse_num<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T, ScenarioError> {
    value
        .parse()
        .map_err(|_| ScenarioError::Parse { line, message: format!("`{key}` expects a number, got `{value}`") })
}

fn parse_bool(key: &str, value: &str, line: usize) -> Result<bool, ScenarioError> {
    match value {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(ScenarioError::Parse { line, message: format!("`{key}` expects true or false, got `{value}`") }),
    }
}

pub fn parse_protocol(value: &str) -> Result<ProtocolKind, ScenarioError> {
    value.parse().map_err(|_| ScenarioError::Validation {
        field: "protocol".into(),
        reason: format!("unsupported protocol `{value}` (expected aodv, gpsr, crp or gpsr_greedy_only)"),
    })
}

pub fn parse_protocol_list(value: &str) -> Result<Vec<ProtocolKind>, ScenarioError> {
    value.split(',').map(|p| parse_protocol(p.trim())).collect()
}

fn secs(v: f64) -> SimTime {
    SimTime::from_secs_f64(v)
}

/// Parses a scenario file and validates the result.
pub fn parse_file(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let mut sc = Scenario::default();
    let mut sweep = SweepDefaults::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ScenarioError::Parse { line, message: format!("expected `key = value`, got `{content}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        let f = |v: &str| parse_num::<f64>(key, v, line);
        let u = |v: &str| parse_num::<u32>(key, v, line);
        match key {
            "scenario_id" => sc.scenario_id = value.to_string(),
            "protocol" => sc.protocol = parse_protocol(value)?,
            "n_nodes" => sc.n_nodes = u(value)?,
            "area_width" => sc.area = Area::new(f(value)?, sc.area.height),
            "area_height" => sc.area = Area::new(sc.area.width, f(value)?),
            "range" => sc.radio.range = f(value)?,
            "bandwidth" => sc.radio.bandwidth_bps = parse_num(key, value, line)?,
            "processing_delay" => sc.radio.processing_delay = secs(f(value)?),
            "jitter_max" => sc.radio.jitter_max = secs(f(value)?),
            "speed" => sc.speed = f(value)?,
            "pause" => sc.pause = f(value)?,
            "n_streams" => sc.n_streams = u(value)?,
            "rate" => sc.rate = f(value)?,
            "interval" => {
                let i = f(value)?;
                if i <= 0.0 {
                    return Err(ScenarioError::Validation { field: "interval".into(), reason: "must be positive".into() });
                }
                sc.rate = 1.0 / i;
            }
            "packet_size" => sc.packet_size = u(value)?,
            "duration" => sc.duration = f(value)?,
            "seed" => sc.seed = parse_num(key, value, line)?,
            "traffic_warmup" => sc.traffic_warmup = f(value)?,
            "ttl" => sc.data_ttl = u(value)?,
            "rreq_ttl" => sc.rreq_ttl = u(value)?,
            "route_lifetime" => sc.aodv.route_lifetime = f(value)?,
            "max_retries" => sc.aodv.max_retries = u(value)?,
            "buffer_cap" => sc.aodv.buffer_cap = u(value)?,
            "control_size" => sc.aodv.control_size = u(value)?,
            "discovery_timeout" => {
                sc.aodv.discovery_timeout = if value == "auto" { None } else { Some(f(value)?) };
            }
            "hello" => sc.aodv.hello = parse_bool(key, value, line)?,
            "hello_interval" => sc.aodv.hello_interval = f(value)?,
            "allowed_hello_loss" => sc.aodv.allowed_hello_loss = u(value)?,
            "hello_size" => sc.aodv.hello_size = u(value)?,
            "beacon_interval" => sc.gpsr.beacon_interval = f(value)?,
            "beacon_jitter" => sc.gpsr.beacon_jitter = f(value)?,
            "neighbor_timeout" => sc.gpsr.neighbor_timeout = f(value)?,
            "beacon_size" => sc.gpsr.beacon_size = u(value)?,
            "perimeter_enabled" => sc.gpsr.perimeter_enabled = parse_bool(key, value, line)?,
            "escape_cache" => sc.crp.escape_cache = parse_bool(key, value, line)?,
            "reanchor_on_route_loss" => sc.crp.reanchor_on_route_loss = parse_bool(key, value, line)?,
            "sweep_axis" => {
                sweep.axis = Some(value.parse().map_err(|reason| ScenarioError::Validation {
                    field: "sweep_axis".into(),
                    reason,
                })?)
            }
            "sweep_values" => sweep.values = Some(value.split(',').map(|v| v.trim().to_string()).collect()),
            "sweep_reps" => sweep.reps = Some(u(value)?),
            "sweep_protocols" => sweep.protocols = Some(parse_protocol_list(value)?),
            _ => return Err(ScenarioError::Parse { line, message: format!("unknown key `{key}`") }),
        }
    }
    sc.validate()?;
    Ok(ScenarioFile { scenario: sc, sweep })
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    parse_file(text).map(|f| f.scenario)
}

/// Every scenario key with its value, in a form `parse_scenario` reads back.
pub fn render(sc: &Scenario) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("scenario_id", sc.scenario_id.clone());
    kv("protocol", sc.protocol.name().into());
    kv("n_nodes", sc.n_nodes.to_string());
    kv("area_width", sc.area.width.to_string());
    kv("area_height", sc.area.height.to_string());
    kv("range", sc.radio.range.to_string());
    kv("bandwidth", sc.radio.bandwidth_bps.to_string());
    kv("processing_delay", sc.radio.processing_delay.as_secs_f64().to_string());
    kv("jitter_max", sc.radio.jitter_max.as_secs_f64().to_string());
    kv("speed", sc.speed.to_string());
    kv("pause", sc.pause.to_string());
    kv("n_streams", sc.n_streams.to_string());
    kv("rate", sc.rate.to_string());
    kv("packet_size", sc.packet_size.to_string());
    kv("duration", sc.duration.to_string());
    kv("seed", sc.seed.to_string());
    kv("traffic_warmup", sc.traffic_warmup.to_string());
    kv("ttl", sc.data_ttl.to_string());
    kv("rreq_ttl", sc.rreq_ttl.to_string());
    kv("route_lifetime", sc.aodv.route_lifetime.to_string());
    kv("max_retries", sc.aodv.max_retries.to_string());
    kv("buffer_cap", sc.aodv.buffer_cap.to_string());
    kv("control_size", sc.aodv.control_size.to_string());
    kv("discovery_timeout", sc.aodv.discovery_timeout.map_or_else(|| "auto".to_string(), |t| t.to_string()));
    kv("hello", sc.aodv.hello.to_string());
    kv("hello_interval", sc.aodv.hello_interval.to_string());
    kv("allowed_hello_loss", sc.aodv.allowed_hello_loss.to_string());
    kv("hello_size", sc.aodv.hello_size.to_string());
    kv("beacon_interval", sc.gpsr.beacon_interval.to_string());
    kv("beacon_jitter", sc.gpsr.beacon_jitter.to_string());
    kv("neighbor_timeout", sc.gpsr.neighbor_timeout.to_string());
    kv("beacon_size", sc.gpsr.beacon_size.to_string());
    kv("perimeter_enabled", sc.gpsr.perimeter_enabled.to_string());
    kv("escape_cache", sc.crp.escape_cache.to_string());
    kv("reanchor_on_route_loss", sc.crp.reanchor_on_route_loss.to_string());
    out
}
