//! Flat `key = value` scenario files.
//!
//! Keys are dotted (`radio.range_m`), `#` starts a comment, blank lines are
//! ignored and anything not mentioned keeps its default. Durations are given
//! in seconds and stored at microsecond resolution.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use aodv_core::sim::{
    random_flow_pairs, CbrFlow, MobilityKind, MobilityModel, Placement, RadioModel,
};
use aodv_core::{Addr, CostWeights, PolicyKind, RoutingParams, SimConfig, SimTime};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Protocol {
    Baseline,
    Variant,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Baseline => "baseline",
            Protocol::Variant => "variant",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficSpec {
    /// Number of CBR flows drawn at random when `pairs` is empty.
    pub flows: usize,
    /// Explicit `(src, dst)` node indices, one per flow.
    pub pairs: Vec<(u32, u32)>,
    pub packet_size: u32,
    pub interval: SimTime,
    pub start: SimTime,
    /// Exclusive; defaults to the end of the run.
    pub stop: Option<SimTime>,
}

impl Default for TrafficSpec {
    fn default() -> Self {
        TrafficSpec {
            flows: 3,
            pairs: Vec::new(),
            packet_size: 512,
            interval: SimTime::from_millis(250),
            start: SimTime::from_secs(1),
            stop: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub node_count: usize,
    pub width_m: f64,
    pub height_m: f64,
    pub protocol: Protocol,
    /// Millimeters of cost charged per hop by the variant.
    pub lambda_hop_mm: u32,
    pub duration: SimTime,
    pub seed: u64,
    pub radio: RadioModel,
    pub mobility: MobilityModel,
    pub traffic: TrafficSpec,
    pub cost: CostWeights,
    /// `routing.policy` is ignored; `protocol` and `lambda_hop_mm` decide it.
    pub routing: RoutingParams,
    pub hello_enabled: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            node_count: 40,
            width_m: 1000.0,
            height_m: 1000.0,
            protocol: Protocol::Baseline,
            lambda_hop_mm: 0,
            duration: SimTime::from_secs(100),
            seed: 1,
            radio: RadioModel::default(),
            mobility: MobilityModel::default(),
            traffic: TrafficSpec::default(),
            cost: CostWeights::default(),
            routing: RoutingParams::default(),
            hello_enabled: true,
        }
    }
}

/// Where a setting came from: a file line or a `--set` override.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override => f.write_str("--set"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{origin}: expected `key = value`, got `{text}`")]
    Syntax { origin: Origin, text: String },
    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { key: String, origin: Origin },
    #[error("{origin}: `{key}` expects {expected}, got `{value}`")]
    TypeMismatch {
        key: String,
        origin: Origin,
        expected: &'static str,
        value: String,
    },
    #[error("{origin}: `{key}` {reason}")]
    ConstraintViolation {
        key: String,
        origin: Origin,
        reason: String,
    },
}

impl ConfigError {
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Syntax { .. } => None,
            ConfigError::UnknownKey { key, .. }
            | ConfigError::TypeMismatch { key, .. }
            | ConfigError::ConstraintViolation { key, .. } => Some(key),
        }
    }

    pub fn origin(&self) -> Origin {
        match self {
            ConfigError::Syntax { origin, .. }
            | ConfigError::UnknownKey { origin, .. }
            | ConfigError::TypeMismatch { origin, .. }
            | ConfigError::ConstraintViolation { origin, .. } => *origin,
        }
    }
}

/// Every recognised key, in rendering order.
pub const KEYS: &[&str] = &[
    "nodes",
    "arena",
    "protocol",
    "variant.lambda_hop_mm",
    "duration_s",
    "seed",
    "radio.range_m",
    "radio.base_latency_us",
    "radio.jitter_us",
    "radio.loss_prob",
    "mobility.model",
    "mobility.speed_min_mps",
    "mobility.speed_max_mps",
    "mobility.pause_s",
    "mobility.step_s",
    "traffic.flows",
    "traffic.pairs",
    "traffic.packet_size_b",
    "traffic.interval_s",
    "traffic.start_s",
    "traffic.stop_s",
    "cost.w_node",
    "cost.w_energy",
    "cost.e_tx_j_per_b",
    "cost.e_rx_j_per_b",
    "cost.w_loss",
    "aodv.hello",
    "aodv.hello_interval_s",
    "aodv.allowed_hello_loss",
    "aodv.active_route_lifetime_s",
    "aodv.discovery_wait_s",
    "aodv.max_retries",
    "aodv.net_diameter",
    "aodv.queue_capacity",
    "aodv.intermediate_replies",
    "aodv.destination_only",
];

/// Rejection reason before a key and origin are attached.
enum Bad {
    Type(&'static str),
    Constraint(String),
}

fn num<T: std::str::FromStr>(v: &str, expected: &'static str) -> Result<T, Bad> {
    v.parse().map_err(|_| Bad::Type(expected))
}

fn real(v: &str) -> Result<f64, Bad> {
    let x: f64 = num(v, "a number")?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Bad::Type("a finite number"))
    }
}

fn secs(v: &str) -> Result<SimTime, Bad> {
    let x = real(v)?;
    if x < 0.0 {
        return Err(Bad::Constraint("must not be negative".into()));
    }
    Ok(SimTime::from_secs_f64(x))
}

fn flag(v: &str) -> Result<bool, Bad> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Bad::Type("true or false")),
    }
}

fn pairs(v: &str) -> Result<Vec<(u32, u32)>, Bad> {
    const WANT: &str = "comma-separated src:dst pairs";
    v.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (s, d) = p.split_once(':').ok_or(Bad::Type(WANT))?;
            Ok((num(s.trim(), WANT)?, num(d.trim(), WANT)?))
        })
        .collect()
}

fn arena(v: &str) -> Result<(f64, f64), Bad> {
    const WANT: &str = "WIDTHxHEIGHT in meters";
    let (w, h) = v.split_once(['x', 'X']).ok_or(Bad::Type(WANT))?;
    let w: f64 = num(w.trim(), WANT)?;
    let h: f64 = num(h.trim(), WANT)?;
    Ok((w, h))
}

fn secs_str(t: SimTime) -> String {
    format!("{}", t.as_secs_f64())
}

impl ScenarioConfig {
    /// Applies one setting. `origin` is only used for error reporting.
    pub fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        self.apply(key, value).map_err(|bad| match bad {
            None => ConfigError::UnknownKey {
                key: key.to_owned(),
                origin,
            },
            Some(Bad::Type(expected)) => ConfigError::TypeMismatch {
                key: key.to_owned(),
                origin,
                expected,
                value: value.to_owned(),
            },
            Some(Bad::Constraint(reason)) => ConfigError::ConstraintViolation {
                key: key.to_owned(),
                origin,
                reason,
            },
        })
    }

    fn apply(&mut self, key: &str, v: &str) -> Result<(), Option<Bad>> {
        match key {
            "nodes" => self.node_count = num(v, "an unsigned integer")?,
            "arena" => (self.width_m, self.height_m) = arena(v)?,
            "protocol" => {
                self.protocol = match v {
                    "baseline" => Protocol::Baseline,
                    "variant" => Protocol::Variant,
                    _ => return Err(Some(Bad::Type("baseline or variant"))),
                }
            }
            "variant.lambda_hop_mm" => self.lambda_hop_mm = num(v, "an unsigned 32-bit integer")?,
            "duration_s" => self.duration = secs(v)?,
            "seed" => self.seed = num(v, "an unsigned 64-bit integer")?,
            "radio.range_m" => self.radio.range_m = real(v)?,
            "radio.base_latency_us" => self.radio.base_latency_us = num(v, "microseconds")?,
            "radio.jitter_us" => self.radio.jitter_us = num(v, "microseconds")?,
            "radio.loss_prob" => self.radio.loss_prob = real(v)?,
            "mobility.model" => {
                self.mobility.kind = match (v, self.mobility.kind) {
                    ("static", _) => MobilityKind::Static,
                    ("random_waypoint", k @ MobilityKind::RandomWaypoint { .. }) => k,
                    ("random_waypoint", MobilityKind::Static) => waypoint_defaults(),
                    _ => return Err(Some(Bad::Type("static or random_waypoint"))),
                }
            }
            "mobility.speed_min_mps" | "mobility.speed_max_mps" | "mobility.pause_s" => {
                let MobilityKind::RandomWaypoint {
                    speed_min,
                    speed_max,
                    pause,
                } = &mut self.mobility.kind
                else {
                    return Err(Some(Bad::Constraint(
                        "only applies to mobility.model = random_waypoint".into(),
                    )));
                };
                match key {
                    "mobility.speed_min_mps" => *speed_min = real(v)?,
                    "mobility.speed_max_mps" => *speed_max = real(v)?,
                    _ => *pause = secs(v)?,
                }
            }
            "mobility.step_s" => self.mobility.step = secs(v)?,
            "traffic.flows" => self.traffic.flows = num(v, "an unsigned integer")?,
            "traffic.pairs" => {
                self.traffic.pairs = pairs(v)?;
                if !self.traffic.pairs.is_empty() {
                    self.traffic.flows = self.traffic.pairs.len();
                }
            }
            "traffic.packet_size_b" => self.traffic.packet_size = num(v, "bytes")?,
            "traffic.interval_s" => self.traffic.interval = secs(v)?,
            "traffic.start_s" => self.traffic.start = secs(v)?,
            "traffic.stop_s" => self.traffic.stop = Some(secs(v)?),
            "cost.w_node" => self.cost.w_node = real(v)?,
            "cost.w_energy" => self.cost.w_energy = real(v)?,
            "cost.e_tx_j_per_b" => self.cost.e_tx = real(v)?,
            "cost.e_rx_j_per_b" => self.cost.e_rx = real(v)?,
            "cost.w_loss" => self.cost.w_loss = real(v)?,
            "aodv.hello" => self.hello_enabled = flag(v)?,
            "aodv.hello_interval_s" => self.routing.hello_interval = secs(v)?,
            "aodv.allowed_hello_loss" => {
                self.routing.allowed_hello_loss = num(v, "an unsigned integer")?
            }
            "aodv.active_route_lifetime_s" => self.routing.active_route_lifetime = secs(v)?,
            "aodv.discovery_wait_s" => self.routing.discovery_wait = secs(v)?,
            "aodv.max_retries" => self.routing.max_retries = num(v, "an unsigned integer")?,
            "aodv.net_diameter" => self.routing.net_diameter = num(v, "an integer in 1..=255")?,
            "aodv.queue_capacity" => self.routing.queue_capacity = num(v, "an unsigned integer")?,
            "aodv.intermediate_replies" => self.routing.intermediate_replies = flag(v)?,
            "aodv.destination_only" => self.routing.destination_only = flag(v)?,
            _ => return Err(None),
        }
        Ok(())
    }

    /// Checks cross-field invariants. `origins` maps keys to where they were set.
    fn validate(&self, origins: &BTreeMap<String, Origin>) -> Result<(), ConfigError> {
        let fail = |key: &str, reason: &str| {
            Err(ConfigError::ConstraintViolation {
                key: key.to_owned(),
                origin: origins.get(key).copied().unwrap_or(Origin::Line(0)),
                reason: reason.to_owned(),
            })
        };
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if self.node_count < 2 {
            return fail("nodes", "must be at least 2");
        }
        if self.node_count > u32::MAX as usize {
            return fail("nodes", "is too large");
        }
        if !positive(self.width_m) || !positive(self.height_m) {
            return fail("arena", "dimensions must be positive");
        }
        if self.duration == SimTime::ZERO {
            return fail("duration_s", "must be positive");
        }
        if !positive(self.radio.range_m) {
            return fail("radio.range_m", "must be positive");
        }
        if !(0.0..=1.0).contains(&self.radio.loss_prob) {
            return fail("radio.loss_prob", "must lie in [0, 1]");
        }
        if let MobilityKind::RandomWaypoint {
            speed_min,
            speed_max,
            ..
        } = self.mobility.kind
        {
            if speed_min < 0.0 {
                return fail("mobility.speed_min_mps", "must not be negative");
            }
            if speed_max < speed_min {
                return fail(
                    "mobility.speed_max_mps",
                    "must be at least mobility.speed_min_mps",
                );
            }
        }
        if self.mobility.step == SimTime::ZERO {
            return fail("mobility.step_s", "must be positive");
        }
        let n = self.node_count as u32;
        if !self.traffic.pairs.is_empty() && self.traffic.pairs.len() != self.traffic.flows {
            return fail(
                "traffic.flows",
                "disagrees with the number of traffic.pairs",
            );
        }
        for &(s, d) in &self.traffic.pairs {
            if s >= n || d >= n {
                return fail("traffic.pairs", "names a node index outside 0..nodes");
            }
            if s == d {
                return fail(
                    "traffic.pairs",
                    "has a flow whose source is its destination",
                );
            }
        }
        if self.traffic.packet_size == 0 {
            return fail("traffic.packet_size_b", "must be positive");
        }
        if self.traffic.interval == SimTime::ZERO {
            return fail("traffic.interval_s", "must be positive");
        }
        if self.flow_stop() < self.traffic.start {
            return fail("traffic.stop_s", "must not precede traffic.start_s");
        }
        if !self.cost.is_valid() {
            return fail(
                "cost.w_node",
                "cost weights must be finite and non-negative",
            );
        }
        if self.hello_enabled && self.routing.hello_interval == SimTime::ZERO {
            return fail(
                "aodv.hello_interval_s",
                "must be positive while hellos are enabled",
            );
        }
        if self.routing.allowed_hello_loss == 0 {
            return fail("aodv.allowed_hello_loss", "must be at least 1");
        }
        if self.routing.net_diameter == 0 {
            return fail("aodv.net_diameter", "must be at least 1");
        }
        if self.routing.discovery_wait == SimTime::ZERO {
            return fail("aodv.discovery_wait_s", "must be positive");
        }
        Ok(())
    }

    pub fn flow_stop(&self) -> SimTime {
        self.traffic.stop.unwrap_or(self.duration)
    }

    pub fn policy(&self) -> PolicyKind {
        match self.protocol {
            Protocol::Baseline => PolicyKind::Baseline,
            Protocol::Variant => PolicyKind::DistanceVariant {
                lambda_hop: self.lambda_hop_mm,
            },
        }
    }

    /// The same scenario under another protocol.
    pub fn with_protocol(&self, protocol: Protocol) -> ScenarioConfig {
        ScenarioConfig {
            protocol,
            ..self.clone()
        }
    }

    pub fn with_seed(&self, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            seed,
            ..self.clone()
        }
    }

    /// Flow endpoints: explicit pairs, or a draw from the traffic stream.
    pub fn flow_pairs(&self) -> Vec<(Addr, Addr)> {
        if self.traffic.pairs.is_empty() {
            random_flow_pairs(self.seed, self.node_count, self.traffic.flows)
        } else {
            self.traffic
                .pairs
                .iter()
                .map(|&(s, d)| (Addr(s), Addr(d)))
                .collect()
        }
    }

    pub fn to_sim_config(&self) -> SimConfig {
        let flows = self
            .flow_pairs()
            .into_iter()
            .map(|(src, dst)| CbrFlow {
                src,
                dst,
                packet_size: self.traffic.packet_size,
                interval: self.traffic.interval,
                start: self.traffic.start,
                stop: self.flow_stop(),
            })
            .collect();
        SimConfig {
            node_count: self.node_count,
            width_m: self.width_m,
            height_m: self.height_m,
            placement: Placement::Random,
            radio: self.radio,
            mobility: self.mobility,
            flows,
            routing: RoutingParams {
                policy: self.policy(),
                ..self.routing
            },
            hello_enabled: self.hello_enabled,
            cost: self.cost,
            seed: self.seed,
        }
    }

    /// Renders every key; parsing the result yields an equal config.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let (speed_min, speed_max, pause, model) = match self.mobility.kind {
            MobilityKind::Static => (None, None, None, "static"),
            MobilityKind::RandomWaypoint {
                speed_min,
                speed_max,
                pause,
            } => (
                Some(speed_min),
                Some(speed_max),
                Some(pause),
                "random_waypoint",
            ),
        };
        let pairs = self
            .traffic
            .pairs
            .iter()
            .map(|(s, d)| format!("{s}:{d}"))
            .collect::<Vec<_>>()
            .join(",");
        for &key in KEYS {
            let value = match key {
                "nodes" => self.node_count.to_string(),
                "arena" => format!("{}x{}", self.width_m, self.height_m),
                "protocol" => self.protocol.to_string(),
                "variant.lambda_hop_mm" => self.lambda_hop_mm.to_string(),
                "duration_s" => secs_str(self.duration),
                "seed" => self.seed.to_string(),
                "radio.range_m" => self.radio.range_m.to_string(),
                "radio.base_latency_us" => self.radio.base_latency_us.to_string(),
                "radio.jitter_us" => self.radio.jitter_us.to_string(),
                "radio.loss_prob" => self.radio.loss_prob.to_string(),
                "mobility.model" => model.to_owned(),
                "mobility.speed_min_mps" => match speed_min {
                    Some(x) => x.to_string(),
                    None => continue,
                },
                "mobility.speed_max_mps" => match speed_max {
                    Some(x) => x.to_string(),
                    None => continue,
                },
                "mobility.pause_s" => match pause {
                    Some(t) => secs_str(t),
                    None => continue,
                },
                "mobility.step_s" => secs_str(self.mobility.step),
                "traffic.flows" => self.traffic.flows.to_string(),
                "traffic.pairs" if pairs.is_empty() => continue,
                "traffic.pairs" => pairs.clone(),
                "traffic.packet_size_b" => self.traffic.packet_size.to_string(),
                "traffic.interval_s" => secs_str(self.traffic.interval),
                "traffic.start_s" => secs_str(self.traffic.start),
                "traffic.stop_s" => match self.traffic.stop {
                    Some(t) => secs_str(t),
                    None => continue,
                },
                "cost.w_node" => self.cost.w_node.to_string(),
                "cost.w_energy" => self.cost.w_energy.to_string(),
                "cost.e_tx_j_per_b" => self.cost.e_tx.to_string(),
                "cost.e_rx_j_per_b" => self.cost.e_rx.to_string(),
                "cost.w_loss" => self.cost.w_loss.to_string(),
                "aodv.hello" => self.hello_enabled.to_string(),
                "aodv.hello_interval_s" => secs_str(self.routing.hello_interval),
                "aodv.allowed_hello_loss" => self.routing.allowed_hello_loss.to_string(),
                "aodv.active_route_lifetime_s" => secs_str(self.routing.active_route_lifetime),
                "aodv.discovery_wait_s" => secs_str(self.routing.discovery_wait),
                "aodv.max_retries" => self.routing.max_retries.to_string(),
                "aodv.net_diameter" => self.routing.net_diameter.to_string(),
                "aodv.queue_capacity" => self.routing.queue_capacity.to_string(),
                "aodv.intermediate_replies" => self.routing.intermediate_replies.to_string(),
                "aodv.destination_only" => self.routing.destination_only.to_string(),
                other => unreachable!("unrendered key {other}"),
            };
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }
}

fn waypoint_defaults() -> MobilityKind {
    MobilityModel::default().kind
}

/// Splits `key=value` (as given to `--set`).
pub fn split_assignment(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    let k = k.trim();
    (!k.is_empty()).then(|| (k, v.trim()))
}

/// Parses a scenario file and then applies `overrides` in order.
pub fn parse_with_overrides(
    text: &str,
    overrides: &[(String, String)],
) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = ScenarioConfig::default();
    let mut origins = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let origin = Origin::Line(idx + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = split_assignment(line).ok_or_else(|| ConfigError::Syntax {
            origin,
            text: line.to_owned(),
        })?;
        cfg.set(key, value, origin)?;
        origins.insert(key.to_owned(), origin);
    }
    for (key, value) in overrides {
        cfg.set(key, value, Origin::Override)?;
        origins.insert(key.clone(), Origin::Override);
    }
    cfg.validate(&origins)?;
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_with_overrides(text, &[])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_and_arena_keys_give_defaults() {
        let cfg = parse_config("nodes = 40\narena = 1000x1000\n").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let cfg =
            parse_config("# scenario\n\nseed = 9   # trailing\n  protocol=variant\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.protocol, Protocol::Variant);
    }

    #[test]
    fn single_node_is_a_constraint_violation() {
        let err = parse_config("nodes = 1").unwrap_err();
        assert!(
            matches!(err, ConfigError::ConstraintViolation { ref key, origin: Origin::Line(1), .. } if key == "nodes")
        );
    }

    #[test]
    fn typo_is_an_unknown_key_with_its_line() {
        let err = parse_config("nodes = 40\nradio.rnage_m = 250\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey {
                key: "radio.rnage_m".into(),
                origin: Origin::Line(2)
            }
        );
        assert_eq!(err.to_string(), "line 2: unknown key `radio.rnage_m`");
    }

    #[test]
    fn wrong_type_names_key_and_line() {
        let err = parse_config("\n\nradio.range_m = far").unwrap_err();
        assert!(
            matches!(err, ConfigError::TypeMismatch { ref key, origin: Origin::Line(3), .. } if key == "radio.range_m")
        );
        assert!(parse_config("aodv.hello = yes").is_err());
        assert!(parse_config("arena = 1000").is_err());
    }

    #[test]
    fn zero_duration_is_rejected() {
        let err = parse_config("duration_s = 0").unwrap_err();
        assert_eq!(err.key(), Some("duration_s"));
    }

    #[test]
    fn missing_equals_is_a_syntax_error() {
        assert!(matches!(
            parse_config("nodes 40"),
            Err(ConfigError::Syntax { .. })
        ));
    }

    #[test]
    fn flow_endpoints_are_checked() {
        let err = parse_config("nodes = 4\ntraffic.pairs = 0:4").unwrap_err();
        assert_eq!(err.key(), Some("traffic.pairs"));
        assert!(parse_config("traffic.pairs = 2:2").is_err());
        let cfg = parse_config("traffic.pairs = 0:1, 3:2").unwrap();
        assert_eq!(cfg.traffic.flows, 2);
        assert!(parse_config("traffic.pairs = 0:1\ntraffic.flows = 3").is_err());
    }

    #[test]
    fn overrides_win_over_the_file() {
        let ov = vec![("seed".to_owned(), "77".to_owned())];
        let cfg = parse_with_overrides("seed = 3", &ov).unwrap();
        assert_eq!(cfg.seed, 77);
        let bad = vec![("nodes".to_owned(), "1".to_owned())];
        let err = parse_with_overrides("", &bad).unwrap_err();
        assert_eq!(err.origin(), Origin::Override);
    }

    #[test]
    fn render_round_trips_defaults_and_edits() {
        let base = ScenarioConfig::default();
        assert_eq!(parse_config(&base.render()).unwrap(), base);
        let text =
            "nodes = 12\narena = 300.5x200\nprotocol = variant\nvariant.lambda_hop_mm = 2500\n\
                    mobility.model = static\ntraffic.pairs = 1:2,3:4\ntraffic.stop_s = 7.25\n\
                    radio.loss_prob = 0.125\ncost.e_tx_j_per_b = 0.0000031\naodv.hello = false\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(parse_config(&cfg.render()).unwrap(), cfg);
    }

    #[test]
    fn shipped_scenario_is_the_default() {
        let text = include_str!("../../../scenarios/default.cfg");
        assert_eq!(parse_config(text).unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn every_key_is_accepted() {
        let rendered = ScenarioConfig::default().render();
        for key in KEYS {
            let known = rendered.lines().any(|l| l.starts_with(&format!("{key} =")));
            let optional = matches!(*key, "traffic.pairs" | "traffic.stop_s");
            assert!(known || optional, "{key}");
        }
    }

    #[test]
    fn sim_config_uses_protocol_and_pairs() {
        let cfg =
            parse_config("protocol = variant\nvariant.lambda_hop_mm = 5\ntraffic.pairs = 0:1")
                .unwrap();
        let sim = cfg.to_sim_config();
        assert_eq!(
            sim.routing.policy,
            PolicyKind::DistanceVariant { lambda_hop: 5 }
        );
        assert_eq!(sim.flows.len(), 1);
        assert_eq!(sim.flows[0].stop, SimTime::from_secs(100));
        let random = ScenarioConfig::default().to_sim_config();
        assert_eq!(random.flows.len(), 3);
    }
}
