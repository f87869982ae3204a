//! Discrete-event engine: event queue, unit-disk radio, random-waypoint
//! mobility and CBR sources driving one [`NodeState`] per node.
//!
//! Randomness comes from a single 64-bit seed split into independent ChaCha8
//! streams (placement and mobility, radio, hello phases). Mobility and
//! traffic therefore do not depend on how many radio draws a routing policy
//! makes, and a baseline/variant pair run with one seed sees the same node
//! movement.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};
use core::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{distance_unchecked, meters_to_mm, CostWeights, Position};
use crate::metrics::{DropReason, MetricsCollector, MetricsReport, TrafficClass};
use crate::routing::{
    DataPacket, Effects, NodeState, Outbound, RoutingError, RoutingParams, TimerKey,
};
use crate::time::SimTime;
use crate::wire::{self, Addr, Message};

const STREAM_MOBILITY: u64 = 1;
const STREAM_RADIO: u64 = 2;
const STREAM_HELLO: u64 = 3;
const STREAM_TRAFFIC: u64 = 4;

/// Seeded generator for one purpose-specific stream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioModel {
    pub range_m: f64,
    /// Upper bound of the uniform per-frame delay added to `base_latency_us`.
    pub jitter_us: u64,
    pub base_latency_us: u64,
    pub loss_prob: f64,
}

impl Default for RadioModel {
    fn default() -> Self {
        RadioModel {
            range_m: 250.0,
            jitter_us: 2000,
            base_latency_us: 100,
            loss_prob: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MobilityKind {
    Static,
    RandomWaypoint {
        speed_min: f64,
        speed_max: f64,
        pause: SimTime,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityModel {
    pub kind: MobilityKind,
    pub step: SimTime,
}

impl Default for MobilityModel {
    fn default() -> Self {
        MobilityModel {
            kind: MobilityKind::RandomWaypoint {
                speed_min: 0.0,
                speed_max: 20.0,
                pause: SimTime::ZERO,
            },
            step: SimTime::from_millis(100),
        }
    }
}

/// Constant-bit-rate source: one `packet_size` payload every `interval`
/// from `start` (inclusive) to `stop` (exclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CbrFlow {
    pub src: Addr,
    pub dst: Addr,
    pub packet_size: u32,
    pub interval: SimTime,
    pub start: SimTime,
    pub stop: SimTime,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Placement {
    /// Uniform over the arena from the mobility stream.
    Random,
    Explicit(Vec<Position>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub node_count: usize,
    pub width_m: f64,
    pub height_m: f64,
    pub placement: Placement,
    pub radio: RadioModel,
    pub mobility: MobilityModel,
    pub flows: Vec<CbrFlow>,
    pub routing: RoutingParams,
    /// Periodic hellos; disabled when false.
    pub hello_enabled: bool,
    pub cost: CostWeights,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            node_count: 40,
            width_m: 1000.0,
            height_m: 1000.0,
            placement: Placement::Random,
            radio: RadioModel::default(),
            mobility: MobilityModel::default(),
            flows: Vec::new(),
            routing: RoutingParams::default(),
            hello_enabled: true,
            cost: CostWeights::default(),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    InvalidConfig(&'static str),
    SchedulingInPast { at: SimTime, now: SimTime },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::InvalidConfig(what) => write!(f, "invalid scenario: {what}"),
            SimError::SchedulingInPast { at, now } => {
                write!(f, "event scheduled at {at} us before current time {now} us")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SimError {}

/// Draws `count` distinct-endpoint source/destination pairs.
pub fn random_flow_pairs(seed: u64, node_count: usize, count: usize) -> Vec<(Addr, Addr)> {
    let mut rng = stream_rng(seed, STREAM_TRAFFIC);
    if node_count < 2 {
        return Vec::new();
    }
    (0..count)
        .map(|_| {
            let src = rng.gen_range(0..node_count as u32);
            let mut dst = rng.gen_range(0..node_count as u32 - 1);
            if dst >= src {
                dst += 1;
            }
            (Addr(src), Addr(dst))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    Control(Vec<u8>),
    Data(DataPacket),
}

impl Frame {
    pub fn bits(&self) -> u64 {
        match self {
            Frame::Control(b) => b.len() as u64 * 8,
            Frame::Data(p) => p.size as u64 * 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    Deliver {
        to: Addr,
        from: Addr,
        dist_mm: u32,
        frame: Frame,
    },
    HelloTick {
        node: Addr,
    },
    CbrSend {
        flow: u32,
    },
    MobilityStep,
    TimerExpiry {
        node: Addr,
        key: TimerKey,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Deliver { .. } => "deliver",
            EventKind::HelloTick { .. } => "hello",
            EventKind::CbrSend { .. } => "cbr",
            EventKind::MobilityStep => "mobility",
            EventKind::TimerExpiry { .. } => "timer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub fire_time: SimTime,
    pub seq_no: u64,
    pub kind: EventKind,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.fire_time, self.seq_no).cmp(&(other.fire_time, other.seq_no))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-queue ordered by `(fire_time, seq_no)`.
#[derive(Debug, Clone, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Event>>,
    next_seq: u64,
    now: SimTime,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|Reverse(e)| e.fire_time)
    }

    pub fn schedule(&mut self, fire_time: SimTime, kind: EventKind) -> Result<u64, SimError> {
        if fire_time < self.now {
            return Err(SimError::SchedulingInPast {
                at: fire_time,
                now: self.now,
            });
        }
        let seq_no = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Event {
            fire_time,
            seq_no,
            kind,
        }));
        Ok(seq_no)
    }

    /// Removes the earliest event and advances the clock to it.
    pub fn pop(&mut self) -> Option<Event> {
        let Reverse(e) = self.heap.pop()?;
        debug_assert!(e.fire_time >= self.now);
        self.now = e.fire_time;
        Some(e)
    }
}

/// One dispatched event, rendered as `time_us\tkind\tfrom\tto\tdetail`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub time: SimTime,
    pub kind: &'static str,
    pub from: Option<Addr>,
    pub to: Option<Addr>,
    pub detail: String,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |a: Option<Addr>| a.map_or(String::from("-"), |a| alloc::format!("{a}"));
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}",
            self.time,
            self.kind,
            opt(self.from),
            opt(self.to),
            self.detail
        )
    }
}

pub trait TraceSink {
    fn record(&mut self, rec: &TraceRecord);
}

/// Discards everything.
pub struct NoTrace;

impl TraceSink for NoTrace {
    fn record(&mut self, _rec: &TraceRecord) {}
}

impl TraceSink for Vec<TraceRecord> {
    fn record(&mut self, rec: &TraceRecord) {
        self.push(rec.clone());
    }
}

#[derive(Debug, Clone, PartialEq)]
enum WalkState {
    Moving,
    Pausing { until: SimTime },
}

#[derive(Debug, Clone, PartialEq)]
struct Walker {
    waypoint: Position,
    speed: f64,
    state: WalkState,
}

pub struct World {
    cfg: SimConfig,
    nodes: Vec<NodeState>,
    positions: Vec<Position>,
    walkers: Vec<Walker>,
    queue: EventQueue,
    rng_mobility: ChaCha8Rng,
    rng_radio: ChaCha8Rng,
    metrics: MetricsCollector,
    flow_next_seq: Vec<u32>,
    flow_by_pair: BTreeMap<(Addr, Addr), u32>,
    fx: Effects,
    dispatched: u64,
}

impl World {
    pub fn new(cfg: SimConfig) -> Result<World, SimError> {
        validate(&cfg)?;
        let n = cfg.node_count;
        let mut rng_mobility = stream_rng(cfg.seed, STREAM_MOBILITY);
        let rng_radio = stream_rng(cfg.seed, STREAM_RADIO);
        let mut rng_hello = stream_rng(cfg.seed, STREAM_HELLO);

        let positions: Vec<Position> = match &cfg.placement {
            Placement::Explicit(p) => p.clone(),
            Placement::Random => (0..n)
                .map(|_| uniform_point(&mut rng_mobility, cfg.width_m, cfg.height_m))
                .collect(),
        };
        let walkers = positions
            .iter()
            .map(|p| match cfg.mobility.kind {
                MobilityKind::Static => Walker {
                    waypoint: p.clone(),
                    speed: 0.0,
                    state: WalkState::Moving,
                },
                MobilityKind::RandomWaypoint {
                    speed_min,
                    speed_max,
                    ..
                } => Walker {
                    waypoint: uniform_point(&mut rng_mobility, cfg.width_m, cfg.height_m),
                    speed: uniform_speed(&mut rng_mobility, speed_min, speed_max),
                    state: WalkState::Moving,
                },
            })
            .collect();

        let nodes = (0..n)
            .map(|i| NodeState::new(Addr(i as u32), cfg.routing))
            .collect();

        let mut flow_by_pair = BTreeMap::new();
        for (i, f) in cfg.flows.iter().enumerate() {
            flow_by_pair.entry((f.src, f.dst)).or_insert(i as u32);
        }

        let mut world = World {
            metrics: MetricsCollector::new(cfg.flows.len()),
            flow_next_seq: alloc::vec![0; cfg.flows.len()],
            flow_by_pair,
            nodes,
            positions,
            walkers,
            queue: EventQueue::new(),
            rng_mobility,
            rng_radio,
            fx: Effects::new(),
            dispatched: 0,
            cfg,
        };

        if world.cfg.hello_enabled && world.cfg.routing.hello_interval > SimTime::ZERO {
            let interval = world.cfg.routing.hello_interval.as_micros();
            for i in 0..n {
                let phase = SimTime(rng_hello.gen_range(0..interval));
                world.queue.schedule(
                    phase,
                    EventKind::HelloTick {
                        node: Addr(i as u32),
                    },
                )?;
            }
        }
        for (i, f) in world.cfg.flows.clone().iter().enumerate() {
            if f.start < f.stop {
                world
                    .queue
                    .schedule(f.start, EventKind::CbrSend { flow: i as u32 })?;
            }
        }
        if world.is_mobile() {
            let step = world.cfg.mobility.step;
            world.queue.schedule(step, EventKind::MobilityStep)?;
        }
        Ok(world)
    }

    fn is_mobile(&self) -> bool {
        match self.cfg.mobility.kind {
            MobilityKind::Static => false,
            MobilityKind::RandomWaypoint { speed_max, .. } => speed_max > 0.0,
        }
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn now(&self) -> SimTime {
        self.queue.now()
    }

    pub fn node(&self, addr: Addr) -> &NodeState {
        &self.nodes[addr.0 as usize]
    }

    pub fn node_mut(&mut self, addr: Addr) -> &mut NodeState {
        &mut self.nodes[addr.0 as usize]
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn position(&self, addr: Addr) -> &Position {
        &self.positions[addr.0 as usize]
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn metrics(&self) -> &MetricsCollector {
        &self.metrics
    }

    pub fn pending_events(&self) -> usize {
        self.queue.len()
    }

    pub fn dispatched_events(&self) -> u64 {
        self.dispatched
    }

    /// Overrides a random-waypoint walker's current leg.
    pub fn set_waypoint(&mut self, addr: Addr, waypoint: Position, speed: f64) {
        let w = &mut self.walkers[addr.0 as usize];
        w.waypoint = waypoint;
        w.speed = speed;
        w.state = WalkState::Moving;
    }

    pub fn schedule(&mut self, at: SimTime, kind: EventKind) -> Result<u64, SimError> {
        self.queue.schedule(at, kind)
    }

    fn distance(&self, a: Addr, b: Addr) -> f64 {
        distance_unchecked(
            self.positions[a.0 as usize].coords(),
            self.positions[b.0 as usize].coords(),
        )
    }

    fn link_delay(&mut self) -> SimTime {
        let jitter = if self.cfg.radio.jitter_us > 0 {
            self.rng_radio.gen_range(0..=self.cfg.radio.jitter_us)
        } else {
            0
        };
        SimTime(self.cfg.radio.base_latency_us + jitter)
    }

    fn frame_lost(&mut self) -> bool {
        let p = self.cfg.radio.loss_prob;
        p > 0.0 && self.rng_radio.gen::<f64>() < p
    }

    /// Schedules a copy of `frame` to every node within range of `from`;
    /// returns how many deliveries were scheduled.
    pub fn broadcast(&mut self, from: Addr, frame: Frame, now: SimTime) -> usize {
        let mut scheduled = 0;
        for i in 0..self.nodes.len() {
            let to = Addr(i as u32);
            if to == from {
                continue;
            }
            let d = self.distance(from, to);
            if d > self.cfg.radio.range_m || self.frame_lost() {
                continue;
            }
            let at = now + self.link_delay();
            let kind = EventKind::Deliver {
                to,
                from,
                dist_mm: meters_to_mm(d),
                frame: frame.clone(),
            };
            self.queue
                .schedule(at, kind)
                .expect("delivery is never in the past");
            scheduled += 1;
        }
        scheduled
    }

    /// Schedules delivery to `to` if it is in range and the frame survives.
    /// Failed data frames are recorded as link losses.
    pub fn unicast(&mut self, from: Addr, to: Addr, frame: Frame, now: SimTime) -> bool {
        let d = self.distance(from, to);
        let ok = from != to && d <= self.cfg.radio.range_m && !self.frame_lost();
        if !ok {
            match &frame {
                Frame::Data(p) => {
                    self.metrics
                        .record_drop(p.flow, p.seq, p.hops, DropReason::LinkLoss)
                }
                Frame::Control(_) => self.metrics.record_control_drop(),
            }
            return false;
        }
        let at = now + self.link_delay();
        let kind = EventKind::Deliver {
            to,
            from,
            dist_mm: meters_to_mm(d),
            frame,
        };
        self.queue
            .schedule(at, kind)
            .expect("delivery is never in the past");
        true
    }

    /// Advances every walker by one mobility step.
    pub fn mobility_step(&mut self, now: SimTime) {
        let MobilityKind::RandomWaypoint {
            speed_min,
            speed_max,
            pause,
        } = self.cfg.mobility.kind
        else {
            return;
        };
        let dt = self.cfg.mobility.step.as_secs_f64();
        let (w, h) = (self.cfg.width_m, self.cfg.height_m);
        for (pos, walker) in self.positions.iter_mut().zip(self.walkers.iter_mut()) {
            if let WalkState::Pausing { until } = walker.state {
                if now < until {
                    continue;
                }
                walker.waypoint = uniform_point(&mut self.rng_mobility, w, h);
                walker.speed = uniform_speed(&mut self.rng_mobility, speed_min, speed_max);
                walker.state = WalkState::Moving;
            }
            if walker.speed <= 0.0 {
                continue;
            }
            let remaining = distance_unchecked(pos.coords(), walker.waypoint.coords());
            let travel = walker.speed * dt;
            if travel >= remaining {
                pos.coords_mut().copy_from_slice(walker.waypoint.coords());
                walker.state = WalkState::Pausing { until: now + pause };
            } else {
                let frac = travel / remaining;
                for (c, t) in pos.coords_mut().iter_mut().zip(walker.waypoint.coords()) {
                    *c += (t - *c) * frac;
                }
            }
            let c = pos.coords_mut();
            c[0] = c[0].clamp(0.0, w);
            if c.len() > 1 {
                c[1] = c[1].clamp(0.0, h);
            }
        }
    }

    /// Runs until the queue is empty or the next event is after `until`.
    pub fn run(&mut self, until: SimTime) -> MetricsReport {
        self.run_traced(until, &mut NoTrace)
    }

    pub fn run_traced(&mut self, until: SimTime, sink: &mut dyn TraceSink) -> MetricsReport {
        while self.queue.peek_time().is_some_and(|t| t <= until) {
            self.step(sink);
        }
        let end = if until == SimTime::MAX {
            self.now()
        } else {
            until
        };
        self.report(end)
    }

    /// Report as of `end`, without disturbing the running collector.
    pub fn report(&self, end: SimTime) -> MetricsReport {
        self.metrics.clone().finalize(&self.cfg.cost, end)
    }

    /// Dispatches one event; returns its time.
    pub fn step(&mut self, sink: &mut dyn TraceSink) -> Option<SimTime> {
        let ev = self.queue.pop()?;
        let now = ev.fire_time;
        self.dispatched += 1;
        let mut rec = TraceRecord {
            time: now,
            kind: ev.kind.name(),
            from: None,
            to: None,
            detail: String::new(),
        };
        match ev.kind {
            EventKind::Deliver {
                to,
                from,
                dist_mm,
                frame,
            } => {
                rec.from = Some(from);
                rec.to = Some(to);
                let node = &mut self.nodes[to.0 as usize];
                match frame {
                    Frame::Data(pkt) => {
                        let _ = write!(
                            rec.detail,
                            "data flow={} seq={} hops={}",
                            pkt.flow, pkt.seq, pkt.hops
                        );
                        self.metrics.record_data_rx(pkt.flow, pkt.size as u64);
                        node.receive_data(pkt, from, now, &mut self.fx);
                    }
                    Frame::Control(bytes) => match wire::decode(&bytes) {
                        Ok(msg) => {
                            describe(&msg, &mut rec.detail);
                            node.receive_message(&msg, from, dist_mm, now, &mut self.fx);
                        }
                        Err(e) => {
                            let _ = write!(rec.detail, "malformed {e}");
                            self.metrics.record_control_drop();
                        }
                    },
                }
                self.apply_effects(to, now);
            }
            EventKind::HelloTick { node } => {
                rec.from = Some(node);
                self.nodes[node.0 as usize].hello_tick(now, &mut self.fx);
                self.apply_effects(node, now);
                let next = now + self.cfg.routing.hello_interval;
                self.queue
                    .schedule(next, EventKind::HelloTick { node })
                    .expect("future");
            }
            EventKind::CbrSend { flow } => {
                let f = self.cfg.flows[flow as usize];
                let seq = self.flow_next_seq[flow as usize];
                self.flow_next_seq[flow as usize] += 1;
                rec.from = Some(f.src);
                rec.to = Some(f.dst);
                let _ = write!(rec.detail, "flow={flow} seq={seq}");
                self.metrics.record_sent(flow, seq, now);
                let pkt = DataPacket {
                    flow,
                    seq,
                    src: f.src,
                    dst: f.dst,
                    size: f.packet_size,
                    sent_at: now,
                    hops: 0,
                };
                self.nodes[f.src.0 as usize].send_data(pkt, now, &mut self.fx);
                self.apply_effects(f.src, now);
                let next = now + f.interval;
                if next < f.stop {
                    self.queue
                        .schedule(next, EventKind::CbrSend { flow })
                        .expect("future");
                }
            }
            EventKind::MobilityStep => {
                self.mobility_step(now);
                let next = now + self.cfg.mobility.step;
                self.queue
                    .schedule(next, EventKind::MobilityStep)
                    .expect("future");
            }
            EventKind::TimerExpiry { node, key } => {
                rec.from = Some(node);
                let TimerKey::DiscoveryDeadline(dest) = key;
                rec.to = Some(dest);
                rec.detail.push_str("discovery_deadline");
                self.nodes[node.0 as usize].on_timer(key, now, &mut self.fx);
                self.apply_effects(node, now);
            }
        }
        sink.record(&rec);
        Some(now)
    }

    fn apply_effects(&mut self, node: Addr, now: SimTime) {
        let mut fx = core::mem::take(&mut self.fx);
        for (at, key) in fx.timers.drain(..) {
            self.queue
                .schedule(at.max(now), EventKind::TimerExpiry { node, key })
                .expect("clamped to now");
        }
        for p in fx.delivered.drain(..) {
            self.metrics.record_received(p.flow, p.seq, p.hops, now);
        }
        for (p, reason) in fx.dropped.drain(..) {
            self.metrics.record_drop(p.flow, p.seq, p.hops, reason);
        }
        for e in fx.errors.drain(..) {
            if let RoutingError::NoReverseRoute { .. } = e {
                self.metrics.record_control_drop();
            }
        }
        for out in fx.frames.drain(..) {
            self.transmit(node, out, now);
        }
        fx.clear();
        self.fx = fx;
    }

    fn transmit(&mut self, from: Addr, out: Outbound, now: SimTime) {
        match out {
            Outbound::Data { to, packet } => {
                let bytes = packet.size as u64;
                self.metrics
                    .record_mac_submission(TrafficClass::Data, bytes * 8);
                self.metrics.record_data_tx(packet.flow, from, bytes);
                self.unicast(from, to, Frame::Data(packet), now);
            }
            Outbound::Broadcast(msg) => {
                let frame = self.control_frame(&msg);
                self.broadcast(from, frame, now);
            }
            Outbound::Unicast { to, msg } => {
                let frame = self.control_frame(&msg);
                self.unicast(from, to, frame, now);
            }
        }
    }

    fn control_frame(&mut self, msg: &Message) -> Frame {
        let bytes = wire::encode(msg).expect("routing emits encodable messages");
        let class = match msg {
            Message::Rreq(_) => TrafficClass::Rreq,
            Message::Rrep(_) => TrafficClass::Rrep,
            Message::Rerr(_) => TrafficClass::Rerr,
            Message::Hello(_) => TrafficClass::Hello,
        };
        self.metrics
            .record_mac_submission(class, bytes.len() as u64 * 8);
        let pair = match msg {
            Message::Rreq(m) => Some((m.orig_addr, m.dest_addr)),
            Message::Rrep(m) => Some((m.orig_addr, m.dest_addr)),
            _ => None,
        };
        if let Some(&flow) = pair.and_then(|p| self.flow_by_pair.get(&p)) {
            self.metrics.record_flow_control(flow);
        }
        Frame::Control(bytes)
    }
}

fn describe(msg: &Message, out: &mut String) {
    let _ = match msg {
        Message::Rreq(m) => write!(
            out,
            "rreq orig={} id={} dest={} hops={} cost={}",
            m.orig_addr,
            m.rreq_id,
            m.dest_addr,
            m.hop_count,
            m.acc_cost.map_or(-1, |c| c as i64)
        ),
        Message::Rrep(m) if m.hop_count == 0 && m.dest_addr == m.orig_addr => {
            write!(out, "hello seq={}", m.dest_seq)
        }
        Message::Rrep(m) => write!(
            out,
            "rrep orig={} dest={} seq={} hops={} cost={}",
            m.orig_addr,
            m.dest_addr,
            m.dest_seq,
            m.hop_count,
            m.acc_cost.map_or(-1, |c| c as i64)
        ),
        Message::Rerr(m) => write!(out, "rerr count={}", m.destinations.len()),
        Message::Hello(h) => write!(out, "hello seq={}", h.origin_seq),
    };
}

fn uniform_point(rng: &mut ChaCha8Rng, w: f64, h: f64) -> Position {
    Position::xy(rng.gen::<f64>() * w, rng.gen::<f64>() * h)
}

fn uniform_speed(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        lo
    } else {
        lo + rng.gen::<f64>() * (hi - lo)
    }
}

fn validate(cfg: &SimConfig) -> Result<(), SimError> {
    let bad = SimError::InvalidConfig;
    if cfg.node_count < 2 {
        return Err(bad("node_count must be at least 2"));
    }
    if !(cfg.width_m > 0.0 && cfg.height_m > 0.0) {
        return Err(bad("arena dimensions must be positive"));
    }
    if cfg.radio.range_m.is_nan() || cfg.radio.range_m <= 0.0 {
        return Err(bad("radio range must be positive"));
    }
    if !(0.0..=1.0).contains(&cfg.radio.loss_prob) {
        return Err(bad("loss probability must be within [0, 1]"));
    }
    if cfg.mobility.step == SimTime::ZERO {
        return Err(bad("mobility step must be positive"));
    }
    if let MobilityKind::RandomWaypoint {
        speed_min,
        speed_max,
        ..
    } = cfg.mobility.kind
    {
        if !(speed_min >= 0.0 && speed_max >= speed_min) {
            return Err(bad("speeds must satisfy 0 <= min <= max"));
        }
    }
    if let Placement::Explicit(p) = &cfg.placement {
        if p.len() != cfg.node_count {
            return Err(bad("explicit placement must list every node"));
        }
        let dim = p[0].dim();
        if dim == 0 || p.iter().any(|q| q.dim() != dim || !q.is_finite()) {
            return Err(bad("positions must share one dimension and be finite"));
        }
    }
    if !cfg.cost.is_valid() {
        return Err(bad("cost weights must be non-negative"));
    }
    for f in &cfg.flows {
        if f.src.0 as usize >= cfg.node_count || f.dst.0 as usize >= cfg.node_count {
            return Err(bad("flow endpoint is not a node"));
        }
        if f.src == f.dst {
            return Err(bad("flow source equals destination"));
        }
        if f.interval == SimTime::ZERO {
            return Err(bad("flow interval must be positive"));
        }
        if f.start >= f.stop {
            return Err(bad("flow must start before it stops"));
        }
    }
    Ok(())
}
