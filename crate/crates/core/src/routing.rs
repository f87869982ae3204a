//! Per-node AODV state machine.
//!
//! A [`NodeState`] owns one node's routing table, duplicate cache, neighbor
//! liveness map and pending discoveries. Every handler takes the current
//! simulation time and appends the resulting transmissions, data-plane
//! outcomes and timer requests to an [`Effects`] buffer; nothing here touches
//! the radio or the clock directly.
//!
//! Route preference is selected by [`PolicyKind`]. `Baseline` prefers fewer
//! hops at equal sequence number. `DistanceVariant` carries the accumulated
//! Euclidean path cost (millimeters) in RREQ/RREP, re-forwards duplicate
//! requests that arrive over a strictly cheaper path, and prefers the route
//! with the smaller `cost + lambda_hop * hops`.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;
use core::fmt;

use crate::metrics::DropReason;
use crate::time::SimTime;
use crate::wire::{Addr, Hello, Message, Rerr, Rrep, RrepFlags, Rreq, RreqFlags, Unreachable};

/// `true` when `a` is newer than `b` under 32-bit sequence number rollover.
pub fn seq_newer(a: u32, b: u32) -> bool {
    (a.wrapping_sub(b) as i32) > 0
}

/// A destination sequence number that may not be known yet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeqNum {
    Unknown,
    Known(u32),
}

impl SeqNum {
    pub fn known(self) -> Option<u32> {
        match self {
            SeqNum::Known(s) => Some(s),
            SeqNum::Unknown => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    /// Fewest hops wins at equal sequence number.
    Baseline,
    /// Smallest `path_cost + lambda_hop * hop_count` wins at equal sequence
    /// number; costs and `lambda_hop` are in millimeters.
    DistanceVariant { lambda_hop: u32 },
}

impl PolicyKind {
    pub fn is_variant(self) -> bool {
        matches!(self, PolicyKind::DistanceVariant { .. })
    }

    /// Route metric compared at equal sequence numbers. Lower is better.
    pub fn metric(self, hop_count: u8, path_cost: u32) -> u64 {
        match self {
            PolicyKind::Baseline => hop_count as u64,
            PolicyKind::DistanceVariant { lambda_hop } => {
                path_cost as u64 + lambda_hop as u64 * hop_count as u64
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteEntry {
    pub dest_addr: Addr,
    pub next_hop: Addr,
    pub dest_seq: SeqNum,
    pub hop_count: u8,
    /// Accumulated Euclidean path cost in millimeters; zero under the baseline.
    pub path_cost: u32,
    pub lifetime_expiry: SimTime,
    pub precursors: BTreeSet<Addr>,
    pub valid: bool,
}

impl RouteEntry {
    pub fn is_active(&self, now: SimTime) -> bool {
        self.valid && self.lifetime_expiry > now
    }
}

/// A route offered to [`RoutingTable::update_route`]. `hop_count` already
/// includes the link the information arrived on; `expiry` is absolute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RouteCandidate {
    pub dest: Addr,
    pub next_hop: Addr,
    pub seq: SeqNum,
    pub hop_count: u8,
    pub cost: u32,
    pub expiry: SimTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOutcome {
    Accepted,
    /// Same sequence number, same next hop and same metric as the stored
    /// route; only the lifetime was extended.
    Refreshed,
    Rejected,
}

/// Four-clause acceptance rule shared by every route install.
pub fn accepts(
    existing: Option<&RouteEntry>,
    cand: &RouteCandidate,
    policy: PolicyKind,
    now: SimTime,
) -> bool {
    let Some(e) = existing.filter(|e| e.is_active(now)) else {
        return true;
    };
    match (e.dest_seq, cand.seq) {
        (SeqNum::Unknown, _) => true,
        (SeqNum::Known(_), SeqNum::Unknown) => false,
        (SeqNum::Known(old), SeqNum::Known(new)) => {
            seq_newer(new, old)
                || (new == old
                    && policy.metric(cand.hop_count, cand.cost)
                        < policy.metric(e.hop_count, e.path_cost))
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoutingTable {
    entries: BTreeMap<Addr, RouteEntry>,
}

impl RoutingTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, dest: Addr) -> Option<&RouteEntry> {
        self.entries.get(&dest)
    }

    pub fn get_mut(&mut self, dest: Addr) -> Option<&mut RouteEntry> {
        self.entries.get_mut(&dest)
    }

    /// The entry for `dest` if it is valid and unexpired.
    pub fn active(&self, dest: Addr, now: SimTime) -> Option<&RouteEntry> {
        self.entries.get(&dest).filter(|e| e.is_active(now))
    }

    pub fn iter(&self) -> impl Iterator<Item = &RouteEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inserts `entry` unconditionally.
    pub fn insert(&mut self, entry: RouteEntry) {
        self.entries.insert(entry.dest_addr, entry);
    }

    /// Offers a candidate route; returns whether it was taken.
    pub fn update_route(&mut self, cand: RouteCandidate, policy: PolicyKind, now: SimTime) -> bool {
        self.offer(cand, policy, now) == UpdateOutcome::Accepted
    }

    pub fn offer(
        &mut self,
        cand: RouteCandidate,
        policy: PolicyKind,
        now: SimTime,
    ) -> UpdateOutcome {
        let existing = self.entries.get(&cand.dest);
        if accepts(existing, &cand, policy, now) {
            let precursors = existing.map(|e| e.precursors.clone()).unwrap_or_default();
            self.entries.insert(
                cand.dest,
                RouteEntry {
                    dest_addr: cand.dest,
                    next_hop: cand.next_hop,
                    dest_seq: cand.seq,
                    hop_count: cand.hop_count,
                    path_cost: cand.cost,
                    lifetime_expiry: cand.expiry,
                    precursors,
                    valid: true,
                },
            );
            return UpdateOutcome::Accepted;
        }
        match self.entries.get_mut(&cand.dest) {
            Some(e)
                if e.is_active(now)
                    && e.next_hop == cand.next_hop
                    && e.dest_seq == cand.seq
                    && policy.metric(e.hop_count, e.path_cost)
                        == policy.metric(cand.hop_count, cand.cost) =>
            {
                e.lifetime_expiry = e.lifetime_expiry.max(cand.expiry);
                UpdateOutcome::Refreshed
            }
            _ => UpdateOutcome::Rejected,
        }
    }
}

/// Protocol timing and limits. Durations are simulation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoutingParams {
    pub policy: PolicyKind,
    pub hello_interval: SimTime,
    pub allowed_hello_loss: u32,
    pub active_route_lifetime: SimTime,
    pub discovery_wait: SimTime,
    pub max_retries: u32,
    /// Hop budget of a route request and of a data packet.
    pub net_diameter: u8,
    /// Payloads buffered per destination while a discovery is pending.
    pub queue_capacity: usize,
    /// Allow nodes holding a fresh enough route to answer for the destination.
    pub intermediate_replies: bool,
    /// Set the D flag on originated requests.
    pub destination_only: bool,
}

impl Default for RoutingParams {
    fn default() -> Self {
        RoutingParams {
            policy: PolicyKind::Baseline,
            hello_interval: SimTime::from_secs(1),
            allowed_hello_loss: 2,
            active_route_lifetime: SimTime::from_secs(3),
            discovery_wait: SimTime::from_secs(1),
            max_retries: 2,
            net_diameter: 35,
            queue_capacity: 64,
            intermediate_replies: true,
            destination_only: false,
        }
    }
}

impl RoutingParams {
    /// Silence after which a neighbor is considered gone.
    pub fn neighbor_timeout(&self) -> SimTime {
        SimTime(
            self.hello_interval
                .0
                .saturating_mul(self.allowed_hello_loss as u64),
        )
    }

    fn hello_lifetime_ms(&self) -> u32 {
        u32::try_from(self.neighbor_timeout().0 / 1000).unwrap_or(u32::MAX)
    }

    fn route_lifetime_ms(&self) -> u32 {
        u32::try_from(self.active_route_lifetime.0 / 1000).unwrap_or(u32::MAX)
    }

    /// How long a (originator, request id) pair is remembered.
    fn rreq_memory(&self) -> SimTime {
        SimTime(
            self.discovery_wait
                .0
                .saturating_mul(self.max_retries as u64 + 2),
        )
    }
}

/// One CBR payload as carried through the data plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DataPacket {
    pub flow: u32,
    pub seq: u32,
    pub src: Addr,
    pub dst: Addr,
    /// Payload bytes.
    pub size: u32,
    pub sent_at: SimTime,
    /// Links traversed so far.
    pub hops: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outbound {
    Broadcast(Message),
    Unicast { to: Addr, msg: Message },
    Data { to: Addr, packet: DataPacket },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TimerKey {
    DiscoveryDeadline(Addr),
}

/// Control-plane failures worth counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoutingError {
    /// An RREP reached a relay whose reverse route to the originator is gone.
    NoReverseRoute { orig: Addr },
    /// A data payload did not fit the pending-discovery queue.
    QueueOverflow { dest: Addr },
}

impl fmt::Display for RoutingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoutingError::NoReverseRoute { orig } => write!(f, "no reverse route to {orig}"),
            RoutingError::QueueOverflow { dest } => write!(f, "discovery queue for {dest} is full"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RoutingError {}

/// Everything a handler wants the outside world to do or know.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Effects {
    pub frames: Vec<Outbound>,
    pub delivered: Vec<DataPacket>,
    pub dropped: Vec<(DataPacket, DropReason)>,
    pub timers: Vec<(SimTime, TimerKey)>,
    pub errors: Vec<RoutingError>,
}

impl Effects {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clear(&mut self) {
        self.frames.clear();
        self.delivered.clear();
        self.dropped.clear();
        self.timers.clear();
        self.errors.clear();
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
            && self.delivered.is_empty()
            && self.dropped.is_empty()
            && self.timers.is_empty()
            && self.errors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingDiscovery {
    pub retries_left: u32,
    pub deadline: SimTime,
    pub rreq_id: u32,
    pub queued: VecDeque<DataPacket>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeenRreq {
    /// Cheapest accumulated cost seen so far (variant); zero under the baseline.
    pub best_cost: u32,
    pub first_seen: SimTime,
    /// Sequence number this node answered the flood with, if it is the target.
    pub reply_seq: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RreqAction {
    Drop,
    /// Unicast the reply back to the neighbor the request came from.
    Reply(Rrep),
    /// Rebroadcast the updated request.
    Forward(Rreq),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RrepAction {
    /// This node originated the discovery; the route is in place.
    Completed,
    Forward {
        to: Addr,
        rrep: Rrep,
    },
    /// Stale or worse than what we already have.
    Discard,
}

/// A route error and the precursors it goes to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RerrNotice {
    pub rerr: Rerr,
    pub targets: BTreeSet<Addr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SendOutcome {
    Sent { next_hop: Addr },
    Queued,
    Dropped(RoutingError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub addr: Addr,
    pub own_seq: u32,
    pub next_rreq_id: u32,
    pub table: RoutingTable,
    pub rreq_seen: BTreeMap<(Addr, u32), SeenRreq>,
    /// Neighbor address to the last time anything was heard from it.
    pub neighbors: BTreeMap<Addr, SimTime>,
    pub pending: BTreeMap<Addr, PendingDiscovery>,
    pub params: RoutingParams,
}

impl NodeState {
    pub fn new(addr: Addr, params: RoutingParams) -> Self {
        NodeState {
            addr,
            own_seq: 0,
            next_rreq_id: 1,
            table: RoutingTable::new(),
            rreq_seen: BTreeMap::new(),
            neighbors: BTreeMap::new(),
            pending: BTreeMap::new(),
            params,
        }
    }

    pub fn policy(&self) -> PolicyKind {
        self.params.policy
    }

    fn route_expiry(&self, now: SimTime) -> SimTime {
        now + self.params.active_route_lifetime
    }

    fn cost_field(&self, cost: u32) -> Option<u32> {
        self.policy().is_variant().then_some(cost)
    }

    fn build_rreq(&mut self, dest: Addr, now: SimTime) -> Rreq {
        self.own_seq = self.own_seq.wrapping_add(1);
        let rreq_id = self.next_rreq_id;
        self.next_rreq_id = self.next_rreq_id.wrapping_add(1);
        let known = self.table.get(dest).and_then(|e| e.dest_seq.known());
        self.rreq_seen.insert(
            (self.addr, rreq_id),
            SeenRreq {
                best_cost: 0,
                first_seen: now,
                reply_seq: None,
            },
        );
        Rreq {
            flags: RreqFlags {
                destination_only: self.params.destination_only,
                unknown_seq: known.is_none(),
                ..RreqFlags::default()
            },
            hop_count: 0,
            rreq_id,
            dest_addr: dest,
            dest_seq: known.unwrap_or(0),
            orig_addr: self.addr,
            orig_seq: self.own_seq,
            acc_cost: self.cost_field(0),
        }
    }

    /// Starts a route discovery toward `dest` unless one is already running.
    /// Returns the request broadcast, if any.
    pub fn originate_discovery(
        &mut self,
        dest: Addr,
        now: SimTime,
        fx: &mut Effects,
    ) -> Option<Rreq> {
        if self.pending.contains_key(&dest) {
            return None;
        }
        let rreq = self.build_rreq(dest, now);
        let deadline = now + self.params.discovery_wait;
        self.pending.insert(
            dest,
            PendingDiscovery {
                retries_left: self.params.max_retries,
                deadline,
                rreq_id: rreq.rreq_id,
                queued: VecDeque::new(),
            },
        );
        fx.timers
            .push((deadline, TimerKey::DiscoveryDeadline(dest)));
        fx.frames
            .push(Outbound::Broadcast(Message::Rreq(rreq.clone())));
        Some(rreq)
    }

    pub fn on_timer(&mut self, key: TimerKey, now: SimTime, fx: &mut Effects) {
        match key {
            TimerKey::DiscoveryDeadline(dest) => self.discovery_deadline(dest, now, fx),
        }
    }

    fn discovery_deadline(&mut self, dest: Addr, now: SimTime, fx: &mut Effects) {
        let Some(p) = self.pending.get(&dest) else {
            return;
        };
        if p.deadline > now {
            return;
        }
        if self.table.active(dest, now).is_some() {
            self.flush_pending(dest, now, fx);
            return;
        }
        if p.retries_left == 0 {
            let p = self.pending.remove(&dest).expect("checked above");
            fx.dropped
                .extend(p.queued.into_iter().map(|pkt| (pkt, DropReason::NoRoute)));
            return;
        }
        let rreq = self.build_rreq(dest, now);
        let deadline = now + self.params.discovery_wait;
        let p = self.pending.get_mut(&dest).expect("checked above");
        p.retries_left -= 1;
        p.deadline = deadline;
        p.rreq_id = rreq.rreq_id;
        fx.timers
            .push((deadline, TimerKey::DiscoveryDeadline(dest)));
        fx.frames.push(Outbound::Broadcast(Message::Rreq(rreq)));
    }

    /// Releases payloads queued for `dest` once a route exists.
    fn flush_pending(&mut self, dest: Addr, now: SimTime, fx: &mut Effects) {
        if !self.pending.contains_key(&dest) || self.table.active(dest, now).is_none() {
            return;
        }
        let p = self.pending.remove(&dest).expect("checked above");
        for pkt in p.queued {
            self.send_data(pkt, now, fx);
        }
    }

    fn note_neighbor(&mut self, sender: Addr, now: SimTime) {
        self.neighbors.insert(sender, now);
    }

    /// Processes a route request heard from `sender`, `sender_dist_mm` away.
    pub fn handle_rreq(
        &mut self,
        rreq: &Rreq,
        sender: Addr,
        sender_dist_mm: u32,
        now: SimTime,
    ) -> RreqAction {
        let policy = self.policy();
        let key = (rreq.orig_addr, rreq.rreq_id);
        let incoming = if policy.is_variant() {
            rreq.acc_cost.unwrap_or(0).saturating_add(sender_dist_mm)
        } else {
            0
        };
        match self.rreq_seen.get_mut(&key) {
            Some(seen) => {
                if !policy.is_variant() || incoming >= seen.best_cost {
                    return RreqAction::Drop;
                }
                seen.best_cost = incoming;
            }
            None => {
                self.rreq_seen.insert(
                    key,
                    SeenRreq {
                        best_cost: incoming,
                        first_seen: now,
                        reply_seq: None,
                    },
                );
            }
        }
        if rreq.orig_addr == self.addr {
            return RreqAction::Drop;
        }

        let hop_count = rreq.hop_count.saturating_add(1);
        self.table.update_route(
            RouteCandidate {
                dest: rreq.orig_addr,
                next_hop: sender,
                seq: SeqNum::Known(rreq.orig_seq),
                hop_count,
                cost: incoming,
                expiry: self.route_expiry(now),
            },
            policy,
            now,
        );

        if rreq.dest_addr == self.addr {
            let seen = self.rreq_seen.get_mut(&key).expect("inserted above");
            let seq = match seen.reply_seq {
                Some(s) => s,
                None => {
                    if !rreq.flags.unknown_seq && seq_newer(rreq.dest_seq, self.own_seq) {
                        self.own_seq = rreq.dest_seq;
                    }
                    self.own_seq = self.own_seq.wrapping_add(1);
                    seen.reply_seq = Some(self.own_seq);
                    self.own_seq
                }
            };
            return RreqAction::Reply(Rrep {
                flags: RrepFlags::default(),
                prefix_size: 0,
                hop_count: 0,
                dest_addr: self.addr,
                dest_seq: seq,
                orig_addr: rreq.orig_addr,
                lifetime: self.params.route_lifetime_ms(),
                acc_cost: self.cost_field(0),
            });
        }

        if self.params.intermediate_replies && !rreq.flags.destination_only {
            if let Some(e) = self.table.active(rreq.dest_addr, now) {
                let fresh = match e.dest_seq {
                    SeqNum::Known(s) => rreq.flags.unknown_seq || !seq_newer(rreq.dest_seq, s),
                    SeqNum::Unknown => false,
                };
                if fresh && e.next_hop != sender {
                    let remaining = (e.lifetime_expiry - now).0 / 1000;
                    let rrep = Rrep {
                        flags: RrepFlags::default(),
                        prefix_size: 0,
                        hop_count: e.hop_count,
                        dest_addr: rreq.dest_addr,
                        dest_seq: e.dest_seq.known().unwrap_or(0),
                        orig_addr: rreq.orig_addr,
                        lifetime: u32::try_from(remaining).unwrap_or(u32::MAX),
                        acc_cost: self.cost_field(e.path_cost),
                    };
                    let fwd_next = e.next_hop;
                    if let Some(fwd) = self.table.get_mut(rreq.dest_addr) {
                        fwd.precursors.insert(sender);
                    }
                    if let Some(rev) = self.table.get_mut(rreq.orig_addr) {
                        rev.precursors.insert(fwd_next);
                    }
                    return RreqAction::Reply(rrep);
                }
            }
        }

        if hop_count >= self.params.net_diameter {
            return RreqAction::Drop;
        }
        let mut fwd = rreq.clone();
        fwd.hop_count = hop_count;
        fwd.acc_cost = self.cost_field(incoming);
        if let Some(s) = self
            .table
            .get(rreq.dest_addr)
            .and_then(|e| e.dest_seq.known())
        {
            if fwd.flags.unknown_seq || seq_newer(s, fwd.dest_seq) {
                fwd.dest_seq = s;
                fwd.flags.unknown_seq = false;
            }
        }
        RreqAction::Forward(fwd)
    }

    /// Processes a route reply heard from `sender`.
    pub fn handle_rrep(
        &mut self,
        rrep: &Rrep,
        sender: Addr,
        sender_dist_mm: u32,
        now: SimTime,
    ) -> Result<RrepAction, RoutingError> {
        let policy = self.policy();
        let hop_count = rrep.hop_count.saturating_add(1);
        let cost = if policy.is_variant() {
            rrep.acc_cost.unwrap_or(0).saturating_add(sender_dist_mm)
        } else {
            0
        };
        let outcome = self.table.offer(
            RouteCandidate {
                dest: rrep.dest_addr,
                next_hop: sender,
                seq: SeqNum::Known(rrep.dest_seq),
                hop_count,
                cost,
                expiry: now + SimTime::from_millis(rrep.lifetime as u64),
            },
            policy,
            now,
        );

        if rrep.orig_addr == self.addr {
            return Ok(if self.table.active(rrep.dest_addr, now).is_some() {
                RrepAction::Completed
            } else {
                RrepAction::Discard
            });
        }
        if outcome == UpdateOutcome::Rejected {
            return Ok(RrepAction::Discard);
        }
        let Some(rev_next) = self.table.active(rrep.orig_addr, now).map(|e| e.next_hop) else {
            return Err(RoutingError::NoReverseRoute {
                orig: rrep.orig_addr,
            });
        };
        let expiry = self.route_expiry(now);
        if let Some(rev) = self.table.get_mut(rrep.orig_addr) {
            rev.lifetime_expiry = rev.lifetime_expiry.max(expiry);
            rev.precursors.insert(sender);
        }
        if let Some(fwd) = self.table.get_mut(rrep.dest_addr) {
            fwd.precursors.insert(rev_next);
        }
        let mut out = rrep.clone();
        out.hop_count = hop_count;
        out.acc_cost = self.cost_field(cost);
        Ok(RrepAction::Forward {
            to: rev_next,
            rrep: out,
        })
    }

    /// Records a neighbor's hello and keeps a one-hop route to it.
    pub fn handle_hello(&mut self, hello: &Hello, sender: Addr, sender_dist_mm: u32, now: SimTime) {
        self.note_neighbor(sender, now);
        let policy = self.policy();
        let expiry = now + SimTime::from_millis(hello.lifetime as u64);
        let outcome = self.table.offer(
            RouteCandidate {
                dest: sender,
                next_hop: sender,
                seq: SeqNum::Known(hello.origin_seq),
                hop_count: 1,
                cost: if policy.is_variant() {
                    sender_dist_mm
                } else {
                    0
                },
                expiry,
            },
            policy,
            now,
        );
        if outcome == UpdateOutcome::Rejected {
            if let Some(e) = self.table.get_mut(sender) {
                if e.next_hop == sender && e.valid {
                    e.lifetime_expiry = e.lifetime_expiry.max(expiry);
                }
            }
        }
    }

    /// Invalidates routes that `sender` reports broken and returns the error
    /// to propagate to our own precursors, if any route was affected.
    pub fn handle_rerr(&mut self, rerr: &Rerr, sender: Addr, _now: SimTime) -> Option<RerrNotice> {
        let mut lost = Vec::new();
        let mut targets = BTreeSet::new();
        for d in &rerr.destinations {
            let Some(e) = self.table.get_mut(d.addr) else {
                continue;
            };
            if !e.valid || e.next_hop != sender {
                continue;
            }
            e.valid = false;
            let seq = match e.dest_seq {
                SeqNum::Known(s) if !seq_newer(d.seq, s) => s,
                _ => d.seq,
            };
            e.dest_seq = SeqNum::Known(seq);
            targets.append(&mut e.precursors);
            lost.push(Unreachable { addr: d.addr, seq });
        }
        targets.remove(&self.addr);
        if lost.is_empty() || targets.is_empty() {
            return None;
        }
        Some(RerrNotice {
            rerr: Rerr {
                no_delete: false,
                destinations: lost,
            },
            targets,
        })
    }

    /// Invalidates every route through `neighbor` and reports them to the
    /// affected precursors.
    pub fn link_break(&mut self, neighbor: Addr, fx: &mut Effects) {
        let mut lost = Vec::new();
        let mut targets = BTreeSet::new();
        for e in self.table.entries.values_mut() {
            if !e.valid || e.next_hop != neighbor {
                continue;
            }
            e.valid = false;
            if let SeqNum::Known(s) = e.dest_seq {
                e.dest_seq = SeqNum::Known(s.wrapping_add(1));
            }
            targets.append(&mut e.precursors);
            lost.push(Unreachable {
                addr: e.dest_addr,
                seq: e.dest_seq.known().unwrap_or(0),
            });
        }
        targets.remove(&neighbor);
        targets.remove(&self.addr);
        emit_rerr(lost, &targets, fx);
    }

    /// Periodic beacon: drops neighbors that went silent, then announces
    /// ourselves.
    pub fn hello_tick(&mut self, now: SimTime, fx: &mut Effects) -> Hello {
        let timeout = self.params.neighbor_timeout();
        let stale: Vec<Addr> = self
            .neighbors
            .iter()
            .filter(|(_, &heard)| now - heard > timeout)
            .map(|(&a, _)| a)
            .collect();
        for n in stale {
            self.neighbors.remove(&n);
            self.link_break(n, fx);
        }
        let memory = self.params.rreq_memory();
        self.rreq_seen.retain(|_, s| now - s.first_seen <= memory);

        let hello = Hello {
            origin_addr: self.addr,
            origin_seq: self.own_seq,
            lifetime: self.params.hello_lifetime_ms(),
        };
        fx.frames.push(Outbound::Broadcast(Message::Hello(hello)));
        hello
    }

    /// Sends a locally generated payload, queueing it behind a discovery when
    /// no route is known.
    pub fn send_data(&mut self, packet: DataPacket, now: SimTime, fx: &mut Effects) -> SendOutcome {
        let expiry = self.route_expiry(now);
        if let Some(e) = self.table.get_mut(packet.dst).filter(|e| e.is_active(now)) {
            e.lifetime_expiry = e.lifetime_expiry.max(expiry);
            let next_hop = e.next_hop;
            fx.frames.push(Outbound::Data {
                to: next_hop,
                packet,
            });
            return SendOutcome::Sent { next_hop };
        }
        if let Some(p) = self.pending.get(&packet.dst) {
            if p.queued.len() >= self.params.queue_capacity {
                let err = RoutingError::QueueOverflow { dest: packet.dst };
                fx.dropped.push((packet, DropReason::QueueOverflow));
                fx.errors.push(err);
                return SendOutcome::Dropped(err);
            }
        } else {
            self.originate_discovery(packet.dst, now, fx);
        }
        self.pending
            .get_mut(&packet.dst)
            .expect("discovery pending")
            .queued
            .push_back(packet);
        SendOutcome::Queued
    }

    /// Handles a data frame received from `sender`.
    pub fn receive_data(
        &mut self,
        mut packet: DataPacket,
        sender: Addr,
        now: SimTime,
        fx: &mut Effects,
    ) {
        self.note_neighbor(sender, now);
        packet.hops = packet.hops.saturating_add(1);
        if packet.dst == self.addr {
            fx.delivered.push(packet);
            return;
        }
        let expiry = self.route_expiry(now);
        if packet.hops < self.params.net_diameter {
            if let Some(e) = self.table.get_mut(packet.dst).filter(|e| e.is_active(now)) {
                e.lifetime_expiry = e.lifetime_expiry.max(expiry);
                let next_hop = e.next_hop;
                if let Some(rev) = self.table.get_mut(packet.src).filter(|e| e.is_active(now)) {
                    rev.lifetime_expiry = rev.lifetime_expiry.max(expiry);
                }
                fx.frames.push(Outbound::Data {
                    to: next_hop,
                    packet,
                });
                return;
            }
        }
        fx.dropped.push((packet, DropReason::NoRoute));
        let seq = self
            .table
            .get(packet.dst)
            .and_then(|e| e.dest_seq.known())
            .unwrap_or(0);
        fx.frames.push(Outbound::Unicast {
            to: sender,
            msg: Message::Rerr(Rerr {
                no_delete: false,
                destinations: alloc::vec![Unreachable {
                    addr: packet.dst,
                    seq
                }],
            }),
        });
    }

    /// Dispatches a decoded control message heard from `sender`.
    pub fn receive_message(
        &mut self,
        msg: &Message,
        sender: Addr,
        sender_dist_mm: u32,
        now: SimTime,
        fx: &mut Effects,
    ) {
        self.note_neighbor(sender, now);
        match msg {
            Message::Rreq(rreq) => match self.handle_rreq(rreq, sender, sender_dist_mm, now) {
                RreqAction::Drop => {}
                RreqAction::Reply(rrep) => fx.frames.push(Outbound::Unicast {
                    to: sender,
                    msg: Message::Rrep(rrep),
                }),
                RreqAction::Forward(fwd) => fx.frames.push(Outbound::Broadcast(Message::Rreq(fwd))),
            },
            Message::Rrep(rrep) => {
                if let Some(hello) = Hello::from_rrep(rrep, sender) {
                    self.handle_hello(&hello, sender, sender_dist_mm, now);
                    self.flush_pending(sender, now, fx);
                    return;
                }
                match self.handle_rrep(rrep, sender, sender_dist_mm, now) {
                    Ok(RrepAction::Completed) => self.flush_pending(rrep.dest_addr, now, fx),
                    Ok(RrepAction::Forward { to, rrep }) => fx.frames.push(Outbound::Unicast {
                        to,
                        msg: Message::Rrep(rrep),
                    }),
                    Ok(RrepAction::Discard) => {}
                    Err(e) => fx.errors.push(e),
                }
            }
            Message::Hello(hello) => {
                self.handle_hello(hello, sender, sender_dist_mm, now);
                self.flush_pending(sender, now, fx);
            }
            Message::Rerr(rerr) => {
                if let Some(notice) = self.handle_rerr(rerr, sender, now) {
                    emit_rerr(notice.rerr.destinations, &notice.targets, fx);
                }
            }
        }
        // a reverse route may be what a pending discovery is waiting on
        if let Message::Rreq(r) = msg {
            self.flush_pending(r.orig_addr, now, fx);
        }
    }
}

fn emit_rerr(lost: Vec<Unreachable>, targets: &BTreeSet<Addr>, fx: &mut Effects) {
    if lost.is_empty() {
        return;
    }
    for chunk in lost.chunks(u8::MAX as usize) {
        for &to in targets {
            fx.frames.push(Outbound::Unicast {
                to,
                msg: Message::Rerr(Rerr {
                    no_delete: false,
                    destinations: chunk.to_vec(),
                }),
            });
        }
    }
}
