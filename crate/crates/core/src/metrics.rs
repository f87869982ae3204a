//! Per-run accounting of data packets and MAC submissions, reduced to
//! per-transfer and aggregate reports.
//!
//! A transfer is one CBR flow. Network load counts every frame handed to the
//! simulated MAC by any node, data and control alike, so a packet relayed over
//! three hops is counted three times.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::geometry::{transfer_cost, CostWeights};
use crate::time::SimTime;
use crate::wire::Addr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DropReason {
    NoRoute,
    QueueOverflow,
    LinkLoss,
    InFlightAtEnd,
}

impl DropReason {
    pub const ALL: [DropReason; 4] = [
        DropReason::NoRoute,
        DropReason::QueueOverflow,
        DropReason::LinkLoss,
        DropReason::InFlightAtEnd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DropReason::NoRoute => "no_route",
            DropReason::QueueOverflow => "queue_overflow",
            DropReason::LinkLoss => "link_loss",
            DropReason::InFlightAtEnd => "in_flight_at_end",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrafficClass {
    Data,
    Rreq,
    Rrep,
    Rerr,
    Hello,
}

impl TrafficClass {
    pub const ALL: [TrafficClass; 5] = [
        TrafficClass::Data,
        TrafficClass::Rreq,
        TrafficClass::Rrep,
        TrafficClass::Rerr,
        TrafficClass::Hello,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrafficClass::Data => "data",
            TrafficClass::Rreq => "rreq",
            TrafficClass::Rrep => "rrep",
            TrafficClass::Rerr => "rerr",
            TrafficClass::Hello => "hello",
        }
    }

    pub fn is_control(self) -> bool {
        self != TrafficClass::Data
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketRecord {
    pub flow: u32,
    pub seq: u32,
    pub sent_at: SimTime,
    pub received_at: Option<SimTime>,
    pub hops_traversed: u8,
    pub drop_reason: Option<DropReason>,
}

impl PacketRecord {
    pub fn is_resolved(&self) -> bool {
        self.received_at.is_some() || self.drop_reason.is_some()
    }

    pub fn delay(&self) -> Option<SimTime> {
        self.received_at.map(|r| r - self.sent_at)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct FlowTally {
    bytes_tx: u64,
    bytes_rx: u64,
    data_bits: u64,
    control_tx: u64,
    transmitters: BTreeSet<Addr>,
}

/// Run-long accumulator. One per simulation run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsCollector {
    records: BTreeMap<(u32, u32), PacketRecord>,
    flows: Vec<FlowTally>,
    bits_by_class: [u64; 5],
    tx_by_class: [u64; 5],
    control_drops: u64,
}

impl MetricsCollector {
    pub fn new(flow_count: usize) -> Self {
        MetricsCollector {
            flows: alloc::vec![FlowTally::default(); flow_count],
            ..Self::default()
        }
    }

    fn flow_mut(&mut self, flow: u32) -> &mut FlowTally {
        let idx = flow as usize;
        if idx >= self.flows.len() {
            self.flows.resize(idx + 1, FlowTally::default());
        }
        &mut self.flows[idx]
    }

    pub fn record_sent(&mut self, flow: u32, seq: u32, now: SimTime) {
        self.flow_mut(flow);
        self.records.insert(
            (flow, seq),
            PacketRecord {
                flow,
                seq,
                sent_at: now,
                received_at: None,
                hops_traversed: 0,
                drop_reason: None,
            },
        );
    }

    /// Counts one frame submitted to the MAC.
    pub fn record_mac_submission(&mut self, class: TrafficClass, bits: u64) {
        self.bits_by_class[class.index()] += bits;
        self.tx_by_class[class.index()] += 1;
    }

    /// Attributes a data transmission to its flow.
    pub fn record_data_tx(&mut self, flow: u32, sender: Addr, bytes: u64) {
        let t = self.flow_mut(flow);
        t.bytes_tx += bytes;
        t.data_bits += bytes * 8;
        t.transmitters.insert(sender);
    }

    /// Attributes a one-hop data reception to its flow.
    pub fn record_data_rx(&mut self, flow: u32, bytes: u64) {
        self.flow_mut(flow).bytes_rx += bytes;
    }

    /// Attributes a discovery control transmission to the flow it serves.
    pub fn record_flow_control(&mut self, flow: u32) {
        self.flow_mut(flow).control_tx += 1;
    }

    pub fn record_control_drop(&mut self) {
        self.control_drops += 1;
    }

    pub fn record_received(&mut self, flow: u32, seq: u32, hops: u8, now: SimTime) {
        if let Some(r) = self.records.get_mut(&(flow, seq)) {
            if !r.is_resolved() {
                r.received_at = Some(now);
                r.hops_traversed = hops;
            }
        }
    }

    pub fn record_drop(&mut self, flow: u32, seq: u32, hops: u8, reason: DropReason) {
        if let Some(r) = self.records.get_mut(&(flow, seq)) {
            if !r.is_resolved() {
                r.drop_reason = Some(reason);
                r.hops_traversed = hops;
            }
        }
    }

    pub fn records(&self) -> impl Iterator<Item = &PacketRecord> {
        self.records.values()
    }

    pub fn total_bits(&self) -> u64 {
        self.bits_by_class.iter().sum()
    }

    pub fn transmissions(&self, class: TrafficClass) -> u64 {
        self.tx_by_class[class.index()]
    }

    pub fn bits(&self, class: TrafficClass) -> u64 {
        self.bits_by_class[class.index()]
    }

    pub fn control_drops(&self) -> u64 {
        self.control_drops
    }

    /// Closes unresolved packets as [`DropReason::InFlightAtEnd`] and reduces
    /// everything to a report over `[0, end_time]`.
    pub fn finalize(&mut self, weights: &CostWeights, end_time: SimTime) -> MetricsReport {
        for r in self.records.values_mut() {
            if !r.is_resolved() {
                r.drop_reason = Some(DropReason::InFlightAtEnd);
            }
        }
        let secs = end_time.as_secs_f64();
        let rate = |bits: u64| if secs > 0.0 { bits as f64 / secs } else { 0.0 };

        let mut per_flow: Vec<PacketTally> = alloc::vec![PacketTally::default(); self.flows.len()];
        let mut all = PacketTally::default();
        for r in self.records.values() {
            per_flow[r.flow as usize].add(r);
            all.add(r);
        }

        let transfers: Vec<TransferReport> = self
            .flows
            .iter()
            .zip(&per_flow)
            .enumerate()
            .map(|(i, (flow, tally))| {
                let hops_used = flow.transmitters.len() as u64;
                TransferReport {
                    transfer: i as u32 + 1,
                    cost: transfer_cost(
                        hops_used,
                        flow.bytes_tx,
                        flow.bytes_rx,
                        tally.dropped(),
                        weights,
                    ),
                    avg_delay_ms: tally.avg_delay_ms(),
                    packets_sent: tally.sent,
                    packets_received: tally.received,
                    packets_dropped: tally.dropped(),
                    drops_by_reason: tally.drops,
                    delivery_ratio: tally.ratio(),
                    network_load_bps: rate(flow.data_bits),
                    control_overhead: flow.control_tx,
                    nodes_used: hops_used + 1,
                }
            })
            .collect();

        let control_overhead = TrafficClass::ALL
            .iter()
            .filter(|c| c.is_control())
            .map(|c| self.tx_by_class[c.index()])
            .sum();
        let aggregate = TransferReport {
            transfer: 0,
            cost: transfers.iter().map(|t| t.cost).sum(),
            avg_delay_ms: all.avg_delay_ms(),
            packets_sent: all.sent,
            packets_received: all.received,
            packets_dropped: all.dropped(),
            drops_by_reason: all.drops,
            delivery_ratio: all.ratio(),
            network_load_bps: rate(self.total_bits()),
            control_overhead,
            nodes_used: transfers.iter().map(|t| t.nodes_used).sum(),
        };
        MetricsReport {
            transfers,
            aggregate,
            bits_by_class: self.bits_by_class,
            tx_by_class: self.tx_by_class,
            control_drops: self.control_drops,
            duration: end_time,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PacketTally {
    sent: u64,
    received: u64,
    delay_us_sum: u128,
    drops: [u64; 4],
}

impl PacketTally {
    fn add(&mut self, r: &PacketRecord) {
        self.sent += 1;
        if let Some(d) = r.delay() {
            self.received += 1;
            self.delay_us_sum += d.as_micros() as u128;
        } else if let Some(reason) = r.drop_reason {
            self.drops[reason.index()] += 1;
        }
    }

    fn dropped(&self) -> u64 {
        self.sent - self.received
    }

    fn ratio(&self) -> f64 {
        if self.sent == 0 {
            0.0
        } else {
            self.received as f64 / self.sent as f64
        }
    }

    fn avg_delay_ms(&self) -> f64 {
        if self.received == 0 {
            0.0
        } else {
            self.delay_us_sum as f64 / self.received as f64 / 1000.0
        }
    }
}

/// Metrics of one transfer, or of the whole run when `transfer == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferReport {
    /// 1-based flow index; 0 for the aggregate.
    pub transfer: u32,
    pub cost: f64,
    pub avg_delay_ms: f64,
    pub packets_sent: u64,
    pub packets_received: u64,
    pub packets_dropped: u64,
    pub drops_by_reason: [u64; 4],
    pub delivery_ratio: f64,
    pub network_load_bps: f64,
    pub control_overhead: u64,
    pub nodes_used: u64,
}

impl TransferReport {
    pub fn drops(&self, reason: DropReason) -> u64 {
        self.drops_by_reason[reason.index()]
    }

    /// `sent == received + sum of drops by reason`.
    pub fn is_conserved(&self) -> bool {
        self.packets_sent == self.packets_received + self.drops_by_reason.iter().sum::<u64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub transfers: Vec<TransferReport>,
    pub aggregate: TransferReport,
    pub bits_by_class: [u64; 5],
    pub tx_by_class: [u64; 5],
    pub control_drops: u64,
    pub duration: SimTime,
}

impl MetricsReport {
    pub fn transmissions(&self, class: TrafficClass) -> u64 {
        self.tx_by_class[class.index()]
    }

    pub fn bits(&self, class: TrafficClass) -> u64 {
        self.bits_by_class[class.index()]
    }

    pub fn is_conserved(&self) -> bool {
        self.aggregate.is_conserved() && self.transfers.iter().all(TransferReport::is_conserved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_run_reports_zeros() {
        let mut m = MetricsCollector::new(0);
        let r = m.finalize(&CostWeights::default(), SimTime::from_secs(10));
        assert_eq!(r.aggregate.packets_sent, 0);
        assert_eq!(r.aggregate.avg_delay_ms, 0.0);
        assert_eq!(r.aggregate.delivery_ratio, 0.0);
        assert_eq!(r.aggregate.network_load_bps, 0.0);
        assert_eq!(r.aggregate.cost, 0.0);
        assert!(r.is_conserved());
    }

    #[test]
    fn uniform_delay() {
        let mut m = MetricsCollector::new(1);
        for s in 0..10 {
            let t = SimTime::from_millis(100 * s as u64);
            m.record_sent(0, s, t);
            m.record_received(0, s, 2, t + SimTime::from_millis(5));
        }
        let r = m.finalize(&CostWeights::default(), SimTime::from_secs(2));
        let a = r.aggregate;
        assert_eq!(a.avg_delay_ms, 5.0);
        assert_eq!(a.packets_dropped, 0);
        assert_eq!(a.delivery_ratio, 1.0);
        assert!(r.is_conserved());
    }

    #[test]
    fn drops_and_unresolved_packets() {
        let mut m = MetricsCollector::new(1);
        for s in 0..10 {
            m.record_sent(0, s, SimTime::ZERO);
        }
        for s in 0..7 {
            m.record_received(0, s, 1, SimTime::from_millis(1));
        }
        m.record_drop(0, 7, 0, DropReason::LinkLoss);
        m.record_drop(0, 8, 0, DropReason::NoRoute);
        // a late duplicate outcome is ignored
        m.record_received(0, 7, 1, SimTime::from_millis(3));
        let r = m.finalize(&CostWeights::default(), SimTime::from_secs(1));
        let a = r.aggregate;
        assert_eq!(a.packets_dropped, 3);
        assert!((a.delivery_ratio - 0.7).abs() < 1e-12);
        assert_eq!(a.drops(DropReason::LinkLoss), 1);
        assert_eq!(a.drops(DropReason::NoRoute), 1);
        assert_eq!(a.drops(DropReason::InFlightAtEnd), 1);
        assert!(r.is_conserved());
    }

    #[test]
    fn network_load_is_a_rate() {
        let mut m = MetricsCollector::new(1);
        assert_eq!(
            m.clone()
                .finalize(&CostWeights::default(), SimTime::from_secs(1))
                .aggregate
                .network_load_bps,
            0.0
        );
        // one 512-byte payload relayed over three hops
        for _ in 0..3 {
            m.record_mac_submission(TrafficClass::Data, 512 * 8);
        }
        let one = m
            .clone()
            .finalize(&CostWeights::default(), SimTime::from_secs(1));
        assert_eq!(one.aggregate.network_load_bps, 12_288.0);
        let two = m.finalize(&CostWeights::default(), SimTime::from_secs(2));
        assert_eq!(two.aggregate.network_load_bps, 6_144.0);
    }

    #[test]
    fn transfer_cost_uses_flow_totals() {
        let mut m = MetricsCollector::new(1);
        m.record_sent(0, 0, SimTime::ZERO);
        m.record_sent(0, 1, SimTime::ZERO);
        // three transmitters: source plus two relays
        for sender in [1, 2, 3] {
            m.record_data_tx(0, Addr(sender), 1024);
            m.record_data_rx(0, 1024);
        }
        m.record_received(0, 0, 3, SimTime::from_millis(4));
        m.record_drop(0, 1, 0, DropReason::NoRoute);
        let w = CostWeights::default();
        let r = m.finalize(&w, SimTime::from_secs(1));
        let t = &r.transfers[0];
        assert_eq!(t.nodes_used, 4);
        assert!((t.cost - transfer_cost(3, 3072, 3072, 1, &w)).abs() < 1e-9);
        assert_eq!(r.aggregate.cost, t.cost);
    }
}
