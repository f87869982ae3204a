//! Reference implementations the simulator is checked against. Nothing here
//! calls into the routing code it is meant to judge.
#![allow(dead_code)]

pub mod golden;

use std::collections::{BinaryHeap, VecDeque};

use aodv_core::metrics::TrafficClass;
use aodv_core::routing::{RouteCandidate, RoutingTable};
use aodv_core::sim::{CbrFlow, MobilityKind, MobilityModel, Placement, RadioModel};
use aodv_core::{
    Addr, MetricsReport, PolicyKind, Position, RoutingParams, SeqNum, SimConfig, SimTime, World,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const RANGE_M: f64 = 250.0;

/// A connected unit-disk graph plus one source/destination pair.
#[derive(Debug, Clone)]
pub struct Graph {
    pub points: Vec<(f64, f64)>,
    pub side: f64,
    pub src: usize,
    pub dst: usize,
}

pub fn naive_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        sum += d * d;
    }
    sum.sqrt()
}

impl Graph {
    pub fn n(&self) -> usize {
        self.points.len()
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.points[i], self.points[j]);
        naive_distance(&[a.0, a.1], &[b.0, b.1])
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&j| j != i && self.dist(i, j) <= RANGE_M)
    }

    pub fn bfs(&self, from: usize) -> Vec<Option<u32>> {
        let mut depth = vec![None; self.n()];
        depth[from] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if depth[v].is_none() {
                    depth[v] = Some(depth[u].unwrap() + 1);
                    queue.push_back(v);
                }
            }
        }
        depth
    }

    /// Shortest Euclidean path length in meters from `from` to every node.
    pub fn dijkstra(&self, from: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl PartialOrd for Item {
            fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(o))
            }
        }
        impl Ord for Item {
            fn cmp(&self, o: &Self) -> std::cmp::Ordering {
                o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
            }
        }
        let mut best = vec![f64::INFINITY; self.n()];
        best[from] = 0.0;
        let mut heap = BinaryHeap::from([Item(0.0, from)]);
        while let Some(Item(d, u)) = heap.pop() {
            if d > best[u] {
                continue;
            }
            for v in self.neighbors(u) {
                let nd = d + self.dist(u, v);
                if nd < best[v] {
                    best[v] = nd;
                    heap.push(Item(nd, v));
                }
            }
        }
        best
    }

    pub fn is_connected(&self) -> bool {
        self.bfs(0).iter().all(Option::is_some)
    }
}

/// Random connected graph with 8..=30 nodes. The destination is one of the
/// nodes farthest (in hops) from the source so most cases span several hops.
pub fn random_graph(seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(8..=30usize);
        let side = 140.0 * (n as f64).sqrt();
        let points: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(0.0..side), rng.gen_range(0.0..side)))
            .collect();
        let mut g = Graph {
            points,
            side,
            src: 0,
            dst: 0,
        };
        if !g.is_connected() {
            continue;
        }
        g.src = rng.gen_range(0..n);
        let depth = g.bfs(g.src);
        let far = depth.iter().flatten().max().copied().unwrap();
        let candidates: Vec<usize> = (0..n).filter(|&i| depth[i] == Some(far)).collect();
        g.dst = candidates[rng.gen_range(0..candidates.len())];
        return g;
    }
}

/// Static, lossless, jitter-free world carrying one packet from src to dst.
pub fn discovery_config(g: &Graph, policy: PolicyKind, destination_only: bool) -> SimConfig {
    SimConfig {
        node_count: g.n(),
        width_m: g.side,
        height_m: g.side,
        placement: Placement::Explicit(g.points.iter().map(|&(x, y)| Position::xy(x, y)).collect()),
        radio: RadioModel {
            range_m: RANGE_M,
            jitter_us: 0,
            base_latency_us: 100,
            loss_prob: 0.0,
        },
        mobility: MobilityModel {
            kind: MobilityKind::Static,
            step: SimTime::from_millis(100),
        },
        flows: vec![CbrFlow {
            src: Addr(g.src as u32),
            dst: Addr(g.dst as u32),
            packet_size: 64,
            interval: SimTime::from_secs(1),
            start: SimTime::ZERO,
            stop: SimTime::from_micros(1),
        }],
        routing: RoutingParams {
            policy,
            destination_only,
            ..RoutingParams::default()
        },
        hello_enabled: false,
        seed: 1,
        ..SimConfig::default()
    }
}

pub struct Discovery {
    pub world: World,
    pub report: MetricsReport,
    pub hop_count: Option<u8>,
    pub path_cost_mm: Option<u32>,
}

impl Discovery {
    pub fn rreq_transmissions(&self) -> u64 {
        self.report.transmissions(TrafficClass::Rreq)
    }
}

/// Runs until the event queue drains.
pub fn discover(g: &Graph, policy: PolicyKind, destination_only: bool) -> Discovery {
    let mut world = World::new(discovery_config(g, policy, destination_only)).unwrap();
    let report = world.run(SimTime::MAX);
    let entry = world
        .node(Addr(g.src as u32))
        .table
        .get(Addr(g.dst as u32))
        .cloned();
    Discovery {
        world,
        report,
        hop_count: entry.as_ref().map(|e| e.hop_count),
        path_cost_mm: entry.as_ref().map(|e| e.path_cost),
    }
}

/// The four acceptance clauses, written out longhand. `existing` is
/// `(seq, hops, cost)` of a valid entry.
pub fn update_oracle(
    existing: Option<(SeqNum, u8, u32)>,
    cand: (SeqNum, u8, u32),
    policy: PolicyKind,
) -> bool {
    let Some((old_seq, old_hops, old_cost)) = existing else {
        return true; // (a) nothing valid stored
    };
    let old = match old_seq {
        SeqNum::Unknown => return true, // (b) stored freshness unknown
        SeqNum::Known(s) => s,
    };
    let new = match cand.0 {
        SeqNum::Unknown => return false,
        SeqNum::Known(s) => s,
    };
    if new > old {
        return true; // (c) fresher
    }
    if new < old {
        return false;
    }
    // (d) same freshness, strictly better metric
    match policy {
        PolicyKind::Baseline => cand.1 < old_hops,
        PolicyKind::DistanceVariant { lambda_hop } => {
            let l = lambda_hop as u64;
            let new_metric = cand.2 as u64 + l * cand.1 as u64;
            let old_metric = old_cost as u64 + l * old_hops as u64;
            new_metric < old_metric
        }
    }
}

pub const TRUTH_SEQS: [SeqNum; 5] = [
    SeqNum::Unknown,
    SeqNum::Known(0),
    SeqNum::Known(1),
    SeqNum::Known(2),
    SeqNum::Known(3),
];

/// Cost that disagrees with hop order, so the variant cells differ from the
/// baseline ones.
pub fn truth_cost(hops: u8) -> u32 {
    [0, 900, 400, 700, 100][hops as usize]
}

/// Sweeps every cell and returns the ones where `update_route` and the
/// oracle disagree, plus the number of cells checked.
pub fn truth_table_mismatches() -> (usize, Vec<String>) {
    let now = SimTime::from_secs(1);
    let policies = [
        PolicyKind::Baseline,
        PolicyKind::DistanceVariant { lambda_hop: 0 },
        PolicyKind::DistanceVariant { lambda_hop: 250 },
    ];
    let dest = Addr(9);
    let mut existing_cases: Vec<Option<(SeqNum, u8, u32)>> = vec![None];
    for s in TRUTH_SEQS {
        for h in 1..=4u8 {
            existing_cases.push(Some((s, h, truth_cost(h))));
        }
    }
    let mut checked = 0;
    let mut bad = Vec::new();
    for policy in policies {
        for &existing in &existing_cases {
            for seq in TRUTH_SEQS {
                for hops in 1..=4u8 {
                    let mut table = RoutingTable::new();
                    if let Some((s, h, c)) = existing {
                        table.update_route(
                            RouteCandidate {
                                dest,
                                next_hop: Addr(1),
                                seq: s,
                                hop_count: h,
                                cost: c,
                                expiry: SimTime::from_secs(10),
                            },
                            policy,
                            SimTime::ZERO,
                        );
                    }
                    let before = table.clone();
                    let cand = RouteCandidate {
                        dest,
                        next_hop: Addr(2),
                        seq,
                        hop_count: hops,
                        cost: truth_cost(hops),
                        expiry: SimTime::from_secs(20),
                    };
                    let got = table.update_route(cand, policy, now);
                    let want = update_oracle(existing, (seq, hops, truth_cost(hops)), policy);
                    checked += 1;
                    let entry = table.get(dest).unwrap();
                    let table_ok = if want {
                        entry.next_hop == Addr(2)
                            && entry.dest_seq == seq
                            && entry.hop_count == hops
                    } else {
                        table == before
                    };
                    if got != want || !table_ok {
                        bad.push(format!("{policy:?} existing={existing:?} cand=({seq:?},{hops}) got={got} want={want}"));
                    }
                }
            }
        }
    }
    (checked, bad)
}

/// Deterministic triples of n-dimensional points for the distance checks.
pub fn random_triples(seed: u64, count: usize) -> Vec<[Vec<f64>; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let dim = rng.gen_range(1..=6);
            let scale = [1e-3, 1.0, 1e3, 1e6][rng.gen_range(0..4)];
            let mut p = || {
                (0..dim)
                    .map(|_| rng.gen_range(-scale..scale))
                    .collect::<Vec<f64>>()
            };
            [p(), p(), p()]
        })
        .collect()
}
