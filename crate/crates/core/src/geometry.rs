//! Euclidean distance over positions of any dimension, the meters to
//! millimeter fixed-point bridge used by the wire and routing layers, and the
//! per-transfer cost model.

use alloc::vec::Vec;
use core::fmt;

/// A point in n-dimensional Euclidean space, coordinates in meters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Position {
    coords: Vec<f64>,
}

impl Position {
    pub fn new(coords: Vec<f64>) -> Self {
        Position { coords }
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Position {
            coords: alloc::vec![x, y],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn x(&self) -> f64 {
        self.coords.first().copied().unwrap_or(0.0)
    }

    pub fn y(&self) -> f64 {
        self.coords.get(1).copied().unwrap_or(0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionMismatch {
    pub left: usize,
    pub right: usize,
}

impl fmt::Display for DimensionMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dimension mismatch: {} vs {} coordinates",
            self.left, self.right
        )
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DimensionMismatch {}

/// Straight-line distance `sqrt(sum((p_i - q_i)^2))` in meters.
pub fn euclidean_distance(p: &Position, q: &Position) -> Result<f64, DimensionMismatch> {
    if p.dim() != q.dim() {
        return Err(DimensionMismatch {
            left: p.dim(),
            right: q.dim(),
        });
    }
    Ok(distance_unchecked(p.coords(), q.coords()))
}

pub(crate) fn distance_unchecked(p: &[f64], q: &[f64]) -> f64 {
    let sum: f64 = p
        .iter()
        .zip(q)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum();
    libm::sqrt(sum)
}

/// Converts meters to whole millimeters, rounding half up and saturating at
/// `u32::MAX`. Negative and NaN inputs map to zero.
pub fn meters_to_mm(meters: f64) -> u32 {
    if meters.is_nan() || meters <= 0.0 {
        return 0;
    }
    let mm = libm::floor(meters * 1000.0 + 0.5);
    if mm >= u32::MAX as f64 {
        u32::MAX
    } else {
        mm as u32
    }
}

/// Weights of the transfer cost model. Units are arbitrary "cost units".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostWeights {
    /// cost per participating node
    pub w_node: f64,
    /// cost per joule spent on data transmission and reception
    pub w_energy: f64,
    /// cost per dropped packet
    pub w_loss: f64,
    /// joules per byte transmitted
    pub e_tx: f64,
    /// joules per byte received
    pub e_rx: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights {
            w_node: 10.0,
            w_energy: 1000.0,
            w_loss: 50.0,
            e_tx: 2e-6,
            e_rx: 1e-6,
        }
    }
}

impl CostWeights {
    pub fn is_valid(&self) -> bool {
        [
            self.w_node,
            self.w_energy,
            self.w_loss,
            self.e_tx,
            self.e_rx,
        ]
        .iter()
        .all(|w| w.is_finite() && *w >= 0.0)
    }
}

/// Cost of one transfer: participating nodes, energy spent moving its bytes,
/// and packets lost.
///
/// `hops_used` is the number of transmitting nodes, so `hops_used + 1` nodes
/// took part once the receiver is counted.
pub fn transfer_cost(
    hops_used: u64,
    bytes_tx: u64,
    bytes_rx: u64,
    drops: u64,
    w: &CostWeights,
) -> f64 {
    let nodes = hops_used as f64 + 1.0;
    let energy = w.e_tx * bytes_tx as f64 + w.e_rx * bytes_rx as f64;
    w.w_node * nodes + w.w_energy * energy + w.w_loss * drops as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pythagorean_cases() {
        let d = euclidean_distance(&Position::xy(0.0, 0.0), &Position::xy(3.0, 4.0)).unwrap();
        assert_eq!(d, 5.0);
        let p = Position::new(alloc::vec![1.0, 2.0, 3.0]);
        let q = Position::new(alloc::vec![4.0, 6.0, 3.0]);
        assert_eq!(euclidean_distance(&p, &q).unwrap(), 5.0);
        assert_eq!(euclidean_distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let p = Position::xy(0.0, 0.0);
        let q = Position::new(alloc::vec![1.0, 2.0, 3.0]);
        assert_eq!(
            euclidean_distance(&p, &q),
            Err(DimensionMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn millimeter_rounding_is_half_up_and_saturating() {
        assert_eq!(meters_to_mm(0.0), 0);
        assert_eq!(meters_to_mm(-3.0), 0);
        assert_eq!(meters_to_mm(f64::NAN), 0);
        assert_eq!(meters_to_mm(1.0), 1000);
        assert_eq!(meters_to_mm(0.0005), 1);
        assert_eq!(meters_to_mm(0.00049), 0);
        assert_eq!(meters_to_mm(250.1234), 250_123);
        assert_eq!(meters_to_mm(1e12), u32::MAX);
    }

    #[test]
    fn transfer_cost_examples() {
        let zero = CostWeights {
            w_node: 0.0,
            w_energy: 0.0,
            w_loss: 0.0,
            e_tx: 0.0,
            e_rx: 0.0,
        };
        assert_eq!(transfer_cost(0, 0, 0, 0, &zero), 0.0);
        let w = CostWeights::default();

        let nodes_only = CostWeights {
            w_node: 1.0,
            ..CostWeights::default()
        };
        assert_eq!(transfer_cost(2, 0, 0, 0, &nodes_only), 3.0);

        // 10*4 + 1000*(2e-6*2048 + 1e-6*2048) + 50*1, computed by hand
        let c = transfer_cost(3, 2048, 2048, 1, &w);
        assert!((c - 96.144).abs() < 1e-9, "{c}");
    }

    proptest! {
        #[test]
        fn cost_is_monotone_and_linear(
            hops in 1u64..100, tx in 0u64..1_000_000, rx in 0u64..1_000_000, drops in 0u64..1000,
        ) {
            let w = CostWeights::default();
            let base = transfer_cost(hops, tx, rx, drops, &w);
            prop_assert!(transfer_cost(hops + 1, tx, rx, drops, &w) >= base);
            prop_assert!(transfer_cost(hops, tx + 1, rx, drops, &w) >= base);
            prop_assert!(transfer_cost(hops, tx, rx + 1, drops, &w) >= base);
            prop_assert!(transfer_cost(hops, tx, rx, drops + 1, &w) >= base);
            // equal steps in one argument give equal increments
            let d1 = transfer_cost(hops, tx, rx, drops + 1, &w) - base;
            let d2 = transfer_cost(hops, tx, rx, drops + 2, &w) - transfer_cost(hops, tx, rx, drops + 1, &w);
            prop_assert!((d1 - d2).abs() < 1e-6);
            let e1 = transfer_cost(hops, tx + 10, rx, drops, &w) - base;
            let e2 = transfer_cost(hops, tx + 20, rx, drops, &w) - transfer_cost(hops, tx + 10, rx, drops, &w);
            prop_assert!((e1 - e2).abs() < 1e-6);
        }
    }
}
