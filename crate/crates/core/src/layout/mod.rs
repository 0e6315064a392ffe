//! Ordering of a tile's output MARS in memory.
//!
//! Each tile owns one contiguous block holding its output MARS, so writes are
//! always a single burst. The order of the MARS inside that block decides how
//! many reads a consumer needs: MARS a consumer reads together and that sit
//! next to each other merge into one burst. Maximizing those adjacencies is a
//! maximum-weight Hamiltonian path over the MARS, solved exactly for small
//! counts.

mod ilp;
mod solver;

pub use ilp::{export_ilp, IlpModel, LinearConstraint, Sense};
pub use solver::{solve_layout, solve_layout_exact, solve_layout_greedy, MAX_EXACT_MARS};

use std::collections::HashMap;
use std::ops::Range;

use serde::Serialize;

use crate::kernel::TileCoord;
use crate::mars::{Mars, TileIOSummary};

/// `w[i][j]`: number of consumer tiles reading both MARS `i` and `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightMatrix {
    n: usize,
    w: Vec<u32>,
}

impl WeightMatrix {
    pub fn zeros(n: usize) -> Self {
        WeightMatrix { n, w: vec![0; n * n] }
    }

    /// Symmetric matrix from explicit rows; the diagonal is ignored.
    pub fn from_rows(rows: &[Vec<u32>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate().take(n) {
                if i != j {
                    m.w[i * n + j] = v;
                }
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.w[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        if i != j {
            self.w[i * self.n + j] = v;
            self.w[j * self.n + i] = v;
        }
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.w.chunks(self.n.max(1)).take(self.n).map(<[u32]>::to_vec).collect()
    }

    /// Sum of weights between consecutive MARS of `order`.
    pub fn path_weight(&self, order: &[usize]) -> u32 {
        order.windows(2).map(|p| self.get(p[0], p[1])).sum()
    }
}

pub fn build_weights(outputs: &[Mars]) -> WeightMatrix {
    let n = outputs.len();
    let mut m = WeightMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let shared = outputs[i]
                .signature
                .iter()
                .filter(|c| outputs[j].signature.contains(c))
                .count();
            m.set(i, j, shared as u32);
        }
    }
    m
}

/// A permutation of the MARS: `order[pos]` is the MARS stored at `pos`,
/// `gamma[id]` the position of MARS `id`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayoutOrder {
    pub order: Vec<usize>,
    pub gamma: Vec<usize>,
    pub objective: u32,
}

impl LayoutOrder {
    pub fn from_order(order: Vec<usize>, w: &WeightMatrix) -> Self {
        let mut gamma = vec![usize::MAX; order.len()];
        for (pos, &id) in order.iter().enumerate() {
            gamma[id] = pos;
        }
        assert!(gamma.iter().all(|&g| g != usize::MAX), "order is not a permutation");
        let objective = w.path_weight(&order);
        LayoutOrder {
            order,
            gamma,
            objective,
        }
    }

    pub fn identity(w: &WeightMatrix) -> Self {
        Self::from_order((0..w.len()).collect(), w)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Maximal runs of consecutive positions among the MARS `ids`, as position ranges.
pub fn position_runs(layout: &LayoutOrder, ids: &[usize]) -> Vec<Range<usize>> {
    let mut pos: Vec<usize> = ids.iter().map(|&i| layout.gamma[i]).collect();
    pos.sort_unstable();
    pos.dedup();
    let mut runs: Vec<Range<usize>> = Vec::new();
    for p in pos {
        match runs.last_mut() {
            Some(r) if r.end == p => r.end = p + 1,
            _ => runs.push(p..p + 1),
        }
    }
    runs
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProducerBursts {
    pub producer_offset: TileCoord,
    pub mars: Vec<usize>,
    pub bursts: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReadBursts {
    pub per_producer: Vec<ProducerBursts>,
    pub total: usize,
}

/// Read bursts of one tile: runs are never merged across producer tiles.
pub fn count_read_bursts(layout: &LayoutOrder, summary: &TileIOSummary) -> ReadBursts {
    let per_producer: Vec<ProducerBursts> = summary
        .inputs_by_producer()
        .into_iter()
        .map(|(producer_offset, mars)| ProducerBursts {
            bursts: position_runs(layout, &mars).len(),
            producer_offset,
            mars,
        })
        .collect();
    let total = per_producer.iter().map(|p| p.bursts).sum();
    ReadBursts { per_producer, total }
}

/// One contiguous, bus-aligned block per tile, laid out in schedule order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllocationMap {
    pub capacity_bytes: u64,
    bases: HashMap<TileCoord, u64>,
    order: Vec<TileCoord>,
}

impl AllocationMap {
    pub fn base(&self, tile: &TileCoord) -> Option<u64> {
        self.bases.get(tile).copied()
    }

    pub fn tiles(&self) -> &[TileCoord] {
        &self.order
    }

    pub fn total_bytes(&self) -> u64 {
        self.capacity_bytes * self.order.len() as u64
    }

    /// Every tile writes its whole block at once.
    pub fn write_bursts_per_tile(&self) -> usize {
        1
    }
}

/// Assigns disjoint blocks of `capacity_bytes` (rounded up to a bus word).
pub fn allocate_blocks(schedule: &[TileCoord], capacity_bytes: u64, bus_width_bits: u32) -> AllocationMap {
    let word = u64::from(bus_width_bits / 8).max(1);
    let capacity_bytes = capacity_bytes.div_ceil(word) * word;
    let bases = schedule
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as u64 * capacity_bytes))
        .collect();
    AllocationMap {
        capacity_bytes,
        bases,
        order: schedule.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{preset, IVec};

    fn jacobi_summary() -> TileIOSummary {
        let p = preset("jacobi-1d").unwrap();
        TileIOSummary::analyze(&p.tiling, &p.kernel).unwrap()
    }

    /// Labels O1..O4 by consumer set:
    /// O1 read by NW only, O2 by all three, O3 by NE and NW, O4 by NE only.
    fn labels(s: &TileIOSummary) -> [usize; 4] {
        let find = |n: usize, has: &[i64]| {
            s.outputs
                .iter()
                .find(|m| m.signature.len() == n && m.signature.contains(&IVec::new(has)))
                .unwrap()
                .id
        };
        // consumer offsets: (1,0) NE, (1,1) N, (0,1) NW
        let o2 = find(3, &[1, 1]);
        let o3 = find(2, &[1, 0]);
        let o1 = s
            .outputs
            .iter()
            .find(|m| m.signature.0 == vec![IVec::new(&[0, 1])])
            .unwrap()
            .id;
        let o4 = s
            .outputs
            .iter()
            .find(|m| m.signature.0 == vec![IVec::new(&[1, 0])])
            .unwrap()
            .id;
        [o1, o2, o3, o4]
    }

    #[test]
    fn jacobi_weights() {
        let s = jacobi_summary();
        let w = build_weights(&s.outputs);
        let [o1, o2, o3, o4] = labels(&s);
        assert_eq!(w.get(o2, o3), 2);
        assert_eq!(w.get(o1, o2), 1);
        assert_eq!(w.get(o1, o4), 0);
        assert_eq!(w.get(o3, o2), 2);
    }

    #[test]
    fn trivial_weights() {
        let s = jacobi_summary();
        assert_eq!(build_weights(&s.outputs[..1]).rows(), vec![vec![0]]);
        let w = WeightMatrix::zeros(2);
        assert_eq!(w.rows(), vec![vec![0, 0], vec![0, 0]]);
    }

    #[test]
    fn burst_counts_for_layouts() {
        let s = jacobi_summary();
        let w = build_weights(&s.outputs);
        let [o1, o2, o3, o4] = labels(&s);

        let good = LayoutOrder::from_order(vec![o1, o3, o2, o4], &w);
        assert_eq!(good.objective, 4);
        let b = count_read_bursts(&good, &s);
        assert_eq!(b.total, 3);
        assert!(b.per_producer.iter().all(|p| p.bursts == 1));

        let bad = LayoutOrder::from_order(vec![o2, o1, o4, o3], &w);
        let b = count_read_bursts(&bad, &s);
        assert_eq!(b.total, 5);
        let runs: Vec<usize> = b.per_producer.iter().map(|p| p.bursts).collect();
        // S reads only O2; SW (O2,O3,O4) and SE (O1,O2,O3) each split in two
        assert_eq!(runs.iter().filter(|&&r| r == 2).count(), 2);
    }

    #[test]
    fn runs_of_positions() {
        let w = WeightMatrix::zeros(5);
        let l = LayoutOrder::from_order(vec![4, 3, 2, 1, 0], &w);
        assert_eq!(position_runs(&l, &[4, 2, 1]), vec![0..1, 2..4]);
        assert_eq!(position_runs(&l, &[]), Vec::<Range<usize>>::new());
    }

    #[test]
    fn allocation_is_disjoint_and_aligned() {
        let tiles: Vec<_> = (0..3).map(|i| IVec::new(&[i, 0])).collect();
        let a = allocate_blocks(&tiles, 256, 64);
        let bases: Vec<u64> = tiles.iter().map(|t| a.base(t).unwrap()).collect();
        assert_eq!(bases, vec![0, 256, 512]);
        let a = allocate_blocks(&tiles, 250, 64);
        assert_eq!(a.capacity_bytes, 256);
        assert_eq!(a.total_bytes(), 768);
        assert_eq!(a.write_bursts_per_tile(), 1);
    }
}
