//! On-chip buffer of one tile and the unrolled address tables that move MARS
//! words in and out of it.
//!
//! The buffer holds the tile's own points first (lexicographic order), then
//! its flow-in points. All tables are built once on the origin tile and reused
//! for every tile.

use std::collections::HashMap;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::kernel::{IVec, Kernel, Point, TilingScheme};
use crate::mars::{flow_in, InputRef, TileIOSummary};

/// Buffer addresses of the words of one MARS, in MARS order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DispatchTable {
    pub addrs: Vec<usize>,
}

impl DispatchTable {
    pub fn len(&self) -> usize {
        self.addrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.addrs.is_empty()
    }
}

/// Scatters MARS words into the buffer.
pub fn dispatch(words: &[u64], table: &DispatchTable, buffer: &mut [u64]) -> Result<()> {
    if words.len() != table.len() {
        return Err(Error::CorruptStream(format!(
            "MARS has {} words, its table {}",
            words.len(),
            table.len()
        )));
    }
    for (&w, &a) in words.iter().zip(&table.addrs) {
        let len = buffer.len();
        *buffer.get_mut(a).ok_or(Error::AddressOutOfBounds { addr: a, len })? = w;
    }
    Ok(())
}

/// Gathers MARS words from the buffer.
pub fn collect(buffer: &[u64], table: &DispatchTable) -> Result<Vec<u64>> {
    table
        .addrs
        .iter()
        .map(|&a| {
            buffer.get(a).copied().ok_or(Error::AddressOutOfBounds {
                addr: a,
                len: buffer.len(),
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct TilePlan {
    /// Points of the origin tile, lexicographic; point `i` lives at address `i`.
    pub points: Vec<Point>,
    /// Flow-in points of the origin tile, at addresses `points.len()..`.
    pub flow_in: Vec<Point>,
    /// Operand addresses of point `i`, in dependence order.
    pub operands: Vec<SmallVec<[usize; 9]>>,
    /// One table per entry of `summary.inputs`.
    pub inputs: Vec<(InputRef, DispatchTable)>,
    /// One table per output MARS id.
    pub outputs: Vec<DispatchTable>,
}

impl TilePlan {
    pub fn build(ts: &TilingScheme, k: &Kernel, summary: &TileIOSummary) -> Result<Self> {
        let origin = IVec::zeros(ts.dim());
        let points = ts.tile_points(&origin)?;
        let flow_in: Vec<Point> = flow_in(ts, k)?.into_iter().collect();
        let addr: HashMap<&Point, usize> = points.iter().chain(&flow_in).enumerate().map(|(i, p)| (p, i)).collect();
        let lookup = |p: &Point| {
            addr.get(p)
                .copied()
                .ok_or_else(|| Error::InvalidTiling(format!("point {p:?} has no buffer address")))
        };

        let mut operands = Vec::with_capacity(points.len());
        for p in &points {
            let ops = k.deps.iter().map(|d| lookup(&(p - &d.0))).collect::<Result<_>>()?;
            operands.push(ops);
        }
        let mut inputs = Vec::with_capacity(summary.inputs.len());
        for r in &summary.inputs {
            let shift = ts.translation(&r.producer_offset)?;
            let addrs = summary.outputs[r.mars_id]
                .points
                .iter()
                .map(|p| lookup(&(&shift + p)))
                .collect::<Result<_>>()?;
            inputs.push((r.clone(), DispatchTable { addrs }));
        }
        let outputs = summary
            .outputs
            .iter()
            .map(|m| {
                m.points
                    .iter()
                    .map(&lookup)
                    .collect::<Result<_>>()
                    .map(|addrs| DispatchTable { addrs })
            })
            .collect::<Result<_>>()?;
        Ok(TilePlan {
            points,
            flow_in,
            operands,
            inputs,
            outputs,
        })
    }

    pub fn buffer_len(&self) -> usize {
        self.points.len() + self.flow_in.len()
    }

    pub fn input_table(&self, r: &InputRef) -> Option<&DispatchTable> {
        self.inputs.iter().find(|(x, _)| x == r).map(|(_, t)| t)
    }
}
