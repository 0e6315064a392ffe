//! Off-chip bus model and transfer planning.
//!
//! A burst costs a fixed initiation latency plus one cycle per bus-width beat;
//! bursts longer than `max_burst_beats` are split. Transfers always cover
//! whole, aligned bus words.

mod baseline;
mod plan;

pub use baseline::{baseline_bbox, baseline_minimal, BaselineKind, OriginalLayout};
pub use plan::{plan_mars_reads, plan_mars_write, BlockIndex, ReadRun, Usefulness};

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::TileCoord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BusConfig {
    pub width_bits: u32,
    pub burst_latency_cycles: u64,
    pub max_burst_beats: u64,
}

impl Default for BusConfig {
    fn default() -> Self {
        BusConfig {
            width_bits: 64,
            burst_latency_cycles: 16,
            max_burst_beats: 256,
        }
    }
}

impl BusConfig {
    pub fn new(width_bits: u32, burst_latency_cycles: u64, max_burst_beats: u64) -> Result<Self> {
        let cfg = BusConfig {
            width_bits,
            burst_latency_cycles,
            max_burst_beats,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width_bits < 8 || !self.width_bits.is_power_of_two() || self.width_bits > 1 << 15 {
            return Err(Error::InvalidBus(format!(
                "width {} must be a power of two in 8..=32768",
                self.width_bits
            )));
        }
        if self.burst_latency_cycles < 1 {
            return Err(Error::InvalidBus("burst latency must be at least 1 cycle".into()));
        }
        if self.max_burst_beats < 1 {
            return Err(Error::InvalidBus("max burst must be at least 1 beat".into()));
        }
        Ok(())
    }

    pub fn width(&self) -> u64 {
        u64::from(self.width_bits)
    }
}

/// Cycles to move `length_bits`, splitting into bursts of at most `max_burst_beats`.
pub fn burst_cycles(length_bits: u64, cfg: &BusConfig) -> Result<u64> {
    if !length_bits.is_multiple_of(cfg.width()) {
        return Err(Error::UnalignedTransfer(length_bits));
    }
    let beats = length_bits / cfg.width();
    let full = beats / cfg.max_burst_beats;
    let rest = beats % cfg.max_burst_beats;
    let bursts = full + u64::from(rest > 0);
    Ok(bursts * cfg.burst_latency_cycles + beats)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Read,
    Write,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Read => "read",
            Direction::Write => "write",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Transfer {
    pub tile: TileCoord,
    pub direction: Direction,
    pub start_bit: u64,
    pub length_bits: u64,
    /// Bits of the transfer that carry requested data.
    pub useful_bits: u64,
    /// Data words delivered by the transfer.
    pub words: u64,
}

impl Transfer {
    /// Smallest aligned transfer covering bits `[start, end)`.
    pub fn covering(
        tile: TileCoord,
        direction: Direction,
        start: u64,
        end: u64,
        useful_bits: u64,
        words: u64,
        width: u64,
    ) -> Self {
        let lo = start / width * width;
        let hi = end.div_ceil(width).max(lo / width + 1) * width;
        Transfer {
            tile,
            direction,
            start_bit: lo,
            length_bits: hi - lo,
            useful_bits,
            words,
        }
    }

    pub fn beats(&self, cfg: &BusConfig) -> u64 {
        self.length_bits / cfg.width()
    }

    pub fn cycles(&self, cfg: &BusConfig) -> u64 {
        burst_cycles(self.length_bits, cfg).expect("transfers are built aligned")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DirectionTotals {
    /// Logical transfers, before any splitting at `max_burst_beats`.
    pub bursts: u64,
    pub cycles: u64,
    pub transferred_bits: u64,
    pub useful_bits: u64,
}

impl DirectionTotals {
    pub fn add(&mut self, t: &Transfer, cfg: &BusConfig) {
        self.bursts += 1;
        self.cycles += t.cycles(cfg);
        self.transferred_bits += t.length_bits;
        self.useful_bits += t.useful_bits;
    }

    pub fn merge(&mut self, o: &DirectionTotals) {
        self.bursts += o.bursts;
        self.cycles += o.cycles;
        self.transferred_bits += o.transferred_bits;
        self.useful_bits += o.useful_bits;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransferLog {
    pub transfers: Vec<Transfer>,
}

impl TransferLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: Transfer) {
        self.transfers.push(t);
    }

    pub fn extend(&mut self, other: TransferLog) {
        self.transfers.extend(other.transfers);
    }

    pub fn totals(&self, dir: Direction, cfg: &BusConfig) -> DirectionTotals {
        let mut tot = DirectionTotals::default();
        for t in self.transfers.iter().filter(|t| t.direction == dir) {
            tot.add(t, cfg);
        }
        tot
    }

    pub fn cycles(&self, cfg: &BusConfig) -> u64 {
        self.transfers.iter().map(|t| t.cycles(cfg)).sum()
    }

    pub fn to_csv(&self, cfg: &BusConfig) -> String {
        let mut out = String::from("tile,direction,startBit,lengthBits,usefulBits,cycles\n");
        for t in &self.transfers {
            let tile: Vec<String> = t.tile.as_slice().iter().map(i64::to_string).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                tile.join(" "),
                t.direction.as_str(),
                t.start_bit,
                t.length_bits,
                t.useful_bits,
                t.cycles(cfg)
            );
        }
        out
    }
}
