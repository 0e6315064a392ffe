//! Software execution of the tiled accelerator.
//!
//! Full tiles go through the accelerator path: fetch their input MARS from
//! the modeled off-chip memory, decode, dispatch into the on-chip buffer,
//! compute, collect and write one block. Tiles clipped by the domain run on
//! the host path: same data flow, but only in-domain points are computed and
//! their transfers are not counted. The final time plane is compared bit for
//! bit with an untiled run.

mod arith;
mod dispatch;
mod grid;
mod tiled;

pub use arith::Arith;
pub use dispatch::{collect, dispatch, DispatchTable, TilePlan};
pub use grid::{initial_plane, run_reference, ReferenceRun, ValueGrid};
pub use tiled::{run_tiled, SimOptions, SimRun};

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::membus::{BusConfig, DirectionTotals};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    MarsCompressed,
    MarsPacked,
    MarsPadded,
    BaselineMinimal,
    BaselineBbox,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::MarsCompressed,
        Variant::MarsPacked,
        Variant::MarsPadded,
        Variant::BaselineMinimal,
        Variant::BaselineBbox,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::MarsCompressed => "mars-compressed",
            Variant::MarsPacked => "mars-packed",
            Variant::MarsPadded => "mars-padded",
            Variant::BaselineMinimal => "baseline-minimal",
            Variant::BaselineBbox => "baseline-bbox",
        }
    }

    pub fn is_mars(&self) -> bool {
        matches!(
            self,
            Variant::MarsCompressed | Variant::MarsPacked | Variant::MarsPadded
        )
    }

    /// Comma-separated names, or `all`.
    pub fn parse_list(text: &str) -> Result<Vec<Variant>> {
        if text.trim() == "all" {
            return Ok(Self::ALL.to_vec());
        }
        let mut out = Vec::new();
        for part in text.split(',') {
            let v: Variant = part.trim().parse()?;
            if !out.contains(&v) {
                out.push(v);
            }
        }
        Ok(out)
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::UnknownVariant(s.to_string()))
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SimReport {
    pub variant: Variant,
    pub kernel: String,
    pub dtype: String,
    pub tile_sizes: Vec<i64>,
    pub time_steps: i64,
    pub spatial_sizes: Vec<i64>,
    pub bus: BusConfig,
    pub tiles_on_fpga_path: u64,
    pub tiles_on_host_path: u64,
    /// Transfers of accelerator-path tiles only.
    pub reads: DirectionTotals,
    pub writes: DirectionTotals,
    pub total_cycles: u64,
    /// Uncompressed packed bits over compressed bits, accelerator-path blocks.
    pub compression_ratio_true: Option<f64>,
    /// Uncompressed padded bits over compressed bits, accelerator-path blocks.
    pub compression_ratio_with_padding: Option<f64>,
    /// Accelerator-path blocks whose compressed size exceeds their packed size.
    pub expanded_blocks: u64,
    pub saturations: u64,
    pub mismatches: u64,
    pub correct: bool,
}

impl SimReport {
    pub fn read_bursts_per_tile(&self) -> f64 {
        if self.tiles_on_fpga_path == 0 {
            0.0
        } else {
            self.reads.bursts as f64 / self.tiles_on_fpga_path as f64
        }
    }

    pub fn read_cycles_per_tile(&self) -> f64 {
        if self.tiles_on_fpga_path == 0 {
            0.0
        } else {
            self.reads.cycles as f64 / self.tiles_on_fpga_path as f64
        }
    }
}

/// `(ratio_true, ratio_with_padding)` from per-block `(words, compressed bits)`.
pub fn compression_stats(blocks: &[(u64, u64)], word_bits: u32, container_bits: u32) -> (Option<f64>, Option<f64>) {
    let words: u64 = blocks.iter().map(|b| b.0).sum();
    let bits: u64 = blocks.iter().map(|b| b.1).sum();
    if bits == 0 {
        return (None, None);
    }
    (
        Some((words * u64::from(word_bits)) as f64 / bits as f64),
        Some((words * u64::from(container_bits)) as f64 / bits as f64),
    )
}
