//! Burst cost of one interior jacobi-2d tile: MARS reads against the
//! original-array baselines.
//!
//! ```bash
//! cargo run --example bus_transfers
//! ```

use burstlab::kernel::{preset, TileCoord};
use burstlab::layout::{allocate_blocks, build_weights, solve_layout};
use burstlab::mars::{flow_in, TileIOSummary};
use burstlab::membus::{
    baseline_bbox, baseline_minimal, plan_mars_reads, BlockIndex, BusConfig, Direction, OriginalLayout, Usefulness,
};

fn main() -> burstlab::Result<()> {
    let p = preset("jacobi-2d")?;
    let bus = BusConfig::default();
    let n = p.kernel.dtype.total_bits;
    let summary = TileIOSummary::analyze(&p.tiling, &p.kernel)?;
    let layout = solve_layout(&build_weights(&summary.outputs));

    // Packed words, block positions follow the layout order.
    let words: Vec<u64> = layout
        .order
        .iter()
        .map(|&id| summary.outputs[id].size_words() as u64)
        .collect();
    let index = BlockIndex::uniform(&words, n, Usefulness::Span, bus.width());

    let tile = TileCoord::new(&[1, 4, 4]);
    let by_producer = summary.inputs_by_producer();
    let schedule: Vec<TileCoord> = by_producer.keys().map(|o| &tile + o).collect();
    let alloc = allocate_blocks(&schedule, index.block_bits.div_ceil(8), bus.width_bits);
    let runs = plan_mars_reads(&tile, &by_producer, &layout, &alloc, |_| Some(&index), bus.width())?;
    let mars_cycles: u64 = runs.iter().map(|r| r.transfer.cycles(&bus)).sum();
    println!("mars-packed      {:>2} bursts {:>4} cycles", runs.len(), mars_cycles);

    let original = OriginalLayout {
        depth: p.kernel.temporal_depth(),
        sizes: vec![64, 64],
        cell_bits: p.kernel.dtype.container_bits(),
        word_bits: n,
    };
    let shift = p.tiling.translation(&tile)?;
    let footprint: Vec<_> = flow_in(&p.tiling, &p.kernel)?.iter().map(|q| &shift + q).collect();
    for (name, transfers) in [
        (
            "baseline-minimal",
            baseline_minimal(&tile, &footprint, &original, Direction::Read, bus.width())?,
        ),
        (
            "baseline-bbox",
            baseline_bbox(&tile, &footprint, &original, Direction::Read, bus.width())?,
        ),
    ] {
        let cycles: u64 = transfers.iter().map(|t| t.cycles(&bus)).sum();
        println!("{name:<16} {:>2} bursts {:>4} cycles", transfers.len(), cycles);
    }
    Ok(())
}
