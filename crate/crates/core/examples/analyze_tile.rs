//! Output and input MARS of one jacobi-2d tile.
//!
//! ```bash
//! cargo run --example analyze_tile
//! ```

use burstlab::kernel::preset;
use burstlab::mars::{verify_partition, TileIOSummary};

fn main() -> burstlab::Result<()> {
    let p = preset("jacobi-2d")?;
    let summary = TileIOSummary::analyze(&p.tiling, &p.kernel)?;

    println!("{} tiled {:?}", p.kernel.name, p.tiling.sizes());
    println!(
        "flow-out {} words in {} MARS",
        summary.flow_out_words(),
        summary.outputs.len()
    );
    for m in &summary.outputs {
        let consumers: Vec<_> = m.signature.iter().map(|o| o.to_vec()).collect();
        println!(
            "  mars {:>2}: {:>3} words, read by {:?}",
            m.id,
            m.size_words(),
            consumers
        );
    }

    println!(
        "flow-in {} words from {} MARS",
        summary.flow_in_words(),
        summary.inputs.len()
    );
    for (producer, ids) in summary.inputs_by_producer() {
        println!("  from tile {:?}: {:?}", producer.to_vec(), ids);
    }

    let report = verify_partition(&summary, &p.tiling, &p.kernel)?;
    println!("partition ok: {}", report.ok);
    Ok(())
}
