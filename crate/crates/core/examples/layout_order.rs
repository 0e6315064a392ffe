//! Orders output MARS so each consumer reads its inputs in few bursts, and
//! writes the same problem as an LP model.
//!
//! ```bash
//! cargo run --example layout_order -- /tmp/jacobi2d.lp
//! ```

use burstlab::kernel::preset;
use burstlab::layout::{
    build_weights, count_read_bursts, export_ilp, solve_layout_exact, solve_layout_greedy, LayoutOrder,
};
use burstlab::mars::TileIOSummary;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = preset("jacobi-2d")?;
    let summary = TileIOSummary::analyze(&p.tiling, &p.kernel)?;
    let w = build_weights(&summary.outputs);

    let exact = solve_layout_exact(&w)?;
    let greedy = solve_layout_greedy(&w);
    let naive = LayoutOrder::identity(&w);
    for (name, layout) in [("identity", &naive), ("greedy", &greedy), ("exact", &exact)] {
        let bursts = count_read_bursts(layout, &summary);
        println!(
            "{name:>8}: objective {:>2}, read bursts {:>2}",
            layout.objective, bursts.total
        );
    }
    println!("exact order: {:?}", exact.order);

    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, export_ilp(&w))?;
        println!("wrote {path}");
    }
    Ok(())
}
