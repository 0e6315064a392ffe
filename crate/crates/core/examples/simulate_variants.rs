//! Runs seidel-2d through every transfer variant and checks each against the
//! untiled reference.
//!
//! ```bash
//! cargo run --release --example simulate_variants
//! ```

use burstlab::kernel::{preset, ProblemInstance};
use burstlab::sim::{run_tiled, SimOptions, Variant};

fn main() -> burstlab::Result<()> {
    let p = preset("seidel-2d")?;
    let problem = ProblemInstance::new(12, vec![48, 48], p.problem.init)?;
    let opts = SimOptions {
        threads: 4,
        ..SimOptions::default()
    };
    println!(
        "{:<17} {:>6} {:>12} {:>12} {:>8}",
        "variant", "tiles", "read bursts", "read cycles", "correct"
    );
    for v in Variant::ALL {
        let r = run_tiled(&p.kernel, &p.tiling, &problem, v, &opts)?.report;
        println!(
            "{:<17} {:>6} {:>12.1} {:>12.1} {:>8}",
            v.name(),
            r.tiles_on_fpga_path,
            r.read_bursts_per_tile(),
            r.read_cycles_per_tile(),
            r.correct
        );
        if let Some(ratio) = r.compression_ratio_with_padding {
            println!(
                "{:<17} compression {:.2} (vs packed {:.2})",
                "",
                ratio,
                r.compression_ratio_true.unwrap_or(1.0)
            );
        }
    }
    Ok(())
}
