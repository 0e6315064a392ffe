//! A kernel described in JSON instead of a preset.
//!
//! ```bash
//! cargo run --example custom_config -- examples/configs/heat1d_float.json
//! ```

use burstlab::kernel::RunSetup;
use burstlab::mars::TileIOSummary;
use burstlab::sim::{run_tiled, SimOptions, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/heat1d_float.json").into());
    let setup = RunSetup::from_json(&std::fs::read_to_string(&path)?)?;
    let summary = TileIOSummary::analyze(&setup.tiling, &setup.kernel)?;
    println!(
        "{}: {} output MARS, {} input MARS",
        setup.kernel.name,
        summary.outputs.len(),
        summary.inputs.len()
    );

    let run = run_tiled(
        &setup.kernel,
        &setup.tiling,
        &setup.problem,
        Variant::MarsCompressed,
        &SimOptions::default(),
    )?;
    println!(
        "dtype {}, correct {}, {} transfers logged",
        run.report.dtype,
        run.report.correct,
        run.log.transfers.len()
    );

    // a broken config reports the offending field
    let err = RunSetup::from_json(r#"{"kernel": {"name": "x", "deps": [], "coeffs": 1, "dtype": {"kind": "fixed", "totalBits": 99}}, "tiling": {"kind": "diamond1d", "sizes": [4, 4]}, "problem": {"timeSteps": 1, "spatialSizes": [8]}}"#)
        .unwrap_err();
    println!("rejected: {err}");
    Ok(())
}
