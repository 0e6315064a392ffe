//! The command-line front end driven from code, output captured in memory.
//!
//! ```bash
//! cargo run --example cli_in_process
//! ```

fn main() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = burstlab::cli::main_with(
        [
            "burstlab",
            "simulate",
            "--preset",
            "jacobi-1d",
            "--variants",
            "mars-compressed,baseline-minimal",
        ],
        &mut out,
        &mut err,
    );
    let reports: serde_json::Value = serde_json::from_slice(&out).expect("json on stdout");
    for r in reports.as_array().into_iter().flatten() {
        println!(
            "{:<17} total cycles {}",
            r["variant"].as_str().unwrap_or("?"),
            r["totalCycles"]
        );
    }
    println!("exit code {code}");
}
