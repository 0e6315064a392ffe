//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
//!
//! ```bash
//! cargo test --release --test acceptance
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use burstlab::codec::{
    compress_block, compress_mars, decompress_at, decompress_mars, decompress_seek, header_bits, CompressedBlock,
};
use burstlab::kernel::{preset, preset_names, DataTypeSpec, Initializer, Kernel, ProblemInstance, TilingScheme};
use burstlab::layout::{build_weights, count_read_bursts, export_ilp, solve_layout, solve_layout_exact, WeightMatrix};
use burstlab::mars::TileIOSummary;
use burstlab::membus::{BusConfig, Direction, Transfer};
use burstlab::sim::{run_tiled, SimOptions, SimReport, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 jacobi-1d MARS and burst counts", c1_counts),
        ("2 layout solver optimality", c2_optimality),
        ("3 burst/objective duality", c3_duality),
        ("4 codec roundtrip", c4_roundtrip),
        ("5 codec size law", c5_size_law),
        ("6 tiled result equals reference", c6_end_to_end),
        ("7 compression ratio", c7_ratio),
        ("8 transfer-cycle ordering", c8_ordering),
        ("9 packing waste bound", c9_waste),
        ("10 analyze + layout time", c10_timing),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        let t = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({secs:.1} s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.1} s): {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn within(limit: Duration, t: Instant, what: &str) -> Result<(), String> {
    let e = t.elapsed();
    if e > limit {
        return Err(format!(
            "{what} took {:.1} s, limit {} s",
            e.as_secs_f64(),
            limit.as_secs()
        ));
    }
    Ok(())
}

fn simulate(
    k: &Kernel,
    ts: &TilingScheme,
    pi: &ProblemInstance,
    v: Variant,
) -> Result<(SimReport, Vec<Transfer>), String> {
    let run = run_tiled(k, ts, pi, v, &SimOptions::default()).map_err(|e| format!("{} {v}: {e}", k.name))?;
    Ok((run.report, run.log.transfers))
}

fn c1_counts() -> Check {
    let t = Instant::now();
    let p = preset("jacobi-1d").map_err(|e| e.to_string())?;
    for (s, time, n) in [(6, 20, 40), (64, 140, 140), (200, 400, 400)] {
        let ts = p.with_tile(&[s, s]).map_err(|e| e.to_string())?;
        let summary = TileIOSummary::analyze(&ts, &p.kernel).map_err(|e| e.to_string())?;
        let layout = solve_layout(&build_weights(&summary.outputs));
        let bursts = count_read_bursts(&layout, &summary).total;
        let got = (summary.inputs.len(), summary.outputs.len(), bursts);
        ensure!(
            got == (7, 4, 3),
            "{s}x{s}: (in, out, read bursts) = {got:?}, want (7, 4, 3)"
        );
        ensure!(
            summary.outputs.len() == common::brute_mars(&ts, &p.kernel).len()
                && summary.inputs.len() == common::brute_input_mars(&ts, &p.kernel),
            "{s}x{s}: enumeration oracle disagrees"
        );

        // writes measured on full tiles of a run big enough to have some
        let pi = ProblemInstance::new(time, vec![n], Initializer::Polybench).map_err(|e| e.to_string())?;
        let (r, _) = simulate(&p.kernel, &ts, &pi, Variant::MarsPacked)?;
        ensure!(r.tiles_on_fpga_path > 0, "{s}x{s}: no full tile at T={time}, n={n}");
        ensure!(
            r.writes.bursts == r.tiles_on_fpga_path && r.reads.bursts == 3 * r.tiles_on_fpga_path,
            "{s}x{s}: {} read / {} write bursts over {} tiles",
            r.reads.bursts,
            r.writes.bursts,
            r.tiles_on_fpga_path
        );
    }
    within(Duration::from_secs(10), t, "analysis")?;
    Ok("7 in, 4 out, 3 read bursts, 1 write burst at 6x6, 64x64 and 200x200".into())
}

fn highs_optimum(lp: &str) -> Option<f64> {
    let dir = tempfile::tempdir().ok()?;
    let path = dir.path().join("model.lp");
    std::fs::write(&path, lp).ok()?;
    let script = "import sys, highspy\n\
                  h = highspy.Highs()\n\
                  h.setOptionValue('output_flag', False)\n\
                  h.readModel(sys.argv[1])\n\
                  h.run()\n\
                  assert h.getModelStatus() == highspy.HighsModelStatus.kOptimal\n\
                  print(h.getInfo().objective_function_value)\n";
    let out = Command::new("python3").arg("-c").arg(script).arg(&path).output().ok()?;
    if !out.status.success() {
        return None;
    }
    String::from_utf8_lossy(&out.stdout).trim().parse().ok()
}

fn has_highspy() -> bool {
    Command::new("python3")
        .args(["-c", "import highspy"])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn c2_optimality() -> Check {
    let p = preset("jacobi-1d").map_err(|e| e.to_string())?;
    let summary = TileIOSummary::analyze(&p.tiling, &p.kernel).map_err(|e| e.to_string())?;
    let w = build_weights(&summary.outputs);
    let exact = solve_layout_exact(&w).map_err(|e| e.to_string())?;
    ensure!(exact.objective == 4, "jacobi-1d objective {}, want 4", exact.objective);
    let brute = common::brute_max_path(&w.rows());
    ensure!(brute == exact.objective, "permutation search gives {brute}");

    let ilp_note = if has_highspy() {
        let opt = highs_optimum(&export_ilp(&w)).ok_or("highspy failed on the exported model")?;
        ensure!((opt - 4.0).abs() < 1e-6, "ILP optimum {opt}, want 4");
        "ILP optimum 4 (HiGHS)"
    } else {
        "ILP check skipped, highspy not installed"
    };

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..100 {
        let n = rng.gen_range(1..=8);
        let mut rows = vec![vec![0u32; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = if rng.gen_bool(0.4) { 0 } else { rng.gen_range(1..5) };
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        let got = solve_layout_exact(&WeightMatrix::from_rows(&rows))
            .map_err(|e| e.to_string())?
            .objective;
        let want = common::brute_max_path(&rows);
        ensure!(
            got == want,
            "random matrix {case} (n = {n}): exact {got}, brute force {want}"
        );
    }
    Ok(format!(
        "objective 4 = permutation search; {ilp_note}; 100 random matrices agree"
    ))
}

fn duality_holds(k: &Kernel, ts: &TilingScheme, what: &str) -> Result<(), String> {
    let summary = TileIOSummary::analyze(ts, k).map_err(|e| format!("{what}: {e}"))?;
    let layout = solve_layout(&build_weights(&summary.outputs));
    let bursts = count_read_bursts(&layout, &summary).total;
    ensure!(
        bursts == common::brute_bursts(&layout, &summary),
        "{what}: burst count disagrees with run enumeration"
    );
    // every input MARS is one element of some S_p
    let lhs = summary.inputs.len() as i64 - i64::from(layout.objective);
    ensure!(
        bursts as i64 == lhs,
        "{what}: {bursts} bursts, sum |S_p| - objective = {lhs}"
    );
    Ok(())
}

fn c3_duality() -> Check {
    for name in preset_names() {
        let p = preset(name).map_err(|e| e.to_string())?;
        duality_holds(&p.kernel, &p.tiling, name)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..50 {
        let (k, ts) = common::random_kernel(&mut rng);
        duality_holds(&k, &ts, &format!("random kernel {i} {:?}", ts.sizes()))?;
    }
    Ok("3 presets and 50 random kernels".into())
}

const WIDTHS: [u32; 7] = [12, 17, 18, 24, 28, 32, 64];
const CASES_PER_WIDTH: usize = 100_000;

fn random_case(rng: &mut ChaCha8Rng, n: u32) -> Vec<u64> {
    let len = rng.gen_range(1..=24);
    common::random_stream(rng, n, len)
}

/// Decodes the block front to back, ignoring the markers.
fn sequential_slices(block: &CompressedBlock) -> burstlab::Result<Vec<Vec<u64>>> {
    let mut pos = 0;
    let mut out = Vec::new();
    for &count in &block.word_counts {
        let (ws, end) = decompress_at(&block.stream, pos, block.word_bits, count)?;
        out.push(ws);
        pos = end;
    }
    Ok(out)
}

fn c4_roundtrip() -> Check {
    let t = Instant::now();
    // exhaustive: every N=4 stream of length 0..=3
    let mut exhaustive = 0;
    for len in 0..=3u32 {
        for code in 0..16u64.pow(len) {
            let ws: Vec<u64> = (0..len).map(|i| (code >> (4 * i)) & 15).collect();
            let back = decompress_mars(&compress_mars(&ws, 4), 0, 4, ws.len()).map_err(|e| e.to_string())?;
            ensure!(back == ws, "N=4 stream {ws:?} decoded as {back:?}");
            exhaustive += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in WIDTHS {
        for _ in 0..CASES_PER_WIDTH {
            let ws = random_case(&mut rng, n);
            let back = decompress_mars(&compress_mars(&ws, n), 0, n, ws.len()).map_err(|e| e.to_string())?;
            ensure!(back == ws, "N={n} stream {ws:?} decoded as {back:?}");
        }
    }

    for b in 0..1000 {
        let n = WIDTHS[b % WIDTHS.len()];
        let bus = [32, 64, 128, 256][rng.gen_range(0..4)];
        let mars: Vec<Vec<u64>> = (0..rng.gen_range(1..=12)).map(|_| random_case(&mut rng, n)).collect();
        let block = compress_block(&mars, n, bus);
        let sequential = sequential_slices(&block).map_err(|e| e.to_string())?;
        for k in 0..mars.len() {
            let seek = decompress_seek(&block, k).map_err(|e| e.to_string())?;
            ensure!(
                seek == sequential[k] && seek == mars[k],
                "block {b}, MARS {k}: seek decode differs"
            );
        }
    }
    within(Duration::from_secs(60), t, "codec suite")?;
    Ok(format!(
        "{exhaustive} exhaustive N=4 streams, {} random streams, 1000 blocks",
        CASES_PER_WIDTH * WIDTHS.len()
    ))
}

fn c5_size_law() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for n in WIDTHS {
        let hb = (f64::from(n).log2().floor() as u64) + 1;
        ensure!(u64::from(header_bits(n)) == hb, "header width for N={n}");
        let bound = u64::from(n) + hb + 1;
        for _ in 0..CASES_PER_WIDTH {
            let ws = random_case(&mut rng, n);
            let len = compress_mars(&ws, n).len() as u64;
            let formula = common::token_sum(&ws, n);
            ensure!(len == formula, "N={n} {ws:?}: {len} bits, token sum {formula}");
            ensure!(
                len <= bound * ws.len() as u64,
                "N={n}: {len} bits over {} words",
                ws.len()
            );
            for p in ws.windows(2) {
                ensure!(common::token_bits(p[0], p[1], n) <= bound, "token above N + hb + 1");
            }
            worst = worst.max(len as f64 / (ws.len() as f64 * bound as f64));
        }
    }
    Ok(format!(
        "{} streams match the token sum, max {:.3} of the worst-case bound",
        CASES_PER_WIDTH * WIDTHS.len(),
        worst
    ))
}

fn c6_end_to_end() -> Check {
    let t = Instant::now();
    let mut runs = 0;
    for name in preset_names() {
        let p = preset(name).map_err(|e| e.to_string())?;
        let dtypes = [
            p.kernel.dtype,
            DataTypeSpec::float(32).unwrap(),
            DataTypeSpec::float(64).unwrap(),
        ];
        for dtype in dtypes {
            let mut k = p.kernel.clone();
            k.dtype = dtype;
            let pi = &p.problem;
            ensure!(
                pi.time_steps <= 32 && pi.spatial_sizes.iter().all(|&n| n <= 64),
                "{name}: problem too large"
            );
            for v in Variant::ALL {
                let (r, _) = simulate(&k, &p.tiling, pi, v)?;
                ensure!(
                    r.correct && r.mismatches == 0 && r.tiles_on_fpga_path > 0,
                    "{name} {dtype} {v}: {} mismatches, {} full tiles",
                    r.mismatches,
                    r.tiles_on_fpga_path
                );
                runs += 1;
            }
        }
        let seeded = ProblemInstance::new(
            p.problem.time_steps,
            p.problem.spatial_sizes.clone(),
            Initializer::Random { seed: 6 },
        )
        .map_err(|e| e.to_string())?;
        let (r, _) = simulate(&p.kernel, &p.tiling, &seeded, Variant::MarsCompressed)?;
        ensure!(r.correct, "{name} random data: {} mismatches", r.mismatches);
        runs += 1;
    }
    within(Duration::from_secs(120), t, "simulations")?;
    Ok(format!("{runs} runs bit-identical (fixed:18, float:32, float:64)"))
}

fn jacobi_1d_large(tile: i64) -> Result<(Kernel, TilingScheme, ProblemInstance), String> {
    let p = preset("jacobi-1d").map_err(|e| e.to_string())?;
    let ts = p.with_tile(&[tile, tile]).map_err(|e| e.to_string())?;
    let pi = ProblemInstance::new(400, vec![400], Initializer::Polybench).map_err(|e| e.to_string())?;
    Ok((p.kernel, ts, pi))
}

fn c7_ratio() -> Check {
    let t = Instant::now();
    let (k, ts, pi) = jacobi_1d_large(200)?;
    let (big, _) = simulate(&k, &ts, &pi, Variant::MarsCompressed)?;
    let (k, ts, pi) = jacobi_1d_large(6)?;
    let (small, _) = simulate(&k, &ts, &pi, Variant::MarsCompressed)?;
    let big_pad = big.compression_ratio_with_padding.ok_or("no full 200x200 tile")?;
    let small_pad = small.compression_ratio_with_padding.ok_or("no full 6x6 tile")?;
    ensure!(big.correct && small.correct, "compressed runs are not bit-identical");
    ensure!(big_pad >= 3.0, "200x200 ratio with padding {big_pad:.2} < 3.0");
    ensure!(
        small_pad < big_pad,
        "6x6 ratio {small_pad:.2} not below 200x200 ratio {big_pad:.2}"
    );
    within(Duration::from_secs(60), t, "ratio runs")?;
    Ok(format!(
        "200x200 with padding {big_pad:.2} (true {:.2}); 6x6 with padding {small_pad:.2} (true {:.2})",
        big.compression_ratio_true.unwrap_or(0.0),
        small.compression_ratio_true.unwrap_or(0.0)
    ))
}

fn c8_ordering() -> Check {
    let (k, ts, pi) = jacobi_1d_large(200)?;
    let mut cycles = Vec::new();
    for v in Variant::ALL {
        let (r, _) = simulate(&k, &ts, &pi, v)?;
        ensure!(r.tiles_on_fpga_path > 0, "{v}: no full tile");
        cycles.push((v, r.read_cycles_per_tile()));
    }
    let (c, pk, pd) = (cycles[0].1, cycles[1].1, cycles[2].1);
    ensure!(
        c <= pk && pk <= pd,
        "read cycles per tile: compressed {c}, packed {pk}, padded {pd}"
    );
    let minimal = cycles[3].1;

    let mut notes = vec![format!(
        "jacobi-1d 200x200 read cycles/tile {c:.0} <= {pk:.0} <= {pd:.0}, minimal/compressed {:.2}x",
        minimal / c
    )];
    for name in ["jacobi-2d", "seidel-2d"] {
        let p = preset(name).map_err(|e| e.to_string())?;
        let (base, _) = simulate(&p.kernel, &p.tiling, &p.problem, Variant::BaselineMinimal)?;
        let mut compressed_cycles = 0.0;
        for v in [Variant::MarsCompressed, Variant::MarsPacked, Variant::MarsPadded] {
            let (r, _) = simulate(&p.kernel, &p.tiling, &p.problem, v)?;
            ensure!(
                r.read_bursts_per_tile() < base.read_bursts_per_tile(),
                "{name} {v}: {:.1} read bursts/tile, baseline-minimal {:.1}",
                r.read_bursts_per_tile(),
                base.read_bursts_per_tile()
            );
            if v == Variant::MarsCompressed {
                compressed_cycles = r.read_cycles_per_tile();
            }
        }
        notes.push(format!(
            "{name} bursts/tile below baseline-minimal's {:.0}, cycle ratio {:.2}x",
            base.read_bursts_per_tile(),
            base.read_cycles_per_tile() / compressed_cycles
        ));
    }
    Ok(notes.join("; "))
}

fn c9_waste() -> Check {
    let mut checked = 0;
    let mut worst = 0;
    let mut runs: Vec<(Kernel, TilingScheme, ProblemInstance)> = Vec::new();
    for name in preset_names() {
        let p = preset(name).map_err(|e| e.to_string())?;
        runs.push((p.kernel.clone(), p.tiling.clone(), p.problem.clone()));
        let mut k = p.kernel.clone();
        k.dtype = DataTypeSpec::float(32).unwrap();
        runs.push((k, p.tiling.clone(), p.problem.clone()));
    }
    runs.push(jacobi_1d_large(200)?);
    runs.push(jacobi_1d_large(6)?);
    for (k, ts, pi) in &runs {
        for bus in [
            BusConfig::default(),
            BusConfig::new(128, 16, 256).unwrap(),
            BusConfig::new(32, 16, 256).unwrap(),
        ] {
            let opts = SimOptions { bus, threads: 1 };
            let run = run_tiled(k, ts, pi, Variant::MarsCompressed, &opts).map_err(|e| e.to_string())?;
            for tr in run.log.transfers.iter().filter(|t| t.direction == Direction::Read) {
                let waste = tr.length_bits - tr.useful_bits;
                ensure!(
                    waste <= 2 * bus.width(),
                    "{} {:?}: transfer of {} bits wastes {waste} > 2 x {}",
                    k.name,
                    tr.tile,
                    tr.length_bits,
                    bus.width()
                );
                worst = worst.max(waste * 100 / (2 * bus.width()));
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} read transfers, worst waste {worst}% of 2W"))
}

fn c10_timing() -> Check {
    let mut notes = Vec::new();
    for name in preset_names() {
        let t = Instant::now();
        let p = preset(name).map_err(|e| e.to_string())?;
        let summary = TileIOSummary::analyze(&p.tiling, &p.kernel).map_err(|e| e.to_string())?;
        let layout = solve_layout(&build_weights(&summary.outputs));
        let _ = count_read_bursts(&layout, &summary);
        within(Duration::from_secs(5), t, name)?;
        notes.push(format!("{name} {:.2} s", t.elapsed().as_secs_f64()));
    }
    Ok(notes.join(", "))
}
