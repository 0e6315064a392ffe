//! Command-line front end. The `burstlab` binary only forwards to [`main_with`].

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::codec::{compress_block, decompress_at, read_block, read_raw_words, write_block, write_raw_words};
use crate::error::Error;
use crate::kernel::{preset, DataTypeSpec, Initializer, Point, ProblemInstance, RunSetup, TilingScheme};
use crate::layout::{
    build_weights, count_read_bursts, export_ilp, solve_layout_exact, solve_layout_greedy, LayoutOrder, ProducerBursts,
    MAX_EXACT_MARS,
};
use crate::mars::{verify_partition, ConsumerSignature, InputRef, Mars, PartitionReport, TileIOSummary};
use crate::membus::BusConfig;
use crate::sim::{run_tiled, SimOptions, SimReport, Variant};

#[derive(Debug, Parser)]
#[command(
    name = "burstlab",
    version,
    about = "MARS analysis, layout, compression and burst simulation for tiled stencils"
)]
pub struct Cli {
    /// Progress messages on stderr.
    #[arg(long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract input/output MARS of one tile and verify the partition.
    Analyze(AnalyzeArgs),
    /// Order the output MARS to minimize read bursts.
    Layout(LayoutArgs),
    /// Run the tiled computation for one or more variants.
    Simulate(SimulateArgs),
    /// Pack, unpack or inspect compressed block files.
    #[command(subcommand)]
    Codec(CodecCommand),
}

#[derive(Debug, Clone, Args)]
pub struct SetupArgs {
    /// Built-in benchmark: jacobi-1d, jacobi-2d, seidel-2d.
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// JSON file with `kernel`, `tiling` and `problem`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Tile sizes, e.g. `6x6` or `4x5x7`.
    #[arg(long)]
    pub tile: Option<String>,
    /// Word format: `fixed:N`, `fixed:N:FRAC`, `float:32`, `float:64`.
    #[arg(long)]
    pub dtype: Option<String>,
    /// Spatial size (every dimension).
    #[arg(long)]
    pub n: Option<i64>,
    /// Time steps.
    #[arg(long)]
    pub t: Option<i64>,
    /// Use the seeded random initializer instead of the configured one.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub setup: SetupArgs,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LayoutArgs {
    #[command(flatten)]
    pub setup: SetupArgs,
    /// Write the layout problem as an LP model.
    #[arg(long)]
    pub export_ilp: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BusArgs {
    #[arg(long, default_value_t = 64)]
    pub bus_width: u32,
    #[arg(long, default_value_t = 16)]
    pub burst_latency: u64,
    #[arg(long, default_value_t = 256)]
    pub max_burst: u64,
}

impl BusArgs {
    fn config(&self) -> crate::error::Result<BusConfig> {
        BusConfig::new(self.bus_width, self.burst_latency, self.max_burst)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub setup: SetupArgs,
    /// Comma-separated variant names, or `all`.
    #[arg(long, default_value = "mars-compressed")]
    pub variants: String,
    #[command(flatten)]
    pub bus: BusArgs,
    #[arg(long, env = "BURSTLAB_THREADS", default_value_t = 1)]
    pub threads: usize,
    /// Directory for reports and CSV files; JSON goes to stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CodecCommand {
    /// Raw little-endian words to a block file.
    Pack {
        input: PathBuf,
        output: PathBuf,
        /// Word width in bits.
        #[arg(long, default_value_t = 18)]
        bits: u32,
        #[arg(long, default_value_t = 64)]
        bus_width: u32,
        /// MARS sizes in words, e.g. `4,4,1,1`; one MARS by default.
        #[arg(long)]
        split: Option<String>,
    },
    /// Block file back to raw words.
    Unpack { input: PathBuf, output: PathBuf },
    /// Print markers and sizes of a block file.
    Inspect { input: PathBuf },
}

/// Failures reported as a usage error (exit code 2) rather than a runtime error.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(e: impl std::fmt::Display) -> anyhow::Error {
    UsageError(e.to_string()).into()
}

/// Parses `args` (program name first), runs, and returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match run(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                1
            }
        }
    }
}

pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> anyhow::Result<i32> {
    let mut log = |msg: &str| {
        if cli.verbose {
            let _ = writeln!(stderr, "{msg}");
        }
    };
    match &cli.command {
        Command::Analyze(a) => {
            let setup = resolve_setup(&a.setup)?;
            log(&format!(
                "analyzing {} with tiles {:?}",
                setup.kernel.name,
                setup.tiling.sizes()
            ));
            let report = analyze_report(&setup, a.setup.preset.as_deref())?;
            emit_json(&report, a.out.as_deref(), stdout)?;
            Ok(0)
        }
        Command::Layout(a) => {
            let setup = resolve_setup(&a.setup)?;
            let summary = TileIOSummary::analyze(&setup.tiling, &setup.kernel)?;
            let started = Instant::now();
            let report = layout_report(&summary);
            log(&format!(
                "{} solver: objective {} in {:.3} s",
                report.solver,
                report.objective,
                started.elapsed().as_secs_f64()
            ));
            if let Some(path) = &a.export_ilp {
                std::fs::write(path, export_ilp(&build_weights(&summary.outputs)))?;
                log(&format!("wrote LP model to {}", path.display()));
            }
            emit_json(&report, a.out.as_deref(), stdout)?;
            Ok(0)
        }
        Command::Simulate(a) => simulate(a, stdout, &mut log),
        Command::Codec(c) => codec(c, stdout),
    }
}

/// Builds kernel, tiling and problem from a preset or config plus overrides.
pub fn resolve_setup(a: &SetupArgs) -> anyhow::Result<RunSetup> {
    let mut setup = match (&a.preset, &a.config) {
        (Some(name), _) => {
            let p = preset(name).map_err(usage)?;
            RunSetup {
                kernel: p.kernel,
                tiling: p.tiling,
                problem: p.problem,
            }
        }
        (None, Some(path)) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            RunSetup::from_json(&text).map_err(usage)?
        }
        (None, None) => return Err(usage("one of --preset or --config is required")),
    };
    if let Some(tile) = &a.tile {
        let sizes = parse_tile(tile).map_err(usage)?;
        setup.tiling = crate::kernel::retile(&setup.tiling, &sizes).map_err(usage)?;
    }
    if let Some(dt) = &a.dtype {
        setup.kernel.dtype = DataTypeSpec::parse(dt).map_err(usage)?;
    }
    if a.n.is_some() || a.t.is_some() || a.seed.is_some() {
        let p = &setup.problem;
        let sizes = match a.n {
            Some(n) => vec![n; p.spatial_sizes.len()],
            None => p.spatial_sizes.clone(),
        };
        let init = a.seed.map_or(p.init, |seed| Initializer::Random { seed });
        setup.problem = ProblemInstance::new(a.t.unwrap_or(p.time_steps), sizes, init).map_err(usage)?;
    }
    Ok(setup)
}

/// `6x6` or `4x5x7`.
pub fn parse_tile(text: &str) -> crate::error::Result<Vec<i64>> {
    text.split(['x', 'X'])
        .map(|s| s.trim().parse::<i64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::InvalidTiling(format!("cannot parse tile sizes `{text}`")))
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>, stdout: &mut dyn Write) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalyzeReport {
    pub kernel: String,
    pub tiling: serde_json::Value,
    pub mars_in: usize,
    pub mars_out: usize,
    pub flow_in_words: usize,
    pub flow_out_words: usize,
    pub outputs: Vec<MarsEntry>,
    pub inputs: Vec<InputRef>,
    pub partition: PartitionReport,
    /// Counts published for the benchmark, when run from a preset.
    pub published: Option<serde_json::Value>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MarsEntry {
    pub id: usize,
    pub size_words: usize,
    pub signature: ConsumerSignature,
    pub points: Vec<Point>,
}

impl From<&Mars> for MarsEntry {
    fn from(m: &Mars) -> Self {
        MarsEntry {
            id: m.id,
            size_words: m.size_words(),
            signature: m.signature.clone(),
            points: m.points.clone(),
        }
    }
}

pub fn analyze_report(setup: &RunSetup, preset_name: Option<&str>) -> crate::error::Result<AnalyzeReport> {
    let summary = TileIOSummary::analyze(&setup.tiling, &setup.kernel)?;
    let partition = verify_partition(&summary, &setup.tiling, &setup.kernel)?;
    let published = match preset_name {
        Some(name) => {
            let c = preset(name)?.published;
            Some(json!({
                "marsIn": c.mars_in, "marsOut": c.mars_out,
                "readBursts": c.read_bursts, "writeBursts": c.write_bursts,
            }))
        }
        None => None,
    };
    Ok(AnalyzeReport {
        kernel: setup.kernel.name.clone(),
        tiling: tiling_json(&setup.tiling),
        mars_in: summary.inputs.len(),
        mars_out: summary.outputs.len(),
        flow_in_words: summary.flow_in_words(),
        flow_out_words: summary.flow_out_words(),
        outputs: summary.outputs.iter().map(MarsEntry::from).collect(),
        inputs: summary.inputs,
        partition,
        published,
    })
}

fn tiling_json(ts: &TilingScheme) -> serde_json::Value {
    json!({ "kind": ts.kind(), "sizes": ts.sizes(), "hyperplanes": ts.hyperplanes() })
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutReport {
    pub solver: &'static str,
    pub order: Vec<usize>,
    pub objective: u32,
    pub weights: Vec<Vec<u32>>,
    pub bursts_per_producer: Vec<ProducerBursts>,
    pub total_read_bursts: usize,
    pub write_bursts: usize,
}

pub fn layout_report(summary: &TileIOSummary) -> LayoutReport {
    let w = build_weights(&summary.outputs);
    let (solver, layout): (_, LayoutOrder) = if w.len() <= MAX_EXACT_MARS {
        ("exact", solve_layout_exact(&w).expect("size checked"))
    } else {
        ("greedy", solve_layout_greedy(&w))
    };
    let bursts = count_read_bursts(&layout, summary);
    LayoutReport {
        solver,
        order: layout.order,
        objective: layout.objective,
        weights: w.rows(),
        bursts_per_producer: bursts.per_producer,
        total_read_bursts: bursts.total,
        write_bursts: 1,
    }
}

fn simulate(a: &SimulateArgs, stdout: &mut dyn Write, log: &mut dyn FnMut(&str)) -> anyhow::Result<i32> {
    let setup = resolve_setup(&a.setup)?;
    let variants = Variant::parse_list(&a.variants).map_err(usage)?;
    let opts = SimOptions {
        bus: a.bus.config().map_err(usage)?,
        threads: a.threads.max(1),
    };
    let mut reports = Vec::new();
    for v in &variants {
        log(&format!("simulating {v}"));
        let run = run_tiled(&setup.kernel, &setup.tiling, &setup.problem, *v, &opts)?;
        log(&format!(
            "  {} accelerator tiles, {} host tiles, {} read cycles, correct = {}",
            run.report.tiles_on_fpga_path, run.report.tiles_on_host_path, run.report.reads.cycles, run.report.correct
        ));
        if let Some(dir) = &a.out {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("transfers-{v}.csv")), run.log.to_csv(&opts.bus))?;
            emit_json(&run.report, Some(&dir.join(format!("report-{v}.json"))), stdout)?;
        }
        reports.push(run.report);
    }
    let summary = relative_cycles_csv(&reports);
    match &a.out {
        Some(dir) => {
            std::fs::write(dir.join("summary.csv"), &summary)?;
            stdout.write_all(summary.as_bytes())?;
        }
        None => emit_json(&reports, None, stdout)?,
    }
    let all_correct = reports.iter().all(|r| r.correct);
    if !all_correct {
        log("tiled result differs from the reference");
    }
    Ok(if all_correct { 0 } else { 3 })
}

/// Transfer cycles of each variant relative to `mars-compressed` (or the first variant).
pub fn relative_cycles_csv(reports: &[SimReport]) -> String {
    let base = reports
        .iter()
        .find(|r| r.variant == Variant::MarsCompressed)
        .or(reports.first())
        .map(|r| r.total_cycles.max(1))
        .unwrap_or(1);
    let mut out = String::from(
        "variant,tiles,readBursts,readCycles,writeCycles,totalCycles,relativeCycles,ratioTrue,ratioWithPadding,correct\n",
    );
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.4},{},{},{}",
            r.variant,
            r.tiles_on_fpga_path,
            r.reads.bursts,
            r.reads.cycles,
            r.writes.cycles,
            r.total_cycles,
            r.total_cycles as f64 / base as f64,
            opt(r.compression_ratio_true),
            opt(r.compression_ratio_with_padding),
            r.correct
        );
    }
    out
}

fn codec(c: &CodecCommand, stdout: &mut dyn Write) -> anyhow::Result<i32> {
    match c {
        CodecCommand::Pack {
            input,
            output,
            bits,
            bus_width,
            split,
        } => {
            if !(1..=64).contains(bits) {
                return Err(usage(format!("--bits {bits} not in 1..=64")));
            }
            BusConfig::new(*bus_width, 1, 1).map_err(usage)?;
            let words = read_raw_words(&std::fs::read(input)?, *bits)?;
            let sizes: Vec<usize> = match split {
                Some(s) => s
                    .split(',')
                    .map(|x| x.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| usage(format!("cannot parse --split `{s}`")))?,
                None => vec![words.len()],
            };
            if sizes.iter().sum::<usize>() != words.len() || sizes.contains(&0) {
                return Err(usage(format!(
                    "--split sizes must be positive and sum to the {} input words",
                    words.len()
                )));
            }
            let mut mars = Vec::new();
            let mut rest = words.as_slice();
            for s in sizes {
                let (head, tail) = rest.split_at(s);
                mars.push(head.to_vec());
                rest = tail;
            }
            let block = compress_block(&mars, *bits, *bus_width);
            std::fs::write(output, write_block(&block))?;
            Ok(0)
        }
        CodecCommand::Unpack { input, output } => {
            let block = read_block(&std::fs::read(input)?)?;
            let words: Vec<u64> = block.decompress_all()?.concat();
            std::fs::write(output, write_raw_words(&words, block.word_bits))?;
            Ok(0)
        }
        CodecCommand::Inspect { input } => {
            let bytes = std::fs::read(input)?;
            let block = read_block(&bytes)?;
            let mut mars = Vec::new();
            let mut pos = 0;
            for (k, (m, &count)) in block.markers.iter().zip(&block.word_counts).enumerate() {
                let start = m.bit(block.bus_width);
                let (_, end) = decompress_at(&block.stream, start, block.word_bits, count)?;
                if start != pos {
                    return Err(Error::CorruptBlock(format!("MARS {k} starts at bit {start}, expected {pos}")).into());
                }
                pos = end;
                mars.push(json!({
                    "index": k, "words": count, "coarse": m.coarse, "fine": m.fine,
                    "startBit": start, "bits": end - start,
                }));
            }
            let report = json!({
                "wordBits": block.word_bits,
                "busWidth": block.bus_width,
                "marsCount": block.markers.len(),
                "payloadBits": pos,
                "blockBits": block.stream.len(),
                "fileBytes": bytes.len(),
                "mars": mars,
            });
            emit_json(&report, None, stdout)?;
            Ok(0)
        }
    }
}
