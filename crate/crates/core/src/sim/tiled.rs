use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::arith::Arith;
use super::dispatch::{collect, dispatch, TilePlan};
use super::grid::{initial_plane, run_reference};
use super::{compression_stats, SimReport, Variant};
use crate::codec::{compress_block, decompress_mars, header_bits, BitStream};
use crate::error::{Error, Result};
use crate::kernel::{legal_tile_schedule, wavefront, Domain, Kernel, Point, ProblemInstance, TileCoord, TilingScheme};
use crate::layout::{allocate_blocks, build_weights, solve_layout, AllocationMap, LayoutOrder};
use crate::mars::TileIOSummary;
use crate::membus::{
    baseline_bbox, baseline_minimal, plan_mars_reads, plan_mars_write, BlockIndex, BusConfig, Direction,
    OriginalLayout, Transfer, TransferLog, Usefulness,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimOptions {
    pub bus: BusConfig,
    /// Worker threads for the tiles of one wavefront.
    pub threads: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            bus: BusConfig::default(),
            threads: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimRun {
    pub report: SimReport,
    /// Transfers of accelerator-path tiles, in schedule order.
    pub log: TransferLog,
}

struct Ctx<'a> {
    kernel: &'a Kernel,
    ts: &'a TilingScheme,
    pi: &'a ProblemInstance,
    domain: Domain,
    variant: Variant,
    bus: BusConfig,
    arith: Arith,
    summary: TileIOSummary,
    layout: LayoutOrder,
    plan: TilePlan,
    by_producer: BTreeMap<TileCoord, Vec<usize>>,
    input_slot: HashMap<(TileCoord, usize), usize>,
    init: Vec<u64>,
    n_bits: u32,
    c_bits: u32,
}

enum Memory {
    Mars {
        alloc: AllocationMap,
        bytes: Vec<u8>,
        index: HashMap<TileCoord, BlockIndex>,
    },
    Original {
        layout: OriginalLayout,
        cells: Vec<u64>,
    },
}

enum Payload {
    Block { bytes: Vec<u8>, index: BlockIndex },
    Cells(Vec<(u64, u64)>),
}

struct Outcome {
    tile: TileCoord,
    full: bool,
    transfers: Vec<Transfer>,
    payload: Payload,
    finals: Vec<(usize, u64)>,
    saturations: u64,
    /// `(words, compressed bits)` of an accelerator-path compressed block.
    block: Option<(u64, u64)>,
}

/// Runs `variant` on the whole problem and checks it against the untiled loop nest.
pub fn run_tiled(
    kernel: &Kernel,
    ts: &TilingScheme,
    pi: &ProblemInstance,
    variant: Variant,
    opts: &SimOptions,
) -> Result<SimRun> {
    opts.bus.validate()?;
    let summary = TileIOSummary::analyze(ts, kernel)?;
    let layout = solve_layout(&build_weights(&summary.outputs));
    let plan = TilePlan::build(ts, kernel, &summary)?;
    let input_slot = plan
        .inputs
        .iter()
        .enumerate()
        .map(|(i, (r, _))| ((r.producer_offset.clone(), r.mars_id), i))
        .collect();
    let arith = Arith::new(kernel);
    let ctx = Ctx {
        kernel,
        ts,
        pi,
        domain: Domain::new(kernel, pi)?,
        variant,
        bus: opts.bus,
        by_producer: summary.inputs_by_producer(),
        init: initial_plane(pi, &arith).0,
        n_bits: kernel.dtype.total_bits,
        c_bits: kernel.dtype.container_bits(),
        arith,
        summary,
        layout,
        plan,
        input_slot,
    };

    let schedule = legal_tile_schedule(ts, pi, kernel)?;
    let mut mem = ctx.new_memory(&schedule);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.max(1))
        .build()
        .map_err(|e| Error::Config {
            path: "threads".into(),
            msg: e.to_string(),
        })?;

    let mut log = TransferLog::new();
    let mut final_plane = ctx.init.clone();
    let (mut fpga, mut host, mut saturations) = (0u64, 0u64, 0u64);
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < schedule.len() {
        let wf = wavefront(&schedule[start]);
        let end = start + schedule[start..].iter().take_while(|t| wavefront(t) == wf).count();
        let wave = &schedule[start..end];
        // all tiles of a wavefront read before any of them writes
        let outcomes: Vec<Result<Outcome>> = pool.install(|| wave.par_iter().map(|t| ctx.run_tile(t, &mem)).collect());
        for o in outcomes {
            let o = o?;
            if o.full {
                fpga += 1;
                for t in o.transfers {
                    log.push(t);
                }
                blocks.extend(o.block);
            } else {
                host += 1;
            }
            saturations += o.saturations;
            for (x, w) in o.finals {
                final_plane[x] = w;
            }
            ctx.commit(&mut mem, &o.tile, o.payload);
        }
        start = end;
    }

    let reference = run_reference(kernel, pi)?;
    let mismatches = final_plane
        .iter()
        .zip(reference.final_plane())
        .filter(|(a, b)| a != b)
        .count() as u64;
    let reads = log.totals(Direction::Read, &opts.bus);
    let writes = log.totals(Direction::Write, &opts.bus);
    let (ratio_true, ratio_padded) = if variant == Variant::MarsCompressed {
        compression_stats(&blocks, ctx.n_bits, ctx.c_bits)
    } else {
        (None, None)
    };
    let expanded = blocks.iter().filter(|(w, b)| *b > w * u64::from(ctx.n_bits)).count() as u64;
    let report = SimReport {
        variant,
        kernel: kernel.name.clone(),
        dtype: kernel.dtype.to_string(),
        tile_sizes: ts.sizes().to_vec(),
        time_steps: pi.time_steps,
        spatial_sizes: pi.spatial_sizes.clone(),
        bus: opts.bus,
        tiles_on_fpga_path: fpga,
        tiles_on_host_path: host,
        total_cycles: reads.cycles + writes.cycles,
        reads,
        writes,
        compression_ratio_true: ratio_true,
        compression_ratio_with_padding: ratio_padded,
        expanded_blocks: expanded,
        saturations,
        mismatches,
        correct: mismatches == 0,
    };
    Ok(SimRun { report, log })
}

impl Ctx<'_> {
    fn width(&self) -> u64 {
        self.bus.width()
    }

    fn new_memory(&self, schedule: &[TileCoord]) -> Memory {
        let words = self.summary.flow_out_words().max(1) as u64;
        let per_word = match self.variant {
            Variant::MarsCompressed => self.n_bits + header_bits(self.n_bits) + 1,
            Variant::MarsPacked => self.n_bits,
            _ => self.c_bits,
        };
        if self.variant.is_mars() {
            let alloc = allocate_blocks(schedule, (words * u64::from(per_word)).div_ceil(8), self.bus.width_bits);
            Memory::Mars {
                bytes: vec![0; alloc.total_bytes() as usize],
                alloc,
                index: HashMap::new(),
            }
        } else {
            let layout = OriginalLayout {
                depth: self.kernel.temporal_depth(),
                sizes: self.pi.spatial_sizes.clone(),
                cell_bits: self.c_bits,
                word_bits: self.n_bits,
            };
            let cells = (0..layout.depth).flat_map(|_| self.init.iter().copied()).collect();
            Memory::Original { layout, cells }
        }
    }

    fn init_word(&self, p: &Point) -> u64 {
        self.init[self.linear(&p.as_slice()[1..])]
    }

    fn linear(&self, x: &[i64]) -> usize {
        x.iter()
            .zip(&self.pi.spatial_sizes)
            .fold(0usize, |acc, (&c, &n)| acc * n as usize + c as usize)
    }

    fn encode(&self, mars: &[Vec<u64>]) -> (BitStream, BlockIndex) {
        let w = self.width();
        let words: Vec<u64> = mars.iter().map(|m| m.len() as u64).collect();
        match self.variant {
            Variant::MarsCompressed => {
                let blk = compress_block(mars, self.n_bits, self.bus.width_bits);
                let mut starts: Vec<u64> = blk.markers.iter().map(|m| m.bit(self.bus.width_bits) as u64).collect();
                starts.push(blk.payload_bits as u64);
                let index = BlockIndex {
                    starts,
                    words,
                    usefulness: Usefulness::Span,
                    block_bits: blk.stream.len() as u64,
                };
                (blk.stream, index)
            }
            Variant::MarsPacked | Variant::MarsPadded => {
                let (cell, useful) = if self.variant == Variant::MarsPacked {
                    (self.n_bits, Usefulness::Span)
                } else {
                    (self.c_bits, Usefulness::PerWord(self.n_bits))
                };
                let mut s = BitStream::new();
                for &v in mars.iter().flatten() {
                    s.push(v, self.n_bits);
                    if cell > self.n_bits {
                        s.push(0, cell - self.n_bits);
                    }
                }
                s.pad_to(w as usize);
                (s, BlockIndex::uniform(&words, cell, useful, w))
            }
            _ => unreachable!("baselines have no blocks"),
        }
    }

    fn decode(&self, s: &BitStream, off: usize, count: usize) -> Result<Vec<u64>> {
        match self.variant {
            Variant::MarsCompressed => decompress_mars(s, off, self.n_bits, count),
            _ => {
                let cell = if self.variant == Variant::MarsPacked {
                    self.n_bits
                } else {
                    self.c_bits
                } as usize;
                (0..count).map(|i| s.read(off + i * cell, self.n_bits)).collect()
            }
        }
    }

    fn run_tile(&self, tile: &TileCoord, mem: &Memory) -> Result<Outcome> {
        let plan = &self.plan;
        let shift = self.ts.translation(tile)?;
        let abs = |p: &Point| &shift + p;
        let full = plan.points.iter().all(|p| self.domain.contains(&abs(p)));
        let n_pts = plan.points.len();
        let mut buf = vec![0u64; plan.buffer_len()];
        let mut present = vec![false; plan.buffer_len()];
        let mut transfers = Vec::new();

        // read + decode + dispatch
        match mem {
            Memory::Mars { alloc, bytes, index } => {
                let producers = if full {
                    Cow::Borrowed(&self.by_producer)
                } else {
                    // clipped tiles may border tiles that hold no stored value
                    Cow::Owned(
                        self.by_producer
                            .iter()
                            .filter(|(o, _)| index.contains_key(&(tile + *o)))
                            .map(|(o, ids)| (o.clone(), ids.clone()))
                            .collect(),
                    )
                };
                let runs = plan_mars_reads(tile, &producers, &self.layout, alloc, |p| index.get(p), self.width())?;
                for run in runs {
                    let idx = &index[&run.producer];
                    let t = &run.transfer;
                    let lo = (t.start_bit / 8) as usize;
                    let fetched = BitStream::from_bytes(bytes[lo..lo + (t.length_bits / 8) as usize].to_vec());
                    let base = alloc.base(&run.producer).expect("planned") * 8;
                    let offset = &run.producer - tile;
                    for pos in run.positions.clone() {
                        let id = self.layout.order[pos];
                        let off = (base + idx.starts[pos] - t.start_bit) as usize;
                        let words = self.decode(&fetched, off, idx.words[pos] as usize)?;
                        let slot = self.input_slot[&(offset.clone(), id)];
                        let table = &plan.inputs[slot].1;
                        dispatch(&words, table, &mut buf)?;
                        for &a in &table.addrs {
                            present[a] = true;
                        }
                    }
                    if full {
                        transfers.push(run.transfer);
                    }
                }
            }
            Memory::Original { layout, cells } => {
                let mut footprint = Vec::new();
                for (i, q) in plan.flow_in.iter().enumerate() {
                    let a = abs(q);
                    if self.domain.in_storage(&a) {
                        buf[n_pts + i] = cells[layout.cell(&a) as usize];
                        present[n_pts + i] = true;
                        footprint.push(a);
                    }
                }
                if full {
                    transfers.extend(self.baseline(tile, &footprint, layout, Direction::Read)?);
                }
            }
        }

        // compute in lexicographic order
        let mut saturations = 0;
        let mut finals = Vec::new();
        for i in 0..n_pts {
            let a = abs(&plan.points[i]);
            let w = if self.domain.contains(&a) {
                let ops = &plan.operands[i];
                if let Some(&miss) = ops.iter().find(|&&o| !present[o]) {
                    let q = if miss < n_pts {
                        &plan.points[miss]
                    } else {
                        &plan.flow_in[miss - n_pts]
                    };
                    return Err(Error::MissingProducer(self.ts.tile_of(&abs(q))?.to_vec()));
                }
                let (w, s) = self.arith.apply(ops.iter().map(|&o| buf[o]));
                saturations += u64::from(s);
                if a[0] == self.pi.time_steps {
                    finals.push((self.linear(&a.as_slice()[1..]), w));
                }
                w
            } else if self.domain.in_storage(&a) {
                self.init_word(&a)
            } else {
                0
            };
            buf[i] = w;
            present[i] = true;
        }

        // collect + encode + write
        let (payload, block) = match mem {
            Memory::Mars { alloc, .. } => {
                let mars: Vec<Vec<u64>> = self
                    .layout
                    .order
                    .iter()
                    .map(|&id| collect(&buf, &plan.outputs[id]))
                    .collect::<Result<_>>()?;
                let (stream, index) = self.encode(&mars);
                let write = plan_mars_write(tile, alloc, &index, self.width())?;
                let block = (full && self.variant == Variant::MarsCompressed)
                    .then(|| (index.words.iter().sum::<u64>(), index.payload_bits()));
                if full {
                    transfers.push(write);
                }
                (
                    Payload::Block {
                        bytes: stream.as_bytes().to_vec(),
                        index,
                    },
                    block,
                )
            }
            Memory::Original { layout, .. } => {
                let mut footprint = Vec::new();
                let mut cells = Vec::new();
                for table in &plan.outputs {
                    for &addr in &table.addrs {
                        let a = abs(&plan.points[addr]);
                        if self.domain.in_storage(&a) {
                            cells.push((layout.cell(&a), buf[addr]));
                            footprint.push(a);
                        }
                    }
                }
                if full {
                    transfers.extend(self.baseline(tile, &footprint, layout, Direction::Write)?);
                }
                (Payload::Cells(cells), None)
            }
        };

        Ok(Outcome {
            tile: tile.clone(),
            full,
            transfers,
            payload,
            finals,
            saturations,
            block,
        })
    }

    fn baseline(
        &self,
        tile: &TileCoord,
        fp: &[Point],
        layout: &OriginalLayout,
        dir: Direction,
    ) -> Result<Vec<Transfer>> {
        match self.variant {
            Variant::BaselineMinimal => baseline_minimal(tile, fp, layout, dir, self.width()),
            _ => baseline_bbox(tile, fp, layout, dir, self.width()),
        }
    }

    fn commit(&self, mem: &mut Memory, tile: &TileCoord, payload: Payload) {
        match (mem, payload) {
            (Memory::Mars { alloc, bytes, index }, Payload::Block { bytes: b, index: i }) => {
                let base = alloc.base(tile).expect("scheduled tile") as usize;
                bytes[base..base + b.len()].copy_from_slice(&b);
                index.insert(tile.clone(), i);
            }
            (Memory::Original { cells, .. }, Payload::Cells(list)) => {
                for (c, w) in list {
                    cells[c as usize] = w;
                }
            }
            _ => unreachable!("payload matches memory kind"),
        }
    }
}
