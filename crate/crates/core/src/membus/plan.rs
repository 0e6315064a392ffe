use std::collections::BTreeMap;
use std::ops::Range;

use super::{Direction, Transfer};
use crate::error::{Error, Result};
use crate::kernel::TileCoord;
use crate::layout::{position_runs, AllocationMap, LayoutOrder};

/// How many bits of a span count as useful.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Usefulness {
    /// Every bit of the MARS span is data (packed or compressed words).
    Span,
    /// Only `N` bits of each container are data (padded words).
    PerWord(u32),
}

/// Where each MARS of a tile's block sits, by layout position.
///
/// For compressed blocks `starts` comes from the markers; for uncompressed
/// ones it is a prefix sum of word sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockIndex {
    /// `starts[pos]` is the first bit of the MARS at `pos`; the last entry ends the payload.
    pub starts: Vec<u64>,
    pub words: Vec<u64>,
    pub usefulness: Usefulness,
    /// Block size including the final padding.
    pub block_bits: u64,
}

impl BlockIndex {
    pub fn uniform(words: &[u64], bits_per_word: u32, usefulness: Usefulness, width: u64) -> Self {
        let mut starts = Vec::with_capacity(words.len() + 1);
        let mut acc = 0;
        starts.push(0);
        for w in words {
            acc += w * u64::from(bits_per_word);
            starts.push(acc);
        }
        BlockIndex {
            starts,
            words: words.to_vec(),
            usefulness,
            block_bits: acc.div_ceil(width) * width,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn span(&self, positions: Range<usize>) -> Range<u64> {
        self.starts[positions.start]..self.starts[positions.end]
    }

    pub fn useful_bits(&self, positions: Range<usize>) -> u64 {
        match self.usefulness {
            Usefulness::Span => {
                let s = self.span(positions);
                s.end - s.start
            }
            Usefulness::PerWord(n) => self.words[positions].iter().sum::<u64>() * u64::from(n),
        }
    }

    pub fn payload_bits(&self) -> u64 {
        *self.starts.last().unwrap_or(&0)
    }
}

/// One coalesced read: the MARS at `positions` of `producer`'s block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadRun {
    pub producer: TileCoord,
    pub positions: Range<usize>,
    pub transfer: Transfer,
}

/// One transfer per maximal run of consumed MARS that are adjacent in the
/// producer's block; runs never merge across producers.
pub fn plan_mars_reads<'a>(
    tile: &TileCoord,
    inputs_by_producer: &BTreeMap<TileCoord, Vec<usize>>,
    layout: &LayoutOrder,
    alloc: &AllocationMap,
    index: impl Fn(&TileCoord) -> Option<&'a BlockIndex>,
    width: u64,
) -> Result<Vec<ReadRun>> {
    let mut runs = Vec::new();
    for (offset, ids) in inputs_by_producer {
        let producer = tile + offset;
        let missing = || Error::MissingProducer(producer.to_vec());
        let base = alloc.base(&producer).ok_or_else(missing)? * 8;
        let idx = index(&producer).ok_or_else(missing)?;
        for positions in position_runs(layout, ids) {
            let span = idx.span(positions.clone());
            let words = idx.words[positions.clone()].iter().sum();
            let transfer = Transfer::covering(
                tile.clone(),
                Direction::Read,
                base + span.start,
                base + span.end,
                idx.useful_bits(positions.clone()),
                words,
                width,
            );
            runs.push(ReadRun {
                producer: producer.clone(),
                positions,
                transfer,
            });
        }
    }
    Ok(runs)
}

/// The whole block of `tile` in one transfer.
pub fn plan_mars_write(tile: &TileCoord, alloc: &AllocationMap, index: &BlockIndex, width: u64) -> Result<Transfer> {
    let base = alloc.base(tile).ok_or_else(|| Error::MissingProducer(tile.to_vec()))? * 8;
    if index.block_bits > alloc.capacity_bytes * 8 {
        return Err(Error::AllocationOverflow {
            tile: tile.to_vec(),
            needed: index.block_bits.div_ceil(8) as usize,
            capacity: alloc.capacity_bytes as usize,
        });
    }
    let all = 0..index.len();
    Ok(Transfer::covering(
        tile.clone(),
        Direction::Write,
        base,
        base + index.block_bits,
        index.useful_bits(all.clone()),
        index.words.iter().sum(),
        width,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{preset, IVec};
    use crate::layout::{allocate_blocks, build_weights, solve_layout_exact};
    use crate::mars::TileIOSummary;

    fn setup() -> (TileIOSummary, LayoutOrder) {
        let p = preset("jacobi-1d").unwrap();
        let s = TileIOSummary::analyze(&p.tiling, &p.kernel).unwrap();
        let w = build_weights(&s.outputs);
        let l = solve_layout_exact(&w).unwrap();
        (s, l)
    }

    #[test]
    fn three_reads_for_optimal_jacobi_layout() {
        let (s, l) = setup();
        let tiles: Vec<TileCoord> = [[0, 0], [0, 1], [1, 0], [1, 1]].iter().map(|c| IVec::new(c)).collect();
        let alloc = allocate_blocks(&tiles, 64, 64);
        let words: Vec<u64> = l.order.iter().map(|&id| s.outputs[id].size_words() as u64).collect();
        let idx = BlockIndex::uniform(&words, 18, Usefulness::Span, 64);
        let runs = plan_mars_reads(
            &IVec::new(&[1, 1]),
            &s.inputs_by_producer(),
            &l,
            &alloc,
            |_| Some(&idx),
            64,
        )
        .unwrap();
        assert_eq!(runs.len(), 3);
        let words_read: u64 = runs.iter().map(|r| r.transfer.words).sum();
        assert_eq!(words_read as usize, s.flow_in_words());
        assert!(runs
            .iter()
            .all(|r| r.transfer.start_bit % 64 == 0 && r.transfer.length_bits % 64 == 0));
    }

    #[test]
    fn missing_producer_is_an_error() {
        let (s, l) = setup();
        let alloc = allocate_blocks(&[IVec::new(&[1, 1])], 64, 64);
        let idx = BlockIndex::uniform(&[4, 4, 1, 1], 18, Usefulness::Span, 64);
        let r = plan_mars_reads(
            &IVec::new(&[1, 1]),
            &s.inputs_by_producer(),
            &l,
            &alloc,
            |_| Some(&idx),
            64,
        );
        assert!(matches!(r, Err(Error::MissingProducer(_))));
    }

    #[test]
    fn padded_usefulness_counts_data_bits() {
        let idx = BlockIndex::uniform(&[4, 1], 32, Usefulness::PerWord(18), 64);
        assert_eq!(idx.useful_bits(0..2), 5 * 18);
        assert_eq!(idx.span(0..2), 0..160);
        assert_eq!(idx.block_bits, 192);
    }

    #[test]
    fn write_is_one_transfer_and_checks_capacity() {
        let t = IVec::new(&[0, 0]);
        let alloc = allocate_blocks(std::slice::from_ref(&t), 8, 64);
        let idx = BlockIndex::uniform(&[2], 18, Usefulness::Span, 64);
        let w = plan_mars_write(&t, &alloc, &idx, 64).unwrap();
        assert_eq!((w.length_bits, w.useful_bits), (64, 36));
        let big = BlockIndex::uniform(&[10], 18, Usefulness::Span, 64);
        assert!(matches!(
            plan_mars_write(&t, &alloc, &big, 64),
            Err(Error::AllocationOverflow { .. })
        ));
    }
}
