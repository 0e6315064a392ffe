//! On-disk block files and raw word files.
//!
//! Block: `"MARS1"`, u8 N, u8 log2(W), u32 count, then per MARS
//! `{u32 wordCount, u32 coarse, u16 fine}`, then the payload bytes.
//! Raw: `ceil(N / 8)` little-endian bytes per word.

use super::{BitStream, CompressedBlock, Marker};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"MARS1";

pub fn write_block(block: &CompressedBlock) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(block.word_bits as u8);
    out.push(block.bus_width.trailing_zeros() as u8);
    out.extend_from_slice(&(block.markers.len() as u32).to_le_bytes());
    for (m, &c) in block.markers.iter().zip(&block.word_counts) {
        out.extend_from_slice(&(c as u32).to_le_bytes());
        out.extend_from_slice(&m.coarse.to_le_bytes());
        out.extend_from_slice(&m.fine.to_le_bytes());
    }
    out.extend_from_slice(block.stream.as_bytes());
    out
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.data.len() {
            return Err(Error::CorruptBlock(format!("file ends inside {what}")));
        }
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }
}

pub fn read_block(data: &[u8]) -> Result<CompressedBlock> {
    let mut c = Cursor { data, pos: 0 };
    if c.take(5, "magic")? != MAGIC {
        return Err(Error::CorruptBlock("bad magic".into()));
    }
    let word_bits = u32::from(c.take(1, "header")?[0]);
    if !(1..=64).contains(&word_bits) {
        return Err(Error::CorruptBlock(format!("word size {word_bits}")));
    }
    let log_w = c.take(1, "header")?[0];
    if !(3..=16).contains(&log_w) {
        return Err(Error::CorruptBlock(format!("bus width 2^{log_w}")));
    }
    let bus_width = 1u32 << log_w;
    let count = c.u32("header")? as usize;
    let mut markers = Vec::with_capacity(count.min(1 << 16));
    let mut word_counts = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        word_counts.push(c.u32("MARS table")? as usize);
        let coarse = c.u32("MARS table")?;
        let fine = c.u16("MARS table")?;
        if u32::from(fine) >= bus_width {
            return Err(Error::CorruptBlock(format!(
                "fine offset {fine} >= bus width {bus_width}"
            )));
        }
        markers.push(Marker { coarse, fine });
    }
    let stream = BitStream::from_bytes(data[c.pos..].to_vec());
    let bits: Vec<usize> = markers.iter().map(|m| m.bit(bus_width)).collect();
    if bits.windows(2).any(|p| p[0] >= p[1]) || bits.last().is_some_and(|&b| b >= stream.len()) {
        return Err(Error::CorruptBlock("markers out of order or past the payload".into()));
    }
    // the padded tail is indistinguishable from payload; decode up to the end
    let payload_bits = stream.len();
    Ok(CompressedBlock {
        stream,
        markers,
        word_counts,
        word_bits,
        bus_width,
        payload_bits,
    })
}

pub fn write_raw_words(words: &[u64], word_bits: u32) -> Vec<u8> {
    let per = word_bits.div_ceil(8) as usize;
    words.iter().flat_map(|w| w.to_le_bytes()[..per].to_vec()).collect()
}

pub fn read_raw_words(data: &[u8], word_bits: u32) -> Result<Vec<u64>> {
    let per = word_bits.div_ceil(8) as usize;
    if !data.len().is_multiple_of(per) {
        return Err(Error::CorruptBlock(format!(
            "raw file of {} bytes is not a whole number of {per}-byte words",
            data.len()
        )));
    }
    let mask = super::word_mask(word_bits);
    data.chunks(per)
        .map(|c| {
            let mut b = [0u8; 8];
            b[..per].copy_from_slice(c);
            let w = u64::from_le_bytes(b);
            if w & !mask != 0 {
                return Err(Error::CorruptBlock(format!("word {w:#x} wider than {word_bits} bits")));
            }
            Ok(w)
        })
        .collect()
}
