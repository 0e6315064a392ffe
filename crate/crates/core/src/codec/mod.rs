//! Differential compression of N-bit word streams.
//!
//! The first word of a MARS is stored raw. Every following word is stored as
//! the delta to its predecessor: a header `N - L` (L = count of redundant
//! leading sign bits), the sign, then the low `N - L - 1` bits of the delta.
//! Compressed MARS are concatenated bit-adjacent into one block per tile, and
//! a marker per MARS allows seeking straight to it.

mod bits;
mod file;

pub use bits::BitStream;
pub use file::{read_block, read_raw_words, write_block, write_raw_words, MAGIC};

use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};

/// All-ones mask of the low `n` bits, `1 <= n <= 64`.
pub fn word_mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Width of the token header: `floor(1 + log2 N)`.
pub fn header_bits(n: u32) -> u32 {
    32 - n.leading_zeros()
}

/// Upper bound on the cost of any word in a compressed stream.
pub fn worst_case_bits_per_word(n: u32) -> u32 {
    n + header_bits(n) + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeltaToken {
    pub header: u32,
    pub sign: bool,
    pub payload: u64,
}

impl DeltaToken {
    pub fn payload_bits(&self) -> u32 {
        self.header.saturating_sub(1)
    }

    pub fn len_bits(&self, n: u32) -> u32 {
        header_bits(n) + 1 + self.payload_bits()
    }

    pub fn write(&self, n: u32, out: &mut BitStream) {
        out.push(u64::from(self.header), header_bits(n));
        out.push(u64::from(self.sign), 1);
        out.push(self.payload, self.payload_bits());
    }

    pub fn read(n: u32, input: &BitStream, pos: &mut usize) -> Result<Self> {
        let header = input.read(*pos, header_bits(n))? as u32;
        if header > n {
            return Err(Error::CorruptStream(format!(
                "token header {header} exceeds word size {n}"
            )));
        }
        let sign = input.read(*pos + header_bits(n) as usize, 1)? == 1;
        let payload_bits = header.saturating_sub(1);
        let payload = input.read(*pos + header_bits(n) as usize + 1, payload_bits)?;
        *pos += (header_bits(n) + 1 + payload_bits) as usize;
        Ok(DeltaToken { header, sign, payload })
    }

    /// The N-bit delta this token stands for.
    pub fn delta(&self, n: u32) -> u64 {
        let mask = word_mask(n);
        match (self.header, self.sign) {
            (0, false) => 0,
            (0, true) => mask,
            (h, false) => (1u64 << (h - 1)) | self.payload,
            (h, true) => (mask & !word_mask(h)) | self.payload,
        }
    }
}

/// Token encoding `cur - prev` modulo 2^N.
pub fn delta_token(prev: u64, cur: u64, n: u32) -> DeltaToken {
    let mask = word_mask(n);
    let d = cur.wrapping_sub(prev) & mask;
    let negative = (d >> (n - 1)) & 1 == 1;
    let magnitude_bits = if negative { !d & mask } else { d };
    let lead = magnitude_bits.leading_zeros() - (64 - n);
    let header = n - lead;
    let payload = if header > 1 { d & word_mask(header - 1) } else { 0 };
    DeltaToken {
        header,
        sign: negative,
        payload,
    }
}

/// Compressed length of `words` in bits, from the token sizes alone.
pub fn compressed_len(words: &[u64], n: u32) -> usize {
    if words.is_empty() {
        return 0;
    }
    n as usize
        + words
            .windows(2)
            .map(|p| delta_token(p[0], p[1], n).len_bits(n) as usize)
            .sum::<usize>()
}

pub fn compress_mars_into(words: &[u64], n: u32, out: &mut BitStream) {
    let Some((&first, rest)) = words.split_first() else {
        return;
    };
    out.push(first & word_mask(n), n);
    let mut prev = first & word_mask(n);
    for &w in rest {
        let w = w & word_mask(n);
        delta_token(prev, w, n).write(n, out);
        prev = w;
    }
}

pub fn compress_mars(words: &[u64], n: u32) -> BitStream {
    let mut s = BitStream::new();
    compress_mars_into(words, n, &mut s);
    s
}

/// Decodes `count` words starting at `start_bit`; returns them with the end position.
pub fn decompress_at(stream: &BitStream, start_bit: usize, n: u32, count: usize) -> Result<(Vec<u64>, usize)> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok((out, start_bit));
    }
    let mut pos = start_bit;
    let mut prev = stream.read(pos, n)?;
    pos += n as usize;
    out.push(prev);
    let mask = word_mask(n);
    for _ in 1..count {
        let t = DeltaToken::read(n, stream, &mut pos)?;
        prev = prev.wrapping_add(t.delta(n)) & mask;
        out.push(prev);
    }
    Ok((out, pos))
}

pub fn decompress_mars(stream: &BitStream, start_bit: usize, n: u32, count: usize) -> Result<Vec<u64>> {
    decompress_at(stream, start_bit, n, count).map(|(w, _)| w)
}

/// Start of a MARS inside a block: `coarse * W + fine` is its first bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Marker {
    pub coarse: u32,
    pub fine: u16,
}

impl Marker {
    pub fn from_bit(bit: usize, bus_width: u32) -> Self {
        Marker {
            coarse: (bit / bus_width as usize) as u32,
            fine: (bit % bus_width as usize) as u16,
        }
    }

    pub fn bit(&self, bus_width: u32) -> usize {
        self.coarse as usize * bus_width as usize + usize::from(self.fine)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedBlock {
    pub stream: BitStream,
    pub markers: Vec<Marker>,
    pub word_counts: Vec<usize>,
    pub word_bits: u32,
    pub bus_width: u32,
    /// Bit length before the final padding.
    pub payload_bits: usize,
}

/// Concatenates MARS streams bit-adjacent and pads the block once, at the end.
pub fn pack_block(streams: &[BitStream], word_counts: &[usize], word_bits: u32, bus_width: u32) -> CompressedBlock {
    assert_eq!(streams.len(), word_counts.len());
    let mut stream = BitStream::new();
    let mut markers = Vec::with_capacity(streams.len());
    for s in streams {
        markers.push(Marker::from_bit(stream.len(), bus_width));
        stream.extend(s);
    }
    let payload_bits = stream.len();
    stream.pad_to(bus_width as usize);
    CompressedBlock {
        stream,
        markers,
        word_counts: word_counts.to_vec(),
        word_bits,
        bus_width,
        payload_bits,
    }
}

/// Compresses each MARS (given in layout order) and packs the results.
pub fn compress_block(mars: &[Vec<u64>], word_bits: u32, bus_width: u32) -> CompressedBlock {
    let streams: Vec<BitStream> = mars.iter().map(|m| compress_mars(m, word_bits)).collect();
    let counts: Vec<usize> = mars.iter().map(Vec::len).collect();
    pack_block(&streams, &counts, word_bits, bus_width)
}

impl CompressedBlock {
    pub fn len_words(&self) -> usize {
        self.stream.len() / self.bus_width as usize
    }

    /// Bit range `[start, end)` of MARS `k`.
    pub fn mars_bits(&self, k: usize) -> Result<Range<usize>> {
        let count = self.markers.len();
        if k >= count {
            return Err(Error::IndexOutOfRange { index: k, count });
        }
        let start = self.markers[k].bit(self.bus_width);
        let end = match self.markers.get(k + 1) {
            Some(m) => m.bit(self.bus_width),
            None => self.payload_bits,
        };
        Ok(start..end)
    }

    /// Sequential decode of every MARS, ignoring the markers.
    pub fn decompress_all(&self) -> Result<Vec<Vec<u64>>> {
        let mut pos = 0;
        let mut out = Vec::with_capacity(self.word_counts.len());
        for &c in &self.word_counts {
            let (w, end) = decompress_at(&self.stream, pos, self.word_bits, c)?;
            out.push(w);
            pos = end;
        }
        Ok(out)
    }
}

/// Aligned bus-word range holding MARS `k`, and its first bit inside that range.
pub fn seek_mars(block: &CompressedBlock, k: usize) -> Result<(Range<usize>, usize)> {
    let bits = block.mars_bits(k)?;
    let w = block.bus_width as usize;
    let first = bits.start / w;
    let last = bits.end.div_ceil(w).max(first + 1);
    Ok((first..last, bits.start - first * w))
}

/// Fetches only the words of MARS `k` and decodes them.
pub fn decompress_seek(block: &CompressedBlock, k: usize) -> Result<Vec<u64>> {
    let (range, start) = seek_mars(block, k)?;
    let w = block.bus_width as usize;
    let fetched = block.stream.slice(range.start * w..range.end * w);
    decompress_mars(&fetched, start, block.word_bits, block.word_counts[k])
}
