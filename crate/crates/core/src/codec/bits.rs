use crate::error::{Error, Result};

/// Growable bit sequence. Bit `i` lives in byte `i / 8` at position `i % 8`,
/// and multi-bit fields are written least-significant bit first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitStream {
    bytes: Vec<u8>,
    len: usize,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        let len = bytes.len() * 8;
        BitStream { bytes, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Backing bytes; bits past `len` are zero.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Appends the low `nbits` bits of `value`.
    pub fn push(&mut self, value: u64, nbits: u32) {
        debug_assert!(nbits <= 64);
        let mut v = if nbits == 64 {
            value
        } else {
            value & ((1u64 << nbits) - 1)
        };
        let mut left = nbits as usize;
        while left > 0 {
            let off = self.len % 8;
            if off == 0 {
                self.bytes.push(0);
            }
            let take = (8 - off).min(left);
            let last = self.bytes.len() - 1;
            self.bytes[last] |= ((v & ((1 << take) - 1)) as u8) << off;
            v >>= take;
            left -= take;
            self.len += take;
        }
    }

    /// Reads `nbits` bits at `pos`.
    pub fn read(&self, pos: usize, nbits: u32) -> Result<u64> {
        let n = nbits as usize;
        if pos + n > self.len {
            return Err(Error::Truncated {
                pos,
                wanted: n,
                len: self.len,
            });
        }
        let mut out = 0u64;
        let mut got = 0;
        while got < n {
            let p = pos + got;
            let off = p % 8;
            let take = (8 - off).min(n - got);
            let bits = (u64::from(self.bytes[p / 8]) >> off) & ((1 << take) - 1);
            out |= bits << got;
            got += take;
        }
        Ok(out)
    }

    pub fn extend(&mut self, other: &BitStream) {
        if self.len.is_multiple_of(8) {
            self.bytes.extend_from_slice(&other.bytes);
            self.len += other.len;
            return;
        }
        let mut pos = 0;
        while pos < other.len {
            let take = (other.len - pos).min(64) as u32;
            self.push(other.read(pos, take).expect("in range"), take);
            pos += take as usize;
        }
    }

    /// Zero bits up to the next multiple of `unit`.
    pub fn pad_to(&mut self, unit: usize) {
        let rem = self.len % unit;
        if rem != 0 {
            let mut left = unit - rem;
            while left > 0 {
                let take = left.min(64);
                self.push(0, take as u32);
                left -= take;
            }
        }
    }

    /// Copy of the bits in `range`, zero-extended past the end.
    pub fn slice(&self, range: std::ops::Range<usize>) -> BitStream {
        let mut out = BitStream::new();
        let mut pos = range.start;
        while pos < range.end {
            let take = (range.end - pos).min(64);
            let avail = self.len.saturating_sub(pos).min(take);
            let v = if avail > 0 {
                self.read(pos, avail as u32).expect("in range")
            } else {
                0
            };
            out.push(v, take as u32);
            pos += take;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lsb_first_layout() {
        let mut s = BitStream::new();
        s.push(0b101, 3);
        s.push(0b11111, 5);
        s.push(1, 1);
        assert_eq!(s.as_bytes(), &[0b1111_1101, 0b1]);
        assert_eq!(s.len(), 9);
        assert_eq!(s.read(3, 5).unwrap(), 0b11111);
        assert!(s.read(8, 2).is_err());
    }

    #[test]
    fn wide_fields() {
        let mut s = BitStream::new();
        s.push(1, 3);
        s.push(u64::MAX - 5, 64);
        assert_eq!(s.read(3, 64).unwrap(), u64::MAX - 5);
    }

    #[test]
    fn extend_and_pad() {
        let mut a = BitStream::new();
        a.push(0b1, 1);
        let mut b = BitStream::new();
        b.push(0xABCD, 16);
        a.extend(&b);
        assert_eq!(a.read(1, 16).unwrap(), 0xABCD);
        a.pad_to(32);
        assert_eq!(a.len(), 32);
        assert_eq!(a.slice(1..17).read(0, 16).unwrap(), 0xABCD);
        assert_eq!(a.slice(30..40).len(), 10);
    }
}
