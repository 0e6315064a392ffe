//! The stencil update `out = c * sum(operands)` on N-bit words.
//!
//! Fixed point sums and multiplies in `i128`, shifts right with floor
//! rounding and saturates to the N-bit range. Floats use the declared width.

use crate::kernel::{Coefficient, DataTypeSpec, Kernel, NumberKind};

#[derive(Clone, Copy, Debug)]
enum Scale {
    /// Fixed point: multiply by `q` then shift by the fraction bits.
    FixedMul(i128),
    /// Fixed point: `floor(sum * num / den)`.
    FixedRatio(i128, i128),
    F32Mul(f32),
    F64Mul(f64),
    F32Div(f32),
    F64Div(f64),
    F32Ratio(f32, f32),
    F64Ratio(f64, f64),
}

#[derive(Clone, Copy, Debug)]
pub struct Arith {
    dtype: DataTypeSpec,
    scale: Scale,
    min: i128,
    max: i128,
}

impl Arith {
    pub fn new(kernel: &Kernel) -> Self {
        let dt = kernel.dtype;
        let n = dt.total_bits;
        let (min, max) = if dt.signed {
            (-(1i128 << (n - 1)), (1i128 << (n - 1)) - 1)
        } else {
            (0, (1i128 << n) - 1)
        };
        let scale = match (dt.kind, kernel.coeff, n) {
            (NumberKind::Fixed, Coefficient::Decimal { value }, _) => {
                Scale::FixedMul((value * (1u64 << dt.frac_bits) as f64).round() as i128)
            }
            (NumberKind::Fixed, Coefficient::Rational { num, den }, _) => {
                Scale::FixedRatio(i128::from(num), i128::from(den))
            }
            (NumberKind::Float, Coefficient::Decimal { value }, 32) => Scale::F32Mul(value as f32),
            (NumberKind::Float, Coefficient::Decimal { value }, _) => Scale::F64Mul(value),
            (NumberKind::Float, Coefficient::Rational { num: 1, den }, 32) => Scale::F32Div(den as f32),
            (NumberKind::Float, Coefficient::Rational { num: 1, den }, _) => Scale::F64Div(den as f64),
            (NumberKind::Float, Coefficient::Rational { num, den }, 32) => Scale::F32Ratio(num as f32, den as f32),
            (NumberKind::Float, Coefficient::Rational { num, den }, _) => Scale::F64Ratio(num as f64, den as f64),
        };
        Arith {
            dtype: dt,
            scale,
            min,
            max,
        }
    }

    pub fn dtype(&self) -> DataTypeSpec {
        self.dtype
    }

    fn word_to_int(&self, w: u64) -> i128 {
        let n = self.dtype.total_bits;
        if self.dtype.signed && n < 64 && (w >> (n - 1)) & 1 == 1 {
            i128::from(w) - (1i128 << n)
        } else if self.dtype.signed && n == 64 {
            i128::from(w as i64)
        } else {
            i128::from(w)
        }
    }

    fn int_to_word(&self, v: i128) -> (u64, bool) {
        let clamped = v.clamp(self.min, self.max);
        ((clamped as u64) & self.dtype.mask(), clamped != v)
    }

    /// Word for a real value; the flag reports saturation.
    pub fn encode(&self, v: f64) -> (u64, bool) {
        match self.dtype.kind {
            NumberKind::Fixed => {
                let scaled = (v * (1u64 << self.dtype.frac_bits) as f64).round();
                let sat = scaled < self.min as f64 || scaled > self.max as f64;
                let (w, s) = self.int_to_word(scaled.clamp(self.min as f64, self.max as f64) as i128);
                (w, sat || s)
            }
            NumberKind::Float if self.dtype.total_bits == 32 => (u64::from((v as f32).to_bits()), false),
            NumberKind::Float => (v.to_bits(), false),
        }
    }

    pub fn decode(&self, w: u64) -> f64 {
        match self.dtype.kind {
            NumberKind::Fixed => self.word_to_int(w) as f64 / (1u64 << self.dtype.frac_bits) as f64,
            NumberKind::Float if self.dtype.total_bits == 32 => f64::from(f32::from_bits(w as u32)),
            NumberKind::Float => f64::from_bits(w),
        }
    }

    /// Applies the update to operands given in dependence order.
    pub fn apply(&self, operands: impl IntoIterator<Item = u64>) -> (u64, bool) {
        let ops = operands.into_iter();
        match self.scale {
            Scale::FixedMul(q) => {
                let sum: i128 = ops.map(|w| self.word_to_int(w)).sum();
                self.int_to_word((sum * q) >> self.dtype.frac_bits)
            }
            Scale::FixedRatio(num, den) => {
                let sum: i128 = ops.map(|w| self.word_to_int(w)).sum();
                self.int_to_word((sum * num).div_euclid(den))
            }
            Scale::F32Mul(c) => (u64::from((c * sum32(ops)).to_bits()), false),
            Scale::F32Div(d) => (u64::from((sum32(ops) / d).to_bits()), false),
            Scale::F32Ratio(n, d) => (u64::from((sum32(ops) * n / d).to_bits()), false),
            Scale::F64Mul(c) => ((c * sum64(ops)).to_bits(), false),
            Scale::F64Div(d) => ((sum64(ops) / d).to_bits(), false),
            Scale::F64Ratio(n, d) => ((sum64(ops) * n / d).to_bits(), false),
        }
    }
}

fn sum32(ops: impl Iterator<Item = u64>) -> f32 {
    let mut ops = ops.map(|w| f32::from_bits(w as u32));
    let first = ops.next().unwrap_or(0.0);
    ops.fold(first, |a, b| a + b)
}

fn sum64(ops: impl Iterator<Item = u64>) -> f64 {
    let mut ops = ops.map(f64::from_bits);
    let first = ops.next().unwrap_or(0.0);
    ops.fold(first, |a, b| a + b)
}
