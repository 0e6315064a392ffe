//! Stencil kernels, iteration and value spaces, and problem instances.
//!
//! Every iteration point `(t, x...)` produces exactly one logical value with
//! the same coordinates. A dependence vector `d` means that iteration `q`
//! reads the value produced at `q - d`, so the consumers of value `p` are the
//! points `p + d`.

mod config;
mod presets;
mod tiling;

pub use config::{CoefficientConfig, DataTypeConfig, InitConfig, KernelConfig, ProblemConfig, RunSetup, TilingConfig};
pub(crate) use presets::retile;
pub use presets::{preset, preset_names, Preset};
pub use tiling::{legal_tile_schedule, wavefront, TilingKind, TilingScheme};

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Integer vector used for iteration points, value points and tile coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IVec(pub SmallVec<[i64; 4]>);

impl IVec {
    pub fn new(coords: &[i64]) -> Self {
        IVec(SmallVec::from_slice(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        IVec(SmallVec::from_elem(0, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn to_vec(&self) -> Vec<i64> {
        self.0.to_vec()
    }
}

impl std::ops::Index<usize> for IVec {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl fmt::Debug for IVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl<'a> Add<&'a IVec> for &'a IVec {
    type Output = IVec;
    fn add(self, rhs: &IVec) -> IVec {
        debug_assert_eq!(self.dim(), rhs.dim());
        IVec(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl<'a> Sub<&'a IVec> for &'a IVec {
    type Output = IVec;
    fn sub(self, rhs: &IVec) -> IVec {
        debug_assert_eq!(self.dim(), rhs.dim());
        IVec(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &IVec {
    type Output = IVec;
    fn neg(self) -> IVec {
        IVec(self.0.iter().map(|c| -c).collect())
    }
}

/// A point of the iteration (or value) space: time first, then space.
pub type Point = IVec;
/// Coordinates of a tile in tile space.
pub type TileCoord = IVec;

/// Iteration `q` reads the value produced at `q - delta`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DependenceVector(pub IVec);

impl DependenceVector {
    pub fn new(delta: &[i64]) -> Self {
        DependenceVector(IVec::new(delta))
    }

    pub fn time(&self) -> i64 {
        self.0[0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumberKind {
    Fixed,
    Float,
}

/// Word format of the values moved between tiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DataTypeSpec {
    pub kind: NumberKind,
    pub total_bits: u32,
    pub frac_bits: u32,
    pub signed: bool,
}

impl DataTypeSpec {
    /// Signed fixed point with the default 8 integer bits.
    pub fn fixed(total_bits: u32) -> Result<Self> {
        let frac = total_bits.saturating_sub(8);
        Self::fixed_with_frac(total_bits, frac)
    }

    pub fn fixed_with_frac(total_bits: u32, frac_bits: u32) -> Result<Self> {
        let spec = DataTypeSpec {
            kind: NumberKind::Fixed,
            total_bits,
            frac_bits,
            signed: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn float(total_bits: u32) -> Result<Self> {
        let spec = DataTypeSpec {
            kind: NumberKind::Float,
            total_bits,
            frac_bits: 0,
            signed: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.total_bits;
        if !(2..=64).contains(&n) {
            return Err(Error::InvalidDataType(format!("word width {n} not in 2..=64")));
        }
        match self.kind {
            NumberKind::Fixed if self.frac_bits >= n => Err(Error::InvalidDataType(format!(
                "fraction bits {} must be below word width {n}",
                self.frac_bits
            ))),
            NumberKind::Float if n != 32 && n != 64 => {
                Err(Error::InvalidDataType(format!("float width must be 32 or 64, got {n}")))
            }
            _ => Ok(()),
        }
    }

    /// Aligned container a padded word occupies in memory (power of two, at least a byte).
    pub fn container_bits(&self) -> u32 {
        self.total_bits.max(8).next_power_of_two()
    }

    pub fn mask(&self) -> u64 {
        if self.total_bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.total_bits) - 1
        }
    }

    /// Parses `fixed:N`, `fixed:N:FRAC`, `float:32` or `float:64`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::InvalidDataType(format!("cannot parse `{text}`"));
        let mut parts = text.split(':');
        let kind = parts.next().ok_or_else(bad)?;
        let bits: u32 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let frac = parts.next().map(|f| f.parse::<u32>().map_err(|_| bad())).transpose()?;
        if parts.next().is_some() {
            return Err(bad());
        }
        match (kind, frac) {
            ("fixed", None) => Self::fixed(bits),
            ("fixed", Some(f)) => Self::fixed_with_frac(bits, f),
            ("float", None) => Self::float(bits),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for DataTypeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NumberKind::Fixed => write!(f, "fixed:{}:{}", self.total_bits, self.frac_bits),
            NumberKind::Float => write!(f, "float:{}", self.total_bits),
        }
    }
}

/// Scale applied to the sum of the operands read through the dependences.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum Coefficient {
    /// Literal decimal, e.g. PolyBench's `0.33`.
    Decimal { value: f64 },
    /// Exact rational, e.g. `1/9` for seidel-2d.
    Rational { num: i64, den: i64 },
}

impl Coefficient {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let num = n.trim().parse::<i64>();
            let den = d.trim().parse::<i64>();
            match (num, den) {
                (Ok(num), Ok(den)) if den > 0 => Ok(Coefficient::Rational { num, den }),
                _ => Err(Error::InvalidKernel(format!("bad rational coefficient `{text}`"))),
            }
        } else {
            text.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(|value| Coefficient::Decimal { value })
                .ok_or_else(|| Error::InvalidKernel(format!("bad coefficient `{text}`")))
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Decimal { value } => write!(f, "{value}"),
            Coefficient::Rational { num, den } => write!(f, "{num}/{den}"),
        }
    }
}

/// A uniform-dependence stencil.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Kernel {
    pub name: String,
    pub dim: usize,
    pub deps: Vec<DependenceVector>,
    pub coeff: Coefficient,
    pub dtype: DataTypeSpec,
}

impl Kernel {
    pub fn new(
        name: impl Into<String>,
        deps: Vec<DependenceVector>,
        coeff: Coefficient,
        dtype: DataTypeSpec,
    ) -> Result<Self> {
        let dim = deps.first().map(|d| d.0.dim()).unwrap_or(0);
        let kernel = Kernel {
            name: name.into(),
            dim,
            deps,
            coeff,
            dtype,
        };
        kernel.validate()?;
        Ok(kernel)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidKernel(m));
        if self.deps.is_empty() {
            return bad("no dependences".into());
        }
        if self.dim < 2 {
            return bad(format!("dimensionality {} < 2 (time plus space)", self.dim));
        }
        for (i, d) in self.deps.iter().enumerate() {
            if d.0.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: d.0.dim(),
                });
            }
            if !(0..=1).contains(&d.time()) {
                return bad(format!("dependence {:?}: time component must be 0 or 1", d.0));
            }
            if d.0 <= IVec::zeros(self.dim) {
                return bad(format!("dependence {:?} is not lexicographically positive", d.0));
            }
            if self.deps[..i].contains(d) {
                return bad(format!("duplicate dependence {:?}", d.0));
            }
        }
        if self.in_place() {
            // One storage plane: a value of step t-1 must still be in place when read.
            for d in self.deps.iter().filter(|d| d.time() == 1) {
                let spatial = IVec::new(&d.0.as_slice()[1..]);
                if spatial > IVec::zeros(self.dim - 1) {
                    return bad(format!("in-place kernel reads an overwritten value through {:?}", d.0));
                }
            }
        }
        self.dtype.validate()
    }

    pub fn spatial_dim(&self) -> usize {
        self.dim - 1
    }

    /// A kernel is in place when some dependence stays within one time step.
    pub fn in_place(&self) -> bool {
        self.deps.iter().any(|d| d.time() == 0)
    }

    /// Number of time planes of the original array layout.
    pub fn temporal_depth(&self) -> usize {
        if self.in_place() {
            1
        } else {
            2
        }
    }

    /// Largest absolute dependence component per spatial dimension.
    pub fn halo(&self) -> Vec<i64> {
        (1..self.dim)
            .map(|k| self.deps.iter().map(|d| d.0[k].abs()).max().unwrap_or(0))
            .collect()
    }
}

/// Initial value formula for the live-in cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum Initializer {
    /// `A[i] = (i+2)/n` in 1-D, `A[i][j] = (i*(j+2)+2)/n` in 2-D.
    Polybench,
    Constant {
        value: f64,
    },
    /// Uniform in `[0, 1)` from a seeded generator.
    Random {
        seed: u64,
    },
}

impl Initializer {
    pub fn value(&self, x: &[i64], sizes: &[i64]) -> f64 {
        match *self {
            Initializer::Polybench => {
                let n = sizes[0] as f64;
                match x {
                    [i] => (*i as f64 + 2.0) / n,
                    [i, j] => (*i as f64 * (*j as f64 + 2.0) + 2.0) / n,
                    _ => (x.iter().sum::<i64>() as f64 + 2.0) / n,
                }
            }
            Initializer::Constant { value } => value,
            Initializer::Random { seed } => {
                // Counter-based: the value only depends on the seed and the cell.
                use rand::{Rng, SeedableRng};
                let mut key = seed;
                for (k, &c) in x.iter().enumerate() {
                    key = key
                        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                        .wrapping_add((c as u64) ^ ((k as u64) << 56));
                }
                rand_chacha::ChaCha8Rng::seed_from_u64(key).gen::<f64>()
            }
        }
    }
}

/// Problem sizes: `t` runs over `1..=time_steps`, spatial cell `x_k` over
/// `0..spatial_sizes[k]`, interior cells are updated, the rest stay constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProblemInstance {
    pub time_steps: i64,
    pub spatial_sizes: Vec<i64>,
    pub init: Initializer,
}

impl ProblemInstance {
    pub fn new(time_steps: i64, spatial_sizes: Vec<i64>, init: Initializer) -> Result<Self> {
        let pi = ProblemInstance {
            time_steps,
            spatial_sizes,
            init,
        };
        if pi.time_steps < 0 {
            return Err(Error::InvalidProblem("negative time steps".into()));
        }
        if pi.spatial_sizes.is_empty() || pi.spatial_sizes.iter().any(|&n| n < 1) {
            return Err(Error::InvalidProblem("spatial sizes must be >= 1".into()));
        }
        Ok(pi)
    }
}

/// The iteration domain of a kernel on a problem instance.
#[derive(Clone, Debug)]
pub struct Domain {
    pub time_steps: i64,
    pub sizes: Vec<i64>,
    pub halo: Vec<i64>,
}

impl Domain {
    pub fn new(kernel: &Kernel, pi: &ProblemInstance) -> Result<Self> {
        if pi.spatial_sizes.len() != kernel.spatial_dim() {
            return Err(Error::DimensionMismatch {
                expected: kernel.spatial_dim(),
                got: pi.spatial_sizes.len(),
            });
        }
        Ok(Domain {
            time_steps: pi.time_steps,
            sizes: pi.spatial_sizes.clone(),
            halo: kernel.halo(),
        })
    }

    /// Point is an executed iteration.
    pub fn contains(&self, p: &Point) -> bool {
        let c = p.as_slice();
        (1..=self.time_steps).contains(&c[0])
            && c[1..]
                .iter()
                .zip(self.sizes.iter().zip(&self.halo))
                .all(|(&x, (&n, &h))| x >= h && x <= n - 1 - h)
    }

    /// Point is a stored cell of the original arrays at some step `0..=T`.
    pub fn in_storage(&self, p: &Point) -> bool {
        let c = p.as_slice();
        (0..=self.time_steps).contains(&c[0]) && c[1..].iter().zip(&self.sizes).all(|(&x, &n)| (0..n).contains(&x))
    }

    /// Point carries an initial value never produced by an iteration.
    pub fn is_live_in(&self, p: &Point) -> bool {
        self.in_storage(p) && !self.contains(p)
    }

    /// All executed iterations in lexicographic order.
    pub fn iterations(&self) -> Vec<Point> {
        let lo: Vec<i64> = self.halo.clone();
        let hi: Vec<i64> = self.sizes.iter().zip(&self.halo).map(|(n, h)| n - 1 - h).collect();
        let mut out = Vec::new();
        for t in 1..=self.time_steps {
            for_each_box_point(&lo, &hi, |x| {
                let mut c = SmallVec::<[i64; 4]>::new();
                c.push(t);
                c.extend_from_slice(x);
                out.push(IVec(c));
            });
        }
        out
    }
}

/// Visits every integer point of the box `lo..=hi` in lexicographic order.
pub(crate) fn for_each_box_point(lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64])) {
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return;
    }
    let mut cur = lo.to_vec();
    loop {
        f(&cur);
        let mut k = cur.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if cur[k] < hi[k] {
                cur[k] += 1;
                cur[k + 1..].copy_from_slice(&lo[k + 1..]);
                break;
            }
        }
    }
}
