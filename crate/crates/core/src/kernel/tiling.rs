use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{for_each_box_point, IVec, Kernel, Point, ProblemInstance, TileCoord};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TilingKind {
    /// 1-D stencils tiled along the hyperplanes `t + i` and `t - i`.
    Diamond1d,
    /// Rectangular tiles of the skewed iteration space `skew * p`.
    SkewedRect,
}

/// Tile membership: `tile_of(p)_k = floor((H p)_k / sizes_k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TilingScheme {
    kind: TilingKind,
    sizes: Vec<i64>,
    hyperplanes: Vec<Vec<i64>>,
    // H^-1 = adjugate / det
    adjugate: Vec<Vec<i64>>,
    det: i64,
}

impl TilingScheme {
    /// Diamond tiling of a `(t, i)` space; both sizes must be even so that all
    /// tiles are translates of one another.
    pub fn diamond(s1: i64, s2: i64) -> Result<Self> {
        if s1 < 1 || s2 < 1 {
            return Err(Error::InvalidTiling("tile sizes must be >= 1".into()));
        }
        if s1 % 2 != 0 || s2 % 2 != 0 {
            return Err(Error::InvalidTiling(format!(
                "diamond tile sizes must be even, got {s1}x{s2}"
            )));
        }
        Self::build(TilingKind::Diamond1d, vec![s1, s2], vec![vec![1, 1], vec![1, -1]])
    }

    /// Rectangular tiling after a unimodular skew.
    pub fn skewed_rect(sizes: Vec<i64>, skew: Vec<Vec<i64>>) -> Result<Self> {
        if sizes.iter().any(|&s| s < 1) {
            return Err(Error::InvalidTiling("tile sizes must be >= 1".into()));
        }
        if skew.len() != sizes.len() || skew.iter().any(|r| r.len() != sizes.len()) {
            return Err(Error::InvalidTiling(format!(
                "skew must be {0}x{0} to match {0} tile sizes",
                sizes.len()
            )));
        }
        let ts = Self::build(TilingKind::SkewedRect, sizes, skew)?;
        if ts.det.abs() != 1 {
            return Err(Error::InvalidTiling(format!(
                "skew determinant is {}, must be +-1",
                ts.det
            )));
        }
        Ok(ts)
    }

    /// Plain rectangular tiling (identity skew).
    pub fn rect(sizes: Vec<i64>) -> Result<Self> {
        let n = sizes.len();
        let id = (0..n).map(|r| (0..n).map(|c| i64::from(r == c)).collect()).collect();
        Self::skewed_rect(sizes, id)
    }

    fn build(kind: TilingKind, sizes: Vec<i64>, hyperplanes: Vec<Vec<i64>>) -> Result<Self> {
        let det = determinant(&hyperplanes);
        if det == 0 {
            return Err(Error::InvalidTiling("singular hyperplane matrix".into()));
        }
        let adjugate = adjugate(&hyperplanes);
        Ok(TilingScheme {
            kind,
            sizes,
            hyperplanes,
            adjugate,
            det,
        })
    }

    pub fn kind(&self) -> TilingKind {
        self.kind
    }

    pub fn sizes(&self) -> &[i64] {
        &self.sizes
    }

    pub fn hyperplanes(&self) -> &[Vec<i64>] {
        &self.hyperplanes
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    fn check_dim(&self, v: &IVec) -> Result<()> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.dim(),
            });
        }
        Ok(())
    }

    pub fn tile_of(&self, p: &Point) -> Result<TileCoord> {
        self.check_dim(p)?;
        Ok(self.tile_of_unchecked(p))
    }

    pub(crate) fn tile_of_unchecked(&self, p: &Point) -> TileCoord {
        IVec(
            self.hyperplanes
                .iter()
                .zip(&self.sizes)
                .map(|(row, &s)| {
                    let h: i64 = row.iter().zip(p.as_slice()).map(|(a, b)| a * b).sum();
                    h.div_euclid(s)
                })
                .collect(),
        )
    }

    /// All points of tile `tc`, in lexicographic order. No domain clipping.
    pub fn tile_points(&self, tc: &TileCoord) -> Result<Vec<Point>> {
        self.check_dim(tc)?;
        let lo: Vec<i64> = tc.as_slice().iter().zip(&self.sizes).map(|(c, s)| c * s).collect();
        let hi: Vec<i64> = lo.iter().zip(&self.sizes).map(|(l, s)| l + s - 1).collect();
        let mut pts = Vec::new();
        for_each_box_point(&lo, &hi, |b| {
            if let Some(p) = self.preimage(b) {
                pts.push(p);
            }
        });
        pts.sort();
        Ok(pts)
    }

    /// Integer point `p` with `H p = b`, if any.
    fn preimage(&self, b: &[i64]) -> Option<Point> {
        let mut out = smallvec::SmallVec::<[i64; 4]>::new();
        for row in &self.adjugate {
            let num: i64 = row.iter().zip(b).map(|(a, x)| a * x).sum();
            if num % self.det != 0 {
                return None;
            }
            out.push(num / self.det);
        }
        Some(IVec(out))
    }

    /// Vector `v` such that `tile_points(tc) = tile_points(0) + v`.
    pub fn translation(&self, tc: &TileCoord) -> Result<Point> {
        self.check_dim(tc)?;
        let b: Vec<i64> = tc.as_slice().iter().zip(&self.sizes).map(|(c, s)| c * s).collect();
        self.preimage(&b)
            .ok_or_else(|| Error::InvalidTiling(format!("tile {tc:?} is not a translate of the origin tile")))
    }

    /// Tile-space offsets `tile_of(p + d) - tile_of(p)` over the origin tile, excluding zero.
    pub fn inter_tile_offsets(&self, kernel: &Kernel) -> Result<BTreeSet<TileCoord>> {
        if kernel.dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: kernel.dim,
            });
        }
        let origin = IVec::zeros(self.dim());
        let mut out = BTreeSet::new();
        for p in self.tile_points(&origin)? {
            for d in &kernel.deps {
                let o = self.tile_of_unchecked(&(&p + &d.0));
                if !o.is_zero() {
                    out.insert(o);
                }
            }
        }
        Ok(out)
    }
}

/// Wavefront index used to order tiles: sum of the tile coordinates.
pub fn wavefront(tc: &TileCoord) -> i64 {
    tc.as_slice().iter().sum()
}

/// Orders every tile touching the stored cells `t in 0..=T` so that producers
/// run before consumers: by wavefront, then lexicographically.
///
/// Every inter-tile dependence offset must be componentwise non-negative,
/// which makes all tiles of one wavefront independent.
pub fn legal_tile_schedule(ts: &TilingScheme, pi: &ProblemInstance, kernel: &Kernel) -> Result<Vec<TileCoord>> {
    if pi.spatial_sizes.len() + 1 != ts.dim() {
        return Err(Error::DimensionMismatch {
            expected: ts.dim(),
            got: pi.spatial_sizes.len() + 1,
        });
    }
    for o in ts.inter_tile_offsets(kernel)? {
        if o.as_slice().iter().any(|&c| c < 0) {
            return Err(Error::IllegalTiling { offset: o.to_vec() });
        }
    }
    let lo = vec![0; ts.dim()];
    let hi: Vec<i64> = std::iter::once(pi.time_steps)
        .chain(pi.spatial_sizes.iter().map(|n| n - 1))
        .collect();
    let mut tiles = BTreeSet::new();
    for_each_box_point(&lo, &hi, |p| {
        tiles.insert(ts.tile_of_unchecked(&IVec::new(p)));
    });
    let mut order: Vec<TileCoord> = tiles.into_iter().collect();
    order.sort_by(|a, b| wavefront(a).cmp(&wavefront(b)).then_with(|| a.cmp(b)));
    Ok(order)
}

fn determinant(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        n => (0..n)
            .map(|c| {
                let sign = if c % 2 == 0 { 1 } else { -1 };
                sign * m[0][c] * determinant(&minor(m, 0, c))
            })
            .sum(),
    }
}

fn minor(m: &[Vec<i64>], row: usize, col: usize) -> Vec<Vec<i64>> {
    m.iter()
        .enumerate()
        .filter(|(r, _)| *r != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(c, _)| *c != col)
                .map(|(_, v)| *v)
                .collect()
        })
        .collect()
}

fn adjugate(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![1]];
    }
    (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    let sign = if (r + c) % 2 == 0 { 1 } else { -1 };
                    // transpose of the cofactor matrix
                    sign * determinant(&minor(m, c, r))
                })
                .collect()
        })
        .collect()
}
