//! Access patterns of the reference design: tiles read and write their exact
//! footprint (or its bounding box) in the original arrays, and consecutive
//! addresses are assumed to coalesce into one burst.

use std::collections::{BTreeMap, HashMap};

use super::{Direction, Transfer};
use crate::error::{Error, Result};
use crate::kernel::{for_each_box_point, Point, TileCoord};

/// The untransformed arrays: `depth` time planes of row-major cells, each
/// cell an aligned container of `cell_bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OriginalLayout {
    pub depth: usize,
    pub sizes: Vec<i64>,
    pub cell_bits: u32,
    pub word_bits: u32,
}

impl OriginalLayout {
    pub fn plane_cells(&self) -> u64 {
        self.sizes.iter().product::<i64>() as u64
    }

    pub fn total_cells(&self) -> u64 {
        self.plane_cells() * self.depth as u64
    }

    /// Cell index of the stored value `p = (t, x)`.
    pub fn cell(&self, p: &Point) -> u64 {
        let c = p.as_slice();
        let plane = c[0].rem_euclid(self.depth as i64) as u64;
        let mut lin = 0u64;
        for (x, n) in c[1..].iter().zip(&self.sizes) {
            debug_assert!((0..*n).contains(x));
            lin = lin * (*n as u64) + *x as u64;
        }
        plane * self.plane_cells() + lin
    }

    /// Cells of `points`, rejecting two versions of one cell.
    fn cells(&self, tile: &TileCoord, points: &[Point]) -> Result<BTreeMap<u64, ()>> {
        let mut seen: HashMap<u64, &Point> = HashMap::with_capacity(points.len());
        for p in points {
            let c = p.as_slice();
            if c[1..].iter().zip(&self.sizes).any(|(x, n)| !(0..*n).contains(x)) {
                return Err(Error::InvalidProblem(format!(
                    "point {:?} of tile {:?} is outside the arrays",
                    c,
                    tile.to_vec()
                )));
            }
            if let Some(prev) = seen.insert(self.cell(p), p) {
                if prev != p {
                    return Err(Error::FootprintAlias(tile.to_vec()));
                }
            }
        }
        Ok(seen.into_keys().map(|c| (c, ())).collect())
    }

    fn runs_to_transfers(
        &self,
        tile: &TileCoord,
        dir: Direction,
        fetched: impl IntoIterator<Item = u64>,
        wanted: &BTreeMap<u64, ()>,
        width: u64,
    ) -> Vec<Transfer> {
        let mut runs: Vec<(u64, u64)> = Vec::new();
        for c in fetched {
            match runs.last_mut() {
                Some((_, end)) if *end == c => *end = c + 1,
                _ => runs.push((c, c + 1)),
            }
        }
        let c_bits = u64::from(self.cell_bits);
        runs.into_iter()
            .map(|(a, b)| {
                let words = wanted.range(a..b).count() as u64;
                Transfer::covering(
                    tile.clone(),
                    dir,
                    a * c_bits,
                    b * c_bits,
                    words * u64::from(self.word_bits),
                    words,
                    width,
                )
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineKind {
    Minimal,
    BoundingBox,
}

/// One burst per run of consecutive footprint cells.
pub fn baseline_minimal(
    tile: &TileCoord,
    footprint: &[Point],
    layout: &OriginalLayout,
    dir: Direction,
    width: u64,
) -> Result<Vec<Transfer>> {
    let cells = layout.cells(tile, footprint)?;
    Ok(layout.runs_to_transfers(tile, dir, cells.keys().copied(), &cells, width))
}

/// Per time plane, the bounding box of the footprint, in consecutive runs.
pub fn baseline_bbox(
    tile: &TileCoord,
    footprint: &[Point],
    layout: &OriginalLayout,
    dir: Direction,
    width: u64,
) -> Result<Vec<Transfer>> {
    let cells = layout.cells(tile, footprint)?;
    let depth = layout.depth as i64;
    let mut boxes: BTreeMap<i64, (Vec<i64>, Vec<i64>)> = BTreeMap::new();
    for p in footprint {
        let c = p.as_slice();
        let (lo, hi) = boxes
            .entry(c[0].rem_euclid(depth))
            .or_insert_with(|| (c[1..].to_vec(), c[1..].to_vec()));
        for k in 1..c.len() {
            lo[k - 1] = lo[k - 1].min(c[k]);
            hi[k - 1] = hi[k - 1].max(c[k]);
        }
    }
    let mut fetched = Vec::new();
    for (plane, (lo, hi)) in &boxes {
        for_each_box_point(lo, hi, |x| {
            let mut c = vec![*plane];
            c.extend_from_slice(x);
            fetched.push(layout.cell(&Point::new(&c)));
        });
    }
    fetched.sort_unstable();
    Ok(layout.runs_to_transfers(tile, dir, fetched, &cells, width))
}
