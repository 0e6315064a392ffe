use super::arith::Arith;
use crate::error::Result;
use crate::kernel::{Domain, Kernel, Point, ProblemInstance};

/// Stored values indexed by `(t mod depth, x)`, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueGrid {
    pub depth: usize,
    pub sizes: Vec<i64>,
    cells: Vec<u64>,
}

impl ValueGrid {
    /// Every plane holds the initial values.
    pub fn initialized(depth: usize, pi: &ProblemInstance, arith: &Arith) -> (Self, u64) {
        let plane = initial_plane(pi, arith);
        let saturations = plane.1;
        let mut cells = Vec::with_capacity(plane.0.len() * depth);
        for _ in 0..depth {
            cells.extend_from_slice(&plane.0);
        }
        (
            ValueGrid {
                depth,
                sizes: pi.spatial_sizes.clone(),
                cells,
            },
            saturations,
        )
    }

    pub fn plane_len(&self) -> usize {
        self.sizes.iter().product::<i64>() as usize
    }

    pub fn linear(&self, x: &[i64]) -> usize {
        x.iter()
            .zip(&self.sizes)
            .fold(0usize, |acc, (&c, &n)| acc * n as usize + c as usize)
    }

    fn index(&self, p: &Point) -> usize {
        let c = p.as_slice();
        c[0].rem_euclid(self.depth as i64) as usize * self.plane_len() + self.linear(&c[1..])
    }

    pub fn get(&self, p: &Point) -> u64 {
        self.cells[self.index(p)]
    }

    pub fn set(&mut self, p: &Point, w: u64) {
        let i = self.index(p);
        self.cells[i] = w;
    }

    /// The plane holding step `t`.
    pub fn plane(&self, t: i64) -> &[u64] {
        let k = t.rem_euclid(self.depth as i64) as usize;
        &self.cells[k * self.plane_len()..(k + 1) * self.plane_len()]
    }
}

/// Initial words of one plane, row-major, with the number of saturated values.
pub fn initial_plane(pi: &ProblemInstance, arith: &Arith) -> (Vec<u64>, u64) {
    let mut out = Vec::new();
    let mut sat = 0;
    let lo = vec![0; pi.spatial_sizes.len()];
    let hi: Vec<i64> = pi.spatial_sizes.iter().map(|n| n - 1).collect();
    crate::kernel::for_each_box_point(&lo, &hi, |x| {
        let (w, s) = arith.encode(pi.init.value(x, &pi.spatial_sizes));
        sat += u64::from(s);
        out.push(w);
    });
    (out, sat)
}

#[derive(Clone, Debug)]
pub struct ReferenceRun {
    pub grid: ValueGrid,
    pub saturations: u64,
    pub time_steps: i64,
}

impl ReferenceRun {
    pub fn final_plane(&self) -> &[u64] {
        self.grid.plane(self.time_steps)
    }
}

/// Untiled loop nest: `t = 1..=T`, interior cells in lexicographic order.
pub fn run_reference(k: &Kernel, pi: &ProblemInstance) -> Result<ReferenceRun> {
    let domain = Domain::new(k, pi)?;
    let arith = Arith::new(k);
    let (mut grid, mut saturations) = ValueGrid::initialized(k.temporal_depth(), pi, &arith);
    for p in domain.iterations() {
        let (w, s) = arith.apply(k.deps.iter().map(|d| grid.get(&(&p - &d.0))));
        saturations += u64::from(s);
        grid.set(&p, w);
    }
    Ok(ReferenceRun {
        grid,
        saturations,
        time_steps: pi.time_steps,
    })
}
