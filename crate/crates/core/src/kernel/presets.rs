use super::{
    Coefficient, DataTypeSpec, DependenceVector, Initializer, Kernel, ProblemInstance, TilingKind, TilingScheme,
};
use crate::error::{Error, Result};

/// Counts published for a benchmark: input MARS, output MARS, read bursts,
/// write bursts per tile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PublishedCounts {
    pub mars_in: usize,
    pub mars_out: usize,
    pub read_bursts: usize,
    pub write_bursts: usize,
}

/// A built-in benchmark: kernel, default tiling and a desk-scale problem.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub kernel: Kernel,
    pub tiling: TilingScheme,
    pub problem: ProblemInstance,
    /// Tile sizes the benchmark is usually run with.
    pub tile_sizes: &'static [&'static [i64]],
    pub published: PublishedCounts,
}

impl Preset {
    /// Same tiling shape (and skew) with other tile sizes.
    pub fn with_tile(&self, sizes: &[i64]) -> Result<TilingScheme> {
        retile(&self.tiling, sizes)
    }
}

pub(crate) fn retile(ts: &TilingScheme, sizes: &[i64]) -> Result<TilingScheme> {
    if sizes.len() != ts.dim() {
        return Err(Error::DimensionMismatch {
            expected: ts.dim(),
            got: sizes.len(),
        });
    }
    match ts.kind() {
        TilingKind::Diamond1d => TilingScheme::diamond(sizes[0], sizes[1]),
        TilingKind::SkewedRect => TilingScheme::skewed_rect(sizes.to_vec(), ts.hyperplanes().to_vec()),
    }
}

pub fn preset_names() -> &'static [&'static str] {
    &["jacobi-1d", "jacobi-2d", "seidel-2d"]
}

fn deps(list: &[&[i64]]) -> Vec<DependenceVector> {
    list.iter().map(|d| DependenceVector::new(d)).collect()
}

pub fn preset(name: &str) -> Result<Preset> {
    let fixed18 = DataTypeSpec::fixed(18)?;
    match name {
        "jacobi-1d" => Ok(Preset {
            name: "jacobi-1d",
            kernel: Kernel::new(
                "jacobi-1d",
                deps(&[&[1, -1], &[1, 0], &[1, 1]]),
                Coefficient::Decimal { value: 0.33 },
                fixed18,
            )?,
            tiling: TilingScheme::diamond(6, 6)?,
            problem: ProblemInstance::new(20, vec![40], Initializer::Polybench)?,
            tile_sizes: &[&[6, 6], &[64, 64], &[200, 200]],
            published: PublishedCounts {
                mars_in: 7,
                mars_out: 4,
                read_bursts: 3,
                write_bursts: 1,
            },
        }),
        "jacobi-2d" => Ok(Preset {
            name: "jacobi-2d",
            kernel: Kernel::new(
                "jacobi-2d",
                deps(&[&[1, 0, 0], &[1, 0, 1], &[1, 0, -1], &[1, 1, 0], &[1, -1, 0]]),
                Coefficient::Decimal { value: 0.2 },
                fixed18,
            )?,
            tiling: TilingScheme::skewed_rect(vec![4, 5, 7], vec![vec![1, 0, 0], vec![1, 1, 0], vec![1, 0, 1]])?,
            problem: ProblemInstance::new(16, vec![32, 32], Initializer::Polybench)?,
            tile_sizes: &[&[4, 5, 7], &[10, 10, 10]],
            published: PublishedCounts {
                mars_in: 28,
                mars_out: 13,
                read_bursts: 10,
                write_bursts: 1,
            },
        }),
        "seidel-2d" => Ok(Preset {
            name: "seidel-2d",
            kernel: Kernel::new(
                "seidel-2d",
                deps(&[
                    &[0, 1, 1],
                    &[0, 1, 0],
                    &[0, 1, -1],
                    &[0, 0, 1],
                    &[1, 0, 0],
                    &[1, 0, -1],
                    &[1, -1, 1],
                    &[1, -1, 0],
                    &[1, -1, -1],
                ]),
                Coefficient::Rational { num: 1, den: 9 },
                fixed18,
            )?,
            tiling: TilingScheme::skewed_rect(vec![4, 10, 10], vec![vec![1, 0, 0], vec![1, 1, 0], vec![2, 1, 1]])?,
            problem: ProblemInstance::new(12, vec![48, 48], Initializer::Polybench)?,
            tile_sizes: &[&[4, 10, 10]],
            published: PublishedCounts {
                mars_in: 33,
                mars_out: 13,
                read_bursts: 10,
                write_bursts: 1,
            },
        }),
        other => Err(Error::Config {
            path: "preset".into(),
            msg: format!("unknown preset `{other}` (known: {})", preset_names().join(", ")),
        }),
    }
}
