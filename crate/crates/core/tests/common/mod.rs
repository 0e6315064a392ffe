//! Brute-force oracles shared by the integration tests. None of them call the
//! library routine they are used to check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use burstlab::kernel::{Coefficient, DataTypeSpec, DependenceVector, IVec, Kernel, TileCoord, TilingScheme};
use burstlab::layout::LayoutOrder;
use burstlab::mars::TileIOSummary;
use rand::seq::SliceRandom;
use rand::Rng;

/// Best Hamiltonian path weight over all permutations.
pub fn brute_max_path(w: &[Vec<u32>]) -> u32 {
    fn go(w: &[Vec<u32>], last: Option<usize>, used: &mut Vec<bool>, depth: usize) -> u32 {
        if depth == w.len() {
            return 0;
        }
        let mut best = 0;
        for j in 0..w.len() {
            if used[j] {
                continue;
            }
            used[j] = true;
            let gain = last.map_or(0, |i| w[i][j]);
            best = best.max(gain + go(w, Some(j), used, depth + 1));
            used[j] = false;
        }
        best
    }
    go(w, None, &mut vec![false; w.len()], 0)
}

pub fn path_weight(w: &[Vec<u32>], order: &[usize]) -> u32 {
    order.windows(2).map(|p| w[p[0]][p[1]]).sum()
}

/// Read bursts of a tile: per producer, the number of maximal runs of
/// consecutive layout positions among the MARS it supplies.
pub fn brute_bursts(layout: &LayoutOrder, summary: &TileIOSummary) -> usize {
    let mut by_producer: BTreeMap<&TileCoord, BTreeSet<usize>> = BTreeMap::new();
    for r in &summary.inputs {
        let pos = layout.order.iter().position(|&id| id == r.mars_id).unwrap();
        by_producer.entry(&r.producer_offset).or_default().insert(pos);
    }
    by_producer
        .values()
        .map(|s| s.iter().filter(|&&p| p == 0 || !s.contains(&(p - 1))).count())
        .sum()
}

/// MARS of the origin tile by enumeration: points sharing one consumer set.
pub fn brute_mars(ts: &TilingScheme, k: &Kernel) -> BTreeMap<BTreeSet<TileCoord>, usize> {
    let origin = IVec::zeros(ts.dim());
    let mut groups: BTreeMap<BTreeSet<TileCoord>, usize> = BTreeMap::new();
    for p in ts.tile_points(&origin).unwrap() {
        let readers: BTreeSet<TileCoord> = k
            .deps
            .iter()
            .map(|d| ts.tile_of(&(&p + &d.0)).unwrap())
            .filter(|t| *t != origin)
            .collect();
        if !readers.is_empty() {
            *groups.entry(readers).or_default() += 1;
        }
    }
    groups
}

/// Input MARS count of the origin tile: pairs (producer, consumer set)
/// whose consumer set contains the origin, seen from the producer.
pub fn brute_input_mars(ts: &TilingScheme, k: &Kernel) -> usize {
    let groups = brute_mars(ts, k);
    let mut producers = BTreeSet::new();
    for readers in groups.keys() {
        for r in readers {
            producers.insert((r.clone(), readers.clone()));
        }
    }
    producers.len()
}

/// Bits of one delta token from the signed value of the delta.
pub fn token_bits(prev: u64, cur: u64, n: u32) -> u64 {
    let modulus = 1i128 << n;
    let mut d = (cur as i128 - prev as i128).rem_euclid(modulus);
    if d >= modulus / 2 {
        d -= modulus;
    }
    let magnitude = if d < 0 { -d - 1 } else { d };
    let h = 128 - magnitude.leading_zeros() as u64;
    let hb = (f64::from(n).log2().floor() as u64) + 1;
    hb + 1 + h.saturating_sub(1)
}

/// Closed-form stream length: a raw first word, then one token per word.
pub fn token_sum(words: &[u64], n: u32) -> u64 {
    if words.is_empty() {
        return 0;
    }
    u64::from(n) + words.windows(2).map(|p| token_bits(p[0], p[1], n)).sum::<u64>()
}

pub fn mask(n: u32) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1 << n) - 1
    }
}

/// Streams mixing smooth runs, big jumps and extremes.
pub fn random_stream(rng: &mut impl Rng, n: u32, len: usize) -> Vec<u64> {
    let m = mask(n);
    let mut out = Vec::with_capacity(len);
    let mut cur = rng.gen::<u64>() & m;
    for _ in 0..len {
        cur = match rng.gen_range(0..6) {
            0 => rng.gen::<u64>() & m,
            1 => [0, m, m >> 1, (m >> 1) + 1][rng.gen_range(0..4)],
            2 => cur,
            _ => cur.wrapping_add(rng.gen_range(-40i64..=40) as u64) & m,
        };
        out.push(cur);
    }
    out
}

/// Random legal stencil: a 1-D kernel under diamond tiling or a 2-D one
/// under the jacobi-2d skew, time component 1 on every dependence.
pub fn random_kernel(rng: &mut impl Rng) -> (Kernel, TilingScheme) {
    let dtype = DataTypeSpec::fixed(18).unwrap();
    let coeff = Coefficient::Decimal { value: 0.25 };
    if rng.gen_bool(0.4) {
        let mut dx = vec![-1, 0, 1];
        dx.shuffle(rng);
        dx.truncate(rng.gen_range(1..=3));
        let deps = dx.iter().map(|&x| DependenceVector::new(&[1, x])).collect();
        let k = Kernel::new("rand-1d", deps, coeff, dtype).unwrap();
        let s = 2 * rng.gen_range(1..=5);
        (k, TilingScheme::diamond(s, 2 * rng.gen_range(1..=5)).unwrap())
    } else {
        let mut offs: Vec<(i64, i64)> = (-1..=1).flat_map(|x| (-1..=1).map(move |y| (x, y))).collect();
        offs.shuffle(rng);
        offs.truncate(rng.gen_range(1..=6));
        let deps = offs.iter().map(|&(x, y)| DependenceVector::new(&[1, x, y])).collect();
        let k = Kernel::new("rand-2d", deps, coeff, dtype).unwrap();
        let sizes = vec![rng.gen_range(1..=4), rng.gen_range(2..=6), rng.gen_range(2..=6)];
        let skew = vec![vec![1, 0, 0], vec![1, 1, 0], vec![1, 0, 1]];
        (k, TilingScheme::skewed_rect(sizes, skew).unwrap())
    }
}
