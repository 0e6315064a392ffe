use super::{LayoutOrder, WeightMatrix};
use crate::error::{Error, Result};

/// Largest MARS count the subset DP accepts (2^n * n table entries).
pub const MAX_EXACT_MARS: usize = 20;

/// Exact maximum-weight Hamiltonian path by subset DP.
///
/// `best[mask][v]` is the heaviest path visiting exactly `mask` and starting
/// at `v`. Among optimal orders the lexicographically smallest one is returned.
pub fn solve_layout_exact(w: &WeightMatrix) -> Result<LayoutOrder> {
    let n = w.len();
    if n > MAX_EXACT_MARS {
        return Err(Error::TooManyMars(n));
    }
    if n <= 1 {
        return Ok(LayoutOrder::identity(w));
    }
    let full = (1usize << n) - 1;
    let mut best = vec![0u32; (full + 1) * n];
    for mask in 1..=full {
        if mask.count_ones() == 1 {
            continue;
        }
        let mut bits = mask;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = mask & !(1 << v);
            let mut value = 0;
            let mut others = rest;
            while others != 0 {
                let u = others.trailing_zeros() as usize;
                others &= others - 1;
                value = value.max(w.get(v, u) + best[rest * n + u]);
            }
            best[mask * n + v] = value;
        }
    }

    let optimum = (0..n).map(|v| best[full * n + v]).max().unwrap_or(0);
    let mut order = Vec::with_capacity(n);
    let mut cur = (0..n).find(|&v| best[full * n + v] == optimum).unwrap();
    let mut mask = full;
    order.push(cur);
    while order.len() < n {
        let target = best[mask * n + cur];
        let rest = mask & !(1 << cur);
        let next = (0..n)
            .filter(|&u| rest & (1 << u) != 0)
            .find(|&u| w.get(cur, u) + best[rest * n + u] == target)
            .expect("DP table is consistent");
        order.push(next);
        mask = rest;
        cur = next;
    }
    let layout = LayoutOrder::from_order(order, w);
    debug_assert_eq!(layout.objective, optimum);
    Ok(layout)
}

/// (weight, tail-ness penalty, a, b)
type MergeKey = (std::cmp::Reverse<u32>, u8, usize, usize);

/// Greedy path merging: repeatedly join the heaviest pair of path endpoints.
///
/// Ties prefer extending a path at its tail with another path's head, then
/// the smallest endpoint indices, so all-zero weights give the identity.
pub fn solve_layout_greedy(w: &WeightMatrix) -> LayoutOrder {
    let n = w.len();
    let mut paths: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while paths.len() > 1 {
        // (weight, tail-ness penalty, a, b, path of a, path of b)
        let mut pick: Option<(MergeKey, usize, usize)> = None;
        for (pa, a_path) in paths.iter().enumerate() {
            for (pb, b_path) in paths.iter().enumerate() {
                if pa == pb {
                    continue;
                }
                let a_ends = [*a_path.last().unwrap(), a_path[0]];
                let b_ends = [b_path[0], *b_path.last().unwrap()];
                for (ai, &a) in a_ends.iter().enumerate() {
                    for (bi, &b) in b_ends.iter().enumerate() {
                        let penalty = (ai + bi) as u8;
                        let key = (std::cmp::Reverse(w.get(a, b)), penalty, a, b);
                        if pick.as_ref().is_none_or(|(k, _, _)| key < *k) {
                            pick = Some((key, pa, pb));
                        }
                    }
                }
            }
        }
        let ((_, _, a, b), pa, pb) = pick.unwrap();
        let mut head = paths[pa].clone();
        if *head.last().unwrap() != a {
            head.reverse();
        }
        let mut tail = paths[pb].clone();
        if tail[0] != b {
            tail.reverse();
        }
        head.extend(tail);
        let (lo, hi) = (pa.min(pb), pa.max(pb));
        paths.remove(hi);
        paths[lo] = head;
    }
    let mut order = paths.pop().unwrap_or_default();
    if order.len() > 1 && order[0] > *order.last().unwrap() {
        order.reverse();
    }
    LayoutOrder::from_order(order, w)
}

/// Exact solver when it fits, greedy fallback otherwise.
pub fn solve_layout(w: &WeightMatrix) -> LayoutOrder {
    match solve_layout_exact(w) {
        Ok(l) => l,
        Err(_) => solve_layout_greedy(w),
    }
}
