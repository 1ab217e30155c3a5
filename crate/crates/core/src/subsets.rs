//! Small helpers for index subsets.

/// All subsets of `universe`, in order of their bitmask over `universe` positions.
pub fn all_subsets(universe: &[usize]) -> Vec<Vec<usize>> {
    (0..1usize << universe.len())
        .map(|mask| mask_to_subset(mask, universe))
        .collect()
}

/// Elements of `universe` selected by the bits of `mask`, in increasing order.
pub fn mask_to_subset(mask: usize, universe: &[usize]) -> Vec<usize> {
    universe
        .iter()
        .enumerate()
        .filter(|&(b, _)| mask >> b & 1 == 1)
        .map(|(_, &i)| i)
        .collect()
}

/// Mask of `subset` over `universe`, or `None` if `subset` is not contained in it.
pub fn subset_to_mask(subset: &[usize], universe: &[usize]) -> Option<usize> {
    subset.iter().try_fold(0usize, |mask, i| {
        universe.iter().position(|u| u == i).map(|b| mask | 1 << b)
    })
}

/// All `size`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if size > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..size).collect();
    loop {
        out.push(cur.clone());
        // rightmost position that can still advance
        let Some(pos) = (0..size).rev().find(|&p| cur[p] < n - size + p) else {
            return out;
        };
        cur[pos] += 1;
        for q in pos + 1..size {
            cur[q] = cur[q - 1] + 1;
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}
