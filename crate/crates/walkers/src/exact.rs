use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::{HeightHistogram, Mode, Result, WalkEnsembleConfig};

/// `slot = left + right`, reusing `slot`'s allocation.
fn set_sum(slot: &mut BigUint, left: &BigUint, right: &BigUint) {
    slot.clone_from(left);
    *slot += right;
}

/// Walks of `steps` ±1 steps from `from` to `to` that stay in `[0, cap]`.
///
/// The table is updated in place: at each step only sites of one parity are
/// live, and they are rebuilt from their neighbours of the other parity.
fn single_walks(steps: usize, from: usize, to: usize, cap: usize) -> BigUint {
    if from > cap || to > cap {
        return BigUint::zero();
    }
    let mut a = vec![BigUint::zero(); cap + 2];
    a[from] = BigUint::one();
    let zero = BigUint::zero();
    for t in 0..steps {
        let remaining = steps - t - 1;
        // sites reachable at t+1 that can still reach `to`
        let hi = cap.min(from + t + 1).min(to + remaining);
        let lo = (to.saturating_sub(remaining)).max(from.saturating_sub(t + 1));
        let parity = (from + t + 1) % 2;
        let mut x = lo + (lo + parity) % 2;
        while x <= hi {
            let mut slot = std::mem::take(&mut a[x]);
            let left = if x == 0 { &zero } else { &a[x - 1] };
            set_sum(&mut slot, left, &a[x + 1]);
            a[x] = slot;
            x += 2;
        }
        // sites below `lo` of the live parity are dead from now on
        let mut y = parity;
        while y < lo {
            a[y].set_zero();
            y += 2;
        }
    }
    std::mem::take(&mut a[to])
}

/// Number of `steps`-step walks from `from` to `to` that never go below 0.
pub fn wall_paths(steps: usize, from: usize, to: usize) -> BigUint {
    single_walks(steps, from, to, from.max(to) + steps)
}

/// Nonintersecting walker pairs from `(0, 2)` back to `(0, 2)` in `steps`
/// steps with `x₂ ≤ cap`.
fn pair_walks(steps: usize, cap: usize) -> BigUint {
    if cap < 2 {
        return BigUint::zero();
    }
    let w = cap + 2;
    let idx = |x1: usize, x2: usize| x1 * w + x2;
    let mut a = vec![BigUint::zero(); w * w];
    a[idx(0, 2)] = BigUint::one();
    for t in 0..steps {
        // both walkers must stay within `reach` of their endpoints; sites
        // outside the window are never read again once it starts shrinking
        let reach = (t + 1).min(steps - t - 1);
        let parity = (t + 1) % 2;
        let hi2 = cap.min(2 + reach);
        let hi1 = reach.min(hi2.saturating_sub(2));
        let mut x1 = parity;
        while x1 <= hi1 {
            let mut x2 = x1 + 2;
            while x2 <= hi2 {
                let mut slot = std::mem::take(&mut a[idx(x1, x2)]);
                slot.set_zero();
                for y1 in [x1.checked_sub(1), Some(x1 + 1)].into_iter().flatten() {
                    for y2 in [x2 - 1, x2 + 1] {
                        if y1 < y2 {
                            slot += &a[idx(y1, y2)];
                        }
                    }
                }
                a[idx(x1, x2)] = slot;
                x2 += 2;
            }
            x1 += 2;
        }
    }
    std::mem::take(&mut a[idx(0, 2)])
}

/// Configurations of `2n` steps whose height is at most `cap`.
pub fn capped_counts(n_walkers: u8, n: usize, cap: usize) -> BigUint {
    match n_walkers {
        1 => single_walks(2 * n, 0, 0, cap),
        _ => pair_walks(2 * n, cap),
    }
}

/// Total number of 2-watermelons from the Lindström–Gessel–Viennot
/// determinant of single-walker wall-path counts.
pub fn lgv_total(n: usize) -> BigUint {
    let r = 2 * n;
    let w00 = wall_paths(r, 0, 0);
    let w22 = wall_paths(r, 2, 2);
    let w02 = wall_paths(r, 0, 2);
    let w20 = wall_paths(r, 2, 0);
    w00 * w22 - w02 * w20
}

/// Exact height histogram by differences of capped counts.
pub fn enumerate_heights(config: &WalkEnsembleConfig) -> Result<HeightHistogram> {
    let checked = WalkEnsembleConfig::new(
        config.n_walkers,
        config.half_length,
        Mode::Exact,
        config.samples,
        config.seed,
    )?;
    let (lo, hi) = checked.height_range();
    let n = checked.half_length;
    let capped: Vec<BigUint> = (lo..=hi)
        .into_par_iter()
        .map(|cap| capped_counts(checked.n_walkers, n, cap))
        .collect();
    let mut counts = BTreeMap::new();
    let mut below = BigUint::zero();
    for (h, c) in (lo..=hi).zip(capped.iter()) {
        let exact = c - &below;
        if !exact.is_zero() {
            counts.insert(h, exact);
        }
        below.clone_from(c);
    }
    Ok(HeightHistogram {
        n_walkers: checked.n_walkers,
        half_length: n,
        mode: Mode::Exact,
        counts,
        total: below,
    })
}
