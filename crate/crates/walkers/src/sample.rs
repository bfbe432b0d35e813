use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{HeightHistogram, Mode, Result, WalkEnsembleConfig};

/// Number of completions from every reachable state, by exhaustive backward
/// recursion. Only practical for small `n`; used to check the closed-form
/// step weights.
#[derive(Debug, Clone)]
pub struct SuffixTable {
    pub n_walkers: u8,
    pub half_length: usize,
    /// `by_remaining[r][&state]`: completions with `r` steps left.
    by_remaining: Vec<HashMap<[i64; 2], BigUint>>,
}

impl SuffixTable {
    pub fn new(n_walkers: u8, half_length: usize) -> Self {
        let steps = 2 * half_length;
        let mut by_remaining: Vec<HashMap<[i64; 2], BigUint>> = Vec::with_capacity(steps + 1);
        let mut end = HashMap::new();
        end.insert(end_state(n_walkers), BigUint::one());
        by_remaining.push(end);
        for r in 1..=steps {
            let prev = &by_remaining[r - 1];
            let mut cur: HashMap<[i64; 2], BigUint> = HashMap::new();
            for (state, count) in prev {
                for from in neighbours(n_walkers, *state) {
                    *cur.entry(from).or_default() += count;
                }
            }
            by_remaining.push(cur);
        }
        Self {
            n_walkers,
            half_length,
            by_remaining,
        }
    }

    /// Completions from `state` with `r` steps left.
    pub fn count(&self, r: usize, state: [i64; 2]) -> BigUint {
        self.by_remaining
            .get(r)
            .and_then(|m| m.get(&state))
            .cloned()
            .unwrap_or_default()
    }

    pub fn total(&self) -> BigUint {
        self.count(2 * self.half_length, end_state(self.n_walkers))
    }

    /// Exact law of the state after `t` steps.
    pub fn state_law(&self, t: usize) -> BTreeMap<[i64; 2], f64> {
        let steps = 2 * self.half_length;
        let total = self.total();
        // forward counts equal backward counts by time reversal
        self.by_remaining[steps - t]
            .iter()
            .map(|(s, c)| (*s, crate::big_ratio(&(c * self.count(t, *s)), &total)))
            .filter(|(_, p)| *p > 0.0)
            .collect()
    }
}

fn end_state(n_walkers: u8) -> [i64; 2] {
    if n_walkers == 1 {
        [0, 0]
    } else {
        [0, 2]
    }
}

fn admissible(n_walkers: u8, s: [i64; 2]) -> bool {
    s[0] >= 0 && (n_walkers == 1 || s[0] < s[1])
}

/// States one step away from `s` that are admissible.
fn neighbours(n_walkers: u8, s: [i64; 2]) -> Vec<[i64; 2]> {
    let mut out = Vec::with_capacity(4);
    for d1 in [-1, 1] {
        if n_walkers == 1 {
            let t = [s[0] + d1, 0];
            if admissible(1, t) {
                out.push(t);
            }
            continue;
        }
        for d2 in [-1, 1] {
            let t = [s[0] + d1, s[1] + d2];
            if admissible(2, t) {
                out.push(t);
            }
        }
    }
    out
}

/// Completions of a walker at `a'` with `r'` steps left to end at 0 and at 2,
/// both divided by `C(r', k-1)` with `k = (r'+a')/2`: returns `(numerator of
/// N₀, numerator of N₂, common denominator k(k+1)(k+2))`.
#[cfg(test)]
fn completion_row(rp: i64, ap: i64) -> (f64, f64, f64) {
    if ap < 0 || ap > rp + 2 {
        return (0.0, 0.0, 1.0);
    }
    // integer-valued and below 2^53 for every reachable state with n ≤ 10⁵
    let k = ((rp + ap) / 2) as f64;
    let m = rp as f64 - k;
    let d = k * (k + 1.0) * (k + 2.0);
    let p0 = (ap as f64 + 1.0) * (m + 1.0) * (k + 2.0);
    let p2 = d - (m + 1.0) * m * (m - 1.0);
    (p0, p2, d)
}

/// Rows `[N₀(up), N₂(up), N₀(down), N₂(down)]` for one walker at `a` with
/// `r ≥ 2` steps left, up to a factor shared by both candidates.
///
/// With `K = (r+a)/2` the candidates carry `C(r-1, K-1)` and `C(r-1, K-2)`
/// completions per unit of their [`completion_row`]; rescaling both by
/// `K(K+1)(K+2) / C(r-1, K-2)` leaves integer-valued rows.
#[inline(always)]
fn walker_rows(r: i64, a: i64) -> [f64; 4] {
    let af = a as f64;
    let k = ((r + a) >> 1) as f64;
    // up: k' = K, m' = r-1-K; dead when a = r+2
    let mu = (r - 1) as f64 - k;
    let du = k * (k + 1.0) * (k + 2.0);
    let su = if a > r { 0.0 } else { mu + 2.0 };
    let up0 = su * (af + 2.0) * (mu + 1.0) * (k + 2.0);
    let up2 = su * (du - (mu + 1.0) * mu * (mu - 1.0));
    // down: k' = K-1, m' = r-K; blocked by the wall at a = 0
    let md = r as f64 - k;
    let dd = (k - 1.0) * k * (k + 1.0);
    let sd = if a == 0 { 0.0 } else { k + 2.0 };
    let down0 = sd * af * (md + 1.0) * (k + 1.0);
    let down2 = sd * (dd - (md + 1.0) * md * (md - 1.0));
    [up0, up2, down0, down2]
}

/// Pair weights in the order up-up, up-down, down-up, down-down, from the
/// Lindström–Gessel–Viennot determinant of the two walkers' rows.
#[inline(always)]
fn pair_weights(r: i64, a1: i64, a2: i64) -> [f64; 4] {
    let p = walker_rows(r, a1);
    let q = walker_rows(r, a2);
    let det = |x0: f64, x2: f64, y0: f64, y2: f64| (x0 * y2 - x2 * y0).max(0.0);
    // only up-down can make the walkers meet
    let ud = if a2 - a1 > 2 { det(p[0], p[1], q[2], q[3]) } else { 0.0 };
    [det(p[0], p[1], q[0], q[1]), ud, det(p[2], p[3], q[0], q[1]), det(p[2], p[3], q[2], q[3])]
}

/// Candidate moves from `state` with `r` steps left, with weights
/// proportional to the number of completions through each. Inadmissible or
/// dead-end moves get weight 0.
///
/// For one walker only `state[0]` is used and `state[1]` of each move is 0.
pub fn step_weights(n_walkers: u8, r: usize, state: [i64; 2]) -> [([i64; 2], f64); 4] {
    let mut out = [([0i64; 2], 0.0); 4];
    let r = r as i64;
    if r == 0 {
        return out;
    }
    if r == 1 {
        // the last step must land on the end state
        out[0] = (end_state(n_walkers), 1.0);
        return out;
    }
    let [a1, a2] = state;
    if n_walkers == 1 {
        let w = walker_rows(r, a1);
        out[0] = ([a1 + 1, 0], w[0]);
        out[1] = ([a1 - 1, 0], w[2]);
        return out;
    }
    let w = pair_weights(r, a1, a2);
    let moves = [[a1 + 1, a2 + 1], [a1 + 1, a2 - 1], [a1 - 1, a2 + 1], [a1 - 1, a2 - 1]];
    for i in 0..4 {
        out[i] = (moves[i], w[i]);
    }
    out
}

/// Index of the interval of `[0, Σw)` containing `u·Σw`.
#[inline(always)]
fn choose(w: [f64; 4], u: f64) -> usize {
    let c0 = w[0];
    let c1 = c0 + w[1];
    let c2 = c1 + w[2];
    let x = u * (c2 + w[3]);
    // zero-weight candidates occupy empty intervals and are never hit
    let mut pick = (x >= c0) as usize + (x >= c1) as usize + (x >= c2) as usize;
    while w[pick] <= 0.0 {
        // only reachable when x rounds up to the total
        pick -= 1;
    }
    pick
}

/// Height of one uniformly random configuration with `2n` steps.
pub fn sample_one<R: Rng + ?Sized>(n_walkers: u8, n: usize, rng: &mut R) -> usize {
    let mut height = 0;
    walk(n_walkers, n, rng, |s| height = height.max(s[(n_walkers - 1) as usize] as usize));
    height
}

/// One uniformly random configuration as its sequence of `2n + 1` states.
pub fn sample_path<R: Rng + ?Sized>(n_walkers: u8, n: usize, rng: &mut R) -> Vec<[i64; 2]> {
    let mut path = Vec::with_capacity(2 * n + 1);
    walk(n_walkers, n, rng, |s| path.push(s));
    path
}

fn walk<R: Rng + ?Sized>(n_walkers: u8, n: usize, rng: &mut R, mut visit: impl FnMut([i64; 2])) {
    let steps = 2 * n as i64;
    let [mut a1, mut a2] = end_state(n_walkers);
    visit([a1, a2]);
    for r in (2..=steps).rev() {
        if n_walkers == 1 {
            let w = walker_rows(r, a1);
            let up = rng.random::<f64>() * (w[0] + w[2]) < w[0];
            a1 += if up { 1 } else { -1 };
        } else {
            let pick = choose(pair_weights(r, a1, a2), rng.random::<f64>());
            a1 += if pick < 2 { 1 } else { -1 };
            a2 += if pick % 2 == 0 { 1 } else { -1 };
        }
        visit([a1, a2]);
    }
    // the last step lands on the end state
    visit(end_state(n_walkers));
}

/// Heights of `L` independent configurations walked in lockstep, one
/// generator per lane. Interleaving hides the latency of each lane's step.
fn heights_lockstep<const L: usize>(n_walkers: u8, n: usize, rngs: &mut [ChaCha8Rng; L]) -> [usize; L] {
    let steps = 2 * n as i64;
    let [s1, s2] = end_state(n_walkers);
    let mut a1 = [s1; L];
    let mut a2 = [s2; L];
    let mut top = [s1.max(s2); L];
    for r in (2..=steps).rev() {
        for l in 0..L {
            let u = rngs[l].random::<f64>();
            if n_walkers == 1 {
                let w = walker_rows(r, a1[l]);
                a1[l] += if u * (w[0] + w[2]) < w[0] { 1 } else { -1 };
                top[l] = top[l].max(a1[l]);
            } else {
                let pick = choose(pair_weights(r, a1[l], a2[l]), u);
                a1[l] += if pick < 2 { 1 } else { -1 };
                a2[l] += if pick % 2 == 0 { 1 } else { -1 };
                top[l] = top[l].max(a2[l]);
            }
        }
    }
    top.map(|h| h as usize)
}

/// Generator for sample `index` of a run: one ChaCha8 stream per sample, so
/// results do not depend on the thread count.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Height histogram of `config.samples` independent uniform configurations.
pub fn sample_heights(config: &WalkEnsembleConfig) -> Result<HeightHistogram> {
    let checked = WalkEnsembleConfig::new(
        config.n_walkers,
        config.half_length,
        Mode::Sample,
        config.samples,
        config.seed,
    )?;
    let (_, hi) = checked.height_range();
    const LANES: u64 = 8;
    let (nw, n, seed, samples) = (checked.n_walkers, checked.half_length, checked.seed, checked.samples);
    let counts = (0..samples.div_ceil(LANES))
        .into_par_iter()
        .fold(
            || vec![0u64; hi + 1],
            |mut acc, block| {
                let first = block * LANES;
                let mut rngs = std::array::from_fn(|l| sample_rng(seed, first + l as u64));
                let heights = heights_lockstep::<{ LANES as usize }>(nw, n, &mut rngs);
                // lanes past the sample count are walked but not recorded
                for (l, h) in heights.into_iter().enumerate() {
                    if first + (l as u64) < samples {
                        acc[h] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; hi + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let counts: BTreeMap<usize, BigUint> = counts
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c > 0)
        .map(|(h, c)| (h, BigUint::from(c)))
        .collect();
    Ok(HeightHistogram {
        n_walkers: checked.n_walkers,
        half_length: checked.half_length,
        mode: Mode::Sample,
        counts,
        total: BigUint::from(checked.samples),
    })
}
