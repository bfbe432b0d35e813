//! Dyck paths and 2-watermelons with a wall: exact height histograms by
//! big-integer dynamic programming, exactly uniform sampling, and the
//! diffusion-scaled moments that converge to `E[H_N^s]`.
//!
//! Convention for two walkers: walker 1 starts and ends at 0, walker 2 at 2;
//! both move ±1 at every step, `x₁ ≥ 0` and `x₁ < x₂` throughout. The height
//! of a configuration is the maximum of `x₂`.

mod exact;
mod sample;
mod scaling;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

pub use exact::{capped_counts, enumerate_heights, lgv_total, wall_paths};
pub use sample::{sample_heights, sample_one, sample_path, sample_rng, step_weights, SuffixTable};
pub use scaling::{scaling_report, ScalingReport};

/// Largest half-length accepted in exact mode, by walker count.
pub const N_MAX_EXACT: [usize; 2] = [2000, 120];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WalkError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("exact enumeration of {n_walkers} walker(s) is limited to n <= {max}, got n = {n}")]
    Capacity { n_walkers: u8, n: usize, max: usize },
    #[error(transparent)]
    Core(#[from] watermelon_core::Error),
}

pub type Result<T> = std::result::Result<T, WalkError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    Sample,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Sample => "sample",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkEnsembleConfig {
    pub n_walkers: u8,
    /// Paths have `2 * half_length` steps.
    pub half_length: usize,
    pub mode: Mode,
    pub samples: u64,
    pub seed: u64,
}

impl WalkEnsembleConfig {
    pub fn exact(n_walkers: u8, half_length: usize) -> Result<Self> {
        Self::new(n_walkers, half_length, Mode::Exact, 1, 0)
    }

    pub fn sample(n_walkers: u8, half_length: usize, samples: u64, seed: u64) -> Result<Self> {
        Self::new(n_walkers, half_length, Mode::Sample, samples, seed)
    }

    pub fn new(n_walkers: u8, half_length: usize, mode: Mode, samples: u64, seed: u64) -> Result<Self> {
        if !(1..=2).contains(&n_walkers) {
            return Err(WalkError::Config(format!("n_walkers must be 1 or 2, got {n_walkers}")));
        }
        if half_length == 0 {
            return Err(WalkError::Config("half_length must be at least 1".into()));
        }
        if samples == 0 {
            return Err(WalkError::Config("samples must be at least 1".into()));
        }
        let max = N_MAX_EXACT[n_walkers as usize - 1];
        if mode == Mode::Exact && half_length > max {
            return Err(WalkError::Capacity {
                n_walkers,
                n: half_length,
                max,
            });
        }
        Ok(Self {
            n_walkers,
            half_length,
            mode,
            samples,
            seed,
        })
    }

    /// Lowest and highest attainable height.
    pub fn height_range(&self) -> (usize, usize) {
        let n = self.half_length;
        match self.n_walkers {
            1 => (1, n),
            _ => (3, n + 2),
        }
    }
}

/// Number of configurations (exact mode) or samples by height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeightHistogram {
    pub n_walkers: u8,
    pub half_length: usize,
    pub mode: Mode,
    pub counts: BTreeMap<usize, BigUint>,
    pub total: BigUint,
}

impl HeightHistogram {
    pub fn probability(&self, h: usize) -> f64 {
        self.counts.get(&h).map_or(0.0, |c| big_ratio(c, &self.total))
    }

    /// `⟨h^s⟩` over the histogram.
    pub fn moment(&self, s: f64) -> f64 {
        // normalised by the float sum of the same weights, so s = 0 gives 1
        let (num, den) = self.counts.iter().fold((0.0, 0.0), |(num, den), (&h, c)| {
            let w = big_ratio(c, &self.total);
            (num + w * (h as f64).powf(s), den + w)
        });
        num / den
    }

    /// Exact mean height as a ratio of big integers.
    pub fn mean(&self) -> f64 {
        let weighted: BigUint = self.counts.iter().map(|(&h, c)| c * BigUint::from(h)).sum();
        big_ratio(&weighted, &self.total)
    }

    /// `⟨(h/√(2n))^s⟩`.
    pub fn scaled_moment(&self, s: f64) -> f64 {
        self.moment(s) / (2.0 * self.half_length as f64).powf(s / 2.0)
    }

    /// Standard error of [`Self::scaled_moment`]; zero in exact mode.
    pub fn scaled_std_error(&self, s: f64) -> f64 {
        if self.mode == Mode::Exact {
            return 0.0;
        }
        let m1 = self.scaled_moment(s);
        let m2 = self.scaled_moment(2.0 * s);
        let n = self.total.to_f64().unwrap_or(f64::INFINITY);
        ((m2 - m1 * m1).max(0.0) / n).sqrt()
    }
}

/// `a / b` as `f64` for big integers of any size.
pub fn big_ratio(a: &BigUint, b: &BigUint) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    let e = a.bits() as i64 - b.bits() as i64;
    // bring the quotient to about 64 significant bits
    let shift = 64 - e;
    let q = if shift >= 0 {
        (a << shift as u64) / b
    } else {
        a / (b << (-shift) as u64)
    };
    // split the power of two so neither factor leaves the normal range early
    let half = (-shift / 2) as i32;
    q.to_f64().unwrap_or(f64::NAN) * 2f64.powi(half) * 2f64.powi(-shift as i32 - half)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(WalkEnsembleConfig::exact(3, 4).is_err());
        assert!(WalkEnsembleConfig::exact(1, 0).is_err());
        assert!(matches!(
            WalkEnsembleConfig::exact(2, 121),
            Err(WalkError::Capacity { max: 120, .. })
        ));
        assert!(WalkEnsembleConfig::sample(2, 10_000, 1, 0).is_ok());
        assert!(WalkEnsembleConfig::sample(2, 10, 0, 0).is_err());
    }

    #[test]
    fn ratio_of_huge_integers() {
        let big = BigUint::from(3u32).pow(5000);
        let r = big_ratio(&big, &(&big * BigUint::from(7u32)));
        assert!((r - 1.0 / 7.0).abs() < 1e-16);
        let tiny = big_ratio(&BigUint::from(1u32), &BigUint::from(10u32).pow(300));
        assert!((tiny / 1e-300 - 1.0).abs() < 1e-15);
        assert_eq!(big_ratio(&BigUint::from(5u32), &BigUint::from(10u32)), 0.5);
    }
}
