use watermelon_core::moments::{moment_h1, moment_h2_theta};
use watermelon_core::TruncationPolicy64;

use crate::{enumerate_heights, sample_heights, Mode, Result, WalkEnsembleConfig};

/// Scaled moment `⟨(h/√(2n))^s⟩` next to its continuum limit `E[H_N^s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub n_walkers: u8,
    pub n: usize,
    pub s: f64,
    pub scaled_moment: f64,
    /// Zero in exact mode.
    pub std_error: f64,
    pub continuum_target: f64,
    /// `|scaled_moment - continuum_target|`.
    pub deviation: f64,
}

/// One report per `(n, s)` pair. Walker count, mode, sample count and seed
/// come from `base`; its half-length is replaced by each entry of `ns`.
pub fn scaling_report(ns: &[usize], ss: &[f64], base: &WalkEnsembleConfig) -> Result<Vec<ScalingReport>> {
    let policy = TruncationPolicy64::default();
    let targets = ss
        .iter()
        .map(|&s| match base.n_walkers {
            1 => moment_h1(s, &policy).map(|v| v.value),
            _ => moment_h2_theta(s, &policy).map(|v| v.value),
        })
        .collect::<std::result::Result<Vec<f64>, _>>()?;
    let mut out = Vec::with_capacity(ns.len() * ss.len());
    for &n in ns {
        let cfg = WalkEnsembleConfig::new(base.n_walkers, n, base.mode, base.samples, base.seed)?;
        let hist = match cfg.mode {
            Mode::Exact => enumerate_heights(&cfg)?,
            Mode::Sample => sample_heights(&cfg)?,
        };
        for (&s, &target) in ss.iter().zip(&targets) {
            let m = hist.scaled_moment(s);
            out.push(ScalingReport {
                n_walkers: cfg.n_walkers,
                n,
                s,
                scaled_moment: m,
                std_error: hist.scaled_std_error(s),
                continuum_target: target,
                deviation: (m - target).abs(),
            });
        }
    }
    Ok(out)
}
