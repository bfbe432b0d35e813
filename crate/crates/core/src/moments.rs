//! Real moments `E[H_N^s]` for `N ∈ {1, 2}`.
//!
//! Three routes for `N = 2`: the gamma-weighted lattice sums `Z̃` (Dirichlet),
//! the pole-free theta-integral form built on `K₀` and `ξ₂`, and quadrature of
//! `h^s q₂(h)`. The theta route is the primary one; the other two validate it.

use std::sync::OnceLock;

use crate::height_law::law;
use crate::lattice_series::{theta_product_integral, z_tilde, SumMethod, POLE_GUARD};
use crate::quadrature::{integrate, integrate_to_infinity, QuadratureOptions};
use crate::special_fn::{theta, theta_direct, xi_riemann, SeriesValue, TruncationPolicy};
use crate::{Error, Real, Result};

/// `s` range accepted by the analytic `N = 2` routes.
pub const S_RANGE: (f64, f64) = (-2.0, 12.0);
/// `s` range accepted by [`xi2`]; symmetric about the fixed point `s = 1`.
pub const XI2_RANGE: (f64, f64) = (-10.0, 12.0);
/// Pole margin of [`i_split_check`].
pub const SPLIT_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MomentMethod {
    Dirichlet,
    ThetaIntegral,
    Quadrature,
}

impl MomentMethod {
    pub fn name(self) -> &'static str {
        match self {
            MomentMethod::Dirichlet => "dirichlet",
            MomentMethod::ThetaIntegral => "theta_integral",
            MomentMethod::Quadrature => "quadrature",
        }
    }
}

impl std::str::FromStr for MomentMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(MomentMethod::Dirichlet),
            "theta_integral" | "theta" => Ok(MomentMethod::ThetaIntegral),
            "quadrature" => Ok(MomentMethod::Quadrature),
            other => Err(Error::domain("MomentMethod", format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentQuery<T> {
    pub n_particles: u8,
    pub s: T,
    pub method: MomentMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentResult<T> {
    pub value: T,
    pub err_bound: T,
    pub method: MomentMethod,
}

impl<T: Real> MomentQuery<T> {
    pub fn new(n_particles: u8, s: T, method: MomentMethod) -> Result<Self> {
        if !(1..=2).contains(&n_particles) {
            return Err(Error::domain(
                "MomentQuery",
                format!("n_particles must be 1 or 2, got {n_particles}"),
            ));
        }
        if !s.is_finite() {
            return Err(Error::domain("MomentQuery", "s must be finite"));
        }
        if method == MomentMethod::Quadrature && s < T::zero() {
            return Err(Error::domain("MomentQuery", "quadrature needs s >= 0"));
        }
        if method == MomentMethod::Dirichlet && n_particles == 2 {
            check_dirichlet_poles(s)?;
        }
        Ok(Self { n_particles, s, method })
    }

    pub fn evaluate(&self, policy: &TruncationPolicy<T>) -> Result<MomentResult<T>> {
        let r = match (self.n_particles, self.method) {
            (1, MomentMethod::Quadrature) => moment_quadrature(1, self.s, policy)?,
            (1, _) => moment_h1(self.s, policy)?,
            (_, MomentMethod::Dirichlet) => moment_h2_dirichlet(self.s, policy)?,
            (_, MomentMethod::ThetaIntegral) => moment_h2_theta(self.s, policy)?,
            (_, MomentMethod::Quadrature) => moment_h2_quadrature(self.s, policy)?,
        };
        Ok(MomentResult {
            method: self.method,
            ..r
        })
    }
}

/// `(ϑ(1), ϑ'(1))`, summed once per process.
pub fn theta_constants() -> (f64, f64) {
    static CONSTANTS: OnceLock<(f64, f64)> = OnceLock::new();
    *CONSTANTS.get_or_init(|| {
        let policy = TruncationPolicy::new(1e-300, 64).expect("valid policy");
        let t0 = theta(1.0, 0, &policy).expect("theta at u = 1");
        let t1 = theta(1.0, 1, &policy).expect("theta' at u = 1");
        (t0.value, t1.value)
    })
}

fn check_range<T: Real>(op: &'static str, s: T, range: (f64, f64)) -> Result<()> {
    if !(s >= T::lit(range.0) && s <= T::lit(range.1)) {
        return Err(Error::domain(
            op,
            format!("s = {s} outside the supported range [{}, {}]", range.0, range.1),
        ));
    }
    Ok(())
}

fn check_dirichlet_poles<T: Real>(s: T) -> Result<()> {
    for pole in [0.0, 2.0] {
        if (s - T::lit(pole)).abs() < T::lit(POLE_GUARD) {
            return Err(Error::PoleProximity {
                op: "moment_h2_dirichlet",
                s: s.as_f64(),
                pole,
                radius: POLE_GUARD,
            });
        }
    }
    Ok(())
}

/// `E[H₁ˢ] = 2(π/2)^{s/2} ξ(s)`.
pub fn moment_h1<T: Real>(s: T, policy: &TruncationPolicy<T>) -> Result<MomentResult<T>> {
    let xi = xi_riemann(s, policy)?;
    let scale = T::lit(2.0) * (T::FRAC_PI_2()).powf(s / T::lit(2.0));
    Ok(MomentResult {
        value: scale * xi.value,
        err_bound: scale * xi.err_bound,
        method: MomentMethod::ThetaIntegral,
    })
}

/// `E[H₂ˢ]` from the three gamma-weighted lattice sums `Z̃_{s/2}(b)`, each
/// continued analytically through its theta-integral form.
pub fn moment_h2_dirichlet<T: Real>(s: T, policy: &TruncationPolicy<T>) -> Result<MomentResult<T>> {
    moment_h2_dirichlet_with(s, SumMethod::GammaAccelerated, policy)
}

/// As [`moment_h2_dirichlet`], with the `Z̃` evaluation method chosen
/// explicitly. `Direct` needs `s > 2`.
pub fn moment_h2_dirichlet_with<T: Real>(
    s: T,
    method: SumMethod,
    policy: &TruncationPolicy<T>,
) -> Result<MomentResult<T>> {
    check_range("moment_h2_dirichlet", s, S_RANGE)?;
    check_dirichlet_poles(s)?;
    let a = s / T::lit(2.0);
    let z0 = z_tilde(a, 0, method, policy)?;
    let z1 = z_tilde(a, 1, method, policy)?;
    let z2 = z_tilde(a, 2, method, policy)?;
    let (one, four) = (T::one(), T::lit(4.0));
    let c0 = (s - one) * (s * s - T::lit(2.0) * s + T::lit(12.0));
    let c1 = -four * (s + four) * (s + T::lit(6.0));
    let c2 = T::lit(64.0);
    let pre = T::lit(2.0).powf(-a) / T::lit(24.0) * s;
    let value = pre * (c0 * z0.value + c1 * z1.value + c2 * z2.value);
    let err = pre.abs() * (c0.abs() * z0.err_bound + c1.abs() * z1.err_bound + c2 * z2.err_bound);
    Ok(MomentResult {
        value,
        err_bound: err,
        method: MomentMethod::Dirichlet,
    })
}

/// `K_j(s)` for `j ∈ {0, 1, 2}`:
/// `K₀ = ∫₁^∞ u^{s/2-1}(ϑ²-1)`, `K₁ = ∫₁^∞ u^{s/2+1}ϑ'²`,
/// `K₂ = ∫₁^∞ u^{s/2+3}ϑ''²`.
pub fn k_integral<T: Real>(j: usize, s: T, policy: &TruncationPolicy<T>) -> Result<SeriesValue<T>> {
    if j > 2 {
        return Err(Error::domain("k_integral", format!("j must be 0, 1 or 2, got {j}")));
    }
    let k = s / T::lit(2.0) + T::count(2 * j) - T::one();
    theta_product_integral(j, j, k, policy)
}

/// `J_j(s)` for `j ∈ {1, 2, 3}` from their partial-integration closed forms:
/// `J₁ = ∫₁^∞ u^{1-s/2}ϑϑ'`, `J₂ = ∫₁^∞ u^{2-s/2}ϑϑ''`,
/// `J₃ = ∫₁^∞ u^{3-s/2}ϑ'ϑ''`.
pub fn j_integral<T: Real>(j: usize, s: T, policy: &TruncationPolicy<T>) -> Result<SeriesValue<T>> {
    let (t0, t1) = theta_constants();
    let (t0, t1) = (T::lit(t0), T::lit(t1));
    let (half, quarter) = (T::lit(0.5), T::lit(0.25));
    let r = T::lit(2.0) - s;
    let excess = t0 * t0 - T::one();
    match j {
        1 => {
            let k0 = k_integral(0, r, policy)?;
            let c = quarter * (s - T::lit(2.0));
            Ok(SeriesValue {
                value: c * k0.value - half * excess,
                err_bound: c.abs() * k0.err_bound,
                terms_used: k0.terms_used,
            })
        }
        2 => {
            let k0 = k_integral(0, r, policy)?;
            let k1 = k_integral(1, r, policy)?;
            let c = (s - T::lit(2.0)) * (s - T::lit(4.0)) / T::lit(8.0);
            Ok(SeriesValue {
                value: -t0 * t1 - quarter * (s - T::lit(4.0)) * excess + c * k0.value - k1.value,
                err_bound: c.abs() * k0.err_bound + k1.err_bound,
                terms_used: k0.terms_used.max(k1.terms_used),
            })
        }
        3 => {
            let k1 = k_integral(1, r, policy)?;
            let c = quarter * (s - T::lit(6.0));
            Ok(SeriesValue {
                value: -half * t1 * t1 + c * k1.value,
                err_bound: c.abs() * k1.err_bound,
                terms_used: k1.terms_used,
            })
        }
        _ => Err(Error::domain("j_integral", format!("j must be 1, 2 or 3, got {j}"))),
    }
}

/// `ξ₂(s) = -(1/6)[(s+4)(s+6)K₁(s) + (6-s)(8-s)K₁(2-s)]
///          + (8/3)[K₂(s) + K₂(2-s)] + (1/12)s(s-2)ϑ(1)²`,
/// invariant under `s → 2-s`.
pub fn xi2<T: Real>(s: T, policy: &TruncationPolicy<T>) -> Result<SeriesValue<T>> {
    check_range("xi2", s, XI2_RANGE)?;
    let r = T::lit(2.0) - s;
    let (four, six, eight) = (T::lit(4.0), T::lit(6.0), T::lit(8.0));
    let k1s = k_integral(1, s, policy)?;
    let k1r = k_integral(1, r, policy)?;
    let k2s = k_integral(2, s, policy)?;
    let k2r = k_integral(2, r, policy)?;
    let c1s = (s + four) * (s + six) / six;
    let c1r = (r + four) * (r + six) / six;
    let c2 = eight / T::lit(3.0);
    let t0 = T::lit(theta_constants().0);
    let value =
        -(c1s * k1s.value + c1r * k1r.value) + c2 * (k2s.value + k2r.value) + s * (s - T::lit(2.0)) * t0 * t0 / T::lit(12.0);
    let err = c1s.abs() * k1s.err_bound
        + c1r.abs() * k1r.err_bound
        + c2 * (k2s.err_bound + k2r.err_bound)
        + T::lit(16.0) * T::epsilon() * value.abs();
    Ok(SeriesValue {
        value,
        err_bound: err,
        terms_used: k1s.terms_used.max(k2s.terms_used),
    })
}

/// `E[H₂ˢ] = (π/2)^{s/2} [(1/24)(1-s)(s²-2s+12)(2 - sK₀(s))
///                        - 4s(ϑ(1)ϑ'(1) + 2ϑ'(1)²) + sξ₂(s)]`.
///
/// Pole-free: the `s = 0` and `s = 2` singularities of the individual `Z̃`
/// terms have already cancelled in this form.
pub fn moment_h2_theta<T: Real>(s: T, policy: &TruncationPolicy<T>) -> Result<MomentResult<T>> {
    check_range("moment_h2_theta", s, S_RANGE)?;
    let (t0, t1) = theta_constants();
    let (t0, t1) = (T::lit(t0), T::lit(t1));
    let two = T::lit(2.0);
    let k0 = k_integral(0, s, policy)?;
    let x2 = xi2(s, policy)?;
    let poly = (T::one() - s) * (s * s - two * s + T::lit(12.0)) / T::lit(24.0);
    let constants = T::lit(4.0) * s * (t0 * t1 + two * t1 * t1);
    let bracket = poly * (two - s * k0.value) - constants + s * x2.value;
    let scale = T::FRAC_PI_2().powf(s / two);
    let err = scale * ((poly * s).abs() * k0.err_bound + s.abs() * x2.err_bound)
        + T::lit(16.0) * T::epsilon() * (scale * bracket).abs();
    Ok(MomentResult {
        value: scale * bracket,
        err_bound: err,
        method: MomentMethod::ThetaIntegral,
    })
}

/// Lower end of the moment quadrature; `P(H_N < 0.2) < e^{-120}`.
const H_LOW: f64 = 0.2;

/// `E[H_Nˢ] = ∫ h^s q_N(h) dh` by adaptive quadrature, split at `h = 1`.
pub fn moment_quadrature<T: Real>(n_particles: u8, s: T, policy: &TruncationPolicy<T>) -> Result<MomentResult<T>> {
    if !(s >= T::zero()) || !s.is_finite() {
        return Err(Error::domain("moment_quadrature", format!("s must be finite and >= 0, got {s}")));
    }
    let lo = T::lit(H_LOW);
    let target = T::lit(1e-14);
    // h^{s+10} e^{-2h²} dominates h^s q_N(h) for h ≥ 2
    let tail_bound = |h: T| T::lit(1000.0) * h.powf(s + T::lit(10.0)) * (-T::lit(2.0) * h * h).exp();
    let mut hi = T::lit(2.0);
    while tail_bound(hi) > target {
        hi = hi + T::lit(0.25);
    }
    let opts = QuadratureOptions {
        abs_tol: T::lit(1e-11),
        rel_tol: T::lit(1e-13),
        max_intervals: 4000,
    };
    let f = |h: T| -> Result<T> { Ok(h.powf(s) * law(n_particles, h, policy)?.density) };
    let left = integrate(f, lo, T::one(), &opts)?;
    let right = integrate(f, T::one(), hi, &opts)?;
    let below = law(n_particles, lo, policy)?.cdf.abs() * lo.powf(s);
    Ok(MomentResult {
        value: left.value + right.value,
        err_bound: left.abs_err + right.abs_err + below + tail_bound(hi),
        method: MomentMethod::Quadrature,
    })
}

pub fn moment_h2_quadrature<T: Real>(s: T, policy: &TruncationPolicy<T>) -> Result<MomentResult<T>> {
    moment_quadrature(2, s, policy)
}

/// Upper end of the `w = 1/u` quadrature in [`i_split_check`]; the
/// regularised integrands are below `1e-20` beyond it.
const SPLIT_W_MAX: f64 = 20.0;

/// Residual of the reciprocity split of
/// `I₁ = ∫₀^∞ u^{s/2-1}(ϑ²-1)`, `I₂ = ∫₀^∞ u^{s/2+1}ϑ'²`,
/// `I₃ = ∫₀^∞ u^{s/2+3}ϑ''²`.
///
/// The left side is integrated numerically on `(0, 1)` (as `w = 1/u` on
/// `(1, ∞)`) and on `(1, ∞)` with directly summed theta values, after
/// subtracting the `u → 0` singular part whose integral gives the poles. The
/// right side is the pole part plus the `[1, ∞)` integrals of the split,
/// summed as incomplete gamma lattice series.
pub fn i_split_check<T: Real>(j: usize, s: T, policy: &TruncationPolicy<T>) -> Result<T> {
    if !(1..=3).contains(&j) {
        return Err(Error::domain("i_split_check", format!("j must be 1, 2 or 3, got {j}")));
    }
    let poles: &[f64] = if j == 1 { &[0.0, 2.0] } else { &[2.0] };
    for &pole in poles {
        if (s - T::lit(pole)).abs() < T::lit(SPLIT_MARGIN) {
            return Err(Error::PoleProximity {
                op: "i_split_check",
                s: s.as_f64(),
                pole,
                radius: SPLIT_MARGIN,
            });
        }
    }
    let half_s = s / T::lit(2.0);
    let order = j - 1;
    let power = half_s + T::count(2 * order) - T::one();
    // singular part c·u^e near u = 0
    let sing: &[(f64, f64)] = match j {
        1 => &[(1.0, -2.0), (-1.0, -1.0)],
        2 => &[(0.25, -2.0)],
        _ => &[(0.5625, -2.0)],
    };
    let direct = policy.with_min_terms(4096);
    let integrand = move |u: T| -> Result<T> {
        let t = theta_direct(u, order, &direct)?.value;
        let sq = if order == 0 { t * t - T::one() } else { t * t };
        Ok(u.powf(power) * sq)
    };
    let opts = QuadratureOptions::abs(T::lit(1e-13));
    let lower = integrate(
        |w: T| {
            let u = w.recip();
            let mut v = integrand(u)?;
            for &(c, e) in sing {
                v = v - T::lit(c) * u.powf(half_s + T::lit(e));
            }
            Ok(v / (w * w))
        },
        T::one(),
        T::lit(SPLIT_W_MAX),
        &opts,
    )?;
    let upper = integrate_to_infinity(integrand, T::one(), &opts)?;
    let lhs = lower.value + upper.value;

    // [1, ∞) pieces of the split: (coefficient, i, j, exponent)
    let m = -half_s;
    let pieces: Vec<(f64, usize, usize, T)> = match j {
        1 => vec![(1.0, 0, 0, m), (1.0, 0, 0, half_s - T::one())],
        2 => vec![
            (1.0, 1, 1, half_s + T::one()),
            (1.0, 0, 1, m + T::one()),
            (1.0, 1, 1, m + T::lit(2.0)),
            (0.25, 0, 0, m),
        ],
        _ => vec![
            (1.0, 2, 2, half_s + T::lit(3.0)),
            (1.0, 2, 2, m + T::lit(4.0)),
            (6.0, 1, 2, m + T::lit(3.0)),
            (1.5, 0, 2, m + T::lit(2.0)),
            (4.5, 0, 1, m + T::one()),
            (9.0, 1, 1, m + T::lit(2.0)),
            (0.5625, 0, 0, m),
        ],
    };
    let mut rhs = T::zero();
    for (c, a, b, k) in pieces {
        rhs = rhs + T::lit(c) * theta_product_integral(a, b, k, policy)?.value;
    }
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_constants_are_cached_values() {
        let (t0, t1) = theta_constants();
        assert!((t0 - 1.086_434_811_213_308).abs() < 1e-15);
        assert!(t1 < 0.0);
        assert_eq!(theta_constants(), (t0, t1));
    }

    #[test]
    fn query_validation() {
        assert!(MomentQuery::new(3, 1.0, MomentMethod::ThetaIntegral).is_err());
        assert!(MomentQuery::new(2, -1.0, MomentMethod::Quadrature).is_err());
        assert!(matches!(
            MomentQuery::new(2, 2.0005, MomentMethod::Dirichlet),
            Err(Error::PoleProximity { .. })
        ));
        assert!(MomentQuery::new(2, 2.0005, MomentMethod::ThetaIntegral).is_ok());
    }

    #[test]
    fn method_names_round_trip() {
        for m in [MomentMethod::Dirichlet, MomentMethod::ThetaIntegral, MomentMethod::Quadrature] {
            assert_eq!(m.name().parse::<MomentMethod>().unwrap(), m);
        }
    }

    #[test]
    fn split_pole_margin() {
        let p = TruncationPolicy::default();
        assert!(i_split_check(1, 0.01, &p).is_err());
        assert!(i_split_check(2, 0.01, &p).is_ok());
    }
}
