//! Sums over the punctured lattice ℤ²∖{0}: the double Dirichlet series
//! `Z(α, β; γ) = Σ n₁^α n₂^β / (n₁² + n₂²)^γ`, its gamma-weighted diagonal
//! `Z̃_a(b) = Γ(a+2b) Z(2b, 2b; a+2b)`, and the theta-product integrals over
//! `[1, ∞)` that the accelerated forms reduce to.

use crate::quadrature::{integrate, QuadratureOptions};
use crate::special_fn::{gamma_complete, gamma_upper_real, reciprocal_expansion, SeriesValue, TruncationPolicy};
use crate::{Error, Real, Result};

/// Shells beyond this max-norm contribute below `e^{-π·144}` to any
/// incomplete-gamma lattice sum.
pub const LATTICE_CUTOFF: usize = 12;

/// Radius, in the moment variable `s = 2a`, inside which [`z_tilde`] refuses
/// to evaluate near a pole.
pub const POLE_GUARD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleSeriesParams<T> {
    pub alpha: u32,
    pub beta: u32,
    pub gamma: T,
}

impl<T: Real> DoubleSeriesParams<T> {
    pub fn new(alpha: u32, beta: u32, gamma: T) -> Result<Self> {
        for e in [alpha, beta] {
            if e % 2 != 0 || e > 8 {
                return Err(Error::domain(
                    "DoubleSeriesParams",
                    format!("exponents must be even and at most 8, got {e}"),
                ));
            }
        }
        if !gamma.is_finite() {
            return Err(Error::domain("DoubleSeriesParams", "gamma must be finite"));
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// Degree of homogeneity of the summand, `α + β - 2γ`.
    pub fn degree(&self) -> T {
        T::count((self.alpha + self.beta) as usize) - T::lit(2.0) * self.gamma
    }

    /// Whether the defining series converges absolutely (`2γ - α - β > 2`).
    pub fn converges(&self) -> bool {
        self.degree() < T::lit(-2.0)
    }

    pub fn swapped(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SumMethod {
    Direct,
    GammaAccelerated,
}

impl SumMethod {
    pub fn name(self) -> &'static str {
        match self {
            SumMethod::Direct => "direct",
            SumMethod::GammaAccelerated => "gamma_accelerated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSumResult<T> {
    pub value: T,
    pub err_bound: T,
    pub method: SumMethod,
}

#[inline]
fn summand<T: Real>(p: &DoubleSeriesParams<T>, x: usize, y: usize) -> T {
    let (fx, fy) = (T::count(x), T::count(y));
    let m = fx * fx + fy * fy;
    fx.powi(p.alpha as i32) * fy.powi(p.beta as i32) * m.powf(-p.gamma)
}

/// Contribution of the square shell `max(|n₁|, |n₂|) = r`.
///
/// Points are visited in mirrored pairs `(r, k)` / `(k, r)` so that
/// exchanging α and β permutes only the operands of commutative additions,
/// which keeps `Z(α, β; γ)` and `Z(β, α; γ)` bit-identical.
pub fn shell_sum<T: Real>(p: &DoubleSeriesParams<T>, r: usize) -> T {
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let mut acc = two * (summand(p, r, 0) + summand(p, 0, r));
    for k in 1..r {
        acc = acc + four * (summand(p, r, k) + summand(p, k, r));
    }
    acc + four * summand(p, r, r)
}

/// Continuum approximation of the lattice sum outside the square
/// `[-1, 1]²`, scaled so that the part outside `[-L, L]²` is `L^{d+2}` times
/// the returned constant.
fn tail_constant<T: Real>(p: &DoubleSeriesParams<T>) -> Result<T> {
    let d2 = p.degree() + T::lit(2.0);
    let (a, b) = (p.alpha as i32, p.beta as i32);
    let q = integrate(
        |th: T| {
            let (s, c) = th.sin_cos();
            Ok((c.powi(a) * s.powi(b) + s.powi(a) * c.powi(b)) * c.powf(-d2))
        },
        T::zero(),
        T::FRAC_PI_4(),
        &QuadratureOptions::default(),
    )?;
    Ok(T::lit(4.0) * q.value / (-d2))
}

/// `Z(α, β; γ)` by expanding square shells, with a continuum correction for
/// the region outside the last shell.
///
/// The corrected partial sum has error `O(L^{α+β-2γ})`. Values at doubling
/// shell radii are Richardson-extrapolated in that order, and summation stops
/// once successive extrapolations agree to `abs_tol · max(1, |Z|)` or to the
/// rounding floor of the partial sum, whichever is larger.
/// `policy.max_terms` caps the shell radius; only radii that are powers of two
/// (from 8 up) are checkpoints.
pub fn z_direct<T: Real>(params: &DoubleSeriesParams<T>, policy: &TruncationPolicy<T>) -> Result<LatticeSumResult<T>> {
    if !params.converges() {
        return Err(Error::domain(
            "z_direct",
            format!(
                "Z({}, {}; {}) diverges: need 2γ - α - β > 2",
                params.alpha, params.beta, params.gamma
            ),
        ));
    }
    let d = params.degree();
    let d2 = d + T::lit(2.0);
    let tail_c = tail_constant(params)?;
    // remaining error of the corrected sum scales like L^d; after one
    // Richardson step it scales like L^{d-2}
    let shrink = T::lit(2.0).powf(d);
    let shrink2 = T::lit(2.0).powf(d - T::lit(2.0));
    let half = T::lit(0.5);

    // Neumaier-compensated running sum over shells
    let mut sum = T::zero();
    let mut comp = T::zero();
    let mut abs_sum = T::zero();
    let mut prev_corrected: Option<T> = None;
    let mut prev_extrapolated: Option<T> = None;
    let mut checkpoint = 8;
    let mut last = (T::nan(), T::infinity());
    for r in 1..=policy.max_terms {
        let shell = shell_sum(params, r);
        let t = sum + shell;
        comp = comp
            + if sum.abs() >= shell.abs() {
                (sum - t) + shell
            } else {
                (shell - t) + sum
            };
        sum = t;
        abs_sum = abs_sum + shell.abs();
        if r != checkpoint {
            continue;
        }
        checkpoint *= 2;
        let l = T::count(r) + half;
        let corrected = sum + comp + tail_c * l.powf(d2);
        let Some(pc) = prev_corrected.replace(corrected) else {
            continue;
        };
        let extrapolated = corrected + (corrected - pc) * shrink / (T::one() - shrink);
        let Some(pe) = prev_extrapolated.replace(extrapolated) else {
            continue;
        };
        let rounding = T::lit(8.0) * T::epsilon() * abs_sum;
        let truncation = T::lit(2.0) * (extrapolated - pe).abs() * shrink2 / (T::one() - shrink2);
        let err = truncation + rounding;
        last = (extrapolated, err);
        // a tolerance below the rounding floor is met once truncation is
        // below that floor
        let target = (policy.abs_tol * extrapolated.abs().max(T::one())).max(rounding);
        if truncation <= target {
            return Ok(LatticeSumResult {
                value: extrapolated,
                err_bound: err,
                method: SumMethod::Direct,
            });
        }
    }
    Err(Error::Truncation {
        op: "z_direct",
        partial: last.0.as_f64(),
        tail: last.1.as_f64(),
        terms: policy.max_terms,
    })
}

/// `∫_1^∞ w^k [ϑ^(i)(w) ϑ^(j)(w) - δ_{i0}δ_{j0}] dw` as a lattice sum of
/// upper incomplete gamma functions:
///
/// `Σ_{n≠0} (-πn₁²)^i (-πn₂²)^j (π|n|²)^{-(k+1)} Γ(k+1, π|n|²)`.
///
/// Valid for every real `k`; the incomplete gamma order may be nonpositive.
pub fn theta_product_integral<T: Real>(
    i: usize,
    j: usize,
    k: T,
    policy: &TruncationPolicy<T>,
) -> Result<SeriesValue<T>> {
    if i > 2 || j > 2 {
        return Err(Error::domain("theta_product_integral", "derivative orders must be at most 2"));
    }
    let pi = T::PI();
    let z = k + T::one();
    let sign = if (i + j) % 2 == 0 { T::one() } else { -T::one() };
    let prefactor = sign * pi.powf(T::count(i + j) - z);
    let weight = |x: usize, y: usize| -> T {
        let (fx, fy) = (T::count(x * x), T::count(y * y));
        fx.powi(i as i32) * fy.powi(j as i32)
    };
    let (two, four) = (T::lit(2.0), T::lit(4.0));
    let cap = LATTICE_CUTOFF.min(policy.max_terms);
    let mut acc = T::zero();
    let mut abs_acc = T::zero();
    for r in 1..=cap {
        let mut shell = T::zero();
        for q in 0..=r {
            let m = T::count(r * r + q * q);
            let g = m.powf(-z) * gamma_upper_real(z, pi * m)?;
            let w = if q == 0 {
                two * (weight(r, 0) + weight(0, r))
            } else if q == r {
                four * weight(r, r)
            } else {
                four * (weight(r, q) + weight(q, r))
            };
            shell = shell + w * g;
        }
        let shell = prefactor * shell;
        acc = acc + shell;
        abs_acc = abs_acc + shell.abs();
        let settled = shell.abs() <= policy.abs_tol.min(T::epsilon() * acc.abs());
        if settled || r == LATTICE_CUTOFF {
            return Ok(SeriesValue {
                value: acc,
                err_bound: shell.abs() + T::lit(16.0) * T::epsilon() * abs_acc,
                terms_used: r,
            });
        }
    }
    Err(Error::Truncation {
        op: "theta_product_integral",
        partial: acc.as_f64(),
        tail: f64::NAN,
        terms: cap,
    })
}

fn check_pole<T: Real>(op: &'static str, a: T, b: usize) -> Result<()> {
    let s = T::lit(2.0) * a;
    let guard = T::lit(POLE_GUARD);
    let mut poles = vec![2.0];
    if b == 0 {
        poles.push(0.0);
    }
    for pole in poles {
        if (s - T::lit(pole)).abs() < guard {
            return Err(Error::PoleProximity {
                op,
                s: s.as_f64(),
                pole,
                radius: POLE_GUARD,
            });
        }
    }
    Ok(())
}

/// `Z̃_a(b) = Γ(a+2b) Z(2b, 2b; a+2b)` for `b ∈ {0, 1, 2}`.
///
/// `Direct` sums the lattice series (needs `a > 1`). `GammaAccelerated`
/// writes `Z̃_a(b) = π^a ∫_0^∞ u^{a+2b-1} [(ϑ^(b))² - δ_{b0}] du`, splits at
/// `u = 1`, maps `[0, 1]` onto `[1, ∞)` with the reciprocity law and reduces
/// every piece to [`theta_product_integral`]. The continuation has simple
/// poles at `a = 1` for every `b` and at `a = 0` for `b = 0`.
pub fn z_tilde<T: Real>(a: T, b: usize, method: SumMethod, policy: &TruncationPolicy<T>) -> Result<LatticeSumResult<T>> {
    if b > 2 {
        return Err(Error::domain("z_tilde", format!("b must be 0, 1 or 2, got {b}")));
    }
    if !a.is_finite() {
        return Err(Error::domain("z_tilde", "a must be finite"));
    }
    let gamma = a + T::count(2 * b);
    match method {
        SumMethod::Direct => {
            let params = DoubleSeriesParams::new(2 * b as u32, 2 * b as u32, gamma)?;
            let z = z_direct(&params, policy)?;
            let g = gamma_complete(gamma)?;
            Ok(LatticeSumResult {
                value: g * z.value,
                err_bound: g * z.err_bound,
                method,
            })
        }
        SumMethod::GammaAccelerated => {
            check_pole("z_tilde", a, b)?;
            let upper = theta_product_integral(b, b, gamma - T::one(), policy)?;
            let mut value = upper.value;
            let mut err = upper.err_bound;
            let expansion = reciprocal_expansion(b);
            for tj in &expansion {
                for tk in &expansion {
                    let c = T::lit(tj.coeff * tk.coeff);
                    let power = -gamma - T::one() - T::lit(tj.exponent + tk.exponent);
                    let piece = theta_product_integral(tj.order, tk.order, power, policy)?;
                    value = value + c * piece.value;
                    err = err + c.abs() * piece.err_bound;
                    if tj.order == 0 && tk.order == 0 {
                        // ∫_1^∞ w^power dw, continued analytically
                        value = value - c / (power + T::one());
                    }
                }
            }
            if b == 0 {
                value = value - gamma.recip();
            }
            let scale = T::PI().powf(a);
            Ok(LatticeSumResult {
                value: scale * value,
                err_bound: scale * err + T::lit(16.0) * T::epsilon() * (scale * value).abs(),
                method,
            })
        }
    }
}

/// `I_s(α, β) = Σ_{n≠0} n₁^α n₂^β ∫_0^∞ h^{α+β-1+s} e^{-2h²|n|²} dh`, from
/// its closed form `2^{-(α+β+2+s)/2} Γ((α+β+s)/2) Z(α, β; (α+β+s)/2)`.
pub fn i_kernel<T: Real>(s: T, alpha: u32, beta: u32, policy: &TruncationPolicy<T>) -> Result<SeriesValue<T>> {
    let two = T::lit(2.0);
    let ab = T::count((alpha + beta) as usize);
    let gamma = (ab + s) / two;
    let params = DoubleSeriesParams::new(alpha, beta, gamma)?;
    let z = z_direct(&params, policy)?;
    let scale = two.powf(-(ab + two + s) / two) * gamma_complete(gamma)?;
    Ok(SeriesValue {
        value: scale * z.value,
        err_bound: scale * z.err_bound,
        terms_used: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pol() -> TruncationPolicy<f64> {
        TruncationPolicy::new(1e-13, 4096).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(DoubleSeriesParams::new(1, 0, 3.0).is_err());
        assert!(DoubleSeriesParams::new(10, 0, 9.0).is_err());
        let p = DoubleSeriesParams::new(2, 0, 2.0).unwrap();
        assert!(!p.converges());
        assert!(matches!(z_direct(&p, &pol()), Err(Error::Domain { .. })));
    }

    #[test]
    fn swap_symmetry_is_bitwise() {
        for &(a, b, g) in &[(2u32, 0u32, 3.0), (4, 2, 5.5), (8, 2, 7.25), (6, 4, 6.5)] {
            let p = DoubleSeriesParams::new(a, b, g).unwrap();
            let x = z_direct(&p, &pol()).unwrap();
            let y = z_direct(&p.swapped(), &pol()).unwrap();
            assert_eq!(x.value.to_bits(), y.value.to_bits(), "({a},{b};{g})");
        }
    }

    #[test]
    fn positive_shell_partial_sums_increase() {
        let p = DoubleSeriesParams::new(2, 2, 4.0).unwrap();
        let mut partial = 0.0;
        for r in 1..200 {
            let next = partial + shell_sum(&p, r);
            assert!(next >= partial);
            partial = next;
        }
    }

    #[test]
    fn truncation_when_shell_cap_too_small() {
        let p = DoubleSeriesParams::new(0, 0, 1.6).unwrap();
        let tight = TruncationPolicy::new(1e-15, 64).unwrap();
        assert!(matches!(z_direct(&p, &tight), Err(Error::Truncation { .. })));
    }

    #[test]
    fn pole_guard() {
        let p = TruncationPolicy::default();
        assert!(matches!(
            z_tilde(1.0002, 1, SumMethod::GammaAccelerated, &p),
            Err(Error::PoleProximity { pole, .. }) if pole == 2.0
        ));
        assert!(matches!(
            z_tilde(0.0001, 0, SumMethod::GammaAccelerated, &p),
            Err(Error::PoleProximity { pole, .. }) if pole == 0.0
        ));
        assert!(z_tilde(0.0001, 1, SumMethod::GammaAccelerated, &p).is_ok());
    }

    #[test]
    fn z_tilde_b0_is_gamma_times_z() {
        let p = pol();
        let zt = z_tilde(4.0, 0, SumMethod::Direct, &p).unwrap().value;
        let z = z_direct(&DoubleSeriesParams::new(0, 0, 4.0).unwrap(), &p).unwrap().value;
        assert!((zt - 6.0 * z).abs() < 1e-13 * zt);
    }

    #[test]
    fn i_kernel_symmetry_and_closed_form() {
        let p = pol();
        let a = i_kernel(4.0, 2, 0, &p).unwrap().value;
        let b = i_kernel(4.0, 0, 2, &p).unwrap().value;
        assert_eq!(a, b);
        let z = z_direct(&DoubleSeriesParams::new(2, 0, 3.0).unwrap(), &p).unwrap().value;
        assert!((a - 2.0 * z / 16.0).abs() < 1e-14 * a);
    }
}
