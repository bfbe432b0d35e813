use crate::special_fn::{gamma_upper_real, SeriesValue, TruncationPolicy};
use crate::{Error, Real, Result};

const S_MIN: f64 = -10.0;
const S_MAX: f64 = 20.0;

/// Riemann's ξ for real `s ∈ [-10, 20]`, from the termwise-integrated theta
/// representation
///
/// `ξ(s) = 1/2 + s(s-1)/2 · Σ_{n≥1} [π^{-s/2} n^{-s} Γ(s/2, πn²)
///                                 + π^{(s-1)/2} n^{s-1} Γ((1-s)/2, πn²)]`.
///
/// Both incomplete gamma arguments go through [`gamma_upper_real`], which
/// accepts the nonpositive orders that appear for `s ≤ 0` or `s ≥ 1`.
pub fn xi_riemann<T: Real>(s: T, policy: &TruncationPolicy<T>) -> Result<SeriesValue<T>> {
    if !(s >= T::lit(S_MIN) && s <= T::lit(S_MAX)) {
        return Err(Error::domain(
            "xi_riemann",
            format!("s = {s} outside the supported range [{S_MIN}, {S_MAX}]"),
        ));
    }
    let half = T::lit(0.5);
    let weight = half * s * (s - T::one());
    if weight == T::zero() {
        return Ok(SeriesValue::exact(half));
    }
    let pi = T::PI();
    let a = half * s;
    let b = half * (T::one() - s);
    let pre_a = pi.powf(-a);
    let pre_b = pi.powf(-b);
    let mut sum = T::zero();
    let mut abs_sum = T::zero();
    let mut n = 1;
    loop {
        let fnn = T::count(n);
        let p = pi * fnn * fnn;
        let term = pre_a * fnn.powf(-s) * gamma_upper_real(a, p)?
            + pre_b * fnn.powf(s - T::one()) * gamma_upper_real(b, p)?;
        let contribution = (weight * term).abs();
        sum = sum + term;
        abs_sum = abs_sum + term.abs();
        if contribution < policy.abs_tol {
            // successive terms shrink by at least e^{-3π}
            let tail = contribution * T::lit((-3.0 * std::f64::consts::PI).exp());
            let rounding = T::lit(8.0) * T::epsilon() * (weight.abs() * abs_sum + half);
            return Ok(SeriesValue {
                value: half + weight * sum,
                err_bound: tail + rounding,
                terms_used: n,
            });
        }
        if n >= policy.max_terms {
            return Err(Error::Truncation {
                op: "xi_riemann",
                partial: (half + weight * sum).as_f64(),
                tail: contribution.as_f64(),
                terms: n,
            });
        }
        n += 1;
    }
}
