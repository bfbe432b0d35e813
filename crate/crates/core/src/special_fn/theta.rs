use crate::special_fn::{SeriesValue, TruncationPolicy};
use crate::{Error, Real, Result};

/// One term `coeff * u^exponent * ϑ^(order)(1/u)` of the reciprocity
/// expansion of `ϑ^(b)(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReciprocalTerm {
    pub coeff: f64,
    pub exponent: f64,
    pub order: usize,
}

/// Expansion of the `b`-th derivative of `ϑ(u) = u^{-1/2} ϑ(1/u)` in terms of
/// derivatives of ϑ evaluated at `1/u`.
///
/// Generated by repeated differentiation:
/// `d/du [c u^e ϑ^(j)(1/u)] = c e u^{e-1} ϑ^(j)(1/u) - c u^{e-2} ϑ^(j+1)(1/u)`.
/// Coefficients are small dyadic rationals, exact in `f64`.
pub fn reciprocal_expansion(b: usize) -> Vec<ReciprocalTerm> {
    let mut terms = vec![ReciprocalTerm {
        coeff: 1.0,
        exponent: -0.5,
        order: 0,
    }];
    for _ in 0..b {
        let mut next: Vec<ReciprocalTerm> = Vec::with_capacity(terms.len() + 1);
        let mut push = |t: ReciprocalTerm| {
            match next
                .iter_mut()
                .find(|x| x.order == t.order && x.exponent == t.exponent)
            {
                Some(x) => x.coeff += t.coeff,
                None => next.push(t),
            }
        };
        for t in &terms {
            push(ReciprocalTerm {
                coeff: t.coeff * t.exponent,
                exponent: t.exponent - 1.0,
                order: t.order,
            });
            push(ReciprocalTerm {
                coeff: -t.coeff,
                exponent: t.exponent - 2.0,
                order: t.order + 1,
            });
        }
        next.retain(|t| t.coeff != 0.0);
        next.sort_by_key(|t| t.order);
        terms = next;
    }
    terms
}

/// Jacobi theta `ϑ(u) = Σ_{n∈ℤ} e^{-πn²u}` (order 0) or its first or second
/// derivative in `u`.
///
/// For `u < 1` the reciprocity law `ϑ(u) = u^{-1/2} ϑ(1/u)` is applied first,
/// so the summed series always decays at least like `e^{-πn²}`.
pub fn theta<T: Real>(u: T, order: usize, policy: &TruncationPolicy<T>) -> Result<SeriesValue<T>> {
    check_args(u, order)?;
    if u >= T::one() {
        return theta_direct(u, order, policy);
    }
    let v = u.recip();
    let mut value = T::zero();
    let mut err = T::zero();
    let mut terms_used = 0;
    for term in reciprocal_expansion(order) {
        let inner = theta_direct(v, term.order, policy)?;
        let scale = T::lit(term.coeff) * u.powf(T::lit(term.exponent));
        value = value + scale * inner.value;
        err = err + scale.abs() * inner.err_bound;
        terms_used = terms_used.max(inner.terms_used);
    }
    Ok(SeriesValue {
        value,
        err_bound: err,
        terms_used,
    })
}

/// Direct summation of the theta series (or its derivative) with no
/// reciprocity transform. Slow for small `u`; kept public as an independent
/// route for checking [`theta`].
pub fn theta_direct<T: Real>(
    u: T,
    order: usize,
    policy: &TruncationPolicy<T>,
) -> Result<SeriesValue<T>> {
    check_args(u, order)?;
    let pi = T::PI();
    let two = T::lit(2.0);
    let mut sum = if order == 0 { T::one() } else { T::zero() };
    // (πn²)^k e^{-πn²u} grows until πn²u = k.
    let peak = (T::count(order) / (pi * u)).sqrt();
    let term = |n: usize| {
        let a = pi * T::count(n * n);
        let mut t = (-a * u).exp();
        for _ in 0..order {
            t = -a * t;
        }
        two * t
    };
    let mut n = 1;
    loop {
        let t = term(n);
        if t.abs() < policy.abs_tol && T::count(n) > peak {
            let ratio = (term(n + 1) / t).abs();
            let err = if t == T::zero() {
                T::zero()
            } else if ratio < T::one() {
                t.abs() / (T::one() - ratio)
            } else {
                t.abs() * T::count(policy.max_terms)
            };
            return Ok(SeriesValue {
                value: sum,
                err_bound: err,
                terms_used: n,
            });
        }
        if n >= policy.max_terms {
            return Err(Error::Truncation {
                op: "theta",
                partial: sum.as_f64(),
                tail: t.abs().as_f64(),
                terms: n,
            });
        }
        sum = sum + t;
        n += 1;
    }
}

fn check_args<T: Real>(u: T, order: usize) -> Result<()> {
    if !(u > T::zero()) || !u.is_finite() {
        return Err(Error::domain("theta", format!("u must be positive and finite, got {u}")));
    }
    if order > 2 {
        return Err(Error::domain("theta", format!("derivative order {order} not supported")));
    }
    Ok(())
}
