//! Scalar special functions: the Jacobi theta function and its first two
//! derivatives, complete and upper incomplete gamma, and Riemann's ξ.

mod gamma;
mod theta;
mod xi;

pub use gamma::{gamma_complete, gamma_upper, gamma_upper_real, ln_gamma};
pub use theta::{reciprocal_expansion, theta, theta_direct, ReciprocalTerm};
pub use xi::xi_riemann;

use crate::{Error, Real, Result};

/// Cutoff contract for every infinite series in the crate.
///
/// `abs_tol` bounds the magnitude of the first discarded term (or shell);
/// `max_terms` caps the summation index, and exceeding it is a
/// [`Error::Truncation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy<T> {
    pub abs_tol: T,
    pub max_terms: usize,
}

impl<T: Real> TruncationPolicy<T> {
    pub fn new(abs_tol: T, max_terms: usize) -> Result<Self> {
        if !(abs_tol > T::zero()) || !abs_tol.is_finite() {
            return Err(Error::domain(
                "TruncationPolicy",
                format!("abs_tol must be positive and finite, got {abs_tol}"),
            ));
        }
        if max_terms == 0 {
            return Err(Error::domain("TruncationPolicy", "max_terms must be at least 1"));
        }
        Ok(Self { abs_tol, max_terms })
    }

    /// Same tolerance with a larger term cap; never lowers the existing cap.
    pub fn with_min_terms(self, terms: usize) -> Self {
        Self {
            max_terms: self.max_terms.max(terms),
            ..self
        }
    }
}

impl<T: Real> Default for TruncationPolicy<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-15),
            max_terms: 64,
        }
    }
}

/// A truncated series value with an a-posteriori bound on what was dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue<T> {
    pub value: T,
    pub err_bound: T,
    pub terms_used: usize,
}

impl<T: Real> SeriesValue<T> {
    pub fn exact(value: T) -> Self {
        Self {
            value,
            err_bound: T::zero(),
            terms_used: 0,
        }
    }
}
