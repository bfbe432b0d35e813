//! Probability law of the maximum height of one Bessel bridge and of two
//! Bessel bridges conditioned never to collide.
//!
//! The numerical core is generic over the scalar type through [`Real`]; the
//! aliases at the bottom of this file fix it to `f64`, which is what every
//! tolerance in the test suites is calibrated against.

pub mod error;
pub mod height_law;
pub mod lattice_series;
pub mod moments;
pub mod quadrature;
pub mod special_fn;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub use error::{Error, Result};

/// Floating point scalar the numerical modules are written against.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion from a count or lattice coordinate.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub use height_law::{HeightLawPoint, KernelKind, KernelQuery};
pub use lattice_series::{DoubleSeriesParams, LatticeSumResult, SumMethod};
pub use moments::{MomentMethod, MomentQuery, MomentResult};
pub use special_fn::{SeriesValue, TruncationPolicy};

pub type SeriesValue64 = SeriesValue<f64>;
pub type TruncationPolicy64 = TruncationPolicy<f64>;
pub type LatticeSumResult64 = LatticeSumResult<f64>;
pub type MomentResult64 = MomentResult<f64>;
pub type MomentQuery64 = MomentQuery<f64>;
pub type HeightLawPoint64 = HeightLawPoint<f64>;
pub type KernelQuery64 = KernelQuery<f64>;
