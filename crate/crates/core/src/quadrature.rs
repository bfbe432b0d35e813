//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Used by the oracle routes: moments by direct integration of the height
//! density, the reciprocity split checks, and the closed-form integral tests.

use crate::{Error, Real, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadratureOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-12),
            rel_tol: T::lit(1e-12),
            max_intervals: 4000,
        }
    }
}

impl<T: Real> QuadratureOptions<T> {
    pub fn abs(abs_tol: T) -> Self {
        Self {
            abs_tol,
            rel_tol: T::zero(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub abs_err: T,
    pub intervals: usize,
}

struct Piece<T> {
    a: T,
    b: T,
    value: T,
    err: T,
}

fn kronrod<T: Real, F>(f: &mut F, a: T, b: T) -> Result<Piece<T>>
where
    F: FnMut(T) -> Result<T>,
{
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center)?;
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half_len * T::lit(XGK[j]);
        let pair = f(center - dx)? + f(center + dx)?;
        kron = kron + T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * pair;
        }
    }
    let value = kron * half_len;
    let err = ((kron - gauss) * half_len).abs();
    Ok(Piece { a, b, value, err })
}

/// Integrates `f` over the finite interval `[a, b]`, bisecting the piece
/// with the largest error estimate until the total estimate meets
/// `max(abs_tol, rel_tol·|value|)`.
pub fn integrate<T: Real, F>(mut f: F, a: T, b: T, opts: &QuadratureOptions<T>) -> Result<Quadrature<T>>
where
    F: FnMut(T) -> Result<T>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integrate", "bounds must be finite"));
    }
    if a == b {
        return Ok(Quadrature {
            value: T::zero(),
            abs_err: T::zero(),
            intervals: 0,
        });
    }
    let mut pieces = vec![kronrod(&mut f, a, b)?];
    loop {
        let value = pieces.iter().fold(T::zero(), |acc, p| acc + p.value);
        let err = pieces.iter().fold(T::zero(), |acc, p| acc + p.err);
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if err <= target {
            return Ok(Quadrature {
                value,
                abs_err: err,
                intervals: pieces.len(),
            });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, p)| {
                if p.err > best.1 {
                    (i, p.err)
                } else {
                    best
                }
            });
        let piece = pieces.swap_remove(worst);
        let mid = T::lit(0.5) * (piece.a + piece.b);
        let exhausted = pieces.len() + 2 > opts.max_intervals || mid <= piece.a || mid >= piece.b;
        if exhausted {
            pieces.push(piece);
            return Err(Error::Quadrature {
                a: a.as_f64(),
                b: b.as_f64(),
                err: err.as_f64(),
                intervals: pieces.len(),
            });
        }
        pieces.push(kronrod(&mut f, piece.a, mid)?);
        pieces.push(kronrod(&mut f, mid, piece.b)?);
    }
}

/// Integrates over `[a, ∞)` through `x = a + t/(1-t)`, `t ∈ [0, 1)`.
pub fn integrate_to_infinity<T: Real, F>(mut f: F, a: T, opts: &QuadratureOptions<T>) -> Result<Quadrature<T>>
where
    F: FnMut(T) -> Result<T>,
{
    let one = T::one();
    integrate(
        |t: T| {
            let s = one - t;
            let x = a + t / s;
            let fx = f(x)?;
            // the integrand must decay; guard the t → 1 endpoint
            if fx == T::zero() {
                Ok(T::zero())
            } else {
                Ok(fx / (s * s))
            }
        },
        T::zero(),
        one,
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x: f64| Ok(x.powi(5) - 2.0 * x), 0.0, 2.0, &QuadratureOptions::default()).unwrap();
        assert!((q.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn gaussian_tail() {
        let q = integrate_to_infinity(|x: f64| Ok((-x * x).exp()), 0.0, &QuadratureOptions::default()).unwrap();
        assert!((q.value - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_singularity_refines() {
        let q = integrate(|x: f64| Ok(x.sqrt()), 0.0, 1.0, &QuadratureOptions::default()).unwrap();
        assert!((q.value - 2.0 / 3.0).abs() < 1e-11);
        assert!(q.intervals > 1);
    }

    #[test]
    fn failure_is_reported() {
        let opts = QuadratureOptions {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_intervals: 4,
        };
        let r = integrate(|x: f64| Ok(x.recip()), 1e-12, 1.0, &opts);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn integrand_errors_propagate() {
        let r = integrate(|_x: f64| Err(Error::domain("test", "boom")), 0.0, 1.0, &QuadratureOptions::default());
        assert!(matches!(r, Err(Error::Domain { .. })));
    }
}
