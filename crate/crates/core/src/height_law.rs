//! Distribution of the maximum height: CDF and density of `H₁` and `H₂`,
//! the reflection kernels `p`, `p₁`, `p₂ʰ`, and the Karlin–McGregor ratio
//! whose small-coordinate limit is the CDF of `H₂`.

use crate::special_fn::TruncationPolicy;
use crate::{Error, Real, Result};

/// CDF and density of `H_N` at one height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightLawPoint<T> {
    pub h: T,
    pub cdf: T,
    pub density: T,
    pub err_bound: T,
    pub terms_used: usize,
}

/// Arguments of a transition kernel: duration `t`, start `x`, end `y`, and the
/// strip width `h` (ignored by the free and wall kernels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuery<T> {
    pub t: T,
    pub x: T,
    pub y: T,
    pub h: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// Heat kernel `p(t, y|x)`.
    Free,
    /// Absorbed at 0: `p₁(t, y|x) = p(t, y|x) - p(t, y|-x)`.
    AbsorbedWall,
    /// Absorbed at 0 and at `h`: `p₂ʰ` by repeated reflection.
    AbsorbedStrip,
}

/// `num/den · h^h_pow · n₁^n1_pow · n₂^n2_pow`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monomial {
    pub num: i64,
    pub den: i64,
    pub h_pow: u32,
    pub n1_pow: u32,
    pub n2_pow: u32,
}

const fn mono(num: i64, den: i64, h_pow: u32, n1_pow: u32, n2_pow: u32) -> Monomial {
    Monomial {
        num,
        den,
        h_pow,
        n1_pow,
        n2_pow,
    }
}

/// `A_h(n₁, n₂)`: `P(H₂ < h) = Σ_{n∈ℤ²} e^{-2h²|n|²} A_h(n)`.
pub const A_H_TERMS: [Monomial; 8] = [
    mono(1, 1, 0, 0, 0),
    mono(-16, 1, 2, 2, 0),
    mono(24, 1, 4, 4, 0),
    mono(24, 1, 4, 2, 2),
    mono(-32, 3, 6, 6, 0),
    mono(-32, 1, 6, 4, 2),
    mono(128, 3, 8, 6, 2),
    mono(-128, 3, 8, 4, 4),
];

/// `B_h(n₁, n₂)`: `q₂(h) = Σ_{n≠0} e^{-2h²|n|²} B_h(n)`, with the overall
/// `8h/3` multiplied in.
pub const B_H_TERMS: [Monomial; 10] = [
    mono(-40, 1, 1, 2, 0),
    mono(160, 1, 3, 4, 0),
    mono(160, 1, 3, 2, 2),
    mono(-160, 1, 5, 6, 0),
    mono(-480, 1, 5, 4, 2),
    mono(128, 3, 7, 8, 0),
    mono(512, 1, 7, 6, 2),
    mono(-640, 3, 7, 4, 4),
    mono(-512, 3, 9, 8, 2),
    mono(512, 3, 9, 6, 4),
];

/// Horner evaluation in `h²` of a monomial table whose `h` powers share one
/// parity.
fn eval_terms<T: Real>(terms: &[Monomial], h: T, n1: T, n2: T) -> T {
    let odd = terms[0].h_pow % 2;
    let mut coeff = [T::zero(); 5];
    for m in terms {
        let c = T::lit(m.num as f64) / T::lit(m.den as f64);
        coeff[(m.h_pow / 2) as usize] =
            coeff[(m.h_pow / 2) as usize] + c * n1.powi(m.n1_pow as i32) * n2.powi(m.n2_pow as i32);
    }
    let h2 = h * h;
    let mut acc = T::zero();
    for c in coeff.iter().rev() {
        acc = acc * h2 + *c;
    }
    if odd == 1 {
        acc * h
    } else {
        acc
    }
}

pub fn a_h<T: Real>(h: T, n1: i64, n2: i64) -> T {
    eval_terms(&A_H_TERMS, h, T::lit(n1 as f64), T::lit(n2 as f64))
}

pub fn b_h<T: Real>(h: T, n1: i64, n2: i64) -> T {
    eval_terms(&B_H_TERMS, h, T::lit(n1 as f64), T::lit(n2 as f64))
}

/// Shell cap for the `e^{-2h²n²}` series. Small `h` decays slowly, so the cap
/// is raised to `6/h` there.
fn shell_cap<T: Real>(h: T, policy: &TruncationPolicy<T>) -> usize {
    let slow = (T::lit(6.0) / h).ceil().to_usize().unwrap_or(usize::MAX);
    policy.max_terms.max(slow).max(64)
}

fn check_height<T: Real>(op: &'static str, h: T) -> Result<()> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::domain(op, format!("h must be positive and finite, got {h}")));
    }
    Ok(())
}

/// Running state of a pair of shell sums (CDF and density) that share one
/// Gaussian factor per shell.
struct PairSum<T> {
    cdf: T,
    density: T,
    abs_sum: T,
    prev: T,
}

impl<T: Real> PairSum<T> {
    fn new(cdf0: T) -> Self {
        Self {
            cdf: cdf0,
            density: T::zero(),
            abs_sum: cdf0.abs(),
            prev: T::infinity(),
        }
    }

    /// Adds one shell; returns the tail estimate once the series has settled.
    fn push(&mut self, c: T, d: T, c_abs: T, d_abs: T, past_peak: bool, tol: T) -> Option<T> {
        self.cdf = self.cdf + c;
        self.density = self.density + d;
        self.abs_sum = self.abs_sum + c_abs + d_abs;
        let size = c.abs().max(d.abs());
        let prev = std::mem::replace(&mut self.prev, size);
        if !past_peak || size >= tol {
            return None;
        }
        let ratio = if prev > T::zero() { size / prev } else { T::zero() };
        let tail = if ratio < T::one() {
            size * ratio / (T::one() - ratio)
        } else {
            size
        };
        Some(tail + T::lit(16.0) * T::epsilon() * self.abs_sum)
    }
}

/// Below this height the laws are summed in the spectral form, whose terms
/// `e^{-π²k²/2h²}` are all positive; the image series above cancels to
/// roundoff there.
const SPECTRAL_BELOW: f64 = 1.2;

/// Spectral sum `C h^{-p} Σ_k w_k e^{-π²K_k/2h²}` with its `h`-derivative.
/// `shell(k)` lists the `(w, K)` pairs of shell `k ≥ 1`.
fn spectral_sum<T: Real>(
    op: &'static str,
    h: T,
    c: T,
    p: i32,
    policy: &TruncationPolicy<T>,
    shell: impl Fn(usize) -> Vec<(T, T)>,
) -> Result<HeightLawPoint<T>> {
    let b = T::PI() * T::PI() / (T::lit(2.0) * h * h);
    let pre = c / h.powi(p);
    let (mut cdf, mut density, mut prev) = (T::zero(), T::zero(), T::infinity());
    for k in 1..=policy.max_terms.max(64) {
        let (mut sc, mut sd, mut past_peak) = (T::zero(), T::zero(), true);
        for (w, big_k) in shell(k) {
            let term = pre * w * (-b * big_k).exp();
            sc = sc + term;
            // d/dh of h^{-p} e^{-bK} is h^{-p} e^{-bK} (2bK - p) / h
            sd = sd + term * (T::lit(2.0) * b * big_k - T::lit(p as f64)) / h;
            past_peak = past_peak && b * big_k > T::lit(p as f64);
        }
        cdf = cdf + sc;
        density = density + sd;
        let size = sc.max(sd.abs());
        let last = std::mem::replace(&mut prev, size);
        if past_peak && (size <= T::epsilon() * cdf || size < T::min_positive_value()) {
            let ratio = if last > T::zero() { size / last } else { T::zero() };
            let tail = size * ratio / (T::one() - ratio.min(T::lit(0.5)));
            return Ok(HeightLawPoint {
                h,
                cdf,
                density,
                err_bound: tail + T::lit(16.0) * T::epsilon() * (cdf + density.abs()),
                terms_used: k,
            });
        }
    }
    Err(Error::Truncation {
        op,
        partial: cdf.as_f64(),
        tail: prev.as_f64(),
        terms: policy.max_terms.max(64),
    })
}

/// `P(H₁ < h) = √(2π) π² h^{-3} Σ_{k≥1} k² e^{-π²k²/2h²}`.
fn law_h1_spectral<T: Real>(h: T, policy: &TruncationPolicy<T>) -> Result<HeightLawPoint<T>> {
    let c = (T::lit(2.0) * T::PI()).sqrt() * T::PI() * T::PI();
    spectral_sum("law_h1", h, c, 3, policy, |k| {
        let k2 = T::count(k * k);
        vec![(k2, k2)]
    })
}

/// `P(H₂ < h) = π⁹/(3h¹⁰) Σ_{k₁<k₂} k₁²k₂²(k₂²-k₁²)² e^{-π²(k₁²+k₂²)/2h²}`,
/// shell `k₂ - 1`.
fn law_h2_spectral<T: Real>(h: T, policy: &TruncationPolicy<T>) -> Result<HeightLawPoint<T>> {
    let c = T::PI().powi(9) / T::lit(3.0);
    spectral_sum("law_h2", h, c, 10, policy, |k| {
        let k2 = k + 1;
        (1..k2)
            .map(|k1| {
                let (a, b) = (T::count(k1 * k1), T::count(k2 * k2));
                (a * b * (b - a) * (b - a), a + b)
            })
            .collect()
    })
}

/// `P(H₁ < h) = Σ_n e^{-2h²n²}(1 - 4h²n²)` and
/// `q₁(h) = 8 Σ_{n≥1} e^{-2h²n²}(4h³n⁴ - 3hn²)`; the spectral form below
/// `h = 1.2`.
pub fn law_h1<T: Real>(h: T, policy: &TruncationPolicy<T>) -> Result<HeightLawPoint<T>> {
    check_height("law_h1", h)?;
    if h < T::lit(SPECTRAL_BELOW) {
        return law_h1_spectral(h, policy);
    }
    law_h1_images(h, policy)
}

fn law_h1_images<T: Real>(h: T, policy: &TruncationPolicy<T>) -> Result<HeightLawPoint<T>> {
    let cap = shell_cap(h, policy);
    let (two, three, four, eight) = (T::lit(2.0), T::lit(3.0), T::lit(4.0), T::lit(8.0));
    let h2 = h * h;
    let mut acc = PairSum::new(T::one());
    for n in 1..=cap {
        let n2 = T::count(n * n);
        let x = h2 * n2;
        let g = (-two * x).exp();
        let c = two * g * (T::one() - four * x);
        let d = eight * g * h * n2 * (four * x - three);
        if let Some(err) = acc.push(c, d, c.abs(), d.abs(), two * x > four, policy.abs_tol) {
            return Ok(HeightLawPoint {
                h,
                cdf: acc.cdf,
                density: acc.density,
                err_bound: err,
                terms_used: n,
            });
        }
    }
    Err(Error::Truncation {
        op: "law_h1",
        partial: acc.cdf.as_f64(),
        tail: acc.prev.as_f64(),
        terms: cap,
    })
}

/// `P(H₂ < h)` and `q₂(h)` from the `A_h` / `B_h` lattice series, summed over
/// square shells; the spectral form below `h = 1.2`.
pub fn law_h2<T: Real>(h: T, policy: &TruncationPolicy<T>) -> Result<HeightLawPoint<T>> {
    check_height("law_h2", h)?;
    if h < T::lit(SPECTRAL_BELOW) {
        return law_h2_spectral(h, policy);
    }
    law_h2_images(h, policy)
}

fn law_h2_images<T: Real>(h: T, policy: &TruncationPolicy<T>) -> Result<HeightLawPoint<T>> {
    let cap = shell_cap(h, policy);
    let two = T::lit(2.0);
    let h2 = h * h;
    let mut acc = PairSum::new(T::one());
    for r in 1..=cap {
        let (mut c, mut d, mut c_abs, mut d_abs) = (T::zero(), T::zero(), T::zero(), T::zero());
        let ri = r as i64;
        for q in 0..=ri {
            let g = (-two * h2 * T::count((ri * ri + q * q) as usize)).exp();
            // (±r, ±q) and (±q, ±r): two images per axis point, four otherwise
            let (mult, pairs): (T, &[(i64, i64)]) = if q == ri {
                (T::lit(4.0), &[(ri, ri)])
            } else if q == 0 {
                (two, &[(ri, 0), (0, ri)])
            } else {
                (T::lit(4.0), &[(ri, q), (q, ri)])
            };
            for &(a, b) in pairs {
                let ca = mult * g * a_h(h, a, b);
                let db = mult * g * b_h(h, a, b);
                c = c + ca;
                d = d + db;
                c_abs = c_abs + ca.abs();
                d_abs = d_abs + db.abs();
            }
        }
        let past_peak = two * h2 * T::count(r * r) > T::lit(10.0);
        if let Some(err) = acc.push(c, d, c_abs, d_abs, past_peak, policy.abs_tol) {
            return Ok(HeightLawPoint {
                h,
                cdf: acc.cdf,
                density: acc.density,
                err_bound: err,
                terms_used: r,
            });
        }
    }
    Err(Error::Truncation {
        op: "law_h2",
        partial: acc.cdf.as_f64(),
        tail: acc.prev.as_f64(),
        terms: cap,
    })
}

pub fn cdf_h1<T: Real>(h: T, policy: &TruncationPolicy<T>) -> Result<HeightLawPoint<T>> {
    law_h1(h, policy)
}

pub fn density_h1<T: Real>(h: T, policy: &TruncationPolicy<T>) -> Result<HeightLawPoint<T>> {
    law_h1(h, policy)
}

pub fn cdf_h2<T: Real>(h: T, policy: &TruncationPolicy<T>) -> Result<HeightLawPoint<T>> {
    law_h2(h, policy)
}

pub fn density_h2<T: Real>(h: T, policy: &TruncationPolicy<T>) -> Result<HeightLawPoint<T>> {
    law_h2(h, policy)
}

/// Law of `H_N` for `N ∈ {1, 2}`.
pub fn law<T: Real>(n_particles: u8, h: T, policy: &TruncationPolicy<T>) -> Result<HeightLawPoint<T>> {
    match n_particles {
        1 => law_h1(h, policy),
        2 => law_h2(h, policy),
        n => Err(Error::domain("law", format!("n_particles must be 1 or 2, got {n}"))),
    }
}

// Kernels are written as `√(2/πt) e^{-(x²+y²)/2t} sinh(xy/t)` and its image
// sums, which stays accurate as x or y approaches the wall.

fn gauss<T: Real>(t: T, d: T) -> T {
    (-(d * d) / (T::lit(2.0) * t)).exp() / (T::lit(2.0) * T::PI() * t).sqrt()
}

fn wall_pair<T: Real>(t: T, x: T, w: T) -> T {
    // p(t, w|x) - p(t, w|-x)
    let two = T::lit(2.0);
    two * (-(x * x + w * w) / (two * t)).exp() * (x * w / t).sinh() / (two * T::PI() * t).sqrt()
}

fn strip_sum<T: Real>(t: T, x: T, y: T, h: T, policy: &TruncationPolicy<T>) -> Result<T> {
    let two_h = T::lit(2.0) * h;
    let mut acc = wall_pair(t, x, y);
    for n in 1..=policy.max_terms {
        let shift = two_h * T::count(n);
        let plus = wall_pair(t, x, y + shift);
        let minus = wall_pair(t, x, y - shift);
        acc = acc + plus + minus;
        let nearest = shift - h;
        if plus.abs().max(minus.abs()) < policy.abs_tol * acc.abs().max(T::min_positive_value()) && nearest > T::zero()
        {
            return Ok(acc);
        }
        if plus == T::zero() && minus == T::zero() {
            return Ok(acc);
        }
    }
    Err(Error::Truncation {
        op: "kernel",
        partial: acc.as_f64(),
        tail: f64::NAN,
        terms: policy.max_terms,
    })
}

/// Transition density `p`, `p₁` or `p₂ʰ`.
pub fn kernel<T: Real>(q: &KernelQuery<T>, which: KernelKind, policy: &TruncationPolicy<T>) -> Result<T> {
    if !(q.t > T::zero()) {
        return Err(Error::domain("kernel", "t must be positive"));
    }
    match which {
        KernelKind::Free => Ok(gauss(q.t, q.y - q.x)),
        KernelKind::AbsorbedWall => {
            if q.x < T::zero() || q.y < T::zero() {
                return Err(Error::domain("kernel", "absorbed_wall needs x, y >= 0"));
            }
            Ok(wall_pair(q.t, q.x, q.y))
        }
        KernelKind::AbsorbedStrip => {
            let inside = |v: T| v > T::zero() && v < q.h;
            if !inside(q.x) || !inside(q.y) {
                return Err(Error::domain("kernel", "absorbed_strip needs 0 < x, y < h"));
            }
            strip_sum(q.t, q.x, q.y, q.h, policy)
        }
    }
}

/// Largest odd power kept in the small-coordinate expansion of the kernels.
const TAYLOR_DEGREE: usize = 21;
/// Above this coordinate the determinants are formed from kernel values
/// directly; below it they are formed from the Taylor expansion, which avoids
/// the `O(x⁴)` cancellation of the direct form.
const TAYLOR_LIMIT: f64 = 0.05;

/// Coefficients `C[m][l]` of `x^{2m+1} y^{2l+1}` in
/// `e^{x²/2t} p(t, y|x)`-type kernels, for the wall (`h = None`) or the strip.
fn kernel_taylor<T: Real>(t: T, h: Option<T>, policy: &TruncationPolicy<T>) -> Result<Vec<Vec<T>>> {
    let k = TAYLOR_DEGREE / 2 + 1;
    let deg = TAYLOR_DEGREE + 1;
    let mut c = vec![vec![T::zero(); k]; k];
    // x-part: sinh(xw/t) = Σ_m (w/t)^{2m+1} x^{2m+1}/(2m+1)!
    // y-part for image centre a: (y - a)^j e^{-(y-a)²/2t} expanded in y.
    let mut add_image = |a: T, sign: T| -> T {
        // e^{-(y-a)²/2t} = e^{-a²/2t} e^{ay/t} e^{-y²/2t}
        let mut g = vec![T::zero(); deg + 1];
        let base = (-(a * a) / (T::lit(2.0) * t)).exp();
        let mut ea = vec![T::zero(); deg + 1];
        let mut ey = vec![T::zero(); deg + 1];
        ea[0] = T::one();
        for i in 1..=deg {
            ea[i] = ea[i - 1] * a / (t * T::count(i));
        }
        ey[0] = T::one();
        for i in 1..=deg / 2 {
            ey[2 * i] = -ey[2 * i - 2] / (T::lit(2.0) * t * T::count(i));
        }
        for i in 0..=deg {
            for j in 0..=deg - i {
                g[i + j] = g[i + j] + ea[i] * ey[j];
            }
        }
        for v in g.iter_mut() {
            *v = *v * base;
        }
        // multiply by (y - a)^(2m+1), one factor at a time
        let mut poly = g;
        let mut fact = T::one();
        let mut magnitude = T::zero();
        for m in 0..k {
            let p = 2 * m + 1;
            for _ in 0..(if m == 0 { 1 } else { 2 }) {
                let mut next = vec![T::zero(); deg + 1];
                for i in 0..=deg {
                    next[i] = next[i] - a * poly[i];
                    if i + 1 <= deg {
                        next[i + 1] = next[i + 1] + poly[i];
                    }
                }
                poly = next;
            }
            fact = if m == 0 { T::one() } else { fact * T::count(p - 1) * T::count(p) };
            let scale = sign / (fact * t.powi(p as i32));
            for l in 0..k {
                let v = scale * poly[2 * l + 1];
                c[m][l] = c[m][l] + v;
                magnitude = magnitude.max(v.abs());
            }
        }
        magnitude
    };
    match h {
        None => {
            add_image(T::zero(), T::one());
        }
        Some(h) => {
            add_image(T::zero(), T::one());
            let mut done = false;
            for n in 1..=policy.max_terms {
                let a = T::lit(2.0) * h * T::count(n);
                let m1 = add_image(a, T::one());
                let m2 = add_image(-a, T::one());
                if m1.max(m2) < policy.abs_tol * T::lit(1e-3) {
                    done = true;
                    break;
                }
            }
            if !done {
                return Err(Error::Truncation {
                    op: "km_ratio",
                    partial: f64::NAN,
                    tail: f64::NAN,
                    terms: policy.max_terms,
                });
            }
        }
    }
    let norm = (T::lit(2.0) / (T::PI() * t)).sqrt();
    for row in c.iter_mut() {
        for v in row.iter_mut() {
            *v = *v * norm;
        }
    }
    Ok(c)
}

/// `x₁^i x₂^j - x₁^j x₂^i` for `i < j`, without cancellation when
/// `0 < x₁ < x₂`.
fn minor_pow<T: Real>(x1: T, x2: T, i: usize, j: usize) -> T {
    let d = j - i;
    let mut geo = T::zero();
    for k in 0..d {
        geo = geo + x2.powi((d - 1 - k) as i32) * x1.powi(k as i32);
    }
    (x1 * x2).powi(i as i32) * (x2 - x1) * geo
}

/// `det[K(x_j, y_k)]` for a kernel with odd-odd Taylor coefficients `c`, by
/// Cauchy–Binet over pairs of monomials.
fn taylor_det<T: Real>(c: &[Vec<T>], x: [T; 2], y: [T; 2]) -> T {
    let k = c.len();
    let mut acc = T::zero();
    for m in 0..k {
        for mp in m + 1..k {
            let xm = minor_pow(x[0], x[1], 2 * m + 1, 2 * mp + 1);
            for l in 0..k {
                for lp in l + 1..k {
                    let yl = minor_pow(y[0], y[1], 2 * l + 1, 2 * lp + 1);
                    let cm = c[m][l] * c[mp][lp] - c[m][lp] * c[mp][l];
                    acc = acc + xm * yl * cm;
                }
            }
        }
    }
    acc
}

/// Karlin–McGregor ratio `det[p₂ʰ(t, y_j|x_k)] / det[p₁(t, y_j|x_k)]` at
/// `x = y = (eps, 2·eps)`.
pub fn km_ratio<T: Real>(h: T, eps: T, t: T, policy: &TruncationPolicy<T>) -> Result<T> {
    if !(eps > T::zero()) || !(T::lit(2.0) * eps < h) || !(t > T::zero()) {
        return Err(Error::domain("km_ratio", "need 0 < eps, 2 eps < h and t > 0"));
    }
    let pts = [eps, T::lit(2.0) * eps];
    let (num, den) = if T::lit(2.0) * eps <= T::lit(TAYLOR_LIMIT) {
        let wall = kernel_taylor(t, None, policy)?;
        let strip = kernel_taylor(t, Some(h), policy)?;
        (taylor_det(&strip, pts, pts), taylor_det(&wall, pts, pts))
    } else {
        let det = |kind: KernelKind| -> Result<T> {
            let mut m = [[T::zero(); 2]; 2];
            for (j, &y) in pts.iter().enumerate() {
                for (k, &x) in pts.iter().enumerate() {
                    m[j][k] = kernel(&KernelQuery { t, x, y, h }, kind, policy)?;
                }
            }
            Ok(m[0][0] * m[1][1] - m[0][1] * m[1][0])
        };
        (det(KernelKind::AbsorbedStrip)?, det(KernelKind::AbsorbedWall)?)
    };
    if den.abs() < T::lit(1e-300) || den == T::zero() {
        return Err(Error::Degenerate {
            op: "km_ratio",
            det: den.as_f64(),
        });
    }
    Ok(num / den)
}

/// Step sizes of the extrapolated Karlin–McGregor limit.
pub const KM_EPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// `lim_{eps→0} km_ratio(h, eps, 1)` by Richardson extrapolation in `eps²`
/// over [`KM_EPS`]. `err_bound` is the change made by the last
/// extrapolation level.
pub fn km_limit<T: Real>(h: T, policy: &TruncationPolicy<T>) -> Result<crate::SeriesValue<T>> {
    let mut table = Vec::with_capacity(KM_EPS.len());
    for &e in &KM_EPS {
        table.push(km_ratio(h, T::lit(e), T::one(), policy)?);
    }
    // Neville with step ratio 2 in eps, error even in eps
    let mut prev_best = table[0];
    for level in 1..table.len() {
        let factor = T::lit(4f64.powi(level as i32));
        for i in (level..table.len()).rev() {
            table[i] = (factor * table[i] - table[i - 1]) / (factor - T::one());
        }
        if level == table.len() - 1 {
            prev_best = table[level - 1];
        }
    }
    let best = table[table.len() - 1];
    Ok(crate::SeriesValue {
        value: best,
        err_bound: (best - prev_best).abs(),
        terms_used: KM_EPS.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_at_origin() {
        assert_eq!(a_h(0.7f64, 0, 0), 1.0);
        assert_eq!(b_h(0.7f64, 0, 0), 0.0);
        // A_h(1, 0) at h = 1: 1 - 16 + 24 - 32/3
        assert!((a_h(1.0f64, 1, 0) - (9.0 - 32.0 / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn cdf_tends_to_one() {
        let p = TruncationPolicy::default();
        let a = law_h1(8.0f64, &p).unwrap();
        let b = law_h2(8.0f64, &p).unwrap();
        assert!((a.cdf - 1.0).abs() < 1e-15 && a.density.abs() < 1e-40);
        assert!((b.cdf - 1.0).abs() < 1e-15);
    }

    #[test]
    fn small_h_image_series_uses_raised_cap() {
        let p = TruncationPolicy::new(1e-15, 8).unwrap();
        let pt = law_h2_images(0.2f64, &p).unwrap();
        assert!(pt.terms_used > 8);
        assert!(pt.cdf.abs() < 1e-9);
    }

    #[test]
    fn spectral_and_image_forms_agree() {
        let p = TruncationPolicy::default();
        for h in [0.8f64, 1.0, 1.2, 1.5, 2.0] {
            let (a, b) = (law_h1_spectral(h, &p).unwrap(), law_h1_images(h, &p).unwrap());
            assert!((a.cdf - b.cdf).abs() < 1e-13 && (a.density - b.density).abs() < 1e-12, "h1 {h}");
            let (a, b) = (law_h2_spectral(h, &p).unwrap(), law_h2_images(h, &p).unwrap());
            assert!((a.cdf - b.cdf).abs() < 1e-13 && (a.density - b.density).abs() < 1e-12, "h2 {h}");
        }
    }

    #[test]
    fn small_h_is_free_of_cancellation() {
        let p = TruncationPolicy::default();
        // leading spectral terms: e^{-π²/2h²} and e^{-5π²/2h²}
        let h = 0.3f64;
        let b = std::f64::consts::PI.powi(2) / (2.0 * h * h);
        let lead1 = (2.0 * std::f64::consts::PI).sqrt() * std::f64::consts::PI.powi(2) / h.powi(3) * (-b).exp();
        let lead2 = std::f64::consts::PI.powi(9) / 3.0 / h.powi(10) * 36.0 * (-5.0 * b).exp();
        let (a, c) = (law_h1(h, &p).unwrap().cdf, law_h2(h, &p).unwrap().cdf);
        assert!(((a - lead1) / lead1).abs() < 1e-12);
        assert!(((c - lead2) / lead2).abs() < 1e-12);
        assert!(c < a);
    }

    #[test]
    fn rejects_nonpositive_h() {
        let p = TruncationPolicy::default();
        assert!(law_h1(0.0, &p).is_err());
        assert!(law_h2(-1.0, &p).is_err());
        assert!(law(3, 1.0, &p).is_err());
    }

    #[test]
    fn wall_kernel_vanishes_on_wall() {
        let p = TruncationPolicy::default();
        let q = KernelQuery {
            t: 1.0,
            x: 0.7,
            y: 0.0,
            h: 2.0,
        };
        assert_eq!(kernel(&q, KernelKind::AbsorbedWall, &p).unwrap(), 0.0);
    }

    #[test]
    fn minor_pow_matches_naive() {
        let (a, b) = (0.3f64, 0.5f64);
        let naive = a * b.powi(4) - a.powi(4) * b;
        assert!((minor_pow(a, b, 1, 4) - naive).abs() < 1e-16);
    }
}
