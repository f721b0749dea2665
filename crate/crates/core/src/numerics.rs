//! Scalar plumbing: multiprecision complex numbers, upward-rounded error
//! radii, principal square roots and the angular-span test behind "good
//! position".
//!
//! Scalars are plain [`rug::Complex`] values. Every routine takes its working
//! precision from its arguments or an explicit parameter; nothing here reads
//! global state.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use rug::float::{Constant, Round};
use rug::ops::{AddAssignRound, DivAssignRound, MulAssignRound};
use rug::{Complex, Float};

use crate::error::{Error, Result};

/// Multiprecision complex scalar.
pub type BigComplex = Complex;

/// Mantissa size used for radii. Radii only need a few correct bits, but
/// they must not underflow the way `f64` does at thousands of bits.
pub const RADIUS_PREC: u32 = 32;

/// Slack added to angular spans before comparing against pi/2. Covers the
/// double-precision `atan2`/`asin` evaluation of the relative arguments.
pub const SPAN_SLACK: f64 = 1e-12;

/// Nonnegative absolute error bound. All operations round up.
#[derive(Clone, PartialEq)]
pub struct ErrRadius(Float);

impl ErrRadius {
    pub fn zero() -> Self {
        ErrRadius(Float::new(RADIUS_PREC))
    }

    /// Radius `x`, rounded up. Panics on negative or NaN input.
    pub fn from_f64(x: f64) -> Self {
        assert!(x >= 0.0, "negative radius {x}");
        ErrRadius(Float::with_val_round(RADIUS_PREC, x, Round::Up).0)
    }

    /// Radius `|x|`, rounded up.
    pub fn from_float(x: &Float) -> Self {
        ErrRadius(Float::with_val_round(RADIUS_PREC, &*x.as_abs(), Round::Up).0)
    }

    /// Upper bound for `|z|`.
    pub fn abs_of(z: &Complex) -> Self {
        ErrRadius(Float::with_val_round(RADIUS_PREC, z.abs_ref(), Round::Up).0)
    }

    /// Exactly `2^e`.
    pub fn exp2(e: i64) -> Self {
        let mut f = Float::with_val(RADIUS_PREC, 1);
        f <<= i32::try_from(e).expect("radius exponent out of range");
        ErrRadius(f)
    }

    /// Upper bound for `2^l`; `l = -inf` gives zero.
    pub fn from_log2(l: f64) -> Self {
        if l == f64::NEG_INFINITY {
            return Self::zero();
        }
        assert!(l.is_finite(), "non-finite log2 radius");
        let fl = l.floor();
        let mant = 2f64.powf(l - fl) * (1.0 + 1e-12);
        let mut f = Float::with_val_round(RADIUS_PREC, mant, Round::Up).0;
        f <<= fl as i32;
        ErrRadius(f)
    }

    pub fn add(&self, other: &ErrRadius) -> ErrRadius {
        let mut f = self.0.clone();
        f.add_assign_round(&other.0, Round::Up);
        ErrRadius(f)
    }

    /// `self * |m|`, rounded up.
    pub fn scale(&self, m: &Float) -> ErrRadius {
        let mut f = self.0.clone();
        let m = Float::with_val_round(RADIUS_PREC, &*m.as_abs(), Round::Up).0;
        f.mul_assign_round(&m, Round::Up);
        ErrRadius(f)
    }

    pub fn mul(&self, other: &ErrRadius) -> ErrRadius {
        self.scale(&other.0)
    }

    pub fn scale_f64(&self, m: f64) -> ErrRadius {
        self.scale(&Float::with_val_round(RADIUS_PREC, m.abs(), Round::Up).0)
    }

    /// `self / d`, rounded up. `d` must be positive.
    pub fn div_float_down(&self, d: &Float) -> ErrRadius {
        let mut f = self.0.clone();
        let d = Float::with_val_round(RADIUS_PREC, &*d.as_abs(), Round::Down).0;
        f.div_assign_round(&d, Round::Up);
        ErrRadius(f)
    }

    /// Multiply by `2^e` (exact).
    pub fn shift(&self, e: i32) -> ErrRadius {
        ErrRadius(self.0.clone() << e)
    }

    /// Square root, rounded up.
    pub fn sqrt(&self) -> ErrRadius {
        let mut f = self.0.clone();
        f.sqrt_round(Round::Up);
        ErrRadius(f)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Upper bound as `f64` (saturates to the smallest subnormal / infinity).
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64_round(Round::Up)
    }

    /// `log2` of the radius, `-inf` for zero. Accurate to about 1e-9.
    pub fn log2(&self) -> f64 {
        match self.0.get_exp() {
            None => f64::NEG_INFINITY,
            Some(e) => {
                let m = (self.0.clone() >> e).to_f64();
                e as f64 + m.log2()
            }
        }
    }

    /// Whether the radius is at most `2^e`.
    pub fn le_exp2(&self, e: i64) -> bool {
        self.0 <= *Self::exp2(e).as_float()
    }

    pub fn max(&self, other: &ErrRadius) -> ErrRadius {
        if self.0 >= other.0 {
            self.clone()
        } else {
            other.clone()
        }
    }
}

impl PartialOrd for ErrRadius {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl fmt::Debug for ErrRadius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ErrRadius(2^{:.2})", self.log2())
    }
}

/// Largest of the real and imaginary precisions of `z`.
pub fn cprec(z: &Complex) -> u32 {
    let (a, b) = z.prec();
    a.max(b)
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn complex_f64(prec: u32, re: f64, im: f64) -> Complex {
    Complex::with_val(prec, (re, im))
}

/// `log2 |z|` without underflow; `-inf` for zero.
pub fn log2_abs(z: &Complex) -> f64 {
    let a = Float::with_val(64, z.abs_ref());
    if a.is_zero() {
        f64::NEG_INFINITY
    } else {
        a.log2().to_f64()
    }
}

/// `|z|` at precision `prec`.
pub fn cabs(z: &Complex, prec: u32) -> Float {
    Float::with_val(prec, z.abs_ref())
}

/// `zeta_8^k = exp(i pi k / 4)`, exact up to rounding of sqrt(2)/2.
pub fn zeta8(k: i64, prec: u32) -> Complex {
    let h = Float::with_val(prec, 2).sqrt() / 2u32;
    let z = Float::new(prec);
    let (re, im) = match k.rem_euclid(8) {
        0 => (Float::with_val(prec, 1), z),
        1 => (h.clone(), h),
        2 => (z, Float::with_val(prec, 1)),
        3 => (-h.clone(), h),
        4 => (Float::with_val(prec, -1), z),
        5 => (-h.clone(), -h),
        6 => (z, Float::with_val(prec, -1)),
        _ => (h.clone(), -h),
    };
    Complex::with_val(prec, (re, im))
}

/// `exp(i pi w)`.
pub fn exp_i_pi(w: &Complex, prec: u32) -> Complex {
    let mut t = Complex::with_val(prec, w * pi(prec));
    t.mul_i_mut(false);
    t.exp()
}

/// Square root with `re > 0`, or `re = 0` and `im >= 0`.
pub fn principal_sqrt(x: &Complex) -> Complex {
    let mut r = x.clone().sqrt();
    if r.real().is_sign_negative() || (r.real().is_zero() && r.imag().is_sign_negative()) {
        r = -r;
    }
    if r.real().is_zero() && r.imag().is_zero() {
        r = Complex::new(r.prec());
    }
    r
}

/// `(re, im)` of `z` scaled by a common power of two so both fit in `f64`.
fn scaled_parts(z: &Complex) -> (f64, f64) {
    let e = match (z.real().get_exp(), z.imag().get_exp()) {
        (None, None) => return (0.0, 0.0),
        (Some(a), None) | (None, Some(a)) => a,
        (Some(a), Some(b)) => a.max(b),
    };
    let re = (z.real().clone() >> e).to_f64();
    let im = (z.imag().clone() >> e).to_f64();
    (re, im)
}

/// Upper bound on the opening angle of a closed sector containing every
/// disk `D(points[i], radii[i])`.
///
/// Arguments are taken relative to the first point, so no wraparound ever
/// needs to be resolved. Returns `f64::INFINITY` when some disk contains 0
/// or when an inflated relative argument leaves `[-pi, pi]`.
pub fn angular_span(points: &[Complex], radii: &[ErrRadius]) -> f64 {
    assert_eq!(points.len(), radii.len(), "points and radii differ in length");
    let Some(first) = points.first() else {
        return 0.0;
    };
    let conj0 = first.clone().conj();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (p, r) in points.iter().zip(radii) {
        let m = Float::with_val_round(64, p.abs_ref(), Round::Down).0;
        if m.is_zero() {
            return f64::INFINITY;
        }
        let mut ratio = Float::with_val_round(64, r.as_float(), Round::Up).0;
        ratio.div_assign_round(&m, Round::Up);
        let ratio = ratio.to_f64_round(Round::Up);
        if !(ratio < 1.0) {
            return f64::INFINITY;
        }
        let infl = if ratio == 0.0 { 0.0 } else { ratio.asin().next_up() };
        let w = Complex::with_val(cprec(p).max(cprec(first)), p * &conj0);
        let (re, im) = scaled_parts(&w);
        let rel = im.atan2(re);
        lo = lo.min(rel - infl);
        hi = hi.max(rel + infl);
        if hi > PI || lo < -PI {
            return f64::INFINITY;
        }
    }
    hi - lo
}

/// True iff the disks fit in an open quarter plane, i.e. the certified
/// angular span is strictly below pi/2.
pub fn good_position(points: &[Complex], radii: &[ErrRadius]) -> bool {
    angular_span(points, radii) + SPAN_SLACK < PI / 2.0
}

/// `q^f0 / (1 - q^(f1 - f0))`, a bound for `sum_k q^f(k)` when `f` is
/// convex, increasing and integer sampled.
pub fn tail_bound(f0: f64, f1: f64, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(format!("tail_bound needs 0 < q < 1, got {q}")));
    }
    if !(f1 > f0) {
        return Err(Error::InvalidArgument(format!("tail_bound needs f1 > f0, got {f0}, {f1}")));
    }
    Ok(up(q.powf(f0) / (1.0 - q.powf(f1 - f0))))
}

/// Nudge a double-precision result upward to absorb its own rounding error.
/// Used by the error-function formulas, which only need upper bounds.
pub fn up(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    (x * (1.0 + 1e-13)).next_up()
}

/// Downward counterpart of [`up`].
pub fn down(x: f64) -> f64 {
    (x * (1.0 - 1e-13)).next_down()
}
