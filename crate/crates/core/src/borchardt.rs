//! AGM (genus 1) and Borchardt (genus 2) sequences with good sign choices.
//!
//! Roots are chosen so that `re(t_b conj(t_0)) > 0`. For a set in an open
//! quarter plane every pairwise angle is below pi/2, and the two roots of
//! `s_b` differ by a sign, so this picks the good choice whenever one
//! exists. The choice is then checked with [`good_position`].

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::numerics::{cprec, good_position, principal_sqrt, ErrRadius};

#[derive(Clone, Debug)]
pub struct BorchardtState {
    pub s: [Complex; 4],
    /// Roots chosen at the step that produced `s`.
    pub t: Option<[Complex; 4]>,
    pub step: usize,
    pub radii: [ErrRadius; 4],
}

impl BorchardtState {
    pub fn new(s: [Complex; 4]) -> Self {
        let radii = std::array::from_fn(|i| rounding_radius(&s[i]));
        BorchardtState { s, t: None, step: 0, radii }
    }
}

#[derive(Clone, Debug)]
pub struct AgmState {
    pub x: Complex,
    pub y: Complex,
    pub step: usize,
}

/// A few ulps of `z`.
fn rounding_radius(z: &Complex) -> ErrRadius {
    ErrRadius::abs_of(z).shift(3 - cprec(z) as i32)
}

/// Choose roots of `s` with `re(t_b conj(t_0)) > 0` and check that they
/// are in good position. `radii` bound the errors on `s`.
pub fn good_roots_with(s: &[Complex], radii: &[ErrRadius]) -> Result<Vec<Complex>> {
    assert_eq!(s.len(), radii.len());
    if s.iter().any(|v| v.is_zero()) {
        return Err(Error::NotInGoodPosition);
    }
    let t0 = principal_sqrt(&s[0]);
    let conj0 = t0.clone().conj();
    let mut t = Vec::with_capacity(s.len());
    let mut troot_radii: Vec<ErrRadius> = Vec::with_capacity(s.len());
    for (b, (sb, rb)) in s.iter().zip(radii).enumerate() {
        let mut tb = if b == 0 { t0.clone() } else { principal_sqrt(sb) };
        // |sqrt(s + e) - sqrt(s)| <= |e| / |sqrt(s)| for |e| <= |s|.
        let rt = rb.div_float_down(&Float::with_val(64, tb.abs_ref())).add(&rounding_radius(&tb));
        if b > 0 {
            let w = Complex::with_val(cprec(&tb), &tb * &conj0);
            let margin = rt
                .scale(&Float::with_val(64, t0.abs_ref()))
                .add(&troot_radii[0_usize].scale(&Float::with_val(64, tb.abs_ref())));
            if Float::with_val(64, &*w.real().as_abs()) <= *margin.as_float() {
                return Err(Error::AmbiguousRoots { component: b });
            }
            if w.real().is_sign_negative() {
                tb = -tb;
            }
        }
        t.push(tb);
        troot_radii.push(rt);
    }
    if !good_position(&t, &troot_radii) {
        return Err(Error::NotInGoodPosition);
    }
    Ok(t)
}

/// [`good_roots_with`] with rounding-level radii.
pub fn good_roots(s: &[Complex; 4]) -> Result<[Complex; 4]> {
    let radii: Vec<ErrRadius> = s.iter().map(rounding_radius).collect();
    let t = good_roots_with(s, &radii)?;
    Ok(t.try_into().expect("four roots"))
}

/// One Borchardt step:
/// `s'_b = 1/4 sum_{b1 xor b2 = b} t_{b1} t_{b2}`.
pub fn step(state: &BorchardtState) -> Result<BorchardtState> {
    let t: [Complex; 4] = good_roots_with(&state.s, &state.radii)?
        .try_into()
        .expect("four roots");
    let s = convolve(&t);
    // Roots move by at most r_max / |t|_min; each product t_i t_j by twice
    // that times |t|_max, and s'_b averages such products.
    let tmax = t.iter().map(ErrRadius::abs_of).fold(ErrRadius::zero(), |a, r| a.max(&r));
    let tmin = t
        .iter()
        .map(|x| Float::with_val(64, x.abs_ref()))
        .reduce(|a, b| a.min(&b))
        .expect("four roots");
    let rmax = state.radii.iter().fold(ErrRadius::zero(), |a, r| a.max(r));
    let moved = tmax.mul(&rmax.div_float_down(&tmin)).shift(1);
    let radii = std::array::from_fn(|b| moved.add(&rounding_radius(&s[b])));
    Ok(BorchardtState { s, t: Some(t), step: state.step + 1, radii })
}

fn convolve(t: &[Complex; 4]) -> [Complex; 4] {
    let p = cprec(&t[0]);
    std::array::from_fn(|b| {
        let mut acc = Complex::new(p);
        if b == 0 {
            for x in t {
                acc += Complex::with_val(p, x.square_ref());
            }
        } else {
            // Pairs {0, b} and {c, c xor b} with c the smallest index outside {0, b}.
            let c = (1..4).find(|&c| c != b).expect("three nonzero indices");
            acc += Complex::with_val(p, &t[0] * &t[b]);
            acc += Complex::with_val(p, &t[c] * &t[c ^ b]);
            acc <<= 1u32;
        }
        acc >> 2u32
    })
}

/// `log2` of the largest `|s_b - s_0| / |s_0|` (`-inf` if all agree).
fn defect(s: &[Complex]) -> f64 {
    let n0 = Float::with_val(64, s[0].abs_ref());
    s.iter()
        .skip(1)
        .map(|x| {
            let d = Complex::with_val(cprec(x), x - &s[0]);
            let r = Float::with_val(64, d.abs_ref()) / &n0;
            if r.is_zero() {
                f64::NEG_INFINITY
            } else {
                r.log2().to_f64()
            }
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Iteration cap `4 (log2 p + 64)`.
fn cap(p: u32) -> usize {
    4 * ((f64::from(p).log2().ceil() as usize) + 64)
}

/// Working guard bits for a limit at `p` bits.
pub fn guard_bits(p: u32) -> u32 {
    24 + f64::from(p).log2().ceil() as u32
}

/// Common limit of the Borchardt sequence starting at `s0`, computed with
/// [`guard_bits`] extra bits. Returns the value and a radius.
pub fn limit_with_radius(s0: &[Complex; 4], p: u32) -> Result<(Complex, ErrRadius)> {
    let w = p + guard_bits(p);
    let mut state = BorchardtState::new(s0.clone().map(|x| Complex::with_val(w, x)));
    let target = -(f64::from(p)) - 4.0;
    let mut prev: Option<Complex> = None;
    while state.step < cap(p) {
        let d = defect(&state.s);
        let settled = prev.as_ref().is_some_and(|q| defect(&[q.clone(), state.s[0].clone()]) < target);
        if d < target && settled {
            let v = Complex::with_val(p, &state.s[0]);
            let rel = ErrRadius::from_log2(d + 1.0)
                .add(&ErrRadius::from_log2((state.step as f64 + 4.0).log2() - f64::from(w) + 4.0));
            let r = ErrRadius::abs_of(&v).mul(&rel).add(&rounding_radius(&v));
            return Ok((v, r));
        }
        prev = Some(state.s[0].clone());
        state = step(&state)?;
    }
    Err(Error::NoConvergence { steps: state.step })
}

pub fn limit(s0: &[Complex; 4], p: u32) -> Result<Complex> {
    limit_with_radius(s0, p).map(|x| x.0)
}

/// `(x, y) -> ((x + y)/2, sqrt(x) sqrt(y))` with good signs.
pub fn agm_step(state: &AgmState) -> Result<AgmState> {
    let p = cprec(&state.x);
    let s = [state.x.clone(), state.y.clone()];
    let radii: Vec<ErrRadius> = s.iter().map(rounding_radius).collect();
    let t = good_roots_with(&s, &radii)?;
    let x = Complex::with_val(p, &state.x + &state.y) >> 1u32;
    let y = Complex::with_val(p, &t[0] * &t[1]);
    Ok(AgmState { x, y, step: state.step + 1 })
}

/// Limit of the genus-1 AGM sequence from `(x, y)` at `p` bits.
pub fn agm_limit(x: &Complex, y: &Complex, p: u32) -> Result<Complex> {
    let w = p + guard_bits(p);
    let mut st = AgmState { x: Complex::with_val(w, x), y: Complex::with_val(w, y), step: 0 };
    let target = -(f64::from(p)) - 4.0;
    let mut prev: Option<Complex> = None;
    while st.step < cap(p) {
        let d = defect(&[st.x.clone(), st.y.clone()]);
        let settled = prev.as_ref().is_some_and(|q| defect(&[q.clone(), st.x.clone()]) < target);
        if d < target && settled {
            return Ok(Complex::with_val(p, &st.x));
        }
        prev = Some(st.x.clone());
        st = agm_step(&st)?;
    }
    Err(Error::NoConvergence { steps: st.step })
}
