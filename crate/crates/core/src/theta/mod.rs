//! Certified theta constants by direct summation.
//!
//! `theta_{a,b}(tau) = sum_{v in Z^g + a/2} exp(i pi (v^t tau v + v^t b))`.
//!
//! Each class `a` is summed separately over half the lattice: `v` and `-v`
//! contribute `2 (-1)^{(2 v^t b)/2} exp(i pi v^t tau v)` to every even
//! characteristic, so odd characteristics are exactly zero without any
//! arithmetic. Radii are relative to the leading term `exp(-pi mu_a)` of the
//! class (`mu_a` the minimum of `v^t Y v`): every radius is at most
//! `2^(-p-8) exp(-pi mu_a) <= 2^(-p)`, which keeps tiny constants at large
//! `Im(tau)` meaningful.

mod bounds;

pub use bounds::*;

use std::f64::consts::{LOG2_E, PI};

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::numerics::{cabs, exp_i_pi, ErrRadius};
use crate::siegel::{Tau1, Tau2};

/// Default refusal threshold for the smallest eigenvalue of `Im(tau)`.
pub const DEFAULT_LAMBDA_FLOOR: f64 = 1e-3;

/// Guard bits carried by returned values beyond the requested precision.
pub const VALUE_GUARD: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaOptions {
    pub lambda_floor: f64,
}

impl Default for ThetaOptions {
    fn default() -> Self {
        ThetaOptions { lambda_floor: DEFAULT_LAMBDA_FLOOR }
    }
}

/// The 16 genus-2 theta constants at one point.
#[derive(Clone, Debug)]
pub struct ThetaVec {
    pub values: Vec<Complex>,
    pub radii: Vec<ErrRadius>,
    pub tau: Tau2,
    /// Requested precision; values carry [`VALUE_GUARD`] extra bits.
    pub prec: u32,
    /// Truncation box `(2 V1, 2 V2)` used for each class `a = a0 + 2 a1`.
    pub truncation: [(i64, i64); 4],
}

impl ThetaVec {
    /// All-zero vector with zero radii.
    pub fn zeros(tau: Tau2, prec: u32) -> ThetaVec {
        ThetaVec {
            values: (0..16).map(|_| Complex::new(prec + VALUE_GUARD)).collect(),
            radii: vec![ErrRadius::zero(); 16],
            tau,
            prec,
            truncation: [(0, 0); 4],
        }
    }

    /// `theta_j^2 / theta_0^2` for every `j`.
    pub fn squared_quotients(&self) -> Vec<Complex> {
        let w = self.prec + VALUE_GUARD;
        let t0 = Complex::with_val(w, self.values[0].square_ref());
        self.values
            .iter()
            .map(|v| Complex::with_val(w, v.square_ref()) / &t0)
            .collect()
    }
}

/// Genus-1 theta constants `(theta_00, theta_01, theta_10, theta_11)`.
#[derive(Clone, Debug)]
pub struct ThetaG1 {
    pub values: [Complex; 4],
    pub radii: [ErrRadius; 4],
    pub prec: u32,
}

/// Upper bound on `log2` of `sum_{v in Z + c, |v| > V} q^{v^2}` where the
/// admissible `|v|` beyond `V` are `V + 1, V + 2, ...` and `q = exp(-pi d)`.
fn log2_tail_1d(big_v: f64, d: f64) -> f64 {
    let lq = -PI * d * LOG2_E;
    let f0 = (big_v + 1.0) * (big_v + 1.0);
    let step = 2.0 * big_v + 3.0;
    let denom = 1.0 - 2f64.powf(lq * step);
    1.0 + f0 * lq - denom.log2() + 1e-9
}

/// `log2` of a bound for the full 1-d sum `sum_{v in Z + c} exp(-pi d v^2)`.
fn log2_full_1d(d: f64) -> f64 {
    (2.0 + 1.0 / d.sqrt()).log2()
}

/// Smallest `T` (twice the half-width, `T = a mod 2`) whose tail is below
/// `2^target`, given the other direction's full-sum bound.
fn choose_width(a: i64, d: f64, other_full: f64, target: f64) -> i64 {
    let mut t = a;
    loop {
        if log2_tail_1d(t as f64 / 2.0, d) + other_full <= target {
            return t;
        }
        t += 2;
    }
}

struct ClassPlan {
    t1: i64,
    t2: i64,
    pw: u32,
    /// `log2` of the total radius (tail + rounding) for this class.
    radius_log2: f64,
    count: usize,
}

/// Valid decompositions `v^t Y v >= d1 v1^2 + d2 v2^2`.
fn decompositions(y1: f64, y2: f64, y3: f64, lambda: f64) -> Vec<(f64, f64)> {
    let mut out = vec![(lambda, lambda)];
    let rho = y3.abs() / (y1 * y2).sqrt();
    if rho < 1.0 {
        let s = 1.0 - rho;
        out.push((y1 * s * (1.0 - 1e-12), y2 * s * (1.0 - 1e-12)));
    }
    out
}

fn quad(y: (f64, f64, f64), tv1: i64, tv2: i64) -> f64 {
    let (v1, v2) = (tv1 as f64 / 2.0, tv2 as f64 / 2.0);
    v1 * v1 * y.0 + 2.0 * v1 * v2 * y.2 + v2 * v2 * y.1
}

fn plan_class_g2(tau: &Tau2, a: (i64, i64), p: u32, lambda: f64) -> ClassPlan {
    let y = (tau.y(1).to_f64(), tau.y(2).to_f64(), tau.y(3).to_f64());
    let z = [1, 2, 3].map(|j| cabs(tau.z(j), 53).to_f64());
    let decs = decompositions(y.0, y.1, y.2, lambda);
    let (d1, d2) = decs[decs.len() - 1];

    // Exact minimum of v^t Y v over the class.
    let mut mu = quad(y, a.0, a.1);
    let r1 = 2 * ((mu / d1).sqrt().ceil() as i64) + 2;
    let r2 = 2 * ((mu / d2).sqrt().ceil() as i64) + 2;
    for tv1 in (-r1 - a.0..=r1 + a.0).filter(|t| (t - a.0) % 2 == 0) {
        for tv2 in (-r2 - a.1..=r2 + a.1).filter(|t| (t - a.1) % 2 == 0) {
            mu = mu.min(quad(y, tv1, tv2));
        }
    }
    let lead_log2 = -PI * mu * LOG2_E;
    let target = -(p as f64) - 8.0 + lead_log2 - 1.0;

    // Truncation box: best of the valid decompositions.
    let mut best: Option<(i64, i64)> = None;
    for &(e1, e2) in &decs {
        let t1 = choose_width(a.0, e1, log2_full_1d(e2), target - 1.0);
        let t2 = choose_width(a.1, e2, log2_full_1d(e1), target - 1.0);
        if best.is_none_or(|(b1, b2)| (t1 + 1) * (t2 + 1) < (b1 + 1) * (b2 + 1)) {
            best = Some((t1, t2));
        }
    }
    let (t1, t2) = best.expect("at least one decomposition");
    let (e1, e2) = decs
        .iter()
        .map(|&(e1, e2)| {
            let tl = (log2_tail_1d(t1 as f64 / 2.0, e1) + log2_full_1d(e2))
                .max(log2_tail_1d(t2 as f64 / 2.0, e2) + log2_full_1d(e1));
            (tl, (e1, e2))
        })
        .min_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"))
        .map(|x| x.1)
        .expect("at least one decomposition");
    let tail_log2 = 1.0
        + (log2_tail_1d(t1 as f64 / 2.0, e1) + log2_full_1d(e2))
            .max(log2_tail_1d(t2 as f64 / 2.0, e2) + log2_full_1d(e1));

    // Sum of |terms| relative to the leading term, over the half lattice.
    let mut a_rel = if a == (0, 0) { 1.0 } else { 0.0 };
    let mut count = 0usize;
    for tv2 in (0..=t2).filter(|t| (t - a.1) % 2 == 0) {
        for tv1 in (-t1..=t1).filter(|t| (t - a.0) % 2 == 0) {
            if tv2 == 0 && tv1 <= 0 {
                continue;
            }
            a_rel += 2.0 * (-PI * (quad(y, tv1, tv2) - mu)).exp();
            count += 1;
        }
    }
    let a_rel = a_rel * 1.001 + 1e-300 * count as f64;

    // Rounding model, in units of u = 2^(2 - pw).
    let v1 = t1 as f64 / 2.0;
    let v2 = t2 as f64 / 2.0;
    let w_t = PI * (v1 * v1 * z[0] + 2.0 * v1 * v2 * z[2] + v2 * v2 * z[1]);
    let w_r = PI * ((2.0 * v1 + 1.0) * z[0] + 2.0 * v2 * z[2]);
    let w_e = 2.0 * PI * z[0];
    let steps = t1 as f64 + 1.0;
    let c = (6.0 * w_t + 2.0) + steps * (6.0 * w_r + 3.0) + steps * steps * (4.0 * w_e + 3.0);
    let c_total = 2.0 * (c + 2.0 * count as f64) + 4.0;
    let rounding_budget = target - 1.0;
    let need = (lead_log2 + a_rel.log2() + c_total.log2() + 2.0 - rounding_budget).ceil();
    let pw = (need.max(p as f64) as u32).max(p) + 4;
    let round_log2 = lead_log2 + a_rel.log2() + c_total.log2() + 2.0 - pw as f64;
    let radius_log2 = log2_add(tail_log2, round_log2);
    ClassPlan { t1, t2, pw, radius_log2, count }
}

fn log2_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + (2f64.powf(a - m) + 2f64.powf(b - m)).log2() + 1e-9
}

/// Row sums `(P0, P1)` over `tv1 = t_start, t_start + 2, ..., t_end` split
/// by the parity of `m1 = (tv1 - a0) / 2`.
fn row_sums(
    w: u32,
    z: &[Complex; 3],
    e2: &Complex,
    tv2: i64,
    t_start: i64,
    t_end: i64,
    a0: i64,
) -> (Complex, Complex) {
    let mut p0 = Complex::new(w);
    let mut p1 = Complex::new(w);
    if t_start > t_end {
        return (p0, p1);
    }
    let v1 = Float::with_val(w, t_start) / 2u32;
    let v2 = Float::with_val(w, tv2) / 2u32;
    // T(v1) = exp(i pi (v1^2 z1 + 2 v1 v2 z3 + v2^2 z2)).
    let mut q = Complex::with_val(w, &z[0] * Float::with_val(w, v1.square_ref()));
    q += Complex::with_val(w, &z[2] * Float::with_val(w, &v1 * &v2)) << 1u32;
    q += Complex::with_val(w, &z[1] * Float::with_val(w, v2.square_ref()));
    let mut t = exp_i_pi(&q, w);
    // R(v1) = T(v1 + 1) / T(v1) = exp(i pi ((2 v1 + 1) z1 + 2 v2 z3)).
    let mut r = Complex::with_val(w, &z[0] * Float::with_val(w, t_start + 1));
    r += Complex::with_val(w, &z[2] * Float::with_val(w, tv2));
    r = exp_i_pi(&r, w);
    let mut tv1 = t_start;
    loop {
        if ((tv1 - a0) / 2).rem_euclid(2) == 0 {
            p0 += &t;
        } else {
            p1 += &t;
        }
        if tv1 + 2 > t_end {
            break;
        }
        t *= &r;
        r *= e2;
        tv1 += 2;
    }
    (p0, p1)
}

/// Sum class `a` and return the four values indexed by `b = b0 + 2 b1`
/// (odd characteristics left at zero).
fn sum_class_g2(tau: &Tau2, a: (i64, i64), plan: &ClassPlan) -> [Complex; 4] {
    let w = plan.pw;
    let z = [1, 2, 3].map(|j| Complex::with_val(w, tau.z(j)));
    let e2 = exp_i_pi(&Complex::with_val(w, &z[0] << 1u32), w);
    let mut s: [Complex; 4] = std::array::from_fn(|_| Complex::new(w));
    let even = |b: (i64, i64)| (a.0 * b.0 + a.1 * b.1) % 2 == 0;
    for tv2 in (0..=plan.t2).filter(|t| (t - a.1) % 2 == 0) {
        let t_start = if tv2 == 0 { if a.0 == 0 { 2 } else { 1 } } else { -plan.t1 };
        let (p0, p1) = row_sums(w, &z, &e2, tv2, t_start, plan.t1, a.0);
        for bi in 0..4 {
            let b = ((bi & 1) as i64, (bi >> 1) as i64);
            if !even(b) {
                continue;
            }
            let mut row = if b.0 == 0 {
                Complex::with_val(w, &p0 + &p1)
            } else {
                Complex::with_val(w, &p0 - &p1)
            };
            if ((a.0 * b.0 + tv2 * b.1) / 2).rem_euclid(2) == 1 {
                row = -row;
            }
            s[bi] += row;
        }
    }
    for (bi, v) in s.iter_mut().enumerate() {
        let b = ((bi & 1) as i64, (bi >> 1) as i64);
        if !even(b) {
            *v = Complex::new(w);
            continue;
        }
        *v <<= 1u32;
        if a == (0, 0) {
            *v += 1u32;
        }
    }
    s
}

/// All 16 theta constants of `tau` with radii at most `2^(-p)`.
pub fn theta_all(tau: &Tau2, p: u32) -> Result<ThetaVec> {
    theta_all_with(tau, p, &ThetaOptions::default())
}

pub fn theta_all_with(tau: &Tau2, p: u32, opts: &ThetaOptions) -> Result<ThetaVec> {
    let lambda = tau.lambda1().to_f64();
    if !(lambda >= opts.lambda_floor) {
        return Err(Error::LambdaBelowFloor { lambda1: lambda, floor: opts.lambda_floor });
    }
    let lambda = lambda * (1.0 - 1e-12);
    let out_prec = p + VALUE_GUARD;
    let mut out = ThetaVec::zeros(tau.clone(), p);
    for ai in 0..4usize {
        let a = ((ai & 1) as i64, (ai >> 1) as i64);
        let plan = plan_class_g2(tau, a, p, lambda);
        let sums = sum_class_g2(tau, a, &plan);
        let base = ErrRadius::from_log2(plan.radius_log2);
        for (bi, v) in sums.into_iter().enumerate() {
            let j = bi + 4 * ai;
            if (a.0 * (bi as i64 & 1) + a.1 * (bi as i64 >> 1)) % 2 == 1 {
                continue;
            }
            let rounded = Complex::with_val(out_prec, &v);
            let round = ErrRadius::abs_of(&rounded).shift(1 - out_prec as i32);
            out.radii[j] = base.add(&round);
            out.values[j] = rounded;
        }
        out.truncation[ai] = (plan.t1, plan.t2);
        debug_assert!(plan.count > 0 || a == (0, 0));
    }
    Ok(out)
}

/// Genus-1 theta constants `theta_00, theta_01, theta_10, theta_11` of `z`
/// with radii at most `2^(-p)`.
pub fn theta_g1(z: &Tau1, p: u32) -> Result<ThetaG1> {
    theta_g1_with(z, p, &ThetaOptions::default())
}

pub fn theta_g1_with(z: &Tau1, p: u32, opts: &ThetaOptions) -> Result<ThetaG1> {
    let y = z.z().imag().to_f64();
    if !(y >= opts.lambda_floor) {
        return Err(Error::LambdaBelowFloor { lambda1: y, floor: opts.lambda_floor });
    }
    let zabs = cabs(z.z(), 53).to_f64();
    let out_prec = p + VALUE_GUARD;
    let mut values: [Complex; 4] = std::array::from_fn(|_| Complex::new(out_prec));
    let mut radii: [ErrRadius; 4] = std::array::from_fn(|_| ErrRadius::zero());
    for a in 0..2i64 {
        let mu = if a == 0 { 0.0 } else { 0.25 * y };
        let lead_log2 = -PI * mu * LOG2_E;
        let target = -(p as f64) - 9.0 + lead_log2;
        let d = y * (1.0 - 1e-12);
        let t = choose_width(a, d, 0.0, target - 1.0);
        let tail_log2 = log2_tail_1d(t as f64 / 2.0, d);
        let mut a_rel = if a == 0 { 1.0 } else { 0.0 };
        let mut count = 0usize;
        for tv in (1..=t).filter(|v| (v - a) % 2 == 0) {
            let v = tv as f64 / 2.0;
            a_rel += 2.0 * (-PI * (v * v * y - mu)).exp();
            count += 1;
        }
        let a_rel = a_rel * 1.001 + 1e-300 * count as f64;
        let v = t as f64 / 2.0;
        let steps = v + 1.0;
        let c = (6.0 * PI * v * v * zabs + 2.0)
            + steps * (6.0 * PI * (2.0 * v + 1.0) * zabs + 3.0)
            + steps * steps * (8.0 * PI * zabs + 3.0);
        let c_total = 2.0 * (c + 2.0 * count as f64) + 4.0;
        let need = (lead_log2 + a_rel.log2() + c_total.log2() + 2.0 - (target - 1.0)).ceil();
        let w = (need.max(p as f64) as u32).max(p) + 4;
        let round_log2 = lead_log2 + a_rel.log2() + c_total.log2() + 2.0 - w as f64;
        let base = ErrRadius::from_log2(log2_add(tail_log2, round_log2));

        let zw = Complex::with_val(w, z.z());
        let e2 = exp_i_pi(&Complex::with_val(w, &zw << 1u32), w);
        let start = if a == 0 { 2 } else { 1 };
        let mut p0 = Complex::new(w);
        let mut p1 = Complex::new(w);
        if start <= t {
            let v0 = Float::with_val(w, start) / 2u32;
            let mut term = exp_i_pi(&Complex::with_val(w, &zw * Float::with_val(w, v0.square_ref())), w);
            let mut r = exp_i_pi(&Complex::with_val(w, &zw * Float::with_val(w, start + 1)), w);
            let mut tv = start;
            loop {
                if ((tv - a) / 2).rem_euclid(2) == 0 {
                    p0 += &term;
                } else {
                    p1 += &term;
                }
                if tv + 2 > t {
                    break;
                }
                term *= &r;
                r *= &e2;
                tv += 2;
            }
        }
        for b in 0..2i64 {
            let idx = (b + 2 * a) as usize;
            if a * b == 1 {
                continue;
            }
            let mut s = if b == 0 { Complex::with_val(w, &p0 + &p1) } else { Complex::with_val(w, &p0 - &p1) };
            s <<= 1u32;
            if a == 0 {
                s += 1u32;
            }
            let rounded = Complex::with_val(out_prec, &s);
            radii[idx] = base.add(&ErrRadius::abs_of(&rounded).shift(1 - out_prec as i32));
            values[idx] = rounded;
        }
    }
    Ok(ThetaG1 { values, radii, prec: p })
}
