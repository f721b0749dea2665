//! The numeric inequalities behind the case analysis, evaluated in double
//! precision with outward nudges.
//!
//! Every check is stated as `value < bound`. Angle bounds are increasing in
//! `q`, so they are evaluated at the largest admissible `q`; the one convex
//! exception is certified by its endpoints plus midpoint convexity tests.

use std::f64::consts::PI;

use serde::Serialize;

use crate::numerics::{down, up};
use crate::theta::{
    envelope_by_lambda1, envelope_by_r, rho0, rho01_primed, rho12, rho46, rho89_primed,
};

/// One inequality `computed_value < claimed_bound`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdCheck {
    pub name: String,
    pub claimed_bound: f64,
    pub computed_value: f64,
    /// `claimed_bound - computed_value`, rounded down.
    pub margin: f64,
}

impl ThresholdCheck {
    fn new(name: impl Into<String>, computed_value: f64, claimed_bound: f64) -> Self {
        let computed_value = up(computed_value);
        let claimed_bound = down(claimed_bound);
        ThresholdCheck { name: name.into(), claimed_bound, computed_value, margin: down(claimed_bound - computed_value) }
    }

    pub fn pass(&self) -> bool {
        self.margin > 0.0
    }
}

const HALF_PI: f64 = PI / 2.0;

fn sqrt3() -> f64 {
    3f64.sqrt()
}

fn asin(x: f64) -> f64 {
    if x >= 1.0 {
        f64::INFINITY
    } else {
        up(x.asin())
    }
}

fn atan(x: f64) -> f64 {
    up(x.atan())
}

/// Largest `2^n / y` allowed by `q(y / 2^n) <= q0`, i.e. `pi / (-ln q0)`.
fn scale_for(q0: f64) -> f64 {
    down(PI / -q0.ln())
}

/// Arctangent bound for `arg(1 + 2 q e^(i t))`.
fn arg_bound(q: f64, t: f64) -> f64 {
    atan(2.0 * q * t.sin() / (1.0 + 2.0 * q * t.cos()))
}

fn gamma1_case1() -> Vec<ThresholdCheck> {
    let q = (-PI * sqrt3() / 2.0).exp();
    vec![
        ThresholdCheck::new("gamma1 n=0: pi/8 + asin(0.348) + asin(0.405)", PI / 8.0 + asin(0.348) + asin(0.405), HALF_PI),
        ThresholdCheck::new("gamma1 n=0: rho0(q,q) + 4q at q=exp(-pi sqrt3/2) vs 0.405", up(rho0(q, q) + 4.0 * q), 0.405),
        ThresholdCheck::new("gamma1 n=0: rho46^(2)(q,q) at q=exp(-pi sqrt3/2) vs 0.348", rho46(2.0, q, q), 0.348),
    ]
}

fn gamma1_case2() -> ThresholdCheck {
    let q2 = (-PI * sqrt3()).exp();
    let q1 = (-PI * sqrt3() / 8.0).exp();
    let angle = (PI / 16.0).max(arg_bound(q1, PI / 4.0)) + asin(rho46(4.0, q1, q2)) + asin(up(rho0(q1, q2) + 2.0 * q2));
    ThresholdCheck::new("gamma1 n=1: angle at q1=exp(-pi sqrt3/8), q2=exp(-pi sqrt3)", angle, HALF_PI)
}

fn gamma1_case3() -> Vec<ThresholdCheck> {
    let q2 = (-2.0 * PI * sqrt3()).exp();
    let q1 = 0.699;
    let angle = (PI / 32.0).max(arg_bound(q1, PI / 8.0)) + asin(up(rho0(q1, q2) + 2.0 * q2)) + asin(rho46(8.0, q1, q2));
    vec![
        ThresholdCheck::new("gamma1 n>=2: angle at q1=0.699, q2=exp(-2 pi sqrt3)", angle, HALF_PI),
        ThresholdCheck::new("gamma1 n>=2: 8.77 <= pi/(-ln 0.699)", 8.77, scale_for(0.699)),
    ]
}

fn tau3_lemma_n_ge_1() -> Vec<ThresholdCheck> {
    let q = 0.151;
    let r46 = asin(rho46(2.0, q, q));
    let r0 = asin(rho0(q, q));
    let r12 = asin(rho12(q, q));
    vec![
        ThresholdCheck::new("tau3 n>=1: theta4 vs theta8 at q=0.151", PI / 8.0 + 2.0 * r46, HALF_PI),
        ThresholdCheck::new(
            "tau3 n>=1: theta4 vs theta0 at q=0.151",
            PI / 16.0 + r46 + up(2.0 * q * (PI / 4.0).sin()) + r0,
            HALF_PI,
        ),
        ThresholdCheck::new("tau3 n>=1: theta12 vs theta4 at q=0.151", 3.0 * PI / 16.0 + r12 + r46, HALF_PI),
        ThresholdCheck::new("tau3 n>=1: theta12 vs theta0 at q=0.151", PI / 4.0 + r12 + r0, HALF_PI),
        ThresholdCheck::new("tau3 n>=1: 1.66 <= pi/(-ln 0.151)", 1.66, scale_for(0.151)),
    ]
}

/// Same-sign angle between `theta_12` and `theta_0` at `tau_3^(0)`.
fn tau3_same_sign(q: f64) -> f64 {
    let s = q.sqrt();
    HALF_PI - (s / (1.0 + s)).atan() + rho12(q, q).asin() + rho0(q, q).asin()
}

/// Checks midpoint convexity of `f` on `[a, b]` down to `depth` levels and
/// returns the smallest slack `(f(a) + f(b))/2 - f(mid)` seen.
fn convexity_slack(f: &dyn Fn(f64) -> f64, a: f64, b: f64, depth: u32) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let mut worst = f64::INFINITY;
    let mut stack = vec![(a, fa, b, fb, depth)];
    while let Some((a, fa, b, fb, d)) = stack.pop() {
        let m = 0.5 * (a + b);
        let fm = f(m);
        worst = worst.min(0.5 * (fa + fb) - fm);
        if d > 0 {
            stack.push((a, fa, m, fm, d - 1));
            stack.push((m, fm, b, fb, d - 1));
        }
    }
    worst
}

fn tau3_lemma_n0() -> Vec<ThresholdCheck> {
    let q = (-PI * sqrt3() / 2.0).exp();
    let r46 = asin(rho46(2.0, q, q));
    let r0 = asin(rho0(q, q));
    let r12 = asin(rho12(q, q));
    let f = |x: f64| tau3_same_sign(x);
    // Evaluation noise of the four-term sum is far below 1e-14.
    let slack = convexity_slack(&f, 1e-12, q, 12) + 1e-14;
    vec![
        ThresholdCheck::new("tau3 n=0: theta4 vs theta8", PI / 4.0 + 2.0 * r46, HALF_PI),
        ThresholdCheck::new("tau3 n=0: theta4 vs theta0", PI / 8.0 + r46 + asin(up(rho0(q, q) + 4.0 * q)), HALF_PI),
        ThresholdCheck::new("tau3 n=0: theta12 vs theta4", 3.0 * PI / 8.0 + r12 + r46, HALF_PI),
        ThresholdCheck::new(
            "tau3 n=0: theta12 vs theta0, opposite signs",
            3.0 * PI / 8.0 + atan(2.0 * q) + r12 + r0,
            HALF_PI,
        ),
        ThresholdCheck::new("tau3 n=0: theta12 vs theta0, same sign, endpoint", up(tau3_same_sign(q)), HALF_PI),
        ThresholdCheck::new("tau3 n=0: same-sign angle is midpoint convex on (0, q]", -slack, 0.0),
    ]
}

fn tau4_first() -> Vec<ThresholdCheck> {
    let q1 = 0.021;
    let q2 = 0.38;
    let k = 8.0 / 3.0;
    let arg = (9.0 * PI / 64.0)
        .max(atan(2.0 * q2 / (1.0 + 2.0 * q2 * (9.0 * PI / 16.0).cos())) - 3.0 * PI / 32.0)
        .max(arg_bound(q2, 3.0 * PI / 8.0));
    let angle = arg + asin(rho89_primed(k, q1, q2)) + asin(up(rho01_primed(k, q1, q2) / down((PI / 16.0).cos())));
    vec![
        ThresholdCheck::new("tau4 n>=n0: 1.24 <= (3/4) 1.66", 1.24, 0.75 * 1.66),
        ThresholdCheck::new("tau4 n>=n0: exp(-1.24 pi) <= 0.021", (-1.24 * PI).exp(), 0.021),
        ThresholdCheck::new("tau4 n>=n0: angle at q1=0.021, q2=0.38", angle, HALF_PI),
        ThresholdCheck::new("tau4 n>=n0: 2.43 <= 3 pi/(4 (-ln 0.38))", 2.43, down(0.75 * scale_for(0.38))),
    ]
}

fn tau4_second() -> Vec<ThresholdCheck> {
    let q1 = 0.0033;
    let q2 = 0.571;
    let k = 16.0 / 3.0;
    let arg = (9.0 * PI / 128.0).max(arg_bound(q2, 9.0 * PI / 32.0));
    let angle = arg + asin(rho89_primed(k, q1, q2)) + asin(rho01_primed(k, q1, q2));
    vec![
        ThresholdCheck::new("tau4 2^n > 2.43 y2: 1.82 < 2.43 (3/4)", 1.82, 2.43 * 0.75),
        ThresholdCheck::new("tau4 2^n > 2.43 y2: exp(-1.82 pi) < 0.0033", (-1.82 * PI).exp(), 0.0033),
        ThresholdCheck::new("tau4 2^n > 2.43 y2: angle at q1=0.0033, q2=0.571", angle, HALF_PI),
        ThresholdCheck::new("tau4 2^n > 2.43 y2: 4.2 <= 3 pi/(4 (-ln 0.571))", 4.2, down(0.75 * scale_for(0.571))),
    ]
}

fn envelopes() -> Vec<ThresholdCheck> {
    let half_sqrt2 = down(0.5f64.sqrt());
    vec![
        ThresholdCheck::new("good position: exp(-0.4 pi) <= 0.287", (-0.4 * PI).exp(), 0.287),
        ThresholdCheck::new("good position: envelope by r at q=0.287", envelope_by_r(0.287), half_sqrt2),
        ThresholdCheck::new(
            "good position: envelope by lambda1 at q=exp(-0.6 pi)",
            envelope_by_lambda1(up((-0.6 * PI).exp())),
            half_sqrt2,
        ),
    ]
}

/// `9 y^2 / (34 (1/4 + y^2))` at `y1 = sqrt(3)/2`, the constant `c` in
/// `r(gamma_1 tau) >= c / y1`.
pub fn gamma1_lower_constant() -> f64 {
    let y2 = 0.75;
    down(9.0 * y2 / (34.0 * (0.25 + y2)))
}

fn gamma_cutoffs() -> Vec<ThresholdCheck> {
    let c = gamma1_lower_constant();
    vec![
        ThresholdCheck::new("gamma0: 0.4 <= sqrt3/4", 0.4, down(sqrt3() / 4.0)),
        ThresholdCheck::new("gamma1: 1.96 <= 8.77 (coverage)", 1.96, 8.77),
        ThresholdCheck::new("gamma1: 0.4/c <= 8.77 with c recomputed at y1=sqrt3/2", up(0.4 / c), 8.77),
        ThresholdCheck::new("gamma3: 0.6 * 44/9 <= 2.94", up(0.6 * 44.0 / 9.0), 2.94),
        ThresholdCheck::new("gamma3: 2.94 <= 4.2 (coverage)", 2.94, 4.2),
    ]
}

/// Smallest log-slack with which the `n`-ranges of the three regimes for
/// `gamma_1`, `gamma_2` and `gamma_3` cover every `n >= 0`, over a log grid
/// of `(y1, y2)` with `sqrt(3)/2 <= y1 <= y2 <= 2^20`.
pub fn coverage_slack() -> f64 {
    let c1 = up(0.4 / gamma1_lower_constant());
    let lo = (sqrt3() / 2.0).ln();
    let hi = 20.0 * 2f64.ln();
    let steps = 200;
    let mut worst = f64::INFINITY;
    for i in 0..=steps {
        let y1 = (lo + (hi - lo) * f64::from(i) / f64::from(steps)).exp();
        for j in i..=steps {
            let y2 = (lo + (hi - lo) * f64::from(j) / f64::from(steps)).exp();
            for n in 0..=26 {
                let t = f64::from(n) * 2f64.ln();
                // gamma_1 and gamma_2: 2^n <= 8.77 y or 2^n >= c1 y.
                for y in [y1, y2] {
                    let s = (8.77 * y).ln() - t;
                    let s = s.max(t - (c1 * y).ln());
                    worst = worst.min(s);
                }
                // gamma_3: 2^n <= 1.66 y1, or 1.66 y1 < 2^n <= 4.2 y2, or
                // 2^n >= 2.94 y2.
                let a = (1.66 * y1).ln() - t;
                let b = (4.2 * y2).ln() - t;
                let c = t - (2.94 * y2).ln();
                worst = worst.min(a.max(b).max(c));
            }
        }
    }
    worst
}

/// Every threshold inequality, in a fixed order.
pub fn verify_constants() -> Vec<ThresholdCheck> {
    let mut out = Vec::new();
    out.extend(gamma1_case1());
    out.push(gamma1_case2());
    out.extend(gamma1_case3());
    out.extend(tau3_lemma_n_ge_1());
    out.extend(tau3_lemma_n0());
    out.extend(tau4_first());
    out.extend(tau4_second());
    out.extend(envelopes());
    out.extend(gamma_cutoffs());
    out.push(ThresholdCheck::new("coverage of n by the three regimes (log grid)", -coverage_slack(), 0.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headline_inequality() {
        let c = &verify_constants()[0];
        assert!((c.computed_value - 1.165_2).abs() < 1e-3);
        assert!((c.margin - 0.405_6).abs() < 1e-3);
    }

    #[test]
    fn all_positive() {
        for c in verify_constants() {
            assert!(c.pass(), "{c:?}");
        }
    }

    #[test]
    fn same_sign_angle_tends_to_right_angle() {
        assert!((tau3_same_sign(1e-30) - HALF_PI).abs() < 1e-12);
        assert!(tau3_same_sign(1e-4) < HALF_PI);
    }

    #[test]
    fn scale_thresholds() {
        assert!((scale_for(0.699) - 8.773).abs() < 1e-3);
        assert!((scale_for(0.151) - 1.6618).abs() < 1e-3);
        // The constant 0.205 would need y1 larger than sqrt(3)/2.
        assert!((gamma1_lower_constant() - 0.198_529).abs() < 1e-5);
    }

    #[test]
    fn convexity_detects_concavity() {
        let f = |x: f64| -x * x;
        assert!(convexity_slack(&f, 0.0, 1.0, 4) < 0.0);
        let g = |x: f64| x * x;
        assert!(convexity_slack(&g, 0.0, 1.0, 4) > 0.0);
    }
}
