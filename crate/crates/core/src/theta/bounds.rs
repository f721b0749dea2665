//! Explicit approximants `xi` and error functions `rho` for theta constants
//! near the cusp, the good-position envelopes and the lower bounds for
//! `r` and `lambda_1` at `gamma_k tau`.
//!
//! The `rho` functions are evaluated in double precision; every returned
//! value is nudged upward with [`up`], so they are safe upper bounds.

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::numerics::{exp_i_pi, up};
use crate::siegel::Tau2;

/// `alpha = sqrt(3/7)` from the primed estimates.
pub fn alpha_primed() -> f64 {
    (3.0f64 / 7.0).sqrt()
}

fn geo(num: f64, ratio_exp: f64, q: f64) -> f64 {
    num / (1.0 - q.powf(ratio_exp))
}

pub fn rho46(k: f64, q1: f64, q2: f64) -> f64 {
    let t = q1.powi(2) / (1.0 - q1.powi(4))
        + geo(q2.powf(1.0 - 1.0 / k), 3.0 - 1.0 / k, q2)
        + geo(q2.powf(1.0 + 1.0 / k), 3.0 + 1.0 / k, q2)
        + q1.powf(7.0 / 8.0) * q2.sqrt() / ((1.0 - q2.powf(1.5)) * (1.0 - q1.powi(2)))
        + q1.powf(25.0 / 8.0) * q2.powf(1.5) / ((1.0 - q2.powf(4.5)) * (1.0 - q1.powi(6)));
    up(t)
}

pub fn rho89(k: f64, q1: f64, q2: f64) -> f64 {
    rho46(k, q2, q1)
}

pub fn rho0(q1: f64, q2: f64) -> f64 {
    let t = 2.0 * q1.powi(4) / (1.0 - q1.powi(5))
        + 2.0 * q2.powi(4) / (1.0 - q2.powi(5))
        + 2.0 * (q1 * q2).sqrt() / ((1.0 - q1.powf(1.5)) * (1.0 - q2.powf(1.5)))
        + 2.0 * (q1 * q2).powf(1.5) / ((1.0 - q1.powf(4.5)) * (1.0 - q2.powf(4.5)));
    up(t)
}

pub fn rho12(q1: f64, q2: f64) -> f64 {
    let one = |q: f64| q.powf(1.5) / (1.0 - q.powf(3.5)) + q.powf(2.5) / (1.0 - q.powf(4.5));
    let t = one(q1)
        + one(q2)
        + (q1 * q2).powf(7.0 / 8.0) / ((1.0 - q1.powi(2)) * (1.0 - q2.powi(2)))
        + (q1 * q2).powf(25.0 / 8.0) / ((1.0 - q1.powi(6)) * (1.0 - q2.powi(6)));
    up(t)
}

pub fn rho01_primed(k: f64, q1: f64, q2: f64) -> f64 {
    let al = alpha_primed();
    let cross = |s: f64| {
        2.0 * q1.powf(1.0 + s) * q2.powf(4.0 * (1.0 + s))
            / ((1.0 - q1.powf(3.0 * (1.0 + s))) * (1.0 - q2.powf(5.0 * (1.0 + s))))
    };
    let t = 2.0 * q2.powi(4) / (1.0 - q2.powi(5))
        + 2.0 * q1 / (1.0 - q1.powi(3))
        + 2.0 * geo(q1.powf(1.0 - 2.0 / k) * q2, 3.0 - 2.0 / k, q1)
        + 2.0 * geo(q1.powf(1.0 + 2.0 / k) * q2, 3.0 + 2.0 / k, q1)
        + cross(-al)
        + cross(al);
    up(t)
}

pub fn rho89_primed(k: f64, q1: f64, q2: f64) -> f64 {
    let al = alpha_primed();
    let cross = |s: f64| {
        q2.powf(2.0 + 2.25 * s) * q1.powf(1.0 + s)
            / ((1.0 - q2.powf(4.0 * (1.0 + s))) * (1.0 - q1.powf(3.0 * (1.0 + s))))
    };
    let t = q2.powi(2) / (1.0 - q2.powi(4))
        + geo(q1.powf(1.0 - 1.0 / k), 3.0 - 1.0 / k, q1)
        + geo(q1.powf(1.0 + 1.0 / k), 3.0 + 1.0 / k, q1)
        + cross(-al)
        + cross(al);
    up(t)
}

/// `|theta_j - 1|` envelope for `j <= 3` when `q = exp(-pi r)`.
pub fn envelope_by_r(q: f64) -> f64 {
    up(8.0 * q.powi(2) + 4.0 * q.powi(4) + 8.0 * q.powi(5) + 4.0 * q.powi(8)
        + 4.0 * (1.0 + q) / (1.0 - q).powi(2) * q.powi(9))
}

/// `|theta_j - 1|` envelope for `j <= 3` when `q = exp(-pi lambda_1)`.
pub fn envelope_by_lambda1(q: f64) -> f64 {
    up(4.0 * q + envelope_by_r(q) - 4.0 * q.powi(2))
}

/// Which estimate a [`BoundReport`] comes from, and how `rho` is meant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lemma {
    /// `|theta_j / xi_46 - 1| <= rho46^(k)` for `j in {4, 6}`.
    Theta46 { k: f64 },
    /// `|theta_j / xi_89 - 1| <= rho89^(k)` for `j in {8, 9}`.
    Theta89 { k: f64 },
    /// `|theta_0 - xi_0| <= rho0`.
    Theta0,
    /// `|theta_j - xi_02| <= rho0 + 2 q2` for `j in {0, 2}`.
    Theta02,
    /// `|theta_j - xi_01| <= rho0 + 2 q1` for `j in {0, 1}`.
    Theta01,
    /// `|theta_j - 1| <= rho0 + 2 q1 + 2 q2` for `j <= 3`.
    ThetaLow,
    /// `|theta_12 / xi_12 - 1| <= rho12`.
    Theta12,
    /// `|theta_j - xi_01| <= rho01'^(k)` for `j in {0, 1}`.
    Primed01 { k: f64 },
    /// `|theta_j / xi_89 - 1| <= rho89'^(k)` for `j in {8, 9}`.
    Primed89 { k: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundStyle {
    /// `|theta / xi - 1| <= rho`.
    Relative,
    /// `|theta - xi| <= rho`.
    Absolute,
}

impl Lemma {
    pub fn style(&self) -> BoundStyle {
        match self {
            Lemma::Theta46 { .. } | Lemma::Theta89 { .. } | Lemma::Theta12 | Lemma::Primed89 { .. } => {
                BoundStyle::Relative
            }
            _ => BoundStyle::Absolute,
        }
    }

    /// Characteristic indices the estimate applies to.
    pub fn indices(&self) -> &'static [usize] {
        match self {
            Lemma::Theta46 { .. } => &[4, 6],
            Lemma::Theta89 { .. } | Lemma::Primed89 { .. } => &[8, 9],
            Lemma::Theta0 => &[0],
            Lemma::Theta02 => &[0, 2],
            Lemma::Theta01 | Lemma::Primed01 { .. } => &[0, 1],
            Lemma::ThetaLow => &[0, 1, 2, 3],
            Lemma::Theta12 => &[12],
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub xi: Complex,
    pub rho: f64,
    pub kind: Lemma,
}

impl BoundReport {
    pub fn style(&self) -> BoundStyle {
        self.kind.style()
    }
}

/// Whether `tau` satisfies the hypotheses of `lemma`.
pub fn lemma_hypotheses(tau: &Tau2, lemma: Lemma) -> bool {
    let y1 = tau.y(1).to_f64();
    let y2 = tau.y(2).to_f64();
    let y3 = tau.y(3).to_f64().abs();
    let quarter = y3 * y3 <= 0.25 * y1 * y2;
    match lemma {
        Lemma::Theta46 { k } => k >= 1.0 && quarter && k * y3 <= y2,
        Lemma::Theta89 { k } => k >= 1.0 && quarter && k * y3 <= y1,
        Lemma::Theta0 | Lemma::Theta02 | Lemma::Theta01 | Lemma::ThetaLow => quarter,
        Lemma::Theta12 => tau.x(3).to_f64().abs() <= 0.5 && 2.0 * y3 <= y1.min(y2),
        Lemma::Primed01 { k } | Lemma::Primed89 { k } => {
            k >= 2.0 && y3 * y3 <= 3.0 / 7.0 * y1 * y2 && k * y3 <= y1
        }
    }
}

/// Approximant and error bound of `lemma` at `tau`, after checking its
/// hypotheses.
pub fn xi_rho(tau: &Tau2, lemma: Lemma) -> Result<BoundReport> {
    if !lemma_hypotheses(tau, lemma) {
        return Err(Error::WrongRegime(format!("{lemma:?}")));
    }
    let p = tau.prec();
    let q1 = tau.q(1).to_f64();
    let q2 = tau.q(2).to_f64();
    let one = || Complex::with_val(p, 1);
    let e1 = || Complex::with_val(p, exp_i_pi(tau.z1(), p) * 2u32);
    let e2 = || Complex::with_val(p, exp_i_pi(tau.z2(), p) * 2u32);
    let quarter_exp = |z: &Complex| Complex::with_val(p, exp_i_pi(&Complex::with_val(p, z >> 2i32), p) * 2u32);
    let (xi, rho) = match lemma {
        Lemma::Theta46 { k } => (quarter_exp(tau.z1()), rho46(k, q1, q2)),
        Lemma::Theta89 { k } => (quarter_exp(tau.z2()), rho89(k, q1, q2)),
        Lemma::Theta0 => (one() + e1() + e2(), rho0(q1, q2)),
        Lemma::Theta02 => (one() + e1(), up(rho0(q1, q2) + 2.0 * q2)),
        Lemma::Theta01 => (one() + e2(), up(rho0(q1, q2) + 2.0 * q1)),
        Lemma::ThetaLow => (one(), up(rho0(q1, q2) + 2.0 * q1 + 2.0 * q2)),
        Lemma::Theta12 => {
            let s = Complex::with_val(p, tau.z1() + tau.z2()) >> 2i32;
            let h = Complex::with_val(p, tau.z3() >> 1i32);
            let c = exp_i_pi(&h, p) + exp_i_pi(&Complex::with_val(p, -&h), p);
            // Leading pair of terms is 2 exp(i pi (z1 + z2)/4) (e^{i pi z3/2} + e^{-i pi z3/2}).
            (exp_i_pi(&s, p) * c * 2u32, rho12(q1, q2))
        }
        Lemma::Primed01 { k } => (one() + e2(), rho01_primed(k, q1, q2)),
        Lemma::Primed89 { k } => (quarter_exp(tau.z2()), rho89_primed(k, q1, q2)),
    };
    Ok(BoundReport { xi, rho, kind: lemma })
}

/// Which good-position criterion applies to `theta_0..theta_3(tau)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criterion {
    ByR,
    ByLambda1,
    Unknown,
}

/// `ByR` if `r(tau) >= 0.4`, else `ByLambda1` if `lambda_1(tau) >= 0.6`.
pub fn good_position_criterion(tau: &Tau2) -> Criterion {
    if tau.r_value() >= 0.4 {
        Criterion::ByR
    } else if tau.lambda1() >= 0.6 {
        Criterion::ByLambda1
    } else {
        Criterion::Unknown
    }
}

/// Lower bounds for `r(gamma_1 tau)`, `r(gamma_2 tau)` and
/// `lambda_1(gamma_3 tau)` valid on F', rounded down.
pub fn lower_bounds_at_gamma(tau: &Tau2) -> Result<[Float; 3]> {
    if !tau.in_fprime() {
        return Err(Error::WrongRegime("lower bounds need tau in F'".into()));
    }
    let p = tau.prec();
    let slack = Float::with_val(p, 1) - (Float::with_val(p, 1) >> (p as i32 - 8));
    let b = |j: usize| {
        let n = Float::with_val(p, tau.z(j).norm_ref());
        Float::with_val(p, tau.y(j) * 9u32) / (n * 34u32) * &slack
    };
    let l3 = Float::with_val(p, 9) / (tau.y(2) * 44u32) * &slack;
    Ok([b(1), b(2), l3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cusp_limit() {
        assert_eq!(rho0(0.0, 0.0), 0.0);
        let tau = Tau2::from_f64(64, (0.1, 30.0), (0.2, 40.0), (0.0, 1.0)).unwrap();
        let r = xi_rho(&tau, Lemma::Theta0).unwrap();
        let d = Complex::with_val(64, &r.xi - 1u32);
        assert!(Float::with_val(64, d.abs_ref()).to_f64() < 1e-30);
    }

    #[test]
    fn case_two_angle() {
        let q = (-PI * 3f64.sqrt() / 2.0).exp();
        assert!(PI / 4.0 + 2.0 * rho46(2.0, q, q).asin() < PI / 2.0);
    }

    #[test]
    fn envelopes_below_half_sqrt2() {
        assert!(envelope_by_r(0.287) < 0.5f64.sqrt());
        assert!(envelope_by_lambda1((-0.6 * PI).exp()) < 0.5f64.sqrt());
        assert!(envelope_by_r(0.30) > 0.0);
    }

    #[test]
    fn criterion_examples() {
        assert_eq!(good_position_criterion(&Tau2::identity_i(64)), Criterion::ByR);
        let t = Tau2::from_f64(64, (0.0, 0.7), (0.0, 5.0), (0.0, 0.0)).unwrap();
        assert_eq!(good_position_criterion(&t), Criterion::ByLambda1);
        let t = Tau2::from_f64(64, (0.0, 0.5), (0.0, 5.0), (0.0, 0.0)).unwrap();
        assert_eq!(good_position_criterion(&t), Criterion::Unknown);
    }

    #[test]
    fn lower_bounds_at_identity() {
        let b = lower_bounds_at_gamma(&Tau2::identity_i(128)).unwrap();
        assert!((b[0].to_f64() - 9.0 / 34.0).abs() < 1e-30);
        assert_eq!(b[0], b[1]);
        assert!((b[2].to_f64() - 9.0 / 44.0).abs() < 1e-30);
        let out = Tau2::from_f64(64, (0.0, 0.5), (0.0, 5.0), (0.0, 0.0)).unwrap();
        assert!(lower_bounds_at_gamma(&out).is_err());
    }

    #[test]
    fn hypotheses_are_checked() {
        let t = Tau2::from_f64(64, (0.0, 1.0), (0.0, 1.0), (0.0, 0.45)).unwrap();
        assert!(xi_rho(&t, Lemma::Theta46 { k: 2.0 }).is_ok());
        assert!(matches!(xi_rho(&t, Lemma::Theta46 { k: 3.0 }), Err(Error::WrongRegime(_))));
        assert!(xi_rho(&t, Lemma::Primed01 { k: 1.5 }).is_err());
    }
}
