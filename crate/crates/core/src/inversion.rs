//! Recovery of period matrices from theta quotients.
//!
//! Genus 2: the four Borchardt limits of the tuples `(theta_j^2(gamma_k tau))`
//! give `1/theta_0^2(gamma_k tau)`, and the relations
//! `theta_0^2(gamma_1 tau) = -i z1 theta_4^2(tau)`,
//! `theta_0^2(gamma_2 tau) = -i z2 theta_8^2(tau)` and
//! `theta_0^2(gamma_3 tau) = -det(tau) theta_0^2(tau)` give `z1`, `z2` and
//! `z3^2`.
//!
//! Squared quotients are invariant under `z3 -> -z3` (the substitution
//! multiplies `theta_{a,b}` by `(-1)^(a1 b1)`), so the sign of `z3` needs one
//! unsquared value. [`ThetaQuotients2::root15`] carries `theta_15/theta_0`,
//! the only even constant that changes sign.

use rayon::prelude::*;
use rug::{Complex, Float};

use crate::borchardt::{agm_limit, guard_bits, limit_with_radius};
use crate::error::{Error, Result};
use crate::numerics::{cabs, complex_f64, cprec, log2_abs, principal_sqrt, zeta8, ErrRadius};
use crate::siegel::{Tau1, Tau2};
use crate::symplectic::{gamma, transform_char, ThetaChar};
use crate::theta::{theta_all, theta_g1, ThetaG1, ThetaVec, VALUE_GUARD};

/// Squared theta quotients `theta_j^2/theta_0^2` of one genus-2 point.
#[derive(Clone, Debug)]
pub struct ThetaQuotients2 {
    /// Indexed by characteristic; odd entries are zero and entry 0 is 1.
    pub values: Vec<Complex>,
    /// Absolute radii, same indexing.
    pub radii: Vec<ErrRadius>,
    pub prec: u32,
    /// `theta_15/theta_0`, used only to fix the sign of `z3`.
    pub root15: Option<Complex>,
}

impl ThetaQuotients2 {
    /// Builds quotients from the ten even entries `(j, value)`; entry 0 may
    /// be omitted and must equal 1 if given.
    pub fn from_even(entries: &[(usize, Complex)], prec: u32, root15: Option<Complex>) -> Result<Self> {
        let mut values: Vec<Option<Complex>> = vec![None; 16];
        values[0] = Some(Complex::with_val(prec, 1));
        for (j, v) in entries {
            let j = *j;
            if j >= 16 || !ThetaChar::from_index(j).is_even() {
                return Err(Error::InvalidArgument(format!("index {j} is not an even characteristic")));
            }
            if j == 0 {
                if *v != 1 {
                    return Err(Error::InvalidArgument("quotient 0 must be 1".into()));
                }
                continue;
            }
            values[j] = Some(Complex::with_val(prec, v));
        }
        let mut out = Vec::with_capacity(16);
        for (j, v) in values.into_iter().enumerate() {
            match v {
                Some(v) => out.push(v),
                None if ThetaChar::from_index(j).is_even() => {
                    return Err(Error::InvalidArgument(format!("missing quotient {j}")));
                }
                None => out.push(Complex::new(prec)),
            }
        }
        let radii = out.iter().map(|v| ErrRadius::abs_of(v).shift(2 - prec as i32)).collect();
        Ok(ThetaQuotients2 { values: out, radii, prec, root15 })
    }

    /// Quotients of a computed theta vector, including the `theta_15` hint.
    pub fn from_theta(t: &ThetaVec) -> Self {
        let w = t.prec + VALUE_GUARD;
        let values = t.squared_quotients();
        let abs0 = Float::with_val(64, t.values[0].abs_ref());
        let rel0 = t.radii[0].div_float_down(&abs0);
        let radii = values
            .iter()
            .enumerate()
            .map(|(j, q)| {
                if j == 0 || q.is_zero() {
                    return ErrRadius::zero();
                }
                let absj = Float::with_val(64, t.values[j].abs_ref());
                let rel = t.radii[j].div_float_down(&absj).add(&rel0).shift(1);
                ErrRadius::abs_of(q).mul(&rel.add(&ErrRadius::exp2(2 - i64::from(w))))
            })
            .collect();
        let root15 = Some(Complex::with_val(w, &t.values[15] / &t.values[0]));
        ThetaQuotients2 { values, radii, prec: t.prec, root15 }
    }

    pub fn get(&self, j: usize) -> &Complex {
        &self.values[j]
    }
}

/// `theta_01^2/theta_00^2` of a genus-1 theta vector.
pub fn quotient_g1(t: &ThetaG1) -> Complex {
    let w = t.prec + VALUE_GUARD;
    let a = Complex::with_val(w, t.values[1].square_ref());
    a / Complex::with_val(w, t.values[0].square_ref())
}

/// `(theta_j^2(gamma_k tau))_{j = 0..3}` for `k = 0..3`, up to a factor per
/// tuple, in terms of the quotients at `tau`. Each tuple is normalized so
/// that its first entry is 1.
pub fn initial_tuples(q: &ThetaQuotients2) -> [[Complex; 4]; 4] {
    let p = cprec(&q.values[0]).max(q.prec);
    std::array::from_fn(|k| {
        let g = gamma(k);
        let raw: [Complex; 4] = std::array::from_fn(|j| {
            let img = transform_char(&g, ThetaChar::from_index(j));
            // Squaring turns zeta_8^eps into i^eps and kappa^2 det into a
            // common factor.
            let unit = zeta8(2 * i64::from(img.epsilon), p);
            Complex::with_val(p, &q.values[img.target.index()] * &unit)
        });
        let inv = Complex::with_val(p, raw[0].recip_ref());
        raw.map(|v| v * &inv)
    })
}

/// A recovered period matrix with an estimated entrywise radius.
#[derive(Clone, Debug)]
pub struct Recovered {
    pub tau: Tau2,
    pub radius: ErrRadius,
}

/// Recovers `tau` from its squared theta quotients at `p` bits.
pub fn recover_tau(q: &ThetaQuotients2, p: u32) -> Result<Tau2> {
    recover_tau_with_radius(q, p).map(|r| r.tau)
}

pub fn recover_tau_with_radius(q: &ThetaQuotients2, p: u32) -> Result<Recovered> {
    let g = guard_bits(p);
    let w = p + g;
    let tuples = initial_tuples(q);
    let limits: Vec<Result<(Complex, ErrRadius)>> = tuples
        .par_iter()
        .enumerate()
        .map(|(k, t)| {
            let t = t.clone().map(|x| Complex::with_val(w, x));
            limit_with_radius(&t, w).map_err(|e| Error::Borchardt { k, source: Box::new(e) })
        })
        .collect();
    let mut l = Vec::with_capacity(4);
    let mut rel = ErrRadius::zero();
    for r in limits {
        let (v, rad) = r?;
        if v.is_zero() {
            return Err(Error::Degenerate("zero Borchardt limit".into()));
        }
        rel = rel.add(&rad.div_float_down(&Float::with_val(64, v.abs_ref())));
        l.push(v);
    }
    let input_rel = [4usize, 8]
        .iter()
        .map(|&j| q.radii[j].div_float_down(&cabs(&q.values[j], 64)))
        .fold(ErrRadius::zero(), |a, b| a.add(&b));
    let rel = rel.add(&input_rel).add(&ErrRadius::exp2(8 - i64::from(w)));

    let i = Complex::with_val(w, (0, 1));
    let z1 = Complex::with_val(w, &i * &l[0]) / Complex::with_val(w, &l[1] * &q.values[4]);
    let z2 = Complex::with_val(w, &i * &l[0]) / Complex::with_val(w, &l[2] * &q.values[8]);
    let det = -(Complex::with_val(w, &l[0] / &l[3]));
    let z3sq = Complex::with_val(w, &z1 * &z2) - &det;

    let scale = cabs(&z1, 64).max(&Float::with_val(64, 1)) * cabs(&z2, 64).max(&Float::with_val(64, 1));
    let sq_radius = rel.shift(2).scale(&scale);
    let base_radius = rel.shift(1).scale(&cabs(&z1, 64).max(&cabs(&z2, 64)));

    let threshold = sq_radius.shift(8);
    let z3sq_abs = ErrRadius::abs_of(&z3sq);
    if z3sq_abs <= threshold {
        // The sign is immaterial at this precision.
        let tau = Tau2::new(Complex::with_val(p, &z1), Complex::with_val(p, &z2), Complex::new(p))?;
        let radius = base_radius.max(&threshold.sqrt());
        return Ok(Recovered { tau, radius });
    }
    let root = principal_sqrt(&z3sq);
    let radius = base_radius.max(&sq_radius.div_float_down(&cabs(&root, 64)));
    let plus = Tau2::new(Complex::with_val(p, &z1), Complex::with_val(p, &z2), Complex::with_val(p, &root))?;
    let sign = resolve_z3_sign(q, &plus)?;
    let tau = if sign { plus } else { Tau2::new(plus.z1().clone(), plus.z2().clone(), -plus.z3().clone())? };
    Ok(Recovered { tau, radius })
}

/// True if `candidate` (rather than its `z3 -> -z3` image) matches the
/// `theta_15/theta_0` hint.
fn resolve_z3_sign(q: &ThetaQuotients2, candidate: &Tau2) -> Result<bool> {
    let Some(hint) = q.root15.as_ref() else {
        return Err(Error::SignResolutionFailed(
            "z3 is nonzero and no theta_15/theta_0 value was supplied".into(),
        ));
    };
    let p = 64;
    let t = theta_all(&candidate.with_prec(p), p)?;
    let v = Complex::with_val(p, &t.values[15] / &t.values[0]);
    let h = Complex::with_val(p, hint);
    let dp = cabs(&Complex::with_val(p, &h - &v), p);
    let dm = cabs(&Complex::with_val(p, &h + &v), p);
    let size = cabs(&v, p);
    let (best, worst) = if dp <= dm { (&dp, &dm) } else { (&dm, &dp) };
    // Both candidates give v and -v; the hint must sit clearly next to one.
    if Float::with_val(p, best << 2u32) >= *worst || size.is_zero() {
        return Err(Error::SignResolutionFailed("theta_15 hint does not separate the candidates".into()));
    }
    Ok(dp <= dm)
}

/// Recovers `tau` in `F_1` from `theta_01^2/theta_00^2`.
///
/// `agm(1, Q) = 1/theta_00^2(tau)` and, with `R = sqrt(1 - Q^2) =
/// theta_10^2/theta_00^2`, `agm(1, R) = 1/theta_00^2(-1/tau)`; then
/// `theta_00^2(-1/tau) = -i tau theta_00^2(tau)` gives `tau`.
pub fn recover_tau_g1(quotient: &Complex, p: u32) -> Result<Tau1> {
    let (tau, _) = recover_g1_parts(quotient, p)?;
    Tau1::new(tau)
}

/// `(tau, agm(1, Q))` at `p` bits, without the domain check on `tau`.
fn recover_g1_parts(quotient: &Complex, p: u32) -> Result<(Complex, Complex)> {
    let w = p + guard_bits(p);
    let q = Complex::with_val(w, quotient);
    let one = Complex::with_val(w, 1);
    let r2 = Complex::with_val(w, &one - Complex::with_val(w, q.square_ref()));
    if cabs(&r2, 64) < Float::with_val(64, 1) >> (w as i32 - 8) {
        return Err(Error::Degenerate("quotient is 1 (cusp)".into()));
    }
    let r = principal_sqrt(&r2);
    let l = agm_limit(&one, &q, w)?;
    let lp = agm_limit(&one, &r, w)?;
    let i = Complex::with_val(w, (0, 1));
    let tau = Complex::with_val(w, &i * &l) / &lp;
    Ok((Complex::with_val(p, tau), l))
}

/// Genus-1 squared theta constants `(theta_00^2, theta_01^2, theta_10^2,
/// theta_11^2)` of `z` at `p` bits, by Newton iteration on the quotient.
///
/// The quotient starts from a 64-bit series value; each round doubles the
/// working precision and takes one Newton step on `recover_tau_g1(l) - z`
/// with a centered difference of step `2^(-cur/2)`.
pub fn theta_g1_newton(z: &Tau1, p: u32) -> Result<[Complex; 4]> {
    let base = 64;
    let s = theta_g1(&z.with_prec(base), base)?;
    let target = p + 32;
    let mut lam = quotient_g1(&s);
    let mut cur = base;
    let mut last_f: Option<f64> = None;
    loop {
        let next = (cur * 2).min(target);
        let done = cur == target;
        let prev_cur = cur;
        cur = next;
        lam = Complex::with_val(cur, &lam);
        let zc = Complex::with_val(cur, z.z());
        let f = Complex::with_val(cur, recover_g1_parts(&lam, cur)?.0 - &zc);
        let f_log = log2_abs(&f);
        if let Some(prev) = last_f {
            // Quadratic convergence, limited by the previous step's precision.
            let allowed = (2.0 * prev).max(-(f64::from(prev_cur))) + 12.0;
            if f_log.is_finite() && f_log > allowed {
                return Err(Error::NewtonDiverged { prec: cur });
            }
        }
        last_f = Some(if f_log.is_finite() { f_log } else { -(f64::from(cur)) });
        if done {
            break;
        }
        let h = Complex::with_val(cur, Float::with_val(cur, 1) >> (cur / 2) as i32);
        let fp = recover_g1_parts(&Complex::with_val(cur, &lam + &h), cur)?.0;
        let fm = recover_g1_parts(&Complex::with_val(cur, &lam - &h), cur)?.0;
        let deriv = Complex::with_val(cur, &fp - &fm) / Complex::with_val(cur, &h << 1u32);
        if deriv.is_zero() {
            return Err(Error::NewtonDiverged { prec: cur });
        }
        lam -= Complex::with_val(cur, &f / &deriv);
    }
    let w = target;
    let one = Complex::with_val(w, 1);
    let l = agm_limit(&one, &lam, w)?;
    let t00 = Complex::with_val(w, l.recip_ref());
    let t01 = Complex::with_val(w, &lam * &t00);
    let r = principal_sqrt(&Complex::with_val(w, &one - Complex::with_val(w, lam.square_ref())));
    let t10 = Complex::with_val(w, &r * &t00);
    Ok([t00, t01, t10, complex_f64(w, 0.0, 0.0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::act;

    fn dist(a: &Complex, b: &Complex) -> f64 {
        log2_abs(&Complex::with_val(cprec(a), a - b))
    }

    fn quotients(tau: &Tau2, p: u32) -> ThetaQuotients2 {
        ThetaQuotients2::from_theta(&theta_all(tau, p).unwrap())
    }

    #[test]
    fn gamma0_tuple_is_input() {
        let tau = Tau2::from_f64(128, (0.1, 1.2), (-0.2, 1.5), (0.1, 0.3)).unwrap();
        let q = quotients(&tau, 128);
        let t = initial_tuples(&q);
        for j in 0..4 {
            assert!(dist(&t[0][j], &q.values[j]) < -120.0);
        }
    }

    #[test]
    fn gamma1_tuple_uses_4_0_6_2() {
        let tau = Tau2::from_f64(128, (0.1, 1.2), (-0.2, 1.5), (0.1, 0.3)).unwrap();
        let q = quotients(&tau, 128);
        let t = initial_tuples(&q);
        let src = [4, 0, 6, 2];
        for j in 1..4 {
            let r = Complex::with_val(160, &t[1][j] / &t[1][0]);
            let e = Complex::with_val(160, &q.values[src[j]] / &q.values[4]);
            let a = cabs(&r, 64).to_f64();
            let b = cabs(&e, 64).to_f64();
            assert!((a - b).abs() < 1e-15 * b.max(1.0));
        }
    }

    #[test]
    fn tuples_match_series_at_gamma_tau() {
        let p = 128;
        let tau = Tau2::identity_i(p);
        let q = quotients(&tau, p);
        let tuples = initial_tuples(&q);
        for (k, tuple) in tuples.iter().enumerate() {
            let gt = act(&gamma(k), &tau).unwrap();
            let direct = theta_all(&gt, p).unwrap();
            let t0 = Complex::with_val(p + 16, direct.values[0].square_ref());
            for j in 0..4 {
                let e = Complex::with_val(p + 16, direct.values[j].square_ref()) / &t0;
                assert!(dist(&tuple[j], &e) < -110.0, "k={k} j={j}");
            }
        }
    }

    #[test]
    fn round_trip_generic() {
        let p = 256;
        let tau = Tau2::from_f64(p, (0.5, 1.0), (0.0, 2.0), (0.0, 0.3)).unwrap();
        let back = recover_tau(&quotients(&tau, p), p).unwrap();
        assert!(back.max_dist(&tau).log2() < -(p as f64) + 24.0);
    }

    #[test]
    fn diagonal_gives_zero_z3() {
        let p = 128;
        let tau = Tau2::identity_i(p);
        let back = recover_tau(&quotients(&tau, p), p).unwrap();
        assert!(back.z3().is_zero());
        assert!(back.max_dist(&tau).log2() < -100.0);
    }

    #[test]
    fn sign_needs_hint() {
        let p = 128;
        let tau = Tau2::from_f64(p, (0.2, 1.1), (-0.1, 1.3), (-0.2, -0.4)).unwrap();
        let mut q = quotients(&tau, p);
        let back = recover_tau(&q, p).unwrap();
        assert!(back.max_dist(&tau).log2() < -100.0);
        q.root15 = None;
        assert!(matches!(recover_tau(&q, p), Err(Error::SignResolutionFailed(_))));
    }

    #[test]
    fn step3_relations_on_series() {
        let p = 128;
        let tau = Tau2::from_f64(p, (0.3, 1.0), (0.1, 1.7), (0.2, 0.25)).unwrap();
        let t = theta_all(&tau, p).unwrap();
        let l: Vec<Complex> = (0..4)
            .map(|k| {
                let v = theta_all(&act(&gamma(k), &tau).unwrap(), p).unwrap();
                Complex::with_val(p + 16, v.values[0].square_ref())
            })
            .collect();
        let sq = |j: usize| Complex::with_val(p + 16, t.values[j].square_ref());
        let i = Complex::with_val(p + 16, (0, 1));
        let r1 = -Complex::with_val(p + 16, &i * tau.z1()) * sq(4);
        let r2 = -Complex::with_val(p + 16, &i * tau.z2()) * sq(8);
        let det = Complex::with_val(p + 16, tau.z1() * tau.z2()) - Complex::with_val(p + 16, tau.z3().square_ref());
        let r3 = -(det * sq(0));
        assert!(dist(&l[1], &r1) < -(p as f64) + 8.0);
        assert!(dist(&l[2], &r2) < -(p as f64) + 8.0);
        assert!(dist(&l[3], &r3) < -(p as f64) + 8.0);
    }

    #[test]
    fn genus1_round_trip() {
        let p = 256;
        for (x, y) in [(0.0, 1.0), (0.0, 2.0), (0.3, 1.5), (-0.5, 0.9)] {
            let z = Tau1::from_f64(p, x, y).unwrap();
            let q = quotient_g1(&theta_g1(&z, p).unwrap());
            let back = recover_tau_g1(&q, p).unwrap();
            assert!(dist(back.z(), z.z()) < -(p as f64) + 16.0, "{x} {y}");
        }
    }

    #[test]
    fn genus1_cusp_is_degenerate() {
        assert!(matches!(recover_tau_g1(&complex_f64(128, 1.0, 0.0), 128), Err(Error::Degenerate(_))));
    }

    #[test]
    fn newton_matches_series() {
        for (x, y, p) in [(0.0, 1.0, 1024u32), (0.3, 1.5, 2048)] {
            let z = Tau1::from_f64(p, x, y).unwrap();
            let n = theta_g1_newton(&z, p).map_err(|e| e.to_string()).unwrap();
            let s = theta_g1(&z, p).unwrap();
            for j in 0..3 {
                let e = Complex::with_val(p + 16, s.values[j].square_ref());
                assert!(dist(&n[j], &e) < -(p as f64) + 32.0, "j={j}");
            }
        }
    }
}
