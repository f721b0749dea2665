//! Checks that `theta_0..theta_3(2^n gamma_k tau)` are in good position over
//! samples of F', and evaluates the threshold inequalities of the proof.
//!
//! For `n` at or beyond [`n_cutoff`] the good-position criteria `r >= 0.4`
//! or `lambda_1 >= 0.6` already apply at `2^n gamma_k tau`, so only smaller
//! `n` are evaluated. Each evaluation picks, among `2^n gamma_k tau` itself
//! and its images `tau_k^(n)` (and `tau_4^(n)` for `k = 3`), the point with
//! the largest `lambda_1`, and maps theta values back through the
//! characteristic map of `eta^(-1)`. Good position is invariant under the
//! common factor `kappa det^(1/2)`, so only `zeta_8^eps` is needed.

mod constants;

pub use constants::{coverage_slack, gamma1_lower_constant, verify_constants, ThresholdCheck};

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::{Complex, Float};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::numerics::{angular_span, good_position, zeta8, ErrRadius};
use crate::siegel::Tau2;
use crate::symplectic::{act, eta, gamma, tau_kn, transform_char, ThetaChar};
use crate::theta::{lower_bounds_at_gamma, theta_all};

/// Hard limit on `n`, for inputs far outside F'.
pub const MAX_N: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    Uncertifiable,
}

/// How the theta values at `2^n gamma_k tau` were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Route {
    Direct,
    /// Through `tau_m^(n)` and `eta_m^(n)`.
    Via(usize),
}

impl Route {
    pub fn label(&self) -> String {
        match self {
            Route::Direct => "direct".into(),
            Route::Via(m) => format!("tau{m}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SampleReport {
    pub tau: Tau2,
    pub k: usize,
    pub n: u32,
    /// Certified angular span; infinite when not certifiable.
    pub span: f64,
    pub verdict: Verdict,
    pub route: Route,
    /// Precision of the evaluation that produced the verdict.
    pub prec: u32,
}

impl SampleReport {
    pub fn margin(&self) -> f64 {
        FRAC_PI_2 - self.span
    }
}

fn point_four() -> Float {
    Float::with_val(64, 0.4) * (1.0 + 1e-12)
}

fn point_six() -> Float {
    Float::with_val(64, 0.6) * (1.0 + 1e-12)
}

/// Smallest `n*` such that the good-position criteria hold at
/// `2^n gamma_k tau` for every `n >= n*`.
///
/// Uses the exact `r` (and `lambda_1` for `k = 3`) at `gamma_k tau`, and the
/// lower bounds valid on F' when they are larger. Returns [`MAX_N`] if no
/// criterion is reached.
pub fn n_cutoff(tau: &Tau2, k: usize) -> u32 {
    if k == 0 {
        let r = tau.r_value();
        return first_n(&r, &point_four());
    }
    let Ok(gt) = act(&gamma(k), tau) else {
        return MAX_N;
    };
    let bounds = lower_bounds_at_gamma(tau).ok();
    let mut r = gt.r_value();
    if let (Some(b), true) = (bounds.as_ref(), k <= 2) {
        r = r.max(&b[k - 1]);
    }
    let by_r = first_n(&r, &point_four());
    if k <= 2 {
        return by_r;
    }
    let mut l = gt.lambda1();
    if let Some(b) = bounds.as_ref() {
        l = l.max(&b[2]);
    }
    by_r.min(first_n(&l, &point_six()))
}

/// Smallest `n` with `2^n x >= t`.
fn first_n(x: &Float, t: &Float) -> u32 {
    if *x <= 0 {
        return MAX_N;
    }
    let mut n = 0;
    while n < MAX_N && Float::with_val(x.prec(), x << n) < *t {
        n += 1;
    }
    n
}

/// Theta values `theta_0..theta_3` at `2^n gamma_k tau`, up to a common
/// factor, with radii, via `route`.
pub fn tuple_at(tau: &Tau2, k: usize, n: u32, route: Route, p: u32) -> Result<(Vec<Complex>, Vec<ErrRadius>)> {
    match route {
        Route::Direct => {
            let point = act(&gamma(k), tau)?.scale(n as i32);
            let t = theta_all(&point, p)?;
            Ok((t.values[..4].to_vec(), t.radii[..4].to_vec()))
        }
        Route::Via(m) => {
            let point = tau_kn(tau, m, n)?;
            let t = theta_all(&point, p)?;
            let inv = eta(m, n).inverse();
            let mut vals = Vec::with_capacity(4);
            let mut radii = Vec::with_capacity(4);
            for j in 0..4 {
                let img = transform_char(&inv, ThetaChar::from_index(j));
                let s = img.target.index();
                let unit = zeta8(i64::from(img.epsilon), p + 16);
                vals.push(Complex::with_val(p + 16, &t.values[s] * &unit));
                radii.push(t.radii[s].add(&ErrRadius::abs_of(&t.values[s]).shift(-(p as i32) - 8)));
            }
            Ok((vals, radii))
        }
    }
}

/// Candidate routes for `(k, n)`, best `lambda_1` first; ties go to the
/// transformed routes.
pub fn routes(tau: &Tau2, k: usize, n: u32) -> Vec<Route> {
    let mut cands: Vec<(f64, Route)> = Vec::new();
    let via: &[usize] = match k {
        1 => &[1],
        2 => &[2],
        3 => &[3, 4],
        _ => &[],
    };
    for &m in via {
        if let Ok(t) = tau_kn(tau, m, n) {
            cands.push((t.lambda1().to_f64(), Route::Via(m)));
        }
    }
    if let Ok(t) = act(&gamma(k), tau) {
        cands.push((t.lambda1().to_f64() * 2f64.powi(n as i32), Route::Direct));
    }
    // Stable sort keeps the transformed routes ahead on ties.
    cands.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    cands.into_iter().map(|c| c.1).collect()
}

fn judge(vals: &[Complex], radii: &[ErrRadius]) -> (f64, Verdict) {
    let span = angular_span(vals, radii);
    if good_position(vals, radii) {
        return (span, Verdict::Pass);
    }
    let zero = vec![ErrRadius::zero(); vals.len()];
    let bare = angular_span(vals, &zero);
    if radii.iter().all(ErrRadius::is_zero) || bare >= FRAC_PI_2 {
        (span, Verdict::Fail)
    } else {
        (span, Verdict::Uncertifiable)
    }
}

/// Evaluates one `(k, n)` at precision `p`, retrying once at `2p`.
pub fn verify_one(tau: &Tau2, k: usize, n: u32, p: u32) -> SampleReport {
    let route_list = routes(tau, k, n);
    let mut last = None;
    for prec in [p, 2 * p] {
        for &route in &route_list {
            let res = tuple_at(&tau.with_prec(prec.max(tau.prec())), k, n, route, prec);
            let (span, verdict) = match res {
                Ok((v, r)) => judge(&v, &r),
                Err(_) => (f64::INFINITY, Verdict::Uncertifiable),
            };
            let rep = SampleReport { tau: tau.clone(), k, n, span, verdict, route, prec };
            if verdict != Verdict::Uncertifiable {
                return rep;
            }
            last = Some(rep);
        }
    }
    last.unwrap_or(SampleReport {
        tau: tau.clone(),
        k,
        n,
        span: f64::INFINITY,
        verdict: Verdict::Uncertifiable,
        route: Route::Direct,
        prec: 2 * p,
    })
}

/// All `(k, n)` checks for one point: `k = 0..3` and `n < max(n*, 1)`.
pub fn verify_point(tau: &Tau2, p: u32) -> Vec<SampleReport> {
    let mut out = Vec::new();
    for k in 0..4 {
        let cut = n_cutoff(tau, k).max(1);
        for n in 0..cut {
            out.push(verify_one(tau, k, n, p));
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub samples: usize,
    pub seed: u64,
    pub prec: u32,
    pub y_max: f64,
    /// Include the fixed boundary battery.
    pub corners: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { samples: 1000, seed: 1, prec: 128, y_max: 1024.0, corners: true }
    }
}

/// Random point of F': `x_j` uniform, `y1` log-uniform in
/// `[sqrt(3)/2, y_max]`, `y2` log-uniform in `[y1, y_max]`, `y3` uniform in
/// `[-y1/2, y1/2]`, rejecting `|z1| < 1` or `|z2| < 1`.
pub fn sample_fprime<R: Rng>(rng: &mut R, y_max: f64, p: u32) -> Tau2 {
    let lo = (3f64.sqrt() / 2.0).ln();
    let hi = y_max.ln();
    loop {
        let x1: f64 = rng.gen_range(-0.5..=0.5);
        let x2: f64 = rng.gen_range(-0.5..=0.5);
        let x3: f64 = rng.gen_range(-0.5..=0.5);
        let y1 = rng.gen_range(lo..=hi).exp();
        let y2 = rng.gen_range(y1.ln()..=hi).exp();
        let y3 = rng.gen_range(-0.5 * y1..=0.5 * y1);
        if x1 * x1 + y1 * y1 < 1.0 || x2 * x2 + y2 * y2 < 1.0 {
            continue;
        }
        if let Ok(t) = Tau2::from_f64(p, (x1, y1), (x2, y2), (x3, y3)) {
            if t.in_fprime() {
                return t;
            }
        }
    }
}

/// Boundary points of F': `y1 = sqrt(3)/2` with `|z1| = 1`, extreme `x_j`,
/// `y3 = 0, +-y1/2`, and `y2` small or large; plus `i I_2`.
pub fn boundary_corners(y_max: f64, p: u32) -> Vec<Tau2> {
    let s = 3f64.sqrt() / 2.0;
    let mut out = vec![Tau2::identity_i(p)];
    for x1 in [-0.5, 0.5] {
        for x2 in [-0.5, 0.5] {
            for x3 in [-0.5, 0.0, 0.5] {
                for y2 in [s, 2.0, y_max] {
                    for y3 in [-0.5 * s, 0.0, 0.5 * s] {
                        // Exact boundary values, rounded at p bits.
                        let sq = Float::with_val(p, 3).sqrt() >> 1u32;
                        let y2f = if y2 == s { sq.clone() } else { Float::with_val(p, y2) };
                        let x2 = if y2 == s { x2 } else { 0.0 };
                        let y3f = Float::with_val(p, &sq * y3.signum()) >> 1u32;
                        let y3f = if y3 == 0.0 { Float::new(p) } else { y3f };
                        let z1 = Complex::with_val(p, (x1, &sq));
                        let z2 = Complex::with_val(p, (x2, y2f));
                        let z3 = Complex::with_val(p, (x3, y3f));
                        if let Ok(t) = Tau2::new(z1, z2, z3) {
                            if t.in_fprime() && !out.contains(&t) {
                                out.push(t);
                            }
                        }
                    }
                }
            }
        }
    }
    out.push(Tau2::from_f64(p, (0.5, 2.0), (-0.5, 2.0), (0.5, 1.0)).expect("valid corner"));
    out.push(Tau2::from_f64(p, (0.0, y_max), (0.0, y_max), (0.5, 0.5 * y_max)).expect("valid corner"));
    out
}

/// Smallest margin seen for one `(k, route)` pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeMargin {
    pub k: usize,
    pub route: String,
    pub count: usize,
    pub min_margin: f64,
}

#[derive(Clone, Debug)]
pub struct SweepSummary {
    /// Number of points.
    pub count: usize,
    /// Number of `(k, n)` evaluations.
    pub evaluations: usize,
    /// Points with at least one failed or uncertifiable evaluation.
    pub failures: usize,
    pub uncertifiable: usize,
    pub min_margin: f64,
    pub per_regime: Vec<RegimeMargin>,
    /// Failed or uncertifiable reports, in sample order.
    pub bad: Vec<SampleReport>,
}

/// Runs [`verify_point`] on the seeded samples and (optionally) the
/// boundary battery. The output does not depend on thread scheduling.
pub fn sweep(cfg: &SweepConfig) -> SweepSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut points: Vec<Tau2> = (0..cfg.samples).map(|_| sample_fprime(&mut rng, cfg.y_max, cfg.prec)).collect();
    if cfg.corners {
        points.extend(boundary_corners(cfg.y_max, cfg.prec));
    }
    let reports: Vec<Vec<SampleReport>> = points.par_iter().map(|t| verify_point(t, cfg.prec)).collect();
    summarize(&reports)
}

pub fn summarize(reports: &[Vec<SampleReport>]) -> SweepSummary {
    let mut per: std::collections::BTreeMap<(usize, Route), (usize, f64)> = Default::default();
    let mut failures = 0;
    let mut uncertifiable = 0;
    let mut evaluations = 0;
    let mut min_margin = f64::INFINITY;
    let mut bad = Vec::new();
    for point in reports {
        let mut point_bad = false;
        for r in point {
            evaluations += 1;
            let e = per.entry((r.k, r.route)).or_insert((0, f64::INFINITY));
            e.0 += 1;
            e.1 = e.1.min(r.margin());
            min_margin = min_margin.min(r.margin());
            if r.verdict != Verdict::Pass {
                point_bad = true;
                if r.verdict == Verdict::Uncertifiable {
                    uncertifiable += 1;
                }
                bad.push(r.clone());
            }
        }
        if point_bad {
            failures += 1;
        }
    }
    let per_regime = per
        .into_iter()
        .map(|((k, route), (count, m))| RegimeMargin { k, route: route.label(), count, min_margin: m })
        .collect();
    SweepSummary { count: reports.len(), evaluations, failures, uncertifiable, min_margin, per_regime, bad }
}

fn decimal(x: f64) -> Value {
    if x.is_finite() {
        Value::String(format!("{x:.17e}"))
    } else {
        Value::String(if x > 0.0 { "inf".into() } else { "-inf".into() })
    }
}

/// JSON report: `{checks: [{name, margin, pass}], samples: {count,
/// failures, min_margin}}`, numbers as decimal strings.
pub fn report_json(checks: &[ThresholdCheck], summary: Option<&SweepSummary>) -> Value {
    let checks: Vec<Value> = checks
        .iter()
        .map(|c| json!({ "name": c.name, "margin": decimal(c.margin), "pass": c.pass() }))
        .collect();
    let samples = match summary {
        Some(s) => json!({
            "count": s.count,
            "failures": s.failures,
            "min_margin": decimal(s.min_margin),
            "evaluations": s.evaluations,
            "uncertifiable": s.uncertifiable,
            "per_regime": s.per_regime.iter().map(|r| json!({
                "k": r.k,
                "route": r.route,
                "count": r.count,
                "min_margin": decimal(r.min_margin),
            })).collect::<Vec<_>>(),
        }),
        None => json!({ "count": 0, "failures": 0, "min_margin": decimal(f64::INFINITY) }),
    };
    json!({ "checks": checks, "samples": samples })
}

/// One line per check and a summary line.
pub fn report_text(checks: &[ThresholdCheck], summary: Option<&SweepSummary>) -> String {
    let mut s = String::new();
    for c in checks {
        let tag = if c.pass() { "PASS" } else { "FAIL" };
        s.push_str(&format!("{tag} {:<70} margin {:.6e}\n", c.name, c.margin));
    }
    if let Some(sum) = summary {
        s.push_str(&format!(
            "samples {} evaluations {} failures {} uncertifiable {} min_margin {:.6e}\n",
            sum.count, sum.evaluations, sum.failures, sum.uncertifiable, sum.min_margin
        ));
        for r in &sum.per_regime {
            s.push_str(&format!("  k={} route={:<6} count {:>6} min_margin {:.6e}\n", r.k, r.route, r.count, r.min_margin));
        }
        for b in &sum.bad {
            s.push_str(&format!(
                "  {:?} k={} n={} route={} span={} tau={}\n",
                b.verdict,
                b.k,
                b.n,
                b.route.label(),
                b.span,
                b.tau
            ));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 128;

    #[test]
    fn cutoff_examples() {
        let t = Tau2::identity_i(P);
        assert_eq!(n_cutoff(&t, 0), 0);
        assert!(n_cutoff(&t, 1) <= 1);
        let t = Tau2::from_f64(P, (0.0, 1.0), (0.0, 10.0), (0.0, 0.0)).unwrap();
        assert!(n_cutoff(&t, 3) <= 5);
    }

    #[test]
    fn transformed_characters_match_lemma_sets() {
        let sets: [(usize, [usize; 4]); 4] = [(1, [0, 2, 4, 6]), (2, [0, 1, 8, 9]), (3, [0, 4, 8, 12]), (4, [0, 1, 8, 9])];
        for (m, set) in sets {
            for n in 0..4 {
                let inv = eta(m, n).inverse();
                let mut got: Vec<usize> =
                    (0..4).map(|j| transform_char(&inv, ThetaChar::from_index(j)).target.index()).collect();
                got.sort();
                assert_eq!(got, set, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn routes_agree_on_span() {
        let tau = Tau2::from_f64(P, (0.2, 1.3), (-0.4, 2.5), (0.1, 0.4)).unwrap();
        for (k, m) in [(1, 1), (2, 2), (3, 3), (3, 4)] {
            for n in 0..3 {
                let (a, ra) = tuple_at(&tau, k, n, Route::Direct, P).unwrap();
                let (b, rb) = tuple_at(&tau, k, n, Route::Via(m), P).unwrap();
                let sa = angular_span(&a, &ra);
                let sb = angular_span(&b, &rb);
                assert!((sa - sb).abs() < 1e-15, "k={k} m={m} n={n}: {sa} {sb}");
            }
        }
    }

    #[test]
    fn identity_passes() {
        let reps = verify_point(&Tau2::identity_i(P), P);
        assert!(!reps.is_empty());
        assert!(reps.iter().all(|r| r.verdict == Verdict::Pass));
    }

    #[test]
    fn cutoff_is_sound_at_the_edge() {
        let tau = Tau2::from_f64(P, (0.3, 3.0), (-0.2, 40.0), (0.2, 1.0)).unwrap();
        for k in 0..4 {
            let c = n_cutoff(&tau, k);
            for n in [c, c + 1] {
                let r = verify_one(&tau, k, n, P);
                assert_eq!(r.verdict, Verdict::Pass, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = SweepConfig { samples: 6, seed: 7, prec: 64, y_max: 64.0, corners: false };
        let a = report_json(&[], Some(&sweep(&cfg)));
        let b = report_json(&[], Some(&sweep(&cfg)));
        assert_eq!(a.to_string(), b.to_string());
    }

    #[test]
    fn corners_are_in_domain() {
        let c = boundary_corners(1024.0, P);
        assert!(c.len() > 50);
        assert!(c.iter().all(Tau2::in_fprime));
    }

    #[test]
    fn out_of_domain_still_reports() {
        let tau = Tau2::from_f64(P, (0.0, 0.2), (0.0, 3.0), (0.0, 0.0)).unwrap();
        let reps = verify_point(&tau, P);
        assert!(!reps.is_empty());
    }
}
