//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any hard criterion (1 to 7) fails. Criterion 8 is a timing
//! ratio and only reported; its bound is read from `ACCEPT_TIMING_RATIO`
//! (default 6).

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Complex, Float};

use siegel_theta::borchardt::{step, BorchardtState};
use siegel_theta::certifier::{sample_fprime, sweep, verify_constants, SweepConfig};
use siegel_theta::inversion::{quotient_g1, recover_tau, recover_tau_g1, theta_g1_newton, ThetaQuotients2};
use siegel_theta::numerics::log2_abs;
use siegel_theta::symplectic::{act, eta, theta_transform, ThetaChar};
use siegel_theta::theta::{lemma_hypotheses, theta_all, theta_g1, xi_rho, BoundStyle, Lemma, ThetaVec};
use siegel_theta::{Tau1, Tau2};

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(n: usize, name: &str, soft: bool, out: &Outcome, took: Duration) -> bool {
    let tag = if out.pass { "PASS" } else { "FAIL" };
    let soft = if soft { " (soft)" } else { "" };
    println!("criterion {n} {tag}{soft}: {name}: {} [{:.2?}]", out.detail, took);
    out.pass
}

fn diff_log2(a: &Complex, b: &Complex) -> f64 {
    let p = a.prec().0.max(b.prec().0);
    log2_abs(&Complex::with_val(p, a - b))
}

fn c1_constants() -> Outcome {
    let t = Instant::now();
    let checks = verify_constants();
    let took = t.elapsed();
    let bad: Vec<_> = checks.iter().filter(|c| !c.pass()).map(|c| c.name.clone()).collect();
    let min = checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    let has = |needle: &str| checks.iter().any(|c| c.name.contains(needle));
    let named = has("asin(0.348) + asin(0.405)") && has("envelope by r at q=0.287") && has("envelope by lambda1");
    Outcome {
        pass: bad.is_empty() && named && took < Duration::from_secs(1),
        detail: format!(
            "{} checks, {} failing {:?}, min margin {min:.3e}, key inequalities present {named}, {:.1?}",
            checks.len(),
            bad.len(),
            bad,
            took
        ),
    }
}

fn c2_sweep() -> Outcome {
    let cfg = SweepConfig { samples: 1000, seed: 1, prec: 128, y_max: 1024.0, corners: true };
    let t = Instant::now();
    let s = sweep(&cfg);
    let took = t.elapsed();
    Outcome {
        pass: s.failures == 0 && s.uncertifiable == 0 && took < Duration::from_secs(600),
        detail: format!(
            "{} points, {} evaluations, {} failures, {} uncertifiable, min margin {:.4e}",
            s.count, s.evaluations, s.failures, s.uncertifiable, s.min_margin
        ),
    }
}

fn c3_duplication(rng: &mut ChaCha8Rng) -> Outcome {
    let p = 256;
    let mut worst = f64::NEG_INFINITY;
    let mut root_mismatch = 0;
    let mut errors = 0;
    for _ in 0..100 {
        let tau = sample_fprime(rng, 16.0, p);
        let (Ok(th), Ok(th2)) = (theta_all(&tau, p), theta_all(&tau.scale(1), p)) else {
            errors += 1;
            continue;
        };
        let s: [Complex; 4] = std::array::from_fn(|b| Complex::with_val(p + 16, th.values[b].square_ref()));
        let Ok(next) = step(&BorchardtState::new(s)) else {
            errors += 1;
            continue;
        };
        for b in 0..4 {
            let expect = Complex::with_val(p + 16, th2.values[b].square_ref());
            worst = worst.max(diff_log2(&next.s[b], &expect));
            let t = next.t.as_ref().expect("roots recorded");
            if diff_log2(&t[b], &th.values[b]) > -200.0 {
                root_mismatch += 1;
            }
        }
    }
    Outcome {
        pass: errors == 0 && root_mismatch == 0 && worst <= -240.0,
        detail: format!("100 points, worst log2 error {worst:.1} (bound -240), {root_mismatch} sign mismatches, {errors} errors"),
    }
}

/// Moves `z` by a random amount near `2^-40` with a full-precision
/// mantissa, so a round trip cannot land on the sample by rounding.
fn roughen(rng: &mut ChaCha8Rng, z: &Complex) -> Complex {
    let p = z.prec().0;
    let d = Complex::with_val(p, (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))) / 3u32;
    Complex::with_val(p, z + (d >> 40u32))
}

fn g1_round_trip_error(z: &Tau1, p: u32) -> Result<f64, String> {
    let q = quotient_g1(&theta_g1(z, p).map_err(|e| e.to_string())?);
    let back = recover_tau_g1(&q, p).map_err(|e| e.to_string())?;
    Ok(diff_log2(back.z(), z.z()))
}

fn c4_round_trip(rng: &mut ChaCha8Rng) -> Outcome {
    let p = 256;
    let mut worst = f64::NEG_INFINITY;
    let mut errors = Vec::new();
    for i in 0..100 {
        let t = sample_fprime(rng, 16.0, p);
        let tau = Tau2::new(roughen(rng, t.z1()), roughen(rng, t.z2()), roughen(rng, t.z3())).expect("tau");
        let q = ThetaQuotients2::from_theta(&theta_all(&tau, p).expect("series"));
        match recover_tau(&q, p) {
            Ok(back) => worst = worst.max(back.max_dist(&tau).log2()),
            Err(e) => errors.push(format!("#{i}: {e}")),
        }
    }
    // Near the cusp Q = 1 - 8 e^(i pi tau) + ..., so an input rounded at
    // p + 16 bits fixes tau only to about 2^-(p+16) e^(pi y) / (8 pi). The
    // 2^-240 target is reachable for y below about 7.7; samples stop at 6.
    let mut worst1 = f64::NEG_INFINITY;
    for _ in 0..100 {
        let z = sample_f1(rng, 6.0, p);
        let z = Tau1::new(roughen(rng, z.z())).expect("upper half plane");
        match g1_round_trip_error(&z, p) {
            Ok(e) => worst1 = worst1.max(e),
            Err(e) => errors.push(format!("genus 1: {e}")),
        }
    }
    let far = Tau1::new(roughen(rng, Tau1::from_f64(p, 0.3, 16.0).expect("tau").z())).expect("tau");
    let far_err = g1_round_trip_error(&far, p).unwrap_or(f64::NAN);
    Outcome {
        pass: errors.is_empty() && worst <= -232.0 && worst1 <= -240.0,
        detail: format!(
            "genus 2 worst log2 error {worst:.1} (bound -232), genus 1 with y <= 6 {worst1:.1} (bound -240), \
             genus 1 at y = 16 {far_err:.1} (input-limited, not judged), errors {errors:?}"
        ),
    }
}

fn projective_gap(a: &ThetaVec, b: &ThetaVec) -> f64 {
    let w = a.prec + 16;
    let m = (0..16)
        .max_by(|&i, &j| log2_abs(&a.values[i]).total_cmp(&log2_abs(&a.values[j])))
        .expect("sixteen values");
    let mut worst = f64::NEG_INFINITY;
    for ch in ThetaChar::even() {
        let j = ch.index();
        let x = Complex::with_val(w, &a.values[j] / &a.values[m]);
        let y = Complex::with_val(w, &b.values[j] / &b.values[m]);
        worst = worst.max(diff_log2(&x, &y));
    }
    worst
}

fn c5_transform(rng: &mut ChaCha8Rng) -> Outcome {
    let p = 128;
    let mut worst = f64::NEG_INFINITY;
    let mut errors = Vec::new();
    let mut cases = 0;
    for k in 1..=4 {
        for n in 0..=4 {
            let g = eta(k, n);
            let mut done = 0;
            while done < 3 {
                let tau = sample_fprime(rng, 4.0, p);
                let Ok(image) = act(&g, &tau) else { continue };
                let Ok(direct) = theta_all(&image, p) else { continue };
                let source = theta_all(&tau, p).expect("series on F'");
                match theta_transform(&g, &tau, &source) {
                    Ok(moved) => worst = worst.max(projective_gap(&direct, &moved)),
                    Err(e) => errors.push(format!("eta_{k}^({n}): {e}")),
                }
                done += 1;
                cases += 1;
            }
        }
    }
    let bound = -(p as f64) + 16.0;
    Outcome {
        pass: errors.is_empty() && worst <= bound,
        detail: format!("{cases} cases, worst projective log2 gap {worst:.1} (bound {bound}), errors {errors:?}"),
    }
}

fn lemmas() -> Vec<Lemma> {
    let mut v = vec![Lemma::Theta0, Lemma::Theta02, Lemma::Theta01, Lemma::ThetaLow, Lemma::Theta12];
    for k in [1.0, 1.5, 2.0, 3.0, 4.0, 8.0] {
        v.push(Lemma::Theta46 { k });
        v.push(Lemma::Theta89 { k });
        if k >= 2.0 {
            v.push(Lemma::Primed01 { k });
            v.push(Lemma::Primed89 { k });
        }
    }
    v
}

fn random_h2(rng: &mut ChaCha8Rng, p: u32) -> Option<Tau2> {
    let y1 = rng.gen_range((0.4f64).ln()..(10.0f64).ln()).exp();
    let y2 = rng.gen_range((0.4f64).ln()..(10.0f64).ln()).exp();
    let y3 = rng.gen_range(-0.7..0.7) * y1.min(y2);
    let t = Tau2::from_f64(
        p,
        (rng.gen_range(-1.0..1.0), y1),
        (rng.gen_range(-1.0..1.0), y2),
        (rng.gen_range(-1.0..1.0), y3),
    )
    .ok()?;
    (t.lambda1() > 0.05).then_some(t)
}

fn c6_bounds(rng: &mut ChaCha8Rng) -> Outcome {
    let p = 96;
    let all = lemmas();
    let (mut points, mut checks, mut violations) = (0, 0, Vec::new());
    let mut tightest = f64::INFINITY;
    while points < 1000 {
        let Some(tau) = random_h2(rng, p) else { continue };
        let usable: Vec<Lemma> = all.iter().copied().filter(|l| lemma_hypotheses(&tau, *l)).collect();
        if usable.is_empty() {
            continue;
        }
        points += 1;
        let th = theta_all(&tau, p).expect("series");
        for lemma in usable {
            let r = xi_rho(&tau, lemma).expect("hypotheses checked");
            for &j in lemma.indices() {
                let err = Complex::with_val(p, &th.values[j] - &r.xi);
                let mut lhs = Float::with_val(p, err.abs_ref()) + th.radii[j].as_float();
                if r.style() == BoundStyle::Relative {
                    lhs /= Float::with_val(p, r.xi.abs_ref());
                }
                let lhs = lhs.to_f64();
                checks += 1;
                tightest = tightest.min(r.rho - lhs);
                if lhs.is_nan() || r.rho.is_nan() || lhs > r.rho {
                    violations.push(format!("{lemma:?} j={j} lhs {lhs:e} rho {:e}", r.rho));
                }
            }
        }
    }
    violations.truncate(5);
    Outcome {
        pass: violations.is_empty(),
        detail: format!("{points} points, {checks} inequalities, min slack {tightest:.3e}, violations {violations:?}"),
    }
}

/// `x` uniform, `y` log-uniform in `[sqrt(3)/2, y_max]`, rejecting `|z| < 1`.
fn sample_f1(rng: &mut ChaCha8Rng, y_max: f64, p: u32) -> Tau1 {
    let lo = (3f64.sqrt() / 2.0).ln();
    loop {
        let x: f64 = rng.gen_range(-0.5..=0.5);
        let y = rng.gen_range(lo..y_max.ln()).exp();
        if x * x + y * y >= 1.0 {
            return Tau1::from_f64(p, x, y).expect("upper half plane");
        }
    }
}

fn c7_structure(rng: &mut ChaCha8Rng) -> Outcome {
    let p = 128;
    let bound = -(p as f64) + 8.0;
    let mut nonzero_odd = 0;
    let mut worst_diag = f64::NEG_INFINITY;
    for _ in 0..20 {
        let tau = sample_fprime(rng, 16.0, p);
        let th = theta_all(&tau, p).expect("series");
        nonzero_odd += [5, 7, 10, 11, 13, 14].iter().filter(|&&j| !th.values[j].is_zero()).count();

        let z1 = Tau1::new(tau.z1().clone()).expect("z1");
        let z2 = Tau1::new(tau.z2().clone()).expect("z2");
        let diag = Tau2::new(tau.z1().clone(), tau.z2().clone(), Complex::new(p)).expect("diagonal");
        let (d, a, b) = (theta_all(&diag, p).unwrap(), theta_g1(&z1, p).unwrap(), theta_g1(&z2, p).unwrap());
        for ch in ThetaChar::all() {
            let i1 = usize::from(ch.b[0] + 2 * ch.a[0]);
            let i2 = usize::from(ch.b[1] + 2 * ch.a[1]);
            let prod = Complex::with_val(p + 16, &a.values[i1] * &b.values[i2]);
            worst_diag = worst_diag.max(diff_log2(&d.values[ch.index()], &prod));
        }
    }
    let mut worst_jacobi = f64::NEG_INFINITY;
    for _ in 0..100 {
        let z = sample_f1(rng, 16.0, p);
        let t = theta_g1(&z, p).expect("series");
        let w = p + 16;
        let fourth = |v: &Complex| Complex::with_val(w, v.square_ref()).square();
        let rhs = fourth(&t.values[1]) + fourth(&t.values[2]);
        worst_jacobi = worst_jacobi.max(diff_log2(&fourth(&t.values[0]), &Complex::with_val(w, rhs)));
    }
    Outcome {
        pass: nonzero_odd == 0 && worst_diag <= bound && worst_jacobi <= bound,
        detail: format!(
            "{nonzero_odd} nonzero odd values, diagonal log2 gap {worst_diag:.1}, Jacobi {worst_jacobi:.1} (bound {bound})"
        ),
    }
}

fn best_of<F: FnMut()>(reps: usize, mut f: F) -> f64 {
    (0..reps)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

fn c8_timing() -> Outcome {
    let bound: f64 = std::env::var("ACCEPT_TIMING_RATIO").ok().and_then(|s| s.parse().ok()).unwrap_or(6.0);
    let precs = [1u32 << 12, 1 << 14, 1 << 16];
    let z = Tau1::from_f64(64, 0.1, 1.2).expect("tau");
    let tau = Tau2::from_f64(64, (0.1, 3.0), (-0.2, 4.0), (0.3, 1.0)).expect("tau");
    let mut newton = Vec::new();
    let mut invert = Vec::new();
    for &p in &precs {
        let zp = z.with_prec(p + 64);
        newton.push(best_of(3, || {
            theta_g1_newton(&zp, p).expect("newton");
        }));
        let q = ThetaQuotients2::from_theta(&theta_all(&tau.with_prec(p + 64), p).expect("series"));
        invert.push(best_of(3, || {
            recover_tau(&q, p).expect("inversion");
        }));
    }
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, times) in [("g1-newton", &newton), ("g2-invert", &invert)] {
        for i in 0..2 {
            let r = times[i + 1] / times[i];
            pass &= r <= bound;
            lines.push(format!("{name} t({})/t({}) = {r:.2}", precs[i + 1], precs[i]));
        }
    }
    Outcome { pass, detail: format!("{} (bound {bound})", lines.join(", ")) }
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut ok = true;
    let mut run = |n: usize, name: &str, soft: bool, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let out = f();
        let pass = report(n, name, soft, &out, t.elapsed());
        if !soft {
            ok &= pass;
        }
    };
    run(1, "threshold suite", false, &mut c1_constants);
    run(2, "good-position sweep", false, &mut c2_sweep);
    run(3, "duplication step", false, &mut || c3_duplication(&mut rng));
    run(4, "inversion round trip", false, &mut || c4_round_trip(&mut rng));
    run(5, "transformation formula", false, &mut || c5_transform(&mut rng));
    run(6, "cusp bound lemmas", false, &mut || c6_bounds(&mut rng));
    run(7, "structural identities", false, &mut || c7_structure(&mut rng));
    run(8, "quasi-linear timing", true, &mut c8_timing);
    if !ok {
        std::process::exit(1);
    }
}
