//! `siegel-theta`: theta constants, inversion, certification and timings.
//!
//! Exit codes: 0 success, 1 failed check, 2 parse error, 3 domain
//! rejection, 4 Borchardt failure.

mod quotients;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rug::Complex;
use serde_json::{json, Value};
use siegel_theta::certifier::{report_json, report_text, sweep, verify_constants, SweepConfig};
use siegel_theta::inversion::{
    quotient_g1, recover_tau_g1, recover_tau_with_radius, theta_g1_newton, ThetaQuotients2,
};
use siegel_theta::numerics::ErrRadius;
use siegel_theta::text::{digits_for_prec, format_complex, format_float, parse_complex};
use siegel_theta::theta::{theta_all, theta_g1, VALUE_GUARD};
use siegel_theta::{Error, Tau1, Tau2};

const MIN_PREC: u32 = 64;
const MAX_PREC: u32 = 1 << 24;

#[derive(Parser)]
#[command(name = "siegel-theta", version, about = "Theta constants and Borchardt means in arbitrary precision")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Series,
    Newton,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate theta constants at tau.
    Theta {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        genus: u8,
        /// "z" for genus 1, "z1;z2;z3" for genus 2.
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
        #[arg(long, default_value_t = 128)]
        prec: u32,
        #[arg(long)]
        json: bool,
        /// Genus 1 only.
        #[arg(long, value_enum, default_value_t = Method::Series)]
        method: Method,
        /// Print squared quotients in the format read by `invert`.
        #[arg(long)]
        quotients: bool,
    },
    /// Recover tau from theta quotients.
    Invert {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        genus: u8,
        #[arg(long)]
        quotients: PathBuf,
        #[arg(long, default_value_t = 128)]
        prec: u32,
        #[arg(long)]
        json: bool,
    },
    /// Check the threshold inequalities and sweep F' for good position.
    Certify {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 128)]
        prec: u32,
        #[arg(long, default_value_t = 1024.0)]
        ymax: f64,
        #[arg(long)]
        constants_only: bool,
        /// Skip the boundary battery.
        #[arg(long)]
        no_corners: bool,
        /// Write the JSON report here (the text report goes to stdout).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Print the JSON report instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Wall-clock timings as CSV.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "1024,4096,16384,65536")]
        prec_list: Vec<u32>,
        /// Restrict to one genus.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        genus: Option<u8>,
        /// Repetitions per cell; the minimum is reported.
        #[arg(long, default_value_t = 1)]
        reps: u32,
        /// Soft bound on time(4p)/time(p), reported on stderr.
        #[arg(long, default_value_t = 6.0)]
        ratio: f64,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) | Error::InvalidArgument(_) => 2,
            Error::LambdaBelowFloor { .. } | Error::NotPositiveDefinite => 3,
            e if e.is_borchardt() => 4,
            _ => 1,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure { code, msg: msg.into() }
}

fn check_prec(p: u32) -> Result<(), Failure> {
    if (MIN_PREC..=MAX_PREC).contains(&p) {
        Ok(())
    } else {
        Err(fail(2, format!("precision {p} outside [{MIN_PREC}, {MAX_PREC}]")))
    }
}

fn radius_str(r: &ErrRadius) -> String {
    format_float(r.as_float(), 8)
}

fn cmd_theta(genus: u8, tau: &str, prec: u32, json_out: bool, method: Method, quot: bool) -> Result<String, Failure> {
    check_prec(prec)?;
    let digits = digits_for_prec(prec + VALUE_GUARD);
    if genus == 1 {
        let z = Tau1::new(parse_complex(tau, prec)?)?;
        let t = theta_g1(&z, prec)?;
        if quot {
            return Ok(quotients::write_genus1(&quotient_g1(&t), prec + VALUE_GUARD));
        }
        let names = ["theta00", "theta01", "theta10", "theta11"];
        let (vals, radii, squares): (Vec<Complex>, Vec<String>, bool) = match method {
            Method::Series => (t.values.to_vec(), t.radii.iter().map(radius_str).collect(), false),
            Method::Newton => {
                let sq = theta_g1_newton(&z, prec)?;
                // Newton output is a value, not a certified ball.
                (sq.to_vec(), vec!["-".into(); 4], true)
            }
        };
        return Ok(render(&names.map(|n| if squares { format!("{n}^2") } else { n.to_string() }), &vals, &radii, digits, json_out, &z.to_string(), prec));
    }
    if method == Method::Newton {
        return Err(fail(2, "--method newton is only available in genus 1"));
    }
    let t2 = Tau2::parse(tau, prec)?;
    let t = theta_all(&t2, prec)?;
    if quot {
        return Ok(quotients::write_genus2(&ThetaQuotients2::from_theta(&t)));
    }
    let names: Vec<String> = (0..16).map(|j| format!("theta{j}")).collect();
    let radii: Vec<String> = t.radii.iter().map(radius_str).collect();
    Ok(render(&names, &t.values, &radii, digits, json_out, &t2.to_string(), prec))
}

fn render(names: &[String], vals: &[Complex], radii: &[String], digits: usize, json_out: bool, tau: &str, prec: u32) -> String {
    if json_out {
        let values: Vec<Value> = names
            .iter()
            .zip(vals)
            .zip(radii)
            .enumerate()
            .map(|(j, ((n, v), r))| json!({ "index": j, "name": n, "value": format_complex(v, digits), "radius": r }))
            .collect();
        return format!("{}\n", json!({ "tau": tau, "prec": prec, "values": values }));
    }
    let mut s = String::new();
    for ((n, v), r) in names.iter().zip(vals).zip(radii) {
        s.push_str(&format!("{n} {} radius {r}\n", format_complex(v, digits)));
    }
    s
}

fn cmd_invert(genus: u8, path: &PathBuf, prec: u32, json_out: bool) -> Result<String, Failure> {
    check_prec(prec)?;
    let text = fs::read_to_string(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
    let (tau, radius) = if genus == 1 {
        let q = quotients::genus1(&text, prec + VALUE_GUARD)?;
        (recover_tau_g1(&q, prec)?.to_string(), None)
    } else {
        let q = quotients::genus2(&text, prec + VALUE_GUARD)?;
        let r = recover_tau_with_radius(&q, prec)?;
        (r.tau.to_string(), Some(radius_str(&r.radius)))
    };
    if json_out {
        return Ok(format!("{}\n", json!({ "tau": tau, "prec": prec, "radius": radius })));
    }
    let mut s = format!("tau {tau}\n");
    if let Some(r) = radius {
        s.push_str(&format!("radius {r}\n"));
    }
    Ok(s)
}

#[allow(clippy::too_many_arguments)]
fn cmd_certify(
    samples: usize,
    seed: u64,
    prec: u32,
    ymax: f64,
    constants_only: bool,
    corners: bool,
    output: Option<&PathBuf>,
    json_out: bool,
) -> Result<(String, bool), Failure> {
    check_prec(prec)?;
    if !(ymax >= 3f64.sqrt() / 2.0) {
        return Err(fail(2, "--ymax must be at least sqrt(3)/2"));
    }
    let checks = verify_constants();
    let summary = if constants_only {
        None
    } else {
        Some(sweep(&SweepConfig { samples, seed, prec, y_max: ymax, corners }))
    };
    let ok = checks.iter().all(|c| c.pass()) && summary.as_ref().map_or(true, |s| s.failures == 0);
    let js = report_json(&checks, summary.as_ref());
    if let Some(path) = output {
        let body = serde_json::to_string_pretty(&js).expect("report serializes");
        fs::write(path, body + "\n").map_err(|e| fail(1, format!("{}: {e}", path.display())))?;
    }
    let out = if json_out { format!("{js}\n") } else { report_text(&checks, summary.as_ref()) };
    Ok((out, ok))
}

fn time_min<F: FnMut() -> Result<(), Error>>(reps: u32, mut f: F) -> Result<f64, Failure> {
    let mut best = f64::INFINITY;
    for _ in 0..reps.max(1) {
        let t = Instant::now();
        f()?;
        best = best.min(t.elapsed().as_secs_f64());
    }
    Ok(best)
}

fn cmd_bench(prec_list: &[u32], genus: Option<u8>, reps: u32, ratio: f64) -> Result<String, Failure> {
    for &p in prec_list {
        check_prec(p)?;
    }
    let mut rows: Vec<(&'static str, u32, f64)> = Vec::new();
    let z1 = Tau1::from_f64(64, 0.3, 1.2)?;
    let t2 = Tau2::from_f64(64, (0.5, 1.0), (0.0, 2.0), (0.0, 0.3))?;
    for &p in prec_list {
        if genus != Some(2) {
            let z = z1.with_prec(p);
            rows.push(("g1-series", p, time_min(reps, || theta_g1(&z, p).map(|_| ()))?));
            rows.push(("g1-newton", p, time_min(reps, || theta_g1_newton(&z, p).map(|_| ()))?));
        }
        if genus != Some(1) {
            let tau = t2.with_prec(p);
            let q = ThetaQuotients2::from_theta(&theta_all(&tau, p)?);
            rows.push(("g2-series", p, time_min(reps, || theta_all(&tau, p).map(|_| ()))?));
            rows.push(("g2-invert", p, time_min(reps, || recover_tau_with_radius(&q, p).map(|_| ()))?));
        }
    }
    let mut s = String::from("method,prec,seconds\n");
    for (m, p, t) in &rows {
        s.push_str(&format!("{m},{p},{t:.6}\n"));
    }
    for method in ["g1-newton", "g2-invert"] {
        for (m, p, t) in &rows {
            if *m != method {
                continue;
            }
            if let Some((_, _, t4)) = rows.iter().find(|(m2, p2, _)| *m2 == method && *p2 == 4 * p) {
                let r = t4 / t.max(1e-9);
                let tag = if r <= ratio { "PASS" } else { "FAIL" };
                eprintln!("{tag} {method} time({})/time({p}) = {r:.2} (bound {ratio})", 4 * p);
            }
        }
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.cmd {
        Cmd::Theta { genus, tau, prec, json, method, quotients } => {
            print!("{}", cmd_theta(genus, &tau, prec, json, method, quotients)?);
            Ok(true)
        }
        Cmd::Invert { genus, quotients, prec, json } => {
            print!("{}", cmd_invert(genus, &quotients, prec, json)?);
            Ok(true)
        }
        Cmd::Certify { samples, seed, prec, ymax, constants_only, no_corners, output, json } => {
            let (out, ok) = cmd_certify(samples, seed, prec, ymax, constants_only, !no_corners, output.as_ref(), json)?;
            print!("{out}");
            Ok(ok)
        }
        Cmd::Bench { prec_list, genus, reps, ratio } => {
            print!("{}", cmd_bench(&prec_list, genus, reps, ratio)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
