//! Text format for theta quotients.
//!
//! One entry per line, `#` starts a comment:
//!
//! ```text
//! # genus 2: squared quotients theta_j^2/theta_0^2 for the even j
//! 0 1
//! 1 0.93+0.01i
//! ...
//! root15 0.002-0.001i
//! ```
//!
//! `root15` (unsquared `theta_15/theta_0`) is optional and fixes the sign of
//! `z3`. Genus 1 files hold the single line `1 <theta_01^2/theta_00^2>`.

use rug::Complex;
use siegel_theta::inversion::ThetaQuotients2;
use siegel_theta::symplectic::ThetaChar;
use siegel_theta::text::{digits_for_prec, format_complex, parse_complex};
use siegel_theta::{Error, Result};

pub struct Parsed {
    pub entries: Vec<(usize, Complex)>,
    pub root15: Option<Complex>,
}

pub fn parse(text: &str, prec: u32) -> Result<Parsed> {
    let mut entries = Vec::new();
    let mut root15 = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Parse(format!("line {}: {msg}", lineno + 1));
        let mut it = line.split_whitespace();
        let key = it.next().ok_or_else(|| bad("empty"))?;
        let val = it.next().ok_or_else(|| bad("missing value"))?;
        if it.next().is_some() {
            return Err(bad("trailing tokens"));
        }
        let v = parse_complex(val, prec).map_err(|e| bad(&e.to_string()))?;
        if key == "root15" {
            if root15.replace(v).is_some() {
                return Err(bad("duplicate root15"));
            }
            continue;
        }
        let j: usize = key.parse().map_err(|_| bad("index is not an integer"))?;
        if entries.iter().any(|(k, _)| *k == j) {
            return Err(bad("duplicate index"));
        }
        entries.push((j, v));
    }
    Ok(Parsed { entries, root15 })
}

pub fn genus2(text: &str, prec: u32) -> Result<ThetaQuotients2> {
    let p = parse(text, prec)?;
    ThetaQuotients2::from_even(&p.entries, prec, p.root15).map_err(|e| match e {
        Error::InvalidArgument(m) => Error::Parse(m),
        e => e,
    })
}

pub fn genus1(text: &str, prec: u32) -> Result<Complex> {
    let p = parse(text, prec)?;
    if p.root15.is_some() {
        return Err(Error::Parse("root15 is not a genus-1 entry".into()));
    }
    let mut q = None;
    for (j, v) in p.entries {
        match j {
            0 if v == 1 => {}
            1 => q = Some(v),
            _ => return Err(Error::Parse(format!("unexpected genus-1 index {j}"))),
        }
    }
    q.ok_or_else(|| Error::Parse("missing entry 1".into()))
}

pub fn write_genus2(q: &ThetaQuotients2) -> String {
    let digits = digits_for_prec(q.prec);
    let mut s = String::from("# theta_j^2/theta_0^2\n");
    for ch in ThetaChar::even() {
        let j = ch.index();
        s.push_str(&format!("{j} {}\n", format_complex(&q.values[j], digits)));
    }
    if let Some(r) = &q.root15 {
        s.push_str(&format!("root15 {}\n", format_complex(r, digits)));
    }
    s
}

pub fn write_genus1(q: &Complex, prec: u32) -> String {
    format!("# theta_01^2/theta_00^2\n0 1\n1 {}\n", format_complex(q, digits_for_prec(prec)))
}
