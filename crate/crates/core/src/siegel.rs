//! Period matrices in genus 1 and 2, the domain F' and the derived
//! quantities `x_j`, `y_j`, `q_j`, `lambda_1` and `r`.

use std::fmt;
use std::str::FromStr;

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::numerics::{cprec, pi};
use crate::text::{format_complex_exact, parse_complex};

/// A point of the upper half plane.
#[derive(Clone, Debug, PartialEq)]
pub struct Tau1 {
    z: Complex,
}

impl Tau1 {
    pub fn new(z: Complex) -> Result<Self> {
        if !z.imag().is_sign_positive() || z.imag().is_zero() || !z.imag().is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Tau1 { z })
    }

    pub fn from_f64(prec: u32, x: f64, y: f64) -> Result<Self> {
        Self::new(Complex::with_val(prec, (x, y)))
    }

    pub fn z(&self) -> &Complex {
        &self.z
    }

    pub fn prec(&self) -> u32 {
        cprec(&self.z)
    }

    pub fn with_prec(&self, prec: u32) -> Tau1 {
        Tau1 { z: Complex::with_val(prec, &self.z) }
    }

    /// `exp(-pi y)`.
    pub fn q(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, -(pi(p) * self.z.imag())).exp()
    }

    /// `|x| <= 1/2` and `|z| >= 1`, with tolerance `2^(-p/2)`.
    pub fn in_f1(&self) -> bool {
        let eps = tolerance(self.prec());
        let x = self.z.real().to_f64().abs();
        let n = Float::with_val(self.prec(), self.z.norm_ref());
        x <= 0.5 + eps && n.to_f64() >= 1.0 - eps
    }
}

impl fmt::Display for Tau1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_complex_exact(&self.z))
    }
}

/// A symmetric 2x2 period matrix `[[z1, z3], [z3, z2]]` with positive
/// definite imaginary part.
#[derive(Clone, Debug, PartialEq)]
pub struct Tau2 {
    z: [Complex; 3],
}

fn tolerance(prec: u32) -> f64 {
    2f64.powf(-(f64::from(prec) / 2.0))
}

impl Tau2 {
    /// Build from the three entries; all are brought to the largest of
    /// their precisions.
    pub fn new(z1: Complex, z2: Complex, z3: Complex) -> Result<Self> {
        let p = cprec(&z1).max(cprec(&z2)).max(cprec(&z3));
        let t = Tau2 {
            z: [Complex::with_val(p, z1), Complex::with_val(p, z2), Complex::with_val(p, z3)],
        };
        let y1 = t.y(1);
        if !(y1.is_finite() && y1 > 0) {
            return Err(Error::NotPositiveDefinite);
        }
        let d = t.im_det();
        if !(d.is_finite() && d > 0) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(t)
    }

    /// Build from `(x_j, y_j)` pairs given as doubles.
    pub fn from_f64(prec: u32, z1: (f64, f64), z2: (f64, f64), z3: (f64, f64)) -> Result<Self> {
        Self::new(
            Complex::with_val(prec, z1),
            Complex::with_val(prec, z2),
            Complex::with_val(prec, z3),
        )
    }

    /// `i * I_2` at the given precision.
    pub fn identity_i(prec: u32) -> Self {
        Self::from_f64(prec, (0.0, 1.0), (0.0, 1.0), (0.0, 0.0)).expect("i*I is in H_2")
    }

    pub fn z1(&self) -> &Complex {
        &self.z[0]
    }

    pub fn z2(&self) -> &Complex {
        &self.z[1]
    }

    pub fn z3(&self) -> &Complex {
        &self.z[2]
    }

    /// Entry `z_j`, `j` in 1..=3.
    pub fn z(&self, j: usize) -> &Complex {
        &self.z[j - 1]
    }

    pub fn prec(&self) -> u32 {
        cprec(&self.z[0])
    }

    pub fn with_prec(&self, prec: u32) -> Tau2 {
        Tau2 { z: self.z.clone().map(|c| Complex::with_val(prec, c)) }
    }

    pub fn x(&self, j: usize) -> Float {
        self.z(j).real().clone()
    }

    pub fn y(&self, j: usize) -> Float {
        self.z(j).imag().clone()
    }

    /// `y1 y2 - y3^2`.
    pub fn im_det(&self) -> Float {
        let p = self.prec();
        let a = Float::with_val(p, self.z[0].imag() * self.z[1].imag());
        let b = Float::with_val(p, self.z[2].imag().square_ref());
        a - b
    }

    /// `exp(-pi y_j)`.
    pub fn q(&self, j: usize) -> Float {
        let p = self.prec();
        Float::with_val(p, -(pi(p) * self.z(j).imag())).exp()
    }

    /// Smallest eigenvalue of `Im(tau)`, as `det / lambda_max` to avoid
    /// cancellation.
    pub fn lambda1(&self) -> Float {
        let p = self.prec() + 16;
        let y1 = Float::with_val(p, self.z[0].imag());
        let y2 = Float::with_val(p, self.z[1].imag());
        let y3 = Float::with_val(p, self.z[2].imag());
        let half_tr = Float::with_val(p, &y1 + &y2) / 2u32;
        let half_diff = Float::with_val(p, &y1 - &y2) / 2u32;
        let disc = (Float::with_val(p, half_diff.square_ref()) + Float::with_val(p, y3.square_ref())).sqrt();
        let lmax = half_tr + disc;
        let det = Float::with_val(p, &y1 * &y2) - y3.square();
        Float::with_val(self.prec(), det / lmax)
    }

    /// `min(lambda_1, y1/2, y2/2)`.
    pub fn r_value(&self) -> Float {
        let l = self.lambda1();
        let h1 = Float::with_val(self.prec(), self.z[0].imag() / 2u32);
        let h2 = Float::with_val(self.prec(), self.z[1].imag() / 2u32);
        l.min(&h1).min(&h2)
    }

    /// Membership in F' with the default tolerance `2^(-p/2)`.
    pub fn in_fprime(&self) -> bool {
        self.in_fprime_tol(tolerance(self.prec()))
    }

    /// Membership in F': `|x_j| <= 1/2`, `2|y3| <= y1 <= y2`,
    /// `y1 >= sqrt(3)/2`, `|z1|, |z2| >= 1`. Each inequality may be violated
    /// by at most `eps`, so points on the (closed) boundary are members.
    pub fn in_fprime_tol(&self, eps: f64) -> bool {
        let p = self.prec();
        let half = Float::with_val(p, 0.5) + eps;
        for j in 1..=3 {
            if Float::with_val(p, &*self.z(j).real().as_abs()) > half {
                return false;
            }
        }
        let y1 = self.y(1);
        let y2 = self.y(2);
        let y3 = Float::with_val(p, &*self.z[2].imag().as_abs()) * 2u32;
        if y3 > Float::with_val(p, &y1 + eps) || y1 > Float::with_val(p, &y2 + eps) {
            return false;
        }
        let s3 = Float::with_val(p, 3).sqrt() / 2u32 - eps;
        if y1 < s3 {
            return false;
        }
        let one = Float::with_val(p, 1) - eps;
        for j in 1..=2 {
            if Float::with_val(p, self.z(j).abs_ref()) < one {
                return false;
            }
        }
        true
    }

    /// Entrywise multiplication by `2^n`; exact.
    pub fn scale(&self, n: i32) -> Tau2 {
        Tau2 { z: self.z.clone().map(|c| c << n) }
    }

    /// Parse `z1;z2;z3` at `prec` bits.
    pub fn parse(s: &str, prec: u32) -> Result<Tau2> {
        let parts: Vec<&str> = s.split(';').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected z1;z2;z3, got {s:?}")));
        }
        let z1 = parse_complex(parts[0], prec)?;
        let z2 = parse_complex(parts[1], prec)?;
        let z3 = parse_complex(parts[2], prec)?;
        Tau2::new(z1, z2, z3)
    }

    /// Largest entrywise distance `|z_j - w_j|`, at 64 bits.
    pub fn max_dist(&self, other: &Tau2) -> f64 {
        (1..=3)
            .map(|j| {
                let d = Complex::with_val(self.prec().max(other.prec()), self.z(j) - other.z(j));
                Float::with_val(64, d.abs_ref()).to_f64()
            })
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for Tau2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{};{};{}",
            format_complex_exact(&self.z[0]),
            format_complex_exact(&self.z[1]),
            format_complex_exact(&self.z[2])
        )
    }
}

impl FromStr for Tau2 {
    type Err = Error;

    /// Parses at 128 bits; use [`Tau2::parse`] for other precisions.
    fn from_str(s: &str) -> Result<Self> {
        Tau2::parse(s, 128)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 128;
    const S3: f64 = 0.866_025_403_784_438_6;

    fn t(z1: (f64, f64), z2: (f64, f64), z3: (f64, f64)) -> Tau2 {
        Tau2::from_f64(P, z1, z2, z3).unwrap()
    }

    #[test]
    fn q_values() {
        let tau = Tau2::identity_i(P);
        assert!((tau.q(1).to_f64() - (-std::f64::consts::PI).exp()).abs() < 1e-16);
        assert!((tau.q(1).to_f64() - 0.043_213_918_263_772_25).abs() < 1e-16);
        let tau = t((0.0, S3), (0.0, 2.0), (0.0, 0.0));
        assert!((tau.q(1).to_f64() - 0.065_828_721_011_296_65).abs() < 1e-12);
        assert_eq!(tau.q(3).to_f64(), 1.0);
    }

    #[test]
    fn lambda1_examples() {
        assert_eq!(Tau2::identity_i(P).lambda1().to_f64(), 1.0);
        assert_eq!(t((0.0, 1.0), (0.0, 2.0), (0.0, 0.0)).lambda1().to_f64(), 1.0);
        let l = t((0.0, 2.0), (0.0, 2.0), (0.0, 1.0)).lambda1().to_f64();
        assert!((l - 1.0).abs() < 1e-30);
    }

    #[test]
    fn r_examples() {
        assert_eq!(Tau2::identity_i(P).r_value().to_f64(), 0.5);
        let r = t((0.3, S3), (0.0, 10.0), (0.2, 0.0)).r_value().to_f64();
        assert!((r - S3 / 2.0).abs() < 1e-15);
        assert_eq!(Tau2::identity_i(P).scale(1).r_value().to_f64(), 1.0);
    }

    #[test]
    fn fprime_examples() {
        assert!(Tau2::identity_i(P).in_fprime());
        assert!(!t((0.0, S3), (0.0, S3), (0.0, 0.0)).in_fprime());
        assert!(t((0.5, 1.0), (0.0, 2.0), (0.0, 0.3)).in_fprime());
        assert!(!t((0.6, 1.0), (0.0, 2.0), (0.0, 0.3)).in_fprime());
        assert!(!t((0.0, 2.0), (0.0, 1.5), (0.0, 0.3)).in_fprime());
        assert!(!t((0.0, 1.0), (0.0, 2.0), (0.0, 0.51)).in_fprime());
    }

    #[test]
    fn scale_is_exact() {
        let tau = t((0.1, 1.1), (-0.2, 1.3), (0.05, 0.2));
        let s = tau.scale(3);
        assert_eq!(s.scale(-3), tau);
        let r = tau.r_value() << 3i32;
        assert_eq!(s.r_value(), r);
        assert_eq!(tau.scale(0), tau);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(Tau2::from_f64(P, (0.0, 1.0), (0.0, 1.0), (0.0, 1.0)).is_err());
        assert!(Tau2::from_f64(P, (0.0, -1.0), (0.0, 1.0), (0.0, 0.0)).is_err());
        assert!(Tau1::from_f64(P, 0.0, 0.0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let tau = Tau2::parse("0.5+1i;2i;0.3i", P).unwrap();
        assert_eq!(tau.y(3).to_f64(), Float::with_val(P, Float::parse("0.3").unwrap()).to_f64());
        let again = Tau2::parse(&tau.to_string(), P).unwrap();
        assert_eq!(again, tau);
        assert!(Tau2::parse("1i;1i", P).is_err());
    }
}
