//! Integer symplectic matrices, their action on the Siegel half space, the
//! matrices `gamma_k` and `eta_k^(n)`, and the transformation formula for
//! theta constants.

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::numerics::{cabs, principal_sqrt, zeta8, ErrRadius};
use crate::siegel::Tau2;
use crate::theta::{theta_all, ThetaVec};

type IMat2 = [[i64; 2]; 2];

/// A 4x4 integer matrix `[[A, B], [C, D]]` with 2x2 blocks.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SympMat {
    m: [[i64; 4]; 4],
}

impl fmt::Debug for SympMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SympMat{:?}", self.m)
    }
}

impl SympMat {
    /// Wrap the rows, checking the symplectic relations.
    pub fn new(m: [[i64; 4]; 4]) -> Result<Self> {
        let s = SympMat { m };
        if s.is_symplectic() {
            Ok(s)
        } else {
            Err(Error::InvalidArgument(format!("not symplectic: {m:?}")))
        }
    }

    fn from_blocks(a: IMat2, b: IMat2, c: IMat2, d: IMat2) -> Self {
        let mut m = [[0i64; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a[i][j];
                m[i][j + 2] = b[i][j];
                m[i + 2][j] = c[i][j];
                m[i + 2][j + 2] = d[i][j];
            }
        }
        SympMat { m }
    }

    pub fn identity() -> Self {
        let mut m = [[0i64; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1;
        }
        SympMat { m }
    }

    pub fn rows(&self) -> &[[i64; 4]; 4] {
        &self.m
    }

    fn block(&self, bi: usize, bj: usize) -> IMat2 {
        let (r, c) = (2 * bi, 2 * bj);
        [[self.m[r][c], self.m[r][c + 1]], [self.m[r + 1][c], self.m[r + 1][c + 1]]]
    }

    pub fn a(&self) -> IMat2 {
        self.block(0, 0)
    }

    pub fn b(&self) -> IMat2 {
        self.block(0, 1)
    }

    pub fn c(&self) -> IMat2 {
        self.block(1, 0)
    }

    pub fn d(&self) -> IMat2 {
        self.block(1, 1)
    }

    pub fn mul(&self, o: &SympMat) -> SympMat {
        let mut m = [[0i64; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (0..4).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        SympMat { m }
    }

    pub fn transpose(&self) -> SympMat {
        let mut m = [[0i64; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.m[j][i];
            }
        }
        SympMat { m }
    }

    /// Inverse of a symplectic matrix, `[[D^t, -B^t], [-C^t, A^t]]`.
    pub fn inverse(&self) -> SympMat {
        let neg = |x: IMat2| x.map(|r| r.map(|v| -v));
        SympMat::from_blocks(t2(self.d()), neg(t2(self.b())), neg(t2(self.c())), t2(self.a()))
    }

    /// `M^t J M = J` for `J = [[0, I], [-I, 0]]`.
    pub fn is_symplectic(&self) -> bool {
        let j = SympMat::from_blocks([[0, 0], [0, 0]], [[1, 0], [0, 1]], [[-1, 0], [0, -1]], [[0, 0], [0, 0]]);
        self.transpose().mul(&j).mul(self) == j
    }
}

fn t2(x: IMat2) -> IMat2 {
    [[x[0][0], x[1][0]], [x[0][1], x[1][1]]]
}

fn mul2(x: IMat2, y: IMat2) -> IMat2 {
    let mut r = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    r
}

const S_MATS: [IMat2; 4] = [[[0, 0], [0, 0]], [[1, 0], [0, 0]], [[0, 0], [0, 1]], [[0, 1], [1, 0]]];

/// `gamma_0 = I_4` and `gamma_k = [[-I, -S_k], [S_k, -I + S_k^2]]`.
pub fn gamma(k: usize) -> SympMat {
    assert!(k <= 3, "gamma index {k} out of range");
    if k == 0 {
        return SympMat::identity();
    }
    let s = S_MATS[k];
    let s2 = mul2(s, s);
    let neg_i = [[-1, 0], [0, -1]];
    let d = [[s2[0][0] - 1, s2[0][1]], [s2[1][0], s2[1][1] - 1]];
    SympMat::from_blocks(neg_i, s.map(|r| r.map(|v| -v)), s, d)
}

/// The matrices `eta_k^(n)`, `k` in 1..=4, which send `2^n gamma_k tau` to
/// the closed forms of [`tau_kn`] (`eta_4` pairs with `gamma_3`).
pub fn eta(k: usize, n: u32) -> SympMat {
    assert!(n < 62, "eta exponent {n} out of range");
    let big = 1i64 << n;
    match k {
        1 => SympMat { m: [[0, 0, -1, 0], [0, 1, 0, 0], [1, 0, big, 0], [0, 0, 0, 1]] },
        2 => SympMat { m: [[1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, big]] },
        3 => SympMat { m: [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, big, 0], [1, 0, 0, big]] },
        4 => {
            let f = SympMat { m: [[0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1]] };
            f.mul(&eta(3, n))
        }
        _ => panic!("eta index {k} out of range"),
    }
}

/// Theta characteristic `(a, b)` with index `j = b0 + 2 b1 + 4 a0 + 8 a1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ThetaChar {
    pub a: [u8; 2],
    pub b: [u8; 2],
}

/// Indices of the six odd characteristics.
pub const ODD_INDICES: [usize; 6] = [5, 7, 10, 11, 13, 14];

impl ThetaChar {
    pub fn from_index(j: usize) -> ThetaChar {
        assert!(j < 16, "characteristic index {j} out of range");
        let bit = |s: usize| ((j >> s) & 1) as u8;
        ThetaChar { a: [bit(2), bit(3)], b: [bit(0), bit(1)] }
    }

    pub fn index(&self) -> usize {
        (self.b[0] + 2 * self.b[1] + 4 * self.a[0] + 8 * self.a[1]) as usize
    }

    pub fn is_even(&self) -> bool {
        (self.a[0] * self.b[0] + self.a[1] * self.b[1]) % 2 == 0
    }

    pub fn all() -> impl Iterator<Item = ThetaChar> {
        (0..16).map(ThetaChar::from_index)
    }

    pub fn even() -> impl Iterator<Item = ThetaChar> {
        Self::all().filter(|c| c.is_even())
    }
}

/// Image of a characteristic under the transformation formula:
/// `theta_{a,b}(gamma tau) ~ zeta_8^epsilon theta_{a',b'}(tau)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CharImage {
    pub target: ThetaChar,
    pub epsilon: u8,
}

/// Full transformation data of one characteristic at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformData {
    pub target: ThetaChar,
    pub epsilon: u8,
    /// `kappa(gamma) = zeta_8^kappa` for the principal branch of the root.
    pub kappa: u8,
    /// `det(C tau + D)`.
    pub cocycle: Complex,
}

/// Characteristic map and eighth-root exponent of the transformation formula.
///
/// `(alpha; beta) = gamma^t (a - (C D^t)_0 ; b - (A B^t)_0)`, and `epsilon` is
/// the integer expression in `alpha, beta` plus the sign picked up when
/// `beta` is reduced mod 2 (`theta_{a, b + 2d} = (-1)^{a^t d} theta_{a,b}`).
pub fn transform_char(g: &SympMat, ch: ThetaChar) -> CharImage {
    let (a, b, c, d) = (g.a(), g.b(), g.c(), g.d());
    let cd = mul2(c, t2(d));
    let ab = mul2(a, t2(b));
    let v = [
        i64::from(ch.a[0]) - cd[0][0],
        i64::from(ch.a[1]) - cd[1][1],
        i64::from(ch.b[0]) - ab[0][0],
        i64::from(ch.b[1]) - ab[1][1],
    ];
    let gt = g.transpose();
    let mut w = [0i64; 4];
    for (i, e) in w.iter_mut().enumerate() {
        *e = (0..4).map(|k| gt.m[i][k] * v[k]).sum();
    }
    let al = [w[0], w[1]];
    let be = [w[2], w[3]];
    let mv = |m: IMat2, x: [i64; 2]| [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]];
    let dot = |x: [i64; 2], y: [i64; 2]| x[0] * y[0] + x[1] * y[1];
    let b_al = mv(b, al);
    let c_be = mv(c, be);
    let d_al = mv(d, al);
    let a_be = mv(a, be);
    let ab0 = [ab[0][0], ab[1][1]];
    let mut eps = 2 * dot(b_al, c_be) - dot(d_al, b_al) - dot(c_be, a_be)
        + 2 * dot(ab0, [d_al[0] - c_be[0], d_al[1] - c_be[1]]);
    let a2 = al.map(|x| x.rem_euclid(2));
    let b2 = be.map(|x| x.rem_euclid(2));
    eps += 4 * dot(a2, [(be[0] - b2[0]) / 2, (be[1] - b2[1]) / 2]);
    CharImage {
        target: ThetaChar { a: [a2[0] as u8, a2[1] as u8], b: [b2[0] as u8, b2[1] as u8] },
        epsilon: eps.rem_euclid(8) as u8,
    }
}

type CMat2 = [[Complex; 2]; 2];

fn tau_matrix(tau: &Tau2, p: u32) -> CMat2 {
    let z1 = Complex::with_val(p, tau.z1());
    let z2 = Complex::with_val(p, tau.z2());
    let z3 = Complex::with_val(p, tau.z3());
    [[z1, z3.clone()], [z3, z2]]
}

/// `X tau + Y` for integer blocks `X, Y`.
fn affine(p: u32, x: IMat2, t: &CMat2, y: IMat2) -> CMat2 {
    let entry = |i: usize, j: usize| {
        let mut s = Complex::with_val(p, &t[0][j] * Float::with_val(64, x[i][0]));
        s += Complex::with_val(p, &t[1][j] * Float::with_val(64, x[i][1]));
        s += Float::with_val(64, y[i][j]);
        s
    };
    [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]]
}

fn det2(p: u32, m: &CMat2) -> Complex {
    let a = Complex::with_val(p, &m[0][0] * &m[1][1]);
    let b = Complex::with_val(p, &m[0][1] * &m[1][0]);
    a - b
}

/// `det(C tau + D)`.
pub fn cocycle(g: &SympMat, tau: &Tau2) -> Complex {
    let p = tau.prec();
    let t = tau_matrix(tau, p + 32);
    Complex::with_val(p, det2(p + 32, &affine(p + 32, g.c(), &t, g.d())))
}

/// `(A tau + B)(C tau + D)^(-1)`, symmetrized, at the precision of `tau`.
pub fn act(g: &SympMat, tau: &Tau2) -> Result<Tau2> {
    let p = tau.prec();
    let w = p + 32;
    let t = tau_matrix(tau, w);
    let num = affine(w, g.a(), &t, g.b());
    let den = affine(w, g.c(), &t, g.d());
    let det = det2(w, &den);
    if det.is_zero() {
        return Err(Error::NotPositiveDefinite);
    }
    // num * adj(den) / det
    let adj = [
        [den[1][1].clone(), Complex::with_val(w, -&den[0][1])],
        [Complex::with_val(w, -&den[1][0]), den[0][0].clone()],
    ];
    let prod = |i: usize, j: usize| {
        let mut s = Complex::with_val(w, &num[i][0] * &adj[0][j]);
        s += Complex::with_val(w, &num[i][1] * &adj[1][j]);
        s / &det
    };
    let z1 = prod(0, 0);
    let z2 = prod(1, 1);
    let z3 = (prod(0, 1) + prod(1, 0)) / 2u32;
    Tau2::new(
        Complex::with_val(p, z1),
        Complex::with_val(p, z2),
        Complex::with_val(p, z3),
    )
}

/// Closed form of `tau_k^(n) = eta_k^(n)(2^n gamma_k tau)`.
pub fn tau_kn(tau: &Tau2, k: usize, n: u32) -> Result<Tau2> {
    let n = n as i32;
    let p = tau.prec();
    let (z1, z2, z3) = (tau.z1(), tau.z2(), tau.z3());
    match k {
        1 => Tau2::new(Complex::with_val(p, z1 >> n), Complex::with_val(p, z2 << n), z3.clone()),
        2 => Tau2::new(Complex::with_val(p, z1 << n), Complex::with_val(p, z2 >> n), z3.clone()),
        3 => Ok(tau.scale(-n)),
        4 => {
            let w = p + 16;
            let inv = Complex::with_val(w, z1).recip();
            let a = -(Complex::with_val(w, &inv << n));
            let b = -(Complex::with_val(w, z3 * &inv));
            let q = Complex::with_val(w, z3.square_ref()) * &inv;
            let c = Complex::with_val(w, z2 - q) >> n;
            Tau2::new(Complex::with_val(p, a), Complex::with_val(p, c), Complex::with_val(p, b))
        }
        _ => Err(Error::InvalidArgument(format!("tau_kn index {k} out of range"))),
    }
}

/// The three inequalities satisfied by `tau_4^(n)` for `tau` in F':
/// `|y3| <= 3/2^(n+2) y1`, `y3^2 <= (3/7) y1 y2` and `|x2| <= 9/2^(n+3)`.
pub fn tau4_bounds_check(tau: &Tau2, n: u32) -> bool {
    let Ok(t4) = tau_kn(tau, 4, n) else {
        return false;
    };
    let p = t4.prec();
    let slack = Float::with_val(p, 1) + Float::with_val(p, 1) / (Float::with_val(p, 1) << (p as i32 - 16));
    let y1 = t4.y(1);
    let y2 = t4.y(2);
    let y3 = Float::with_val(p, &*t4.y(3).as_abs());
    let rhs1 = Float::with_val(p, &y1 * 3u32) >> (n as i32 + 2);
    let ok1 = y3 <= Float::with_val(p, &rhs1 * &slack);
    let lhs2 = Float::with_val(p, y3.square_ref());
    let rhs2 = Float::with_val(p, &y1 * &y2) * 3u32 / 7u32;
    let ok2 = lhs2 <= rhs2 * &slack;
    let x2 = Float::with_val(p, &*t4.x(2).as_abs());
    let rhs3 = Float::with_val(p, 9) >> (n as i32 + 3);
    let ok3 = x2 <= rhs3 * &slack;
    ok1 && ok2 && ok3
}

fn kappa_cache() -> &'static RwLock<HashMap<SympMat, u8>> {
    static CACHE: OnceLock<RwLock<HashMap<SympMat, u8>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn reference_points() -> Vec<Tau2> {
    let p = 128;
    vec![
        Tau2::identity_i(p),
        Tau2::from_f64(p, (0.1, 1.1), (-0.15, 1.4), (0.2, 0.3)).expect("valid reference point"),
        Tau2::from_f64(p, (-0.3, 1.5), (0.25, 2.0), (-0.1, 0.4)).expect("valid reference point"),
    ]
}

/// Index `k` with `kappa(gamma) = zeta_8^k`, for the principal branch of
/// `det(C tau + D)^(1/2)` at the calibration point. Calibrated numerically at
/// 64 bits and cached per matrix.
pub fn kappa_for(g: &SympMat) -> Result<u8> {
    if let Some(k) = kappa_cache().read().expect("kappa cache poisoned").get(g) {
        return Ok(*k);
    }
    let k = calibrate_kappa(g)?;
    kappa_cache().write().expect("kappa cache poisoned").insert(*g, k);
    Ok(k)
}

fn calibrate_kappa(g: &SympMat) -> Result<u8> {
    let p = 64;
    let threshold = Float::with_val(p, 1) >> 20i32;
    for tau in reference_points() {
        let Ok(gt) = act(g, &tau) else { continue };
        let (Ok(lhs), Ok(rhs)) = (theta_all(&gt, p), theta_all(&tau, p)) else { continue };
        let sq = principal_sqrt(&cocycle(g, &tau));
        // Largest |theta_{a',b'}(tau)| first.
        let mut chars: Vec<ThetaChar> = ThetaChar::even().collect();
        chars.sort_by(|x, y| {
            let ix = transform_char(g, *x).target.index();
            let iy = transform_char(g, *y).target.index();
            cabs(&rhs.values[iy], 53).partial_cmp(&cabs(&rhs.values[ix], 53)).expect("finite")
        });
        for ch in chars {
            let img = transform_char(g, ch);
            let base = &rhs.values[img.target.index()];
            if cabs(base, p) < threshold {
                continue;
            }
            let denom = Complex::with_val(p, base * &sq) * zeta8(i64::from(img.epsilon), p);
            let c = Complex::with_val(p, &lhs.values[ch.index()] / &denom);
            let arg = Float::with_val(p, c.arg_ref()).to_f64();
            let k = (arg / std::f64::consts::FRAC_PI_4).round() as i64;
            let diff = Complex::with_val(p, &c - zeta8(k, p));
            if cabs(&diff, p) < threshold {
                return Ok(k.rem_euclid(8) as u8);
            }
        }
    }
    Err(Error::KappaCalibration(format!("{g:?}")))
}

/// Transformation data for `ch` under `g` at `tau`.
pub fn transform_data(g: &SympMat, ch: ThetaChar, tau: &Tau2) -> Result<TransformData> {
    let img = transform_char(g, ch);
    Ok(TransformData {
        target: img.target,
        epsilon: img.epsilon,
        kappa: kappa_for(g)?,
        cocycle: cocycle(g, tau),
    })
}

/// Theta constants at `g tau` from theta constants at `tau`:
/// `theta_{a,b}(g tau) = kappa zeta_8^eps det(C tau + D)^(1/2) theta_{a',b'}(tau)`.
///
/// The square root is the principal one at `tau`, so absolute values can
/// differ by a global sign away from the calibration point; projective
/// tuples do not.
pub fn theta_transform(g: &SympMat, tau: &Tau2, values: &ThetaVec) -> Result<ThetaVec> {
    let p = values.prec;
    let kappa = kappa_for(g)?;
    let gt = act(g, tau)?;
    let sq = principal_sqrt(&Complex::with_val(p + 16, cocycle(g, &tau.with_prec(p + 16))));
    let sq_abs = ErrRadius::abs_of(&sq);
    let mut out = ThetaVec::zeros(gt, p);
    for ch in ThetaChar::even() {
        let img = transform_char(g, ch);
        let j = ch.index();
        let t = img.target.index();
        let factor = Complex::with_val(p + 16, &sq * zeta8(i64::from(kappa) + i64::from(img.epsilon), p + 16));
        let v = Complex::with_val(p, &values.values[t] * &factor);
        let round = ErrRadius::abs_of(&v).shift(3 - p as i32);
        out.radii[j] = values.radii[t].mul(&sq_abs).add(&round);
        out.values[j] = v;
    }
    Ok(out)
}
