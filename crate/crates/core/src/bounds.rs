//! Exponent calculus: `rho`, `rho_d`, the Madritsch-Tichy exponents, the
//! Heath-Brown k-th derivative bound, differentiation-level selectors, and
//! the decomposition / smoothing parameters with their constraint flags.

use std::fmt;

use rug::float::Round;
use rug::ops::{DivAssignRound, Pow};
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::{Interval, Real};

const WORK_PREC: u32 = 256;

/// An exponent that is exact for rational input and an enclosure otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum Exponent {
    Exact(Rational),
    Enclosed(Interval),
}

impl Exponent {
    pub fn to_f64(&self) -> f64 {
        match self {
            Exponent::Exact(q) => Float::with_val(53, q).to_f64(),
            Exponent::Enclosed(i) => i.midpoint().to_f64(),
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Exponent::Exact(q) => Some(q),
            Exponent::Enclosed(_) => None,
        }
    }

    fn div_u32(&self, d: u32) -> Self {
        match self {
            Exponent::Exact(q) => Exponent::Exact(q.clone() / d),
            Exponent::Enclosed(i) => {
                let mut lo = i.lo().clone();
                let mut hi = i.hi().clone();
                lo.div_assign_round(d, Round::Down);
                hi.div_assign_round(d, Round::Up);
                Exponent::Enclosed(Interval::from_bounds(lo, hi))
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Exact(q) => write!(f, "{q}"),
            Exponent::Enclosed(i) => write!(f, "{}", i.midpoint().to_f64()),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

/// `1 / (a t^2 + b t + c)` for `t > 1`.
fn reciprocal_quadratic(t: &Real, a: u32, b: u32, c: u32) -> Exponent {
    if let Some(q) = t.as_rational() {
        let den = Rational::from(a) * q.clone() * q + Rational::from(b) * q + c;
        return Exponent::Exact(den.recip());
    }
    let p = WORK_PREC;
    let ti = t.enclose(p);
    let k = |v: u32| Interval::from_integer(p, &Integer::from(v));
    let den = k(a).mul(&ti, p).mul(&ti, p).add(&k(b).mul(&ti, p), p).add(&k(c), p);
    // den > 0, so 1/den = [1/hi, 1/lo]
    let lo = Float::with_val_round(p, 1 / den.hi(), Round::Down).0;
    let hi = Float::with_val_round(p, 1 / den.lo(), Round::Up).0;
    Exponent::Enclosed(Interval::from_bounds(lo, hi))
}

fn check_theta(theta: &Real) -> Result<()> {
    if theta.cmp_real(&Real::from_integer(1)).is_le() {
        return Err(Error::Precondition(format!("theta must exceed 1, got {theta}")));
    }
    Ok(())
}

/// Set when `theta <= 3`, where the small-fractional-part results are not claimed.
pub fn theta_warning(theta: &Real) -> Option<String> {
    theta
        .cmp_real(&Real::from_integer(3))
        .is_le()
        .then(|| format!("theta = {theta} <= 3: outside the range where the exponent is established"))
}

/// `rho = 1 / (8 theta^2 + 12 theta + 10)`.
pub fn rho(theta: &Real) -> Result<Exponent> {
    check_theta(theta)?;
    Ok(reciprocal_quadratic(theta, 8, 12, 10))
}

/// `rho_d = rho / 3`.
pub fn rho_d(theta: &Real) -> Result<Exponent> {
    Ok(rho(theta)?.div_u32(3))
}

/// `1 / (24 c^2 + 36 c + 30)`, the closed form of `rho_d`.
pub fn rho_d_closed_form(c: &Real) -> Result<Exponent> {
    check_theta(c)?;
    Ok(reciprocal_quadratic(c, 24, 36, 30))
}

pub fn rho_f64(theta: f64) -> f64 {
    1.0 / (8.0 * theta * theta + 12.0 * theta + 10.0)
}

/// Madritsch-Tichy exponent: `1/(2(2^{ceil c + 1} - 1))` for `c > k`,
/// `1/(4^{k-1}(k+2))` for `c < k`.
pub fn rho_mt(c: &Rational, k: u32) -> Result<Rational> {
    if c.is_integer() {
        return Err(Error::Precondition(format!("c must be non-integral, got {c}")));
    }
    if k == 0 {
        return Err(Error::Precondition("k must be positive".into()));
    }
    if *c > k {
        let ceil = c.clone().ceil().into_numer_denom().0;
        let e = ceil
            .to_u32()
            .filter(|&e| e < 4096)
            .ok_or_else(|| Error::Precondition(format!("c = {c} too large")))?;
        let den: Integer = (Integer::from(2).pow(e + 1) - 1u32) * 2u32;
        Ok(Rational::from((1, den)))
    } else {
        let den: Integer = Integer::from(4).pow(k - 1) * (k + 2);
        Ok(Rational::from((1, den)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub c: f64,
    pub k: u32,
    #[serde(serialize_with = "ser_rational")]
    pub ours: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub theirs: Rational,
    pub ours_better: bool,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(q)
}

/// `first > second`; the verdict flips when the roles are swapped unless equal.
pub fn larger_exponent(first: &Rational, second: &Rational) -> bool {
    first > second
}

/// `rho_d(c)` against `rho_MT(c, k)` for `c > k`, `c` non-integral.
pub fn compare_exponents(c: &Rational, k: u32) -> Result<Comparison> {
    if *c <= k {
        return Err(Error::Precondition(format!("need c > k, got c={c}, k={k}")));
    }
    let theirs = rho_mt(c, k)?;
    let ours = rho_d_closed_form(&Real::from_rational(c.clone()))?
        .exact()
        .cloned()
        .expect("rational input");
    Ok(Comparison {
        c: Float::with_val(53, c).to_f64(),
        k,
        ours_better: larger_exponent(&ours, &theirs),
        ours,
        theirs,
    })
}

/// Compares on the grid `lo, lo+step, ...` up to `hi` (exclusive), skipping
/// integers and points not above `k`.
pub fn compare_scan(lo: &Rational, hi: &Rational, step: &Rational, k: u32) -> Result<Vec<Comparison>> {
    if *step <= 0 {
        return Err(Error::Precondition("step must be positive".into()));
    }
    let mut out = Vec::new();
    let mut c = lo.clone();
    while c < *hi {
        if !c.is_integer() && c > k {
            out.push(compare_exponents(&c, k)?);
        }
        c += step;
    }
    Ok(out)
}

/// Grid points at which the verdict changes, as `(previous c, c)` pairs.
pub fn verdict_changes(scan: &[Comparison]) -> Vec<(f64, f64)> {
    scan.windows(2)
        .filter(|w| w[0].ours_better != w[1].ours_better)
        .map(|w| (w[0].c, w[1].c))
        .collect()
}

/// Sub-intervals of `(lo, hi)` where `rho_d(c) > rho_MT(c, k)`, solving
/// `24c^2 + 36c + 30 = 2(2^{n+1} - 1)` on each `(n-1, n)` with `n > k`.
pub fn advantage_regions(lo: u32, hi: u32, k: u32) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for n in (lo.max(k) + 1)..=hi {
        let d = 2.0 * (2f64.powi(n as i32 + 1) - 1.0);
        // rho_d's denominator increases in c, so ours wins for c < c*
        let cstar = (-36.0 + (36.0f64 * 36.0 - 96.0 * (30.0 - d)).sqrt()) / 48.0;
        let a = f64::from(n - 1);
        let b = cstar.min(f64::from(n));
        if b > a {
            out.push((a, b));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HbBound {
    /// `X^{1+eps} * (t1 + t2 + t3)`.
    pub value: f64,
    pub log_value: f64,
    /// `(F X^{-k})^{1/(k(k-1))}`, `X^{-1/(k(k-1))}`, `F^{-2/(k^2(k-1))}`.
    pub terms: [f64; 3],
}

/// Heath-Brown's k-th derivative estimate, evaluated in log space.
pub fn hb_derivative_bound(f: f64, x: f64, k: u32, eps: f64) -> Result<HbBound> {
    if k < 3 {
        return Err(Error::Precondition(format!("k must be at least 3, got {k}")));
    }
    if !(f > 0.0 && x > 0.0) {
        return Err(Error::Precondition("F and X must be positive".into()));
    }
    let kf = f64::from(k);
    let (lf, lx) = (f.ln(), x.ln());
    let logs = [
        (lf - kf * lx) / (kf * (kf - 1.0)),
        -lx / (kf * (kf - 1.0)),
        -2.0 * lf / (kf * kf * (kf - 1.0)),
    ];
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_bracket = top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
    let log_value = (1.0 + eps) * lx + log_bracket;
    Ok(HbBound {
        value: log_value.exp(),
        log_value,
        terms: logs.map(f64::exp),
    })
}

/// `k = ceil(alpha / (1/2 - rho)) + 1`, valid for `alpha > 1 + 2 rho`.
pub fn k_choice_type1(alpha: &Rational, rho: &Rational) -> Result<u32> {
    let half = Rational::from((1, 2));
    if *rho < 0 || *rho >= half {
        return Err(Error::Precondition(format!("rho must lie in [0, 1/2), got {rho}")));
    }
    let floor_case = Rational::from(1) + rho.clone() * 2u32;
    if *alpha <= floor_case {
        return Err(Error::Precondition(format!(
            "alpha = {alpha} <= 1 + 2 rho: the low-alpha regime is not covered"
        )));
    }
    let ratio = alpha.clone() / (half - rho);
    let k = ratio.ceil().into_numer_denom().0 + 1u32;
    k.to_u32().ok_or_else(|| Error::Precondition("k out of range".into()))
}

/// `k = ceil(3/2 (alpha - 1 + tau)) + 2`, valid for `alpha >= 121/60`, `tau >= 0`.
pub fn k_choice_type2(alpha: &Rational, tau: &Rational) -> Result<u32> {
    if *alpha < Rational::from((121, 60)) {
        return Err(Error::Precondition(format!("alpha = {alpha} is below 121/60")));
    }
    if *tau < 0 {
        return Err(Error::Precondition(format!("tau must be nonnegative, got {tau}")));
    }
    let v = (alpha.clone() - 1u32 + tau) * Rational::from((3, 2));
    let k = v.ceil().into_numer_denom().0 + 2u32;
    k.to_u32().ok_or_else(|| Error::Precondition("k out of range".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConstraintFlags {
    /// `U >= 3` and `U < V < Z < X`.
    pub u_min: bool,
    /// `Z >= 4 U^2`.
    pub z_vs_u: bool,
    /// `X >= 64 Z^2 U`.
    pub x_vs_zu: bool,
    /// `V^3 >= 32 X`.
    pub v_vs_x: bool,
}

impl ConstraintFlags {
    pub fn all(&self) -> bool {
        self.u_min && self.z_vs_u && self.x_vs_zu && self.v_vs_x
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionParams {
    pub y: u64,
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    /// Half-integer nearest to `Y^{1/2 - rho} / 9`.
    pub z: f64,
    pub constraints: ConstraintFlags,
}

pub fn constraint_flags(x: f64, u: f64, v: f64, z: f64) -> ConstraintFlags {
    ConstraintFlags {
        u_min: u >= 3.0 && u < v && v < z && z < x,
        z_vs_u: z >= 4.0 * u * u,
        x_vs_zu: x >= 64.0 * z * z * u,
        v_vs_x: v * v * v >= 32.0 * x,
    }
}

/// `U = Y^{2 rho}`, `V = 4 Y^{1/3}`, `Z = floor(Y^{1/2-rho}/9) + 1/2`, with
/// the constraints evaluated at `X = Y`.
pub fn decomposition_params(y: u64, rho: f64) -> Result<DecompositionParams> {
    if y < 16 {
        return Err(Error::Precondition(format!("Y must be at least 16, got {y}")));
    }
    let yf = y as f64;
    let u = yf.powf(2.0 * rho);
    let v = 4.0 * yf.cbrt();
    let z = (yf.powf(0.5 - rho) / 9.0).floor() + 0.5;
    Ok(DecompositionParams {
        y,
        rho,
        u,
        v,
        z,
        constraints: constraint_flags(yf, u, v, z),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SmoothingParams {
    pub q: u64,
    pub h: u64,
    /// `floor(sqrt(m X^rho))` was below 2.
    pub clamped: bool,
}

/// `q = floor(sqrt(m X^rho))` (at least 2) and `H = ceil(X^{rho+eps})`.
/// `X` is a float so that sizes such as `2^150` are representable.
pub fn smoothing_params(m: u64, x: f64, rho: f64, eps: f64) -> Result<SmoothingParams> {
    if m < 1 || !(x >= 2.0) {
        return Err(Error::Precondition("need m >= 1 and X >= 2".into()));
    }
    let lx = x.ln();
    let raw = ((m as f64).ln() / 2.0 + rho * lx / 2.0).exp().floor();
    let h = ((rho + eps) * lx).exp().ceil().max(1.0);
    Ok(SmoothingParams {
        q: (raw as u64).max(2),
        h: h as u64,
        clamped: raw < 2.0,
    })
}

/// `(X^{-2 theta/3}, X^{rho(1-rho)})`: the frequency range of the prime sum estimate.
pub fn prime_sum_y_range(theta: f64, rho: f64, x: f64) -> (f64, f64) {
    (x.powf(-2.0 * theta / 3.0), x.powf(rho * (1.0 - rho)))
}

/// `X^{rho+eps}`: the frequency cap of the bilinear estimates.
pub fn bilinear_y_cap(rho: f64, eps: f64, x: f64) -> f64 {
    x.powf(rho + eps)
}

pub fn y_in_prime_sum_range(y: f64, theta: f64, rho: f64, x: f64) -> bool {
    let (lo, hi) = prime_sum_y_range(theta, rho, x);
    (lo..=hi).contains(&y.abs())
}

pub fn y_in_bilinear_range(y: f64, rho: f64, eps: f64, x: f64) -> bool {
    y.abs() <= bilinear_y_cap(rho, eps, x)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentProfile {
    pub theta: f64,
    pub rho: Exponent,
    pub rho_d: Exponent,
    pub rho_tilde_max: Exponent,
    /// Exponents of `X` bounding `|y|`: `[-2 theta/3, rho(1-rho)]`.
    pub y_range: [f64; 2],
    pub notes: Vec<String>,
}

pub fn exponent_profile(theta: &Real) -> Result<ExponentProfile> {
    let r = rho(theta)?;
    let rd = r.div_u32(3);
    let rf = r.to_f64();
    let t = theta.to_f64();
    let mut notes = Vec::new();
    if let Some(w) = theta_warning(theta) {
        notes.push(w);
    }
    if let Exponent::Exact(q) = &r {
        notes.push(format!("rho = {q}, rho_d = {}", q.clone() / 3u32));
    }
    Ok(ExponentProfile {
        theta: t,
        rho: r,
        rho_tilde_max: rd.clone(),
        rho_d: rd,
        y_range: [-2.0 * t / 3.0, rf * (1.0 - rf)],
        notes,
    })
}
