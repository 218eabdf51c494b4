//! Exact real constants and directed-rounding interval arithmetic.
//!
//! A [`Real`] is a rational linear combination of `1`, square roots of
//! squarefree integers and `pi`. These numbers are linearly independent over
//! the rationals, so the normalized representation is canonical and equality
//! is structural. Numerical values are only ever produced as an [`Interval`]
//! at a caller-chosen precision; nothing is cached at a fixed precision.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rug::float::{Constant as MpConstant, Round};
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` with endpoints rounded outward.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    lo: Float,
    hi: Float,
}

impl Interval {
    pub fn from_rational(prec: u32, value: &Rational) -> Self {
        Self {
            lo: Float::with_val_round(prec, value, Round::Down).0,
            hi: Float::with_val_round(prec, value, Round::Up).0,
        }
    }

    pub fn from_integer(prec: u32, value: &Integer) -> Self {
        Self {
            lo: Float::with_val_round(prec, value, Round::Down).0,
            hi: Float::with_val_round(prec, value, Round::Up).0,
        }
    }

    pub fn from_bounds(lo: Float, hi: Float) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn pi(prec: u32) -> Self {
        Self {
            lo: Float::with_val_round(prec, MpConstant::Pi, Round::Down).0,
            hi: Float::with_val_round(prec, MpConstant::Pi, Round::Up).0,
        }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn add(&self, other: &Self, prec: u32) -> Self {
        Self {
            lo: Float::with_val_round(prec, &self.lo + &other.lo, Round::Down).0,
            hi: Float::with_val_round(prec, &self.hi + &other.hi, Round::Up).0,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            lo: Float::with_val(self.hi.prec(), -&self.hi),
            hi: Float::with_val(self.lo.prec(), -&self.lo),
        }
    }

    pub fn mul(&self, other: &Self, prec: u32) -> Self {
        let pairs = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let down = Float::with_val_round(prec, a * b, Round::Down).0;
            let up = Float::with_val_round(prec, a * b, Round::Up).0;
            if lo.as_ref().map_or(true, |l| down < *l) {
                lo = Some(down);
            }
            if hi.as_ref().map_or(true, |h| up > *h) {
                hi = Some(up);
            }
        }
        Self {
            lo: lo.expect("four products"),
            hi: hi.expect("four products"),
        }
    }

    /// Natural logarithm; requires a strictly positive interval.
    pub fn ln(&self, prec: u32) -> Self {
        debug_assert!(self.lo > 0);
        let mut lo = Float::with_val_round(prec, &self.lo, Round::Down).0;
        let mut hi = Float::with_val_round(prec, &self.hi, Round::Up).0;
        lo.ln_round(Round::Down);
        hi.ln_round(Round::Up);
        Self { lo, hi }
    }

    pub fn exp(&self, prec: u32) -> Self {
        let mut lo = Float::with_val_round(prec, &self.lo, Round::Down).0;
        let mut hi = Float::with_val_round(prec, &self.hi, Round::Up).0;
        lo.exp_round(Round::Down);
        hi.exp_round(Round::Up);
        Self { lo, hi }
    }

    /// Square root; requires a nonnegative interval.
    pub fn sqrt(&self, prec: u32) -> Self {
        debug_assert!(self.lo >= 0);
        let mut lo = Float::with_val_round(prec, &self.lo, Round::Down).0;
        let mut hi = Float::with_val_round(prec, &self.hi, Round::Up).0;
        lo.sqrt_round(Round::Down);
        hi.sqrt_round(Round::Up);
        Self { lo, hi }
    }

    /// Upper bound on half the width.
    pub fn radius(&self) -> Float {
        let prec = self.lo.prec().max(self.hi.prec());
        let mut r = Float::with_val_round(prec, &self.hi - &self.lo, Round::Up).0;
        r /= 2;
        r
    }

    pub fn midpoint(&self) -> Float {
        let prec = self.lo.prec().max(self.hi.prec()) + 1;
        let mut m = Float::with_val(prec, &self.lo + &self.hi);
        m /= 2;
        m
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// `Some(N)` when every point of the interval has floor `N`.
    pub fn common_floor(&self) -> Option<Integer> {
        let (lo, _) = self.lo.to_integer_round(Round::Down)?;
        let (hi, _) = self.hi.to_integer_round(Round::Down)?;
        (lo == hi).then_some(lo)
    }

    pub fn sign(&self) -> Option<Ordering> {
        if self.lo > 0 {
            Some(Ordering::Greater)
        } else if self.hi < 0 {
            Some(Ordering::Less)
        } else if self.lo == 0 && self.hi == 0 {
            Some(Ordering::Equal)
        } else {
            None
        }
    }
}

/// Irrational basis elements a [`Real`] may be built from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constant {
    /// `sqrt(k)` for squarefree `k > 1`.
    Sqrt(u64),
    Pi,
}

impl Constant {
    fn enclose(&self, prec: u32) -> Interval {
        match self {
            Constant::Sqrt(k) => Interval::from_integer(prec, &Integer::from(*k)).sqrt(prec),
            Constant::Pi => Interval::pi(prec),
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Sqrt(k) => write!(f, "sqrt({k})"),
            Constant::Pi => f.write_str("pi"),
        }
    }
}

/// Exact real number `q + sum c_i K_i` with rational `q, c_i` and constants `K_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Real {
    rational: Rational,
    parts: Vec<(Constant, Rational)>,
}

impl Real {
    pub fn zero() -> Self {
        Self::from_rational(Rational::new())
    }

    pub fn from_rational(q: Rational) -> Self {
        Self {
            rational: q,
            parts: Vec::new(),
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(Rational::from(n))
    }

    /// `sqrt(k)`, normalized so the radicand is squarefree.
    pub fn sqrt(k: u64) -> Self {
        if k == 0 {
            return Self::zero();
        }
        let mut outside = 1u64;
        let mut inside = 1u64;
        let mut rest = k;
        let mut p = 2u64;
        while p * p <= rest {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            outside *= p.pow(e / 2);
            if e % 2 == 1 {
                inside *= p;
            }
            p += 1;
        }
        inside *= rest;
        if inside == 1 {
            Self::from_integer(outside as i64)
        } else {
            Self {
                rational: Rational::new(),
                parts: vec![(Constant::Sqrt(inside), Rational::from(outside))],
            }
        }
    }

    pub fn pi() -> Self {
        Self {
            rational: Rational::new(),
            parts: vec![(Constant::Pi, Rational::from(1))],
        }
    }

    /// The golden ratio `(1 + sqrt 5) / 2`.
    pub fn golden() -> Self {
        let half = Rational::from((1, 2));
        Self::from_rational(half.clone()).add(&Self::sqrt(5).scale(&half))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.parts.is_empty().then_some(&self.rational)
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty() && self.rational == 0
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut parts = self.parts.clone();
        for (k, c) in &other.parts {
            match parts.iter_mut().find(|(k2, _)| k2 == k) {
                Some((_, c2)) => *c2 += c,
                None => parts.push((k.clone(), c.clone())),
            }
        }
        parts.retain(|(_, c)| *c != 0);
        parts.sort_by(|a, b| a.0.cmp(&b.0));
        Self {
            rational: Rational::from(&self.rational + &other.rational),
            parts,
        }
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        if *factor == 0 {
            return Self::zero();
        }
        Self {
            rational: Rational::from(&self.rational * factor),
            parts: self
                .parts
                .iter()
                .map(|(k, c)| (k.clone(), Rational::from(c * factor)))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&Rational::from(-1))
    }

    /// `scale * self + shift`.
    pub fn affine(&self, scale: &Rational, shift: &Rational) -> Self {
        self.scale(scale).add(&Self::from_rational(shift.clone()))
    }

    pub fn enclose(&self, prec: u32) -> Interval {
        let mut acc = Interval::from_rational(prec, &self.rational);
        for (k, c) in &self.parts {
            let term = Interval::from_rational(prec, c).mul(&k.enclose(prec), prec);
            acc = acc.add(&term, prec);
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        match self.as_rational() {
            Some(q) => Float::with_val(53, q).to_f64(),
            None => self.enclose(128).midpoint().to_f64(),
        }
    }

    /// Sign of the number; exact zero is recognized structurally.
    pub fn signum(&self) -> Ordering {
        if let Some(q) = self.as_rational() {
            return q.cmp0();
        }
        let mut prec = 64;
        loop {
            if let Some(s) = self.enclose(prec).sign() {
                if s != Ordering::Equal {
                    return s;
                }
            }
            // a nonzero combination of independent constants separates from 0
            prec *= 2;
        }
    }

    pub fn cmp_real(&self, other: &Self) -> Ordering {
        self.add(&other.neg()).signum()
    }

    /// Exact floor/ceil of a number known to be non-integral or rational.
    pub fn ceil(&self) -> Integer {
        if let Some(q) = self.as_rational() {
            return q.clone().ceil().numer().clone();
        }
        let mut prec = 64;
        loop {
            let iv = self.enclose(prec);
            let lo = iv.lo().to_integer_round(Round::Up).map(|x| x.0);
            let hi = iv.hi().to_integer_round(Round::Up).map(|x| x.0);
            if let (Some(lo), Some(hi)) = (lo, hi) {
                if lo == hi {
                    return lo;
                }
            }
            prec *= 2;
        }
    }

    pub fn is_integer(&self) -> bool {
        self.as_rational().map_or(false, |q| *q.denom() == 1)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if self.rational != 0 || self.parts.is_empty() {
            write!(f, "{}", self.rational)?;
            first = false;
        }
        for (k, c) in &self.parts {
            let neg = c.cmp0() == Ordering::Less;
            let abs = Rational::from(c.abs_ref());
            if neg {
                f.write_str("-")?;
            } else if !first {
                f.write_str("+")?;
            }
            if abs != 1 {
                write!(f, "{abs}*")?;
            }
            write!(f, "{k}")?;
            first = false;
        }
        Ok(())
    }
}

impl serde::Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Parses a single atom: decimal, `p/q`, `sqrt2`, `sqrt(k)`, `pi`, `golden`.
fn parse_atom(text: &str) -> Result<Real> {
    let t = text.trim();
    let err = || Error::Parse(format!("unrecognized constant `{t}`"));
    match t {
        "" => return Err(err()),
        "pi" => return Ok(Real::pi()),
        "golden" | "phi" => return Ok(Real::golden()),
        _ => {}
    }
    if let Some(rest) = t.strip_prefix("sqrt") {
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .unwrap_or(rest)
            .trim();
        let k: u64 = inner.parse().map_err(|_| err())?;
        return Ok(Real::sqrt(k));
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: Integer = p.trim().parse().map_err(|_| err())?;
        let q: Integer = q.trim().parse().map_err(|_| err())?;
        if q == 0 {
            return Err(Error::Parse(format!("zero denominator in `{t}`")));
        }
        return Ok(Real::from_rational(Rational::from((p, q))));
    }
    parse_decimal(t).map(Real::from_rational).ok_or_else(err)
}

/// Exact decimal, e.g. `3.25` or `1e6`.
pub(crate) fn parse_decimal(t: &str) -> Option<Rational> {
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits_ok = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    let int_digits = int.strip_prefix(['+', '-']).unwrap_or(int);
    if int_digits.is_empty() && frac.is_empty() || !digits_ok(int_digits) || !digits_ok(frac) {
        return None;
    }
    let negative = int.starts_with('-');
    let all: String = format!("{int_digits}{frac}");
    let mut value = Rational::from((
        all.parse::<Integer>().unwrap_or_default(),
        Integer::from(10).pow(frac.len() as u32),
    ));
    if exp >= 0 {
        value *= Integer::from(10).pow(exp as u32);
    } else {
        value /= Integer::from(10).pow(exp.unsigned_abs());
    }
    if negative {
        value = -value;
    }
    Some(value)
}

impl FromStr for Real {
    type Err = Error;

    /// Signed sum of products of atoms, with at most one irrational atom per
    /// product: `3*sqrt2+1`, `-1/2`, `golden`.
    fn from_str(s: &str) -> Result<Self> {
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(Error::Parse("empty constant".into()));
        }
        let mut total = Real::zero();
        for (negative, term) in split_signed(&text)? {
            let mut product = Real::from_integer(1);
            for factor in term.split('*') {
                let atom = parse_atom(factor)?;
                product = match (product.as_rational(), atom.as_rational()) {
                    (Some(a), _) => atom.scale(a),
                    (None, Some(b)) => product.scale(b),
                    (None, None) => {
                        return Err(Error::Parse(format!(
                            "product of irrational constants in `{term}`"
                        )))
                    }
                };
            }
            if negative {
                product = product.neg();
            }
            total = total.add(&product);
        }
        Ok(total)
    }
}

/// Splits on top-level `+`/`-`, keeping the sign of each piece.
pub(crate) fn split_signed(text: &str) -> Result<Vec<(bool, &str)>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0usize;
    let mut negative = false;
    let bytes = text.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 => {
                // exponent sign of a decimal like 1e-3
                let after_e = i > 0 && matches!(bytes[i - 1], b'e' | b'E') && i >= 2 && bytes[i - 2].is_ascii_digit();
                // sign right after '^' or '*' belongs to the operand
                let after_op = i > 0 && matches!(bytes[i - 1], b'^' | b'*' | b'/');
                if after_e || after_op {
                    continue;
                }
                if i > start {
                    out.push((negative, &text[start..i]));
                } else if i != 0 {
                    return Err(Error::Parse(format!("empty term in `{text}`")));
                }
                negative = b == b'-';
                start = i + 1;
            }
            _ => {}
        }
    }
    if start >= text.len() {
        return Err(Error::Parse(format!("dangling operator in `{text}`")));
    }
    out.push((negative, &text[start..]));
    Ok(out)
}
