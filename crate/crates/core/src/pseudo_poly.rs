//! Pseudo-polynomials `f(x) = sum a_j x^t_j` and their certified evaluation
//! at positive integers: enclosures, exact floors, and mod-1 phases.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::config::Precision;
use crate::error::{Error, Result};
use crate::real::{split_signed, Interval, Real};

/// Largest certified error tolerated on a reduced phase.
pub const PHASE_TOLERANCE: f64 = 1.0 / (1u64 << 40) as f64;

/// Bits kept beyond the integer part when reducing mod 1.
const FRACTION_GUARD_BITS: u32 = 96;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Term {
    coefficient: Real,
    exponent: Real,
}

impl Term {
    pub fn new(coefficient: Real, exponent: Real) -> Result<Self> {
        let term = Self {
            coefficient,
            exponent,
        };
        if term.coefficient.signum() != Ordering::Greater {
            return Err(Error::InvalidTerm {
                term: term.to_string(),
                reason: "coefficient must be positive".into(),
            });
        }
        if term.exponent.cmp_real(&Real::from_integer(1)) == Ordering::Less {
            return Err(Error::InvalidTerm {
                term: term.to_string(),
                reason: "exponent must be at least 1".into(),
            });
        }
        Ok(term)
    }

    pub fn coefficient(&self) -> &Real {
        &self.coefficient
    }

    pub fn exponent(&self) -> &Real {
        &self.exponent
    }

    pub fn is_polynomial(&self) -> bool {
        self.exponent.is_integer()
    }
}

fn needs_parens(s: &str) -> bool {
    s.chars().skip(1).any(|c| matches!(c, '+' | '-' | '*'))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.coefficient.to_string();
        if c != "1" {
            if needs_parens(&c) {
                write!(f, "({c})*")?;
            } else {
                write!(f, "{c}*")?;
            }
        }
        f.write_str("x")?;
        let e = self.exponent.to_string();
        if e != "1" {
            if needs_parens(&e) {
                write!(f, "^({e})")?;
            } else {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// `sum a_j x^t_j` with positive coefficients, strictly increasing exponents
/// `>= 1`, and at least one non-integral exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoPolynomial {
    terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub dominant: bool,
    /// Degree of the polynomial part; `None` when there is no such part.
    pub deg_poly: Option<Real>,
    pub deg_pseudo: Real,
    pub theta: Real,
}

/// Value with a rigorous enclosure; `exact` is set when the value was
/// computed without rounding.
#[derive(Clone, Debug)]
pub struct CertifiedReal {
    enclosure: Interval,
    exact: Option<Rational>,
}

impl CertifiedReal {
    pub fn midpoint(&self) -> Float {
        self.enclosure.midpoint()
    }

    /// Upper bound on the distance from the midpoint to the true value.
    pub fn radius(&self) -> Float {
        if self.exact.is_some() {
            return Float::with_val(self.enclosure.lo().prec(), 0);
        }
        let mid = self.midpoint();
        let prec = mid.prec();
        let a = Float::with_val_round(prec, &mid - self.enclosure.lo(), Round::Up).0;
        let b = Float::with_val_round(prec, self.enclosure.hi() - &mid, Round::Up).0;
        a.max(&b)
    }

    pub fn enclosure(&self) -> &Interval {
        &self.enclosure
    }

    pub fn exact(&self) -> Option<&Rational> {
        self.exact.as_ref()
    }
}

/// `{y f(n)}` with its certified absolute error and the integer part removed.
#[derive(Clone, Debug, PartialEq)]
pub struct Phase {
    pub value: f64,
    pub error: f64,
    pub whole: Integer,
}

/// `||x||` with its certified absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Distance {
    pub value: f64,
    pub error: f64,
}

/// Exact rational part plus an optional rounded remainder.
struct Evaluation {
    exact: Rational,
    inexact: Option<Interval>,
}

impl Evaluation {
    fn interval(&self, prec: u32) -> Interval {
        let exact = Interval::from_rational(prec, &self.exact);
        match &self.inexact {
            Some(iv) => exact.add(iv, prec),
            None => exact,
        }
    }
}

/// `n^(p/q)` when it is an integer.
fn exact_rational_power(n: u64, exponent: &Rational) -> Option<Integer> {
    let q = exponent.denom().to_u32()?;
    let p = exponent.numer().to_u32()?;
    let base = Integer::from(n);
    let root = if q == 1 {
        base
    } else {
        let r = Integer::from(base.root_ref(q));
        if r.clone().pow(q) != n {
            return None;
        }
        r
    };
    Some(root.pow(p))
}

impl PseudoPolynomial {
    /// Normalizes `terms`: sorts by exponent, merges equal exponents.
    pub fn new(mut terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Parse("no terms".into()));
        }
        terms.sort_by(|a, b| a.exponent.cmp_real(&b.exponent));
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.exponent == t.exponent => {
                    last.coefficient = last.coefficient.add(&t.coefficient);
                }
                _ => merged.push(t),
            }
        }
        if merged.iter().all(Term::is_polynomial) {
            return Err(Error::AllExponentsIntegral);
        }
        Ok(Self { terms: merged })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn poly_part(&self) -> impl Iterator<Item = &Term> {
        self.terms.iter().filter(|t| t.is_polynomial())
    }

    pub fn pseudo_part(&self) -> impl Iterator<Item = &Term> {
        self.terms.iter().filter(|t| !t.is_polynomial())
    }

    pub fn classify(&self) -> Classification {
        let deg_poly = self.poly_part().last().map(|t| t.exponent.clone());
        let deg_pseudo = self
            .pseudo_part()
            .last()
            .map(|t| t.exponent.clone())
            .expect("at least one non-integral exponent");
        let dominant = match &deg_poly {
            Some(d) => deg_pseudo.cmp_real(d) == Ordering::Greater,
            None => true,
        };
        let theta = self.terms.last().expect("nonempty").exponent.clone();
        Classification {
            dominant,
            deg_poly,
            deg_pseudo,
            theta,
        }
    }

    pub fn theta(&self) -> &Real {
        &self.terms.last().expect("nonempty").exponent
    }

    pub fn is_dominant(&self) -> bool {
        self.classify().dominant
    }

    /// `c * f` for rational `c > 0`.
    pub fn scale(&self, c: &Rational) -> Result<Self> {
        if c.cmp0() != Ordering::Greater {
            return Err(Error::Precondition("scale factor must be positive".into()));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| Term::new(t.coefficient.scale(c), t.exponent.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }

    /// Rough `log2 f(n)`, used only to pick a starting precision.
    pub fn log2_estimate(&self, n: u64) -> f64 {
        let l = (n.max(1) as f64).log2();
        let top = self
            .terms
            .iter()
            .map(|t| t.coefficient.to_f64().log2() + t.exponent.to_f64() * l)
            .fold(f64::NEG_INFINITY, f64::max);
        top + (self.terms.len() as f64).log2()
    }

    fn evaluate(&self, n: u64, prec: u32) -> Evaluation {
        let mut exact = Rational::new();
        let mut inexact: Option<Interval> = None;
        let mut ln_n: Option<Interval> = None;
        for term in &self.terms {
            let power = if n == 1 {
                Ok(Integer::from(1))
            } else {
                match term.exponent.as_rational().and_then(|e| exact_rational_power(n, e)) {
                    Some(v) => Ok(v),
                    None => {
                        let ln = ln_n.get_or_insert_with(|| {
                            Interval::from_integer(prec, &Integer::from(n)).ln(prec)
                        });
                        Err(term.exponent.enclose(prec).mul(ln, prec).exp(prec))
                    }
                }
            };
            let contribution = match (power, term.coefficient.as_rational()) {
                (Ok(p), Some(c)) => {
                    exact += Rational::from(c * &p);
                    continue;
                }
                (Ok(p), None) => {
                    term.coefficient.enclose(prec).mul(&Interval::from_integer(prec, &p), prec)
                }
                (Err(iv), _) => term.coefficient.enclose(prec).mul(&iv, prec),
            };
            inexact = Some(match inexact {
                Some(acc) => acc.add(&contribution, prec),
                None => contribution,
            });
        }
        Evaluation { exact, inexact }
    }

    /// Enclosure of `f(x)` with `radius <= 2^-target_bits * |midpoint|`.
    pub fn eval_certified(
        &self,
        x: u64,
        target_bits: u32,
        precision: &Precision,
    ) -> Result<CertifiedReal> {
        if x == 0 {
            return Err(Error::Precondition("x must be at least 1".into()));
        }
        if target_bits < 64 {
            return Err(Error::Precondition("target_bits must be at least 64".into()));
        }
        for prec in precision.schedule(target_bits + 32) {
            let ev = self.evaluate(x, prec);
            if ev.inexact.is_none() {
                return Ok(CertifiedReal {
                    enclosure: ev.interval(prec.max(64)),
                    exact: Some(ev.exact),
                });
            }
            let cr = CertifiedReal {
                enclosure: ev.interval(prec),
                exact: None,
            };
            let mut scaled = cr.radius();
            scaled <<= target_bits;
            if scaled <= *cr.enclosure.lo() {
                return Ok(cr);
            }
        }
        Err(Error::PrecisionExceeded {
            cap: precision.max_bits,
        })
    }

    /// Exact `floor(f(n))`.
    pub fn floor_certified(&self, n: u64, precision: &Precision) -> Result<Integer> {
        if n == 0 {
            return Err(Error::Precondition("n must be at least 1".into()));
        }
        let mut last = precision.start_bits;
        for prec in precision.schedule(precision.start_bits) {
            last = prec;
            let ev = self.evaluate(n, prec);
            if ev.inexact.is_none() {
                return Ok(ev.exact.floor().numer().clone());
            }
            if let Some(v) = ev.interval(prec).common_floor() {
                return Ok(v);
            }
        }
        Err(Error::AmbiguousFloor { n, bits: last })
    }

    /// `{y f(n)}` with certified error at most [`PHASE_TOLERANCE`].
    pub fn scaled_phase(&self, n: u64, y: &Real, precision: &Precision) -> Result<Phase> {
        if n == 0 {
            return Err(Error::Precondition("n must be at least 1".into()));
        }
        if y.is_zero() {
            return Ok(Phase {
                value: 0.0,
                error: 0.0,
                whole: Integer::new(),
            });
        }
        let magnitude = (y.to_f64().abs().log2() + self.log2_estimate(n)).max(0.0);
        let first = magnitude.ceil() as u32 + FRACTION_GUARD_BITS;
        for prec in precision.schedule(first) {
            let ev = self.evaluate(n, prec);
            if let (None, Some(yq)) = (&ev.inexact, y.as_rational()) {
                return Ok(exact_phase(Rational::from(yq * &ev.exact)));
            }
            let product = y.enclose(prec).mul(&ev.interval(prec), prec);
            if let Some(phase) = reduce_mod_one(&product) {
                return Ok(phase);
            }
        }
        Err(Error::PrecisionExceeded {
            cap: precision.max_bits,
        })
    }
}

fn exact_phase(value: Rational) -> Phase {
    let (_, mut whole) = value.fract_floor_ref().into();
    let mut frac = Rational::from(&value - &whole);
    let mut v = frac.to_f64();
    if v >= 1.0 {
        v = 0.0;
        whole += 1;
        frac -= 1;
    }
    let diff = Rational::from_f64(v).expect("finite") - frac;
    let error = Float::with_val_round(64, diff.abs(), Round::Up)
        .0
        .to_f64_round(Round::Up);
    Phase {
        value: v,
        error,
        whole,
    }
}

/// Reduces an enclosure modulo one, or `None` if it is too wide.
fn reduce_mod_one(iv: &Interval) -> Option<Phase> {
    let mid = iv.midpoint();
    let prec = mid.prec();
    let (mut whole, _) = mid.to_integer_round(Round::Down)?;
    let frac_mid = Float::with_val(prec, &mid - &whole);
    let mut value = frac_mid.to_f64();
    if value >= 1.0 {
        value = 0.0;
        whole += 1;
    }
    let v = Float::with_val(64, value);
    let lo = Float::with_val_round(prec, iv.lo() - &whole, Round::Down).0;
    let hi = Float::with_val_round(prec, iv.hi() - &whole, Round::Up).0;
    let below = Float::with_val_round(prec, &v - &lo, Round::Up).0;
    let above = Float::with_val_round(prec, &hi - &v, Round::Up).0;
    let error = below.max(&above).to_f64_round(Round::Up);
    (error <= PHASE_TOLERANCE).then_some(Phase {
        value,
        error,
        whole,
    })
}

/// `||xi * n||`, certified to [`PHASE_TOLERANCE`].
pub fn dist_to_int(xi: &Real, n: &Integer, precision: &Precision) -> Result<Distance> {
    let needed = n.significant_bits() + 64;
    if needed > precision.max_bits {
        return Err(Error::PrecisionExceeded {
            cap: precision.max_bits,
        });
    }
    let phase = if let Some(q) = xi.as_rational() {
        exact_phase(Rational::from(q * n))
    } else {
        let mut found = None;
        for prec in precision.schedule(needed + FRACTION_GUARD_BITS / 2) {
            let product = xi.enclose(prec).mul(&Interval::from_integer(prec, n), prec);
            if let Some(p) = reduce_mod_one(&product) {
                found = Some(p);
                break;
            }
        }
        found.ok_or(Error::PrecisionExceeded {
            cap: precision.max_bits,
        })?
    };
    Ok(Distance {
        value: phase.value.min(1.0 - phase.value),
        error: phase.error,
    })
}

impl fmt::Display for PseudoPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl Serialize for PseudoPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn strip_parens(s: &str) -> &str {
    let t = s.trim();
    if t.starts_with('(') && t.ends_with(')') {
        let inner = &t[1..t.len() - 1];
        let mut depth = 0i32;
        for c in inner.chars() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                _ => {}
            }
            if depth < 0 {
                return t;
            }
        }
        return inner;
    }
    t
}

fn split_top_level(text: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&text[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

fn parse_term(text: &str) -> Result<Term> {
    let invalid = |reason: &str| Error::InvalidTerm {
        term: text.to_string(),
        reason: reason.to_string(),
    };
    let mut coefficient = Real::from_integer(1);
    let mut exponent: Option<Real> = None;
    for factor in split_top_level(text, '*') {
        let factor = factor.trim();
        if let Some(rest) = factor.strip_prefix('x') {
            if exponent.is_some() {
                return Err(invalid("variable appears twice"));
            }
            exponent = Some(match rest.strip_prefix('^') {
                Some(e) => strip_parens(e).parse()?,
                None if rest.is_empty() => Real::from_integer(1),
                None => return Err(Error::Parse(format!("unexpected `{rest}` after x"))),
            });
        } else {
            let c: Real = strip_parens(factor).parse()?;
            coefficient = match (coefficient.as_rational(), c.as_rational()) {
                (Some(a), _) => c.scale(a),
                (None, Some(b)) => coefficient.scale(b),
                (None, None) => return Err(invalid("product of irrational constants")),
            };
        }
    }
    let exponent = exponent.ok_or_else(|| invalid("constant term (exponent must be at least 1)"))?;
    Term::new(coefficient, exponent)
}

impl FromStr for PseudoPolynomial {
    type Err = Error;

    /// `[coeff *] x [^ exponent]` terms joined by `+`.
    fn from_str(s: &str) -> Result<Self> {
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(Error::Parse("empty expression".into()));
        }
        let mut terms = Vec::new();
        for (negative, piece) in split_signed(&text)? {
            if negative {
                return Err(Error::InvalidTerm {
                    term: format!("-{piece}"),
                    reason: "coefficient must be positive".into(),
                });
            }
            terms.push(parse_term(piece)?);
        }
        Self::new(terms)
    }
}

pub fn parse_pseudo_poly(text: &str) -> Result<PseudoPolynomial> {
    text.parse()
}
