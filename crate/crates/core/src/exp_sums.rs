//! Exponential sums `sum e(y f(n))` over primes, von Mangoldt weighted
//! integers, and the bilinear Type I / Type II ranges.
//!
//! Every phase `{y f(n)}` is reduced with certified precision before it
//! touches floating point. Work is split into fixed-size chunks that may run
//! in parallel, but partial sums are always merged in ascending order, so a
//! result does not depend on the thread count.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Precision, SieveConfig};
use crate::error::{Error, Result};
use crate::fit::{power_fit, PowerFit};
use crate::primes::{divisor_table, Sieve};
use crate::pseudo_poly::PseudoPolynomial;
use crate::real::Real;
use crate::summation::{e, ComplexSum, Neumaier};

const CHUNK: usize = 2048;

/// Phase error charged to each term for forming `2 pi t` and evaluating
/// sine and cosine in double precision.
const TRIG_PHASE_ERROR: f64 = f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SumKind {
    Prime,
    Lambda,
    Type1,
    Type2,
}

impl SumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SumKind::Prime => "prime",
            SumKind::Lambda => "lambda",
            SumKind::Type1 => "type1",
            SumKind::Type2 => "type2",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpSumRecord {
    pub kind: SumKind,
    pub f: String,
    pub y: String,
    pub x: u64,
    pub m: Option<u64>,
    pub n: Option<u64>,
    pub value: Complex64,
    pub terms: u64,
    /// `2 pi sum |w_n| err_n`, a bound on `|value - exact value|`.
    pub phase_error_bound: f64,
    /// Lambda sums only: the contribution of `p^k`, `k >= 2`.
    pub prime_power_value: Option<Complex64>,
}

impl ExpSumRecord {
    pub fn abs(&self) -> f64 {
        self.value.norm()
    }
}

/// `(lo, hi]` with `hi <= 2 lo`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DyadicBlock {
    pub lo: u64,
    pub hi: u64,
}

/// `(1,2], (2,4], ..., (2^k, X]` covering `(1, X]`.
pub fn dyadic_blocks(x: u64) -> Vec<DyadicBlock> {
    let mut out = Vec::new();
    let mut lo = 1u64;
    while lo < x {
        let hi = lo.saturating_mul(2).min(x);
        out.push(DyadicBlock { lo, hi });
        lo = hi;
    }
    out
}

/// Complex coefficient sequence indexed from 1.
pub trait Coefficients: Sync {
    fn coeff(&self, n: u64) -> Complex64;
}

impl<F: Fn(u64) -> Complex64 + Sync> Coefficients for F {
    fn coeff(&self, n: u64) -> Complex64 {
        self(n)
    }
}

/// Tabulated coefficients; `values[0]` is the coefficient of `n = 1`,
/// indices past the end are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Table(pub Vec<Complex64>);

impl Coefficients for Table {
    fn coeff(&self, n: u64) -> Complex64 {
        n.checked_sub(1)
            .and_then(|i| self.0.get(i as usize))
            .copied()
            .unwrap_or_default()
    }
}

/// Common coefficient sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Standard {
    Zero,
    One,
    /// `d_m(n)`.
    Divisor(u32),
    /// `[n = n0]`.
    Indicator(u64),
}

impl Coefficients for Standard {
    fn coeff(&self, n: u64) -> Complex64 {
        let v = match *self {
            Standard::Zero => 0.0,
            Standard::One => 1.0,
            Standard::Divisor(m) => crate::primes::divisor_function(n, m) as f64,
            Standard::Indicator(n0) => f64::from(u8::from(n == n0)),
        };
        Complex64::new(v, 0.0)
    }
}

impl std::str::FromStr for Standard {
    type Err = Error;

    /// `zero`, `one`, `d2`..`d4`, `at:<n0>`.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "zero" => Standard::Zero,
            "one" => Standard::One,
            "d2" => Standard::Divisor(2),
            "d3" => Standard::Divisor(3),
            "d4" => Standard::Divisor(4),
            _ => match s.strip_prefix("at:").and_then(|v| v.parse().ok()) {
                Some(n0) => Standard::Indicator(n0),
                None => return Err(Error::Parse(format!("unknown coefficient sequence `{s}`"))),
            },
        })
    }
}

/// Allows for rounding in `|a|` of exactly representable integer coefficients.
fn within_divisor_bound(a: Complex64, bound: u64) -> bool {
    a.norm() <= bound as f64 * (1.0 + 4.0 * f64::EPSILON)
}

fn check_coefficients(
    name: &'static str,
    seq: &dyn Coefficients,
    range: std::ops::RangeInclusive<u64>,
    order: u32,
) -> Result<Vec<Complex64>> {
    let hi = *range.end();
    let table = divisor_table(hi as usize, order);
    range
        .map(|k| {
            let a = seq.coeff(k);
            let bound = table[k as usize];
            if within_divisor_bound(a, bound) {
                Ok(a)
            } else {
                Err(Error::CoefficientBound {
                    sequence: name,
                    index: k,
                    magnitude: a.norm(),
                    bound,
                })
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default)]
struct Partial {
    sum: ComplexSum,
    err: Neumaier,
}

impl Partial {
    fn merge(&mut self, other: &Self) {
        self.sum.merge(&other.sum);
        self.err.merge(&other.err);
    }

    fn error_bound(&self) -> f64 {
        std::f64::consts::TAU * self.err.value()
    }
}

/// Evaluates exponential sums with a fixed precision schedule and sieve.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExpSums {
    precision: Precision,
    sieve: Sieve,
}

impl ExpSums {
    pub fn new(precision: Precision, sieve: SieveConfig) -> Self {
        Self {
            precision,
            sieve: Sieve::new(sieve),
        }
    }

    pub fn precision(&self) -> &Precision {
        &self.precision
    }

    pub fn sieve(&self) -> &Sieve {
        &self.sieve
    }

    fn primes_upto(&self, x: u64) -> Result<Vec<u64>> {
        if x < 2 {
            return Err(Error::Precondition("X must be at least 2".into()));
        }
        Ok(self.sieve.range(1, x)?.primes)
    }

    /// `sum_i w_i e(y f(n_i))` for one sequential run.
    fn run<W>(&self, f: &PseudoPolynomial, y: &Real, ns: &[u64], weight: W) -> Result<Partial>
    where
        W: Fn(usize) -> Complex64,
    {
        let mut part = Partial::default();
        for (i, &n) in ns.iter().enumerate() {
            let w = weight(i);
            if w == Complex64::default() {
                continue;
            }
            let ph = f.scaled_phase(n, y, &self.precision)?;
            part.sum.add(w * e(ph.value));
            part.err.add(w.norm() * (ph.error + TRIG_PHASE_ERROR));
        }
        Ok(part)
    }

    /// Chunked parallel evaluation, merged in index order.
    fn chunked<W>(&self, f: &PseudoPolynomial, y: &Real, ns: &[u64], weight: W) -> Result<Partial>
    where
        W: Fn(usize) -> Complex64 + Sync,
    {
        let parts: Vec<Partial> = ns
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, chunk)| self.run(f, y, chunk, |i| weight(c * CHUNK + i)))
            .collect::<Vec<Result<_>>>()
            .into_iter()
            .collect::<Result<_>>()?;
        let mut total = Partial::default();
        for p in &parts {
            total.merge(p);
        }
        Ok(total)
    }

    /// `(value, phase_error_bound)` of `sum_{n in ns} e(y f(n))`.
    pub fn sum_over(&self, f: &PseudoPolynomial, y: &Real, ns: &[u64]) -> Result<(Complex64, f64)> {
        let one = Complex64::new(1.0, 0.0);
        let p = self.chunked(f, y, ns, |_| one)?;
        Ok((p.sum.value(), p.error_bound()))
    }

    fn record(&self, kind: SumKind, f: &PseudoPolynomial, y: &Real, x: u64) -> ExpSumRecord {
        ExpSumRecord {
            kind,
            f: f.to_string(),
            y: y.to_string(),
            x,
            m: None,
            n: None,
            value: Complex64::default(),
            terms: 0,
            phase_error_bound: 0.0,
            prime_power_value: None,
        }
    }

    /// `sum_{p <= X} e(y f(p))`.
    pub fn prime_sum(&self, f: &PseudoPolynomial, y: &Real, x: u64) -> Result<ExpSumRecord> {
        let primes = self.primes_upto(x)?;
        let (value, err) = self.sum_over(f, y, &primes)?;
        Ok(ExpSumRecord {
            value,
            terms: primes.len() as u64,
            phase_error_bound: err,
            ..self.record(SumKind::Prime, f, y, x)
        })
    }

    /// Prime sums at every point of an ascending grid, sharing one sieve.
    pub fn prime_sum_grid(
        &self,
        f: &PseudoPolynomial,
        y: &Real,
        grid: &[u64],
    ) -> Result<Vec<ExpSumRecord>> {
        check_grid(grid)?;
        let primes = self.primes_upto(*grid.last().expect("nonempty"))?;
        let one = Complex64::new(1.0, 0.0);
        let mut acc = Partial::default();
        let mut start = 0usize;
        let mut out = Vec::with_capacity(grid.len());
        for &x in grid {
            let end = primes.partition_point(|&p| p <= x);
            let block = self.chunked(f, y, &primes[start..end], |_| one)?;
            acc.merge(&block);
            start = end;
            out.push(ExpSumRecord {
                value: acc.sum.value(),
                terms: end as u64,
                phase_error_bound: acc.error_bound(),
                ..self.record(SumKind::Prime, f, y, x)
            });
        }
        Ok(out)
    }

    /// `sum_{n <= X} Lambda(n) e(y f(n))`, with the prime-power part reported.
    pub fn lambda_sum(&self, f: &PseudoPolynomial, y: &Real, x: u64) -> Result<ExpSumRecord> {
        if x < 2 {
            return Err(Error::Precondition("X must be at least 2".into()));
        }
        let weights = self.sieve.von_mangoldt_weights(1, x)?;
        let (powers, primes): (Vec<(u64, f64)>, Vec<(u64, f64)>) = weights
            .iter()
            .partition(|&&(n, w)| (n as f64).ln() - w > 0.5);
        let part = |items: &[(u64, f64)]| -> Result<Partial> {
            let ns: Vec<u64> = items.iter().map(|t| t.0).collect();
            self.chunked(f, y, &ns, |i| Complex64::new(items[i].1, 0.0))
        };
        let prime_part = part(&primes)?;
        let power_part = part(&powers)?;
        let mut total = prime_part;
        total.merge(&power_part);
        Ok(ExpSumRecord {
            value: total.sum.value(),
            terms: weights.len() as u64,
            phase_error_bound: total.error_bound(),
            prime_power_value: Some(power_part.sum.value()),
            ..self.record(SumKind::Lambda, f, y, x)
        })
    }

    /// `sum_{m <= M} sum_{mn ~ X} a_m e(y f(mn))` with `|a_m| <= d_4(m)`.
    pub fn type1_sum(
        &self,
        a: &dyn Coefficients,
        f: &PseudoPolynomial,
        y: &Real,
        m_max: u64,
        x: u64,
    ) -> Result<ExpSumRecord> {
        if x < 2 || m_max < 1 || m_max > x {
            return Err(Error::Precondition("need 1 <= M <= X and X >= 2".into()));
        }
        let coeffs = check_coefficients("a", a, 1..=m_max, 4)?;
        let half = x / 2;
        let rows: Vec<(u64, Partial)> = (1..=m_max)
            .into_par_iter()
            .map(|m| {
                // mn > X/2  <=>  mn >= floor(X/2) + 1
                let n_lo = (half + 1).div_ceil(m);
                let n_hi = x / m;
                if n_lo > n_hi {
                    return Ok((0, Partial::default()));
                }
                let am = coeffs[(m - 1) as usize];
                let ks: Vec<u64> = (n_lo..=n_hi).map(|n| m * n).collect();
                let p = self.run(f, y, &ks, |_| am)?;
                Ok((n_hi - n_lo + 1, p))
            })
            .collect::<Vec<Result<_>>>()
            .into_iter()
            .collect::<Result<_>>()?;
        let mut total = Partial::default();
        let mut terms = 0;
        for (count, p) in &rows {
            terms += count;
            total.merge(p);
        }
        Ok(ExpSumRecord {
            m: Some(m_max),
            value: total.sum.value(),
            terms,
            phase_error_bound: total.error_bound(),
            ..self.record(SumKind::Type1, f, y, x)
        })
    }

    /// `sum_{m ~ M} sum_{n ~ N, mn ~ X} a_m b_n e(y f(mn))` with
    /// `|a_m| <= d_4(m)` and `|b_n| <= d_3(n)`.
    #[allow(clippy::too_many_arguments)]
    pub fn type2_sum(
        &self,
        a: &dyn Coefficients,
        b: &dyn Coefficients,
        f: &PseudoPolynomial,
        y: &Real,
        m_top: u64,
        n_top: u64,
        x: u64,
    ) -> Result<ExpSumRecord> {
        if x < 2 || m_top < 1 || n_top < 1 {
            return Err(Error::Precondition("need M, N >= 1 and X >= 2".into()));
        }
        let m_lo = m_top / 2 + 1;
        let n_lo = n_top / 2 + 1;
        let a_vals = check_coefficients("a", a, m_lo..=m_top, 4)?;
        let b_vals = check_coefficients("b", b, n_lo..=n_top, 3)?;
        let half = x / 2;
        let rows: Vec<(u64, Partial)> = (m_lo..=m_top)
            .into_par_iter()
            .map(|m| {
                let lo = n_lo.max((half + 1).div_ceil(m));
                let hi = n_top.min(x / m);
                if lo > hi {
                    return Ok((0, Partial::default()));
                }
                let am = a_vals[(m - m_lo) as usize];
                let ks: Vec<u64> = (lo..=hi).map(|n| m * n).collect();
                let p = self.run(f, y, &ks, |i| am * b_vals[(lo - n_lo) as usize + i])?;
                Ok((hi - lo + 1, p))
            })
            .collect::<Vec<Result<_>>>()
            .into_iter()
            .collect::<Result<_>>()?;
        let mut total = Partial::default();
        let mut terms = 0;
        for (count, p) in &rows {
            terms += count;
            total.merge(p);
        }
        Ok(ExpSumRecord {
            m: Some(m_top),
            n: Some(n_top),
            value: total.sum.value(),
            terms,
            phase_error_bound: total.error_bound(),
            ..self.record(SumKind::Type2, f, y, x)
        })
    }

    /// Fitted exponent of `|sum_{p <= X} e(y f(p))|` against `X`.
    pub fn cancellation_slope(
        &self,
        f: &PseudoPolynomial,
        y: &Real,
        grid: &[u64],
    ) -> Result<(PowerFit, Vec<ExpSumRecord>)> {
        if grid.len() < 3 {
            return Err(Error::InsufficientData("grid needs at least 3 points".into()));
        }
        let records = self.prime_sum_grid(f, y, grid)?;
        let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.x as f64, r.abs())).collect();
        Ok((power_fit(&pts)?, records))
    }
}

fn check_grid(grid: &[u64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InsufficientData("empty grid".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("grid must be strictly ascending".into()));
    }
    Ok(())
}

pub fn prime_exp_sum(f: &PseudoPolynomial, y: &Real, x: u64) -> Result<ExpSumRecord> {
    ExpSums::default().prime_sum(f, y, x)
}

pub fn lambda_exp_sum(f: &PseudoPolynomial, y: &Real, x: u64) -> Result<ExpSumRecord> {
    ExpSums::default().lambda_sum(f, y, x)
}

pub fn type1_sum(
    a: &dyn Coefficients,
    f: &PseudoPolynomial,
    y: &Real,
    m_max: u64,
    x: u64,
) -> Result<ExpSumRecord> {
    ExpSums::default().type1_sum(a, f, y, m_max, x)
}

pub fn type2_sum(
    a: &dyn Coefficients,
    b: &dyn Coefficients,
    f: &PseudoPolynomial,
    y: &Real,
    m_top: u64,
    n_top: u64,
    x: u64,
) -> Result<ExpSumRecord> {
    ExpSums::default().type2_sum(a, b, f, y, m_top, n_top, x)
}

pub fn cancellation_slope(
    f: &PseudoPolynomial,
    y: &Real,
    grid: &[u64],
) -> Result<(PowerFit, Vec<ExpSumRecord>)> {
    ExpSums::default().cancellation_slope(f, y, grid)
}

/// `|value| / X^exponent`.
pub fn bound_ratio(rec: &ExpSumRecord, exponent: f64) -> f64 {
    let a = rec.abs();
    if a == 0.0 {
        return 0.0;
    }
    a / (rec.x as f64).powf(exponent)
}

pub const CSV_HEADER: [&str; 12] = [
    "kind",
    "f",
    "y",
    "X",
    "M",
    "N",
    "re",
    "im",
    "abs",
    "terms",
    "phase_error",
    "ratio_vs_exponent",
];

/// Writes records with the fixed column layout; `ratio_vs_exponent` is empty
/// when no exponent is given.
pub fn write_csv<W: Write>(records: &[ExpSumRecord], exponent: Option<f64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in records {
        w.write_record([
            r.kind.as_str().to_string(),
            r.f.clone(),
            r.y.clone(),
            r.x.to_string(),
            opt(r.m),
            opt(r.n),
            r.value.re.to_string(),
            r.value.im.to_string(),
            r.abs().to_string(),
            r.terms.to_string(),
            r.phase_error_bound.to_string(),
            exponent.map(|e| bound_ratio(r, e).to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
