//! Desk-scale experiment drivers: running minima of `||xi floor(f(p))||`,
//! divisibility witnesses, the three smoothed sums, star discrepancy of
//! `f(p) mod 1`, and power-law decay fits.

use std::io::Write;
use std::ops::ControlFlow;

use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::Serialize;

use crate::bounds::{rho, rho_d, smoothing_params};
use crate::config::{Precision, RunConfig, SieveConfig};
use crate::error::{Error, Result};
use crate::exp_sums::ExpSums;
use crate::fit::{power_fit, PowerFit};
use crate::primes::Sieve;
use crate::pseudo_poly::{dist_to_int, Distance, PseudoPolynomial};
use crate::real::Real;
use crate::summation::Neumaier;

pub const MAX_SEARCH_X: u64 = 100_000_000;
const CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    MinSearch,
    Divisibility,
    ThreeSums,
    Discrepancy,
}

/// The parts of a run configuration that can change results.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigSnapshot {
    pub epsilon: f64,
    pub precision: Precision,
    pub sieve: SieveConfig,
    pub seed: u64,
}

impl From<&RunConfig> for ConfigSnapshot {
    fn from(c: &RunConfig) -> Self {
        Self {
            epsilon: c.epsilon,
            precision: c.precision,
            sieve: c.sieve,
            seed: c.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThreeSums {
    pub x: u64,
    pub m: u64,
    pub q: u64,
    pub h: u64,
    pub q_clamped: bool,
    pub prime_count: u64,
    /// `(1/q) |sum_p e(m xi f(p))|`.
    pub sum1: f64,
    /// `sum_{0<|h|<=H} |sum_p e((m xi + h) f(p))| / |h|`.
    pub sum2: f64,
    /// `(1/(H+1)) sum_{|h|<=H} (1 - |h|/(H+1)) |sum_p e(h f(p))|`.
    pub sum3: f64,
    /// `q X^{1-rho}`.
    pub context: f64,
    /// `X^{1-rho/2+eps} m^{1/2}`.
    pub balanced_bound: f64,
    pub phase_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub x: u64,
    pub value: f64,
    /// Certified bound on `|value - exact|`.
    pub error: f64,
    pub witness: Option<u64>,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
    /// Number of points behind the row, where that differs from `x`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sums: Option<ThreeSums>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRun {
    pub kind: ExperimentKind,
    pub f: String,
    pub xi: Option<String>,
    pub grid: Vec<u64>,
    pub rows: Vec<Row>,
    pub fit: Option<PowerFit>,
    pub config: ConfigSnapshot,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremFlag {
    pub x: u64,
    pub m_value: f64,
    pub bound: f64,
    pub ratio: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub m: u64,
    pub p: u64,
    #[serde(serialize_with = "ser_integer")]
    pub floor: Integer,
}

fn ser_integer<S: serde::Serializer>(n: &Integer, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(n)
}

/// Powers of two in `[lo, hi]`.
pub fn dyadic_grid(lo: u64, hi: u64) -> Vec<u64> {
    (0..64)
        .map(|k| 1u64 << k)
        .filter(|&x| x >= lo && x <= hi)
        .collect()
}

fn check_grid(grid: &[u64], max: u64) -> Result<()> {
    let Some(&last) = grid.last() else {
        return Err(Error::InsufficientData("empty grid".into()));
    };
    if grid[0] < 2 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("grid must be strictly ascending and start at 2 or more".into()));
    }
    if last > max {
        return Err(Error::Precondition(format!("grid maximum {last} exceeds {max}")));
    }
    Ok(())
}

/// Fit of positive values only; `None` when fewer than three remain.
fn optional_fit(rows: &[Row]) -> Option<PowerFit> {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.x as f64, r.value)).collect();
    power_fit(&pts).ok()
}

/// `value ~ C X^slope` on the positive points.
pub fn decay_fit(pairs: &[(f64, f64)]) -> Result<PowerFit> {
    power_fit(pairs)
}

/// Star discrepancy by the sorted-points formula
/// `max_i max(i/N - x_(i), x_(i) - (i-1)/N)`.
pub fn discrepancy(points: &[f64]) -> Result<f64> {
    let mut xs = sorted_unit(points, |x| (0.0..1.0).contains(x), |x| x.to_string())?;
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    Ok(xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let i = i as f64;
            ((i + 1.0) / n - x).max(x - i / n)
        })
        .fold(0.0, f64::max))
}

/// The same formula in exact rational arithmetic.
pub fn discrepancy_exact(points: &[Rational]) -> Result<Rational> {
    let mut xs = sorted_unit(points, |x| *x >= 0 && *x < 1, |x| x.to_string())?;
    xs.sort();
    let n = xs.len() as u64;
    let mut best = Rational::new();
    for (i, x) in xs.iter().enumerate() {
        let i = i as u64;
        let above = Rational::from((i + 1, n)) - x;
        let below = x.clone() - Rational::from((i, n));
        best = best.max(above).max(below);
    }
    Ok(best)
}

fn sorted_unit<T: Clone>(
    points: &[T],
    inside: impl Fn(&T) -> bool,
    show: impl Fn(&T) -> String,
) -> Result<Vec<T>> {
    if points.is_empty() {
        return Err(Error::InsufficientData("no points".into()));
    }
    if let Some(bad) = points.iter().find(|x| !inside(x)) {
        return Err(Error::Precondition(format!("point {} is outside [0, 1)", show(bad))));
    }
    Ok(points.to_vec())
}

/// `m(X) <= X^{-rho_d}` per grid point, with implied constant 1.
pub fn theorem_check(run: &ExperimentRun, rho_d: f64) -> Result<Vec<TheoremFlag>> {
    if run.kind != ExperimentKind::MinSearch {
        return Err(Error::Precondition("theorem_check needs a min_search run".into()));
    }
    Ok(run
        .rows
        .iter()
        .map(|r| {
            let bound = (r.x as f64).powf(-rho_d);
            TheoremFlag {
                x: r.x,
                m_value: r.value,
                bound,
                ratio: r.value / bound,
                holds: r.value <= bound,
            }
        })
        .collect())
}

/// Experiment driver sharing one configuration.
#[derive(Clone, Debug)]
pub struct Experiments {
    config: RunConfig,
    sums: ExpSums,
}

impl Experiments {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config: config.clone(),
            sums: ExpSums::new(config.precision, config.sieve),
        })
    }

    fn precision(&self) -> &Precision {
        &self.config.precision
    }

    fn sieve(&self) -> &Sieve {
        self.sums.sieve()
    }

    fn snapshot(&self) -> ConfigSnapshot {
        ConfigSnapshot::from(&self.config)
    }

    fn distance(&self, f: &PseudoPolynomial, xi: &Real, p: u64) -> Result<Distance> {
        let floor = f.floor_certified(p, self.precision())?;
        dist_to_int(xi, &floor, self.precision())
    }

    /// Running minimum of `||xi floor(f(p))||` over primes `p <= X`.
    pub fn min_search(&self, f: &PseudoPolynomial, xi: &Real, grid: &[u64]) -> Result<ExperimentRun> {
        check_grid(grid, MAX_SEARCH_X)?;
        let primes = self.sieve().range(1, *grid.last().expect("nonempty"))?.primes;
        let chunks: Vec<Result<Vec<Distance>>> = primes
            .par_chunks(CHUNK)
            .map(|c| c.iter().map(|&p| self.distance(f, xi, p)).collect())
            .collect();
        let mut dists = Vec::with_capacity(primes.len());
        for c in chunks {
            dists.extend(c?);
        }
        let rd = rho_d(f.theta())?.to_f64();
        let mut best: Option<(u64, Distance)> = None;
        let mut idx = 0;
        let mut rows = Vec::with_capacity(grid.len());
        for &x in grid {
            while idx < primes.len() && primes[idx] <= x {
                if best.as_ref().map_or(true, |(_, d)| dists[idx].value < d.value) {
                    best = Some((primes[idx], dists[idx]));
                }
                idx += 1;
            }
            let (p, d) = best.ok_or_else(|| Error::Precondition(format!("no primes up to {x}")))?;
            let bound = (x as f64).powf(-rd);
            rows.push(Row {
                x,
                value: d.value,
                error: d.error,
                witness: Some(p),
                bound: Some(bound),
                ratio: Some(d.value / bound),
                count: None,
                sums: None,
            });
        }
        Ok(ExperimentRun {
            kind: ExperimentKind::MinSearch,
            f: f.to_string(),
            xi: Some(xi.to_string()),
            grid: grid.to_vec(),
            fit: optional_fit(&rows),
            rows,
            config: self.snapshot(),
        })
    }

    /// Smallest prime `p <= p_cap` with `m | floor(f(p))`.
    pub fn divisibility_search(&self, f: &PseudoPolynomial, m: u64, p_cap: u64) -> Result<Option<Witness>> {
        Ok(self.divisibility_witnesses(f, &[m], p_cap)?.pop().flatten())
    }

    /// Smallest witnesses for every `m`, scanning primes in ascending order
    /// and stopping once all are found.
    pub fn divisibility_witnesses(
        &self,
        f: &PseudoPolynomial,
        ms: &[u64],
        p_cap: u64,
    ) -> Result<Vec<Option<Witness>>> {
        if ms.iter().any(|&m| m < 2 || m > u64::from(u32::MAX)) {
            return Err(Error::Precondition("m must lie in [2, 2^32)".into()));
        }
        let mut found: Vec<Option<Witness>> = vec![None; ms.len()];
        if p_cap < 2 {
            return Ok(found);
        }
        let mut open = ms.len();
        let mut failure = None;
        self.sieve().for_each_segment(1, p_cap, |primes| {
            for &p in primes {
                let floor = match f.floor_certified(p, self.precision()) {
                    Ok(v) => v,
                    Err(e) => {
                        failure = Some(e);
                        return ControlFlow::Break(());
                    }
                };
                for (slot, &m) in found.iter_mut().zip(ms) {
                    if slot.is_none() && floor.is_divisible_u(m as u32) {
                        *slot = Some(Witness {
                            m,
                            p,
                            floor: floor.clone(),
                        });
                        open -= 1;
                    }
                }
                if open == 0 {
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(found)
    }

    /// Witness growth for each `m`: `log p / log m` against the exponent
    /// `1/rho` predicted for `p` in terms of `m`.
    pub fn divisibility_run(&self, f: &PseudoPolynomial, ms: &[u64], p_cap: u64) -> Result<ExperimentRun> {
        let witnesses = self.divisibility_witnesses(f, ms, p_cap)?;
        let exponent = 1.0 / rho(f.theta())?.to_f64();
        let rows = ms
            .iter()
            .zip(&witnesses)
            .map(|(&m, w)| {
                let (witness, value) = match w {
                    Some(w) => (Some(w.p), (w.p as f64).ln() / (m as f64).ln()),
                    None => (None, f64::NAN),
                };
                Row {
                    x: m,
                    value,
                    error: 0.0,
                    witness,
                    bound: Some(exponent),
                    ratio: witness.map(|_| value / exponent),
                    count: None,
                sums: None,
                }
            })
            .collect();
        Ok(ExperimentRun {
            kind: ExperimentKind::Divisibility,
            f: f.to_string(),
            xi: None,
            grid: ms.to_vec(),
            rows,
            fit: None,
            config: self.snapshot(),
        })
    }

    /// The three sums controlling `sum_p e(m xi floor(f(p)))` after smoothing.
    pub fn three_sums_report(&self, f: &PseudoPolynomial, xi: &Real, m: u64, x: u64) -> Result<ThreeSums> {
        if m < 1 || x < 100 {
            return Err(Error::Precondition("need m >= 1 and X >= 100".into()));
        }
        let primes = self.sieve().range(1, x)?.primes;
        let r = rho(f.theta())?.to_f64();
        let eps = self.config.epsilon;
        let sp = smoothing_params(m, x as f64, r, eps)?;
        let mq = Rational::from(m);
        let sum_at = |y: &Real| self.sums.sum_over(f, y, &primes);
        let mut err = Neumaier::default();

        let (s1, e1) = sum_at(&xi.scale(&mq))?;
        let sum1 = s1.norm() / sp.q as f64;
        err.add(e1 / sp.q as f64);

        let mut sum2 = Neumaier::default();
        for h in 1..=sp.h as i64 {
            for sh in [h, -h] {
                let (s, e) = sum_at(&xi.affine(&mq, &Rational::from(sh)))?;
                sum2.add(s.norm() / h as f64);
                err.add(e / h as f64);
            }
        }

        // |sum e(-h f)| = |sum e(h f)|
        let scale = sp.h as f64 + 1.0;
        let mut sum3 = Neumaier::default();
        for h in 0..=sp.h as i64 {
            let w = (1.0 - h as f64 / scale) / scale * if h == 0 { 1.0 } else { 2.0 };
            let (s, e) = sum_at(&Real::from_integer(h))?;
            sum3.add(w * s.norm());
            err.add(w * e);
        }

        let xf = x as f64;
        Ok(ThreeSums {
            x,
            m,
            q: sp.q,
            h: sp.h,
            q_clamped: sp.clamped,
            prime_count: primes.len() as u64,
            sum1,
            sum2: sum2.value(),
            sum3: sum3.value(),
            context: sp.q as f64 * xf.powf(1.0 - r),
            balanced_bound: xf.powf(1.0 - r / 2.0 + eps) * (m as f64).sqrt(),
            phase_error: err.value(),
        })
    }

    /// Three-sum reports along a grid; the row value is `sum1 + sum2 + sum3`
    /// and the bound is the balanced one.
    pub fn three_sums_run(&self, f: &PseudoPolynomial, xi: &Real, m: u64, grid: &[u64]) -> Result<ExperimentRun> {
        check_grid(grid, MAX_SEARCH_X)?;
        let rows = grid
            .iter()
            .map(|&x| {
                let s = self.three_sums_report(f, xi, m, x)?;
                let value = s.sum1 + s.sum2 + s.sum3;
                Ok(Row {
                    x,
                    value,
                    error: s.phase_error,
                    witness: None,
                    bound: Some(s.balanced_bound),
                    ratio: Some(value / s.balanced_bound),
                    count: None,
                    sums: Some(s),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExperimentRun {
            kind: ExperimentKind::ThreeSums,
            f: f.to_string(),
            xi: Some(xi.to_string()),
            grid: grid.to_vec(),
            rows,
            fit: None,
            config: self.snapshot(),
        })
    }

    /// `{f(p)}` for primes `p <= X`, each certified to the phase tolerance.
    pub fn fractional_parts(&self, f: &PseudoPolynomial, x: u64) -> Result<Vec<f64>> {
        let primes = self.sieve().range(1, x)?.primes;
        let one = Real::from_integer(1);
        let chunks: Vec<Result<Vec<f64>>> = primes
            .par_chunks(CHUNK)
            .map(|c| {
                c.iter()
                    .map(|&p| Ok(f.scaled_phase(p, &one, self.precision())?.value))
                    .collect()
            })
            .collect();
        let mut out = Vec::with_capacity(primes.len());
        for c in chunks {
            out.extend(c?);
        }
        Ok(out)
    }

    /// Star discrepancy of `{f(p)}`, `p <= X`, along a grid.
    pub fn discrepancy_run(&self, f: &PseudoPolynomial, grid: &[u64]) -> Result<ExperimentRun> {
        check_grid(grid, MAX_SEARCH_X)?;
        let parts = self.fractional_parts(f, *grid.last().expect("nonempty"))?;
        let primes = self.sieve().range(1, *grid.last().expect("nonempty"))?.primes;
        let rows = grid
            .iter()
            .map(|&x| {
                let n = primes.partition_point(|&p| p <= x);
                let d = discrepancy(&parts[..n])?;
                Ok(Row {
                    x,
                    value: d,
                    error: n as f64 * crate::pseudo_poly::PHASE_TOLERANCE,
                    witness: None,
                    bound: None,
                    ratio: None,
                    count: Some(n as u64),
                sums: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExperimentRun {
            kind: ExperimentKind::Discrepancy,
            f: f.to_string(),
            xi: None,
            grid: grid.to_vec(),
            fit: optional_fit(&rows),
            rows,
            config: self.snapshot(),
        })
    }

    /// Recomputes every witness of a run at doubled precision.
    pub fn reverify(&self, run: &ExperimentRun, f: &PseudoPolynomial, xi: Option<&Real>) -> Result<Vec<bool>> {
        let precision = Precision {
            start_bits: self.precision().start_bits * 2,
            max_bits: self.precision().max_bits * 2,
        };
        run.rows
            .iter()
            .map(|row| {
                let Some(p) = row.witness else {
                    return Ok(true);
                };
                let floor = f.floor_certified(p, &precision)?;
                Ok(match run.kind {
                    ExperimentKind::Divisibility => floor.is_divisible_u(row.x as u32),
                    ExperimentKind::MinSearch => {
                        let xi = xi.ok_or_else(|| Error::Precondition("min_search needs xi".into()))?;
                        let d = dist_to_int(xi, &floor, &precision)?;
                        p <= row.x && (d.value - row.value).abs() <= d.error + row.error
                    }
                    _ => true,
                })
            })
            .collect()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentRun {
    pub fn csv_header(&self) -> &'static [&'static str] {
        match self.kind {
            ExperimentKind::MinSearch => &["X", "p_star", "m_value", "bound_X_pow_neg_rho_d", "ratio"],
            ExperimentKind::Divisibility => &["m", "witness_p", "log_p_over_log_m", "bound_exponent"],
            ExperimentKind::ThreeSums => &[
                "X", "m", "q", "H", "sum1", "sum2", "sum3", "context", "balanced_bound",
            ],
            ExperimentKind::Discrepancy => &["X", "N", "D_star"],
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.csv_header())?;
        for (i, r) in self.rows.iter().enumerate() {
            let witness = r.witness.map(|p| p.to_string()).unwrap_or_default();
            let rec: Vec<String> = match self.kind {
                ExperimentKind::MinSearch => vec![
                    r.x.to_string(),
                    witness,
                    r.value.to_string(),
                    opt(r.bound),
                    opt(r.ratio),
                ],
                ExperimentKind::Divisibility => vec![
                    r.x.to_string(),
                    witness,
                    if r.witness.is_some() { r.value.to_string() } else { String::new() },
                    opt(r.bound),
                ],
                ExperimentKind::ThreeSums => {
                    let s = r.sums.as_ref().expect("three-sum rows carry their sums");
                    vec![
                        s.x.to_string(),
                        s.m.to_string(),
                        s.q.to_string(),
                        s.h.to_string(),
                        s.sum1.to_string(),
                        s.sum2.to_string(),
                        s.sum3.to_string(),
                        s.context.to_string(),
                        s.balanced_bound.to_string(),
                    ]
                }
                ExperimentKind::Discrepancy => vec![
                    r.x.to_string(),
                    r.count.unwrap_or_default().to_string(),
                    r.value.to_string(),
                ],
            };
            debug_assert_eq!(rec.len(), self.csv_header().len(), "row {i}");
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> Experiments {
        Experiments::new(&RunConfig::default()).unwrap()
    }

    fn f(s: &str) -> PseudoPolynomial {
        s.parse().unwrap()
    }

    #[test]
    fn zero_xi_gives_zero_at_two() {
        let run = engine().min_search(&f("x^3.5+x"), &Real::zero(), &[10, 100, 1000]).unwrap();
        for r in &run.rows {
            assert_eq!(r.value, 0.0);
            assert_eq!(r.witness, Some(2));
        }
    }

    #[test]
    fn third_hits_zero_once_divisible() {
        let p = f("x^2+x^1.5");
        let xi = Real::from_rational(Rational::from((1, 3)));
        let run = engine().min_search(&p, &xi, &[3, 5, 7, 11, 100]).unwrap();
        // floors: 2 -> 6, divisible by 3
        assert_eq!(run.rows[0].witness, Some(2));
        assert_eq!(run.rows[0].value, 0.0);
    }

    #[test]
    fn min_search_monotone_and_reverifies() {
        let p = f("x^3.5+x");
        let xi: Real = "sqrt2".parse().unwrap();
        let e = engine();
        let run = e.min_search(&p, &xi, &dyadic_grid(4, 1 << 12)).unwrap();
        assert!(run.rows.windows(2).all(|w| w[1].value <= w[0].value));
        assert!(e.reverify(&run, &p, Some(&xi)).unwrap().iter().all(|&ok| ok));
        let flags = theorem_check(&run, 1.0 / 450.0).unwrap();
        assert_eq!(flags.len(), run.grid.len());
    }

    #[test]
    fn divisibility_examples() {
        let e = engine();
        let w = e.divisibility_search(&f("x^3.5"), 2, 100).unwrap().unwrap();
        assert_eq!(w.p, 3);
        assert_eq!(w.floor, 46);
        assert!(e.divisibility_search(&f("x^3.5"), 2, 2).unwrap().is_none());
        assert!(e.divisibility_search(&f("x^3.5"), 1, 10).is_err());
        let run = e.divisibility_run(&f("x^3.5+x"), &[2, 3, 5, 7], 1000).unwrap();
        assert!(e.reverify(&run, &f("x^3.5+x"), None).unwrap().iter().all(|&ok| ok));
    }

    #[test]
    fn discrepancy_examples() {
        assert_eq!(discrepancy(&[0.5]).unwrap(), 0.5);
        for n in [1u64, 10, 100, 1000] {
            let pts: Vec<Rational> = (1..=n).map(|i| Rational::from((2 * i - 1, 2 * n))).collect();
            assert_eq!(discrepancy_exact(&pts).unwrap(), Rational::from((1, 2 * n)));
            let fl: Vec<f64> = pts.iter().map(|q| q.to_f64()).collect();
            assert!((discrepancy(&fl).unwrap() - 0.5 / n as f64).abs() < 1e-15);
        }
        assert!(discrepancy(&[]).is_err());
        assert!(discrepancy(&[1.0]).is_err());
        assert!(discrepancy(&[-0.1]).is_err());
    }

    #[test]
    fn three_sums_zero_frequency() {
        let e = engine();
        let s = e.three_sums_report(&f("x^3.5+x"), &Real::zero(), 1, 1000).unwrap();
        assert_eq!(s.sum1, 168.0 / s.q as f64);
        assert!(s.sum3 <= 168.0 + s.phase_error);
        assert!(e.three_sums_report(&f("x^3.5"), &Real::zero(), 1, 99).is_err());
    }

    #[test]
    fn csv_headers() {
        let run = engine().min_search(&f("x^3.5"), &Real::zero(), &[10, 20]).unwrap();
        let mut buf = Vec::new();
        run.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "X,p_star,m_value,bound_X_pow_neg_rho_d,ratio");
        assert_eq!(text.lines().count(), 3);
        let json: serde_json::Value = serde_json::from_str(&run.to_json().unwrap()).unwrap();
        assert_eq!(json["kind"], "min_search");
        assert!(json["config"]["epsilon"].is_number());
    }
}
