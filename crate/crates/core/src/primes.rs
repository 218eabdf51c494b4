//! Segmented sieve of Eratosthenes, von Mangoldt weights, and the
//! divisor functions `d_m`.

use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::config::SieveConfig;
use crate::error::{Error, Result};
use crate::summation::sum_f64;

/// Largest admissible upper end of a sieve range.
pub const MAX_HI: u64 = 1 << 40;

/// Primes in the half-open range `(lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveSegment {
    pub lo: u64,
    pub hi: u64,
    pub primes: Vec<u64>,
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Plain sieve up to `limit` inclusive.
fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Primes in `(lo, hi]` given all primes up to `sqrt(hi)`.
fn sieve_block(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let len = (hi - lo) as usize;
    let mut composite = vec![false; len];
    for &p in base {
        if p * p > hi {
            break;
        }
        // smallest multiple of p above lo, but not p itself
        let first = ((lo / p) + 1) * p;
        let mut m = first.max(p * p);
        while m <= hi {
            composite[(m - lo - 1) as usize] = true;
            m += p;
        }
    }
    composite
        .iter()
        .enumerate()
        .filter(|&(i, &c)| !c && lo + 1 + i as u64 >= 2)
        .map(|(i, _)| lo + 1 + i as u64)
        .collect()
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Sieve {
    config: SieveConfig,
}

impl Sieve {
    pub fn new(config: SieveConfig) -> Self {
        Self { config }
    }

    fn segment_len(&self) -> u64 {
        1u64 << self.config.segment_bits
    }

    fn check(&self, lo: u64, hi: u64) -> Result<()> {
        if lo < 1 || lo >= hi || hi > MAX_HI {
            return Err(Error::InvalidRange {
                lo,
                hi,
                reason: "need 1 <= lo < hi <= 2^40".into(),
            });
        }
        Ok(())
    }

    fn blocks(&self, lo: u64, hi: u64) -> Vec<(u64, u64)> {
        let step = self.segment_len();
        let mut out = Vec::new();
        let mut a = lo;
        while a < hi {
            let b = (a + step).min(hi);
            out.push((a, b));
            a = b;
        }
        out
    }

    /// Exact prime list for `(lo, hi]`; segments are sieved in parallel and
    /// concatenated in ascending order.
    pub fn range(&self, lo: u64, hi: u64) -> Result<SieveSegment> {
        self.check(lo, hi)?;
        if hi - lo > self.config.max_span {
            return Err(Error::RangeTooLarge {
                lo,
                hi,
                budget: self.config.max_span,
            });
        }
        let base = small_primes(isqrt(hi));
        let parts: Vec<Vec<u64>> = self
            .blocks(lo, hi)
            .into_par_iter()
            .map(|(a, b)| sieve_block(a, b, &base))
            .collect();
        Ok(SieveSegment {
            lo,
            hi,
            primes: parts.concat(),
        })
    }

    /// `pi(x)`, counted segment by segment without materializing the list.
    pub fn prime_count(&self, x: u64) -> Result<u64> {
        if x < 2 {
            return Ok(0);
        }
        self.check(1, x)?;
        let base = small_primes(isqrt(x));
        Ok(self
            .blocks(1, x)
            .into_par_iter()
            .map(|(a, b)| sieve_block(a, b, &base).len() as u64)
            .sum())
    }

    /// Visits the primes of `(lo, hi]` one segment at a time, ascending,
    /// until `visit` breaks.
    pub fn for_each_segment<B, F>(&self, lo: u64, hi: u64, mut visit: F) -> Result<Option<B>>
    where
        F: FnMut(&[u64]) -> ControlFlow<B>,
    {
        self.check(lo, hi)?;
        let base = small_primes(isqrt(hi));
        for (a, b) in self.blocks(lo, hi) {
            if let ControlFlow::Break(v) = visit(&sieve_block(a, b, &base)) {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }

    /// `(n, Lambda(n))` for every prime power `n` in `(lo, hi]`, ascending.
    pub fn von_mangoldt_weights(&self, lo: u64, hi: u64) -> Result<Vec<(u64, f64)>> {
        let primes = self.range(lo, hi)?.primes;
        let mut out: Vec<(u64, f64)> = primes.iter().map(|&p| (p, (p as f64).ln())).collect();
        for p in small_primes(isqrt(hi)) {
            let mut pk = p * p;
            loop {
                if pk > lo {
                    out.push((pk, (p as f64).ln()));
                }
                match pk.checked_mul(p) {
                    Some(next) if next <= hi => pk = next,
                    _ => break,
                }
            }
        }
        out.sort_unstable_by_key(|&(n, _)| n);
        Ok(out)
    }
}

pub fn sieve_range(lo: u64, hi: u64) -> Result<SieveSegment> {
    Sieve::default().range(lo, hi)
}

pub fn prime_count(x: u64) -> Result<u64> {
    Sieve::default().prime_count(x)
}

pub fn von_mangoldt_weights(lo: u64, hi: u64) -> Result<Vec<(u64, f64)>> {
    Sieve::default().von_mangoldt_weights(lo, hi)
}

/// Chebyshev `psi(x) = sum_{n <= x} Lambda(n)`.
pub fn chebyshev_psi(x: u64) -> Result<f64> {
    if x < 2 {
        return Ok(0.0);
    }
    Ok(sum_f64(von_mangoldt_weights(1, x)?.into_iter().map(|(_, w)| w)))
}

/// Number of ways to place `e` equal prime factors into `m` ordered slots.
fn multichoose(e: u32, m: u32) -> u64 {
    // C(e + m - 1, m - 1)
    let k = m.saturating_sub(1) as u64;
    let mut acc = 1u64;
    for i in 1..=k {
        acc = acc * (e as u64 + i) / i;
    }
    acc
}

/// `d_m(n)`: ordered factorizations of `n` into `m` positive factors.
pub fn divisor_function(n: u64, m: u32) -> u64 {
    assert!(n >= 1, "d_m(n) needs n >= 1");
    if m == 0 {
        return u64::from(n == 1);
    }
    let mut rest = n;
    let mut acc = 1u64;
    let mut p = 2u64;
    while p * p <= rest {
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            acc *= multichoose(e, m);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        acc *= multichoose(1, m);
    }
    acc
}

/// `d_m(n)` for `0 <= n <= limit`, with index 0 set to 0.
pub fn divisor_table(limit: usize, m: u32) -> Vec<u64> {
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    let mut d = vec![0u64; limit + 1];
    let mut exp = vec![0u32; limit + 1];
    let mut rest = vec![0usize; limit + 1];
    if limit >= 1 {
        d[1] = 1;
    }
    for n in 2..=limit {
        let p = spf[n] as usize;
        let k = n / p;
        if k % p == 0 {
            exp[n] = exp[k] + 1;
            rest[n] = rest[k];
        } else {
            exp[n] = 1;
            rest[n] = k;
        }
        d[n] = d[rest[n]] * multichoose(exp[n], m);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ranges() {
        assert_eq!(sieve_range(1, 10).unwrap().primes, vec![2, 3, 5, 7]);
        assert_eq!(sieve_range(10, 30).unwrap().primes, vec![11, 13, 17, 19, 23, 29]);
        assert_eq!(sieve_range(2, 3).unwrap().primes, vec![3]);
        assert_eq!(sieve_range(1, 2).unwrap().primes, vec![2]);
    }

    #[test]
    fn invalid_ranges() {
        assert!(matches!(sieve_range(10, 10), Err(Error::InvalidRange { .. })));
        assert!(matches!(sieve_range(0, 10), Err(Error::InvalidRange { .. })));
        assert!(matches!(sieve_range(1, MAX_HI + 1), Err(Error::InvalidRange { .. })));
        let tight = Sieve::new(SieveConfig {
            segment_bits: 10,
            max_span: 1000,
        });
        assert!(matches!(tight.range(1, 5000), Err(Error::RangeTooLarge { .. })));
    }

    #[test]
    fn counts() {
        assert_eq!(prime_count(10).unwrap(), 4);
        assert_eq!(prime_count(100).unwrap(), 25);
        assert_eq!(prime_count(1).unwrap(), 0);
        let small = Sieve::new(SieveConfig {
            segment_bits: 8,
            max_span: 1 << 32,
        });
        assert_eq!(small.prime_count(100_000).unwrap(), 9592);
    }

    #[test]
    fn lambda_small() {
        let w = von_mangoldt_weights(1, 10).unwrap();
        let ns: Vec<u64> = w.iter().map(|x| x.0).collect();
        assert_eq!(ns, vec![2, 3, 4, 5, 7, 8, 9]);
        let ln = |p: f64| p.ln();
        let expect = [ln(2.0), ln(3.0), ln(2.0), ln(5.0), ln(7.0), ln(2.0), ln(3.0)];
        for ((_, a), b) in w.iter().zip(expect) {
            assert_eq!(*a, b);
        }
        assert_eq!(von_mangoldt_weights(1, 2).unwrap(), vec![(2, 2f64.ln())]);
        // prime powers straddling lo
        let w = von_mangoldt_weights(8, 9).unwrap();
        assert_eq!(w, vec![(9, 3f64.ln())]);
    }

    #[test]
    fn psi_near_x() {
        let psi = chebyshev_psi(10_000).unwrap();
        assert!((psi - 10_000.0).abs() < 300.0);
        // ln(2^3 * 3^2 * 5 * 7) = ln 2520
        assert!((chebyshev_psi(10).unwrap() - 2520f64.ln()).abs() < 1e-12);
    }

    fn brute_dm(n: u64, m: u32) -> u64 {
        if m == 1 {
            return 1;
        }
        (1..=n).filter(|d| n % d == 0).map(|d| brute_dm(n / d, m - 1)).sum()
    }

    #[test]
    fn divisor_function_cases() {
        assert_eq!(divisor_function(1, 3), 1);
        assert_eq!(divisor_function(4, 3), 6);
        for p in [2, 3, 97, 7919] {
            assert_eq!(divisor_function(p, 4), 4);
        }
        for n in 1..=200 {
            for m in 2..=4 {
                assert_eq!(divisor_function(n, m), brute_dm(n, m), "d_{m}({n})");
            }
        }
    }

    #[test]
    fn divisor_table_matches_direct() {
        for m in 1..=4 {
            let t = divisor_table(2000, m);
            for n in 1..=2000u64 {
                assert_eq!(t[n as usize], divisor_function(n, m));
            }
        }
    }

    #[test]
    fn early_exit_segments() {
        let s = Sieve::new(SieveConfig {
            segment_bits: 8,
            max_span: 1 << 32,
        });
        let mut seen = 0;
        let hit = s
            .for_each_segment(1, 1_000_000, |ps| {
                seen += 1;
                match ps.iter().find(|&&p| p > 1000) {
                    Some(&p) => ControlFlow::Break(p),
                    None => ControlFlow::Continue(()),
                }
            })
            .unwrap();
        assert_eq!(hit, Some(1009));
        assert!(seen < 10);
    }
}
