//! Trigonometric smoothing of interval indicators (Vaaler) and the
//! Montgomery pigeonhole inequality for `sum_m |sum_n e(m x_n)|`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::summation::{e, Neumaier};

/// Indicator approximant `sum_{|h| <= H} c_h e(ht)` of `[left, right)` mod 1.
#[derive(Clone, Debug, PartialEq)]
pub struct VaalerApprox {
    left: f64,
    right: f64,
    h: u32,
    /// `c_0, c_1, ..., c_H`; `c_{-h}` is the conjugate of `c_h`.
    coefficients: Vec<Complex64>,
}

/// Vaaler's weight `pi u (1-u) cot(pi u) + u` on `0 < u < 1`.
fn vaaler_weight(u: f64) -> f64 {
    let (s, c) = (PI * u).sin_cos();
    PI * u * (1.0 - u) * c / s + u
}

/// Builds the approximant from the smoothed sawtooth
/// `psi*(t) = -sum_{1<=|h|<=H} phi(h/(H+1)) e(ht) / (2 pi i h)` via
/// `1_I(t) = (b - a) + psi(a - t) - psi(b - t)`.
pub fn vaaler_coefficients(interval: (f64, f64), h: u32) -> Result<VaalerApprox> {
    let (a, b) = interval;
    let len = b - a;
    if h == 0 || !a.is_finite() || !b.is_finite() || !(0.0..=1.0).contains(&len) {
        return Err(Error::Precondition(format!(
            "need H >= 1 and an interval of length in [0, 1], got H={h}, ({a}, {b})"
        )));
    }
    let mut coefficients = Vec::with_capacity(h as usize + 1);
    coefficients.push(Complex64::new(len, 0.0));
    let scale = f64::from(h) + 1.0;
    for k in 1..=h {
        let kf = f64::from(k);
        let phi = vaaler_weight(kf / scale);
        let diff = e(-(kf * a).rem_euclid(1.0)) - e(-(kf * b).rem_euclid(1.0));
        coefficients.push(diff * phi / Complex64::new(0.0, 2.0 * PI * kf));
    }
    Ok(VaalerApprox {
        left: a,
        right: b,
        h,
        coefficients,
    })
}

impl VaalerApprox {
    pub fn interval(&self) -> (f64, f64) {
        (self.left, self.right)
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    /// `c_h` for `|h| <= H`, zero beyond.
    pub fn coefficient(&self, h: i64) -> Complex64 {
        match self.coefficients.get(h.unsigned_abs() as usize) {
            Some(c) if h >= 0 => *c,
            Some(c) => c.conj(),
            None => Complex64::default(),
        }
    }

    /// `1` on `[left, right)` mod 1.
    pub fn indicator(&self, t: f64) -> f64 {
        let len = self.right - self.left;
        if len >= 1.0 {
            return 1.0;
        }
        f64::from(u8::from((t - self.left).rem_euclid(1.0) < len))
    }

    /// The (real) approximant at `t`.
    pub fn evaluate(&self, t: f64) -> f64 {
        let mut acc = Neumaier::default();
        for (k, c) in self.coefficients.iter().enumerate().skip(1) {
            acc.add(2.0 * (c * e((k as f64 * t).rem_euclid(1.0))).re);
        }
        acc.add(self.coefficients[0].re);
        acc.value()
    }

    /// Approximant of a point set: `sum_h c_h sum_s e(h s)`.
    pub fn evaluate_sum(&self, points: &[f64]) -> f64 {
        let mut acc = Neumaier::default();
        for &s in points {
            acc.add(self.evaluate(s));
        }
        acc.value()
    }

    /// Pointwise bound on `|1_I(t) - approximant(t)|`.
    pub fn majorant(&self, t: f64) -> f64 {
        interval_majorant((self.left, self.right), self.h, t)
    }
}

/// `F_H(t) / (H+1) = (1/(H+1)) sum_{|h|<=H} (1 - |h|/(H+1)) e(ht)`, in the
/// closed form `(sin(pi (H+1) t) / ((H+1) sin(pi t)))^2`.
pub fn vaaler_error_majorant(h: u32, t: f64) -> f64 {
    let t = t.rem_euclid(1.0);
    let n = f64::from(h) + 1.0;
    let den = (PI * t).sin();
    if den == 0.0 {
        return 1.0;
    }
    let num = (PI * (n * t).rem_euclid(1.0)).sin();
    let r = num / (n * den);
    r * r
}

/// Error bound for the indicator of `[a, b)`: half a kernel at each endpoint.
pub fn interval_majorant(interval: (f64, f64), h: u32, t: f64) -> f64 {
    0.5 * (vaaler_error_majorant(h, t - interval.0) + vaaler_error_majorant(h, t - interval.1))
}

/// Largest `|1_I(t) - approximant(t)| - majorant(t)` over `t = j / grid`,
/// skipping points within `1/(10 grid)` of either endpoint.
pub fn vaaler_check(interval: (f64, f64), h: u32, grid: usize) -> Result<f64> {
    if grid < 100 {
        return Err(Error::Precondition("grid size must be at least 100".into()));
    }
    let approx = vaaler_coefficients(interval, h)?;
    let guard = 0.1 / grid as f64;
    let near = |t: f64, x: f64| {
        let d = (t - x).rem_euclid(1.0);
        d.min(1.0 - d) < guard
    };
    let mut worst = f64::NEG_INFINITY;
    for j in 0..grid {
        let t = j as f64 / grid as f64;
        if near(t, interval.0) || near(t, interval.1) {
            continue;
        }
        let delta = (approx.indicator(t) - approx.evaluate(t)).abs();
        worst = worst.max(delta - approx.majorant(t));
    }
    Ok(worst)
}

/// Distance to the nearest integer.
pub fn dist_to_nearest(x: f64) -> f64 {
    let f = x.rem_euclid(1.0);
    f.min(1.0 - f)
}

/// `sum_{m <= M} |sum_n e(m x_n)|`.
pub fn montgomery_lhs(xs: &[f64], m: u32) -> f64 {
    let mut outer = Neumaier::default();
    for k in 1..=m {
        let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
        for &x in xs {
            let z = e((f64::from(k) * x.rem_euclid(1.0)).rem_euclid(1.0));
            re.add(z.re);
            im.add(z.im);
        }
        outer.add(re.value().hypot(im.value()));
    }
    outer.value()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MontgomeryCheck {
    pub holds: bool,
    pub lhs: f64,
    pub threshold: f64,
    /// Nonempty input with every `||x_n|| >= 1/M`.
    pub hypothesis_ok: bool,
}

pub fn montgomery_check(xs: &[f64], m: u32) -> MontgomeryCheck {
    let lhs = montgomery_lhs(xs, m);
    let threshold = xs.len() as f64 / 6.0;
    let hypothesis_ok = m >= 1
        && !xs.is_empty()
        && xs.iter().all(|&x| dist_to_nearest(x) >= 1.0 / f64::from(m));
    MontgomeryCheck {
        holds: lhs > threshold,
        lhs,
        threshold,
        hypothesis_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct Fejer sum, independent of the closed form.
    fn fejer_direct(h: u32, t: f64) -> f64 {
        let n = f64::from(h) + 1.0;
        let mut s = 1.0;
        for k in 1..=h {
            s += 2.0 * (1.0 - f64::from(k) / n) * (2.0 * PI * f64::from(k) * t).cos();
        }
        s / n
    }

    #[test]
    fn majorant_values() {
        assert_eq!(vaaler_error_majorant(7, 0.0), 1.0);
        assert!(vaaler_error_majorant(1, 0.5).abs() < 1e-30);
        for h in [1, 4, 16, 64] {
            for j in 0..200 {
                let t = j as f64 / 200.0 + 0.001;
                let v = vaaler_error_majorant(h, t);
                assert!(v >= 0.0);
                assert!((v - fejer_direct(h, t)).abs() < 1e-12, "h={h} t={t}");
            }
        }
    }

    #[test]
    fn zeroth_coefficient_is_length() {
        for h in [1, 5, 16] {
            assert_eq!(vaaler_coefficients((0.0, 0.5), h).unwrap().coefficient(0).re, 0.5);
        }
        let full = vaaler_coefficients((0.0, 1.0), 16).unwrap();
        assert_eq!(full.coefficient(0).re, 1.0);
        for k in 1..=16 {
            assert!(full.coefficient(k).norm() < 1e-15);
        }
        let c1 = vaaler_coefficients((0.25, 0.75), 16).unwrap().coefficient(1);
        assert!(c1.norm() <= 0.5);
        // phi(1/17) sin(pi/2) / pi, up to a unimodular factor
        assert!((c1.norm() - vaaler_weight(1.0 / 17.0) / PI).abs() < 1e-15);
        assert!(vaaler_coefficients((0.2, 1.5), 4).is_err());
        assert!(vaaler_coefficients((0.0, 0.5), 0).is_err());
    }

    #[test]
    fn coefficient_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a: f64 = rng.gen_range(-2.0..2.0);
            let b = a + rng.gen_range(0.0..=1.0);
            let h = rng.gen_range(1..100);
            let v = vaaler_coefficients((a, b), h).unwrap();
            for k in -(h as i64)..=(h as i64) {
                assert!(v.coefficient(k).norm() <= 1.0 / (k.unsigned_abs() as f64 + 1.0));
            }
            assert_eq!(v.coefficient(h as i64 + 1), Complex64::default());
        }
    }

    #[test]
    fn check_on_standard_intervals() {
        assert!(vaaler_check((0.0, 1.0), 8, 1000).unwrap() <= 0.0);
        assert!(vaaler_check((0.0, 0.5), 16, 10_000).unwrap() <= 1e-12);
        assert!(vaaler_check((0.3, 0.3), 16, 1000).unwrap() <= 1e-12);
        assert!(vaaler_check((0.0, 0.5), 16, 99).is_err());
    }

    #[test]
    fn weight_in_unit_range() {
        for j in 1..1000 {
            let w = vaaler_weight(j as f64 / 1000.0);
            assert!((0.0..=1.0).contains(&w));
        }
    }

    #[test]
    fn montgomery_examples() {
        let half = vec![0.5; 30];
        assert!((montgomery_lhs(&half, 2) - 60.0).abs() < 1e-12);
        let zeros = vec![0.0; 17];
        assert!((montgomery_lhs(&zeros, 1) - 17.0).abs() < 1e-12);
        let c = montgomery_check(&half, 2);
        assert!(c.hypothesis_ok && c.holds);
        assert_eq!(c.threshold, 5.0);
        let c = montgomery_check(&[0.3, 0.0, 0.7], 10);
        assert!(!c.hypothesis_ok);
        assert!(c.lhs > 0.0);
        assert!(!montgomery_check(&[], 3).hypothesis_ok);
    }

    #[test]
    fn montgomery_random_hypothesis() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..1000)
            .map(|_| {
                let d = rng.gen_range(1.0 / 50.0..=0.5);
                if rng.gen() {
                    d
                } else {
                    1.0 - d
                }
            })
            .collect();
        let c = montgomery_check(&xs, 50);
        assert!(c.hypothesis_ok);
        assert!(c.lhs > 1000.0 / 6.0);
    }
}
