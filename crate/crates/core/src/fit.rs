//! Least-squares power-law fits on `(log X, log value)`.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    pub slope: f64,
    /// Natural-log intercept: `value ~ exp(intercept) * X^slope`.
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub used: usize,
    /// Abscissae dropped because their value was not positive.
    pub excluded: Vec<f64>,
}

/// Fits `value = C X^slope`; nonpositive values are excluded and reported.
pub fn power_fit(points: &[(f64, f64)]) -> Result<PowerFit> {
    let mut excluded = Vec::new();
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(x, v) in points {
        if v > 0.0 && v.is_finite() && x > 0.0 {
            xs.push(x.ln());
            ys.push(v.ln());
        } else {
            excluded.push(x);
        }
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} positive points, need at least 3",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok(PowerFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        used: xs.len(),
        excluded,
    })
}
