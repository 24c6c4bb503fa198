//! Solve-time scaling fits.

use crate::bench::runner::{run_case, CaseSpec, SolveReport};
use crate::error::{BiotError, Result};

/// Measured solve times and the least-squares slope of `log t` against
/// `log N`, `N` the number of unknowns.
#[derive(Debug, Clone)]
pub struct TimingResult {
    /// `(unknowns, solve seconds)`.
    pub points: Vec<(usize, f64)>,
    pub slope: f64,
    pub reports: Vec<SolveReport>,
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(usize, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(BiotError::InvalidParameter(format!(
            "a scaling fit needs at least 3 sizes, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(n, t)| n == 0 || !(t > 0.0)) {
        return Err(BiotError::InvalidParameter("scaling fit needs positive sizes and times".into()));
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    if sxx == 0.0 {
        return Err(BiotError::InvalidParameter("scaling fit needs distinct sizes".into()));
    }
    Ok(sxy / sxx)
}

/// Runs `base` at every mesh size in `ns` (keeping the fastest of `repeats`
/// solves) and fits the scaling slope. Only inexact preconditioners are
/// accepted.
pub fn timing_scaling(base: &CaseSpec, ns: &[usize], repeats: usize) -> Result<TimingResult> {
    if !base.inexact {
        return Err(BiotError::InvalidParameter(
            "timing fits use inexact preconditioners only".into(),
        ));
    }
    if ns.len() < 3 {
        return Err(BiotError::InvalidParameter(format!(
            "a scaling fit needs at least 3 sizes, got {}",
            ns.len()
        )));
    }
    let mut points = Vec::with_capacity(ns.len());
    let mut reports = Vec::with_capacity(ns.len());
    for &n in ns {
        let case = CaseSpec { n, ..*base };
        let mut best: Option<SolveReport> = None;
        for _ in 0..repeats.max(1) {
            let r = run_case(&case)?;
            if best.as_ref().map_or(true, |b| r.solve_s < b.solve_s) {
                best = Some(r);
            }
        }
        let r = best.expect("at least one repeat");
        points.push((r.system_size, r.solve_s));
        reports.push(r);
    }
    let slope = loglog_slope(&points)?;
    Ok(TimingResult { points, slope, reports })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(usize, f64)> = [100usize, 400, 1600].iter().map(|&n| (n, 1e-3 * (n as f64).powf(1.1))).collect();
        assert!((loglog_slope(&pts).unwrap() - 1.1).abs() < 1e-12);
        assert!(loglog_slope(&pts[..2]).is_err());
    }
}
