//! Mandel's analytic pore pressure on the quadrant `[0, a] x [0, a]`.

use crate::bench::problems::MandelConfig;
use crate::error::{BiotError, Result};
use std::f64::consts::{FRAC_PI_2, PI};

/// `tan α = κ α` on the branch `(lo, hi)`, where `tan α - κ α` changes sign
/// from negative to positive.
fn bisect_branch(kappa: f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = |a: f64| a.tan() - kappa * a;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-14 {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The `i`-th positive root (0-based) of `tan α = κ α`, `κ > 1`: root 0 lies
/// in `(0, π/2)`, root `n ≥ 1` in `(nπ, nπ + π/2)`.
fn root(kappa: f64, i: usize) -> f64 {
    let half = FRAC_PI_2 * (1.0 - f64::EPSILON);
    if i == 0 {
        bisect_branch(kappa, f64::MIN_POSITIVE.sqrt(), half)
    } else {
        let base = i as f64 * PI;
        bisect_branch(kappa, base, base + half)
    }
}

/// Slope `κ = (1 - ν)/(ν_u - ν)` of the root equation.
pub fn root_slope(nu: f64, nu_u: f64) -> Result<f64> {
    if !(nu_u > nu) {
        return Err(BiotError::InvalidParameter(format!(
            "undrained Poisson ratio {nu_u} must exceed drained {nu}"
        )));
    }
    Ok((1.0 - nu) / (nu_u - nu))
}

/// The first `n_max` positive roots of `tan α = ((1 - ν)/(ν_u - ν)) α`,
/// increasing.
pub fn mandel_roots(nu: f64, nu_u: f64, n_max: usize) -> Result<Vec<f64>> {
    let kappa = root_slope(nu, nu_u)?;
    // κ ≤ 1 has no root below π/2
    let skip = usize::from(kappa <= 1.0);
    Ok((skip..n_max + skip).map(|i| root(kappa, i)).collect())
}

/// Series solution for the pore pressure at abscissa `x` and time `t`.
///
/// Terms are added until the envelope of the next term drops below
/// `cfg.series_tol` times the running sum, or `cfg.max_terms` roots are used.
pub fn mandel_pressure(x: f64, t: f64, cfg: &MandelConfig) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(BiotError::InvalidParameter(format!("time must be non-negative, got {t}")));
    }
    let a = cfg.a;
    let nu_u = cfg.undrained_nu();
    let kappa = root_slope(cfg.nu, nu_u)?;
    let p0 = cfg.p0();
    let c = cfg.consolidation_coefficient()?;
    let skip = usize::from(kappa <= 1.0);
    let mut sum = 0.0;
    for i in skip..cfg.max_terms + skip {
        let an = root(kappa, i);
        let (s, co) = an.sin_cos();
        let amp = s / (an - s * co);
        let decay = (-an * an * c * t / (a * a)).exp();
        sum += amp * ((an * x / a).cos() - co) * decay;
        if (2.0 * amp * decay).abs() <= cfg.series_tol * sum.abs() {
            break;
        }
    }
    Ok(2.0 * p0 * sum)
}
