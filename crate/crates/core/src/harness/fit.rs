//! Finite-size extrapolation `y(N) = y∞ + a N^(−p)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent used when there are too few points to fit it.
pub const DEFAULT_EXPONENT: f64 = 2.0;
const P_MIN: f64 = 0.25;
const P_MAX: f64 = 6.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub quantity: String,
    pub asymptote: f64,
    pub amplitude: f64,
    pub exponent: f64,
    /// False when the exponent was pinned to [`DEFAULT_EXPONENT`].
    pub exponent_fitted: bool,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// Least-squares standard error of the asymptote (0 with no spare degrees of freedom).
    pub stderr: f64,
    /// Shift of the asymptote when the smallest size is dropped.
    pub drop_shift: f64,
    /// `sqrt(stderr² + drop_shift²)`.
    pub uncertainty: f64,
    pub sizes: Vec<usize>,
}

struct Linear {
    y_inf: f64,
    a: f64,
    rss: f64,
    /// `[(XᵀX)⁻¹]₀₀`
    cov00: f64,
}

fn describe(points: &[(usize, f64)]) -> String {
    points.iter().map(|(n, y)| format!("N={n}: {y}")).collect::<Vec<_>>().join(", ")
}

/// Least squares in `(y∞, a)` at fixed `p`.
fn linear_fit(points: &[(usize, f64)], p: f64) -> Option<Linear> {
    let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(n, y) in points {
        let x = (n as f64).powf(-p);
        s0 += 1.0;
        s1 += x;
        s2 += x * x;
        t0 += y;
        t1 += x * y;
    }
    let det = s0 * s2 - s1 * s1;
    if det.abs() <= 1e-14 * s0 * s2.max(f64::MIN_POSITIVE) {
        return None;
    }
    let y_inf = (s2 * t0 - s1 * t1) / det;
    let a = (s0 * t1 - s1 * t0) / det;
    let rss = points
        .iter()
        .map(|&(n, y)| (y - y_inf - a * (n as f64).powf(-p)).powi(2))
        .sum();
    Some(Linear { y_inf, a, rss, cov00: s2 / det })
}

/// Exponent minimising the residual, by a log grid then golden-section refinement.
fn best_exponent(points: &[(usize, f64)]) -> Option<f64> {
    let rss = |p: f64| linear_fit(points, p).map_or(f64::INFINITY, |l| l.rss);
    let grid = 121;
    let at = |k: usize| P_MIN * (P_MAX / P_MIN).powf(k as f64 / (grid - 1) as f64);
    let k_best = (0..grid).min_by(|&i, &j| rss(at(i)).total_cmp(&rss(at(j))))?;
    if !rss(at(k_best)).is_finite() {
        return None;
    }
    let (mut lo, mut hi) = (at(k_best.saturating_sub(1)), at((k_best + 1).min(grid - 1)));
    let g = 0.381_966_011_250_105_1;
    let (mut x1, mut x2) = (lo + g * (hi - lo), hi - g * (hi - lo));
    let (mut f1, mut f2) = (rss(x1), rss(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = lo + g * (hi - lo);
            f1 = rss(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = hi - g * (hi - lo);
            f2 = rss(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    let p_grid = at(k_best);
    Some(if rss(mid) <= rss(p_grid) { mid } else { p_grid })
}

/// `(y∞, a, p, fitted, rss, cov00)` for a set of points; the exponent is fitted
/// with four or more points.
fn fit_points(points: &[(usize, f64)]) -> Result<(Linear, f64, bool)> {
    let singular = || Error::Fit(format!("singular fit for series [{}]", describe(points)));
    if points.len() >= 4 {
        let p = best_exponent(points).ok_or_else(singular)?;
        Ok((linear_fit(points, p).ok_or_else(singular)?, p, true))
    } else {
        let lin = linear_fit(points, DEFAULT_EXPONENT).ok_or_else(singular)?;
        Ok((lin, DEFAULT_EXPONENT, false))
    }
}

/// Fits `y(N) = y∞ + a N^(−p)` to `(N, y)` points.
pub fn fit_series(quantity: &str, points: &[(usize, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 sizes to extrapolate {quantity}, got [{}]",
            describe(points)
        )));
    }
    if points.iter().any(|(_, y)| !y.is_finite()) {
        return Err(Error::Fit(format!("non-finite value in series [{}]", describe(points))));
    }
    let mut pts = points.to_vec();
    pts.sort_by_key(|&(n, _)| n);
    let (lin, p, fitted) = fit_points(&pts)?;
    let dof = pts.len() - if fitted { 3 } else { 2 };
    let stderr = if dof > 0 {
        (lin.rss / dof as f64 * lin.cov00).max(0.0).sqrt()
    } else {
        0.0
    };
    let rest = &pts[1..];
    let drop_shift = if rest.len() >= 3 {
        (fit_points(rest)?.0.y_inf - lin.y_inf).abs()
    } else {
        linear_fit(rest, DEFAULT_EXPONENT).map_or(0.0, |l| (l.y_inf - lin.y_inf).abs())
    };
    Ok(ScalingFit {
        quantity: quantity.to_string(),
        asymptote: lin.y_inf,
        amplitude: lin.a,
        exponent: p,
        exponent_fitted: fitted,
        residual: (lin.rss / pts.len() as f64).sqrt(),
        stderr,
        drop_shift,
        uncertainty: stderr.hypot(drop_shift),
        sizes: pts.iter().map(|&(n, _)| n).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_a_generating_power_law() {
        let pts: Vec<_> = (12..=36).step_by(3).map(|n| (n, 0.1155 + 2.0 / (n * n) as f64)).collect();
        let f = fit_series("h", &pts).unwrap();
        assert!((f.asymptote - 0.1155).abs() < 1e-6, "{f:?}");
        assert!((f.exponent - 2.0).abs() < 1e-3);
        assert!(f.residual < 1e-9);
    }

    #[test]
    fn recovers_other_exponents() {
        let pts: Vec<_> = [9, 12, 15, 18, 21].iter().map(|&n| (n, 0.45 - 0.8 * (n as f64).powf(-1.3))).collect();
        let f = fit_series("g", &pts).unwrap();
        assert!((f.asymptote - 0.45).abs() < 1e-6);
        assert!((f.exponent - 1.3).abs() < 1e-4);
    }

    #[test]
    fn three_points_pin_the_exponent() {
        let pts = vec![(12, 0.25), (18, 0.24), (24, 0.235)];
        let f = fit_series("h", &pts).unwrap();
        assert!(!f.exponent_fitted);
        assert_eq!(f.exponent, 2.0);
        assert!(f.drop_shift > 0.0);
    }

    #[test]
    fn constant_series() {
        let pts: Vec<_> = [9, 12, 15, 18].iter().map(|&n| (n, 0.3)).collect();
        let f = fit_series("h", &pts).unwrap();
        assert!((f.asymptote - 0.3).abs() < 1e-12);
        assert!(f.amplitude.abs() < 1e-10);
        assert!(f.uncertainty < 1e-10);
    }

    #[test]
    fn too_few_or_degenerate_points_fail() {
        assert!(fit_series("h", &[(9, 0.1), (12, 0.2)]).is_err());
        assert!(fit_series("h", &[(9, 0.1), (9, 0.2), (9, 0.3)]).is_err());
    }
}
