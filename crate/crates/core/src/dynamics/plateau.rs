use serde::Serialize;

use crate::error::{Error, Result};

/// A stretch of a time series that stays flat on a logarithmic time axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlateauWindow {
    pub t_start: f64,
    pub t_end: f64,
    /// Mean value over the window.
    pub level: f64,
    pub decades: f64,
}

/// Fraction of the series range per decade used when no slope tolerance is given.
pub const DEFAULT_SLOPE_FRACTION: f64 = 0.01;
/// Shortest window reported, in decades.
pub const MIN_PLATEAU_DECADES: f64 = 1.0;

/// Maximal windows of at least one decade where `|dv / dlog10 t| < slope_tol`.
///
/// Flat stretches touching the first or last sample are the initial and final
/// states rather than plateaus and are not reported, except that a series
/// flat everywhere yields a single window over its whole range. Samples at
/// `t <= 0` are ignored.
pub fn detect_plateau(times: &[f64], values: &[f64], slope_tol: Option<f64>) -> Result<Vec<PlateauWindow>> {
    if times.len() != values.len() {
        return Err(Error::Shape(format!("{} times but {} values", times.len(), values.len())));
    }
    let pts: Vec<(f64, f64)> =
        times.iter().zip(values).filter(|(&t, _)| t > 0.0).map(|(&t, &v)| (t.log10(), v)).collect();
    if pts.len() < 2 {
        return Ok(vec![]);
    }
    if pts.windows(2).any(|w| !(w[1].0 > w[0].0)) || pts.iter().any(|p| !p.1.is_finite()) {
        return Err(Error::Argument("times must increase and values be finite".into()));
    }
    let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let range = hi - lo;
    let window = |i: usize, j: usize| {
        let level = pts[i..=j].iter().map(|p| p.1).sum::<f64>() / (j - i + 1) as f64;
        PlateauWindow {
            t_start: 10f64.powf(pts[i].0),
            t_end: 10f64.powf(pts[j].0),
            level,
            decades: pts[j].0 - pts[i].0,
        }
    };
    let last = pts.len() - 1;
    if range <= 1e-12 * hi.abs().max(lo.abs()) {
        return Ok(vec![window(0, last)]);
    }
    let tol = slope_tol.unwrap_or(DEFAULT_SLOPE_FRACTION * range);
    let flat: Vec<bool> = pts.windows(2).map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs() < tol).collect();

    let mut out = Vec::new();
    let mut k = 0;
    while k < flat.len() {
        if !flat[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < flat.len() && flat[k] {
            k += 1;
        }
        // segments start..k cover samples start..=k
        let (i, j) = (start, k);
        if i == 0 && j == last {
            return Ok(vec![window(0, last)]);
        }
        if i > 0 && j < last && pts[j].0 - pts[i].0 >= MIN_PLATEAU_DECADES {
            out.push(window(i, j));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn constant_series_is_one_plateau() {
        let t = log_grid(-1.0, 3.0, 50);
        let w = detect_plateau(&t, &vec![0.3; 50], None).unwrap();
        assert_eq!(w.len(), 1);
        assert!((w[0].decades - 4.0).abs() < 1e-12);
        assert!((w[0].level - 0.3).abs() < 1e-15);
    }

    #[test]
    fn two_step_relaxation() {
        let t = log_grid(-2.0, 8.0, 400);
        let v: Vec<f64> = t.iter().map(|&x| 0.5 * (1.0 - (-x).exp()) + 0.5 * (1.0 - (-x * 1e-6).exp())).collect();
        let w = detect_plateau(&t, &v, None).unwrap();
        assert_eq!(w.len(), 1);
        assert!(w[0].t_start > 1.0 && w[0].t_start < 100.0, "{w:?}");
        assert!(w[0].t_end > 1e3 && w[0].t_end < 1e6, "{w:?}");
        assert!((w[0].level - 0.5).abs() < 0.01);
    }

    #[test]
    fn single_relaxation_has_no_plateau() {
        let t = log_grid(-2.0, 4.0, 300);
        let v: Vec<f64> = t.iter().map(|&x| 1.0 - (-x).exp()).collect();
        assert!(detect_plateau(&t, &v, None).unwrap().is_empty());
    }
}
