//! Least-squares fits on log-log axes.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Points dropped for a non-positive coordinate.
    pub excluded: usize,
}

/// Ordinary least squares of `ln y` on `ln x`. Points with `x <= 0` or
/// `y <= 0` are dropped and counted; fewer than three remaining points is
/// an error.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<LogLogFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = logs.len();
    if n < 3 {
        return Err(Error::InsufficientData(n));
    }
    let nf = n as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("all abscissae are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(LogLogFit {
        slope,
        intercept,
        r2,
        excluded: points.len() - n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_laws() {
        let ts = [10.0, 20.0, 50.0, 100.0, 1000.0];
        let inv: Vec<_> = ts.iter().map(|&t| (t, 1.0 / t)).collect();
        let fit = fit_loglog_slope(&inv).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-9);
        assert!(fit.intercept.abs() < 1e-9);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        let root: Vec<_> = ts.iter().map(|&t| (t, 1.0 / t.sqrt())).collect();
        assert!((fit_loglog_slope(&root).unwrap().slope + 0.5).abs() < 1e-9);
    }

    #[test]
    fn nonpositive_points_are_dropped() {
        let pts = [
            (1.0, 1.0),
            (2.0, 0.0),
            (4.0, 0.25),
            (8.0, -1.0),
            (16.0, 1.0 / 16.0),
        ];
        let fit = fit_loglog_slope(&pts).unwrap();
        assert_eq!(fit.excluded, 2);
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!(matches!(
            fit_loglog_slope(&pts[..3]),
            Err(Error::InsufficientData(2))
        ));
    }

    proptest! {
        #[test]
        fn recovers_any_power_law(a in -2.0f64..2.0, c in 0.01f64..100.0) {
            let pts: Vec<_> = [3.0, 7.0, 30.0, 200.0].iter().map(|&t: &f64| (t, c * t.powf(a))).collect();
            let fit = fit_loglog_slope(&pts).unwrap();
            prop_assert!((fit.slope - a).abs() < 1e-9);
            prop_assert!((fit.intercept - c.ln()).abs() < 1e-9);
        }
    }
}
