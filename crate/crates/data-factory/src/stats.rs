//! Pearson correlation and least-squares fitting on metric series.
//!
//! Missing samples are represented as NaN and dropped pairwise. A zero
//! variance series yields an explicit `Undefined` marker instead of letting
//! NaN propagate through reports.

use crate::DataError;

/// Correlation result: a coefficient, or an explicit marker when the
/// coefficient does not exist (zero variance, too few pairs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorrValue {
    Defined(f64),
    Undefined,
}

impl CorrValue {
    pub fn value(self) -> Option<f64> {
        match self {
            CorrValue::Defined(v) => Some(v),
            CorrValue::Undefined => None,
        }
    }

    pub fn abs(self) -> Option<f64> {
        self.value().map(f64::abs)
    }
}

impl std::fmt::Display for CorrValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CorrValue::Defined(v) => write!(f, "{v}"),
            CorrValue::Undefined => f.write_str("undefined"),
        }
    }
}

/// Pearson correlation coefficient of two equal-length series. Pairs where
/// either sample is NaN are dropped; fewer than two remaining pairs or zero
/// variance in either series gives `Undefined`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrValue, DataError> {
    if x.len() != y.len() {
        return Err(DataError::Argument(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(DataError::Argument(
            "need at least two samples".to_string(),
        ));
    }
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| !a.is_nan() && !b.is_nan())
        .map(|(&a, &b)| (a, b))
        .collect();
    let n = pairs.len();
    if n < 2 {
        return Ok(CorrValue::Undefined);
    }
    let nf = n as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in &pairs {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(CorrValue::Undefined);
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    // Guard against rounding pushing |r| past 1.
    Ok(CorrValue::Defined(r.clamp(-1.0, 1.0)))
}

/// Number of non-NaN pairs the coefficient would be computed over.
pub fn pair_count(x: &[f64], y: &[f64]) -> usize {
    x.iter()
        .zip(y)
        .filter(|(a, b)| !a.is_nan() && !b.is_nan())
        .count()
}

/// Ordinary least-squares line fit `y = slope * x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64), DataError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(DataError::Argument(
            "need two equal-length series with at least two samples".to_string(),
        ));
    }
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| !a.is_nan() && !b.is_nan())
        .map(|(&a, &b)| (a, b))
        .collect();
    if pairs.len() < 2 {
        return Err(DataError::Argument("too few defined pairs".to_string()));
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in &pairs {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return Err(DataError::Argument("constant x has no unique fit".to_string()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defined(r: CorrValue) -> f64 {
        r.value().expect("defined correlation")
    }

    #[test]
    fn perfectly_correlated() {
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!((defined(r) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perfectly_anticorrelated() {
        let r = pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert!((defined(r) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_series_is_undefined() {
        let r = pearson(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(r, CorrValue::Undefined);
    }

    #[test]
    fn nan_pairs_dropped() {
        let r = pearson(&[1.0, f64::NAN, 2.0, 3.0], &[2.0, 9.0, 4.0, 6.0]).unwrap();
        assert!((defined(r) - 1.0).abs() < 1e-12);
        assert_eq!(pair_count(&[1.0, f64::NAN], &[1.0, 1.0]), 1);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(pearson(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn exact_line_recovered() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let (slope, intercept) = linear_fit(&x, &y).unwrap();
        assert!((slope - 2.0).abs() < 1e-12);
        assert!((intercept - 1.0).abs() < 1e-12);
    }

    #[test]
    fn residuals_orthogonal_to_x() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0, 7.0];
        let y = [1.0, 2.5, 2.0, 4.0, 3.5, 8.0];
        let (slope, intercept) = linear_fit(&x, &y).unwrap();
        let dot: f64 = x
            .iter()
            .zip(&y)
            .map(|(a, b)| a * (b - (slope * a + intercept)))
            .sum();
        assert!(dot.abs() < 1e-9, "residual dot {dot}");
    }

    #[test]
    fn fit_matches_brute_force_grid() {
        // Oracle: coarse-to-fine grid minimization of the SSE.
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [0.3, 1.1, 2.2, 2.8, 4.3];
        let sse = |s: f64, c: f64| -> f64 {
            x.iter()
                .zip(&y)
                .map(|(a, b)| (b - (s * a + c)).powi(2))
                .sum()
        };
        let mut best = (0.0, 0.0);
        let mut best_err = f64::INFINITY;
        let (mut s_lo, mut s_hi, mut c_lo, mut c_hi) = (-5.0, 5.0, -5.0, 5.0);
        for _ in 0..10 {
            let steps = 60;
            for i in 0..=steps {
                for j in 0..=steps {
                    let s = s_lo + (s_hi - s_lo) * i as f64 / steps as f64;
                    let c = c_lo + (c_hi - c_lo) * j as f64 / steps as f64;
                    let e = sse(s, c);
                    if e < best_err {
                        best_err = e;
                        best = (s, c);
                    }
                }
            }
            let ds = (s_hi - s_lo) / 10.0;
            let dc = (c_hi - c_lo) / 10.0;
            s_lo = best.0 - ds;
            s_hi = best.0 + ds;
            c_lo = best.1 - dc;
            c_hi = best.1 + dc;
        }
        let (slope, intercept) = linear_fit(&x, &y).unwrap();
        assert!((slope - best.0).abs() < 1e-6, "{slope} vs {}", best.0);
        assert!((intercept - best.1).abs() < 1e-6, "{intercept} vs {}", best.1);
    }

    #[test]
    fn constant_x_rejected() {
        assert!(linear_fit(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
    }
}
