//! Agent-facing observation types: a T x N KPM window per slice and its
//! low-dimensional encoding.

use ndarray::{Array1, Array2};

/// Rows in an observation window (reporting intervals).
pub const T_WINDOW: usize = 10;
/// Metrics per row.
pub const N_METRICS: usize = 3;
/// Flattened observation dimension.
pub const OBS_DIM: usize = T_WINDOW * N_METRICS;
/// Encoded representation size.
pub const LATENT_DIM: usize = 3;

/// A sliding window of the last `T_WINDOW` reporting intervals for one
/// slice, each row holding `N_METRICS` values normalized to [0, 1].
/// Missing intervals are zero rows; row `T_WINDOW - 1` is the newest.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub window: Array2<f64>,
}

impl Observation {
    pub fn zeros() -> Self {
        Self {
            window: Array2::zeros((T_WINDOW, N_METRICS)),
        }
    }

    pub fn from_rows(rows: &[[f64; N_METRICS]]) -> Self {
        let mut obs = Self::zeros();
        let n = rows.len().min(T_WINDOW);
        // Newest rows fill the bottom of the window.
        for (i, row) in rows[rows.len() - n..].iter().enumerate() {
            let r = T_WINDOW - n + i;
            for (c, &v) in row.iter().enumerate() {
                obs.window[[r, c]] = v;
            }
        }
        obs
    }

    /// Row-major flattening to the autoencoder input layout.
    pub fn flatten(&self) -> Array1<f64> {
        Array1::from_iter(self.window.iter().copied())
    }

    pub fn is_normalized(&self) -> bool {
        self.window.iter().all(|&v| (0.0..=1.0).contains(&v))
    }
}

/// Encoded observation: one `LATENT_DIM`-vector per slice window.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentState(pub Array1<f64>);

impl LatentState {
    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_fill_keeps_newest_rows_at_bottom() {
        let rows = vec![[0.1, 0.2, 0.3], [0.4, 0.5, 0.6], [0.7, 0.8, 0.9]];
        let obs = Observation::from_rows(&rows);
        for r in 0..7 {
            assert!(obs.window.row(r).iter().all(|&v| v == 0.0), "row {r}");
        }
        assert_eq!(obs.window[[7, 0]], 0.1);
        assert_eq!(obs.window[[9, 2]], 0.9);
    }

    #[test]
    fn flatten_is_row_major() {
        let mut obs = Observation::zeros();
        obs.window[[0, 1]] = 0.5;
        obs.window[[9, 2]] = 0.25;
        let flat = obs.flatten();
        assert_eq!(flat.len(), OBS_DIM);
        assert_eq!(flat[1], 0.5);
        assert_eq!(flat[29], 0.25);
    }
}
