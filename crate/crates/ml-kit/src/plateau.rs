//! Plateau detection over a scalar training signal.

/// Detects convergence of a loss-like series: plateaued when the
/// least-squares slope over the last `window` points falls below
/// `slope_threshold` in magnitude.
#[derive(Debug, Clone)]
pub struct PlateauDetector {
    window: usize,
    slope_threshold: f64,
    values: Vec<f64>,
}

impl PlateauDetector {
    pub fn new(window: usize, slope_threshold: f64) -> Self {
        assert!(window >= 2, "window must cover at least two points");
        Self {
            window,
            slope_threshold,
            values: Vec::new(),
        }
    }

    /// Records a value; true once the moving-window slope is flat.
    pub fn push(&mut self, v: f64) -> bool {
        self.values.push(v);
        self.is_plateaued()
    }

    pub fn is_plateaued(&self) -> bool {
        if self.values.len() < self.window {
            return false;
        }
        let tail = &self.values[self.values.len() - self.window..];
        slope(tail).abs() < self.slope_threshold
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (i, &y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        sxx += dx * dx;
        sxy += dx * (y - my);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Synthetic-curve validation: an exponential decay must trip the
    /// detector only after it flattens, and a steep line never trips.
    #[test]
    fn detects_plateau_on_decaying_curve() {
        let mut det = PlateauDetector::new(20, 1e-3);
        let mut tripped_at = None;
        for step in 0..500 {
            let v = (-(step as f64) / 40.0).exp();
            if det.push(v) && tripped_at.is_none() {
                tripped_at = Some(step);
            }
        }
        let at = tripped_at.expect("decay flattens");
        assert!(at > 100, "tripped too early at {at}");
    }

    #[test]
    fn steep_line_never_plateaus() {
        let mut det = PlateauDetector::new(20, 1e-3);
        for step in 0..200 {
            assert!(!det.push(-(step as f64) * 0.5));
        }
    }

    #[test]
    fn noisy_flat_signal_plateaus() {
        let mut det = PlateauDetector::new(30, 5e-3);
        let mut tripped = false;
        for step in 0..100 {
            let noise = ((step * 2654435761u64) % 1000) as f64 / 1e4 - 0.05;
            tripped |= det.push(1.0 + noise * 0.01);
        }
        assert!(tripped);
    }
}
