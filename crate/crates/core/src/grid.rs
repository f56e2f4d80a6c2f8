use crate::error::{domain, Result};
use crate::params::SymmetryParams;

/// Equally spaced points in `w = ln y`, evaluated at `y = exp(w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub w_min: f64,
    pub w_max: f64,
    pub n_points: usize,
}

pub const DEFAULT_POINTS: usize = 2001;

impl GridSpec {
    pub fn new(w_min: f64, w_max: f64, n_points: usize) -> Result<Self> {
        if !(w_min.is_finite() && w_max.is_finite() && w_min < w_max) {
            return domain(format!("grid needs finite w_min < w_max, got [{w_min}, {w_max}]"));
        }
        if n_points < 3 {
            return domain(format!("grid needs at least 3 points, got {n_points}"));
        }
        Ok(Self { w_min, w_max, n_points })
    }

    /// Grid in `y` units between two positive endpoints.
    pub fn from_y_range(y_min: f64, y_max: f64, n_points: usize) -> Result<Self> {
        if !(y_min > 0.0 && y_max > 0.0) {
            return domain(format!("y range must be positive, got [{y_min}, {y_max}]"));
        }
        Self::new(y_min.ln(), y_max.ln(), n_points)
    }

    /// `w` in `[ln theta - 6 ln k - 5, ln theta + 6 ln k + 5]`, 2001 points:
    /// six grid periods each side of the mode plus tails.
    pub fn default_for(params: &SymmetryParams) -> Self {
        let half = 6.0 * params.ln_k() + 5.0;
        let c = params.theta().ln();
        Self { w_min: c - half, w_max: c + half, n_points: DEFAULT_POINTS }
    }

    /// Same half-width as [`GridSpec::default_for`] but centred at `y = 1`;
    /// used for ratio variables in symmetry relations.
    pub fn ratio_default(k: f64) -> Self {
        let half = 6.0 * k.ln() + 5.0;
        Self { w_min: -half, w_max: half, n_points: DEFAULT_POINTS }
    }

    pub fn with_points(self, n_points: usize) -> Result<Self> {
        Self::new(self.w_min, self.w_max, n_points)
    }

    pub fn step(&self) -> f64 {
        (self.w_max - self.w_min) / (self.n_points - 1) as f64
    }

    pub fn log_points(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.n_points)
            .map(|j| if j + 1 == self.n_points { self.w_max } else { self.w_min + h * j as f64 })
            .collect()
    }

    pub fn points(&self) -> Vec<f64> {
        self.log_points().into_iter().map(f64::exp).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_increasing_and_positive() {
        let g = GridSpec::new(-3.0, 2.0, 11).unwrap();
        let p = g.points();
        assert_eq!(p.len(), 11);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert!(p.iter().all(|&y| y > 0.0));
        assert_eq!(p[10], 2f64.exp());
    }

    #[test]
    fn invalid_grids() {
        assert!(GridSpec::new(1.0, 1.0, 10).is_err());
        assert!(GridSpec::new(0.0, 1.0, 2).is_err());
        assert!(GridSpec::from_y_range(0.0, 1.0, 10).is_err());
    }

    #[test]
    fn default_covers_six_periods() {
        let p = SymmetryParams::new(1.0, 2.0).unwrap();
        let g = GridSpec::default_for(&p);
        assert!(g.w_max - g.w_min > 12.0 * 2f64.ln());
        assert_eq!(g.n_points, 2001);
    }
}
