//! Symmetry parameters and the geometric piece partition of (0, inf).

use crate::error::{domain, Result};

/// Mode scale `theta`, grid ratio `k > 1`, and median `delta = k * theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryParams {
    theta: f64,
    k: f64,
    delta: f64,
}

impl SymmetryParams {
    pub fn new(theta: f64, k: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return domain(format!("theta must be positive and finite, got {theta}"));
        }
        if !(k.is_finite() && k > 1.0) {
            return domain(format!("k must exceed 1, got {k}"));
        }
        Ok(Self { theta, k, delta: k * theta })
    }

    /// Build from the median and mode directly.
    pub fn from_median_mode(delta: f64, theta: f64) -> Result<Self> {
        Self::new(theta, delta / theta)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn ln_k(&self) -> f64 {
        self.k.ln()
    }

    /// `theta * k^m`. Uses repeated multiplication for moderate `m` so that
    /// exact powers (k = 2) stay exact.
    pub fn boundary(&self, m: i64) -> f64 {
        if m.unsigned_abs() <= 1024 {
            self.theta * self.k.powi(m as i32)
        } else {
            self.theta * (m as f64 * self.ln_k()).exp()
        }
    }

    /// Open-left, closed-right support of piece `i`:
    /// `(theta k^{-2i}, theta k^{2-2i}]`.
    pub fn piece_bounds(&self, i: PieceIndex) -> (f64, f64) {
        let i = i.0;
        (self.boundary(-2 * i), self.boundary(2 - 2 * i))
    }
}

/// Index `i` of the support piece `(theta k^{-2i}, theta k^{2-2i}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PieceIndex(pub i64);

/// The unique `i` with `theta k^{-2i} < y <= theta k^{2-2i}`.
pub fn grid_index(y: f64, params: &SymmetryParams) -> Result<PieceIndex> {
    if !(y > 0.0) || !y.is_finite() {
        return domain(format!("grid_index needs finite y > 0, got {y}"));
    }
    let t = (y / params.theta).ln() / (2.0 * params.ln_k());
    let mut i = (1.0 - t).floor() as i64;
    // Settle rounding in the estimate against the exact boundary values.
    for _ in 0..4 {
        let (lo, hi) = params.piece_bounds(PieceIndex(i));
        if y > hi && hi > 0.0 {
            i -= 1;
        } else if y <= lo && lo.is_finite() {
            i += 1;
        } else {
            break;
        }
    }
    Ok(PieceIndex(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn documented_indices() {
        let p = SymmetryParams::new(1.0, 2.0).unwrap();
        assert_eq!(grid_index(1.0, &p).unwrap(), PieceIndex(1));
        assert_eq!(grid_index(3.0, &p).unwrap(), PieceIndex(0));
        assert_eq!(grid_index(0.25, &p).unwrap(), PieceIndex(2));
        assert_eq!(grid_index(4.0, &p).unwrap(), PieceIndex(0));
        assert_eq!(grid_index(4.000001, &p).unwrap(), PieceIndex(-1));
    }

    #[test]
    fn rejects_nonpositive() {
        let p = SymmetryParams::new(1.0, 2.0).unwrap();
        assert!(grid_index(0.0, &p).is_err());
        assert!(grid_index(-1.0, &p).is_err());
        assert!(SymmetryParams::new(1.0, 1.0).is_err());
        assert!(SymmetryParams::new(0.0, 2.0).is_err());
    }

    #[test]
    fn delta_is_product() {
        let p = SymmetryParams::new(0.37, 1.9).unwrap();
        assert_eq!(p.delta(), 0.37 * 1.9);
    }

    #[test]
    fn partition_holds_on_1e5_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for &(theta, k) in &[(1.0, 2.0), (0.1, 1.75), (2.0, 1.1), (3.3, 2.5)] {
            let p = SymmetryParams::new(theta, k).unwrap();
            let (a, b) = (p.boundary(-10).ln(), p.boundary(10).ln());
            for _ in 0..25_000 {
                let y = (a + (b - a) * rng.random::<f64>()).exp();
                let i = grid_index(y, &p).unwrap();
                let (lo, hi) = p.piece_bounds(i);
                assert!(lo < y && y <= hi, "y={y} i={i:?} ({lo}, {hi}]");
            }
        }
    }

    proptest! {
        #[test]
        fn boundaries_belong_to_the_piece_they_close(theta in 0.05f64..20.0, k in 1.01f64..4.0, i in -8i64..8) {
            let p = SymmetryParams::new(theta, k).unwrap();
            let (_, hi) = p.piece_bounds(PieceIndex(i));
            prop_assert_eq!(grid_index(hi, &p).unwrap(), PieceIndex(i));
        }
    }
}
