//! Closed-form piecewise odd-power density with mode `theta`:
//! `f(y) = k^{2i(i-1)} (y/theta)^{2i-1} / (theta C(k))` on piece `i`.

use crate::density::{Density, Family, NormMeta};
use crate::error::{domain, Error, Result};
use crate::params::{grid_index, PieceIndex, SymmetryParams};
use crate::quadrature::adaptive;

use super::{lattice_breakpoints, outward, PIECE_NEGLIGIBLE};

/// Closed-form series and quadrature of the numerator must agree this well.
const NORM_CROSS_CHECK: f64 = 1e-12;

/// `C(k) = 2 ln k + sum_{j>=1} k^{-2j^2} (k^{2j} - k^{-2j}) / j`.
pub fn poly_ds_norm_const(k: f64) -> Result<f64> {
    if !(k > 1.0 && k.is_finite()) {
        return domain(format!("k must exceed 1, got {k}"));
    }
    let l = k.ln();
    let mut sum = 2.0 * l;
    for j in 1..100_000u32 {
        let jf = j as f64;
        // k^{-2j^2}(k^{2j} - k^{-2j}) = e^{-2j^2 l + 2jl} (1 - e^{-4jl})
        let term = (-2.0 * jf * jf * l + 2.0 * jf * l).exp() * -(-4.0 * jf * l).exp_m1() / jf;
        sum += term;
        if term < 1e-18 * sum {
            return Ok(sum);
        }
    }
    Err(Error::Numeric(format!("normalization series did not converge for k = {k}")))
}

/// Integral of the unnormalized numerator over piece `i` in closed form:
/// `k^{-2i^2}(k^{2i} - k^{-2i})/(2i)`, or `2 ln k` for `i = 0`.
pub fn poly_piece_mass_unnormalized(k: f64, i: i64) -> f64 {
    let l = k.ln();
    if i == 0 {
        return 2.0 * l;
    }
    let fi = i as f64;
    (-2.0 * fi * fi * l + 2.0 * fi * l).exp() * -(-4.0 * fi * l).exp_m1() / (2.0 * fi)
}

/// Piecewise quadrature of the unnormalized numerator, pieces added outward
/// until three in a row are negligible.
pub fn poly_ds_norm_const_quadrature(k: f64) -> Result<f64> {
    if !(k > 1.0 && k.is_finite()) {
        return domain(format!("k must exceed 1, got {k}"));
    }
    let l = k.ln();
    let mut total = 0.0;
    let mut quiet = 0;
    for j in 0.. {
        let i = outward(j);
        let fi = i as f64;
        // In w = ln x the integrand is exp(2i(i-1) l + 2i w) on (-2il, (2-2i)l].
        let f = |w: f64| (2.0 * fi * (fi - 1.0) * l + 2.0 * fi * w).exp();
        let q = adaptive(&f, -2.0 * fi * l, (2.0 - 2.0 * fi) * l, 0.0, 1e-15)?;
        total += q.value;
        if q.value < PIECE_NEGLIGIBLE * total {
            quiet += 1;
            if quiet == 3 {
                break;
            }
        } else {
            quiet = 0;
        }
        if j > 100_000 {
            return Err(Error::Numeric("piecewise quadrature did not terminate".into()));
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyDsDensity {
    params: SymmetryParams,
    norm_const: f64,
    norm_quadrature: f64,
    ln_norm: f64,
}

/// Build the closed-form density; the series constant is cross-checked
/// against piecewise quadrature at construction.
pub fn make_poly_ds(params: SymmetryParams) -> Result<PolyDsDensity> {
    let c = poly_ds_norm_const(params.k())?;
    let q = poly_ds_norm_const_quadrature(params.k())?;
    if (c - q).abs() > NORM_CROSS_CHECK * c {
        return Err(Error::Construction(format!(
            "normalization series {c:e} and quadrature {q:e} disagree for k = {}",
            params.k()
        )));
    }
    Ok(PolyDsDensity {
        params,
        norm_const: c,
        norm_quadrature: q,
        ln_norm: (params.theta() * c).ln(),
    })
}

impl PolyDsDensity {
    pub fn params(&self) -> SymmetryParams {
        self.params
    }

    /// `C(k)`.
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    pub fn norm_const_quadrature(&self) -> f64 {
        self.norm_quadrature
    }

    /// `ln f` from the expression of piece `i`, valid for any `y > 0`.
    pub fn ln_piece_value(&self, i: i64, y: f64) -> f64 {
        let fi = i as f64;
        let lx = (y / self.params.theta()).ln();
        2.0 * fi * (fi - 1.0) * self.params.ln_k() + (2.0 * fi - 1.0) * lx - self.ln_norm
    }

    /// Exponents of `k` that piece `i` and piece `i - 1` give at their shared
    /// boundary `theta k^{2-2i}`, after dividing out `theta C`.
    pub fn boundary_exponents(i: i64) -> (i64, i64) {
        let x = 2 - 2 * i;
        let left = 2 * i * (i - 1) + x * (2 * i - 1);
        let j = i - 1;
        let right = 2 * j * (j - 1) + x * (2 * j - 1);
        (left, right)
    }

    /// One-sided derivatives `(f'(b-), f'(b+))` at the boundary
    /// `b = theta k^{2-2i}`.
    pub fn boundary_derivatives(&self, i: i64) -> (f64, f64) {
        let b = self.params.boundary(2 - 2 * i);
        let f = self.pdf(b);
        ((2 * i - 1) as f64 * f / b, (2 * i - 3) as f64 * f / b)
    }

    /// Probability of piece `i`.
    pub fn piece_mass(&self, i: i64) -> f64 {
        poly_piece_mass_unnormalized(self.params.k(), i) / self.norm_const
    }

    /// Mass of piece `i` below `y`, `y` inside the piece.
    fn partial_mass(&self, i: i64, y: f64) -> f64 {
        let l = self.params.ln_k();
        let lx = (y / self.params.theta()).ln();
        let lo = -2.0 * i as f64 * l;
        if i == 0 {
            return (lx - lo) / self.norm_const;
        }
        let fi = i as f64;
        // k^{2i(i-1)} (x^{2i} - a^{2i}) / (2i)
        let a = 2.0 * fi * (fi - 1.0) * l + 2.0 * fi * lo;
        let v = (a).exp() * ((2.0 * fi * (lx - lo)).exp_m1()) / (2.0 * fi);
        v / self.norm_const
    }

    fn cdf_closed(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            return 0.0;
        }
        let PieceIndex(i) = grid_index(y, &self.params).expect("y > 0");
        // Pieces with larger index lie below.
        let below_from_tail = if i >= 0 {
            let mut s = 0.0;
            let mut j = i + 1;
            loop {
                let m = self.piece_mass(j);
                s += m;
                if m < 1e-300 || m < 1e-20 * s {
                    break;
                }
                j += 1;
            }
            s
        } else {
            let mut above = 0.0;
            let mut j = i;
            loop {
                let m = self.piece_mass(j);
                above += m;
                if m < 1e-300 || m < 1e-20 * above {
                    break;
                }
                j -= 1;
            }
            // Everything at or above piece i, minus the part of piece i below y.
            return (1.0 - above + self.partial_mass(i, y)).clamp(0.0, 1.0);
        };
        (below_from_tail + self.partial_mass(i, y)).clamp(0.0, 1.0)
    }
}

impl Density for PolyDsDensity {
    fn ln_pdf(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            return f64::NEG_INFINITY;
        }
        let PieceIndex(i) = grid_index(y, &self.params).expect("y > 0");
        self.ln_piece_value(i, y)
    }

    fn pdf(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            return 0.0;
        }
        let PieceIndex(i) = grid_index(y, &self.params).expect("y > 0");
        if i.abs() <= 20 {
            let e = 2 * i * (i - 1);
            let x = y / self.params.theta();
            let v = self.params.k().powi(e as i32) * x.powi((2 * i - 1) as i32);
            if v.is_finite() && v > 0.0 {
                return v / (self.params.theta() * self.norm_const);
            }
        }
        self.ln_piece_value(i, y).exp()
    }

    fn family(&self) -> Family {
        Family::PolyDs
    }

    fn norm_meta(&self) -> NormMeta {
        NormMeta {
            constant: self.norm_const,
            rel_err: (self.norm_const - self.norm_quadrature).abs() / self.norm_const,
        }
    }

    fn log_location(&self) -> (f64, f64) {
        (self.params.delta().ln(), self.params.ln_k().sqrt())
    }

    fn log_breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        lattice_breakpoints(&self.params, lo, hi)
    }

    fn cdf(&self, y: f64) -> Option<f64> {
        Some(self.cdf_closed(y))
    }
}
