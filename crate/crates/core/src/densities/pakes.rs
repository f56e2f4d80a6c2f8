//! General doubly symmetric density built from a reflected `psi`:
//! on piece `i`, with `x = y / theta`,
//! `f(y) ∝ k^{2i(i-1)} x^{2i-1} psi(k^{4(i-1)} x^2)`.

use crate::density::{Density, Family, NormMeta};
use crate::error::{Error, Result};
use crate::params::{grid_index, PieceIndex, SymmetryParams};
use crate::par;
use crate::psi::{psi_reflection_residual, PsiFunction};
use crate::quadrature::adaptive;

use super::{lattice_breakpoints, outward, PIECE_NEGLIGIBLE};

/// `psi` must satisfy the reflection to this level before a density is built.
pub const REFLECTION_GATE: f64 = 1e-10;
const REFLECTION_POINTS: usize = 4097;
const PIECE_BATCH: usize = 8;
const MAX_PIECES: usize = 20_000;

#[derive(Debug, Clone)]
pub struct PakesDensity {
    psi: PsiFunction,
    params: SymmetryParams,
    ln_norm: f64,
    norm_rel_err: f64,
    i_max: i64,
}

pub fn make_pakes_ds(psi: PsiFunction, params: SymmetryParams) -> Result<PakesDensity> {
    if (psi.k() - params.k()).abs() > 1e-12 * params.k() {
        return Err(Error::Construction(format!(
            "psi was built for k = {} but the parameters have k = {}",
            psi.k(),
            params.k()
        )));
    }
    let refl = psi_reflection_residual(&psi, REFLECTION_POINTS)?;
    if refl > REFLECTION_GATE {
        return Err(Error::Construction(format!(
            "psi violates the reflection psi(u) = psi(1/(k^4 u)): residual {refl:e}"
        )));
    }
    let mut d = PakesDensity { psi, params, ln_norm: 0.0, norm_rel_err: 0.0, i_max: 0 };
    let (z, err, i_max) = d.normalize()?;
    d.ln_norm = z.ln();
    d.norm_rel_err = err / z;
    d.i_max = i_max;
    Ok(d)
}

impl PakesDensity {
    pub fn params(&self) -> SymmetryParams {
        self.params
    }

    pub fn psi(&self) -> &PsiFunction {
        &self.psi
    }

    /// Largest `|i|` included in the normalization sum.
    pub fn i_max(&self) -> i64 {
        self.i_max
    }

    /// Log of the unnormalized piecewise expression at `y`.
    pub fn ln_unnormalized(&self, y: f64) -> f64 {
        let PieceIndex(i) = grid_index(y, &self.params).expect("y > 0");
        self.ln_piece(i, (y / self.params.theta()).ln())
    }

    fn ln_piece(&self, i: i64, lx: f64) -> f64 {
        let fi = i as f64;
        let l = self.params.ln_k();
        let ln_u = 4.0 * (fi - 1.0) * l + 2.0 * lx;
        2.0 * fi * (fi - 1.0) * l + (2.0 * fi - 1.0) * lx + self.psi.ln_eval(ln_u.exp())
    }

    /// Density from the `omega(u) = psi(u)/u` form in `y` units,
    /// `theta^{-2i} k^{2i(i+1)} y^{2i+1} omega(theta^{-2} k^{4(i-1)} y^2)`.
    /// The two unnormalized forms differ by the constant factor
    /// `theta k^4`, which is divided out here.
    pub fn pdf_via_omega(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            return 0.0;
        }
        let PieceIndex(i) = grid_index(y, &self.params).expect("y > 0");
        let fi = i as f64;
        let l = self.params.ln_k();
        let lt = self.params.theta().ln();
        let ly = y.ln();
        let ln_u = -2.0 * lt + 4.0 * (fi - 1.0) * l + 2.0 * ly;
        let ln_val = -2.0 * fi * lt + 2.0 * fi * (fi + 1.0) * l + (2.0 * fi + 1.0) * ly
            + self.psi.omega(ln_u.exp()).ln();
        (ln_val - (lt + 4.0 * l) - self.ln_norm).exp()
    }

    /// Integral of the unnormalized expression over piece `i`, split at the
    /// piece midpoint where `psi` may have a kink.
    fn piece_integral(&self, i: i64) -> Result<(f64, f64)> {
        let l = self.params.ln_k();
        let lo = -2.0 * i as f64 * l;
        let f = |w: f64| (self.ln_piece(i, w) + w).exp();
        let a = adaptive(&f, lo, lo + l, 0.0, 1e-14)?;
        let b = adaptive(&f, lo + l, lo + 2.0 * l, 0.0, 1e-14)?;
        // Integrand is in x = y/theta; the density in y carries 1/theta.
        Ok((a.value + b.value, a.abs_err + b.abs_err))
    }

    fn normalize(&self) -> Result<(f64, f64, i64)> {
        let mut total = 0.0;
        let mut err = 0.0;
        let mut quiet = 0;
        let mut i_max = 0;
        let mut start = 0;
        while start < MAX_PIECES {
            let idx: Vec<i64> = (start..start + PIECE_BATCH).map(outward).collect();
            let parts = par::map_slice_coarse(&idx, |&i| self.piece_integral(i));
            for (i, part) in idx.iter().zip(parts) {
                let (v, e) = part?;
                total += v;
                err += e;
                i_max = i_max.max(i.abs());
                if v < PIECE_NEGLIGIBLE * total {
                    quiet += 1;
                    if quiet == 3 {
                        if !(total > 0.0 && total.is_finite()) {
                            return Err(Error::Numeric(format!(
                                "normalization total is {total}"
                            )));
                        }
                        return Ok((total * self.params.theta(), err * self.params.theta(), i_max));
                    }
                } else {
                    quiet = 0;
                }
            }
            start += PIECE_BATCH;
        }
        Err(Error::Numeric(format!("normalization did not converge within {MAX_PIECES} pieces")))
    }
}

impl Density for PakesDensity {
    fn ln_pdf(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            return f64::NEG_INFINITY;
        }
        self.ln_unnormalized(y) - self.ln_norm
    }

    fn family(&self) -> Family {
        Family::Pakes
    }

    fn norm_meta(&self) -> NormMeta {
        NormMeta { constant: self.ln_norm.exp(), rel_err: self.norm_rel_err }
    }

    fn log_location(&self) -> (f64, f64) {
        (self.params.delta().ln(), self.params.ln_k().sqrt())
    }

    fn log_breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        lattice_breakpoints(&self.params, lo, hi)
    }
}
