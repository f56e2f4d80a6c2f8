//! Concrete density families.

mod lognormal;
mod pakes;
mod poly;
mod stieltjes;

pub use lognormal::{make_lognormal, Lognormal, LognormalParams};
pub use pakes::{make_pakes_ds, PakesDensity, REFLECTION_GATE};
pub use poly::{
    make_poly_ds, poly_ds_norm_const, poly_ds_norm_const_quadrature, poly_piece_mass_unnormalized,
    PolyDsDensity,
};
pub use stieltjes::{
    make_stieltjes, make_stieltjes_pair, stieltjes_cross_residual, Stieltjes, StieltjesParams,
};

use crate::params::SymmetryParams;

/// Three consecutive pieces below this fraction of the running total end
/// piecewise summation.
pub(crate) const PIECE_NEGLIGIBLE: f64 = 1e-16;

/// Piece order used by piecewise sums: 0, 1, -1, 2, -2, ...
pub(crate) fn outward(j: usize) -> i64 {
    let m = j.div_ceil(2) as i64;
    if j % 2 == 1 {
        m
    } else {
        -m
    }
}

/// Breakpoints `ln(theta k^m)` for every integer `m` inside `[lo, hi]`:
/// piece ends (even `m`) and piece midpoints (odd `m`).
pub(crate) fn lattice_breakpoints(params: &SymmetryParams, lo: f64, hi: f64) -> Vec<f64> {
    let lt = params.theta().ln();
    let lk = params.ln_k();
    let m0 = ((lo - lt) / lk).ceil() as i64;
    let m1 = ((hi - lt) / lk).floor() as i64;
    (m0..=m1).map(|m| lt + m as f64 * lk).collect()
}
