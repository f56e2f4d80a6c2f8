//! Doubly symmetric densities on the positive half-line.
//!
//! A density `f` on `(0, inf)` is log-symmetric about its median `delta`
//! when `y^2 f(delta y) = f(delta / y)` and R-symmetric about its mode
//! `theta` when `f(theta y) = f(theta / y)`. Laws with both properties are
//! parameterized by `theta`, the ratio `k = delta / theta > 1`, and a
//! function `psi` on `(k^-4, 1]` obeying `psi(u) = psi(1/(k^4 u))`.
//!
//! This crate builds those densities (lognormal, Askey/Berg, the general
//! piecewise construction and its closed-form polynomial member), checks
//! the defining identities numerically, computes moments, and samples.

pub mod densities;
pub mod density;
pub mod error;
pub mod grid;
pub mod moments;
pub mod par;
pub mod params;
pub mod psi;
pub mod quadrature;
pub mod sampling;
pub mod symmetry;
pub mod theta;

pub use density::{power_transform, Density, DensityModel, Family, NormMeta};
pub use error::{Error, Result};
pub use grid::GridSpec;
pub use params::{grid_index, PieceIndex, SymmetryParams};
pub use symmetry::{
    best_symmetry_center, ds_chain_residual, symmetry_residual, Relation, ResidualReport,
};
