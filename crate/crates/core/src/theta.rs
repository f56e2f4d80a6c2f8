//! Ramanujan's theta series `L_k(y) = sum_n y^n k^{-n^2/2}` and the
//! Askey/Berg densities `f(y) ∝ y^{gamma-1} / L_k(y)`.

use std::sync::Arc;

use crate::densities::{Lognormal, LognormalParams};
use crate::density::{Density, DensityModel, Family, NormMeta};
use crate::error::{domain, Error, Result};
use crate::grid::GridSpec;
use crate::par;
use crate::params::SymmetryParams;
use crate::quadrature::integrate_log_domain;
use crate::symmetry::{Relation, ResidualReport};

/// Truncated series value. `ln_value` is kept because `L_k` overflows for
/// large `|ln y|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaEval {
    pub ln_value: f64,
    pub n_terms: usize,
    /// Certified remainder bound divided by the value.
    pub rel_tail_bound: f64,
}

impl ThetaEval {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }

    pub fn tail_bound(&self) -> f64 {
        self.rel_tail_bound * self.value()
    }
}

const TERM_CUTOFF: f64 = 1e-18;

/// Sum in log space, starting at the peak index `round(ln y / ln k)` and
/// moving outward in both directions until the next term is below `1e-18`
/// of the running sum.
pub fn ln_ramanujan_theta(ln_y: f64, ln_k: f64) -> ThetaEval {
    let t = |n: f64| n * ln_y - 0.5 * n * n * ln_k;
    let peak = (ln_y / ln_k).round();
    let t0 = t(peak);
    let mut sum = 1.0;
    let mut n_terms = 1;
    let mut tail = 0.0;
    for dir in [1.0, -1.0] {
        let mut m = 1.0;
        loop {
            let n = peak + dir * m;
            let term = (t(n) - t0).exp();
            if term < TERM_CUTOFF * sum {
                // Ratio of successive terms beyond n is at most this and
                // shrinks further out, so the tail is dominated by a
                // geometric series.
                let ratio = (dir * ln_y - (dir * n + 0.5) * ln_k).exp();
                tail += if ratio < 1.0 { term / (1.0 - ratio) } else { f64::INFINITY };
                break;
            }
            sum += term;
            n_terms += 1;
            m += 1.0;
        }
    }
    ThetaEval { ln_value: t0 + sum.ln(), n_terms, rel_tail_bound: tail / sum }
}

pub fn ramanujan_theta(y: f64, k: f64) -> Result<ThetaEval> {
    if !(k > 1.0 && k.is_finite()) {
        return domain(format!("theta series needs k > 1, got {k}"));
    }
    if !(y > 0.0 && y.is_finite()) {
        return domain(format!("theta series needs y > 0, got {y}"));
    }
    Ok(ln_ramanujan_theta(y.ln(), k.ln()))
}

/// Fixed truncation: `2 half_width + 1` terms around the peak index.
pub fn ramanujan_theta_fixed(y: f64, k: f64, half_width: usize) -> f64 {
    let (ly, lk) = (y.ln(), k.ln());
    let peak = (ly / lk).round() as i64;
    let hw = half_width as i64;
    (peak - hw..=peak + hw)
        .map(|n| {
            let n = n as f64;
            (n * ly - 0.5 * n * n * lk).exp()
        })
        .sum()
}

/// Relative residual `sup |L_k(k^c y) / L_k(k^c / y) / y^{2c} - 1|` over
/// the ratio grid.
pub fn theta_shift_identity_residual(c: f64, k: f64, grid: &GridSpec) -> Result<ResidualReport> {
    if !(k > 1.0 && k.is_finite()) {
        return domain(format!("k must exceed 1, got {k}"));
    }
    let (lk, shift) = (k.ln(), c * k.ln());
    let ys = grid.points();
    let defects = par::map_slice(&ys, |&y| {
        let ly = y.ln();
        let ratio = ln_ramanujan_theta(shift + ly, lk).ln_value
            - ln_ramanujan_theta(shift - ly, lk).ln_value
            - 2.0 * c * ly;
        ratio.exp_m1().abs()
    });
    let residual = par::max_of(defects);
    if !residual.is_finite() {
        return Err(Error::Numeric("theta ratio is not finite on the grid".into()));
    }
    Ok(ResidualReport::new(Relation::ThetaShift, residual, 1.0, *grid).with_tolerance(1e-13))
}

pub(crate) fn is_half_integer(x: f64) -> bool {
    let t = 2.0 * x;
    (t - t.round()).abs() <= 1e-12 * t.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AskeyBergDensity {
    gamma: f64,
    k: f64,
    ln_k: f64,
    ln_norm: f64,
    norm_rel_err: f64,
}

/// Normalization target for the log-domain quadrature.
const NORM_RTOL: f64 = 1e-13;

pub fn make_askey_berg(gamma: f64, k: f64) -> Result<AskeyBergDensity> {
    if !(k > 1.0 && k.is_finite()) {
        return domain(format!("k must exceed 1, got {k}"));
    }
    if !gamma.is_finite() {
        return domain(format!("gamma must be finite, got {gamma}"));
    }
    let lk = k.ln();
    // In w = ln y: y * y^{gamma-1} / L_k(y) = exp(gamma w - ln L_k(e^w)).
    let ln_f = |w: f64| gamma * w - ln_ramanujan_theta(w, lk).ln_value;
    let r = integrate_log_domain(&ln_f, gamma * lk, lk.sqrt(), |_, _| Vec::new(), NORM_RTOL)?;
    if !(r.value > 0.0 && r.value.is_finite()) {
        return Err(Error::Numeric(format!("normalization gave {}", r.value)));
    }
    Ok(AskeyBergDensity { gamma, k, ln_k: lk, ln_norm: r.value.ln(), norm_rel_err: r.rel_err })
}

impl AskeyBergDensity {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `delta = k^gamma`, `theta = k^{gamma-1}` when `gamma` is an integer or
    /// half-integer.
    pub fn ds_params(&self) -> Option<SymmetryParams> {
        if is_half_integer(self.gamma) {
            SymmetryParams::new(self.k.powf(self.gamma - 1.0), self.k).ok()
        } else {
            None
        }
    }

    /// Lognormal with `mu = gamma ln k`, `sigma^2 = ln k`.
    pub fn matched_lognormal(&self) -> Lognormal {
        Lognormal::new(LognormalParams { mu: self.gamma * self.ln_k, sigma: self.ln_k.sqrt() })
    }
}

impl Density for AskeyBergDensity {
    fn ln_pdf(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            return f64::NEG_INFINITY;
        }
        let w = y.ln();
        (self.gamma - 1.0) * w - ln_ramanujan_theta(w, self.ln_k).ln_value - self.ln_norm
    }

    fn family(&self) -> Family {
        Family::AskeyBerg
    }

    fn norm_meta(&self) -> NormMeta {
        NormMeta { constant: self.ln_norm.exp(), rel_err: self.norm_rel_err }
    }

    fn log_location(&self) -> (f64, f64) {
        (self.gamma * self.ln_k, self.ln_k.sqrt())
    }
}

/// `sup |f_gamma - f_0| / sup f_0` over the grid, `f_0` the matched
/// lognormal.
pub fn askey_berg_lognormal_gap(gamma: f64, k: f64, grid: &GridSpec) -> Result<f64> {
    let ab = make_askey_berg(gamma, k)?;
    let ln = ab.matched_lognormal();
    let ys = grid.points();
    let pairs = par::map_slice(&ys, |&y| (ab.pdf(y), ln.pdf(y)));
    let sup0 = par::max_of(pairs.iter().map(|p| p.1));
    if !(sup0 > 0.0) {
        return Err(Error::DegenerateGrid("lognormal vanishes on the grid".into()));
    }
    Ok(par::max_of(pairs.iter().map(|p| (p.0 - p.1).abs())) / sup0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridpointReport {
    /// `(p, |f_gamma(k^p) - f_0(k^p)| / f_0(k^p))`.
    pub defects: Vec<(i64, f64)>,
    /// Whether equality is expected (`gamma` integer or half-integer).
    pub exact_claim: bool,
}

impl GridpointReport {
    pub fn max_defect(&self) -> f64 {
        self.defects.iter().map(|d| d.1).fold(0.0, f64::max)
    }
}

/// Compare the Askey/Berg density and its matched lognormal at `y = k^p`.
pub fn gridpoint_equality_check(
    gamma: f64,
    k: f64,
    p_range: std::ops::RangeInclusive<i64>,
) -> Result<GridpointReport> {
    let ab = make_askey_berg(gamma, k)?;
    let ln = ab.matched_lognormal();
    let defects = p_range
        .map(|p| {
            let y = k.powi(p as i32);
            let (a, b) = (ab.pdf(y), ln.pdf(y));
            (p, (a - b).abs() / b)
        })
        .collect();
    Ok(GridpointReport { defects, exact_claim: is_half_integer(gamma) })
}

/// Convenience: the density as a shared model.
pub fn askey_berg_model(gamma: f64, k: f64) -> Result<DensityModel> {
    Ok(Arc::new(make_askey_berg(gamma, k)?))
}
