use std::f64::consts::PI;

use crate::density::{Density, Family, NormMeta};
use crate::error::{domain, Result};
use crate::grid::GridSpec;
use crate::symmetry::{sup_defect, Relation, ResidualReport};

use super::lognormal::{Lognormal, LognormalParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StieltjesParams {
    pub mu: f64,
    pub sigma: f64,
    pub eps: f64,
}

impl StieltjesParams {
    pub fn new(mu: f64, sigma: f64, eps: f64) -> Result<Self> {
        LognormalParams::new(mu, sigma)?;
        if !(eps.abs() <= 1.0) {
            return domain(format!("|eps| must not exceed 1 (density would go negative), got {eps}"));
        }
        Ok(Self { mu, sigma, eps })
    }

    pub fn base(&self) -> LognormalParams {
        LognormalParams { mu: self.mu, sigma: self.sigma }
    }

    pub fn negated(&self) -> Self {
        Self { eps: -self.eps, ..*self }
    }
}

/// Lognormal perturbed by `1 + eps sin(2 pi (ln y - mu) / sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stieltjes {
    params: StieltjesParams,
    base: Lognormal,
}

pub fn make_stieltjes(p: StieltjesParams) -> Result<Stieltjes> {
    let p = StieltjesParams::new(p.mu, p.sigma, p.eps)?;
    Ok(Stieltjes { params: p, base: Lognormal::new(p.base()) })
}

/// The densities for `eps` and `-eps`.
pub fn make_stieltjes_pair(p: StieltjesParams) -> Result<(Stieltjes, Stieltjes)> {
    Ok((make_stieltjes(p)?, make_stieltjes(p.negated())?))
}

impl Stieltjes {
    pub fn params(&self) -> StieltjesParams {
        self.params
    }

    fn bracket(&self, y: f64) -> f64 {
        let p = self.params;
        1.0 + p.eps * (2.0 * PI * (y.ln() - p.mu) / (p.sigma * p.sigma)).sin()
    }
}

impl Density for Stieltjes {
    fn ln_pdf(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            return f64::NEG_INFINITY;
        }
        self.base.ln_pdf(y) + self.bracket(y).max(0.0).ln()
    }

    fn pdf(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            return 0.0;
        }
        self.base.pdf(y) * self.bracket(y).max(0.0)
    }

    fn family(&self) -> Family {
        Family::Stieltjes
    }

    fn norm_meta(&self) -> NormMeta {
        NormMeta::EXACT
    }

    fn log_location(&self) -> (f64, f64) {
        (self.params.mu, self.params.sigma)
    }
}

/// Residuals of the two cross identities linking `eps` and `-eps`:
/// `y^2 f_eps(delta1 y) = f_{-eps}(delta1 / y)` and
/// `f_eps(theta1 y) = f_{-eps}(theta1 / y)`. The grid holds the ratio `y`.
pub fn stieltjes_cross_residual(
    p: StieltjesParams,
    grid: &GridSpec,
) -> Result<(ResidualReport, ResidualReport)> {
    let (plus, minus) = make_stieltjes_pair(p)?;
    let base = p.base();
    let (d1, t1) = (base.delta1(), base.theta1());
    let log = sup_defect(Relation::StieltjesLogCross, grid, |y| {
        (y * y * plus.pdf(d1 * y), minus.pdf(d1 / y))
    })?;
    let r = sup_defect(Relation::StieltjesRCross, grid, |y| (plus.pdf(t1 * y), minus.pdf(t1 / y)))?;
    Ok((log.with_tolerance(1e-12), r.with_tolerance(1e-12)))
}
