use std::f64::consts::PI;

use statrs::function::erf::erfc;

use crate::density::{Density, Family, NormMeta};
use crate::error::{domain, Result};
use crate::params::SymmetryParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalParams {
    pub mu: f64,
    pub sigma: f64,
}

impl LognormalParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) || !mu.is_finite() {
            return domain(format!("lognormal needs finite mu and sigma > 0, got ({mu}, {sigma})"));
        }
        Ok(Self { mu, sigma })
    }

    /// Lognormal with mode `theta` and median `k theta`:
    /// `sigma^2 = ln k`, `mu = ln theta + sigma^2`.
    pub fn matched(params: &SymmetryParams) -> Self {
        let s2 = params.ln_k();
        Self { mu: params.theta().ln() + s2, sigma: s2.sqrt() }
    }

    /// Median `e^mu`.
    pub fn delta1(&self) -> f64 {
        self.mu.exp()
    }

    /// Mode `e^{mu - sigma^2}`.
    pub fn theta1(&self) -> f64 {
        (self.mu - self.sigma * self.sigma).exp()
    }

    /// `e^{sigma^2}`.
    pub fn k(&self) -> f64 {
        (self.sigma * self.sigma).exp()
    }

    pub fn symmetry_params(&self) -> SymmetryParams {
        SymmetryParams::new(self.theta1(), self.k()).expect("sigma > 0 gives k > 1")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lognormal {
    params: LognormalParams,
    ln_norm: f64,
}

pub fn make_lognormal(mu: f64, sigma: f64) -> Result<Lognormal> {
    Ok(Lognormal::new(LognormalParams::new(mu, sigma)?))
}

impl Lognormal {
    pub fn new(params: LognormalParams) -> Self {
        Self { params, ln_norm: -(2.0 * PI).sqrt().ln() - params.sigma.ln() }
    }

    pub fn params(&self) -> LognormalParams {
        self.params
    }

    /// `E(Y^s) = exp(s mu + s^2 sigma^2 / 2)`.
    pub fn moment(&self, s: f64) -> f64 {
        let p = self.params;
        (s * p.mu + 0.5 * s * s * p.sigma * p.sigma).exp()
    }
}

impl Density for Lognormal {
    fn ln_pdf(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            return f64::NEG_INFINITY;
        }
        let w = y.ln();
        let z = (w - self.params.mu) / self.params.sigma;
        self.ln_norm - w - 0.5 * z * z
    }

    fn family(&self) -> Family {
        Family::Lognormal
    }

    fn norm_meta(&self) -> NormMeta {
        NormMeta::EXACT
    }

    fn log_location(&self) -> (f64, f64) {
        (self.params.mu, self.params.sigma)
    }

    fn cdf(&self, y: f64) -> Option<f64> {
        if !(y > 0.0) {
            return Some(0.0);
        }
        let z = (y.ln() - self.params.mu) / (self.params.sigma * std::f64::consts::SQRT_2);
        Some(0.5 * erfc(-z))
    }
}
