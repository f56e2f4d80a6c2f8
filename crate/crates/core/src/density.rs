//! Densities on the positive half-line and the transforms between them.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Result};

/// Family tag carried by every density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Lognormal,
    Stieltjes,
    Pakes,
    PolyDs,
    AskeyBerg,
    Scaled,
    Power,
    Reflected,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Lognormal => "lognormal",
            Family::Stieltjes => "stieltjes",
            Family::Pakes => "pakes",
            Family::PolyDs => "poly",
            Family::AskeyBerg => "askeyberg",
            Family::Scaled => "scaled",
            Family::Power => "power",
            Family::Reflected => "reflected",
        };
        f.write_str(s)
    }
}

/// Normalization constant used by a density and its estimated relative error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormMeta {
    pub constant: f64,
    pub rel_err: f64,
}

impl NormMeta {
    pub const EXACT: NormMeta = NormMeta { constant: 1.0, rel_err: 0.0 };
}

/// A probability density on (0, inf).
pub trait Density: Send + Sync + fmt::Debug {
    /// Natural log of the density; `-inf` where the density vanishes.
    fn ln_pdf(&self, y: f64) -> f64;

    fn pdf(&self, y: f64) -> f64 {
        if y > 0.0 {
            self.ln_pdf(y).exp()
        } else {
            0.0
        }
    }

    fn family(&self) -> Family;

    fn norm_meta(&self) -> NormMeta;

    /// Rough location and scale of `ln Y`, used to seed integration windows.
    fn log_location(&self) -> (f64, f64);

    /// Values of `w = ln y` in `[lo, hi]` where the density has kinks.
    fn log_breakpoints(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }

    /// Closed-form CDF when the family has one.
    fn cdf(&self, _y: f64) -> Option<f64> {
        None
    }
}

pub type DensityModel = Arc<dyn Density>;

/// Density of `Y / scale`: `g(x) = scale * f(scale * x)`.
#[derive(Debug, Clone)]
pub struct Scaled {
    inner: DensityModel,
    scale: f64,
    ln_scale: f64,
}

impl Scaled {
    pub fn new(inner: DensityModel, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return domain(format!("scale must be positive, got {scale}"));
        }
        Ok(Self { inner, scale, ln_scale: scale.ln() })
    }
}

impl Density for Scaled {
    fn ln_pdf(&self, x: f64) -> f64 {
        self.ln_scale + self.inner.ln_pdf(self.scale * x)
    }

    fn pdf(&self, x: f64) -> f64 {
        self.scale * self.inner.pdf(self.scale * x)
    }

    fn family(&self) -> Family {
        Family::Scaled
    }

    fn norm_meta(&self) -> NormMeta {
        self.inner.norm_meta()
    }

    fn log_location(&self) -> (f64, f64) {
        let (c, s) = self.inner.log_location();
        (c - self.ln_scale, s)
    }

    fn log_breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.inner
            .log_breakpoints(lo + self.ln_scale, hi + self.ln_scale)
            .into_iter()
            .map(|w| w - self.ln_scale)
            .collect()
    }

    fn cdf(&self, x: f64) -> Option<f64> {
        self.inner.cdf(self.scale * x)
    }
}

/// Density of `Y^gamma`: `g(z) = f(z^{1/gamma}) z^{1/gamma - 1} / |gamma|`.
#[derive(Debug, Clone)]
pub struct Power {
    inner: DensityModel,
    gamma: f64,
}

impl Power {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Density of `Y^gamma` for `Y ~ d`.
pub fn power_transform(d: DensityModel, gamma: f64) -> Result<DensityModel> {
    if gamma == 0.0 || !gamma.is_finite() {
        return domain(format!("power transform needs finite nonzero gamma, got {gamma}"));
    }
    Ok(Arc::new(Power { inner: d, gamma }))
}

impl Density for Power {
    fn ln_pdf(&self, z: f64) -> f64 {
        if !(z > 0.0) {
            return f64::NEG_INFINITY;
        }
        let w = z.ln();
        let inv = 1.0 / self.gamma;
        self.inner.ln_pdf((w * inv).exp()) + (inv - 1.0) * w - self.gamma.abs().ln()
    }

    fn family(&self) -> Family {
        Family::Power
    }

    fn norm_meta(&self) -> NormMeta {
        self.inner.norm_meta()
    }

    fn log_location(&self) -> (f64, f64) {
        let (c, s) = self.inner.log_location();
        (self.gamma * c, self.gamma.abs() * s)
    }

    fn log_breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (a, b) = (lo / self.gamma, hi / self.gamma);
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.inner
            .log_breakpoints(a, b)
            .into_iter()
            .map(|w| w * self.gamma)
            .collect()
    }

    fn cdf(&self, z: f64) -> Option<f64> {
        if !(z > 0.0) {
            return Some(0.0);
        }
        let y = (z.ln() / self.gamma).exp();
        let f = self.inner.cdf(y)?;
        Some(if self.gamma > 0.0 { f } else { 1.0 - f })
    }
}

/// Density of `center^2 / Y`: `f_R(y) = f(center^2 / y) center^2 / y^2`.
#[derive(Debug, Clone)]
pub struct Reflected {
    inner: DensityModel,
    ln_center: f64,
}

impl Reflected {
    pub fn new(inner: DensityModel, center: f64) -> Result<Self> {
        if !(center > 0.0 && center.is_finite()) {
            return domain(format!("reflection center must be positive, got {center}"));
        }
        Ok(Self { inner, ln_center: center.ln() })
    }
}

impl Density for Reflected {
    fn ln_pdf(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            return f64::NEG_INFINITY;
        }
        let w = y.ln();
        let wr = 2.0 * self.ln_center - w;
        self.inner.ln_pdf(wr.exp()) + wr - w
    }

    fn family(&self) -> Family {
        Family::Reflected
    }

    fn norm_meta(&self) -> NormMeta {
        self.inner.norm_meta()
    }

    fn log_location(&self) -> (f64, f64) {
        let (c, s) = self.inner.log_location();
        (2.0 * self.ln_center - c, s)
    }

    fn log_breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let m = 2.0 * self.ln_center;
        self.inner
            .log_breakpoints(m - hi, m - lo)
            .into_iter()
            .map(|w| m - w)
            .collect()
    }
}
