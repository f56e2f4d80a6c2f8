//! Family selection and construction from command-line flags.

use std::sync::Arc;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use dsym_core::densities::{
    make_lognormal, make_pakes_ds, make_poly_ds, make_stieltjes, LognormalParams, StieltjesParams,
};
use dsym_core::psi::{extend_seed, make_psi_alpha};
use dsym_core::theta::make_askey_berg;
use dsym_core::{DensityModel, SymmetryParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Lognormal,
    Stieltjes,
    Askeyberg,
    PakesAlpha,
    Poly,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Lognormal => "lognormal",
            FamilyKind::Stieltjes => "stieltjes",
            FamilyKind::Askeyberg => "askeyberg",
            FamilyKind::PakesAlpha => "pakes-alpha",
            FamilyKind::Poly => "poly",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyKind,
    /// Log-scale location (lognormal, stieltjes).
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Log-scale spread (lognormal, stieltjes).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Perturbation amplitude in [-1, 1] (stieltjes).
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// Power of y in the theta-series law (askeyberg).
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Seed exponent, psi(u) = u^(alpha - 1/2) (pakes-alpha).
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Mode (poly, pakes-alpha).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Median-to-mode ratio (poly, pakes-alpha, askeyberg).
    #[arg(long)]
    pub k: Option<f64>,
}

/// A constructed density with the parameters it is reported under.
pub struct Model {
    pub kind: FamilyKind,
    pub density: DensityModel,
    /// Median/mode pair if the law is doubly symmetric.
    pub ds: Option<SymmetryParams>,
    /// Parameters to place a default grid around.
    pub location: SymmetryParams,
    pub params: Vec<(&'static str, f64)>,
}

fn forbid(kind: FamilyKind, flags: &[(&str, Option<f64>)]) -> Result<()> {
    for (name, v) in flags {
        if v.is_some() {
            bail!("--{name} does not apply to --family {}", kind.name());
        }
    }
    Ok(())
}

impl FamilyArgs {
    pub fn build(&self) -> Result<Model> {
        let kind = self.family;
        match kind {
            FamilyKind::Lognormal => {
                forbid(kind, &[("eps", self.eps), ("gamma", self.gamma), ("alpha", self.alpha), ("theta", self.theta), ("k", self.k)])?;
                let (mu, sigma) = (self.mu.unwrap_or(0.0), self.sigma.unwrap_or(1.0));
                let d = make_lognormal(mu, sigma)?;
                let p = d.params().symmetry_params();
                Ok(Model {
                    kind,
                    density: Arc::new(d),
                    ds: Some(p),
                    location: p,
                    params: vec![("mu", mu), ("sigma", sigma)],
                })
            }
            FamilyKind::Stieltjes => {
                forbid(kind, &[("gamma", self.gamma), ("alpha", self.alpha), ("theta", self.theta), ("k", self.k)])?;
                let (mu, sigma, eps) =
                    (self.mu.unwrap_or(0.0), self.sigma.unwrap_or(1.0), self.eps.unwrap_or(0.5));
                let p = StieltjesParams::new(mu, sigma, eps)?;
                let loc = p.base().symmetry_params();
                Ok(Model {
                    kind,
                    density: Arc::new(make_stieltjes(p)?),
                    ds: None,
                    location: loc,
                    params: vec![("mu", mu), ("sigma", sigma), ("eps", eps)],
                })
            }
            FamilyKind::Askeyberg => {
                forbid(kind, &[("mu", self.mu), ("sigma", self.sigma), ("eps", self.eps), ("alpha", self.alpha), ("theta", self.theta)])?;
                let (gamma, k) = (self.gamma.unwrap_or(1.0), self.k.unwrap_or(2.0));
                let d = make_askey_berg(gamma, k)?;
                let ds = d.ds_params();
                let loc = d.matched_lognormal().params().symmetry_params();
                Ok(Model {
                    kind,
                    density: Arc::new(d),
                    ds,
                    location: loc,
                    params: vec![("gamma", gamma), ("k", k)],
                })
            }
            FamilyKind::PakesAlpha => {
                forbid(kind, &[("mu", self.mu), ("sigma", self.sigma), ("eps", self.eps), ("gamma", self.gamma)])?;
                let (alpha, theta, k) =
                    (self.alpha.unwrap_or(0.5), self.theta.unwrap_or(1.0), self.k.unwrap_or(2.0));
                let p = SymmetryParams::new(theta, k)?;
                let psi = extend_seed(make_psi_alpha(alpha, k)?)?;
                Ok(Model {
                    kind,
                    density: Arc::new(make_pakes_ds(psi, p)?),
                    ds: Some(p),
                    location: p,
                    params: vec![("alpha", alpha), ("theta", theta), ("k", k)],
                })
            }
            FamilyKind::Poly => {
                forbid(kind, &[("mu", self.mu), ("sigma", self.sigma), ("eps", self.eps), ("gamma", self.gamma), ("alpha", self.alpha)])?;
                let (theta, k) = (self.theta.unwrap_or(1.0), self.k.unwrap_or(2.0));
                let p = SymmetryParams::new(theta, k)?;
                Ok(Model {
                    kind,
                    density: Arc::new(make_poly_ds(p)?),
                    ds: Some(p),
                    location: p,
                    params: vec![("theta", theta), ("k", k)],
                })
            }
        }
    }
}

/// Lognormal with the same mode and median-to-mode ratio.
pub fn matched_lognormal(p: &SymmetryParams) -> dsym_core::densities::Lognormal {
    dsym_core::densities::Lognormal::new(LognormalParams::matched(p))
}
