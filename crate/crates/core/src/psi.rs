//! The function `psi` on `(k^-4, 1]` that parameterizes every doubly
//! symmetric density, subject to the reflection `psi(u) = psi(1/(k^4 u))`.
//!
//! A [`PsiSeed`] is specified freely on `[k^-2, 1]`; [`extend_seed`] mirrors
//! it onto `(k^-4, k^-2]` so the reflection holds by construction.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};

type Func = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub enum PsiFamily {
    /// `u^{alpha - 1/2}`.
    Alpha(f64),
    Lognormal,
    Constant,
    Custom(String),
}

impl fmt::Display for PsiFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiFamily::Alpha(a) => write!(f, "alpha({a})"),
            PsiFamily::Lognormal => f.write_str("lognormal"),
            PsiFamily::Constant => f.write_str("constant"),
            PsiFamily::Custom(name) => write!(f, "custom({name})"),
        }
    }
}

/// `psi` restricted to `[k^-2, 1]`.
#[derive(Clone)]
pub struct PsiSeed {
    eval: Func,
    deriv: Option<Func>,
    k: f64,
    family: PsiFamily,
}

impl fmt::Debug for PsiSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PsiSeed")
            .field("k", &self.k)
            .field("family", &self.family)
            .field("analytic_derivative", &self.deriv.is_some())
            .finish()
    }
}

fn check_k(k: f64) -> Result<()> {
    if k.is_finite() && k > 1.0 {
        Ok(())
    } else {
        domain(format!("k must exceed 1, got {k}"))
    }
}

impl PsiSeed {
    pub fn custom<F>(k: f64, name: &str, eval: F, deriv: Option<Func>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_k(k)?;
        Ok(Self { eval: Arc::new(eval), deriv, k, family: PsiFamily::Custom(name.to_string()) })
    }

    /// `psi = 1`.
    pub fn constant(k: f64) -> Result<Self> {
        check_k(k)?;
        Ok(Self {
            eval: Arc::new(|_| 1.0),
            deriv: Some(Arc::new(|_| 0.0)),
            k,
            family: PsiFamily::Constant,
        })
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.eval)(u)
    }

    pub fn derivative(&self, u: f64) -> Option<f64> {
        self.deriv.as_ref().map(|d| d(u))
    }

    pub fn has_derivative(&self) -> bool {
        self.deriv.is_some()
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn family(&self) -> &PsiFamily {
        &self.family
    }

    /// Left end `k^-2` of the seed interval.
    pub fn lower(&self) -> f64 {
        self.k.powi(-2)
    }
}

/// Seed `u^{alpha - 1/2}` on `[k^-2, 1]` with its analytic derivative.
/// Unimodal densities result for `0 < alpha < 1`.
pub fn make_psi_alpha(alpha: f64, k: f64) -> Result<PsiSeed> {
    check_k(k)?;
    if !alpha.is_finite() {
        return domain(format!("alpha must be finite, got {alpha}"));
    }
    let e = alpha - 0.5;
    Ok(PsiSeed {
        eval: Arc::new(move |u: f64| u.powf(e)),
        deriv: Some(Arc::new(move |u: f64| e * u.powf(e - 1.0))),
        k,
        family: PsiFamily::Alpha(alpha),
    })
}

#[derive(Clone, Debug)]
enum PsiKind {
    Extended(PsiSeed),
    /// `u^{-1/2} exp(-ln^2 u / (8 ln k))`.
    Lognormal { ln_k: f64 },
    /// A seed read on the whole of `(k^-4, 1]` without mirroring.
    Unextended(PsiSeed),
}

/// `psi` on `(k^-4, 1]`.
#[derive(Clone, Debug)]
pub struct PsiFunction {
    k: f64,
    kind: PsiKind,
}

/// `psi` of the lognormal law.
pub fn make_psi_lognormal(k: f64) -> Result<PsiFunction> {
    check_k(k)?;
    Ok(PsiFunction { k, kind: PsiKind::Lognormal { ln_k: k.ln() } })
}

/// Number of points the seed is probed on for sign and finiteness.
const SEED_PROBE_POINTS: usize = 1025;

/// Mirror a seed onto `(k^-4, k^-2]` via `psi(u) = seed(1/(k^4 u))`.
pub fn extend_seed(seed: PsiSeed) -> Result<PsiFunction> {
    let lo = seed.lower().ln();
    for j in 0..SEED_PROBE_POINTS {
        let u = (lo * (1.0 - j as f64 / (SEED_PROBE_POINTS - 1) as f64)).exp();
        let v = seed.eval(u);
        if !(v >= 0.0) || !v.is_finite() {
            return domain(format!("seed must be finite and nonnegative, got {v} at u = {u}"));
        }
    }
    Ok(PsiFunction { k: seed.k, kind: PsiKind::Extended(seed) })
}

fn lognormal_psi(u: f64, ln_k: f64) -> f64 {
    let l = u.ln();
    (-0.5 * l - l * l / (8.0 * ln_k)).exp()
}

fn lognormal_psi_deriv(u: f64, ln_k: f64) -> f64 {
    let l = u.ln();
    lognormal_psi(u, ln_k) * (-0.5 - l / (4.0 * ln_k)) / u
}

impl PsiFunction {
    /// Treat a seed as if it were already defined on all of `(k^-4, 1]`.
    /// Generally violates the reflection; exists to show why extension is
    /// needed.
    pub fn unextended(seed: PsiSeed) -> Self {
        Self { k: seed.k, kind: PsiKind::Unextended(seed) }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn provenance(&self) -> String {
        match &self.kind {
            PsiKind::Extended(s) => format!("extended seed {}", s.family),
            PsiKind::Lognormal { .. } => "closed form lognormal".into(),
            PsiKind::Unextended(s) => format!("unextended seed {}", s.family),
        }
    }

    fn clamp(&self, u: f64) -> f64 {
        u.clamp(self.k.powi(-4), 1.0)
    }

    /// `psi(u)`; arguments are clamped to `[k^-4, 1]`.
    pub fn eval(&self, u: f64) -> f64 {
        let u = self.clamp(u);
        match &self.kind {
            PsiKind::Extended(s) => {
                if u >= s.lower() {
                    s.eval(u)
                } else {
                    s.eval(mirror(u, self.k))
                }
            }
            PsiKind::Lognormal { ln_k } => lognormal_psi(u, *ln_k),
            PsiKind::Unextended(s) => s.eval(u),
        }
    }

    pub fn ln_eval(&self, u: f64) -> f64 {
        match &self.kind {
            PsiKind::Lognormal { ln_k } => {
                let l = self.clamp(u).ln();
                -0.5 * l - l * l / (8.0 * ln_k)
            }
            _ => self.eval(u).ln(),
        }
    }

    /// `omega(u) = psi(u) / u`.
    pub fn omega(&self, u: f64) -> f64 {
        self.eval(u) / self.clamp(u)
    }

    /// Analytic derivative, when the family supplies one. On the seed side
    /// (`u >= k^-2`) this is the seed's derivative.
    pub fn analytic_derivative(&self, u: f64) -> Option<f64> {
        let u = self.clamp(u);
        match &self.kind {
            PsiKind::Extended(s) => {
                if u >= s.lower() {
                    s.derivative(u)
                } else {
                    let v = mirror(u, self.k);
                    s.derivative(v).map(|d| -d * v / u)
                }
            }
            PsiKind::Lognormal { ln_k } => Some(lognormal_psi_deriv(u, *ln_k)),
            PsiKind::Unextended(s) => s.derivative(u),
        }
    }

    /// Restriction to `[k^-2, 1]` as a seed.
    pub fn restrict(&self) -> PsiSeed {
        match &self.kind {
            PsiKind::Extended(s) | PsiKind::Unextended(s) => s.clone(),
            PsiKind::Lognormal { ln_k } => {
                let l = *ln_k;
                PsiSeed {
                    eval: Arc::new(move |u| lognormal_psi(u, l)),
                    deriv: Some(Arc::new(move |u| lognormal_psi_deriv(u, l))),
                    k: self.k,
                    family: PsiFamily::Lognormal,
                }
            }
        }
    }

    pub fn family(&self) -> PsiFamily {
        match &self.kind {
            PsiKind::Extended(s) | PsiKind::Unextended(s) => s.family.clone(),
            PsiKind::Lognormal { .. } => PsiFamily::Lognormal,
        }
    }
}

/// `1 / (k^4 u)`.
fn mirror(u: f64, k: f64) -> f64 {
    1.0 / (k.powi(4) * u)
}

/// Sup over `n_points` log-spaced `u` in `(k^-4, 1]` of
/// `|psi(u) - psi(1/(k^4 u))|`, divided by the sup of `psi`.
pub fn psi_reflection_residual(psi: &PsiFunction, n_points: usize) -> Result<f64> {
    if n_points < 3 {
        return domain(format!("need at least 3 points, got {n_points}"));
    }
    let span = 4.0 * psi.k.ln();
    let mut defect = 0.0f64;
    let mut sup = 0.0f64;
    for j in 1..=n_points {
        let u = (-span + span * j as f64 / n_points as f64).exp();
        let a = psi.eval(u);
        let b = psi.eval(mirror(u, psi.k));
        defect = defect.max((a - b).abs());
        sup = sup.max(a.abs()).max(b.abs());
    }
    if !(sup > 0.0) {
        return Err(Error::DegenerateGrid("psi vanishes on (k^-4, 1]".into()));
    }
    Ok(defect / sup)
}

/// Threshold the smoothness booleans compare against.
pub const SMOOTHNESS_TOL: f64 = 1e-6;
/// Relative finite-difference step.
const FD_STEP: f64 = 1e-6;
/// Slack on the strict monotonicity conditions.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessReport {
    pub continuous: bool,
    pub midpoint_smooth: bool,
    pub endpoint_smooth: bool,
    pub unimodal: bool,
    /// `|psi(1) - psi(k^-4)| / psi(1)`.
    pub continuity_defect: f64,
    /// `|psi'(k^-2)|`.
    pub midpoint_defect: f64,
    /// `|2 psi'(1) + psi(1)|`.
    pub endpoint_defect: f64,
}

/// Derivative on the seed side, `u` in `[k^-2, 1]`. Finite differences fall
/// back to one-sided steps at the interval ends.
fn seed_side_derivative(psi: &PsiFunction, u: f64) -> Result<f64> {
    if let Some(d) = psi.analytic_derivative(u) {
        return Ok(d);
    }
    let lo = psi.k.powi(-2);
    let h = FD_STEP * u;
    let d = if u + h > 1.0 {
        (3.0 * psi.eval(u) - 4.0 * psi.eval(u - h) + psi.eval(u - 2.0 * h)) / (2.0 * h)
    } else if u - h < lo {
        (-3.0 * psi.eval(u) + 4.0 * psi.eval(u + h) - psi.eval(u + 2.0 * h)) / (2.0 * h)
    } else {
        (psi.eval(u + h) - psi.eval(u - h)) / (2.0 * h)
    };
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::Numeric(format!("psi derivative is not finite at u = {u}")))
    }
}

/// Continuity and differentiability conditions of the resulting density at
/// grid end- and midpoints.
pub fn smoothness_report(psi: &PsiFunction) -> Result<SmoothnessReport> {
    let k = psi.k;
    let one = psi.eval(1.0);
    let bottom = psi.eval(k.powi(-4));
    if !(one > 0.0) {
        return Err(Error::Numeric(format!("psi(1) must be positive, got {one}")));
    }
    let mid = k.powi(-2);
    // Value match across the midpoint as well as the ends.
    let mid_jump = (psi.eval(mid) - psi.eval(mid * (1.0 - 1e-12))).abs() / one;
    let continuity_defect = (one - bottom).abs() / one;
    let midpoint_defect = seed_side_derivative(psi, mid)?.abs();
    let endpoint_defect = (2.0 * seed_side_derivative(psi, 1.0)? + one).abs();
    let unimodal = unimodality_check(psi).unimodal;
    Ok(SmoothnessReport {
        continuous: continuity_defect <= SMOOTHNESS_TOL && mid_jump <= SMOOTHNESS_TOL,
        midpoint_smooth: midpoint_defect <= SMOOTHNESS_TOL,
        endpoint_smooth: endpoint_defect <= SMOOTHNESS_TOL,
        unimodal,
        continuity_defect,
        midpoint_defect,
        endpoint_defect,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnimodalityReport {
    pub unimodal: bool,
    /// `"derivative"` or `"scan"`.
    pub method: &'static str,
    /// First `u` where a condition fails.
    pub first_violation: Option<f64>,
    /// Smallest margin seen (derivative: `1 - 2u|(ln psi)'|`).
    pub min_margin: f64,
}

const SCAN_POINTS: usize = 10_000;

/// Whether `sqrt(u) psi(u)` is strictly increasing and `psi(u)/sqrt(u)`
/// strictly decreasing. With an analytic derivative this is
/// `|(ln psi)'(u)| < 1/(2u)` on the open seed interval; otherwise both
/// products are scanned on `(k^-4, 1]`.
pub fn unimodality_check(psi: &PsiFunction) -> UnimodalityReport {
    let k = psi.k;
    let has_deriv = psi.analytic_derivative(1.0).is_some();
    if has_deriv {
        let a = -2.0 * k.ln();
        let mut min_margin = f64::INFINITY;
        let mut first = None;
        for j in 0..SCAN_POINTS {
            let u = (a * (1.0 - (j as f64 + 0.5) / SCAN_POINTS as f64)).exp();
            let p = psi.eval(u);
            let dp = psi.analytic_derivative(u).unwrap_or(f64::NAN);
            let margin = if p > 0.0 { 1.0 - 2.0 * u * (dp / p).abs() } else { f64::NEG_INFINITY };
            let margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
            if margin < min_margin {
                min_margin = margin;
            }
            if margin <= MONOTONE_SLACK && first.is_none() {
                first = Some(u);
            }
        }
        return UnimodalityReport {
            unimodal: first.is_none(),
            method: "derivative",
            first_violation: first,
            min_margin,
        };
    }
    let a = -4.0 * k.ln();
    let mut prev: Option<(f64, f64)> = None;
    let mut first = None;
    let mut min_margin = f64::INFINITY;
    for j in 0..SCAN_POINTS {
        let u = (a * (1.0 - (j as f64 + 0.5) / SCAN_POINTS as f64)).exp();
        let p = psi.eval(u);
        let up = u.sqrt() * p;
        let down = p / u.sqrt();
        if let Some((pu, pd)) = prev {
            let inc = (up - pu) / pu.abs().max(f64::MIN_POSITIVE);
            let dec = (pd - down) / pd.abs().max(f64::MIN_POSITIVE);
            let m = inc.min(dec);
            min_margin = min_margin.min(m);
            if m < -MONOTONE_SLACK && first.is_none() {
                first = Some(u);
            }
        }
        prev = Some((up, down));
    }
    UnimodalityReport { unimodal: first.is_none(), method: "scan", first_violation: first, min_margin }
}
