//! Moments in log coordinates, the two-step moment recursion of doubly
//! symmetric laws, and identities of `h(w) = ln f(e^w)`.

use crate::density::{power_transform, Density, DensityModel};
use crate::error::{domain, Error, Result};
use crate::grid::GridSpec;
use crate::par;
use crate::params::SymmetryParams;
use crate::quadrature::integrate_log_domain;
use crate::symmetry::{best_symmetry_center, symmetry_residual, Relation};

/// Relative accuracy requested from the moment quadrature.
pub const MOMENT_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentValue {
    pub value: f64,
    pub rel_err: f64,
}

/// `E(Y^s) = ∫ exp((s+1) w) f(e^w) dw`, window taken from the integrand's
/// own peak.
pub fn moment(d: &dyn Density, s: f64) -> Result<MomentValue> {
    if !s.is_finite() {
        return domain(format!("moment order must be finite, got {s}"));
    }
    let (c, scale) = d.log_location();
    let ln_f = |w: f64| (s + 1.0) * w + d.ln_pdf(w.exp());
    let r = integrate_log_domain(
        &ln_f,
        c + s * scale * scale,
        scale,
        |lo, hi| d.log_breakpoints(lo, hi),
        MOMENT_RTOL,
    )
    .map_err(|e| Error::Numeric(format!("moment s = {s} of {}: {e}", d.family())))?;
    if !(r.value > 0.0 && r.value.is_finite()) {
        return Err(Error::Numeric(format!(
            "moment s = {s} of {} is {} (window [{}, {}])",
            d.family(),
            r.value,
            r.window.lo,
            r.window.hi
        )));
    }
    Ok(MomentValue { value: r.value, rel_err: r.rel_err })
}

/// Mass the density puts on `[a, b]`.
pub fn window_mass(d: &dyn Density, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > a) {
        return domain(format!("window must satisfy 0 < a < b, got [{a}, {b}]"));
    }
    let (lo, hi) = (a.ln(), b.ln());
    let mut breaks = crate::quadrature::uniform_breaks(lo, hi, 64);
    breaks.extend(d.log_breakpoints(lo, hi));
    crate::quadrature::normalize_breaks(&mut breaks, lo, hi);
    let f = |w: f64| {
        let v = d.ln_pdf(w.exp()) + w;
        if v.is_nan() {
            0.0
        } else {
            v.exp()
        }
    };
    Ok(crate::quadrature::integrate_segments(&f, &breaks, 1e-12)?.value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentEntry {
    pub s: f64,
    pub moment: f64,
    pub moment_plus_two: f64,
    pub rel_err: f64,
    /// `|E(Y^{s+2}) - (delta^{2(s+2)} / theta^{2(s+1)}) E(Y^s)| / E(Y^{s+2})`.
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub entries: Vec<MomentEntry>,
}

impl MomentReport {
    pub fn max_defect(&self) -> f64 {
        self.entries.iter().map(|e| e.defect).fold(0.0, f64::max)
    }
}

/// Check `E(Y^{s+2}) = (delta^{2(s+2)} / theta^{2(s+1)}) E(Y^s)` for each `s`.
pub fn moment_recursion_residual(
    d: &dyn Density,
    params: &SymmetryParams,
    s_list: &[f64],
) -> Result<MomentReport> {
    let (ld, lt) = (params.delta().ln(), params.theta().ln());
    let entries = par::map_slice_coarse(s_list, |&s| -> Result<MomentEntry> {
        let m = moment(d, s)?;
        let m2 = moment(d, s + 2.0)?;
        let factor = (2.0 * (s + 2.0) * ld - 2.0 * (s + 1.0) * lt).exp();
        Ok(MomentEntry {
            s,
            moment: m.value,
            moment_plus_two: m2.value,
            rel_err: m.rel_err.max(m2.rel_err),
            defect: (m2.value - factor * m.value).abs() / m2.value,
        })
    });
    Ok(MomentReport { entries: entries.into_iter().collect::<Result<_>>()? })
}

/// `sup_s |r(s + period) - r(s)| / r(s)` with `r(s) = E_d(Y^s) / E_ref(Y^s)`.
pub fn moment_ratio_periodicity(
    d: &dyn Density,
    reference: &dyn Density,
    s_grid: &[f64],
    period: f64,
) -> Result<f64> {
    let ratio = |s: f64| -> Result<f64> { Ok(moment(d, s)?.value / moment(reference, s)?.value) };
    let defects = par::map_slice_coarse(s_grid, |&s| -> Result<f64> {
        let a = ratio(s)?;
        let b = ratio(s + period)?;
        Ok((b - a).abs() / a)
    });
    let mut worst = 0.0f64;
    for v in defects {
        worst = worst.max(v?);
    }
    Ok(worst)
}

/// Smallest candidate period whose periodicity defect is below `tol`,
/// together with every candidate's defect.
pub fn measured_min_period(
    d: &dyn Density,
    reference: &dyn Density,
    s_grid: &[f64],
    candidates: &[f64],
    tol: f64,
) -> Result<(Option<f64>, Vec<(f64, f64)>)> {
    let mut out = Vec::with_capacity(candidates.len());
    for &p in candidates {
        out.push((p, moment_ratio_periodicity(d, reference, s_grid, p)?));
    }
    let best = out
        .iter()
        .filter(|(_, v)| *v < tol)
        .map(|(p, _)| *p)
        .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.min(p))));
    Ok((best, out))
}

/// `h(w) = ln f(e^w)` and `ell(w) = h(w) - w`.
#[derive(Debug, Clone)]
pub struct LogDensityTransform<'a> {
    pub density: &'a dyn Density,
    pub params: SymmetryParams,
}

impl LogDensityTransform<'_> {
    pub fn h(&self, w: f64) -> f64 {
        self.density.ln_pdf(w.exp())
    }

    pub fn ell(&self, w: f64) -> f64 {
        self.h(w) - w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogIdentityReport {
    /// `sup |h(w - 2 ln k) - (2w - 2 ln theta - 2 ln k + h(w))|`.
    pub shift: f64,
    /// `sup |h(w) - h(2 ln theta - w)|`.
    pub reflection: f64,
    /// `sup |ell(w - 2 ln k) - ell(2 ln theta - w)|`.
    pub combined: f64,
    /// Points skipped because the density vanished there.
    pub clipped: usize,
}

/// Absolute residuals of the shift, reflection and combined identities of
/// `h` over the supplied `w` values.
pub fn log_identities_report(
    d: &dyn Density,
    params: &SymmetryParams,
    ws: &[f64],
) -> Result<LogIdentityReport> {
    if ws.is_empty() {
        return domain("no w values supplied");
    }
    let t = LogDensityTransform { density: d, params: *params };
    let (lk, lt) = (params.ln_k(), params.theta().ln());
    let rows = par::map_slice(ws, |&w| {
        let h = t.h(w);
        let hs = t.h(w - 2.0 * lk);
        let hr = t.h(2.0 * lt - w);
        if !(h.is_finite() && hs.is_finite() && hr.is_finite()) {
            return None;
        }
        let r20 = (hs - (2.0 * w - 2.0 * lt - 2.0 * lk + h)).abs();
        let r21 = (h - hr).abs();
        let ell_s = hs - (w - 2.0 * lk);
        let ell_r = hr - (2.0 * lt - w);
        Some((r20, r21, (ell_s - ell_r).abs()))
    });
    let clipped = rows.iter().filter(|r| r.is_none()).count();
    if clipped == rows.len() {
        return Err(Error::DegenerateGrid("density vanishes at every w".into()));
    }
    let kept: Vec<_> = rows.into_iter().flatten().collect();
    Ok(LogIdentityReport {
        shift: par::max_of(kept.iter().map(|r| r.0)),
        reflection: par::max_of(kept.iter().map(|r| r.1)),
        combined: par::max_of(kept.iter().map(|r| r.2)),
        clipped,
    })
}

/// Max absolute residual of a least-squares quadratic fit of `hs` on `ws`.
pub fn quadratic_fit_max_residual(ws: &[f64], hs: &[f64]) -> Result<f64> {
    if ws.len() != hs.len() || ws.len() < 3 {
        return domain("quadratic fit needs at least 3 paired points");
    }
    let n = ws.len() as f64;
    let mean = ws.iter().sum::<f64>() / n;
    let half = ws.iter().map(|w| (w - mean).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let ts: Vec<f64> = ws.iter().map(|w| (w - mean) / half).collect();
    let mut a = [[0.0f64; 4]; 3];
    for (&t, &h) in ts.iter().zip(hs) {
        let basis = [1.0, t, t * t];
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += basis[r] * basis[c];
            }
            a[r][3] += basis[r] * h;
        }
    }
    let coef = solve3(a).ok_or_else(|| Error::Numeric("singular quadratic fit".into()))?;
    Ok(ts
        .iter()
        .zip(hs)
        .map(|(&t, &h)| (coef[0] + coef[1] * t + coef[2] * t * t - h).abs())
        .fold(0.0, f64::max))
}

fn solve3(mut a: [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for c in col..4 {
                    a[row][c] -= f * a[col][c];
                }
            }
        }
    }
    Some([a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]])
}

/// Residual threshold for calling a law doubly symmetric in the probe.
pub const PROBE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeEntry {
    pub gamma: f64,
    /// Log-symmetry residual of `Y^gamma` at `delta^gamma`.
    pub log_sym_residual: f64,
    /// Minimized R-symmetry residual of `Y^gamma`.
    pub r_sym_residual: f64,
    pub r_center: f64,
    pub doubly_symmetric: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerProbe {
    pub entries: Vec<ProbeEntry>,
}

impl PowerProbe {
    pub fn all_doubly_symmetric(&self) -> bool {
        self.entries.iter().all(|e| e.doubly_symmetric)
    }
}

/// For each `gamma`, test whether `Y^gamma` is still doubly symmetric:
/// log-symmetry at `delta^gamma` and the best R-symmetry center found by
/// search. A lognormal passes for every `gamma`.
pub fn power_probe(
    d: &DensityModel,
    params: &SymmetryParams,
    gammas: &[f64],
) -> Result<PowerProbe> {
    let base = GridSpec::ratio_default(params.k());
    let log0 = symmetry_residual(d.as_ref(), Relation::LogSym, params.delta(), &base)?.residual;
    let r0 = symmetry_residual(d.as_ref(), Relation::RSym, params.theta(), &base)?.residual;
    if log0 > PROBE_TOL || r0 > PROBE_TOL {
        return domain(format!(
            "input is not doubly symmetric at the given parameters (residuals {log0:e}, {r0:e})"
        ));
    }
    let mut entries = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        if !(gamma > 0.0) {
            return domain(format!("probe powers must be positive, got {gamma}"));
        }
        let t = power_transform(d.clone(), gamma)?;
        let grid = GridSpec::ratio_default(params.k().powf(gamma));
        let dg = params.delta().powf(gamma);
        let log = symmetry_residual(t.as_ref(), Relation::LogSym, dg, &grid)?.residual;
        let lk = params.ln_k();
        let lo = dg * (-(2.0 * gamma * gamma + 2.0 * gamma + 1.0) * lk).exp();
        let hi = dg * lk.exp();
        let best = best_symmetry_center(t.as_ref(), Relation::RSym, (lo, hi), &grid)?;
        entries.push(ProbeEntry {
            gamma,
            log_sym_residual: log,
            r_sym_residual: best.residual,
            r_center: best.center,
            doubly_symmetric: log <= PROBE_TOL && best.residual <= PROBE_TOL,
        });
    }
    Ok(PowerProbe { entries })
}
