//! The verification battery behind `dsym verify`.

use std::collections::BTreeMap;

use anyhow::Result;
use dsym_core::densities::{
    make_pakes_ds, make_poly_ds, poly_ds_norm_const, poly_ds_norm_const_quadrature, PolyDsDensity,
    StieltjesParams, stieltjes_cross_residual,
};
use dsym_core::moments::{
    log_identities_report, moment, moment_ratio_periodicity, moment_recursion_residual,
    quadratic_fit_max_residual,
};
use dsym_core::psi::{
    extend_seed, make_psi_alpha, psi_reflection_residual, smoothness_report, unimodality_check,
    PsiSeed,
};
use dsym_core::theta::{
    askey_berg_lognormal_gap, gridpoint_equality_check, theta_shift_identity_residual,
};
use dsym_core::{
    best_symmetry_center, ds_chain_residual, symmetry_residual, Density, DensityModel, GridSpec,
    Relation, SymmetryParams,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::family::{matched_lognormal, FamilyArgs, FamilyKind, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// Residual must not exceed the tolerance.
    Upper,
    /// Residual must exceed the tolerance.
    Lower,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub bound: Bound,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub info: BTreeMap<String, Value>,
    pub timestamp: u64,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

struct Battery {
    scale: f64,
    checks: Vec<Check>,
    info: BTreeMap<String, Value>,
}

impl Battery {
    fn upper(&mut self, name: &str, residual: f64, tolerance: f64) {
        let tolerance = tolerance * self.scale;
        self.checks.push(Check {
            name: name.to_string(),
            residual,
            tolerance,
            pass: residual <= tolerance,
            bound: Bound::Upper,
        });
    }

    fn lower(&mut self, name: &str, residual: f64, tolerance: f64) {
        let tolerance = tolerance * self.scale;
        self.checks.push(Check {
            name: name.to_string(),
            residual,
            tolerance,
            pass: residual > tolerance,
            bound: Bound::Lower,
        });
    }

    fn note(&mut self, key: &str, v: Value) {
        self.info.insert(key.to_string(), v);
    }

    /// Symmetries, chain, moments and log-density identities of a doubly
    /// symmetric law.
    fn doubly_symmetric(&mut self, d: &DensityModel, p: &SymmetryParams, sym_tol: f64) -> Result<()> {
        let grid = GridSpec::default_for(p);
        let log = symmetry_residual(d.as_ref(), Relation::LogSym, p.delta(), &grid)?;
        let r = symmetry_residual(d.as_ref(), Relation::RSym, p.theta(), &grid)?;
        self.upper("log_sym", log.residual, sym_tol);
        self.upper("r_sym", r.residual, sym_tol);
        for level in [Relation::ChainY, Relation::ChainX, Relation::ChainZ] {
            let c = ds_chain_residual(d, p, level, &grid)?;
            self.upper(&level.to_string(), c.report.residual, sym_tol);
            if let Some(m) = c.moment_defect {
                self.upper(&format!("{level}_moment"), m, 1e-8);
            }
        }
        self.upper("total_mass", (moment(d.as_ref(), 0.0)?.value - 1.0).abs(), 1e-10);
        let rec = moment_recursion_residual(d.as_ref(), p, &[-2.0, -1.0, 0.0, 1.0, 2.0])?;
        self.upper("moment_recursion", rec.max_defect(), 1e-8);
        let reference = matched_lognormal(p);
        let per = moment_ratio_periodicity(d.as_ref(), &reference, &[-1.0, -0.5, 0.0, 0.5, 1.0], 2.0)?;
        self.upper("moment_ratio_period_2", per, 1e-7);
        let (lt, lk) = (p.theta().ln(), p.ln_k());
        let ws: Vec<f64> = (0..=1200).map(|j| lt - 6.0 * lk + 12.0 * lk * j as f64 / 1200.0).collect();
        let ids = log_identities_report(d.as_ref(), p, &ws)?;
        self.upper("log_shift", ids.shift, 1e-10);
        self.upper("log_reflection", ids.reflection, 1e-10);
        self.upper("log_combined", ids.combined, 1e-10);
        Ok(())
    }
}

fn sup_rel_diff(a: &dyn Density, b: &dyn Density, grid: &GridSpec) -> f64 {
    let ys = grid.points();
    let sup = ys.iter().map(|&y| b.pdf(y)).fold(0.0, f64::max);
    ys.iter().map(|&y| (a.pdf(y) - b.pdf(y)).abs()).fold(0.0, f64::max) / sup
}

pub fn run(args: &FamilyArgs, model: &Model, scale: f64) -> Result<Report> {
    let mut b = Battery { scale, checks: Vec::new(), info: BTreeMap::new() };
    let d = &model.density;
    match model.kind {
        FamilyKind::Lognormal => {
            let p = model.ds.expect("lognormal is doubly symmetric");
            b.doubly_symmetric(d, &p, 1e-12)?;
            let ws: Vec<f64> = (0..=600).map(|j| p.delta().ln() - 6.0 + 12.0 * j as f64 / 600.0).collect();
            let hs: Vec<f64> = ws.iter().map(|&w| d.ln_pdf(w.exp())).collect();
            b.upper("log_density_quadratic", quadratic_fit_max_residual(&ws, &hs)?, 1e-10);
        }
        FamilyKind::Poly => {
            let p = model.ds.expect("poly is doubly symmetric");
            b.doubly_symmetric(d, &p, 1e-10)?;
            let c = poly_ds_norm_const(p.k())?;
            let q = poly_ds_norm_const_quadrature(p.k())?;
            b.upper("norm_const_cross_check", (c - q).abs() / c, 1e-12);
            b.note("norm_const", json!(c));
            let worst = (-6..=6)
                .map(|i| {
                    let (l, r) = PolyDsDensity::boundary_exponents(i);
                    (l - r).abs() as f64
                })
                .fold(0.0, f64::max);
            b.upper("continuity_exponents", worst, 0.0);
            let m2 = moment(d.as_ref(), 2.0)?.value;
            let want = (p.theta() * p.k() * p.k()).powi(2);
            b.upper("second_moment", (m2 - want).abs() / want, 1e-8);
            let ones = extend_seed(PsiSeed::constant(p.k())?)?;
            let pk = make_pakes_ds(ones, p)?;
            let poly = make_poly_ds(p)?;
            b.upper("constant_psi_reconciliation", sup_rel_diff(&pk, &poly, &GridSpec::default_for(&p)), 1e-10);
            b.note(
                "constant_psi_reconciliation",
                json!("the closed-form law is the general construction with psi identically 1 (alpha = 1/2); alpha = 0 gives even powers"),
            );
        }
        FamilyKind::PakesAlpha => {
            let p = model.ds.expect("constructed laws are doubly symmetric");
            let alpha = args.alpha.unwrap_or(0.5);
            let psi = extend_seed(make_psi_alpha(alpha, p.k())?)?;
            b.upper("psi_reflection", psi_reflection_residual(&psi, 4097)?, 1e-10);
            b.doubly_symmetric(d, &p, 1e-9)?;
            let pk = make_pakes_ds(psi.clone(), p)?;
            let grid = GridSpec::default_for(&p);
            let agree = grid
                .points()
                .iter()
                .map(|&y| {
                    let (a, w) = (pk.pdf(y), pk.pdf_via_omega(y));
                    if a > 0.0 { (a - w).abs() / a } else { w.abs() }
                })
                .fold(0.0, f64::max);
            b.upper("evaluator_agreement", agree, 1e-12);
            let s = smoothness_report(&psi)?;
            b.note(
                "smoothness",
                json!({
                    "continuous": s.continuous,
                    "midpoint_smooth": s.midpoint_smooth,
                    "endpoint_smooth": s.endpoint_smooth,
                    "continuity_defect": s.continuity_defect,
                    "midpoint_defect": s.midpoint_defect,
                    "endpoint_defect": s.endpoint_defect,
                }),
            );
            let u = unimodality_check(&psi);
            b.note(
                "unimodality",
                json!({ "unimodal": u.unimodal, "method": u.method, "min_margin": u.min_margin }),
            );
        }
        FamilyKind::Askeyberg => {
            let gamma = args.gamma.unwrap_or(1.0);
            let k = args.k.unwrap_or(2.0);
            b.upper("total_mass", (moment(d.as_ref(), 0.0)?.value - 1.0).abs(), 1e-10);
            let gap = askey_berg_lognormal_gap(gamma, k, &GridSpec::ratio_default(k))?;
            if k <= 2.5 {
                b.upper("lognormal_gap", gap, 5e-4);
            }
            b.note("lognormal_gap", json!(gap));
            if let Some(p) = model.ds {
                b.doubly_symmetric(d, &p, 1e-10)?;
                let grid = GridSpec::ratio_default(k);
                for c in [0.5, 1.0] {
                    let r = theta_shift_identity_residual(c, k, &grid)?;
                    b.upper(&format!("theta_shift_c{c}"), r.residual, 1e-13);
                }
                let g = gridpoint_equality_check(gamma, k, -3..=3)?;
                b.upper("lattice_equality", g.max_defect(), 1e-9);
            } else {
                b.note("doubly_symmetric", json!(format!("not claimed: gamma = {gamma} is not a multiple of 1/2")));
            }
        }
        FamilyKind::Stieltjes => {
            let sp = StieltjesParams::new(
                args.mu.unwrap_or(0.0),
                args.sigma.unwrap_or(1.0),
                args.eps.unwrap_or(0.5),
            )?;
            let p = model.location;
            let grid = GridSpec::default_for(&p);
            let (log, r) = stieltjes_cross_residual(sp, &grid)?;
            b.upper("cross_log_sym", log.residual, 1e-12);
            b.upper("cross_r_sym", r.residual, 1e-12);
            b.upper("total_mass", (moment(d.as_ref(), 0.0)?.value - 1.0).abs(), 1e-10);
            let rec = moment_recursion_residual(d.as_ref(), &p, &[-2.0, -1.0, 0.0, 1.0, 2.0])?;
            b.upper("moment_recursion", rec.max_defect(), 1e-8);
            if sp.eps != 0.0 {
                let span = (2.0 * p.ln_k()).max(1.0).exp();
                let bl = best_symmetry_center(d.as_ref(), Relation::LogSym, (p.delta() / span, p.delta() * span), &grid)?;
                let br = best_symmetry_center(d.as_ref(), Relation::RSym, (p.theta() / span, p.theta() * span), &grid)?;
                b.lower("best_log_sym", bl.residual, 5e-3);
                b.lower("best_r_sym", br.residual, 5e-3);
                b.note("best_centers", json!({ "log_sym": bl.center, "r_sym": br.center }));
            }
        }
    }
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|t| t.as_secs())
        .unwrap_or(0);
    Ok(Report {
        family: model.kind.name().to_string(),
        params: model.params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        checks: b.checks,
        info: b.info,
        timestamp,
    })
}

