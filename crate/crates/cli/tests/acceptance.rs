//! Acceptance gate: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use dsym_core::densities::*;
use dsym_core::moments::*;
use dsym_core::psi::{extend_seed, make_psi_alpha, make_psi_lognormal, PsiFunction, PsiSeed};
use dsym_core::sampling::{ks_critical_1pct, ks_statistic, poly_ds_cdf, poly_ds_sample_exact};
use dsym_core::theta::*;
use dsym_core::*;

type Verdict = std::result::Result<(bool, String), String>;

fn e<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> std::result::Result<T, String> {
    r.map_err(|x| x.to_string())
}

fn ds_pair(d: &dyn Density, p: &SymmetryParams) -> std::result::Result<(f64, f64), String> {
    let g = GridSpec::default_for(p);
    Ok((
        e(symmetry_residual(d, Relation::LogSym, p.delta(), &g))?.residual,
        e(symmetry_residual(d, Relation::RSym, p.theta(), &g))?.residual,
    ))
}

fn lognormal_symmetry() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for (mu, sigma) in [(0.0, 1.0), (1.0, 0.5)] {
        let d = e(make_lognormal(mu, sigma))?;
        let p = e(SymmetryParams::new(f64::exp(mu - sigma * sigma), f64::exp(sigma * sigma)))?;
        let (a, b) = ds_pair(&d, &p)?;
        ok &= a < 1e-12 && b < 1e-12;
        notes.push(format!("({mu},{sigma}): log {a:.1e} r {b:.1e}"));
    }
    Ok((ok, notes.join("; ")))
}

fn constructor() -> Verdict {
    let seeds: Vec<(&str, Box<dyn Fn(f64) -> dsym_core::Result<PsiFunction>>)> = vec![
        ("psi=1", Box::new(|k| extend_seed(PsiSeed::constant(k)?))),
        ("alpha=0.25", Box::new(|k| extend_seed(make_psi_alpha(0.25, k)?))),
        ("alpha=0.75", Box::new(|k| extend_seed(make_psi_alpha(0.75, k)?))),
        ("lognormal", Box::new(make_psi_lognormal)),
    ];
    let (mut worst_sym, mut worst_eval) = (0.0f64, 0.0f64);
    for (_, make) in &seeds {
        for theta in [1.0, 2.0] {
            for k in [1.5, 2.0] {
                let p = e(SymmetryParams::new(theta, k))?;
                let d = e(make_pakes_ds(e(make(k))?, p))?;
                let (a, b) = ds_pair(&d, &p)?;
                worst_sym = worst_sym.max(a).max(b);
                for y in GridSpec::default_for(&p).points() {
                    let (f, w) = (d.pdf(y), d.pdf_via_omega(y));
                    if f > 0.0 {
                        worst_eval = worst_eval.max((f - w).abs() / f);
                    }
                }
            }
        }
    }
    Ok((
        worst_sym < 1e-9 && worst_eval < 1e-12,
        format!("16 constructions: max symmetry residual {worst_sym:.1e}, evaluator gap {worst_eval:.1e}"),
    ))
}

fn closed_form() -> Verdict {
    let c = e(poly_ds_norm_const(2.0))?;
    let q = e(poly_ds_norm_const_quadrature(2.0))?;
    let p = e(SymmetryParams::new(1.0, 2.0))?;
    let d = e(make_poly_ds(p))?;
    let pdf1 = d.pdf(1.0);
    let mut cont = 0.0f64;
    for i in -6..=6 {
        let (l, r) = PolyDsDensity::boundary_exponents(i);
        cont = cont.max((l - r).abs() as f64);
    }
    let m2 = e(moment(&d, 2.0))?.value;
    let ok = (c - 2.355_003_7).abs() < 1e-6
        && (c - q).abs() < 1e-6
        && (pdf1 - 0.424_627_6).abs() < 1e-6
        && cont == 0.0
        && (m2 - 16.0).abs() < 1e-8;
    Ok((
        ok,
        format!("C(2) = {c:.10}, quadrature {q:.10}, pdf(1) = {pdf1:.10}, continuity defect {cont}, E(Y^2) = {m2:.12}"),
    ))
}

fn reconciliation(bin: &Path, dir: &Path) -> Verdict {
    let p = e(SymmetryParams::new(1.0, 2.0))?;
    let pk = e(make_pakes_ds(e(extend_seed(e(PsiSeed::constant(2.0))?))?, p))?;
    let poly = e(make_poly_ds(p))?;
    let diff = GridSpec::default_for(&p)
        .points()
        .iter()
        .map(|&y| (pk.pdf(y) - poly.pdf(y)).abs())
        .fold(0.0, f64::max);
    let out = dir.join("verify_poly.json");
    let status = e(Command::new(bin)
        .args(["verify", "--family", "poly", "--theta", "1", "--k", "2", "--out"])
        .arg(&out)
        .status())?;
    let json: serde_json::Value = e(serde_json::from_str(&e(std::fs::read_to_string(&out))?))?;
    let checks = json["checks"].as_array().cloned().unwrap_or_default();
    let recorded = checks.iter().any(|c| c["name"] == "constant_psi_reconciliation" && c["pass"] == true);
    let all_small = checks.iter().all(|c| c["residual"].as_f64().is_some_and(|r| r < 1e-10));
    Ok((
        diff < 1e-10 && recorded && status.code() == Some(0) && all_small,
        format!(
            "max |pakes(psi=1) - poly| = {diff:.1e}; verify exit {:?}, reconciliation recorded: {recorded}, all residuals < 1e-10: {all_small}",
            status.code()
        ),
    ))
}

fn stieltjes() -> Verdict {
    let sp = e(StieltjesParams::new(0.0, 1.0, 0.5))?;
    let g = GridSpec::ratio_default(std::f64::consts::E);
    let (log, r) = e(stieltjes_cross_residual(sp, &g))?;
    let d = e(make_stieltjes(sp))?;
    let bl = e(best_symmetry_center(&d, Relation::LogSym, (0.1, 10.0), &g))?;
    let br = e(best_symmetry_center(&d, Relation::RSym, (0.02, 5.0), &g))?;
    Ok((
        log.residual < 1e-12 && r.residual < 1e-12 && bl.residual > 5e-3 && br.residual > 5e-3,
        format!(
            "cross {:.1e}/{:.1e}; best centers log {:.3e} r {:.3e}",
            log.residual, r.residual, bl.residual, br.residual
        ),
    ))
}

fn askey_berg() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    let (mut sym, mut lattice) = (0.0f64, 0.0f64);
    for gamma in [0.0, 0.5, 1.0, 1.5] {
        for k in [1.25, 2.0] {
            let d = e(make_askey_berg(gamma, k))?;
            let p = d.ds_params().ok_or("half-integer gamma must be doubly symmetric")?;
            let (a, b) = ds_pair(&d, &p)?;
            sym = sym.max(a).max(b);
            lattice = lattice.max(e(gridpoint_equality_check(gamma, k, -3..=3))?.max_defect());
        }
    }
    ok &= sym < 1e-10 && lattice < 1e-9;
    notes.push(format!("DS residual max {sym:.1e}, lattice defect max {lattice:.1e}"));
    for k in [1.25, 2.0] {
        let g = GridSpec::ratio_default(k);
        let s05 = e(theta_shift_identity_residual(0.5, k, &g))?.residual;
        let s1 = e(theta_shift_identity_residual(1.0, k, &g))?.residual;
        let s03 = e(theta_shift_identity_residual(0.3, k, &g))?.residual;
        ok &= s05 < 1e-13 && s1 < 1e-13 && s03 > 1e-4;
        notes.push(format!("k={k}: shift c=1/2 {s05:.1e}, c=1 {s1:.1e}, c=0.3 {s03:.1e} (need > 1e-4)"));
    }
    let mut gaps = Vec::new();
    for k in [1.25, 2.0, 2.5] {
        let worst = [0.0, 0.5, 1.0, 1.5]
            .iter()
            .map(|&g| askey_berg_lognormal_gap(g, k, &GridSpec::ratio_default(k)))
            .collect::<dsym_core::Result<Vec<f64>>>()
            .map_err(|x| x.to_string())?
            .into_iter()
            .fold(0.0, f64::max);
        ok &= worst < 5e-4;
        gaps.push(format!("k={k}: {worst:.1e}"));
    }
    notes.push(format!("lognormal gaps {}", gaps.join(", ")));
    Ok((ok, notes.join("; ")))
}

fn moment_identities() -> Verdict {
    let s = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let lp = e(SymmetryParams::new((-1f64).exp(), std::f64::consts::E))?;
    let pp = e(SymmetryParams::new(1.0, 2.0))?;
    let ab = e(make_askey_berg(1.0, 2.0))?;
    let abp = ab.ds_params().ok_or("gamma = 1 is doubly symmetric")?;
    let st = e(make_stieltjes(e(StieltjesParams::new(0.0, 1.0, 0.5))?))?;
    let ln = e(make_lognormal(0.0, 1.0))?;
    let poly = e(make_poly_ds(pp))?;
    let cases: [(&str, &dyn Density, SymmetryParams); 4] =
        [("lognormal", &ln, lp), ("poly", &poly, pp), ("askeyberg", &ab, abp), ("stieltjes", &st, lp)];
    let mut worst = 0.0f64;
    for (_, d, p) in cases {
        worst = worst.max(e(moment_recursion_residual(d, &p, &s))?.max_defect());
    }
    let grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let per_poly = e(moment_ratio_periodicity(&poly, &Lognormal::new(LognormalParams::matched(&pp)), &grid, 2.0))?;
    let per_ab = e(moment_ratio_periodicity(&ab, &ab.matched_lognormal(), &grid, 2.0))?;
    Ok((
        worst < 1e-8 && per_poly < 1e-7 && per_ab < 1e-7,
        format!("recursion max {worst:.1e}; period-2 defects poly {per_poly:.1e}, askeyberg {per_ab:.1e}"),
    ))
}

fn log_identities() -> Verdict {
    let lp = e(SymmetryParams::new((-1f64).exp(), std::f64::consts::E))?;
    let pp = e(SymmetryParams::new(1.0, 2.0))?;
    let ln = e(make_lognormal(0.0, 1.0))?;
    let poly = e(make_poly_ds(pp))?;
    let window = |p: &SymmetryParams| -> Vec<f64> {
        let (c, l) = (p.theta().ln(), p.ln_k());
        (0..=1200).map(|j| c - 6.0 * l + 12.0 * l * j as f64 / 1200.0).collect()
    };
    let a = e(log_identities_report(&ln, &lp, &window(&lp)))?;
    let b = e(log_identities_report(&poly, &pp, &window(&pp)))?;
    let ws = window(&lp);
    let hs: Vec<f64> = ws.iter().map(|&w| ln.ln_pdf(w.exp())).collect();
    let fit = e(quadratic_fit_max_residual(&ws, &hs))?;
    let worst = [a.shift, a.reflection, a.combined, b.shift, b.reflection, b.combined]
        .into_iter()
        .fold(0.0, f64::max);
    Ok((worst < 1e-10 && fit < 1e-10, format!("identity residual max {worst:.1e}; quadratic fit {fit:.1e}")))
}

fn power_transform_probe() -> Verdict {
    let ln: DensityModel = Arc::new(e(make_lognormal(0.0, 1.0))?);
    let lp = e(SymmetryParams::new((-1f64).exp(), std::f64::consts::E))?;
    let a = e(power_probe(&ln, &lp, &[1.0 / 3.0, 0.5, 2.0]))?;
    let ln_worst = a
        .entries
        .iter()
        .map(|x| x.log_sym_residual.max(x.r_sym_residual))
        .fold(0.0, f64::max);
    let pp = e(SymmetryParams::new(1.0, 2.0))?;
    let poly: DensityModel = Arc::new(e(make_poly_ds(pp))?);
    let b = e(power_probe(&poly, &pp, &[0.5]))?;
    let h = &b.entries[0];
    Ok((
        ln_worst < 1e-8 && h.log_sym_residual < 1e-8 && h.r_sym_residual >= 100.0 * PROBE_TOL,
        format!(
            "lognormal max {ln_worst:.1e}; poly gamma=1/2 log {:.1e}, min r_sym {:.4e} at {:.6}",
            h.log_sym_residual, h.r_sym_residual, h.r_center
        ),
    ))
}

fn sampling() -> Verdict {
    let p = e(SymmetryParams::new(1.0, 2.0))?;
    let n = 100_000;
    let b = e(poly_ds_sample_exact(p, n, 7))?;
    let cdf = e(poly_ds_cdf(p))?;
    let d = e(ks_statistic(&b, &cdf))?;
    let med = b.median().ok_or("empty")?;
    let m2 = b.moment(2.0).ok_or("empty")?;
    Ok((
        d < ks_critical_1pct(n) && (med / 2.0 - 1.0).abs() < 0.01 && (m2 / 16.0 - 1.0).abs() < 0.03,
        format!("seed 7: KS {d:.5} (critical {:.5}), median {med:.5}, E(Y^2) {m2:.4}", ks_critical_1pct(n)),
    ))
}

fn read_csv(path: &Path) -> std::result::Result<Vec<[f64; 3]>, String> {
    let text = e(std::fs::read_to_string(path))?;
    let mut lines = text.lines();
    if lines.next() != Some("y,pdf_poly,pdf_lognormal") {
        return Err("unexpected header".into());
    }
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|x| x.to_string())?;
            if v.len() != 3 {
                return Err(format!("bad row {l}"));
            }
            Ok([v[0], v[1], v[2]])
        })
        .collect()
}

fn trapezoid(rows: &[[f64; 3]], col: usize) -> f64 {
    rows.windows(2).map(|w| 0.5 * (w[1][0] - w[0][0]) * (w[0][col] + w[1][col])).sum()
}

fn argmax(rows: &[[f64; 3]], col: usize) -> usize {
    (0..rows.len()).max_by(|&a, &b| rows[a][col].total_cmp(&rows[b][col])).unwrap()
}

fn slope(rows: &[[f64; 3]], j: usize) -> f64 {
    (rows[j + 1][1] - rows[j][1]) / (rows[j + 1][0] - rows[j][0])
}

/// Slope change across each visible piece boundary against the change of
/// slope one step away on either side.
fn kink_ratio(rows: &[[f64; 3]], b: f64) -> Option<f64> {
    let j = rows.partition_point(|r| r[0] < b);
    if j < 3 || j + 3 >= rows.len() {
        return None;
    }
    // rows[j-1] < b <= rows[j]
    let left = slope(rows, j - 2);
    let right = slope(rows, j);
    let within = (slope(rows, j - 3) - left).abs().max((slope(rows, j + 1) - right).abs());
    Some((right - left).abs() / within.max(f64::MIN_POSITIVE))
}

fn figures(bin: &Path, dir: &Path) -> Verdict {
    let sets = [
        (1.0, 1.1),
        (1.0, 1.25),
        (1.0, 1.5),
        (1.0, 2.5),
        (0.1, 1.75),
        (0.5, 1.75),
        (1.0, 1.75),
        (2.0, 1.75),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (i, (theta, k)) in sets.into_iter().enumerate() {
        let out = dir.join(format!("fig_{i}.csv"));
        let status = e(Command::new(bin)
            .args(["compare", "--theta", &theta.to_string(), "--k", &k.to_string(), "--out"])
            .arg(&out)
            .status())?;
        if !status.success() {
            return Ok((false, format!("compare exited with {status}")));
        }
        let rows = read_csv(&out)?;
        let p = e(SymmetryParams::new(theta, k))?;
        let poly = e(make_poly_ds(p))?;
        let ln = Lognormal::new(LognormalParams::matched(&p));
        let (lo, hi) = (rows[0][0], rows[rows.len() - 1][0]);
        let nonneg = rows.iter().all(|r| r[1] >= 0.0 && r[2] >= 0.0);
        let mass_p = poly.cdf(hi).unwrap() - poly.cdf(lo).unwrap();
        let mass_l = ln.cdf(hi).unwrap() - ln.cdf(lo).unwrap();
        let err_p = (trapezoid(&rows, 1) / mass_p - 1.0).abs();
        let err_l = (trapezoid(&rows, 2) / mass_l - 1.0).abs();
        let step = (rows[1][0] / rows[0][0]).ln();
        let mode_p = (rows[argmax(&rows, 1)][0] / theta).ln().abs();
        let mode_l = (rows[argmax(&rows, 2)][0] / theta).ln().abs();
        let peak = rows[argmax(&rows, 1)][1];
        let mut min_kink = f64::INFINITY;
        for m in -20i64..=20 {
            let b = p.boundary(2 * m);
            if b <= lo || b >= hi || poly.pdf(b) < 1e-3 * peak {
                continue;
            }
            if let Some(r) = kink_ratio(&rows, b) {
                min_kink = min_kink.min(r);
            }
        }
        let this = nonneg
            && err_p < 0.02
            && err_l < 0.02
            && mode_p <= step
            && mode_l <= step
            && min_kink.is_finite()
            && min_kink > 10.0;
        ok &= this;
        notes.push(format!(
            "(theta {theta}, k {k}) mass err {err_p:.1e}/{err_l:.1e} kink ratio min {min_kink:.0}{}",
            if this { "" } else { " FAILED" }
        ));
    }
    Ok((ok, notes.join("; ")))
}

fn main() {
    let bin = Path::new(env!("CARGO_BIN_EXE_dsym"));
    let tmp = tempfile::tempdir().expect("temp dir");
    let dir = tmp.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        ("lognormal double symmetry", Box::new(lognormal_symmetry)),
        ("general construction", Box::new(constructor)),
        ("closed-form polynomial law", Box::new(closed_form)),
        ("constant-seed reconciliation", Box::new(|| reconciliation(bin, dir))),
        ("stieltjes non-membership", Box::new(stieltjes)),
        ("askey-berg theta-series law", Box::new(askey_berg)),
        ("moment identities", Box::new(moment_identities)),
        ("log-density identities", Box::new(log_identities)),
        ("power-transform probe", Box::new(power_transform_probe)),
        ("sampling", Box::new(sampling)),
        ("figure data", Box::new(|| figures(bin, dir))),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = match f() {
            Ok(v) => v,
            Err(msg) => (false, format!("error: {msg}")),
        };
        if !pass {
            failed += 1;
        }
        println!("criterion {:>2} {:<30} {}  {detail}", i + 1, name, if pass { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
