use dsym_core::densities::*;
use dsym_core::sampling::*;
use dsym_core::theta::make_askey_berg;
use dsym_core::{grid_index, Density, SymmetryParams};

fn p12() -> SymmetryParams {
    SymmetryParams::new(1.0, 2.0).unwrap()
}

fn log_mean_and_sd(b: &SampleBatch) -> (f64, f64) {
    let n = b.len() as f64;
    let m = b.values.iter().map(|y| y.ln()).sum::<f64>() / n;
    let v = b.values.iter().map(|y| (y.ln() - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

/// Draws from each law with its median and mode.
fn batches() -> Vec<(SampleBatch, f64, SymmetryParams)> {
    let ab = make_askey_berg(0.5, 2.0).unwrap();
    let abp = ab.ds_params().unwrap();
    let lp = SymmetryParams::new((-0.25f64).exp(), 0.25f64.exp()).unwrap();
    vec![
        (poly_ds_sample_exact(p12(), 100_000, 17).unwrap(), 2.0, p12()),
        (sample(&make_poly_ds(p12()).unwrap(), 100_000, 18).unwrap(), 2.0, p12()),
        (sample(&make_lognormal(0.0, 0.5).unwrap(), 100_000, 19).unwrap(), 1.0, lp),
        (sample(&ab, 100_000, 20).unwrap(), abp.delta(), abp),
    ]
}

#[test]
fn log_samples_are_symmetric_about_the_median() {
    for (b, delta, _) in batches() {
        let (m, sd) = log_mean_and_sd(&b);
        let n = b.len() as f64;
        assert!((m - delta.ln()).abs() < 3.0 * sd / n.sqrt(), "{:?}: {m} vs {}", b.family, delta.ln());
        let med = b.median().unwrap();
        assert!((med / delta - 1.0).abs() < 0.01, "{:?}: median {med}", b.family);
    }
}

#[test]
fn empirical_mode_is_at_theta() {
    for (b, _, p) in batches() {
        // Bins in y of width theta / 10, one edge at theta.
        let width = 0.1 * p.theta();
        let mut counts = std::collections::BTreeMap::<i64, usize>::new();
        for y in &b.values {
            *counts.entry(((y - p.theta()) / width).floor() as i64).or_default() += 1;
        }
        let (bin, _) = counts.iter().max_by_key(|e| *e.1).unwrap();
        let centre = p.theta() + (*bin as f64 + 0.5) * width;
        assert!((centre - p.theta()).abs() < 1.5 * width, "{:?}: mode bin at {centre}", b.family);
        let piece = grid_index(centre, &p).unwrap().0;
        assert!(piece == 0 || piece == 1);
    }
}

#[test]
fn exact_sampler_matches_closed_form() {
    let b = poly_ds_sample_exact(p12(), 100_000, 7).unwrap();
    let cdf = poly_ds_cdf(p12()).unwrap();
    assert!(ks_statistic(&b, &cdf).unwrap() < 0.0061);
    assert!(ks_statistic(&b, &cdf).unwrap() < ks_critical_1pct(b.len()));
    let m2 = b.moment(2.0).unwrap();
    assert!((m2 / 16.0 - 1.0).abs() < 0.03, "{m2}");
}

#[test]
fn exact_sampler_other_parameters() {
    for (theta, k, seed) in [(0.1, 1.75, 3u64), (2.0, 1.1, 4), (1.0, 2.5, 5)] {
        let p = SymmetryParams::new(theta, k).unwrap();
        let b = poly_ds_sample_exact(p, 50_000, seed).unwrap();
        let cdf = poly_ds_cdf(p).unwrap();
        let d = ks_statistic(&b, &cdf).unwrap();
        assert!(d < ks_critical_1pct(b.len()), "theta {theta} k {k}: {d}");
    }
}

#[test]
fn tabulated_and_exact_samplers_agree() {
    let a = poly_ds_sample_exact(p12(), 100_000, 1234).unwrap();
    let b = sample(&make_poly_ds(p12()).unwrap(), 100_000, 4321).unwrap();
    let d = ks_two_sample(&a, &b).unwrap();
    assert!(d < ks_two_sample_critical_1pct(a.len(), b.len()), "{d}");
}

#[test]
fn cdf_tables_for_every_family() {
    let st = make_stieltjes(StieltjesParams::new(0.0, 1.0, 0.5).unwrap()).unwrap();
    let ab = make_askey_berg(1.5, 1.25).unwrap();
    let ln = make_lognormal(1.0, 0.5).unwrap();
    let poly = make_poly_ds(SymmetryParams::new(0.1, 1.75).unwrap()).unwrap();
    let fams: [&dyn Density; 4] = [&st, &ab, &ln, &poly];
    for d in fams {
        let t = build_cdf(d, DEFAULT_RESOLUTION).unwrap();
        assert!(t.max_interp_error < 1e-8, "{}: {}", d.family(), t.max_interp_error);
        let knots: Vec<(f64, f64)> = t.knots().collect();
        assert_eq!(knots.first().unwrap().1, 0.0);
        assert_eq!(knots.last().unwrap().1, 1.0);
        assert!(knots.windows(2).all(|w| w[1].1 >= w[0].1));
        if let Some(exact) = d.cdf(knots[knots.len() / 3].0) {
            assert!((exact - knots[knots.len() / 3].1).abs() < 1e-9, "{}", d.family());
        }
    }
    let ab1 = make_askey_berg(1.0, 2.0).unwrap();
    let t = build_cdf(&ab1, DEFAULT_RESOLUTION).unwrap();
    assert!((t.cdf(2.0) - 0.5).abs() < 1e-9);
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let d = make_stieltjes(StieltjesParams::new(0.0, 1.0, 0.3).unwrap()).unwrap();
    let a = sample(&d, 10_000, 99).unwrap();
    let b = sample(&d, 10_000, 99).unwrap();
    let c = sample(&d, 10_000, 100).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.values, c.values);
    // A prefix of a longer batch is the shorter batch.
    let long = sample(&d, 20_000, 99).unwrap();
    assert_eq!(&long.values[..10_000], &a.values[..]);
    assert!(sample(&d, 0, 1).is_err());
}
