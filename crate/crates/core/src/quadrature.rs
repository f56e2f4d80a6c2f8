//! Adaptive Gauss-Kronrod quadrature and log-coordinate integration windows.

use crate::error::{Error, Result};
use crate::par;

// 21-point Kronrod abscissae and weights with the embedded 10-point Gauss rule.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_168_806,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
}

/// One application of the 21-point Kronrod rule on `[a, b]`.
/// Returns the Kronrod estimate and `|K - G|` as the error estimate.
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> QuadResult {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    let mut err = (kronrod - gauss).abs();
    let floor = 50.0 * f64::EPSILON * kronrod.abs();
    if err < floor {
        err = floor;
    }
    QuadResult { value: kronrod, abs_err: err }
}

const REL_FLOOR: f64 = 100.0 * f64::EPSILON;

/// Globally adaptive bisection: the interval with the largest error estimate
/// is split until `err <= max(abs_tol, rel_tol * |value|)`. Relative
/// tolerances below `100 eps` are raised to it, the floor of the rule's own
/// error estimate.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Numeric(format!("non-finite interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, abs_err: 0.0 });
    }
    let first = gk21(f, a, b);
    let mut intervals = vec![(a, b, first)];
    let mut total = first.value;
    let mut err = first.abs_err;
    loop {
        if !total.is_finite() {
            return Err(Error::Numeric(format!(
                "integrand produced non-finite value on [{a}, {b}]"
            )));
        }
        let target = abs_tol.max(rel_tol.max(REL_FLOOR) * total.abs());
        if err <= target {
            break;
        }
        if intervals.len() >= MAX_INTERVALS {
            // Accept if the remaining error is at rounding level.
            if err <= 1e3 * f64::EPSILON * total.abs() {
                break;
            }
            return Err(Error::Numeric(format!(
                "adaptive quadrature on [{a}, {b}] stalled: value {total:e}, error {err:e}, target {target:e}"
            )));
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.abs_err.total_cmp(&y.1 .2.abs_err))
            .expect("non-empty");
        let (lo, hi, old) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval at machine resolution; nothing more to gain.
            intervals.push((lo, hi, QuadResult { value: old.value, abs_err: 0.0 }));
            err -= old.abs_err;
            continue;
        }
        let left = gk21(f, lo, mid);
        let right = gk21(f, mid, hi);
        total += left.value + right.value - old.value;
        err += left.abs_err + right.abs_err - old.abs_err;
        intervals.push((lo, mid, left));
        intervals.push((mid, hi, right));
    }
    // Re-sum to shed drift from incremental updates.
    intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
    let value = intervals.iter().map(|t| t.2.value).sum();
    let abs_err = intervals.iter().map(|t| t.2.abs_err).sum();
    Ok(QuadResult { value, abs_err })
}

/// Integrate over consecutive segments `[breaks[j], breaks[j+1]]` to a
/// relative tolerance on the total. Segments are processed in parallel and
/// summed in order.
pub fn integrate_segments<F>(f: &F, breaks: &[f64], rel_tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    if breaks.len() < 2 {
        return Ok(QuadResult { value: 0.0, abs_err: 0.0 });
    }
    let segs: Vec<(f64, f64)> = breaks.windows(2).map(|w| (w[0], w[1])).collect();
    let coarse = par::map_slice_coarse(&segs, |&(a, b)| gk21(f, a, b));
    let scale: f64 = coarse.iter().map(|q| q.value.abs()).sum();
    if !scale.is_finite() {
        return Err(Error::Numeric("integrand is not finite on the window".into()));
    }
    let per_seg = rel_tol * scale / segs.len() as f64;
    let refined = par::map_slice_coarse(&segs, |&(a, b)| adaptive(f, a, b, per_seg, 0.0));
    let mut value = 0.0;
    let mut abs_err = 0.0;
    for r in refined {
        let r = r?;
        value += r.value;
        abs_err += r.abs_err;
    }
    Ok(QuadResult { value, abs_err })
}

/// Range in `w` outside which a log-integrand has dropped by `ln_drop` from
/// its peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogWindow {
    pub lo: f64,
    pub hi: f64,
    pub w_peak: f64,
    pub ln_peak: f64,
}

/// ln(1e18): integrand values below `peak * 1e-18` are treated as negligible.
pub const LN_DROP_1E18: f64 = 41.446_531_673_892_82;

const SCAN_HALF_STEPS: i64 = 800;

/// Locate the peak of `ln_f` by a coarse scan around `center` with step
/// `scale / 4`, then walk outward until two consecutive samples fall
/// `ln_drop` below the peak.
pub fn find_log_window<F>(ln_f: &F, center: f64, scale: f64, ln_drop: f64) -> Result<LogWindow>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(center.is_finite() && scale.is_finite() && scale > 0.0) {
        return Err(Error::Numeric(format!(
            "bad window hint: center {center}, scale {scale}"
        )));
    }
    let step = 0.25 * scale;
    let n = (2 * SCAN_HALF_STEPS + 1) as usize;
    let at = |j: usize| center + (j as i64 - SCAN_HALF_STEPS) as f64 * step;
    let vals = par::map_range(n, |j| ln_f(at(j)));
    let (peak_idx, ln_peak) = vals
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .fold((usize::MAX, f64::NEG_INFINITY), |acc, (j, v)| {
            if v > acc.1 {
                (j, v)
            } else {
                acc
            }
        });
    if peak_idx == usize::MAX {
        return Err(Error::Numeric(format!(
            "integrand vanishes on the scan [{}, {}]",
            at(0),
            at(n - 1)
        )));
    }
    let threshold = ln_peak - ln_drop;
    let below = |v: f64| !(v >= threshold);
    let mut hi_idx = None;
    for j in peak_idx + 1..n - 1 {
        if below(vals[j]) && below(vals[j + 1]) {
            hi_idx = Some(j + 1);
            break;
        }
    }
    let mut lo_idx = None;
    for j in (1..peak_idx).rev() {
        if below(vals[j]) && below(vals[j - 1]) {
            lo_idx = Some(j - 1);
            break;
        }
    }
    match (lo_idx, hi_idx) {
        (Some(l), Some(h)) => Ok(LogWindow {
            lo: at(l),
            hi: at(h),
            w_peak: at(peak_idx),
            ln_peak,
        }),
        _ => Err(Error::Numeric(format!(
            "integrand does not decay by {ln_drop:.1} nats within w in [{}, {}] (peak {ln_peak:e} at w = {})",
            at(0),
            at(n - 1),
            at(peak_idx)
        ))),
    }
}

/// Result of integrating `exp(ln_f(w))` over the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogIntegral {
    pub value: f64,
    pub rel_err: f64,
    pub window: LogWindow,
}

/// Number of uniform segments the window is cut into before breakpoints are
/// merged in.
const WINDOW_SEGMENTS: usize = 32;

/// Integrate `exp(ln_f(w))` over `w` in R. The window is taken from the
/// integrand's own peak; `breakpoints` supplies kinks inside a window so
/// every segment is smooth.
pub fn integrate_log_domain<F, B>(
    ln_f: &F,
    center: f64,
    scale: f64,
    breakpoints: B,
    rel_tol: f64,
) -> Result<LogIntegral>
where
    F: Fn(f64) -> f64 + Sync,
    B: Fn(f64, f64) -> Vec<f64>,
{
    let window = find_log_window(ln_f, center, scale, LN_DROP_1E18)?;
    let mut breaks = uniform_breaks(window.lo, window.hi, WINDOW_SEGMENTS);
    breaks.extend(breakpoints(window.lo, window.hi));
    normalize_breaks(&mut breaks, window.lo, window.hi);
    let ln_ref = window.ln_peak;
    let scaled = |w: f64| {
        let v = ln_f(w) - ln_ref;
        if v.is_nan() {
            0.0
        } else {
            v.exp()
        }
    };
    let q = integrate_segments(&scaled, &breaks, rel_tol)?;
    let value = q.value * ln_ref.exp();
    let rel_err = if q.value != 0.0 { q.abs_err / q.value.abs() } else { f64::INFINITY };
    Ok(LogIntegral { value, rel_err, window })
}

pub(crate) fn uniform_breaks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|j| lo + (hi - lo) * j as f64 / n as f64).collect()
}

/// Sort, clip to `[lo, hi]` and drop duplicates.
pub(crate) fn normalize_breaks(breaks: &mut Vec<f64>, lo: f64, hi: f64) {
    breaks.retain(|b| b.is_finite() && *b >= lo && *b <= hi);
    breaks.push(lo);
    breaks.push(hi);
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
}
