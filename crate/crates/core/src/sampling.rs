//! Inverse-CDF sampling. A tabulated monotone CDF serves every family; the
//! closed-form polynomial law also has an exact piecewise sampler.
//!
//! Uniforms come from ChaCha20 seeded with `seed_from_u64(seed)`. Draws are
//! produced in chunks of [`CHUNK`], chunk `c` using stream `c`, so batches
//! are identical regardless of thread count.

use rand::distr::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::densities::{outward, PolyDsDensity, PIECE_NEGLIGIBLE};
use crate::density::{Density, Family};
use crate::error::{domain, Error, Result};
use crate::par;
use crate::params::SymmetryParams;
use crate::quadrature::{adaptive, find_log_window, gk21, normalize_breaks, LN_DROP_1E18};

pub const DEFAULT_RESOLUTION: usize = 4096;
pub const CHUNK: usize = 4096;

/// `c(alpha)` for the asymptotic 1% Kolmogorov critical value `c / sqrt(n)`.
pub const KS_C_1PCT: f64 = 1.628;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailInfo {
    /// Density of `ln Y` at each window end relative to its peak.
    pub lower_rel_density: f64,
    pub upper_rel_density: f64,
}

/// Cumulative distribution on knots in `w = ln y` with monotone cubic
/// Hermite interpolation between them.
#[derive(Debug, Clone)]
pub struct CdfTable {
    w: Vec<f64>,
    f: Vec<f64>,
    slope: Vec<f64>,
    pub tails: TailInfo,
    /// Largest deviation of the interpolant from direct quadrature at cell
    /// midpoints.
    pub max_interp_error: f64,
    pub family: Family,
}

pub fn build_cdf(d: &dyn Density, resolution: usize) -> Result<CdfTable> {
    if resolution < 16 {
        return domain(format!("resolution must be at least 16, got {resolution}"));
    }
    let (c, scale) = d.log_location();
    let ln_g = |w: f64| d.ln_pdf(w.exp()) + w;
    let win = find_log_window(&ln_g, c, scale, LN_DROP_1E18)
        .map_err(|e| Error::Numeric(format!("cdf window for {}: {e}", d.family())))?;
    let g = |w: f64| {
        let v = ln_g(w) - win.ln_peak;
        if v.is_nan() {
            0.0
        } else {
            v.exp()
        }
    };
    let mut w = crate::quadrature::uniform_breaks(win.lo, win.hi, resolution);
    w.extend(d.log_breakpoints(win.lo, win.hi));
    normalize_breaks(&mut w, win.lo, win.hi);

    let cells = par::map_range(w.len() - 1, |j| {
        adaptive(&g, w[j], w[j + 1], 1e-19, 1e-14).map(|q| q.value)
    });
    let mut f = Vec::with_capacity(w.len());
    f.push(0.0);
    let mut acc = 0.0;
    for c in cells {
        acc += c?;
        f.push(acc);
    }
    if !(acc > 0.0 && acc.is_finite()) {
        return Err(Error::Numeric(format!("cdf total for {} is {acc}", d.family())));
    }
    for v in f.iter_mut() {
        *v /= acc;
    }
    *f.last_mut().expect("nonempty") = 1.0;
    let mut slope: Vec<f64> = par::map_slice(&w, |&x| g(x) / acc);
    limit_slopes(&w, &f, &mut slope);

    let mut table = CdfTable {
        tails: TailInfo {
            lower_rel_density: g(win.lo),
            upper_rel_density: g(win.hi),
        },
        w,
        f,
        slope,
        max_interp_error: 0.0,
        family: d.family(),
    };
    let errs = par::map_range(table.w.len() - 1, |j| {
        let mid = 0.5 * (table.w[j] + table.w[j + 1]);
        let direct = table.f[j] + gk21(&g, table.w[j], mid).value / acc;
        (table.eval_w(mid) - direct).abs()
    });
    table.max_interp_error = par::max_of(errs);
    Ok(table)
}

/// Fritsch–Carlson: zero slopes on flat cells and pull `(alpha, beta)`
/// into the disc of radius 3.
fn limit_slopes(w: &[f64], f: &[f64], m: &mut [f64]) {
    for j in 0..w.len() - 1 {
        let delta = (f[j + 1] - f[j]) / (w[j + 1] - w[j]);
        if delta <= 0.0 {
            m[j] = 0.0;
            m[j + 1] = 0.0;
            continue;
        }
        let (a, b) = (m[j] / delta, m[j + 1] / delta);
        let r2 = a * a + b * b;
        if r2 > 9.0 {
            let tau = 3.0 / r2.sqrt();
            m[j] = tau * a * delta;
            m[j + 1] = tau * b * delta;
        }
    }
}

impl CdfTable {
    pub fn window(&self) -> (f64, f64) {
        (self.w[0].exp(), self.w[self.w.len() - 1].exp())
    }

    pub fn n_cells(&self) -> usize {
        self.w.len() - 1
    }

    /// Knots as `(y, F(y))`.
    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.w.iter().zip(&self.f).map(|(w, f)| (w.exp(), *f))
    }

    fn hermite(&self, j: usize, t: f64) -> f64 {
        let h = self.w[j + 1] - self.w[j];
        let d = self.f[j + 1] - self.f[j];
        if d <= 0.0 {
            return self.f[j];
        }
        // F_j + d s(t) with s increasing from 0 to 1; rounding of the final
        // multiply-add is monotone in s.
        let (a, b) = (h * self.slope[j] / d, h * self.slope[j + 1] / d);
        let u = 1.0 - t;
        let s = t * t * (3.0 - 2.0 * t) + a * t * u * u - b * t * t * u;
        self.f[j] + d * s.clamp(0.0, 1.0)
    }

    fn eval_w(&self, w: f64) -> f64 {
        let n = self.w.len();
        if w <= self.w[0] {
            return 0.0;
        }
        if w >= self.w[n - 1] {
            return 1.0;
        }
        let j = self.w.partition_point(|&x| x <= w) - 1;
        self.hermite(j, (w - self.w[j]) / (self.w[j + 1] - self.w[j]))
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            return 0.0;
        }
        self.eval_w(y.ln())
    }

    /// Smallest `y` in the window with `F(y) >= u`, found by bisection
    /// inside the bracketing cell.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.f.len();
        if u <= 0.0 {
            return self.w[0].exp();
        }
        if u >= 1.0 {
            return self.w[n - 1].exp();
        }
        let j = (self.f.partition_point(|&x| x < u)).clamp(1, n - 1) - 1;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if self.hermite(j, mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-17 {
                break;
            }
        }
        let t = 0.5 * (lo + hi);
        (self.w[j] + t * (self.w[j + 1] - self.w[j])).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed: u64,
    pub family: Family,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn median(&self) -> Option<f64> {
        if self.values.is_empty() {
            return None;
        }
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
    }

    /// Sample mean of `Y^s`.
    pub fn moment(&self, s: f64) -> Option<f64> {
        if self.values.is_empty() {
            return None;
        }
        Some(self.values.iter().map(|y| y.powf(s)).sum::<f64>() / self.values.len() as f64)
    }
}

fn uniforms_map<F>(n: usize, seed: u64, f: F) -> Vec<f64>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let parts = par::map_range(chunks, |c| {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let len = CHUNK.min(n - c * CHUNK);
        (0..len).map(|_| f(Open01.sample(&mut rng))).collect::<Vec<f64>>()
    });
    parts.concat()
}

/// `n` inverse-CDF draws through a table of [`DEFAULT_RESOLUTION`] cells.
pub fn sample(d: &dyn Density, n: usize, seed: u64) -> Result<SampleBatch> {
    let table = build_cdf(d, DEFAULT_RESOLUTION)?;
    sample_from_table(&table, n, seed)
}

pub fn sample_from_table(table: &CdfTable, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return domain("sample size must be at least 1");
    }
    let values = uniforms_map(n, seed, |u| table.quantile(u));
    Ok(SampleBatch { values, seed, family: table.family })
}

/// Piece probabilities of the polynomial law, pieces kept outward from 0
/// until three in a row are negligible.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyPieceTable {
    params: SymmetryParams,
    /// Pieces in increasing `y`, i.e. decreasing index.
    pieces: Vec<i64>,
    cumulative: Vec<f64>,
    pub truncation: i64,
}

pub fn poly_piece_table(params: SymmetryParams) -> PolyPieceTable {
    let k = params.k();
    let mut kept = Vec::new();
    let mut total = 0.0;
    let mut quiet = 0;
    for j in 0.. {
        let i = outward(j);
        let m = crate::densities::poly_piece_mass_unnormalized(k, i);
        total += m;
        kept.push((i, m));
        if m < PIECE_NEGLIGIBLE * total {
            quiet += 1;
            if quiet == 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    kept.sort_by(|a, b| b.0.cmp(&a.0));
    let truncation = kept.iter().map(|(i, _)| i.abs()).max().unwrap_or(0);
    let mut acc = 0.0;
    let mut cumulative = Vec::with_capacity(kept.len());
    for (_, m) in &kept {
        acc += m / total;
        cumulative.push(acc);
    }
    *cumulative.last_mut().expect("nonempty") = 1.0;
    PolyPieceTable { params, pieces: kept.into_iter().map(|p| p.0).collect(), cumulative, truncation }
}

impl PolyPieceTable {
    /// `(index, probability)` in increasing `y`.
    pub fn pieces(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.pieces.iter().zip(&self.cumulative).scan(0.0, |prev, (&i, &c)| {
            let m = c - *prev;
            *prev = c;
            Some((i, m))
        })
    }

    pub fn mass(&self, i: i64) -> f64 {
        self.pieces().find(|p| p.0 == i).map_or(0.0, |p| p.1)
    }

    /// Support of the truncated law.
    pub fn support(&self) -> (f64, f64) {
        let lo = self.pieces[0];
        let hi = *self.pieces.last().expect("nonempty");
        (self.params.piece_bounds(crate::params::PieceIndex(lo)).0,
         self.params.piece_bounds(crate::params::PieceIndex(hi)).1)
    }

    /// Map a uniform on `(0, 1)` to a draw.
    pub fn invert(&self, u: f64) -> f64 {
        let j = self.cumulative.partition_point(|&c| c < u).min(self.pieces.len() - 1);
        let before = if j == 0 { 0.0 } else { self.cumulative[j - 1] };
        let mass = self.cumulative[j] - before;
        let v = ((u - before) / mass).clamp(0.0, 1.0);
        let i = self.pieces[j];
        let l = self.params.ln_k();
        let ln_a = -2.0 * i as f64 * l;
        let lx = if i == 0 {
            ln_a + 2.0 * l * v
        } else {
            let fi = i as f64;
            ln_a + (v * (4.0 * fi * l).exp_m1()).ln_1p() / (2.0 * fi)
        };
        let (lo, hi) = self.params.piece_bounds(crate::params::PieceIndex(i));
        let y = self.params.theta() * lx.exp();
        y.clamp(lo.next_up(), hi)
    }
}

/// Exact draws from the closed-form polynomial law: pick a piece from the
/// mass table, then invert its power-law CDF. No quadrature.
pub fn poly_ds_sample_exact(params: SymmetryParams, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return domain("sample size must be at least 1");
    }
    let table = poly_piece_table(params);
    let values = uniforms_map(n, seed, |u| table.invert(u));
    Ok(SampleBatch { values, seed, family: Family::PolyDs })
}

/// Exact CDF of the polynomial law, for KS checks.
pub fn poly_ds_cdf(params: SymmetryParams) -> Result<impl Fn(f64) -> f64> {
    let d: PolyDsDensity = crate::densities::make_poly_ds(params)?;
    Ok(move |y| d.cdf(y).expect("closed form"))
}

/// One-sample Kolmogorov statistic `sup |F_n - F|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(batch: &SampleBatch, cdf: F) -> Result<f64> {
    if batch.values.is_empty() {
        return domain("empty batch");
    }
    let mut v = batch.values.clone();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    Ok(v.iter().enumerate().fold(0.0, |d, (i, &y)| {
        let f = cdf(y);
        d.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    }))
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &SampleBatch, b: &SampleBatch) -> Result<f64> {
    if a.values.is_empty() || b.values.is_empty() {
        return domain("empty batch");
    }
    let mut x = a.values.clone();
    let mut y = b.values.clone();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

pub fn ks_critical_1pct(n: usize) -> f64 {
    KS_C_1PCT / (n as f64).sqrt()
}

pub fn ks_two_sample_critical_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KS_C_1PCT * ((n + m) / (n * m)).sqrt()
}
