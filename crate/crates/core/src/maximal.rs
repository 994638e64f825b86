//! Discrete Hardy–Littlewood maximal operators and the ratio checks built on them.
//!
//! Windows are cubes of `L x L` cells with `L` a power of two, wrapping
//! periodically. With translates every lattice position is used; without,
//! only positions aligned to multiples of `L` (the dyadic maximal function).
//! Single-cell windows are always present, so `M f >= |f|` pointwise.

use crate::error::{Error, Result};
use crate::grid::{lp_lq_norm, GridFunction, GridSpec, VectorSequence};
use crate::weights::{SampledWeights, WeightSequence};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalConfig {
    /// Coarsest window level: side `2^{-v_min}`.
    pub v_min: i32,
    /// Finest window level; clamped to single cells.
    pub v_max: i32,
    pub include_translates: bool,
}

impl MaximalConfig {
    pub fn new(v_min: i32, v_max: i32, include_translates: bool) -> Self {
        MaximalConfig { v_min, v_max, include_translates }
    }

    pub fn validate(&self, spec: &GridSpec) -> Result<()> {
        if self.v_min > self.v_max {
            return Err(Error::config("maximal", format!("empty window range [{}, {}]", self.v_min, self.v_max)));
        }
        if self.v_max > spec.cell_level() {
            return Err(Error::config("maximal.v_max", "windows finer than one cell"));
        }
        if self.window_cells(spec, self.v_min) > spec.samples {
            return Err(Error::config("maximal.v_min", "windows larger than the domain"));
        }
        Ok(())
    }

    fn window_cells(&self, spec: &GridSpec, v: i32) -> usize {
        (((spec.cell_level() - v) as f64).exp2()) as usize
    }

    /// Window side lengths in cells, always including single cells.
    pub fn window_sides(&self, spec: &GridSpec) -> Vec<usize> {
        let mut sides: Vec<usize> = (self.v_min..=self.v_max).map(|v| self.window_cells(spec, v)).collect();
        if !sides.contains(&1) {
            sides.push(1);
        }
        sides.sort_unstable();
        sides
    }
}

/// `out[x] = max(a[x - w + 1 ..= x])` along one axis, periodically.
fn sliding_max_1d(a: &[f64], w: usize) -> Vec<f64> {
    let n = a.len();
    let mut cur = a.to_vec();
    let mut width = 1;
    while width < w {
        let step = width.min(w - width);
        let prev = cur.clone();
        for x in 0..n {
            cur[x] = prev[x].max(prev[(x + n - step) % n]);
        }
        width += step;
    }
    cur
}

/// `out[s] = sum(a[s ..< s + w])` along one axis, periodically; `w` a power of two.
fn window_sums_1d(a: &[f64], w: usize) -> Vec<f64> {
    let n = a.len();
    let mut cur = a.to_vec();
    let mut width = 1;
    while width < w {
        let prev = cur.clone();
        for s in 0..n {
            cur[s] = prev[s] + prev[(s + width) % n];
        }
        width *= 2;
    }
    cur
}

/// Applies a 1D operator along each axis of a square 2D array.
fn separable(data: &[f64], n: usize, op: impl Fn(&[f64]) -> Vec<f64> + Sync) -> Vec<f64> {
    let rows: Vec<f64> = data.par_chunks(n).flat_map_iter(|r| op(r)).collect();
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let col: Vec<f64> = (0..n).map(|i| rows[i * n + j]).collect();
            op(&col)
        })
        .collect();
    let mut out = vec![0.0; n * n];
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            out[i * n + j] = *v;
        }
    }
    out
}

/// Averages of `|f|` over every `L x L` window, indexed by the window's lowest cell.
pub fn window_averages(spec: &GridSpec, mags: &[f64], side: usize) -> Vec<f64> {
    let scale = 1.0 / (side.pow(spec.n as u32)) as f64;
    let sums = if spec.n == 1 {
        window_sums_1d(mags, side)
    } else {
        separable(mags, spec.samples, |r| window_sums_1d(r, side))
    };
    sums.into_iter().map(|s| s * scale).collect()
}

fn maximal_of_magnitudes(spec: &GridSpec, mags: &[f64], cfg: &MaximalConfig) -> Vec<f64> {
    let n = spec.samples;
    let per_side: Vec<Vec<f64>> = cfg
        .window_sides(spec)
        .into_par_iter()
        .map(|side| {
            let avg = window_averages(spec, mags, side);
            if cfg.include_translates {
                if spec.n == 1 {
                    sliding_max_1d(&avg, side)
                } else {
                    separable(&avg, n, |r| sliding_max_1d(r, side))
                }
            } else {
                (0..spec.len())
                    .map(|i| {
                        let [a, b] = spec.axes(i);
                        avg[spec.flat(a - a % side, b - b % side)]
                    })
                    .collect()
            }
        })
        .collect();
    let mut out = vec![0.0f64; spec.len()];
    for m in per_side {
        for (o, v) in out.iter_mut().zip(m) {
            *o = o.max(v);
        }
    }
    out
}

/// `M f(x)`: the largest window average of `|f|` over windows containing `x`.
pub fn maximal_fn(f: &GridFunction, cfg: &MaximalConfig) -> Result<GridFunction> {
    cfg.validate(f.spec())?;
    let out = maximal_of_magnitudes(f.spec(), &f.magnitudes(), cfg);
    GridFunction::real(*f.spec(), out)
}

/// Direct evaluation of [`maximal_fn`] by visiting every window; `O(N^{2n})`.
pub fn maximal_fn_brute(f: &GridFunction, cfg: &MaximalConfig) -> Result<GridFunction> {
    let spec = *f.spec();
    cfg.validate(&spec)?;
    let mags = f.magnitudes();
    let n = spec.samples;
    let mut out = vec![0.0f64; spec.len()];
    for side in cfg.window_sides(&spec) {
        let step = if cfg.include_translates { 1 } else { side };
        let starts1 = if spec.n == 1 { vec![0] } else { (0..n).step_by(step).collect() };
        for s0 in (0..n).step_by(step) {
            for &s1 in &starts1 {
                let cells: Vec<usize> = if spec.n == 1 {
                    (0..side).map(|d| (s0 + d) % n).collect()
                } else {
                    (0..side)
                        .flat_map(|a| (0..side).map(move |b| spec.flat((s0 + a) % n, (s1 + b) % n)))
                        .collect()
                };
                let avg = cells.iter().map(|&i| mags[i]).sum::<f64>() / cells.len() as f64;
                for i in cells {
                    out[i] = out[i].max(avg);
                }
            }
        }
    }
    GridFunction::real(spec, out)
}

/// `M_sigma f = (M |f|^sigma)^{1/sigma}`.
pub fn maximal_sigma(f: &GridFunction, sigma: f64, cfg: &MaximalConfig) -> Result<GridFunction> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Invalid(format!("sigma must be positive and finite, got {sigma}")));
    }
    cfg.validate(f.spec())?;
    let mags: Vec<f64> = f.magnitudes().iter().map(|a| a.powf(sigma)).collect();
    let m = maximal_of_magnitudes(f.spec(), &mags, cfg);
    GridFunction::real(*f.spec(), m.into_iter().map(|v| v.powf(1.0 / sigma)).collect())
}

fn maximal_levels(fs: &VectorSequence, cfg: &MaximalConfig) -> Result<Vec<GridFunction>> {
    cfg.validate(fs.spec())?;
    Ok(fs.entries.par_iter().map(|f| maximal_fn(f, cfg)).collect::<Result<Vec<_>>>()?)
}

fn ratio(num: f64, den: f64, what: &'static str) -> Result<f64> {
    if den == 0.0 {
        return Err(Error::ZeroDenominator(what));
    }
    Ok(num / den)
}

/// `||{M_sigma f_k}| L_p(l_q)|| / ||{f_k}| L_p(l_q)||`.
pub fn fefferman_stein_ratio(fs: &VectorSequence, p: f64, q: f64, sigma: f64, cfg: &MaximalConfig) -> Result<f64> {
    if !(sigma > 0.0 && sigma < p.min(q)) {
        return Err(Error::Invalid(format!("vector maximal inequality needs 0 < sigma < min(p, q), got sigma = {sigma}")));
    }
    let m = fs.entries.par_iter().map(|f| maximal_sigma(f, sigma, cfg)).collect::<Result<Vec<_>>>()?;
    let num = lp_lq_norm(&VectorSequence::new(fs.k_min, m)?, p, q)?;
    ratio(num, lp_lq_norm(fs, p, q)?, "||{f_k}|L_p(l_q)||")
}

fn weighted(fs: &[GridFunction], k_min: i32, w: &SampledWeights) -> Result<VectorSequence> {
    let entries = fs
        .iter()
        .enumerate()
        .map(|(i, f)| f.mul_real(&w.level(k_min + i as i32)))
        .collect::<Result<Vec<_>>>()?;
    VectorSequence::new(k_min, entries)
}

/// `||{t_k M f_k}| L_p(l_q)|| / ||{t_k f_k}| L_p(l_q)||`.
pub fn weighted_maximal_ratio(
    fs: &VectorSequence,
    ts: &WeightSequence,
    p: f64,
    q: f64,
    cfg: &MaximalConfig,
) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Invalid(format!("weighted maximal inequality needs p > 1, got {p}")));
    }
    let w = SampledWeights::new(ts, fs.spec())?;
    let m = maximal_levels(fs, cfg)?;
    let num = lp_lq_norm(&weighted(&m, fs.k_min, &w)?, p, q)?;
    ratio(num, lp_lq_norm(&weighted(&fs.entries, fs.k_min, &w)?, p, q)?, "||{t_k f_k}|L_p(l_q)||")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `g_k = sum_{j <= k + v} 2^{(j - k) K} M f_j`.
    Below,
    /// `g_k = sum_{j >= k + v} 2^{(j - k) K} M f_j`.
    Above,
}

/// The level sums `g_k` of the kernel estimate, truncated to the stored levels.
pub fn kernel_sums(m: &[GridFunction], k_min: i32, kernel: f64, v: i32, dir: Direction) -> Result<Vec<GridFunction>> {
    let count = m.len() as i32;
    let spec = *m.first().ok_or_else(|| Error::Invalid("empty vector sequence".into()))?.spec();
    (0..count)
        .map(|ki| {
            let k = k_min + ki;
            let mut acc = vec![0.0f64; spec.len()];
            for ji in 0..count {
                let j = k_min + ji;
                let take = match dir {
                    Direction::Below => j <= k + v,
                    Direction::Above => j >= k + v,
                };
                if take {
                    let c = ((j - k) as f64 * kernel).exp2();
                    for (a, b) in acc.iter_mut().zip(m[ji as usize].re()) {
                        *a += c * b;
                    }
                }
            }
            GridFunction::real(spec, acc)
        })
        .collect()
}

/// `||{t_k g_k}| L_p(l_q)|| / ||{t_k f_k}| L_p(l_q)||` with `g_k` from [`kernel_sums`].
#[allow(clippy::too_many_arguments)]
pub fn kernel_sum_ratio(
    fs: &VectorSequence,
    ts: &WeightSequence,
    kernel: f64,
    v: i32,
    dir: Direction,
    p: f64,
    q: f64,
    cfg: &MaximalConfig,
) -> Result<f64> {
    let w = SampledWeights::new(ts, fs.spec())?;
    let m = maximal_levels(fs, cfg)?;
    let g = kernel_sums(&m, fs.k_min, kernel, v, dir)?;
    let num = lp_lq_norm(&weighted(&g, fs.k_min, &w)?, p, q)?;
    ratio(num, lp_lq_norm(&weighted(&fs.entries, fs.k_min, &w)?, p, q)?, "||{t_k f_k}|L_p(l_q)||")
}

/// Report record for one maximal-inequality ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub inequality: String,
    pub params: BTreeMap<String, f64>,
    pub ratio: f64,
    pub corpus_id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}
