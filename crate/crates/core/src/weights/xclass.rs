use super::field::{cube_averages, Avg};
use super::muckenhoupt::Witness;
use super::WeightSequence;
use crate::error::{Error, Result};
use crate::grid::{FamilyCube, GridSpec};
use serde::{Deserialize, Serialize};

/// Per-level cube averages `M_{Q,p}(t_k)`, `M_{Q,sigma_1}(t_k^{-1})`, `M_{Q,sigma_2}(t_k)`.
struct LevelAverages {
    p_avg: Vec<Vec<f64>>,
    inv_avg: Vec<Vec<f64>>,
    s2_avg: Vec<Vec<f64>>,
}

fn level_averages(
    ts: &WeightSequence,
    levels: (i32, i32),
    p: f64,
    sigma: (f64, f64),
    spec: &GridSpec,
    cubes: &[FamilyCube],
) -> LevelAverages {
    let avgs = [Avg::of(p), Avg::of_inverse(sigma.0), Avg::of(sigma.1)];
    let mut out = LevelAverages { p_avg: Vec::new(), inv_avg: Vec::new(), s2_avg: Vec::new() };
    let shared = if ts.shares_spatial_part() {
        let w = ts.level(levels.0);
        Some(cube_averages(&w, spec, cubes, &avgs))
    } else {
        None
    };
    for k in levels.0..=levels.1 {
        let tk = ts.level(k);
        let [a, b, c]: [Vec<f64>; 3] = match &shared {
            Some(base) => {
                let f = tk.level_factor(0);
                [
                    base[0].iter().map(|v| v * f).collect(),
                    base[1].iter().map(|v| v / f).collect(),
                    base[2].iter().map(|v| v * f).collect(),
                ]
            }
            None => cube_averages(&tk, spec, cubes, &avgs).try_into().expect("three averages"),
        };
        out.p_avg.push(a);
        out.inv_avg.push(b);
        out.s2_avg.push(c);
    }
    out
}

/// Level pair and cube attaining a pair supremum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub k: i32,
    pub j: i32,
    pub cube: Witness,
}

/// For every `k <= j`, the cube maxima of both defining products.
#[derive(Clone, Debug)]
pub struct PairMaxima {
    /// `(k, j, max_Q M_{Q,p}(t_k) M_{Q,sigma_1}(t_j^{-1}), witness)`.
    pub lower: Vec<(i32, i32, f64, Witness)>,
    /// `(k, j, max_Q M_{Q,sigma_2}(t_j) / M_{Q,p}(t_k), witness)`.
    pub upper: Vec<(i32, i32, f64, Witness)>,
}

pub fn pair_maxima(
    ts: &WeightSequence,
    levels: (i32, i32),
    p: f64,
    sigma: (f64, f64),
    spec: &GridSpec,
    cubes: &[FamilyCube],
) -> Result<PairMaxima> {
    if levels.0 > levels.1 {
        return Err(Error::Invalid("empty level range".into()));
    }
    if !(sigma.0 > 0.0 && sigma.1 > 0.0) {
        return Err(Error::Invalid("sigma components must be positive".into()));
    }
    if cubes.is_empty() {
        return Err(Error::Invalid("cube family is empty".into()));
    }
    if !ts.covers(levels.0, levels.1) {
        return Err(Error::Invalid("weight sequence does not cover the level range".into()));
    }
    ts.check_admissible(p, spec.n)?;
    let avg = level_averages(ts, levels, p, sigma, spec, cubes);
    let count = (levels.1 - levels.0 + 1) as usize;
    let mut out = PairMaxima { lower: Vec::new(), upper: Vec::new() };
    for ki in 0..count {
        for ji in ki..count {
            let (mut lo, mut lo_at, mut up, mut up_at) = (f64::NEG_INFINITY, 0, f64::NEG_INFINITY, 0);
            for q in 0..cubes.len() {
                let a = avg.p_avg[ki][q] * avg.inv_avg[ji][q];
                if a > lo {
                    (lo, lo_at) = (a, q);
                }
                let b = avg.s2_avg[ji][q] / avg.p_avg[ki][q];
                if b > up {
                    (up, up_at) = (b, q);
                }
            }
            let (k, j) = (levels.0 + ki as i32, levels.0 + ji as i32);
            out.lower.push((k, j, lo, Witness::from(&cubes[lo_at])));
            out.upper.push((k, j, up, Witness::from(&cubes[up_at])));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XClassReport {
    pub alpha: (f64, f64),
    pub sigma: (f64, f64),
    pub p: f64,
    pub c1: f64,
    pub c2: f64,
    pub witness1: PairWitness,
    pub witness2: PairWitness,
}

impl PairMaxima {
    /// `C1(alpha_1) = max_{k<=j} A(k,j) 2^{alpha_1 (j-k)}` and its witness.
    pub fn c1(&self, alpha1: f64) -> (f64, PairWitness) {
        best(&self.lower, |d| (alpha1 * d).exp2())
    }

    /// `C2(alpha_2) = max_{k<=j} B(k,j) 2^{-alpha_2 (j-k)}` and its witness.
    pub fn c2(&self, alpha2: f64) -> (f64, PairWitness) {
        best(&self.upper, |d| (-alpha2 * d).exp2())
    }
}

fn best(rows: &[(i32, i32, f64, Witness)], scale: impl Fn(f64) -> f64) -> (f64, PairWitness) {
    let mut out = (f64::NEG_INFINITY, PairWitness { k: 0, j: 0, cube: rows[0].3 });
    for &(k, j, v, cube) in rows {
        let s = v * scale((j - k) as f64);
        if s > out.0 {
            out = (s, PairWitness { k, j, cube });
        }
    }
    out
}

/// Constants `C1`, `C2` of the two-sided growth conditions at fixed `alpha`.
pub fn xclass_constants(
    ts: &WeightSequence,
    levels: (i32, i32),
    p: f64,
    alpha: (f64, f64),
    sigma: (f64, f64),
    spec: &GridSpec,
    cubes: &[FamilyCube],
) -> Result<XClassReport> {
    let pm = pair_maxima(ts, levels, p, sigma, spec, cubes)?;
    let (c1, witness1) = pm.c1(alpha.0);
    let (c2, witness2) = pm.c2(alpha.1);
    Ok(XClassReport { alpha, sigma, p, c1, c2, witness1, witness2 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XClassFit {
    pub alpha: (f64, f64),
    pub c1: f64,
    pub c2: f64,
    pub grid_step: f64,
    /// Whether `alpha_2 >= alpha_1 - grid_step`.
    pub ordered: bool,
}

/// Tightest `(alpha_1, alpha_2)` on a grid at which both constants sit at their
/// minimum over the grid.
///
/// `C1` is nondecreasing in `alpha_1` and `C2` nonincreasing in `alpha_2`, so
/// every grid point with both constants at their floors minimizes
/// `max(C1, C2)`; the fit picks the largest such `alpha_1` and the smallest
/// such `alpha_2`, with floors compared to relative tolerance `rel_tol`.
pub fn xclass_fit(pm: &PairMaxima, alpha_grid: &[f64], rel_tol: f64) -> Result<XClassFit> {
    if alpha_grid.len() < 2 {
        return Err(Error::Invalid("alpha grid needs at least two points".into()));
    }
    let c1s: Vec<f64> = alpha_grid.iter().map(|&a| pm.c1(a).0).collect();
    let c2s: Vec<f64> = alpha_grid.iter().map(|&a| pm.c2(a).0).collect();
    let floor1 = c1s.iter().cloned().fold(f64::INFINITY, f64::min);
    let floor2 = c2s.iter().cloned().fold(f64::INFINITY, f64::min);
    let i1 = (0..alpha_grid.len())
        .filter(|&i| c1s[i] <= floor1 * (1.0 + rel_tol))
        .max_by(|&a, &b| alpha_grid[a].total_cmp(&alpha_grid[b]))
        .expect("floor is attained");
    let i2 = (0..alpha_grid.len())
        .filter(|&i| c2s[i] <= floor2 * (1.0 + rel_tol))
        .min_by(|&a, &b| alpha_grid[a].total_cmp(&alpha_grid[b]))
        .expect("floor is attained");
    let grid_step = alpha_grid.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let alpha = (alpha_grid[i1], alpha_grid[i2]);
    Ok(XClassFit { alpha, c1: c1s[i1], c2: c2s[i2], grid_step, ordered: alpha.1 >= alpha.0 - grid_step })
}

/// Uniform grid `lo, lo + step, ..., hi`.
pub fn alpha_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step).round() as usize;
    (0..=count).map(|i| lo + i as f64 * step).collect()
}
