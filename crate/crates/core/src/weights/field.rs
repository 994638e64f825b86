//! Cell averages of closed-form weights.
//!
//! Each cell average of `w^s` is a Gauss–Legendre sum over nodes shared by all
//! exponents, so discrete Hölder inequalities hold node by node. The cells
//! touching the origin integrate `|x|^{a s}` exactly via the substitution
//! `x = h u^{1/(a s + n)}` (polar in 2D); when some requested exponent makes
//! the origin singularity non-integrable, all exponents fall back to the
//! cell-centre value there, which keeps every Hölder product at 1 on that
//! cell and lets the divergence show up as growth under refinement.

use super::WeightSpec;
use crate::grid::{Agg, FamilyCube, GridSpec, Pyramid};
use rayon::prelude::*;
use std::f64::consts::FRAC_PI_4;

/// Statistic of the spatial part `w` of a weight over a cube.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Moment {
    /// Mean of `w^s`.
    Power(f64),
    /// Smallest node value of `w`.
    Min,
    /// Largest node value of `w`.
    Max,
}

/// Gauss–Legendre rule on `[0, 1]` with weights summing to 1.
pub fn gauss_legendre01(order: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(order);
    let n = order as f64;
    for i in 0..order {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

struct Rules {
    near: Vec<(f64, f64)>,
    mid: Vec<(f64, f64)>,
    far: Vec<(f64, f64)>,
    radial: Vec<(f64, f64)>,
}

const NEAR_CELLS: usize = 8;
const MID_CELLS: usize = 64;

impl Rules {
    fn new() -> Self {
        Rules {
            near: gauss_legendre01(8),
            mid: gauss_legendre01(3),
            far: gauss_legendre01(2),
            radial: gauss_legendre01(16),
        }
    }

    fn for_distance(&self, d: usize) -> &[(f64, f64)] {
        if d <= NEAR_CELLS {
            &self.near
        } else if d <= MID_CELLS {
            &self.mid
        } else {
            &self.far
        }
    }
}

struct Field<'a> {
    w: &'a WeightSpec,
    spec: GridSpec,
    rules: Rules,
    /// Whether every requested power is integrable at the origin.
    exact_origin: bool,
}

impl<'a> Field<'a> {
    fn new(w: &'a WeightSpec, spec: &GridSpec, moments: &[Moment]) -> Self {
        let n = spec.n as f64;
        let a = w.origin_exponent();
        let exact_origin = moments.iter().all(|m| match m {
            Moment::Power(s) => a * s > -n,
            _ => true,
        });
        Field { w, spec: *spec, rules: Rules::new(), exact_origin }
    }

    fn cells(&self, m: Moment) -> Vec<f64> {
        let origin = self.origin_value(m);
        (0..self.spec.len()).into_par_iter().map(|i| self.cell_value(i, m, origin)).collect()
    }

    /// [`Field::cells`] for several moments in one pass over the nodes.
    fn cells_many(&self, ms: &[Moment]) -> Vec<Vec<f64>> {
        let origin: Vec<f64> = ms.iter().map(|&m| self.origin_value(m)).collect();
        let k = ms.len();
        let mut flat = vec![0.0; self.spec.len() * k];
        flat.par_chunks_mut(k).enumerate().for_each(|(i, vals)| self.cell_values(i, ms, &origin, vals));
        (0..k).map(|j| flat.iter().skip(j).step_by(k).copied().collect()).collect()
    }

    fn cells_at(&self, m: Moment, idx: &[usize]) -> Vec<f64> {
        let origin = self.origin_value(m);
        idx.par_iter().map(|&i| self.cell_value(i, m, origin)).collect()
    }

    /// Cell distance from the origin along one axis (0 for the cells touching it).
    fn axis_distance(&self, i: usize) -> usize {
        let half = self.spec.samples / 2;
        if i >= half {
            i - half
        } else {
            half - 1 - i
        }
    }

    /// Calls `f(r, weight)` for every quadrature node of a cell; returns whether
    /// the cell touches the origin.
    fn visit(&self, idx: usize, mut f: impl FnMut(f64, f64)) -> bool {
        let [i0, i1] = self.spec.axes(idx);
        let h = self.spec.h();
        let r0 = -self.spec.half_width;
        let d0 = self.axis_distance(i0);
        if self.spec.n == 1 {
            let lo = r0 + i0 as f64 * h;
            for &(t, wt) in self.rules.for_distance(d0) {
                f((lo + t * h).abs(), wt);
            }
            return d0 == 0;
        }
        let d1 = self.axis_distance(i1);
        let rule = self.rules.for_distance(d0.max(d1));
        let (lo0, lo1) = (r0 + i0 as f64 * h, r0 + i1 as f64 * h);
        for &(ta, wa) in rule {
            for &(tb, wb) in rule {
                f((lo0 + ta * h).hypot(lo1 + tb * h), wa * wb);
            }
        }
        d0 == 0 && d1 == 0
    }

    fn centre_radius(&self) -> f64 {
        0.5 * self.spec.h() * (self.spec.n as f64).sqrt()
    }

    /// Exact mean of `w^s` over an origin cell.
    fn origin_power(&self, s: f64) -> f64 {
        let h = self.spec.h();
        let e = self.w.origin_exponent() * s;
        let n = self.spec.n as f64;
        let radial = |rho: f64| -> f64 {
            let g: f64 = self
                .rules
                .radial
                .iter()
                .map(|&(u, wt)| wt * (s * self.w.smooth_ln(rho * u.powf(1.0 / (e + n)))).exp())
                .sum();
            g * rho.powf(e + n) / (e + n)
        };
        if self.spec.n == 1 {
            radial(h) / h
        } else {
            let theta: f64 = self
                .rules
                .radial
                .iter()
                .map(|&(u, wt)| wt * FRAC_PI_4 * radial(h / (u * FRAC_PI_4).cos()))
                .sum();
            2.0 * theta / (h * h)
        }
    }

    fn cell_value(&self, idx: usize, moment: Moment, origin_cache: f64) -> f64 {
        match moment {
            Moment::Power(s) => {
                let mut acc = 0.0;
                let origin = self.visit(idx, |r, wt| acc += wt * (s * self.w.base_ln(r)).exp());
                if origin {
                    origin_cache
                } else {
                    acc
                }
            }
            Moment::Min | Moment::Max => {
                let sign = if moment == Moment::Min { -1.0 } else { 1.0 };
                let mut best = f64::NEG_INFINITY;
                let origin = self.visit(idx, |r, _| best = best.max(sign * self.w.base_ln(r)));
                if origin {
                    best = best.max(sign * self.w.base_ln(self.centre_radius()));
                }
                (sign * best).exp()
            }
        }
    }

    /// [`Field::cell_value`] of every moment, sharing each node's logarithm.
    fn cell_values(&self, idx: usize, ms: &[Moment], origin_cache: &[f64], out: &mut [f64]) {
        for (o, m) in out.iter_mut().zip(ms) {
            *o = match m {
                Moment::Power(_) => 0.0,
                Moment::Min | Moment::Max => f64::NEG_INFINITY,
            };
        }
        let origin = self.visit(idx, |r, wt| {
            let l = self.w.base_ln(r);
            for (o, m) in out.iter_mut().zip(ms) {
                match m {
                    Moment::Power(s) => *o += wt * (s * l).exp(),
                    Moment::Min => *o = o.max(-l),
                    Moment::Max => *o = o.max(l),
                }
            }
        });
        let centre = if origin { self.w.base_ln(self.centre_radius()) } else { 0.0 };
        for ((o, m), &cache) in out.iter_mut().zip(ms).zip(origin_cache) {
            *o = match m {
                Moment::Power(_) if origin => cache,
                Moment::Power(_) => *o,
                Moment::Min => (-(if origin { o.max(-centre) } else { *o })).exp(),
                Moment::Max => (if origin { o.max(centre) } else { *o }).exp(),
            };
        }
    }

    fn origin_value(&self, moment: Moment) -> f64 {
        match moment {
            Moment::Power(s) if self.exact_origin => self.origin_power(s),
            Moment::Power(s) => (s * self.w.base_ln(self.centre_radius())).exp(),
            _ => f64::NAN,
        }
    }
}

/// Per-cube statistics of the spatial part of `w` on the cells of `spec`.
///
/// `Power(s)` entries are cube means of `w^s`; `Min`/`Max` entries are extreme
/// node values of `w`. All power moments share one origin policy.
pub fn cube_moments(w: &WeightSpec, spec: &GridSpec, cubes: &[FamilyCube], moments: &[Moment]) -> Vec<Vec<f64>> {
    let field = Field::new(w, spec, moments);
    let max_side = cubes.iter().map(|c| c.side).max().unwrap_or(1);
    moments
        .iter()
        .zip(field.cells_many(moments))
        .map(|(&m, cells)| {
            let agg = match m {
                Moment::Power(_) => Agg::Sum,
                Moment::Min => Agg::Min,
                Moment::Max => Agg::Max,
            };
            let pyr = Pyramid::build(spec, &cells, agg, max_side);
            drop(cells);
            cubes
                .iter()
                .map(|c| match m {
                    Moment::Power(_) => pyr.mean(c),
                    _ => pyr.query(c),
                })
                .collect()
        })
        .collect()
}

/// Cube average `M_{Q,sigma}(w^{sign})` of the spatial part, `sigma` possibly infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Avg {
    pub sigma: f64,
    pub sign: f64,
}

impl Avg {
    pub fn of(sigma: f64) -> Self {
        Avg { sigma, sign: 1.0 }
    }

    pub fn of_inverse(sigma: f64) -> Self {
        Avg { sigma, sign: -1.0 }
    }

    pub fn moment(&self) -> Moment {
        match (self.sigma.is_infinite(), self.sign > 0.0) {
            (false, _) => Moment::Power(self.sign * self.sigma),
            (true, true) => Moment::Max,
            (true, false) => Moment::Min,
        }
    }

    /// Converts a raw [`cube_moments`] entry to the average.
    pub fn finish(&self, raw: f64) -> f64 {
        match (self.sigma.is_infinite(), self.sign > 0.0) {
            (false, _) if self.sigma == 1.0 => raw,
            (false, _) => raw.powf(1.0 / self.sigma),
            (true, true) => raw,
            (true, false) => 1.0 / raw,
        }
    }
}

/// Cube averages for several [`Avg`] requests sharing one origin policy.
pub fn cube_averages(w: &WeightSpec, spec: &GridSpec, cubes: &[FamilyCube], avgs: &[Avg]) -> Vec<Vec<f64>> {
    let moments: Vec<Moment> = avgs.iter().map(Avg::moment).collect();
    let raw = cube_moments(w, spec, cubes, &moments);
    raw.into_iter().zip(avgs).map(|(vals, a)| vals.into_iter().map(|v| a.finish(v)).collect()).collect()
}

/// Pyramids of several [`Avg`] requests, queried one cube at a time; agrees
/// with [`cube_averages`] on every cube of side at most `max_side`.
pub struct CubeAverager {
    avgs: Vec<(Avg, Pyramid)>,
}

impl CubeAverager {
    pub fn new(w: &WeightSpec, spec: &GridSpec, avgs: &[Avg], max_side: usize) -> Self {
        let moments: Vec<Moment> = avgs.iter().map(Avg::moment).collect();
        let field = Field::new(w, spec, &moments);
        let avgs = avgs
            .iter()
            .zip(field.cells_many(&moments))
            .zip(moments)
            .map(|((&a, cells), m)| {
                let agg = match m {
                    Moment::Power(_) => Agg::Sum,
                    Moment::Min => Agg::Min,
                    Moment::Max => Agg::Max,
                };
                (a, Pyramid::build(spec, &cells, agg, max_side))
            })
            .collect();
        CubeAverager { avgs }
    }

    /// Average `k` of the requests over cube `c`.
    pub fn average(&self, k: usize, c: &FamilyCube) -> f64 {
        let (a, pyr) = &self.avgs[k];
        let raw = match a.moment() {
            Moment::Power(_) => pyr.mean(c),
            _ => pyr.query(c),
        };
        a.finish(raw)
    }
}

/// Per-cell statistic of the spatial part of `w`, with the same quadrature and
/// origin policy as [`cube_moments`] for that single moment.
pub fn cell_moments(w: &WeightSpec, spec: &GridSpec, moment: Moment) -> Vec<f64> {
    Field::new(w, spec, &[moment]).cells(moment)
}

/// [`cell_moments`] restricted to the listed flat cell indices, in order.
pub fn cell_moments_at(w: &WeightSpec, spec: &GridSpec, moment: Moment, cells: &[usize]) -> Vec<f64> {
    Field::new(w, spec, &[moment]).cells_at(moment, cells)
}

/// Per-cell `M_{cell,sigma}(w)`; consistent with [`cube_averages`] for `Avg::of(sigma)`.
pub fn cell_averages(w: &WeightSpec, spec: &GridSpec, sigma: f64) -> Vec<f64> {
    let a = Avg::of(sigma);
    cell_moments(w, spec, a.moment()).into_iter().map(|v| a.finish(v)).collect()
}
