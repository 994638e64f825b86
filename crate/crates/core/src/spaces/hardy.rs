use crate::error::{Error, Result};
use crate::grid::{lp_of_magnitudes, CubeFamily, GridFunction};
use crate::lpaley::LPPair;
use crate::spectral::{from_complex, Spectral, C64};
use crate::weights::{SampledWeights, WeightSequence, Witness};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Probabilists' Hermite polynomial `He_m(y)`.
fn hermite(m: usize, y: f64) -> f64 {
    let (mut a, mut b) = (1.0, y);
    if m == 0 {
        return a;
    }
    for k in 1..m {
        let c = y * b - k as f64 * a;
        a = b;
        b = c;
    }
    b
}

/// `d^m/dx^m exp(-x^2 / (2 w^2))`.
fn gaussian_derivative(m: usize, w: f64, x: f64) -> f64 {
    let y = x / w;
    (-1.0 / w).powi(m as i32) * hermite(m, y) * (-0.5 * y * y).exp()
}

/// `c d^order/dx_1^order exp(-|x|^2 / (2 w^2))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestProfile {
    pub width: f64,
    pub order: usize,
    pub scale: f64,
}

impl TestProfile {
    /// `d^beta` of the unscaled profile at `x`.
    fn derivative(&self, beta: [usize; 2], x: [f64; 2], n: usize) -> f64 {
        let a = gaussian_derivative(self.order + beta[0], self.width, x[0]);
        if n == 1 {
            a
        } else {
            a * gaussian_derivative(beta[1], self.width, x[1])
        }
    }

    /// `(1 + |x|)^N max_{|beta| <= N} |d^beta profile(x)|` of the unscaled profile.
    fn weighted_derivatives(&self, x: [f64; 2], n: usize, order_n: usize) -> f64 {
        let w = (1.0 + x[0].hypot(x[1])).powi(order_n as i32);
        let mut best = 0.0f64;
        for a in 0..=order_n {
            let bs = if n == 1 { 0..=0 } else { 0..=order_n - a };
            for b in bs {
                best = best.max(self.derivative([a, b], x, n).abs());
            }
        }
        w * best
    }

    /// `sup_x (1 + |x|)^N max_{|beta| <= N} |d^beta profile(x)|` of the unscaled
    /// profile: a dense scan of `[-L, L]^n` followed by local refinement around
    /// the largest samples.
    pub fn seminorm_unscaled(&self, n: usize, order_n: usize, samples: usize) -> f64 {
        let l = 16.0 * self.width + 4.0;
        let step = 2.0 * l / samples as f64;
        let pts: Vec<f64> = (0..=samples).map(|i| -l + step * i as f64).collect();
        let ys: &[f64] = if n == 1 { &[0.0] } else { &pts };
        let mut scan: Vec<(f64, [f64; 2])> = pts
            .par_iter()
            .flat_map_iter(|&x| ys.iter().map(move |&y| (self.weighted_derivatives([x, y], n, order_n), [x, y])))
            .collect();
        scan.sort_by(|a, b| b.0.total_cmp(&a.0));
        let offsets: Vec<[f64; 2]> = if n == 1 {
            (-2..=2).map(|i| [i as f64, 0.0]).collect()
        } else {
            (-2..=2).flat_map(|i| (-2..=2).map(move |j| [i as f64, j as f64])).collect()
        };
        let refine = |(mut best, mut c): (f64, [f64; 2])| {
            let mut h = step / 2.0;
            for _ in 0..40 {
                for o in &offsets {
                    let x = [c[0] + o[0] * h, c[1] + o[1] * h];
                    let v = self.weighted_derivatives(x, n, order_n);
                    if v > best {
                        (best, c) = (v, x);
                    }
                }
                h /= 2.0;
            }
            best
        };
        scan.iter().take(REFINED_CANDIDATES).copied().map(refine).fold(0.0, f64::max)
    }

    pub fn seminorm(&self, n: usize, order_n: usize, samples: usize) -> f64 {
        self.scale * self.seminorm_unscaled(n, order_n, samples)
    }

    /// Fourier transform `int profile(x) e^{-i x . xi} dx`.
    pub fn fourier(&self, xi: [f64; 2], n: usize) -> C64 {
        let w = self.width;
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        let g = (2.0 * PI * w * w).powf(n as f64 / 2.0) * (-0.5 * w * w * r2).exp();
        C64::new(0.0, xi[0]).powi(self.order as i32) * (self.scale * g)
    }
}

/// Finite family of test profiles normalized to `p_N <= 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionDictionary {
    pub n: usize,
    /// Regularity order `N` of the seminorm.
    pub order_n: usize,
    pub members: Vec<TestProfile>,
}

/// Relative margin kept below `p_N = 1`, covering the gap between the dense
/// sample and the true supremum.
const NORMALIZATION_MARGIN: f64 = 1e-3;
const SEMINORM_SAMPLES: usize = 4000;
const REFINED_CANDIDATES: usize = 64;

impl TestFunctionDictionary {
    /// One profile per `(width, order)` pair, each scaled so `p_N <= 1`.
    pub fn new(n: usize, order_n: usize, widths: &[f64], orders: &[usize]) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(Error::Invalid(format!("dimension must be 1 or 2, got {n}")));
        }
        let samples = if n == 1 { SEMINORM_SAMPLES } else { SEMINORM_SAMPLES / 10 };
        let mut members = Vec::new();
        for &width in widths {
            if !(width > 0.0 && width.is_finite()) {
                return Err(Error::Invalid(format!("profile width must be positive, got {width}")));
            }
            for &order in orders {
                let unscaled = TestProfile { width, order, scale: 1.0 };
                let s = unscaled.seminorm_unscaled(n, order_n, samples);
                members.push(TestProfile { scale: (1.0 - NORMALIZATION_MARGIN) / s, ..unscaled });
            }
        }
        Ok(TestFunctionDictionary { n, order_n, members })
    }

    /// Two widths times four derivative orders with `N = n + 2`.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(n, n + 2, &[0.5, 1.0], &[0, 1, 2, 3])
    }

    pub fn truncated(&self, count: usize) -> Self {
        TestFunctionDictionary { members: self.members[..count.min(self.members.len())].to_vec(), ..self.clone() }
    }
}

/// `|| sup_{k, psi} t_k |psi_k * f| | L_p ||` over the pair's levels and the dictionary,
/// with `psi_k = 2^{kn} psi(2^k .)`.
pub fn hardy_grand_norm(
    f: &GridFunction,
    pair: &LPPair,
    ts: &WeightSequence,
    p: f64,
    dict: &TestFunctionDictionary,
) -> Result<f64> {
    if dict.members.is_empty() {
        return Err(Error::Invalid("test-function dictionary is empty".into()));
    }
    if dict.n != pair.spec.n {
        return Err(Error::Invalid("dictionary dimension differs from the grid".into()));
    }
    if *f.spec() != pair.spec {
        return Err(Error::GridMismatch);
    }
    let spec = pair.spec;
    let sp = Spectral::new(&spec);
    let c = sp.coefficients(f);
    let w = SampledWeights::new(ts, &spec)?;
    let jobs: Vec<(i32, TestProfile)> = pair.levels().flat_map(|k| dict.members.iter().map(move |m| (k, *m))).collect();
    let per_job: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(k, member)| {
            let s = (-k as f64).exp2();
            let d: Vec<C64> = c
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let [a, b] = sp.xi(i);
                    v * member.fourier([a * s, b * s], spec.n)
                })
                .collect();
            let g = from_complex(&spec, sp.synthesize(&d), false);
            let t = w.level(k);
            (0..spec.len()).map(|i| t[i] * g.abs_at(i)).collect()
        })
        .collect();
    let mut sup = vec![0.0f64; spec.len()];
    for v in per_job {
        for (a, b) in sup.iter_mut().zip(v) {
            *a = a.max(b);
        }
    }
    Ok(lp_of_magnitudes(&spec, sup.into_iter(), p))
}

/// `sup_Q M_Q(|f - M_Q f|)` over the family, with the attaining cube.
pub fn bmo_norm(f: &GridFunction, family: &CubeFamily) -> Result<(f64, Option<Witness>)> {
    let spec = f.spec();
    let cubes = family.cubes(spec)?;
    let pairs = f.to_pairs();
    let vals: Vec<f64> = cubes
        .par_iter()
        .map(|c| {
            let idx = c.indices(spec);
            let len = idx.len() as f64;
            let (sr, si) = idx.iter().fold((0.0, 0.0), |(a, b), &i| (a + pairs[i].0, b + pairs[i].1));
            let (mr, mi) = (sr / len, si / len);
            idx.iter().map(|&i| (pairs[i].0 - mr).hypot(pairs[i].1 - mi)).sum::<f64>() / len
        })
        .collect();
    let mut best = (0.0f64, None);
    for (c, v) in cubes.iter().zip(vals) {
        if v > best.0 {
            best = (v, Some(Witness::from(c)));
        }
    }
    Ok(best)
}
