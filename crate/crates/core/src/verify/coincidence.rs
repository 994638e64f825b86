use crate::error::{Error, Result};
use crate::grid::{FamilyCube, GridSpec};
use crate::lpaley::CoefficientSet;
use crate::spaces::{seq_b_norm, seq_f_norm};
use crate::weights::{ap_constant, cube_averages, Avg, WeightSequence, WeightSpec, Witness};
use serde::{Deserialize, Serialize};

/// `theta (p/theta)'`.
pub fn sigma1(p: f64, theta: f64) -> Result<f64> {
    let r = p / theta;
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::Invalid(format!("p/theta must lie in (1, inf), got {r}")));
    }
    Ok(theta * r / (r - 1.0))
}

/// Extremes of a per-cube ratio family with their cubes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioExtremes {
    pub min: f64,
    pub max: f64,
    pub argmin: Witness,
    pub argmax: Witness,
}

impl RatioExtremes {
    fn of(values: impl Iterator<Item = f64>, cubes: &[FamilyCube]) -> Result<Self> {
        let mut best: Option<(f64, usize, f64, usize)> = None;
        for (i, v) in values.enumerate() {
            best = Some(match best {
                None => (v, i, v, i),
                Some((lo, li, hi, hi_i)) => {
                    let (lo, li) = if v < lo { (v, i) } else { (lo, li) };
                    let (hi, hi_i) = if v > hi { (v, i) } else { (hi, hi_i) };
                    (lo, li, hi, hi_i)
                }
            });
        }
        let (min, li, max, hi) = best.ok_or_else(|| Error::Invalid("cube family is empty".into()))?;
        Ok(RatioExtremes { min, max, argmin: Witness::from(&cubes[li]), argmax: Witness::from(&cubes[hi]) })
    }

    pub fn spread(&self) -> f64 {
        self.max / self.min
    }

    pub fn within(&self, ceiling: f64) -> bool {
        self.min >= 1.0 / ceiling && self.max <= ceiling
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceResult {
    pub pass: bool,
    pub sigma1: f64,
    /// `M_{Q,sigma_1}(t_1^{-1}) / M_{Q,sigma_1}(t_2^{-1})`.
    pub inverse: RatioExtremes,
    /// `M_{Q,p}(t_1) / M_{Q,p}(t_2)`.
    pub direct: RatioExtremes,
    /// `A_{p/theta}` estimates of `t_1^p` and `t_2^p`.
    pub ap: (f64, f64),
}

/// Compares `M_{Q,sigma_1}(t^{-1})` and `M_{Q,p}(t)` of two weights over the
/// cube family; refuses when either `t_i^p` exceeds `ap_ceiling` as an
/// `A_{p/theta}` estimate.
#[allow(clippy::too_many_arguments)]
pub fn coincidence_check(
    t1: &WeightSpec,
    t2: &WeightSpec,
    p: f64,
    theta: f64,
    spec: &GridSpec,
    cubes: &[FamilyCube],
    ceiling: f64,
    ap_ceiling: f64,
) -> Result<CoincidenceResult> {
    let s1 = sigma1(p, theta)?;
    let r = p / theta;
    let n = spec.n as f64;
    for t in [t1, t2] {
        // |x|^b is in A_r only for -n < b < n (r - 1); outside, the discrete
        // estimate is finite but the constant is not.
        let b = t.origin_exponent() * p;
        if !(b > -n && b < n * (r - 1.0)) {
            return Err(Error::Invalid(format!(
                "A_{r} hypothesis fails: `{t}`^{p} behaves like |x|^{b} at the origin, outside (-{n}, {})",
                n * (r - 1.0)
            )));
        }
    }
    let a1 = ap_constant(&t1.powf(p), p / theta, spec, cubes)?.constant;
    let a2 = ap_constant(&t2.powf(p), p / theta, spec, cubes)?.constant;
    if !(a1 <= ap_ceiling && a2 <= ap_ceiling) {
        return Err(Error::Invalid(format!(
            "A_{} hypothesis fails: estimates {a1:.4} and {a2:.4} against ceiling {ap_ceiling}",
            p / theta
        )));
    }
    let avgs = [Avg::of_inverse(s1), Avg::of(p)];
    let v1 = cube_averages(t1, spec, cubes, &avgs);
    let v2 = cube_averages(t2, spec, cubes, &avgs);
    // Cube averages see only the spatial parts; the scalar factors enter here.
    let c = t1.level_factor(0) / t2.level_factor(0);
    let inverse = RatioExtremes::of(v1[0].iter().zip(&v2[0]).map(|(a, b)| a / (b * c)), cubes)?;
    let direct = RatioExtremes::of(v1[1].iter().zip(&v2[1]).map(|(a, b)| c * a / b), cubes)?;
    Ok(CoincidenceResult {
        pass: inverse.within(ceiling) && direct.within(ceiling),
        sigma1: s1,
        inverse,
        direct,
        ap: (a1, a2),
    })
}

/// `min_Q M_{Q,p}(t) M_{Q,sigma_1}(t^{-1})`, bounded below by 1 by Hölder's inequality.
pub fn holder_floor_check(
    t: &WeightSpec,
    p: f64,
    theta: f64,
    spec: &GridSpec,
    cubes: &[FamilyCube],
) -> Result<(f64, Witness)> {
    let s1 = sigma1(p, theta)?;
    let v = cube_averages(t, spec, cubes, &[Avg::of(p), Avg::of_inverse(s1)]);
    let e = RatioExtremes::of(v[0].iter().zip(&v[1]).map(|(a, b)| a * b), cubes)?;
    Ok((e.min, e.argmin))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaCheck {
    pub pass: bool,
    /// `(k, m, b-ratio, f-ratio)` of the norms under `t_2` over `t_1`.
    pub ratios: Vec<(i32, [i64; 2], f64, f64)>,
    pub min: f64,
    pub max: f64,
}

/// Sequence norms of single-coefficient inputs under `t_1` and `t_2`; passes when
/// every ratio lies in `[1 / ceiling, ceiling]`.
#[allow(clippy::too_many_arguments)]
pub fn delta_coefficient_check(
    t1: &WeightSpec,
    t2: &WeightSpec,
    p: f64,
    q: f64,
    spec: &GridSpec,
    positions: &[(i32, [i64; 2])],
    ceiling: f64,
) -> Result<DeltaCheck> {
    if positions.is_empty() {
        return Err(Error::Invalid("no coefficient positions to test".into()));
    }
    let s1 = WeightSequence::uniform(t1.clone());
    let s2 = WeightSequence::uniform(t2.clone());
    let mut ratios = Vec::with_capacity(positions.len());
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(k, m) in positions {
        let lambda = CoefficientSet::delta(spec.n, k, m);
        let b = seq_b_norm(&lambda, spec, &s2, p, q)?.starred / seq_b_norm(&lambda, spec, &s1, p, q)?.starred;
        let f = seq_f_norm(&lambda, spec, &s2, p, q)?.starred / seq_f_norm(&lambda, spec, &s1, p, q)?.starred;
        min = min.min(b).min(f);
        max = max.max(b).max(f);
        ratios.push((k, m, b, f));
    }
    Ok(DeltaCheck { pass: min >= 1.0 / ceiling && max <= ceiling, ratios, min, max })
}
