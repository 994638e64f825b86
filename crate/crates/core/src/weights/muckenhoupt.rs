use super::field::{cube_averages, cube_moments, Avg, CubeAverager, Moment};
use super::{WeightSequence, WeightSpec};
use crate::error::{Error, Result};
use crate::grid::{CubeFamily, FamilyCube, GridSpec};
use serde::{Deserialize, Serialize};

/// Cube attaining a reported supremum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub v: i32,
    pub m: [i64; 2],
    pub shift: [u8; 2],
}

impl From<&FamilyCube> for Witness {
    fn from(c: &FamilyCube) -> Self {
        Witness { v: c.cube.v, m: c.cube.m, shift: c.shift }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConstantEstimate {
    pub constant: f64,
    pub witness: FamilyCube,
}

fn argmax(values: impl Iterator<Item = f64>, cubes: &[FamilyCube]) -> Result<ConstantEstimate> {
    let mut best: Option<(f64, usize)> = None;
    for (i, v) in values.enumerate() {
        if best.map_or(true, |(b, _)| v > b) {
            best = Some((v, i));
        }
    }
    let (constant, i) = best.ok_or_else(|| Error::Invalid("cube family is empty".into()))?;
    Ok(ConstantEstimate { constant, witness: cubes[i] })
}

/// `max_Q M_Q(gamma) M_{Q,p'/p}(gamma^{-1})`, a lower estimate of the `A_p` constant.
pub fn ap_constant(gamma: &WeightSpec, p: f64, spec: &GridSpec, cubes: &[FamilyCube]) -> Result<ConstantEstimate> {
    if !(p > 1.0) || p.is_infinite() {
        return Err(Error::Invalid(format!("A_p needs 1 < p < inf, got {p}; use a1_constant for p = 1")));
    }
    let r = 1.0 / (p - 1.0);
    let avgs = cube_averages(gamma, spec, cubes, &[Avg::of(1.0), Avg::of_inverse(r)]);
    argmax(avgs[0].iter().zip(&avgs[1]).map(|(a, b)| a * b), cubes)
}

/// [`ap_constant`] over a whole cube family, streaming its members instead of
/// listing them; same value and witness.
pub fn ap_constant_family(gamma: &WeightSpec, p: f64, spec: &GridSpec, family: &CubeFamily) -> Result<ConstantEstimate> {
    if !(p > 1.0) || p.is_infinite() {
        return Err(Error::Invalid(format!("A_p needs 1 < p < inf, got {p}; use a1_constant for p = 1")));
    }
    let r = 1.0 / (p - 1.0);
    let avg = CubeAverager::new(gamma, spec, &[Avg::of(1.0), Avg::of_inverse(r)], family.max_side(spec));
    let mut best: Option<(f64, FamilyCube)> = None;
    family.visit(spec, |c| {
        let v = avg.average(0, &c) * avg.average(1, &c);
        if best.map_or(true, |(b, _)| v > b) {
            best = Some((v, c));
        }
    })?;
    let (constant, witness) = best.ok_or_else(|| Error::Invalid("cube family is empty".into()))?;
    Ok(ConstantEstimate { constant, witness })
}

/// `max_Q M_Q(gamma) / min_Q gamma`.
pub fn a1_constant(gamma: &WeightSpec, spec: &GridSpec, cubes: &[FamilyCube]) -> Result<ConstantEstimate> {
    let raw = cube_moments(gamma, spec, cubes, &[Moment::Power(1.0), Moment::Min]);
    argmax(raw[0].iter().zip(&raw[1]).map(|(a, m)| a / m), cubes)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReverseHolderProbe {
    /// Largest probed `eps` whose sup ratio stays within the bound.
    pub eps: Option<f64>,
    pub bound: f64,
    /// `(eps, sup_Q M_{Q,1+eps}(gamma) / M_Q(gamma))` for every probed `eps`.
    pub ratios: Vec<(f64, f64)>,
}

/// Probes `M_{Q,1+eps}(gamma) <= C M_Q(gamma)` over a grid of `eps`.
pub fn reverse_holder_probe(
    gamma: &WeightSpec,
    p: f64,
    spec: &GridSpec,
    cubes: &[FamilyCube],
    eps_grid: &[f64],
    bound: f64,
    ap_ceiling: f64,
) -> Result<ReverseHolderProbe> {
    if eps_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Invalid("reverse Hölder exponents must be positive".into()));
    }
    if p > 1.0 {
        let ap = ap_constant(gamma, p, spec, cubes)?.constant;
        if !(ap <= ap_ceiling) {
            return Err(Error::Invalid(format!("A_{p} estimate {ap} exceeds the ceiling {ap_ceiling}")));
        }
    }
    let mut avgs = vec![Avg::of(1.0)];
    avgs.extend(eps_grid.iter().map(|e| Avg::of(1.0 + e)));
    let vals = cube_averages(gamma, spec, cubes, &avgs);
    let mut ratios = Vec::with_capacity(eps_grid.len());
    for (i, &eps) in eps_grid.iter().enumerate() {
        let sup = vals[i + 1].iter().zip(&vals[0]).map(|(a, b)| a / b).fold(0.0, f64::max);
        ratios.push((eps, sup));
    }
    let eps = ratios.iter().filter(|(_, r)| *r <= bound).map(|(e, _)| *e).fold(None, |acc: Option<f64>, e| {
        Some(acc.map_or(e, |a| a.max(e)))
    });
    Ok(ReverseHolderProbe { eps, bound, ratios })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SameConstant {
    pub constants: Vec<(i32, f64)>,
    pub ratio: f64,
    pub pass: bool,
}

/// Checks that `t_k^p` has the same `A_{p/theta}` estimate on every level.
#[allow(clippy::too_many_arguments)]
pub fn same_constant_check(
    ts: &WeightSequence,
    levels: (i32, i32),
    p: f64,
    theta: f64,
    spec: &GridSpec,
    cubes: &[FamilyCube],
    max_ratio: f64,
) -> Result<SameConstant> {
    if !(p / theta > 1.0) {
        return Err(Error::Invalid(format!("same-constant check needs p/theta > 1, got {}", p / theta)));
    }
    let mut constants = Vec::new();
    for k in levels.0..=levels.1 {
        let tp = ts.level(k).powf(p);
        constants.push((k, ap_constant(&tp, p / theta, spec, cubes)?.constant));
    }
    let hi = constants.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = constants.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let ratio = hi / lo;
    Ok(SameConstant { constants, ratio, pass: ratio <= max_ratio })
}
