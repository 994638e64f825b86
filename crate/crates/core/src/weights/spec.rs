use super::expr::WeightExpr;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A closed-form weight `t_k(x) = c 2^{k d} |x|^a prod_i (c_i + |x|)^{b_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSpec {
    expr: WeightExpr,
    scale: f64,
    dyadic: f64,
    pow: f64,
    shifts: Vec<(f64, f64)>,
}

impl WeightSpec {
    pub fn from_expr(expr: WeightExpr) -> Result<Self> {
        let mut w = WeightSpec { expr: expr.clone(), scale: 1.0, dyadic: 0.0, pow: 0.0, shifts: Vec::new() };
        w.absorb(&expr)?;
        if !(w.scale.is_finite() && w.scale > 0.0) {
            return Err(Error::Invalid(format!("weight `{expr}` has a non-finite constant factor")));
        }
        Ok(w)
    }

    fn absorb(&mut self, e: &WeightExpr) -> Result<()> {
        match e {
            WeightExpr::Pow(a) => self.pow += a,
            WeightExpr::Const(c) => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::Invalid(format!("const must be positive and finite, got {c}")));
                }
                self.scale *= c
            }
            WeightExpr::Dyadic(s) => self.dyadic += s,
            WeightExpr::ShiftPow(a, c) => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::Invalid(format!("shiftpow offset must be positive, got {c}")));
                }
                if *a != 0.0 {
                    self.shifts.push((*a, *c))
                }
            }
            WeightExpr::Prod(items) => {
                for i in items {
                    self.absorb(i)?;
                }
            }
        }
        Ok(())
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::from_expr(s.parse()?)
    }

    pub fn expr(&self) -> &WeightExpr {
        &self.expr
    }

    /// `t^s`, which stays inside the grammar.
    pub fn powf(&self, s: f64) -> WeightSpec {
        Self::from_expr(self.expr.powf(s)).expect("powers of valid weights are valid")
    }

    /// `c t` for `c > 0`.
    pub fn scaled(&self, c: f64) -> WeightSpec {
        Self::from_expr(WeightExpr::Prod(vec![WeightExpr::Const(c), self.expr.clone()]))
            .expect("positive scaling keeps the weight valid")
    }

    /// The weight with its dyadic factor frozen at level `k`.
    pub fn at_level(&self, k: i32) -> WeightSpec {
        let frozen = WeightExpr::Prod(vec![WeightExpr::Const(self.level_factor(k)), self.spatial_expr()]);
        Self::from_expr(frozen).expect("frozen weight is valid")
    }

    fn spatial_expr(&self) -> WeightExpr {
        let mut items = vec![WeightExpr::Pow(self.pow)];
        items.extend(self.shifts.iter().map(|&(a, c)| WeightExpr::ShiftPow(a, c)));
        WeightExpr::Prod(items)
    }

    /// The `k`-dependent scalar factor `c 2^{k d}`.
    pub fn level_factor(&self, k: i32) -> f64 {
        self.scale * (k as f64 * self.dyadic).exp2()
    }

    /// Exponent of the singular factor `|x|^a` at the origin.
    pub fn origin_exponent(&self) -> f64 {
        self.pow
    }

    pub fn is_spatially_constant(&self) -> bool {
        self.pow == 0.0 && self.shifts.is_empty()
    }

    /// `ln` of the spatial part at radius `r`.
    pub fn base_ln(&self, r: f64) -> f64 {
        let mut acc = if self.pow == 0.0 { 0.0 } else { self.pow * r.ln() };
        for &(a, c) in &self.shifts {
            acc += a * (c + r).ln();
        }
        acc
    }

    /// `ln` of the smooth factor `prod (c_i + r)^{b_i}` only.
    pub fn smooth_ln(&self, r: f64) -> f64 {
        self.shifts.iter().map(|&(a, c)| a * (c + r).ln()).sum()
    }

    /// Spatial part at radius `r`.
    pub fn base(&self, r: f64) -> f64 {
        self.base_ln(r).exp()
    }

    pub fn eval(&self, r: f64, k: i32) -> f64 {
        self.level_factor(k) * self.base(r)
    }

    /// Spatial part sampled at every grid point.
    pub fn sample_base(&self, spec: &GridSpec) -> Result<Vec<f64>> {
        if !spec.offset && self.pow != 0.0 {
            return Err(Error::Invalid(format!("weight `{}` is singular at the origin; use an offset grid", self.expr)));
        }
        let out: Vec<f64> = (0..spec.len()).map(|i| self.base(spec.radius(i))).collect();
        if let Some(i) = out.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Invalid(format!("weight `{}` is not positive and finite at sample {i}", self.expr)));
        }
        Ok(out)
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

impl std::str::FromStr for WeightSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// A weight sequence `{t_k}` over a finite level range.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSequence {
    /// One expression for all levels; `dyadic` factors carry the level dependence.
    Uniform(WeightSpec),
    /// One expression per level, starting at `k_min`.
    PerLevel { k_min: i32, specs: Vec<WeightSpec> },
}

impl WeightSequence {
    pub fn uniform(spec: WeightSpec) -> Self {
        WeightSequence::Uniform(spec)
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(WeightSequence::Uniform(WeightSpec::parse(s)?))
    }

    /// Levels the sequence is defined on, `None` when unrestricted.
    pub fn levels(&self) -> Option<(i32, i32)> {
        match self {
            WeightSequence::Uniform(_) => None,
            WeightSequence::PerLevel { k_min, specs } => Some((*k_min, k_min + specs.len() as i32 - 1)),
        }
    }

    pub fn covers(&self, k_min: i32, k_max: i32) -> bool {
        self.levels().map_or(true, |(a, b)| a <= k_min && k_max <= b)
    }

    fn spec_at(&self, k: i32) -> &WeightSpec {
        match self {
            WeightSequence::Uniform(s) => s,
            WeightSequence::PerLevel { k_min, specs } => {
                let i = (k - k_min).clamp(0, specs.len() as i32 - 1) as usize;
                &specs[i]
            }
        }
    }

    /// `t_k` as a level-free weight.
    pub fn level(&self, k: i32) -> WeightSpec {
        self.spec_at(k).at_level(k)
    }

    pub fn eval(&self, k: i32, r: f64) -> f64 {
        self.spec_at(k).eval(r, k)
    }

    /// The sequence with every level replaced by `t_j`.
    pub fn frozen(&self, j: i32) -> WeightSequence {
        WeightSequence::Uniform(self.level(j))
    }

    pub fn scaled(&self, c: f64) -> WeightSequence {
        match self {
            WeightSequence::Uniform(s) => WeightSequence::Uniform(s.scaled(c)),
            WeightSequence::PerLevel { k_min, specs } => {
                WeightSequence::PerLevel { k_min: *k_min, specs: specs.iter().map(|s| s.scaled(c)).collect() }
            }
        }
    }

    /// True when all levels share the spatial part (so `t_k = c_k w`).
    pub fn shares_spatial_part(&self) -> bool {
        match self {
            WeightSequence::Uniform(_) => true,
            WeightSequence::PerLevel { specs, .. } => {
                specs.windows(2).all(|w| w[0].pow == w[1].pow && w[0].shifts == w[1].shifts)
            }
        }
    }

    /// Largest `|a|` among origin exponents, used for admissibility checks.
    pub fn origin_exponents(&self) -> Vec<f64> {
        match self {
            WeightSequence::Uniform(s) => vec![s.pow],
            WeightSequence::PerLevel { specs, .. } => specs.iter().map(|s| s.pow).collect(),
        }
    }

    /// Checks `t_k in L_p^loc`: the origin singularity must satisfy `a p > -n`.
    pub fn check_admissible(&self, p: f64, n: usize) -> Result<()> {
        for a in self.origin_exponents() {
            if p.is_finite() && a * p <= -(n as f64) {
                return Err(Error::Invalid(format!(
                    "weight sequence is not {p}-admissible: |x|^{a} is not locally {p}-integrable in dimension {n}"
                )));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            WeightSequence::Uniform(s) => s.to_string(),
            WeightSequence::PerLevel { k_min, specs } => {
                let items: Vec<String> = specs.iter().map(|s| s.to_string()).collect();
                format!("levels@{k_min}:[{}]", items.join(";"))
            }
        }
    }
}

/// Serialized form of a weight sequence: either a grammar string or a per-level list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSequenceDef {
    Uniform(String),
    PerLevel { k_min: i32, per_level: Vec<String> },
}

impl WeightSequenceDef {
    pub fn build(&self) -> Result<WeightSequence> {
        match self {
            WeightSequenceDef::Uniform(s) => WeightSequence::parse(s),
            WeightSequenceDef::PerLevel { k_min, per_level } => {
                if per_level.is_empty() {
                    return Err(Error::Invalid("per-level weight list is empty".into()));
                }
                let specs = per_level.iter().map(|s| WeightSpec::parse(s)).collect::<Result<Vec<_>>>()?;
                Ok(WeightSequence::PerLevel { k_min: *k_min, specs })
            }
        }
    }
}

/// Per-level samples of a weight sequence on one grid, sharing the spatial
/// part between levels whenever possible.
pub struct SampledWeights {
    seq: WeightSequence,
    shared: Option<Vec<f64>>,
    spec: GridSpec,
}

impl SampledWeights {
    pub fn new(seq: &WeightSequence, spec: &GridSpec) -> Result<Self> {
        let shared = match seq {
            WeightSequence::Uniform(s) => Some(s.sample_base(spec)?),
            WeightSequence::PerLevel { specs, .. } => {
                for s in specs {
                    if !spec.offset && s.pow != 0.0 {
                        return Err(Error::Invalid(format!("weight `{s}` is singular at the origin")));
                    }
                }
                if seq.shares_spatial_part() {
                    Some(specs[0].sample_base(spec)?)
                } else {
                    None
                }
            }
        };
        Ok(SampledWeights { seq: seq.clone(), shared, spec: *spec })
    }

    pub fn sequence(&self) -> &WeightSequence {
        &self.seq
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    fn factor(&self, k: i32) -> f64 {
        match &self.seq {
            WeightSequence::Uniform(s) => s.level_factor(k),
            WeightSequence::PerLevel { .. } => self.seq.spec_at(k).level_factor(k),
        }
    }

    /// `t_k` at one sample.
    pub fn value(&self, k: i32, idx: usize) -> f64 {
        match &self.shared {
            Some(base) => self.factor(k) * base[idx],
            None => self.seq.eval(k, self.spec.radius(idx)),
        }
    }

    /// `t_k` at every sample.
    pub fn level(&self, k: i32) -> Vec<f64> {
        match &self.shared {
            Some(base) => {
                let c = self.factor(k);
                base.iter().map(|b| c * b).collect()
            }
            None => (0..self.spec.len()).map(|i| self.seq.eval(k, self.spec.radius(i))).collect(),
        }
    }
}
