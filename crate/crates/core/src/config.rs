//! Run configuration: grid, windows, corpus, ceilings, fixture matrices and the
//! inputs of the single-shot subcommands. Every field has a default, so `{}`
//! is a valid configuration; [`RunConfig::validate`] checks every module
//! precondition up front and names the offending field.

use crate::error::{Error, Result};
use crate::grid::{CubeFamily, GridSpec};
use crate::lpaley::{make_lp_pair, LPPair};
use crate::spaces::{NormRequest, Space};
use crate::verify::SUITES;
use crate::weights::{WeightSequence, WeightSequenceDef, WeightSpec};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub half_width: f64,
    pub samples: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n: 1, half_width: 8.0, samples: 4096 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevelWindow {
    pub k_min: i32,
    pub k_max: i32,
}

impl Default for LevelWindow {
    fn default() -> Self {
        LevelWindow { k_min: -3, k_max: 8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CubeWindow {
    pub v_min: i32,
    pub v_max: i32,
}

impl Default for CubeWindow {
    fn default() -> Self {
        CubeWindow { v_min: -4, v_max: 9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub size: usize,
    pub seed: u64,
    /// Random coefficient sets for the sequence-norm suite.
    pub coefficient_sets: usize,
    pub coefficients_per_set: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig { size: 32, seed: 20_240_601, coefficient_sets: 64, coefficients_per_set: 48 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ceilings {
    /// `C_c` for every "≈" comparison.
    pub equivalence: f64,
    /// Bound on plain/starred sequence-norm ratios.
    pub sequence: f64,
    /// Allowed growth of a ceiling across a sweep or a resolution doubling.
    pub drift: f64,
    /// Allowed relative change of maximal-inequality ratios under `N` doubling.
    pub maximal_drift: f64,
    /// Largest `A_p` estimate accepted as a hypothesis.
    pub ap: f64,
    pub calderon: f64,
    pub partition: f64,
    pub classical: f64,
}

impl Default for Ceilings {
    fn default() -> Self {
        Ceilings {
            equivalence: 50.0,
            sequence: 20.0,
            drift: 2.0,
            maximal_drift: 0.1,
            ap: 100.0,
            calderon: 1e-6,
            partition: 1e-12,
            classical: 1e-12,
        }
    }
}

/// `(p, theta)` exponent pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub p: f64,
    pub theta: f64,
}

/// Weight fixtures of the verification suites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fixtures {
    /// Power exponents expected to be Muckenhoupt `A_2` weights in 1D.
    pub ap_stable: Vec<f64>,
    /// Power exponents outside `A_2` in 1D.
    pub ap_divergent: Vec<f64>,
    pub holder_weights: Vec<String>,
    pub holder_exponents: Vec<Exponents>,
    pub classical_smoothness: Vec<f64>,
    pub sequence_weights: Vec<String>,
    pub new_norm_sequences: Vec<WeightSequenceDef>,
    /// Frozen levels `j` swept by the new-norm suite.
    pub new_norm_levels: LevelWindow,
    pub coincidence_base: String,
    pub coincidence_scales: Vec<f64>,
    pub coincidence_negative: (String, String),
    pub coincidence_exponents: Exponents,
    /// Cube window of the coincidence checks.
    pub coincidence_cubes: CubeWindow,
    pub maximal_weight: String,
    pub kernel_dyadic: f64,
    pub xclass_sequences: Vec<WeightSequenceDef>,
    pub hardy_weight: String,
}

impl Default for Fixtures {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let uni = |x: &str| WeightSequenceDef::Uniform(x.to_string());
        Fixtures {
            ap_stable: vec![-0.5, 0.0, 0.5, 0.9],
            ap_divergent: vec![1.5, 2.0],
            holder_weights: s(&[
                "const:1",
                "pow:0.3",
                "pow:-0.3",
                "pow:0.5",
                "pow:-0.5",
                "pow:0.9",
                "shiftpow:1,1",
                "prod:[pow:0.3,shiftpow:-0.5,2]",
                "prod:[dyadic:1,pow:-0.2]",
            ]),
            holder_exponents: vec![Exponents { p: 2.0, theta: 1.0 }, Exponents { p: 3.0, theta: 0.5 }],
            classical_smoothness: vec![-1.0, 0.0, 0.5, 2.0],
            sequence_weights: s(&[
                "const:1",
                "pow:0.3",
                "pow:-0.4",
                "prod:[dyadic:0.5,shiftpow:1,1]",
                "prod:[pow:0.3,const:4]",
                "dyadic:-1",
            ]),
            new_norm_sequences: vec![
                uni("pow:0.3"),
                uni("pow:-0.2"),
                WeightSequenceDef::PerLevel {
                    k_min: -3,
                    per_level: (-3..=8)
                        .map(|k: i32| if k % 2 == 0 { "pow:0.3".into() } else { "prod:[pow:0.3,shiftpow:0.2,1]".into() })
                        .collect(),
                },
            ],
            new_norm_levels: LevelWindow { k_min: -3, k_max: 3 },
            coincidence_base: "pow:0.3".into(),
            coincidence_scales: vec![0.1, 1.0, 7.0],
            coincidence_negative: ("pow:0.3".into(), "pow:-0.3".into()),
            coincidence_exponents: Exponents { p: 2.0, theta: 1.0 },
            coincidence_cubes: CubeWindow { v_min: -4, v_max: 16 },
            maximal_weight: "pow:0.3".into(),
            kernel_dyadic: 0.5,
            xclass_sequences: vec![
                uni("const:1"),
                uni("dyadic:3"),
                uni("prod:[dyadic:1,pow:0.3]"),
                uni("prod:[dyadic:-0.5,pow:-0.2]"),
                uni("prod:[dyadic:2,shiftpow:0.4,1]"),
                WeightSequenceDef::PerLevel {
                    k_min: -3,
                    per_level: (-3..=8).map(|k: i32| format!("prod:[pow:0.3,const:{}]", 1 + (k & 1))).collect(),
                },
            ],
            hardy_weight: "pow:0.3".into(),
        }
    }
}

/// Inputs of `lpw norm`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormConfig {
    pub space: Space,
    #[serde(with = "crate::report::num")]
    pub p: f64,
    #[serde(with = "crate::report::num")]
    pub q: f64,
    pub weights: WeightSequenceDef,
    /// Stem of a `<stem>.json` + `<stem>.bin` grid function; corpus member 0 when absent.
    pub input: Option<String>,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig { space: Space::F, p: 2.0, q: 2.0, weights: WeightSequenceDef::Uniform("const:1".into()), input: None }
    }
}

/// Inputs of `lpw weights ap|xclass|rh`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightProbeConfig {
    pub weight: String,
    pub p: f64,
    pub sequence: WeightSequenceDef,
    pub alpha: (f64, f64),
    pub sigma: (f64, f64),
    pub eps: Vec<f64>,
    pub rh_bound: f64,
}

impl Default for WeightProbeConfig {
    fn default() -> Self {
        WeightProbeConfig {
            weight: "pow:0.5".into(),
            p: 2.0,
            sequence: WeightSequenceDef::Uniform("prod:[dyadic:0.5,pow:0.3]".into()),
            alpha: (0.5, 0.5),
            sigma: (2.0, 2.0),
            eps: (1..=20).map(|i| i as f64 * 0.1).collect(),
            rh_bound: 1.05,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub levels: LevelWindow,
    pub cubes: CubeWindow,
    pub corpus: CorpusConfig,
    pub ceilings: Ceilings,
    pub fixtures: Fixtures,
    pub norm: NormConfig,
    pub weights: WeightProbeConfig,
    /// Suites run by `lpw verify all`; every suite when empty.
    pub suites: Vec<String>,
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive and finite, got {v}")))
    }
}

fn above_one(field: &str, v: f64) -> Result<()> {
    if v > 1.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be a finite ratio above 1, got {v}")))
    }
}

fn weight(field: &str, s: &str) -> Result<WeightSpec> {
    WeightSpec::parse(s).map_err(|e| Error::config(field, e.to_string()))
}

fn sequence(field: &str, d: &WeightSequenceDef) -> Result<WeightSequence> {
    d.build().map_err(|e| Error::config(field, e.to_string()))
}

fn exponents(field: &str, e: &Exponents) -> Result<()> {
    positive(&format!("{field}.theta"), e.theta)?;
    positive(&format!("{field}.p"), e.p)?;
    if e.p <= e.theta {
        return Err(Error::config(format!("{field}.p"), format!("needs p > theta, got p = {}, theta = {}", e.p, e.theta)));
    }
    Ok(())
}

fn rewrap(field: &str, e: Error) -> Error {
    match e {
        Error::Config { field: inner, msg } => Error::config(format!("{field}.{inner}"), msg),
        other => Error::config(field, other.to_string()),
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!("config line {} column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.n, self.grid.half_width, self.grid.samples, true)
    }

    pub fn pair(&self) -> Result<LPPair> {
        make_lp_pair(&self.grid_spec()?, self.levels.k_min, self.levels.k_max)
    }

    /// Cube family for sample-grid statistics (Carleson norms, BMO), clamped to one cell.
    pub fn sample_family(&self) -> Result<CubeFamily> {
        let spec = self.grid_spec()?;
        Ok(CubeFamily::new(self.cubes.v_min, self.cubes.v_max.min(spec.cell_level()), true))
    }

    pub fn weight_family(&self) -> CubeFamily {
        CubeFamily::new(self.cubes.v_min, self.cubes.v_max, true)
    }

    pub fn norm_request(&self) -> Result<NormRequest> {
        let req = NormRequest::new(self.norm.space, self.norm.p, self.norm.q, sequence("norm.weights", &self.norm.weights)?);
        req.validate().map_err(|e| rewrap("norm", e))?;
        Ok(req)
    }

    /// Names of the suites selected by `all`.
    pub fn selected_suites(&self) -> Vec<String> {
        if self.suites.is_empty() {
            SUITES.iter().map(|s| s.to_string()).collect()
        } else {
            self.suites.clone()
        }
    }

    /// Checks every precondition the subcommands and suites rely on.
    pub fn validate(&self) -> Result<()> {
        let spec = self.grid_spec()?;
        let pair = make_lp_pair(&spec, self.levels.k_min, self.levels.k_max)?;
        if self.cubes.v_min > self.cubes.v_max {
            return Err(Error::config("cubes", format!("empty cube window [{}, {}]", self.cubes.v_min, self.cubes.v_max)));
        }
        let lowest = -(self.grid.half_width.log2().round() as i32) - 1;
        if self.cubes.v_min < lowest {
            return Err(Error::config("cubes.v_min", format!("cubes larger than the domain; lowest level is {lowest}")));
        }
        self.weight_family().weight_grid(spec.n, spec.half_width).map_err(|e| rewrap("cubes", e))?;
        self.sample_family()?.validate(&spec).map_err(|e| rewrap("cubes", e))?;

        if self.corpus.size == 0 {
            return Err(Error::config("corpus.size", "corpus must not be empty"));
        }
        if self.corpus.coefficient_sets == 0 || self.corpus.coefficients_per_set == 0 {
            return Err(Error::config("corpus.coefficient_sets", "needs at least one non-empty set"));
        }
        let band = pair.admissible_band();
        if !(band.0 < band.1) {
            return Err(Error::config("levels", "the level window leaves an empty admissible band; widen it"));
        }

        let c = &self.ceilings;
        above_one("ceilings.equivalence", c.equivalence)?;
        above_one("ceilings.sequence", c.sequence)?;
        above_one("ceilings.drift", c.drift)?;
        above_one("ceilings.ap", c.ap)?;
        positive("ceilings.maximal_drift", c.maximal_drift)?;
        positive("ceilings.calderon", c.calderon)?;
        positive("ceilings.partition", c.partition)?;
        positive("ceilings.classical", c.classical)?;

        let f = &self.fixtures;
        for (i, w) in f.holder_weights.iter().enumerate() {
            weight(&format!("fixtures.holder_weights[{i}]"), w)?;
        }
        for (i, e) in f.holder_exponents.iter().enumerate() {
            exponents(&format!("fixtures.holder_exponents[{i}]"), e)?;
        }
        for (i, w) in f.sequence_weights.iter().enumerate() {
            let field = format!("fixtures.sequence_weights[{i}]");
            WeightSequence::uniform(weight(&field, w)?)
                .check_admissible(2.0, spec.n)
                .map_err(|e| Error::config(field, e.to_string()))?;
        }
        for (i, d) in f.new_norm_sequences.iter().enumerate() {
            let field = format!("fixtures.new_norm_sequences[{i}]");
            let ts = sequence(&field, d)?;
            if !ts.covers(pair.k_min, pair.k_max) {
                return Err(Error::config(field, "per-level list does not cover the level window"));
            }
            ts.check_admissible(2.0, spec.n).map_err(|e| Error::config(field, e.to_string()))?;
        }
        if f.new_norm_levels.k_min > f.new_norm_levels.k_max {
            return Err(Error::config("fixtures.new_norm_levels", "empty sweep"));
        }
        weight("fixtures.coincidence_base", &f.coincidence_base)?;
        weight("fixtures.coincidence_negative.0", &f.coincidence_negative.0)?;
        weight("fixtures.coincidence_negative.1", &f.coincidence_negative.1)?;
        for (i, s) in f.coincidence_scales.iter().enumerate() {
            positive(&format!("fixtures.coincidence_scales[{i}]"), *s)?;
        }
        exponents("fixtures.coincidence_exponents", &f.coincidence_exponents)?;
        if f.coincidence_exponents.p / f.coincidence_exponents.theta <= 1.0 {
            return Err(Error::config("fixtures.coincidence_exponents", "needs p / theta > 1"));
        }
        let cc = f.coincidence_cubes;
        CubeFamily::new(cc.v_min, cc.v_max, true)
            .weight_grid(spec.n, spec.half_width)
            .map_err(|e| rewrap("fixtures.coincidence_cubes", e))?;
        weight("fixtures.maximal_weight", &f.maximal_weight)?;
        if !f.kernel_dyadic.is_finite() {
            return Err(Error::config("fixtures.kernel_dyadic", "must be finite"));
        }
        for (i, d) in f.xclass_sequences.iter().enumerate() {
            let field = format!("fixtures.xclass_sequences[{i}]");
            let ts = sequence(&field, d)?;
            if !ts.covers(pair.k_min, pair.k_max) {
                return Err(Error::config(field, "per-level list does not cover the level window"));
            }
        }
        weight("fixtures.hardy_weight", &f.hardy_weight)?;

        if let Some(input) = &self.norm.input {
            if input.is_empty() {
                return Err(Error::config("norm.input", "empty path"));
            }
        }
        let req = self.norm_request()?;
        if let Some((lo, hi)) = req.weights.levels() {
            if lo > pair.k_min || hi < pair.k_max {
                return Err(Error::config("norm.weights", "per-level list does not cover the level window"));
            }
        }

        let w = &self.weights;
        weight("weights.weight", &w.weight)?;
        if !(w.p > 1.0 && w.p.is_finite()) {
            return Err(Error::config("weights.p", format!("needs 1 < p < inf, got {}", w.p)));
        }
        sequence("weights.sequence", &w.sequence)?;
        positive("weights.sigma.0", w.sigma.0)?;
        positive("weights.sigma.1", w.sigma.1)?;
        if w.eps.is_empty() {
            return Err(Error::config("weights.eps", "needs at least one exponent"));
        }
        for (i, e) in w.eps.iter().enumerate() {
            positive(&format!("weights.eps[{i}]"), *e)?;
        }
        above_one("weights.rh_bound", w.rh_bound)?;

        for s in &self.suites {
            if s != "all" && !SUITES.contains(&s.as_str()) {
                return Err(Error::config("suites", format!("unknown suite `{s}`; known: all, {}", SUITES.join(", "))));
            }
        }
        Ok(())
    }
}
