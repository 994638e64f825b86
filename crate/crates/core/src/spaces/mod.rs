//! Weighted Besov and Triebel–Lizorkin quasi-norms, their sequence-space
//! counterparts, and the BMO and grand-maximal Hardy norms.

mod classical;
mod function;
mod hardy;
mod sequence;

pub use classical::{classical_bands, classical_besov, classical_triebel, ClassicalBands};
pub use function::{besov_norm, tl_infty_norm, tl_norm, WeightedBands};
pub use hardy::{bmo_norm, hardy_grand_norm, TestFunctionDictionary, TestProfile};
pub use sequence::{seq_b_norm, seq_f_infty_norm, seq_f_norm, SeqNorms};

use crate::error::{Error, Result};
use crate::grid::{lp_norm, weighted_lp_norm, CubeFamily, GridFunction};
use crate::lpaley::{analyze, LPPair};
use crate::weights::{SampledWeights, WeightSequence};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Space {
    B,
    F,
    #[serde(rename = "F_inf")]
    FInf,
    #[serde(rename = "b")]
    SeqB,
    #[serde(rename = "f")]
    SeqF,
    #[serde(rename = "f_inf")]
    SeqFInf,
    #[serde(rename = "b_star")]
    SeqBStar,
    #[serde(rename = "f_star")]
    SeqFStar,
    #[serde(rename = "f_inf_star")]
    SeqFInfStar,
    Lp,
    Hardy,
    #[serde(rename = "BMO")]
    Bmo,
}

impl Space {
    pub const ALL: [Space; 12] = [
        Space::B,
        Space::F,
        Space::FInf,
        Space::SeqB,
        Space::SeqF,
        Space::SeqFInf,
        Space::SeqBStar,
        Space::SeqFStar,
        Space::SeqFInfStar,
        Space::Lp,
        Space::Hardy,
        Space::Bmo,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Space::B => "B",
            Space::F => "F",
            Space::FInf => "F_inf",
            Space::SeqB => "b",
            Space::SeqF => "f",
            Space::SeqFInf => "f_inf",
            Space::SeqBStar => "b_star",
            Space::SeqFStar => "f_star",
            Space::SeqFInfStar => "f_inf_star",
            Space::Lp => "Lp",
            Space::Hardy => "Hardy",
            Space::Bmo => "BMO",
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Space {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Space::ALL
            .iter()
            .find(|sp| sp.tag() == s)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown space `{s}`")))
    }
}

/// A norm to evaluate: space, exponents and weight sequence.
#[derive(Clone, Debug)]
pub struct NormRequest {
    pub space: Space,
    pub p: f64,
    pub q: f64,
    pub weights: WeightSequence,
}

impl NormRequest {
    pub fn new(space: Space, p: f64, q: f64, weights: WeightSequence) -> Self {
        NormRequest { space, p, q, weights }
    }

    /// Checks the exponent ranges of the requested space.
    pub fn validate(&self) -> Result<()> {
        let (p, q) = (self.p, self.q);
        let pos = |v: f64| v > 0.0;
        match self.space {
            Space::F | Space::SeqF | Space::SeqFStar | Space::Hardy | Space::Lp if !(pos(p) && p.is_finite()) => {
                Err(Error::config("p", format!("{} needs 0 < p < inf, got {p}", self.space)))
            }
            Space::FInf | Space::SeqFInf | Space::SeqFInfStar if !(pos(q) && q.is_finite()) => {
                Err(Error::config("q", format!("{} needs 0 < q < inf, got {q}", self.space)))
            }
            Space::B | Space::SeqB | Space::SeqBStar if !pos(p) => {
                Err(Error::config("p", format!("{} needs p > 0, got {p}", self.space)))
            }
            Space::B | Space::F | Space::SeqB | Space::SeqBStar | Space::SeqF | Space::SeqFStar if !pos(q) => {
                Err(Error::config("q", format!("{} needs q > 0, got {q}", self.space)))
            }
            _ => Ok(()),
        }
    }
}

/// Shared inputs for evaluating norms on one grid.
pub struct NormContext<'a> {
    pub pair: &'a LPPair,
    /// Cubes for the Carleson-type norms and BMO.
    pub family: &'a CubeFamily,
    pub dictionary: &'a TestFunctionDictionary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub space: Space,
    #[serde(with = "crate::report::num")]
    pub p: f64,
    #[serde(with = "crate::report::num")]
    pub q: f64,
    pub weight: String,
    #[serde(with = "crate::report::num")]
    pub value: f64,
    pub levels: (i32, i32),
    pub truncation: String,
}

/// Evaluates one norm of `f`.
pub fn compute_norm(f: &GridFunction, req: &NormRequest, ctx: &NormContext) -> Result<NormRecord> {
    req.validate()?;
    let pair = ctx.pair;
    let (p, q, ts) = (req.p, req.q, &req.weights);
    let spec = &pair.spec;
    let value = match req.space {
        Space::B => besov_norm(f, pair, ts, p, q)?,
        Space::F => tl_norm(f, pair, ts, p, q)?,
        Space::FInf => tl_infty_norm(f, pair, ts, q, ctx.family)?,
        Space::SeqB => seq_b_norm(&analyze(f, pair)?, spec, ts, p, q)?.plain,
        Space::SeqBStar => seq_b_norm(&analyze(f, pair)?, spec, ts, p, q)?.starred,
        Space::SeqF => seq_f_norm(&analyze(f, pair)?, spec, ts, p, q)?.plain,
        Space::SeqFStar => seq_f_norm(&analyze(f, pair)?, spec, ts, p, q)?.starred,
        Space::SeqFInf => seq_f_infty_norm(&analyze(f, pair)?, spec, ts, q, ctx.family)?.plain,
        Space::SeqFInfStar => seq_f_infty_norm(&analyze(f, pair)?, spec, ts, q, ctx.family)?.starred,
        Space::Lp => {
            let w = SampledWeights::new(&ts.frozen(0), spec)?;
            let gamma = GridFunction::real(*spec, w.level(0))?;
            weighted_lp_norm(f, &gamma, p)?
        }
        Space::Hardy => hardy_grand_norm(f, pair, ts, p, ctx.dictionary)?,
        Space::Bmo => bmo_norm(f, ctx.family)?.0,
    };
    let truncation = match req.space {
        Space::Lp => "none".to_string(),
        Space::Bmo => format!("cubes v in [{}, {}]", ctx.family.v_min, ctx.family.v_max),
        Space::FInf | Space::SeqFInf | Space::SeqFInfStar => format!(
            "levels k in [{}, {}]; cubes v in [{}, {}]",
            pair.k_min, pair.k_max, ctx.family.v_min, ctx.family.v_max
        ),
        Space::Hardy => format!("levels k in [{}, {}]; {} test profiles", pair.k_min, pair.k_max, ctx.dictionary.members.len()),
        _ => format!("levels k in [{}, {}]", pair.k_min, pair.k_max),
    };
    Ok(NormRecord {
        space: req.space,
        p,
        q,
        weight: ts.label(),
        value,
        levels: (pair.k_min, pair.k_max),
        truncation,
    })
}

/// Unweighted `L_p` norm; re-exported for callers that only hold a space tag.
pub fn plain_lp(f: &GridFunction, p: f64) -> Result<f64> {
    lp_norm(f, p)
}
