use super::corpus::Corpus;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Ratios `B / A` of two norms over a corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub norm_a: String,
    pub norm_b: String,
    /// `(member index, ratio)` for every member with both norms nonzero.
    pub ratios: Vec<(usize, f64)>,
    pub min: f64,
    pub max: f64,
    pub argmin: usize,
    pub argmax: usize,
    /// Members excluded because a norm vanished.
    pub excluded: Vec<usize>,
}

impl EquivalenceReport {
    /// `max / min`, the spread of the ratio distribution.
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }

    /// True when every ratio lies in `[1 / ceiling, ceiling]`.
    pub fn within(&self, ceiling: f64) -> bool {
        self.min >= 1.0 / ceiling && self.max <= ceiling
    }

    /// The report with every ratio inverted and the norms swapped.
    pub fn inverted(&self) -> Self {
        EquivalenceReport {
            norm_a: self.norm_b.clone(),
            norm_b: self.norm_a.clone(),
            ratios: self.ratios.iter().map(|&(i, r)| (i, 1.0 / r)).collect(),
            min: 1.0 / self.max,
            max: 1.0 / self.min,
            argmin: self.argmax,
            argmax: self.argmin,
            excluded: self.excluded.clone(),
        }
    }
}

/// Builds a report from per-member norm pairs `(a, b)`.
pub fn report_from_pairs(norm_a: &str, norm_b: &str, pairs: &[(f64, f64)]) -> Result<EquivalenceReport> {
    let mut ratios = Vec::new();
    let mut excluded = Vec::new();
    for (i, &(a, b)) in pairs.iter().enumerate() {
        if a == 0.0 || b == 0.0 {
            excluded.push(i);
        } else {
            ratios.push((i, b / a));
        }
    }
    let Some(&first) = ratios.first() else {
        return Err(Error::Invalid(format!("{norm_b} / {norm_a}: every member has a zero norm")));
    };
    let (mut min, mut max) = (first, first);
    for &r in &ratios {
        if r.1 < min.1 {
            min = r;
        }
        if r.1 > max.1 {
            max = r;
        }
    }
    Ok(EquivalenceReport {
        norm_a: norm_a.into(),
        norm_b: norm_b.into(),
        ratios,
        min: min.1,
        max: max.1,
        argmin: min.0,
        argmax: max.0,
        excluded,
    })
}

/// Evaluates both norms on every member in parallel and reports `B / A`.
pub fn equivalence_report<A, B>(norm_a: (&str, A), norm_b: (&str, B), corpus: &Corpus) -> Result<EquivalenceReport>
where
    A: Fn(&GridFunction) -> Result<f64> + Sync,
    B: Fn(&GridFunction) -> Result<f64> + Sync,
{
    let pairs = corpus
        .members
        .par_iter()
        .map(|m| Ok(((norm_a.1)(&m.f)?, (norm_b.1)(&m.f)?)))
        .collect::<Result<Vec<_>>>()?;
    report_from_pairs(norm_a.0, norm_b.0, &pairs)
}

/// Ceiling `max(max, 1/min)` of each report in a sweep and their spread.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CeilingSweep {
    /// `(parameter, ceiling)` per report.
    pub ceilings: Vec<(i32, f64)>,
    /// Largest over smallest ceiling.
    pub drift: f64,
}

pub fn ceiling_sweep(reports: &[(i32, EquivalenceReport)]) -> CeilingSweep {
    let ceilings: Vec<(i32, f64)> = reports.iter().map(|(j, r)| (*j, r.max.max(1.0 / r.min))).collect();
    let hi = ceilings.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = ceilings.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    CeilingSweep { ceilings, drift: hi / lo }
}
