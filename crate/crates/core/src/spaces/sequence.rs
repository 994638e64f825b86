//! Sequence norms of φ-transform coefficients, each in two forms: the plain
//! one, which integrates `t_k` cell by cell over the coefficient cubes, and
//! the starred one, which replaces `t_k` on `Q_{k,m}` by the cube norm
//! `t_{k,m} = ||t_k | L_r(Q_{k,m})||`. Both read the same per-cell quadrature
//! of `t_k^r`, so they coincide exactly on a single coefficient.

use super::function::{carleson_sup, check_exponent, lq_sum};
use crate::error::{Error, Result};
use crate::grid::{lp_of_magnitudes, CubeFamily, DyadicCube, FamilyCube, GridSpec};
use crate::lpaley::CoefficientSet;
use crate::weights::{cell_moments_at, Avg, WeightSequence};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeqNorms {
    pub plain: f64,
    pub starred: f64,
}

struct Entry {
    cube: FamilyCube,
    abs: f64,
}

/// Nonzero coefficients of one level with their resolved cubes.
struct Level {
    k: i32,
    entries: Vec<Entry>,
}

fn levels(lambda: &CoefficientSet, spec: &GridSpec) -> Result<Vec<Level>> {
    if lambda.n != spec.n {
        return Err(Error::Invalid(format!("coefficients are {}-dimensional, grid is {}-dimensional", lambda.n, spec.n)));
    }
    let mut out = Vec::new();
    for k in lambda.levels() {
        let full = ((spec.cell_level() - k) as f64).exp2() as usize;
        let mut entries = Vec::new();
        for (m, v) in lambda.level(k) {
            if v.norm() == 0.0 {
                continue;
            }
            let cube = DyadicCube::new(k, m);
            let (lo, side) = cube
                .cell_box(spec)
                .filter(|&(_, side)| side == full)
                .ok_or_else(|| Error::Invalid(format!("coefficient cube (k = {k}, m = {m:?}) is not inside the grid")))?;
            entries.push(Entry { cube: FamilyCube { cube, shift: [0, 0], lo, side }, abs: v.norm() });
        }
        if !entries.is_empty() {
            out.push(Level { k, entries });
        }
    }
    Ok(out)
}

/// Per-cell raw moments of `t_k^r` (or the node maximum for `r = inf`),
/// evaluated only on cells covered by coefficient cubes and stored sparsely.
/// Spatial quadrature is shared between levels when the sequence allows it.
struct CellWeights<'a> {
    ts: &'a WeightSequence,
    spec: GridSpec,
    avg: Avg,
    shared: Option<Vec<f64>>,
}

fn covered(spec: &GridSpec, levels: &[&Level]) -> Vec<usize> {
    let mut seen = vec![false; spec.len()];
    let mut out = Vec::new();
    for level in levels {
        for e in &level.entries {
            for i in e.cube.indices(spec) {
                if !seen[i] {
                    seen[i] = true;
                    out.push(i);
                }
            }
        }
    }
    out
}

impl<'a> CellWeights<'a> {
    fn new(ts: &'a WeightSequence, spec: &GridSpec, r: f64, levels: &[Level]) -> Self {
        let avg = Avg::of(r);
        let mut cw = CellWeights { ts, spec: *spec, avg, shared: None };
        if ts.shares_spatial_part() {
            let all: Vec<&Level> = levels.iter().collect();
            cw.shared = Some(cw.raw_at(&ts.level(0), &covered(spec, &all)));
        }
        cw
    }

    fn raw_at(&self, w: &crate::weights::WeightSpec, cells: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0f64; self.spec.len()];
        for (&i, v) in cells.iter().zip(cell_moments_at(w, &self.spec, self.avg.moment(), cells)) {
            out[i] = v;
        }
        out
    }

    /// Per-cell `t_k` values (zero off the level's cubes) and the cube norms
    /// `||t_k | L_r(Q_{k,m})||` of the level's entries, from the same raw moments.
    fn level(&self, level: &Level) -> (Vec<f64>, Vec<f64>) {
        let w = self.ts.level(level.k);
        let f = w.level_factor(0);
        let own;
        let raw = match &self.shared {
            Some(base) => base,
            None => {
                own = self.raw_at(&w, &covered(&self.spec, &[level]));
                &own
            }
        };
        let mut t = vec![0.0f64; self.spec.len()];
        let r = self.avg.sigma;
        let norms = level
            .entries
            .iter()
            .map(|e| {
                let mut acc = if r.is_infinite() { f64::NEG_INFINITY } else { 0.0 };
                let mut count = 0usize;
                for i in e.cube.indices(&self.spec) {
                    t[i] = self.avg.finish(raw[i]) * f;
                    acc = if r.is_infinite() { acc.max(raw[i]) } else { acc + raw[i] };
                    count += 1;
                }
                if r.is_infinite() {
                    self.avg.finish(acc) * f
                } else {
                    let vol = (count as f64 * self.spec.cell_volume()).powf(1.0 / r);
                    self.avg.finish(acc / count as f64) * f * vol
                }
            })
            .collect();
        (t, norms)
    }
}

fn dyadic(k: i32, e: f64) -> f64 {
    (k as f64 * e).exp2()
}

/// `b`-type norm: `l_q` over levels of `2^{kn/2} || sum_m t_k lambda_{k,m} chi_{k,m} | L_p ||`.
pub fn seq_b_norm(lambda: &CoefficientSet, spec: &GridSpec, ts: &WeightSequence, p: f64, q: f64) -> Result<SeqNorms> {
    check_exponent("p", p, true)?;
    check_exponent("q", q, true)?;
    let lv = levels(lambda, spec)?;
    let w = CellWeights::new(ts, spec, p, &lv);
    let n = spec.n as f64;
    let mut plain = Vec::new();
    let mut starred = Vec::new();
    for level in lv {
        let (t, tkm) = w.level(&level);
        let mut mags = vec![0.0f64; spec.len()];
        for e in &level.entries {
            for i in e.cube.indices(spec) {
                mags[i] = e.abs * t[i];
            }
        }
        plain.push(dyadic(level.k, n / 2.0) * lp_of_magnitudes(spec, mags.into_iter(), p));
        let terms: Vec<f64> = level.entries.iter().zip(&tkm).map(|(e, t)| e.abs * t).collect();
        starred.push(dyadic(level.k, n / 2.0) * lq_sum(&terms, p));
    }
    Ok(SeqNorms { plain: lq_sum(&plain, q), starred: lq_sum(&starred, q) })
}

/// Adds `term(entry, cell)` to the pointwise `l_q` accumulator over every cell of every entry.
fn accumulate(acc: &mut [f64], spec: &GridSpec, level: &Level, q: f64, term: impl Fn(usize, usize) -> f64) {
    for (ei, e) in level.entries.iter().enumerate() {
        for i in e.cube.indices(spec) {
            let v = term(ei, i);
            if q.is_infinite() {
                acc[i] = acc[i].max(v);
            } else {
                acc[i] += v.powf(q);
            }
        }
    }
}

fn finish_lq(acc: Vec<f64>, q: f64) -> impl Iterator<Item = f64> {
    acc.into_iter().map(move |a| if q.is_infinite() { a } else { a.powf(1.0 / q) })
}

/// `f`-type norm `|| (sum_{k,m} 2^{knq/2} t_k^q |lambda_{k,m}|^q chi_{k,m})^{1/q} | L_p ||`.
pub fn seq_f_norm(lambda: &CoefficientSet, spec: &GridSpec, ts: &WeightSequence, p: f64, q: f64) -> Result<SeqNorms> {
    check_exponent("p", p, false)?;
    check_exponent("q", q, true)?;
    let lv = levels(lambda, spec)?;
    let w = CellWeights::new(ts, spec, p, &lv);
    let n = spec.n as f64;
    let mut plain = vec![0.0f64; spec.len()];
    let mut starred = vec![0.0f64; spec.len()];
    for level in lv {
        let (t, tkm) = w.level(&level);
        let c = dyadic(level.k, n / 2.0);
        accumulate(&mut plain, spec, &level, q, |ei, i| c * t[i] * level.entries[ei].abs);
        let cs = dyadic(level.k, n * (0.5 + 1.0 / p));
        accumulate(&mut starred, spec, &level, q, |ei, _| cs * tkm[ei] * level.entries[ei].abs);
    }
    Ok(SeqNorms {
        plain: lp_of_magnitudes(spec, finish_lq(plain, q), p),
        starred: lp_of_magnitudes(spec, finish_lq(starred, q), p),
    })
}

/// Carleson-type norm `sup_P (|P|^{-1} int_P sum_{k >= -log2 l(P)} sum_m
/// 2^{knq/2} t_k^q |lambda_{k,m}|^q chi_{k,m})^{1/q}` over the family's cubes.
pub fn seq_f_infty_norm(
    lambda: &CoefficientSet,
    spec: &GridSpec,
    ts: &WeightSequence,
    q: f64,
    family: &CubeFamily,
) -> Result<SeqNorms> {
    check_exponent("q", q, false)?;
    let lv = levels(lambda, spec)?;
    let (Some(first), Some(last)) = (lv.first(), lv.last()) else {
        return Ok(SeqNorms { plain: 0.0, starred: 0.0 });
    };
    let (k_min, k_max) = (first.k, last.k);
    let w = CellWeights::new(ts, spec, q, &lv);
    let n = spec.n as f64;
    let count = (k_max - k_min + 1) as usize;
    let mut plain = vec![vec![0.0f64; spec.len()]; count];
    let mut starred = vec![vec![0.0f64; spec.len()]; count];
    for level in &lv {
        let slot = (level.k - k_min) as usize;
        let (t, tkm) = w.level(level);
        let c = dyadic(level.k, n / 2.0);
        accumulate(&mut plain[slot], spec, level, q, |ei, i| c * t[i] * level.entries[ei].abs);
        let cs = dyadic(level.k, n * (0.5 + 1.0 / q));
        accumulate(&mut starred[slot], spec, level, q, |ei, _| cs * tkm[ei] * level.entries[ei].abs);
    }
    let (a, _) = carleson_sup(spec, k_min, &plain, family)?;
    let (b, _) = carleson_sup(spec, k_min, &starred, family)?;
    Ok(SeqNorms { plain: a.powf(1.0 / q), starred: b.powf(1.0 / q) })
}
