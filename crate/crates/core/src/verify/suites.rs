//! The named suites behind `lpw verify`. Each suite evaluates a family of
//! checks against the configured ceilings and records the full ratio
//! distributions it looked at.

use super::coincidence::{coincidence_check, delta_coefficient_check, holder_floor_check};
use super::corpus::{random_coefficients, Corpus};
use super::equivalence::{ceiling_sweep, equivalence_report, report_from_pairs, EquivalenceReport};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::{weighted_lp_norm, CubeFamily, FamilyCube, GridFunction, GridSpec, VectorSequence};
use crate::lpaley::{
    annulus_minimum, annulus_minimum_on_grid, bands, calderon_residual, frame_bounds, make_lp_pair, partition_check,
    support_violation, BandDecomposition, CoefficientSet, LPPair,
};
use crate::maximal::{
    fefferman_stein_ratio, kernel_sum_ratio, maximal_fn, maximal_fn_brute, weighted_maximal_ratio, Direction,
    MaximalConfig,
};
use crate::report::Num;
use crate::spaces::{
    bmo_norm, hardy_grand_norm, seq_b_norm, seq_f_infty_norm, seq_f_norm, tl_infty_norm, tl_norm, ClassicalBands,
    TestFunctionDictionary, WeightedBands,
};
use crate::weights::{alpha_grid, ap_constant_family, pair_maxima, xclass_fit, SampledWeights, WeightSequence, WeightSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Every suite, in the order `verify all` runs them.
pub const SUITES: [&str; 13] = [
    "muckenhoupt",
    "holder_floor",
    "partition",
    "calderon",
    "classical",
    "sequence",
    "new_norm",
    "coincidence",
    "maximal",
    "xclass",
    "bmo",
    "hardy",
    "self_equivalence",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

/// One comparison of a measured value against a limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: Num,
    pub relation: Relation,
    pub limit: Num,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, limit: f64) -> Self {
        let pass = match relation {
            Relation::AtMost => value <= limit,
            Relation::Below => value < limit,
            Relation::AtLeast => value >= limit,
            Relation::Above => value > limit,
        };
        Check { name: name.into(), value: Num(value), relation, limit: Num(limit), pass }
    }

    /// A yes/no condition, recorded as `1 >= 1` or `0 >= 1`.
    pub fn holds(name: impl Into<String>, cond: bool) -> Self {
        Self::new(name, if cond { 1.0 } else { 0.0 }, Relation::AtLeast, 1.0)
    }
}

/// Labelled values for plotting; `ratio` series feed the suite's min/max.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub ratio: bool,
    pub points: Vec<(String, Num)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub pass: bool,
    /// Extremes over the suite's ratio series; absent when it has none.
    pub min: Option<Num>,
    pub max: Option<Num>,
    pub checks: Vec<Check>,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
}

#[derive(Default)]
struct Suite {
    checks: Vec<Check>,
    series: Vec<Series>,
    notes: Vec<String>,
}

impl Suite {
    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn series(&mut self, name: impl Into<String>, ratio: bool, points: Vec<(String, f64)>) {
        let points = points.into_iter().map(|(l, v)| (l, Num(v))).collect();
        self.series.push(Series { name: name.into(), ratio, points });
    }

    fn report(&mut self, name: &str, r: &EquivalenceReport) {
        self.series(name, true, r.ratios.iter().map(|&(i, v)| (format!("member {i}"), v)).collect());
        if !r.excluded.is_empty() {
            self.notes.push(format!("{name}: members {:?} excluded for a zero norm", r.excluded));
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn finish(self, name: &str) -> SuiteResult {
        let ratios = self.series.iter().filter(|s| s.ratio).flat_map(|s| s.points.iter().map(|p| p.1 .0));
        let (mut min, mut max) = (None::<f64>, None::<f64>);
        for v in ratios {
            min = Some(min.map_or(v, |m| m.min(v)));
            max = Some(max.map_or(v, |m| m.max(v)));
        }
        SuiteResult {
            name: name.to_string(),
            pass: !self.checks.is_empty() && self.checks.iter().all(|c| c.pass),
            min: min.map(Num),
            max: max.map(Num),
            checks: self.checks,
            series: self.series,
            notes: self.notes,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// `max(max, 1/min)` of a ratio family.
fn ceiling(min: f64, max: f64) -> f64 {
    max.max(1.0 / min)
}

fn weight(s: &str) -> Result<WeightSpec> {
    WeightSpec::parse(s)
}

/// Cube family enumerated on its own weight grid.
fn weight_cubes(family: &CubeFamily, n: usize, half_width: f64) -> Result<(GridSpec, Vec<FamilyCube>)> {
    let spec = family.weight_grid(n, half_width)?;
    let cubes = family.cubes(&spec)?;
    Ok((spec, cubes))
}

/// Shared state of a verification run: validated config, grid, pair and corpus.
pub struct Harness {
    pub cfg: RunConfig,
    pub spec: GridSpec,
    pub pair: LPPair,
    pub corpus: Corpus,
}

const AP_EXPONENT: f64 = 2.0;
const STABLE_CHANGE: f64 = 0.05;
const DIVERGENT_GROWTH: f64 = 10.0;
const COINCIDENCE_SPREAD: f64 = 1e3;
const REFUSAL_THETA: f64 = 1.5;
const MAXIMAL_CASES: usize = 1000;
const ALPHA_STEP: f64 = 0.05;

impl Harness {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let spec = cfg.grid_spec()?;
        let pair = cfg.pair()?;
        let corpus = Corpus::for_pair(&pair, cfg.corpus.size, cfg.corpus.seed)?;
        Ok(Harness { cfg, spec, pair, corpus })
    }

    /// Runs one suite; an error inside the suite becomes a failed result.
    pub fn run(&self, name: &str) -> Result<SuiteResult> {
        let mut s = Suite::default();
        let outcome = match name {
            "muckenhoupt" => self.muckenhoupt(&mut s),
            "holder_floor" => self.holder_floor(&mut s),
            "partition" => self.partition(&mut s),
            "calderon" => self.calderon(&mut s),
            "classical" => self.classical(&mut s),
            "sequence" => self.sequence(&mut s),
            "new_norm" => self.new_norm(&mut s),
            "coincidence" => self.coincidence(&mut s),
            "maximal" => self.maximal(&mut s),
            "xclass" => self.xclass(&mut s),
            "bmo" => self.bmo(&mut s),
            "hardy" => self.hardy(&mut s),
            "self_equivalence" => self.self_equivalence(&mut s),
            other => {
                return Err(Error::config("suite", format!("unknown suite `{other}`; known: all, {}", SUITES.join(", "))))
            }
        };
        if let Err(e) = outcome {
            s.check(Check::holds("suite completed", false));
            s.note(format!("aborted: {e}"));
        }
        Ok(s.finish(name))
    }

    fn weight_family_cubes(&self) -> Result<(GridSpec, Vec<FamilyCube>)> {
        weight_cubes(&self.cfg.weight_family(), self.spec.n, self.spec.half_width)
    }

    /// Cube family on the sample grid, clamped to single cells of the base grid
    /// so it is the same on refined grids.
    fn sample_family(&self) -> CubeFamily {
        CubeFamily::new(self.cfg.cubes.v_min, self.cfg.cubes.v_max.min(self.spec.cell_level()), true)
    }

    /// `A_2` estimates of `|x|^a` in one dimension as the finest cube level grows.
    fn muckenhoupt(&self, s: &mut Suite) -> Result<()> {
        let f = &self.cfg.fixtures;
        let c = self.cfg.cubes;
        let r = self.cfg.grid.half_width;
        let at = |v_max: i32| -> Result<(GridSpec, CubeFamily)> {
            let family = CubeFamily::new(c.v_min, v_max, true);
            Ok((family.weight_grid(1, r)?, family))
        };
        let estimate = |a: f64, grid: &(GridSpec, CubeFamily)| -> Result<f64> {
            Ok(ap_constant_family(&weight(&format!("pow:{a}"))?, AP_EXPONENT, &grid.0, &grid.1)?.constant)
        };
        let base = at(c.v_max)?;
        let mut points = Vec::new();
        let mut growth = Vec::new();
        let near = at(c.v_max + 2)?;
        for &a in &f.ap_stable {
            let (lo, hi) = (estimate(a, &base)?, estimate(a, &near)?);
            points.push((format!("pow:{a} v_max={}", c.v_max), lo));
            points.push((format!("pow:{a} v_max={}", c.v_max + 2), hi));
            growth.push((format!("pow:{a} +2 levels"), hi / lo));
            s.check(Check::new(format!("pow:{a}: relative change of A_2 over 2 extra levels"), (hi / lo - 1.0).abs(), Relation::Below, STABLE_CHANGE));
        }
        if !f.ap_divergent.is_empty() {
            let far = at(c.v_max + 10)?;
            for &a in &f.ap_divergent {
                let (lo, hi) = (estimate(a, &base)?, estimate(a, &far)?);
                points.push((format!("pow:{a} v_max={}", c.v_max), lo));
                points.push((format!("pow:{a} v_max={}", c.v_max + 10), hi));
                growth.push((format!("pow:{a} +10 levels"), hi / lo));
                s.check(Check::new(format!("pow:{a}: growth of A_2 over 10 extra levels"), hi / lo, Relation::AtLeast, DIVERGENT_GROWTH));
            }
        }
        s.series("A_2 estimate", false, points);
        s.series("A_2 growth", true, growth);
        s.note("always evaluated in one dimension with p = 2");
        Ok(())
    }

    fn holder_floor(&self, s: &mut Suite) -> Result<()> {
        let f = &self.cfg.fixtures;
        let (spec, cubes) = self.weight_family_cubes()?;
        let mut points = Vec::new();
        for w in &f.holder_weights {
            let t = weight(w)?;
            for e in &f.holder_exponents {
                let (min, at) = holder_floor_check(&t, e.p, e.theta, &spec, &cubes)?;
                let label = format!("{w} p={} theta={}", e.p, e.theta);
                s.check(Check::new(format!("{label}: minimum over cubes"), min, Relation::AtLeast, 1.0 - 1e-12));
                s.note(format!("{label}: minimum at v = {}, m = {:?}", at.v, at.m));
                points.push((label, min));
            }
        }
        s.series("Hölder product minimum", true, points);
        Ok(())
    }

    fn partition(&self, s: &mut Suite) -> Result<()> {
        let (err, count) = partition_check(&self.pair);
        s.check(Check::new("partition of unity: worst deviation from 1", err, Relation::AtMost, self.cfg.ceilings.partition));
        s.note(format!("{count} resolved grid frequencies checked"));
        s.check(Check::new("phi_hat outside 1/2 <= |xi| <= 2", support_violation(1 << 16), Relation::AtMost, 0.0));
        let (phi, psi) = annulus_minimum(1 << 16);
        s.check(Check::new("phi_hat minimum on 3/5 <= |xi| <= 5/3", phi, Relation::Above, 0.0));
        s.check(Check::new("psi_hat minimum on 3/5 <= |xi| <= 5/3", psi, Relation::Above, 0.0));
        s.check(Check::new("psi_hat minimum on the grid annuli", annulus_minimum_on_grid(&self.pair), Relation::Above, 0.0));
        let (lo, hi) = frame_bounds(&self.pair);
        s.series("frame bounds", false, vec![("lower".into(), lo), ("upper".into(), hi)]);
        Ok(())
    }

    fn calderon(&self, s: &mut Suite) -> Result<()> {
        let res = self.corpus.members.par_iter().map(|m| calderon_residual(&m.f, &self.pair)).collect::<Result<Vec<_>>>()?;
        let worst = res.iter().cloned().fold(0.0, f64::max);
        s.check(Check::new("largest reconstruction residual", worst, Relation::AtMost, self.cfg.ceilings.calderon));
        s.series("residual", false, res.into_iter().enumerate().map(|(i, r)| (format!("member {i}"), r)).collect());
        Ok(())
    }

    fn classical(&self, s: &mut Suite) -> Result<()> {
        const EXPONENTS: [(f64, f64); 3] = [(2.0, 2.0), (1.0, f64::INFINITY), (3.0, 1.5)];
        let smooth = &self.cfg.fixtures.classical_smoothness;
        let seqs = smooth
            .iter()
            .map(|v| SampledWeights::new(&WeightSequence::parse(&format!("dyadic:{v}"))?, &self.spec))
            .collect::<Result<Vec<_>>>()?;
        // errors[member][smoothness] = worst relative gap over exponents and both scales
        let errors = self
            .corpus
            .members
            .par_iter()
            .map(|m| {
                let bd = bands(&m.f, &self.pair)?;
                let cb = ClassicalBands::new(&m.f, &self.pair);
                smooth
                    .iter()
                    .zip(&seqs)
                    .map(|(&sm, w)| {
                        let wb = WeightedBands::new(&bd, w)?;
                        let mut worst = 0.0f64;
                        for (p, q) in EXPONENTS {
                            worst = worst.max(rel(wb.besov(p, q)?, cb.besov(sm, p, q)?));
                            worst = worst.max(rel(wb.triebel(p, q)?, cb.triebel(sm, p, q)?));
                        }
                        Ok(worst)
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut points = Vec::new();
        for (si, sm) in smooth.iter().enumerate() {
            let worst = errors.iter().map(|e| e[si]).fold(0.0, f64::max);
            s.check(Check::new(format!("s = {sm}: largest relative gap to the classical norms"), worst, Relation::AtMost, self.cfg.ceilings.classical));
            points.push((format!("s={sm}"), worst));
        }
        s.series("relative gap", false, points);
        Ok(())
    }

    fn sequence(&self, s: &mut Suite) -> Result<()> {
        let cfg = &self.cfg;
        let family = self.sample_family();
        let refined = self.spec.refined();
        let (k_min, k_max) = (self.pair.k_min, self.pair.k_max);
        let ms: Vec<[i64; 2]> = if self.spec.n == 1 { vec![[-1, 0], [0, 0]] } else { vec![[-1, -1], [0, 0], [-1, 0]] };
        let sets: Vec<CoefficientSet> = (0..cfg.corpus.coefficient_sets)
            .map(|i| {
                let seed = cfg.corpus.seed.wrapping_add(1 + i as u64);
                random_coefficients(self.spec.n, self.spec.half_width, (k_min, k_max), cfg.corpus.coefficients_per_set, seed)
            })
            .collect();
        let norms = |lambda: &CoefficientSet, spec: &GridSpec, ts: &WeightSequence| -> Result<[(f64, f64); NORMS]> {
            let b = seq_b_norm(lambda, spec, ts, 2.0, 2.0)?;
            let f = seq_f_norm(lambda, spec, ts, 2.0, 2.0)?;
            let f31 = seq_f_norm(lambda, spec, ts, 3.0, 1.0)?;
            let f14 = seq_f_norm(lambda, spec, ts, 1.5, 4.0)?;
            let fi = seq_f_infty_norm(lambda, spec, ts, 2.0, &family)?;
            Ok([b, f, f31, f14, fi].map(|v| (v.plain, v.starred)))
        };
        const NORMS: usize = 5;
        const NAMES: [&str; NORMS] = ["b_2,2", "f_2,2", "f_3,1", "f_1.5,4", "f_inf,2"];
        let mut exact = Vec::new();
        for w in &cfg.fixtures.sequence_weights {
            let ts = WeightSequence::uniform(weight(w)?);
            let mut worst = 0.0f64;
            for k in k_min..=k_max {
                for &m in &ms {
                    for (plain, starred) in norms(&CoefficientSet::delta(self.spec.n, k, m), &self.spec, &ts)? {
                        worst = worst.max(rel(plain, starred));
                    }
                }
            }
            s.check(Check::new(format!("{w}: single coefficients, plain vs starred"), worst, Relation::AtMost, 1e-12));
            exact.push((w.clone(), worst));

            let ratios = |spec: &GridSpec| -> Result<Vec<[f64; NORMS]>> {
                sets.par_iter()
                    .map(|l| Ok(norms(l, spec, &ts)?.map(|(plain, starred)| plain / starred)))
                    .collect()
            };
            let coarse = ratios(&self.spec)?;
            let fine = ratios(&refined)?;
            for (ni, name) in NAMES.iter().enumerate() {
                let bound = |rs: &[[f64; NORMS]]| {
                    let lo = rs.iter().map(|r| r[ni]).fold(f64::INFINITY, f64::min);
                    let hi = rs.iter().map(|r| r[ni]).fold(f64::NEG_INFINITY, f64::max);
                    ceiling(lo, hi)
                };
                let (c1, c2) = (bound(&coarse), bound(&fine));
                s.check(Check::new(format!("{w}, {name}: plain/starred ceiling C"), c1, Relation::AtMost, cfg.ceilings.sequence));
                s.check(Check::new(format!("{w}, {name}: drift of C under N doubling"), c2.max(c1) / c2.min(c1), Relation::Below, cfg.ceilings.drift));
                s.series(
                    format!("{w} {name} plain/starred"),
                    true,
                    coarse.iter().enumerate().map(|(i, r)| (format!("set {i}"), r[ni])).collect(),
                );
            }
        }
        s.series("single-coefficient relative gap", false, exact);
        Ok(())
    }

    fn new_norm(&self, s: &mut Suite) -> Result<()> {
        let cfg = &self.cfg;
        let family = self.sample_family();
        let js: Vec<i32> = (cfg.fixtures.new_norm_levels.k_min..=cfg.fixtures.new_norm_levels.k_max).collect();
        const NAMES: [&str; 5] = ["F_2,2", "B_2,2", "F_2,inf", "B_2,inf", "F_inf,2"];
        let bds = self.corpus.members.par_iter().map(|m| bands(&m.f, &self.pair)).collect::<Result<Vec<BandDecomposition>>>()?;
        let evaluate = |wb: &WeightedBands| -> Result<[f64; 5]> {
            Ok([
                wb.triebel(2.0, 2.0)?,
                wb.besov(2.0, 2.0)?,
                wb.triebel(2.0, f64::INFINITY)?,
                wb.besov(2.0, f64::INFINITY)?,
                wb.triebel_infty(2.0, &family)?.0,
            ])
        };
        for def in &cfg.fixtures.new_norm_sequences {
            let ts = def.build()?;
            let label = ts.label();
            let full_w = SampledWeights::new(&ts, &self.spec)?;
            let frozen_w = js.iter().map(|&j| SampledWeights::new(&ts.frozen(j), &self.spec)).collect::<Result<Vec<_>>>()?;
            // per member: full norms, then frozen norms per j
            let values = bds
                .par_iter()
                .map(|bd| {
                    let full = evaluate(&WeightedBands::new(bd, &full_w)?)?;
                    let frozen = frozen_w.iter().map(|w| evaluate(&WeightedBands::new(bd, w)?)).collect::<Result<Vec<_>>>()?;
                    Ok((full, frozen))
                })
                .collect::<Result<Vec<_>>>()?;
            for (ni, name) in NAMES.iter().enumerate() {
                let mut reports = Vec::new();
                for (ji, &j) in js.iter().enumerate() {
                    let pairs: Vec<(f64, f64)> = values.iter().map(|(full, frozen)| (frozen[ji][ni], full[ni])).collect();
                    let r = report_from_pairs(&format!("{name}(t_{j})"), &format!("{name}({{t_k}})"), &pairs)?;
                    reports.push((j, r));
                }
                let sweep = ceiling_sweep(&reports);
                let worst = sweep.ceilings.iter().map(|c| c.1).fold(0.0, f64::max);
                s.check(Check::new(format!("{label}, {name}: largest ceiling over j"), worst, Relation::AtMost, cfg.ceilings.equivalence));
                s.check(Check::new(format!("{label}, {name}: ceiling drift across j"), sweep.drift, Relation::Below, cfg.ceilings.drift));
                s.series(
                    format!("{label} {name} ceiling by j"),
                    false,
                    sweep.ceilings.iter().map(|&(j, c)| (format!("j={j}"), c)).collect(),
                );
                let (lo, hi) = reports.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, (_, r)| (a.0.min(r.min), a.1.max(r.max)));
                s.series(format!("{label} {name} ratio extremes"), true, vec![("min".into(), lo), ("max".into(), hi)]);
            }
        }
        Ok(())
    }

    fn lp_pairs(&self, t1: &WeightSpec, t2: &WeightSpec, p: f64, fs: &[GridFunction]) -> Result<Vec<(f64, f64)>> {
        let spec = *fs.first().ok_or_else(|| Error::Invalid("no functions".into()))?.spec();
        let g1 = GridFunction::real(spec, SampledWeights::new(&WeightSequence::uniform(t1.clone()), &spec)?.level(0))?;
        let g2 = GridFunction::real(spec, SampledWeights::new(&WeightSequence::uniform(t2.clone()), &spec)?.level(0))?;
        fs.par_iter().map(|f| Ok((weighted_lp_norm(f, &g1, p)?, weighted_lp_norm(f, &g2, p)?))).collect()
    }

    /// Gaussian bumps of widths `2^{-j}` at the origin and one unit bump away
    /// from it, on a grid fine enough to resolve the narrowest.
    fn spike_ladder(&self) -> Result<Vec<GridFunction>> {
        let spec = GridSpec::new(1, self.spec.half_width, 16 * self.spec.samples.max(4096), true)?;
        let mut out = Vec::new();
        for j in 0..=10 {
            let w = (-(j as f64)).exp2();
            out.push(GridFunction::from_fn(spec, |x| (-0.5 * (x[0] / w).powi(2)).exp())?);
        }
        let c = self.spec.half_width / 2.0;
        out.push(GridFunction::from_fn(spec, |x| (-0.5 * (x[0] - c).powi(2)).exp())?);
        Ok(out)
    }

    fn coincidence(&self, s: &mut Suite) -> Result<()> {
        let cfg = &self.cfg;
        let f = &cfg.fixtures;
        let c_c = cfg.ceilings.equivalence;
        let (p, theta) = (f.coincidence_exponents.p, f.coincidence_exponents.theta);
        let cw = f.coincidence_cubes;
        let (wspec, cubes) = weight_cubes(&CubeFamily::new(cw.v_min, cw.v_max, true), self.spec.n, self.spec.half_width)?;
        let m_sets: Vec<[i64; 2]> = if self.spec.n == 1 { vec![[-1, 0], [0, 0]] } else { vec![[-1, -1], [0, 0]] };
        let positions: Vec<(i32, [i64; 2])> =
            (self.pair.k_min..=cw.v_max).flat_map(|k| m_sets.iter().map(move |&m| (k, m))).collect();
        let fs: Vec<GridFunction> = self.corpus.functions().cloned().collect();

        let base = weight(&f.coincidence_base)?;
        let mut direct_points = Vec::new();
        for &c in &f.coincidence_scales {
            let t2 = base.scaled(c);
            let label = format!("({}, {c}*{})", f.coincidence_base, f.coincidence_base);
            let res = coincidence_check(&base, &t2, p, theta, &wspec, &cubes, c_c, cfg.ceilings.ap)?;
            let delta = delta_coefficient_check(&base, &t2, p, 2.0, &wspec, &positions, c_c)?;
            let lp = report_from_pairs("Lp(t1)", "Lp(t2)", &self.lp_pairs(&base, &t2, p, &fs)?)?;
            s.check(Check::holds(format!("{label}: cube averages comparable"), res.pass));
            s.check(Check::holds(format!("{label}: single-coefficient norms comparable"), delta.pass));
            s.check(Check::holds(format!("{label}: both checks agree"), res.pass == delta.pass));
            s.check(Check::new(format!("{label}: Lp(t2)/Lp(t1) ceiling on the corpus"), ceiling(lp.min, lp.max), Relation::AtMost, c_c * c_c));
            direct_points.push((format!("{label} min"), res.direct.min));
            direct_points.push((format!("{label} max"), res.direct.max));
            s.report(&format!("{label} Lp ratio"), &lp);
        }

        let (n1, n2) = &f.coincidence_negative;
        let (t1, t2) = (weight(n1)?, weight(n2)?);
        let label = format!("({n1}, {n2})");
        let res = coincidence_check(&t1, &t2, p, theta, &wspec, &cubes, c_c, cfg.ceilings.ap)?;
        let delta = delta_coefficient_check(&t1, &t2, p, 2.0, &wspec, &positions, c_c)?;
        s.check(Check::holds(format!("{label}: cube averages not comparable"), !res.pass));
        s.check(Check::new(format!("{label}: spread of M_Q,p ratios over the cube window"), res.direct.spread(), Relation::Above, COINCIDENCE_SPREAD));
        s.check(Check::holds(format!("{label}: single-coefficient norms not comparable"), !delta.pass));
        s.check(Check::holds(format!("{label}: both checks agree"), res.pass == delta.pass));
        direct_points.push((format!("{label} min"), res.direct.min));
        direct_points.push((format!("{label} max"), res.direct.max));
        s.series(
            format!("{label} single-coefficient ratio by level"),
            false,
            delta.ratios.iter().map(|(k, m, b, _)| (format!("k={k} m={:?}", m), *b)).collect(),
        );

        let corpus_lp = report_from_pairs("Lp(t1)", "Lp(t2)", &self.lp_pairs(&t1, &t2, p, &fs)?)?;
        s.note(format!(
            "{label}: Lp ratio spread on the band-limited corpus is {:.4}; the corpus lives on one scale",
            corpus_lp.spread()
        ));
        s.report(&format!("{label} Lp ratio, corpus"), &corpus_lp);
        let ladder = report_from_pairs("Lp(t1)", "Lp(t2)", &self.lp_pairs(&t1, &t2, p, &self.spike_ladder()?)?)?;
        s.check(Check::new(format!("{label}: Lp ratio spread over the spike ladder"), ladder.spread(), Relation::Above, c_c));
        s.report(&format!("{label} Lp ratio, spike ladder"), &ladder);

        let refused = coincidence_check(&t1, &t2, p, REFUSAL_THETA, &wspec, &cubes, c_c, cfg.ceilings.ap);
        if let Err(e) = &refused {
            s.note(format!("{label} at theta = {REFUSAL_THETA}: {e}"));
        }
        s.check(Check::holds(format!("{label} at theta = {REFUSAL_THETA}: refused, A_p/theta hypothesis fails"), refused.is_err()));
        s.series("M_Q,p ratio extremes", true, direct_points);
        Ok(())
    }

    fn maximal(&self, s: &mut Suite) -> Result<()> {
        let cfg = &self.cfg;
        let refined = self.spec.refined();
        let pair2 = make_lp_pair(&refined, self.pair.k_min, self.pair.k_max)?;
        let corpus2 = self.corpus.resampled(&refined)?;
        let ts = WeightSequence::uniform(weight(&cfg.fixtures.maximal_weight)?);
        let sequences = |corpus: &Corpus, pair: &LPPair| -> Result<Vec<VectorSequence>> {
            corpus.members.par_iter().map(|m| VectorSequence::new(pair.k_min, bands(&m.f, pair)?.bands)).collect()
        };
        let mcfg = |spec: &GridSpec| MaximalConfig::new(cfg.cubes.v_min, spec.cell_level(), true);
        let ratios = |fs: &[VectorSequence], spec: &GridSpec| -> Result<Vec<(f64, f64)>> {
            let m = mcfg(spec);
            fs.par_iter()
                .map(|f| Ok((fefferman_stein_ratio(f, 2.0, 2.0, 1.0, &m)?, weighted_maximal_ratio(f, &ts, 2.0, f64::INFINITY, &m)?)))
                .collect()
        };
        let coarse = sequences(&self.corpus, &self.pair)?;
        let r1 = ratios(&coarse, &self.spec)?;
        let r2 = ratios(&sequences(&corpus2, &pair2)?, &refined)?;
        for (idx, name) in [(0usize, "vector-valued maximal"), (1, "weighted maximal")] {
            let get = |r: &[(f64, f64)]| r.iter().map(|x| if idx == 0 { x.0 } else { x.1 }).collect::<Vec<_>>();
            let (a, b) = (get(&r1), get(&r2));
            let sup_a = a.iter().cloned().fold(0.0, f64::max);
            let sup_b = b.iter().cloned().fold(0.0, f64::max);
            let drift = a.iter().zip(&b).map(|(x, y)| (y / x - 1.0).abs()).fold(0.0, f64::max);
            s.check(Check::new(format!("{name}: largest ratio on the corpus"), sup_a, Relation::AtMost, cfg.ceilings.equivalence));
            s.check(Check::new(format!("{name}: largest relative change under N doubling"), drift, Relation::Below, cfg.ceilings.maximal_drift));
            s.note(format!("{name}: sup ratio {sup_a:.6} at N, {sup_b:.6} at 2N"));
            s.series(format!("{name} ratio"), true, a.iter().enumerate().map(|(i, v)| (format!("member {i}"), *v)).collect());
            s.series(format!("{name} ratio at 2N"), true, b.iter().enumerate().map(|(i, v)| (format!("member {i}"), *v)).collect());
        }

        let sd = cfg.fixtures.kernel_dyadic;
        let dyadic = WeightSequence::parse(&format!("dyadic:{sd}"))?;
        let m = mcfg(&self.spec);
        for (kernel, dir, name) in [(sd + 1.0, Direction::Below, "below"), (sd - 1.0, Direction::Above, "above")] {
            let r = coarse
                .par_iter()
                .map(|f| kernel_sum_ratio(f, &dyadic, kernel, 0, dir, 2.0, 2.0, &m))
                .collect::<Result<Vec<_>>>()?;
            let sup = r.iter().cloned().fold(0.0, f64::max);
            s.check(Check::new(format!("dyadic:{sd}, K = {kernel}, sums from {name}: largest ratio"), sup, Relation::AtMost, cfg.ceilings.equivalence));
            s.series(format!("kernel sum ratio, {name}"), true, r.into_iter().enumerate().map(|(i, v)| (format!("member {i}"), v)).collect());
        }

        let gap = self.fast_vs_brute()?;
        s.check(Check::new(format!("fast vs brute-force maximal function, {MAXIMAL_CASES} random cases"), gap, Relation::AtMost, 1e-12));
        Ok(())
    }

    /// Largest relative gap between the fast and brute-force maximal functions.
    fn fast_vs_brute(&self) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.corpus.seed ^ 0x6d61_7869);
        let mut worst = 0.0f64;
        for _ in 0..MAXIMAL_CASES {
            let n = if rng.gen_bool(0.3) { 2 } else { 1 };
            let samples = 1usize << if n == 1 { rng.gen_range(2..=8) } else { rng.gen_range(1..=4) };
            let spec = GridSpec::new(n, 1.0, samples, true)?;
            let len = spec.len();
            let re: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = if rng.gen_bool(0.5) {
                GridFunction::real(spec, re)?
            } else {
                GridFunction::complex(spec, re, (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect())?
            };
            let top = spec.cell_level();
            let lowest = top - samples.trailing_zeros() as i32;
            let v_min = rng.gen_range(lowest..=top);
            let v_max = rng.gen_range(v_min..=top);
            let cfg = MaximalConfig::new(v_min, v_max, rng.gen_bool(0.5));
            let (a, b) = (maximal_fn(&f, &cfg)?, maximal_fn_brute(&f, &cfg)?);
            let scale = b.re().iter().cloned().fold(0.0, f64::max);
            for (x, y) in a.re().iter().zip(b.re()) {
                worst = worst.max((x - y).abs() / scale);
            }
        }
        Ok(worst)
    }

    fn xclass(&self, s: &mut Suite) -> Result<()> {
        let (spec, cubes) = self.weight_family_cubes()?;
        let grid = alpha_grid(-6.0, 6.0, ALPHA_STEP);
        let levels = (self.pair.k_min, self.pair.k_max);
        let mut points = Vec::new();
        for def in &self.cfg.fixtures.xclass_sequences {
            let ts = def.build()?;
            let label = ts.label();
            let pm = pair_maxima(&ts, levels, 2.0, (2.0, 2.0), &spec, &cubes)?;
            let fit = xclass_fit(&pm, &grid, 1e-9)?;
            s.check(Check::new(format!("{label}: alpha_2 - alpha_1 + grid step"), fit.alpha.1 - fit.alpha.0 + fit.grid_step, Relation::AtLeast, 0.0));
            s.note(format!("{label}: alpha = ({}, {}), C1 = {:.6}, C2 = {:.6}", fit.alpha.0, fit.alpha.1, fit.c1, fit.c2));
            points.push((format!("{label} alpha_1"), fit.alpha.0));
            points.push((format!("{label} alpha_2"), fit.alpha.1));
        }
        s.series("fitted alpha", false, points);
        Ok(())
    }

    fn bmo(&self, s: &mut Suite) -> Result<()> {
        let family = self.sample_family();
        let one = WeightSequence::parse("const:1")?;
        let r = equivalence_report(
            ("F_inf,2(t=1)", |f: &GridFunction| tl_infty_norm(f, &self.pair, &one, 2.0, &family)),
            ("BMO", |f: &GridFunction| Ok(bmo_norm(f, &family)?.0)),
            &self.corpus,
        )?;
        s.check(Check::new("BMO / F_inf,2 ceiling on the corpus", ceiling(r.min, r.max), Relation::AtMost, self.cfg.ceilings.equivalence));
        s.report("BMO / F_inf,2", &r);
        Ok(())
    }

    fn hardy(&self, s: &mut Suite) -> Result<()> {
        let ts = WeightSequence::uniform(weight(&self.cfg.fixtures.hardy_weight)?);
        let dict = TestFunctionDictionary::standard(self.spec.n)?;
        let label = ts.label();
        let r = equivalence_report(
            ("F_2,2", |f: &GridFunction| tl_norm(f, &self.pair, &ts, 2.0, 2.0)),
            ("grand maximal", |f: &GridFunction| hardy_grand_norm(f, &self.pair, &ts, 2.0, &dict)),
            &self.corpus,
        )?;
        s.check(Check::new(format!("{label}: grand maximal / F_2,2 ceiling on the corpus"), ceiling(r.min, r.max), Relation::AtMost, self.cfg.ceilings.equivalence));
        s.report("grand maximal / F_2,2", &r);
        Ok(())
    }

    fn self_equivalence(&self, s: &mut Suite) -> Result<()> {
        let one = WeightSequence::parse("const:1")?;
        let norm = |f: &GridFunction| tl_norm(f, &self.pair, &one, 2.0, 2.0);
        let r = equivalence_report(("F_2,2", norm), ("F_2,2", norm), &self.corpus)?;
        s.check(Check::new("largest |ratio - 1|", (r.max - 1.0).abs().max((r.min - 1.0).abs()), Relation::AtMost, 0.0));
        s.report("F_2,2 / F_2,2", &r);
        Ok(())
    }
}
