use crate::error::{Error, Result};
use crate::grid::{lp_lq_of_levels, lp_of_magnitudes, Agg, CubeFamily, FamilyCube, GridSpec, Pyramid};
use crate::lpaley::{bands, BandDecomposition, LPPair};
use crate::grid::GridFunction;
use crate::weights::{SampledWeights, WeightSequence, Witness};

/// `|t_k (phi_k * f)|` sampled per level.
pub struct WeightedBands {
    pub spec: GridSpec,
    pub k_min: i32,
    pub levels: Vec<Vec<f64>>,
}

impl WeightedBands {
    pub fn new(bd: &BandDecomposition, w: &SampledWeights) -> Result<Self> {
        if w.spec() != &bd.pair.spec {
            return Err(Error::GridMismatch);
        }
        let levels = bd
            .pair
            .levels()
            .zip(&bd.bands)
            .map(|(k, b)| {
                let t = w.level(k);
                (0..b.len()).map(|i| t[i] * b.abs_at(i)).collect()
            })
            .collect();
        Ok(WeightedBands { spec: bd.pair.spec, k_min: bd.pair.k_min, levels })
    }

    pub fn of(f: &GridFunction, pair: &LPPair, ts: &WeightSequence) -> Result<Self> {
        let w = SampledWeights::new(ts, &pair.spec)?;
        Self::new(&bands(f, pair)?, &w)
    }

    pub fn k_max(&self) -> i32 {
        self.k_min + self.levels.len() as i32 - 1
    }

    /// `(sum_k ||t_k (phi_k * f)| L_p||^q)^{1/q}`.
    pub fn besov(&self, p: f64, q: f64) -> Result<f64> {
        check_exponent("p", p, true)?;
        check_exponent("q", q, true)?;
        let per_level: Vec<f64> = self.levels.iter().map(|l| lp_of_magnitudes(&self.spec, l.iter().copied(), p)).collect();
        Ok(lq_sum(&per_level, q))
    }

    /// `|| (sum_k |t_k (phi_k * f)|^q)^{1/q} | L_p ||`.
    pub fn triebel(&self, p: f64, q: f64) -> Result<f64> {
        check_exponent("p", p, false)?;
        check_exponent("q", q, true)?;
        Ok(lp_lq_of_levels(&self.spec, &self.levels, p, q))
    }

    /// Carleson-type sup over the family's cubes `P` of the `q`-mean over `P`
    /// of `sum_{k >= -log2 l(P)} |t_k (phi_k * f)|^q`.
    pub fn triebel_infty(&self, q: f64, family: &CubeFamily) -> Result<(f64, Option<Witness>)> {
        check_exponent("q", q, false)?;
        let powered: Vec<Vec<f64>> = self.levels.iter().map(|l| l.iter().map(|v| v.powf(q)).collect()).collect();
        let (sup, w) = carleson_sup(&self.spec, self.k_min, &powered, family)?;
        Ok((sup.powf(1.0 / q), w))
    }
}

pub(crate) fn check_exponent(name: &str, v: f64, allow_inf: bool) -> Result<()> {
    if !(v > 0.0) || (v.is_infinite() && !allow_inf) {
        let range = if allow_inf { "(0, inf]" } else { "(0, inf)" };
        return Err(Error::Invalid(format!("{name} must lie in {range}, got {v}")));
    }
    Ok(())
}

/// `(sum |a_i|^q)^{1/q}`, or the max when `q = inf`.
pub(crate) fn lq_sum(values: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        values.iter().fold(0.0, |a, v| a.max(v.abs()))
    } else {
        values.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `sup_P |P|^{-1} int_P sum_{k >= v(P)} a_k` over the family, where `a_k` are
/// per-level cell arrays starting at `k_min`.
pub(crate) fn carleson_sup(
    spec: &GridSpec,
    k_min: i32,
    a: &[Vec<f64>],
    family: &CubeFamily,
) -> Result<(f64, Option<Witness>)> {
    let cubes = family.cubes(spec)?;
    let k_max = k_min + a.len() as i32 - 1;
    let mut best = (0.0f64, None);
    // Suffix sums over levels, built from the finest level down.
    let mut suffix = vec![0.0f64; spec.len()];
    let mut next_k = k_max;
    for v in (family.v_min..=family.v_max).rev() {
        while next_k >= v.max(k_min) {
            for (s, x) in suffix.iter_mut().zip(&a[(next_k - k_min) as usize]) {
                *s += x;
            }
            next_k -= 1;
        }
        let at_level: Vec<&FamilyCube> = cubes.iter().filter(|c| c.cube.v == v).collect();
        let max_side = at_level.iter().map(|c| c.side).max().unwrap_or(1);
        let pyr = Pyramid::build(spec, &suffix, Agg::Sum, max_side);
        for c in at_level {
            let m = pyr.mean(c);
            if m > best.0 {
                best = (m, Some(Witness::from(c)));
            }
        }
    }
    Ok(best)
}

pub fn besov_norm(f: &GridFunction, pair: &LPPair, ts: &WeightSequence, p: f64, q: f64) -> Result<f64> {
    WeightedBands::of(f, pair, ts)?.besov(p, q)
}

pub fn tl_norm(f: &GridFunction, pair: &LPPair, ts: &WeightSequence, p: f64, q: f64) -> Result<f64> {
    if p.is_infinite() {
        return Err(Error::Invalid("p = inf needs tl_infty_norm".into()));
    }
    WeightedBands::of(f, pair, ts)?.triebel(p, q)
}

pub fn tl_infty_norm(f: &GridFunction, pair: &LPPair, ts: &WeightSequence, q: f64, family: &CubeFamily) -> Result<f64> {
    if q.is_infinite() {
        return Err(Error::Invalid("the Carleson-type norm needs finite q".into()));
    }
    Ok(WeightedBands::of(f, pair, ts)?.triebel_infty(q, family)?.0)
}
