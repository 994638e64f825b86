use super::{GridFunction, GridSpec};
use crate::error::{Error, Result};

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 {
        Ok(())
    } else {
        Err(Error::Invalid(format!("exponent must be positive, got {p}")))
    }
}

/// Midpoint-rule `L_p` norm of nonnegative samples; `p = inf` gives the max.
pub(crate) fn lp_of_magnitudes(spec: &GridSpec, mags: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        return mags.fold(0.0, f64::max);
    }
    let s: f64 = mags.map(|a| a.powf(p)).sum();
    (s * spec.cell_volume()).powf(1.0 / p)
}

pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(lp_of_magnitudes(f.spec(), (0..f.len()).map(|i| f.abs_at(i)), p))
}

/// `||f gamma | L_p||` with a sampled nonnegative weight.
pub fn weighted_lp_norm(f: &GridFunction, gamma: &GridFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    if f.spec() != gamma.spec() {
        return Err(Error::GridMismatch);
    }
    if let Some(i) = gamma.re().iter().position(|&g| g < 0.0) {
        return Err(Error::Invalid(format!("negative weight sample at index {i}")));
    }
    let mags = (0..f.len()).map(|i| f.abs_at(i) * gamma.abs_at(i));
    Ok(lp_of_magnitudes(f.spec(), mags, p))
}

/// `sup_delta delta |{|f| >= delta}|^{1/p}` over the distinct sample magnitudes.
///
/// The threshold set is closed so that a level set counts toward its own value;
/// this is the limit of the strict-inequality sup as delta approaches a sample
/// magnitude from below.
pub fn weak_lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    if p.is_infinite() {
        return Err(Error::Invalid("weak L_p needs a finite exponent".into()));
    }
    let mut mags = f.magnitudes();
    mags.sort_by(|a, b| b.total_cmp(a));
    let vol = f.spec().cell_volume();
    let mut best = 0.0f64;
    for (i, &delta) in mags.iter().enumerate() {
        if delta <= 0.0 {
            break;
        }
        if i + 1 < mags.len() && mags[i + 1] == delta {
            continue;
        }
        best = best.max(delta * ((i + 1) as f64 * vol).powf(1.0 / p));
    }
    Ok(best)
}

/// Grid functions indexed by consecutive levels `k_min, k_min + 1, ...`.
#[derive(Clone, Debug)]
pub struct VectorSequence {
    pub k_min: i32,
    pub entries: Vec<GridFunction>,
}

impl VectorSequence {
    pub fn new(k_min: i32, entries: Vec<GridFunction>) -> Result<Self> {
        let first = entries.first().ok_or_else(|| Error::Invalid("empty vector sequence".into()))?;
        if entries.iter().any(|e| e.spec() != first.spec()) {
            return Err(Error::GridMismatch);
        }
        Ok(VectorSequence { k_min, entries })
    }

    pub fn k_max(&self) -> i32 {
        self.k_min + self.entries.len() as i32 - 1
    }

    pub fn spec(&self) -> &GridSpec {
        self.entries[0].spec()
    }

    pub fn level(&self, k: i32) -> &GridFunction {
        &self.entries[(k - self.k_min) as usize]
    }

    pub fn levels(&self) -> impl Iterator<Item = (i32, &GridFunction)> {
        self.entries.iter().enumerate().map(move |(i, e)| (self.k_min + i as i32, e))
    }
}

/// Pointwise `l_q` aggregate of nonnegative level arrays.
pub(crate) fn lq_aggregate(levels: &[Vec<f64>], q: f64) -> Vec<f64> {
    let len = levels[0].len();
    if q.is_infinite() {
        let mut acc = vec![0.0f64; len];
        for l in levels {
            for (a, &v) in acc.iter_mut().zip(l) {
                *a = a.max(v);
            }
        }
        acc
    } else {
        let mut acc = vec![0.0f64; len];
        for l in levels {
            for (a, &v) in acc.iter_mut().zip(l) {
                *a += v.powf(q);
            }
        }
        acc.iter().map(|a| a.powf(1.0 / q)).collect()
    }
}

/// `|| (sum_k |f_k|^q)^{1/q} | L_p ||`; `q = inf` uses the pointwise sup.
pub fn lp_lq_norm(fs: &VectorSequence, p: f64, q: f64) -> Result<f64> {
    check_p(p)?;
    check_p(q)?;
    let mags: Vec<Vec<f64>> = fs.entries.iter().map(|e| e.magnitudes()).collect();
    let agg = lq_aggregate(&mags, q);
    Ok(lp_of_magnitudes(fs.spec(), agg.into_iter(), p))
}

/// `L_p(l_q)` norm of already-sampled nonnegative level arrays.
pub(crate) fn lp_lq_of_levels(spec: &GridSpec, levels: &[Vec<f64>], p: f64, q: f64) -> f64 {
    let agg = lq_aggregate(levels, q);
    lp_of_magnitudes(spec, agg.into_iter(), p)
}
