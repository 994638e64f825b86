use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::lpaley::{CoefficientSet, LPPair};
use crate::spectral::{Spectral, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberKind {
    MultiBand,
    SingleBand,
    Spike,
    ModulatedGaussian,
}

impl MemberKind {
    const CYCLE: [MemberKind; 4] =
        [MemberKind::MultiBand, MemberKind::SingleBand, MemberKind::Spike, MemberKind::ModulatedGaussian];
}

/// Recipe of one corpus member: its kind and the seed of its generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberRecipe {
    pub index: usize,
    pub kind: MemberKind,
    pub seed: u64,
}

pub struct Member {
    pub recipe: MemberRecipe,
    pub f: GridFunction,
}

/// Real, mean-zero functions whose spectrum lies in a fixed band `[lo, hi]` of
/// `|xi|`. Members are built from their Fourier coefficients, which depend only
/// on the seed, the band and `R`, so the same corpus can be sampled on grids of
/// different resolution.
pub struct Corpus {
    pub spec: GridSpec,
    pub band: (f64, f64),
    pub seed: u64,
    pub members: Vec<Member>,
}

fn member_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Upper half of the frequency lattice with `|xi|` in the band; each entry stands
/// for itself and its conjugate partner.
fn half_lattice(spec: &GridSpec, band: (f64, f64)) -> Vec<([i64; 2], f64)> {
    let unit = PI / spec.half_width;
    let top = (band.1 / unit).floor() as i64;
    let mut out = Vec::new();
    let jy: Vec<i64> = if spec.n == 1 { vec![0] } else { (-top..=top).collect() };
    for j0 in 0..=top {
        for &j1 in &jy {
            if j0 == 0 && j1 <= 0 {
                continue;
            }
            let r = unit * (j0 as f64).hypot(j1 as f64);
            if r >= band.0 && r <= band.1 {
                out.push(([j0, j1], r));
            }
        }
    }
    out
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
}

fn random_point(rng: &mut ChaCha8Rng, spec: &GridSpec) -> [f64; 2] {
    let r = spec.half_width;
    let x = rng.gen_range(-r * 0.75..r * 0.75);
    let y = if spec.n == 2 { rng.gen_range(-r * 0.75..r * 0.75) } else { 0.0 };
    [x, y]
}

/// Octaves `[2^a, 2^{a+1}]` meeting the band.
fn octaves(band: (f64, f64)) -> Vec<(f64, f64)> {
    let a0 = band.0.log2().floor() as i32;
    let a1 = band.1.log2().ceil() as i32;
    (a0..a1)
        .map(|a| ((a as f64).exp2().max(band.0), ((a + 1) as f64).exp2().min(band.1)))
        .filter(|(lo, hi)| lo < hi)
        .collect()
}

fn coefficients(spec: &GridSpec, band: (f64, f64), recipe: MemberRecipe) -> Vec<([i64; 2], C64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);
    let lattice = half_lattice(spec, band);
    let unit = PI / spec.half_width;
    let phase = |j: [i64; 2], x0: [f64; 2]| C64::from_polar(1.0, -unit * (j[0] as f64 * x0[0] + j[1] as f64 * x0[1]));
    let oct = octaves(band);
    match recipe.kind {
        MemberKind::MultiBand => {
            let mut on: Vec<bool> = oct.iter().map(|_| rng.gen_bool(0.5)).collect();
            let forced = rng.gen_range(0..oct.len());
            on[forced] = true;
            let amp: Vec<f64> = oct.iter().map(|_| rng.gen_range(0.25..1.0)).collect();
            lattice
                .iter()
                .filter_map(|&(j, r)| {
                    let o = oct.iter().position(|&(lo, hi)| r >= lo && r <= hi)?;
                    let v = C64::new(gaussian(&mut rng), gaussian(&mut rng)) * amp[o];
                    on[o].then_some((j, v))
                })
                .collect()
        }
        MemberKind::SingleBand => {
            let (lo, hi) = oct[rng.gen_range(0..oct.len())];
            lattice
                .iter()
                .filter(|&&(_, r)| r >= lo && r <= hi)
                .map(|&(j, _)| (j, C64::new(gaussian(&mut rng), gaussian(&mut rng))))
                .collect()
        }
        MemberKind::Spike => {
            let x0 = random_point(&mut rng, spec);
            lattice.iter().map(|&(j, _)| (j, phase(j, x0))).collect()
        }
        MemberKind::ModulatedGaussian => {
            let x0 = random_point(&mut rng, spec);
            let centre = rng.gen_range(band.0.ln()..band.1.ln()).exp();
            let width = centre * rng.gen_range(0.1..0.4);
            lattice
                .iter()
                .map(|&(j, r)| {
                    let g = (-0.5 * ((r - centre) / width).powi(2)).exp();
                    (j, phase(j, x0) * g)
                })
                .collect()
        }
    }
}

/// Samples the real function with the given half-lattice coefficients,
/// normalized to unit `L_2` norm.
fn realize(spec: &GridSpec, modes: &[([i64; 2], C64)]) -> Result<GridFunction> {
    let sp = Spectral::new(spec);
    let energy: f64 = modes.iter().map(|(_, v)| 2.0 * v.norm_sqr()).sum::<f64>() * (2.0 * spec.half_width).powi(spec.n as i32);
    if energy == 0.0 {
        return Err(Error::Invalid("corpus member has an empty spectrum".into()));
    }
    let scale = energy.sqrt().recip();
    let mut c = vec![C64::new(0.0, 0.0); spec.len()];
    for &(j, v) in modes {
        let (Some(a), Some(b)) = (sp.bin(j), sp.bin([-j[0], -j[1]])) else {
            return Err(Error::Invalid(format!("corpus frequency {j:?} is not representable on the grid")));
        };
        c[a] += v * scale;
        c[b] += v.conj() * scale;
    }
    GridFunction::real(*spec, sp.synthesize(&c).iter().map(|v| v.re).collect())
}

impl Corpus {
    /// `size` members cycling through the four kinds, spectrum in `band`.
    pub fn generate(spec: &GridSpec, band: (f64, f64), size: usize, seed: u64) -> Result<Self> {
        let unit = PI / spec.half_width;
        if !(band.0 > 0.0 && band.0 < band.1) {
            return Err(Error::config("corpus.band", format!("band [{}, {}] is empty", band.0, band.1)));
        }
        if band.1 >= unit * (spec.samples / 2) as f64 {
            return Err(Error::config("corpus.band", "band reaches the Nyquist frequency"));
        }
        if half_lattice(spec, band).is_empty() {
            return Err(Error::config("corpus.band", "band contains no grid frequency"));
        }
        let members = (0..size)
            .map(|index| {
                let recipe = MemberRecipe { index, kind: MemberKind::CYCLE[index % 4], seed: member_seed(seed, index) };
                Ok(Member { recipe, f: realize(spec, &coefficients(spec, band, recipe))? })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Corpus { spec: *spec, band, seed, members })
    }

    /// A corpus filling the pair's admissible band.
    pub fn for_pair(pair: &LPPair, size: usize, seed: u64) -> Result<Self> {
        Self::generate(&pair.spec, pair.admissible_band(), size, seed)
    }

    /// The same members sampled on another grid.
    pub fn resampled(&self, spec: &GridSpec) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|m| Ok(Member { recipe: m.recipe, f: realize(spec, &coefficients(spec, self.band, m.recipe))? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Corpus { spec: *spec, band: self.band, seed: self.seed, members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn functions(&self) -> impl Iterator<Item = &GridFunction> {
        self.members.iter().map(|m| &m.f)
    }
}

/// `count` random coefficients on levels `[k_lo, k_hi]` at lattice positions in
/// the central half of the domain. Positions are chosen in physical units, so
/// the set is the same on every grid that resolves the levels.
pub fn random_coefficients(n: usize, half_width: f64, levels: (i32, i32), count: usize, seed: u64) -> CoefficientSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CoefficientSet::new(n);
    while out.len() < count {
        let k = rng.gen_range(levels.0..=levels.1);
        let reach = ((half_width / 2.0) * (k as f64).exp2()).floor().max(1.0) as i64;
        let pos = |rng: &mut ChaCha8Rng| rng.gen_range(-reach..reach);
        let m = [pos(&mut rng), if n == 2 { pos(&mut rng) } else { 0 }];
        let v = C64::new(gaussian(&mut rng), gaussian(&mut rng));
        out.insert(k, m, v);
    }
    out
}
