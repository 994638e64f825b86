use super::{log2_exact, GridFunction, GridSpec};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The dyadic cube `2^{-v}([0,1)^n + m)`; `m[1]` is unused when `n = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub v: i32,
    pub m: [i64; 2],
}

impl DyadicCube {
    pub fn new(v: i32, m: [i64; 2]) -> Self {
        DyadicCube { v, m }
    }

    pub fn side(&self) -> f64 {
        (-self.v as f64).exp2()
    }

    /// Cell box `(lo, side)` of the cube clipped to the domain, or `None` when the
    /// cube misses the domain or is finer than one cell.
    pub fn cell_box(&self, spec: &GridSpec) -> Option<([usize; 2], usize)> {
        if self.v > spec.cell_level() {
            return None;
        }
        let r = spec.half_width;
        let h = spec.h();
        let side = self.side();
        let mut lo = [0usize; 2];
        let mut cells = 0usize;
        for axis in 0..spec.n {
            let a = self.m[axis] as f64 * side;
            let (a, b) = (a.max(-r), (a + side).min(r));
            if b <= a {
                return None;
            }
            lo[axis] = ((a + r) / h) as usize;
            cells = ((b - a) / h) as usize;
        }
        Some((lo, cells))
    }
}

fn check_levels(spec: &GridSpec, v_min: i32, v_max: i32) -> Result<()> {
    if v_min > v_max {
        return Err(Error::config("cubes", format!("empty level range [{v_min}, {v_max}]")));
    }
    if v_max > spec.cell_level() {
        return Err(Error::config(
            "cubes.v_max",
            format!("cubes of side 2^-{v_max} are finer than the grid spacing 2^-{}", spec.cell_level()),
        ));
    }
    let coarsest = -(log2_exact(spec.half_width) + 1);
    if v_min < coarsest {
        return Err(Error::config(
            "cubes.v_min",
            format!("cubes of side 2^{} exceed the domain length; v_min must be >= {coarsest}", -v_min),
        ));
    }
    Ok(())
}

fn level_positions(spec: &GridSpec, v: i32) -> Vec<i64> {
    let e = log2_exact(spec.half_width) + v;
    if e >= 0 {
        let m = 1i64 << e;
        (-m..m).collect()
    } else {
        vec![-1, 0]
    }
}

/// Every dyadic cube of each level in `[v_min, v_max]` meeting the domain.
pub fn enumerate_cubes(spec: &GridSpec, v_min: i32, v_max: i32) -> Result<Vec<DyadicCube>> {
    check_levels(spec, v_min, v_max)?;
    let mut out = Vec::new();
    for v in v_min..=v_max {
        let ms = level_positions(spec, v);
        if spec.n == 1 {
            out.extend(ms.iter().map(|&m| DyadicCube::new(v, [m, 0])));
        } else {
            for &a in &ms {
                out.extend(ms.iter().map(|&b| DyadicCube::new(v, [a, b])));
            }
        }
    }
    Ok(out)
}

/// Dyadic cubes over a level window, optionally with their half-side translates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeFamily {
    pub v_min: i32,
    pub v_max: i32,
    pub translates: bool,
}

/// A member of a [`CubeFamily`] resolved to its cell box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyCube {
    pub cube: DyadicCube,
    /// Half-side shift applied per axis (0 or 1).
    pub shift: [u8; 2],
    pub lo: [usize; 2],
    /// Side length in cells.
    pub side: usize,
}

impl FamilyCube {
    pub fn cells(&self, n: usize) -> usize {
        self.side.pow(n as u32)
    }

    /// Flat indices of the cells in the cube.
    pub fn indices(&self, spec: &GridSpec) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.cells(spec.n));
        if spec.n == 1 {
            out.extend(self.lo[0]..self.lo[0] + self.side);
        } else {
            for i in self.lo[0]..self.lo[0] + self.side {
                out.extend((self.lo[1]..self.lo[1] + self.side).map(|j| spec.flat(i, j)));
            }
        }
        out
    }
}

impl CubeFamily {
    pub fn new(v_min: i32, v_max: i32, translates: bool) -> Self {
        CubeFamily { v_min, v_max, translates }
    }

    pub fn validate(&self, spec: &GridSpec) -> Result<()> {
        check_levels(spec, self.v_min, self.v_max)
    }

    /// The grid whose cells are exactly the finest cubes of the family.
    pub fn weight_grid(&self, n: usize, half_width: f64) -> Result<GridSpec> {
        let samples = 2.0 * half_width * (self.v_max as f64).exp2();
        if !(2.0..=(1u64 << 26) as f64).contains(&samples) {
            return Err(Error::config("cubes.v_max", "finest cube level gives an unusable grid size"));
        }
        let spec = GridSpec::new(n, half_width, samples as usize, true)?;
        self.validate(&spec)?;
        Ok(spec)
    }

    pub fn cubes(&self, spec: &GridSpec) -> Result<Vec<FamilyCube>> {
        let mut out = Vec::new();
        self.visit(spec, |c| out.push(c))?;
        Ok(out)
    }

    /// Calls `f` on every member in the order of [`CubeFamily::cubes`] without
    /// materializing the family.
    pub fn visit(&self, spec: &GridSpec, mut f: impl FnMut(FamilyCube)) -> Result<()> {
        check_levels(spec, self.v_min, self.v_max)?;
        let shifts: &[[u8; 2]] = if spec.n == 1 { &[[1, 0]] } else { &[[1, 0], [0, 1], [1, 1]] };
        let mut member = |cube: DyadicCube| {
            let (lo, side) = cube.cell_box(spec).expect("enumerated cubes meet the grid");
            f(FamilyCube { cube, shift: [0, 0], lo, side });
            let clipped = cube.side() > spec.half_width;
            if !self.translates || side < 2 || clipped {
                return;
            }
            for s in shifts {
                let mut t = lo;
                let fits = (0..spec.n).all(|a| {
                    t[a] += s[a] as usize * side / 2;
                    t[a] + side <= spec.samples
                });
                if fits {
                    f(FamilyCube { cube, shift: *s, lo: t, side });
                }
            }
        };
        for v in self.v_min..=self.v_max {
            let ms = level_positions(spec, v);
            if spec.n == 1 {
                ms.iter().for_each(|&m| member(DyadicCube::new(v, [m, 0])));
            } else {
                for &a in &ms {
                    ms.iter().for_each(|&b| member(DyadicCube::new(v, [a, b])));
                }
            }
        }
        Ok(())
    }

    /// Side in cells of the family's largest member on `spec`.
    /// Cubes reaching past the origin are clipped to one half of the domain.
    pub fn max_side(&self, spec: &GridSpec) -> usize {
        let per_level = 1usize << (spec.cell_level() - self.v_min).max(0);
        per_level.min(spec.samples / 2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Agg {
    Sum,
    Min,
    Max,
}

impl Agg {
    fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            Agg::Sum => a + b,
            Agg::Min => a.min(b),
            Agg::Max => a.max(b),
        }
    }
}

/// Aggregates of cell values over all aligned dyadic blocks, built bottom-up by
/// pairwise merging so sums never subtract large partial totals.
pub struct Pyramid {
    n: usize,
    samples: usize,
    agg: Agg,
    levels: Vec<Vec<f64>>,
}

impl Pyramid {
    pub fn build(spec: &GridSpec, cells: &[f64], agg: Agg, max_side: usize) -> Self {
        assert_eq!(cells.len(), spec.len());
        let (n, samples) = (spec.n, spec.samples);
        let mut levels = vec![cells.to_vec()];
        let mut per_axis = samples;
        while (samples / per_axis) * 2 <= max_side.min(samples) {
            let prev = levels.last().unwrap();
            let half = per_axis / 2;
            let next: Vec<f64> = if n == 1 {
                (0..half).map(|j| agg.combine(prev[2 * j], prev[2 * j + 1])).collect()
            } else {
                let mut v = Vec::with_capacity(half * half);
                for i in 0..half {
                    for j in 0..half {
                        let at = |a: usize, b: usize| prev[a * per_axis + b];
                        let top = agg.combine(at(2 * i, 2 * j), at(2 * i, 2 * j + 1));
                        let bottom = agg.combine(at(2 * i + 1, 2 * j), at(2 * i + 1, 2 * j + 1));
                        v.push(agg.combine(top, bottom));
                    }
                }
                v
            };
            levels.push(next);
            per_axis = half;
        }
        Pyramid { n, samples, agg, levels }
    }

    fn at(&self, level: usize, i0: usize, i1: usize) -> f64 {
        let per_axis = self.samples >> level;
        if self.n == 1 {
            self.levels[level][i0]
        } else {
            self.levels[level][i0 * per_axis + i1]
        }
    }

    /// Aggregate over the cube's cells.
    pub fn query(&self, c: &FamilyCube) -> f64 {
        let level = c.side.trailing_zeros() as usize;
        if c.lo[0] % c.side == 0 && c.lo[1] % c.side == 0 {
            return self.at(level, c.lo[0] / c.side, c.lo[1] / c.side);
        }
        let half = c.side / 2;
        let (a, b) = (c.lo[0] / half, c.lo[1] / half);
        let mut acc = self.agg.combine(self.at(level - 1, a, b), self.at(level - 1, a + 1, b));
        if self.n == 2 {
            acc = self.agg.combine(acc, self.at(level - 1, a, b + 1));
            acc = self.agg.combine(acc, self.at(level - 1, a + 1, b + 1));
        }
        acc
    }

    /// Mean over the cube's cells (for a `Sum` pyramid).
    pub fn mean(&self, c: &FamilyCube) -> f64 {
        debug_assert_eq!(self.agg, Agg::Sum);
        self.query(c) / c.cells(self.n) as f64
    }
}

/// `M_{Q,p}(f)`: the `p`-mean of `|f|` over samples in `Q`; `p = inf` gives the max.
pub fn cube_average(f: &GridFunction, q: &DyadicCube, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::Invalid(format!("cube average exponent must be positive, got {p}")));
    }
    let spec = f.spec();
    let (lo, side) = q
        .cell_box(spec)
        .ok_or_else(|| Error::Invalid(format!("cube {q:?} contains no samples")))?;
    let fc = FamilyCube { cube: *q, shift: [0, 0], lo, side };
    let idx = fc.indices(spec);
    if p.is_infinite() {
        return Ok(idx.iter().map(|&i| f.abs_at(i)).fold(0.0, f64::max));
    }
    let s: f64 = idx.iter().map(|&i| f.abs_at(i).powf(p)).sum();
    Ok((s / idx.len() as f64).powf(1.0 / p))
}
