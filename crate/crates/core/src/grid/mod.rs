//! Sampled functions on the periodic grid over `[-R, R)^n`, dyadic cubes and
//! the Lebesgue-type norms built on midpoint quadrature.

mod cubes;
mod io;
mod norms;

pub use cubes::{cube_average, enumerate_cubes, Agg, CubeFamily, DyadicCube, FamilyCube, Pyramid};
pub use io::{GridSidecar, GRID_SIDECAR_VERSION};
pub use norms::{lp_lq_norm, lp_norm, weak_lp_norm, weighted_lp_norm, VectorSequence};
pub(crate) use norms::{lp_lq_of_levels, lp_of_magnitudes};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// True when `x` is a positive, normal power of two.
pub fn is_pow2(x: f64) -> bool {
    x > 0.0 && x.is_normal() && (x.to_bits() & ((1u64 << 52) - 1)) == 0
}

/// Exact base-2 logarithm of a power of two.
pub fn log2_exact(x: f64) -> i32 {
    debug_assert!(is_pow2(x));
    ((x.to_bits() >> 52) & 0x7ff) as i32 - 1023
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    /// Half-width `R` of the periodic domain.
    pub half_width: f64,
    /// Samples `N` per axis.
    pub samples: usize,
    /// Half-cell shift: samples at `-R + (i + 1/2) h`.
    pub offset: bool,
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64, samples: usize, offset: bool) -> Result<Self> {
        let spec = GridSpec { n, half_width, samples, offset };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n != 1 && self.n != 2 {
            return Err(Error::config("grid.n", format!("dimension must be 1 or 2, got {}", self.n)));
        }
        if !is_pow2(self.half_width) {
            return Err(Error::config(
                "grid.half_width",
                format!("must be a power of two, got {}", self.half_width),
            ));
        }
        if self.samples < 2 || !self.samples.is_power_of_two() {
            return Err(Error::config(
                "grid.samples",
                format!("must be a power of two >= 2, got {}", self.samples),
            ));
        }
        if self.samples > 1 << 26 || (self.n == 2 && self.samples > 1 << 13) {
            return Err(Error::config("grid.samples", "grid too large"));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.samples as f64
    }

    /// The dyadic level `v` whose cubes are single cells, `2^{-v} = h`.
    pub fn cell_level(&self) -> i32 {
        -log2_exact(self.h())
    }

    /// Total number of samples `N^n`.
    pub fn len(&self) -> usize {
        self.samples.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sample coordinate along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        let shift = if self.offset { 0.5 } else { 0.0 };
        -self.half_width + (i as f64 + shift) * self.h()
    }

    /// Per-axis indices of a flat (row-major) sample index.
    pub fn axes(&self, idx: usize) -> [usize; 2] {
        if self.n == 1 {
            [idx, 0]
        } else {
            [idx / self.samples, idx % self.samples]
        }
    }

    pub fn flat(&self, i0: usize, i1: usize) -> usize {
        if self.n == 1 {
            i0
        } else {
            i0 * self.samples + i1
        }
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        let [a, b] = self.axes(idx);
        if self.n == 1 {
            [self.coord(a), 0.0]
        } else {
            [self.coord(a), self.coord(b)]
        }
    }

    /// Euclidean distance of a sample to the origin.
    pub fn radius(&self, idx: usize) -> f64 {
        let [x, y] = self.point(idx);
        x.hypot(y)
    }

    /// Measure of one cell, `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.n as i32)
    }

    pub fn refined(&self) -> Self {
        GridSpec { samples: self.samples * 2, ..*self }
    }
}

/// Samples of a real or complex function on a [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    re: Vec<f64>,
    im: Option<Vec<f64>>,
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::Invalid(format!("non-finite sample at index {i}"))),
        None => Ok(()),
    }
}

impl GridFunction {
    pub fn real(spec: GridSpec, re: Vec<f64>) -> Result<Self> {
        if re.len() != spec.len() {
            return Err(Error::Invalid(format!("expected {} samples, got {}", spec.len(), re.len())));
        }
        check_finite(&re)?;
        Ok(GridFunction { spec, re, im: None })
    }

    pub fn complex(spec: GridSpec, re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if im.len() != re.len() {
            return Err(Error::Invalid("real and imaginary parts differ in length".into()));
        }
        check_finite(&im)?;
        let mut f = Self::real(spec, re)?;
        f.im = Some(im);
        Ok(f)
    }

    pub fn zeros(spec: GridSpec) -> Self {
        GridFunction { spec, re: vec![0.0; spec.len()], im: None }
    }

    pub fn constant(spec: GridSpec, c: f64) -> Self {
        GridFunction { spec, re: vec![c; spec.len()], im: None }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(spec: GridSpec, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let re = (0..spec.len()).map(|i| f(spec.point(i))).collect();
        Self::real(spec, re)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> Option<&[f64]> {
        self.im.as_deref()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_none()
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn abs_at(&self, i: usize) -> f64 {
        match &self.im {
            None => self.re[i].abs(),
            Some(im) => self.re[i].hypot(im[i]),
        }
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.abs_at(i)).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        GridFunction {
            spec: self.spec,
            re: self.re.iter().map(|v| v * c).collect(),
            im: self.im.as_ref().map(|im| im.iter().map(|v| v * c).collect()),
        }
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch);
        }
        let re = self.re.iter().zip(&other.re).map(|(a, b)| a + b).collect();
        let im = match (&self.im, &other.im) {
            (None, None) => None,
            (a, b) => {
                let zero = vec![0.0; self.len()];
                let a = a.as_ref().unwrap_or(&zero);
                let b = b.as_ref().unwrap_or(&zero);
                Some(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
        };
        Ok(GridFunction { spec: self.spec, re, im })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    /// Pointwise product with a real function on the same grid.
    pub fn mul_real(&self, w: &[f64]) -> Result<Self> {
        if w.len() != self.len() {
            return Err(Error::GridMismatch);
        }
        Ok(GridFunction {
            spec: self.spec,
            re: self.re.iter().zip(w).map(|(a, b)| a * b).collect(),
            im: self.im.as_ref().map(|im| im.iter().zip(w).map(|(a, b)| a * b).collect()),
        })
    }

    /// Samples as `(re, im)` pairs.
    pub fn to_pairs(&self) -> Vec<(f64, f64)> {
        match &self.im {
            None => self.re.iter().map(|&r| (r, 0.0)).collect(),
            Some(im) => self.re.iter().zip(im).map(|(&r, &i)| (r, i)).collect(),
        }
    }

    pub fn into_parts(self) -> (GridSpec, Vec<f64>, Option<Vec<f64>>) {
        (self.spec, self.re, self.im)
    }
}
