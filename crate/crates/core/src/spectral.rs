//! Fourier coefficients of grid functions on the periodic domain.
//!
//! Frequencies are angular: along each axis `xi_j = pi j / R` for
//! `j in [-N/2, N/2)`, so `f(x) = sum_xi c_xi exp(i xi . x)`.

use crate::grid::{GridFunction, GridSpec};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

pub use rustfft::num_complex::Complex64 as C64;

pub struct Spectral {
    spec: GridSpec,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Spectral {
    pub fn new(spec: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        Spectral {
            spec: *spec,
            fwd: planner.plan_fft_forward(spec.samples),
            inv: planner.plan_fft_inverse(spec.samples),
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Signed frequency index of an FFT bin along one axis.
    pub fn signed(&self, j: usize) -> i64 {
        let n = self.spec.samples;
        if j < n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    /// Signed frequency multi-index of a flat bin.
    pub fn index(&self, flat: usize) -> [i64; 2] {
        let [a, b] = self.spec.axes(flat);
        if self.spec.n == 1 {
            [self.signed(a), 0]
        } else {
            [self.signed(a), self.signed(b)]
        }
    }

    /// Angular frequency vector of a flat bin.
    pub fn xi(&self, flat: usize) -> [f64; 2] {
        let [a, b] = self.index(flat);
        let unit = PI / self.spec.half_width;
        [a as f64 * unit, b as f64 * unit]
    }

    pub fn xi_norm(&self, flat: usize) -> f64 {
        let [a, b] = self.xi(flat);
        a.hypot(b)
    }

    /// Flat bin of a signed multi-index, if representable.
    pub fn bin(&self, j: [i64; 2]) -> Option<usize> {
        let n = self.spec.samples as i64;
        let wrap = |x: i64| if (-n / 2..n / 2).contains(&x) { Some(x.rem_euclid(n) as usize) } else { None };
        let a = wrap(j[0])?;
        if self.spec.n == 1 {
            return if j[1] == 0 { Some(a) } else { None };
        }
        Some(self.spec.flat(a, wrap(j[1])?))
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.spec.samples;
        plan.process(data);
        if self.spec.n == 2 {
            let mut t = transpose(data, n);
            plan.process(&mut t);
            data.copy_from_slice(&transpose(&t, n));
        }
    }

    /// Unnormalized DFT, `X_j = sum_i f_i exp(-2 pi i j.i / N)`.
    pub fn dft(&self, mut data: Vec<Complex64>) -> Vec<Complex64> {
        self.transform(&mut data, &self.fwd);
        data
    }

    /// Inverse of [`Spectral::dft`], including the `1/N^n` factor.
    pub fn idft(&self, mut data: Vec<Complex64>) -> Vec<Complex64> {
        self.transform(&mut data, &self.inv);
        let scale = 1.0 / self.spec.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
        data
    }

    /// `exp(i sign xi . d)` with `d = (h/2, h/2)`; maps samples between the
    /// offset grid and the unshifted lattice `-R + i h`.
    pub fn half_cell_phase(&self, flat: usize, sign: f64) -> Complex64 {
        let [a, b] = self.xi(flat);
        let d = 0.5 * self.spec.h();
        Complex64::from_polar(1.0, sign * (a + b) * d)
    }

    /// Factor `phase_j` with `c_j = phase_j X_j / N^n` for the true coefficients.
    fn coefficient_phase(&self, flat: usize) -> Complex64 {
        let [a, b] = self.index(flat);
        let sign = if (a + b).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let shift = if self.spec.offset { self.half_cell_phase(flat, -1.0) } else { Complex64::new(1.0, 0.0) };
        shift * sign
    }

    /// Fourier coefficients `c_xi = |T|^{-1} int f exp(-i xi . x)` (midpoint rule).
    pub fn coefficients(&self, f: &GridFunction) -> Vec<Complex64> {
        let x = self.dft(to_complex(f));
        let scale = 1.0 / self.spec.len() as f64;
        x.iter().enumerate().map(|(j, v)| v * self.coefficient_phase(j) * scale).collect()
    }

    /// Samples of `sum_xi c_xi exp(i xi . x)` at the grid points.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let total = self.spec.len() as f64;
        let x: Vec<Complex64> =
            coeffs.iter().enumerate().map(|(j, c)| c / self.coefficient_phase(j) * total).collect();
        self.idft(x)
    }
}

pub fn to_complex(f: &GridFunction) -> Vec<Complex64> {
    match f.im() {
        None => f.re().iter().map(|&r| Complex64::new(r, 0.0)).collect(),
        Some(im) => f.re().iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect(),
    }
}

/// Builds a grid function, dropping the imaginary part when `real` is set.
pub fn from_complex(spec: &GridSpec, data: Vec<Complex64>, real: bool) -> GridFunction {
    let re = data.iter().map(|v| v.re).collect();
    let out = if real {
        GridFunction::real(*spec, re)
    } else {
        GridFunction::complex(*spec, re, data.iter().map(|v| v.im).collect())
    };
    out.expect("transform of finite samples is finite")
}

/// Unnormalized `m^n`-point DFT of a row-major square array; `inverse` flips the sign.
pub fn fft_square(data: &mut [Complex64], m: usize, n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan = if inverse { planner.plan_fft_inverse(m) } else { planner.plan_fft_forward(m) };
    plan.process(data);
    if n == 2 {
        let mut t = transpose(data, m);
        plan.process(&mut t);
        data.copy_from_slice(&transpose(&t, m));
    }
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = data[i * n + j];
        }
    }
    out
}
