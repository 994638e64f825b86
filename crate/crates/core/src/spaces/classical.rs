//! Unweighted `B^s_{p,q}` / `F^s_{p,q}` evaluated by a separate route: naive
//! DFTs with phases taken from the actual sample coordinates, and the
//! smoothness factor `2^{ks}` applied as a scalar per level.

use super::function::check_exponent;
use crate::error::Result;
use crate::grid::{GridFunction, GridSpec};
use crate::lpaley::{phi_profile, LPPair};
use crate::spectral::C64;
use std::f64::consts::PI;

/// `exp(-i pi j (2 i + o) / N)` for all residues of `j (2 i + o)` mod `2N`.
struct Twiddles {
    table: Vec<C64>,
}

impl Twiddles {
    fn new(samples: usize) -> Self {
        let m = 2 * samples;
        Twiddles { table: (0..m).map(|t| C64::from_polar(1.0, -2.0 * PI * t as f64 / m as f64)).collect() }
    }

    /// `exp(-i xi_j (x_i + R))` for the signed index `j` and sample `i`.
    fn at(&self, j: i64, i: usize, offset: bool) -> C64 {
        let m = self.table.len() as i64;
        let t = (j * (2 * i as i64 + offset as i64)).rem_euclid(m);
        self.table[t as usize]
    }
}

fn signed(j: usize, samples: usize) -> i64 {
    if j < samples / 2 {
        j as i64
    } else {
        j as i64 - samples as i64
    }
}

/// Naive transform along one axis of a 1D or row-major 2D array.
/// `sign = -1` analyses (`sum_x f(x) e^{-i xi x}`), `sign = +1` synthesizes.
fn dft_axis(data: &[C64], spec: &GridSpec, axis: usize, sign: f64, tw: &Twiddles) -> Vec<C64> {
    let n = spec.samples;
    let lines = spec.len() / n;
    let stride = if spec.n == 1 || axis == 1 { 1 } else { n };
    let line_step = if spec.n == 1 { 0 } else if axis == 1 { n } else { 1 };
    let mut out = vec![C64::new(0.0, 0.0); data.len()];
    // exp(i xi_j R) = (-1)^j moves the phase origin from -R to 0.
    let parity = |j: i64| if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    for line in 0..lines {
        let base = line * line_step;
        let nonzero: Vec<(usize, C64)> =
            (0..n).map(|b| (b, data[base + b * stride])).filter(|(_, v)| *v != C64::new(0.0, 0.0)).collect();
        for a in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for &(b, v) in &nonzero {
                acc += if sign < 0.0 {
                    let j = signed(a, n);
                    v * tw.at(j, b, spec.offset) * parity(j)
                } else {
                    let j = signed(b, n);
                    v * tw.at(j, a, spec.offset).conj() * parity(j)
                };
            }
            out[base + a * stride] = acc;
        }
    }
    out
}

fn naive_coefficients(f: &GridFunction, tw: &Twiddles) -> Vec<C64> {
    let spec = f.spec();
    let mut data: Vec<C64> = f.to_pairs().into_iter().map(|(r, i)| C64::new(r, i)).collect();
    for axis in 0..spec.n {
        data = dft_axis(&data, spec, axis, -1.0, tw);
    }
    let scale = 1.0 / spec.len() as f64;
    data.iter().map(|v| v * scale).collect()
}

fn naive_synthesis(coeffs: &[C64], spec: &GridSpec, tw: &Twiddles) -> Vec<C64> {
    let mut data = coeffs.to_vec();
    for axis in 0..spec.n {
        data = dft_axis(&data, spec, axis, 1.0, tw);
    }
    data
}

/// `|phi_k * f|` per level with the mean removed, via naive transforms.
pub fn classical_bands(f: &GridFunction, pair: &LPPair) -> Vec<Vec<f64>> {
    let spec = f.spec();
    let tw = Twiddles::new(spec.samples);
    let mut c = naive_coefficients(f, &tw);
    c[0] = C64::new(0.0, 0.0);
    let unit = PI / spec.half_width;
    let radius: Vec<f64> = (0..spec.len())
        .map(|b| {
            let [a, bb] = spec.axes(b);
            let x = signed(a, spec.samples) as f64 * unit;
            let y = if spec.n == 1 { 0.0 } else { signed(bb, spec.samples) as f64 * unit };
            x.hypot(y)
        })
        .collect();
    pair.levels()
        .map(|k| {
            let scale = (-k as f64).exp2();
            let d: Vec<C64> = c
                .iter()
                .zip(&radius)
                .map(|(v, &r)| if r == 0.0 { C64::new(0.0, 0.0) } else { v * phi_profile((r * scale).log2()) })
                .collect();
            naive_synthesis(&d, spec, &tw).iter().map(|v| if f.is_real() { v.re.abs() } else { v.norm() }).collect()
        })
        .collect()
}

fn lp(spec: &GridSpec, values: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        (values.map(|v| v.powf(p)).sum::<f64>() * spec.cell_volume()).powf(1.0 / p)
    }
}

/// Band magnitudes from [`classical_bands`], reusable across smoothness values.
pub struct ClassicalBands {
    spec: GridSpec,
    k_min: i32,
    bands: Vec<Vec<f64>>,
}

impl ClassicalBands {
    pub fn new(f: &GridFunction, pair: &LPPair) -> Self {
        ClassicalBands { spec: *f.spec(), k_min: pair.k_min, bands: classical_bands(f, pair) }
    }

    fn factor(&self, i: usize, s: f64) -> f64 {
        ((self.k_min + i as i32) as f64 * s).exp2()
    }

    /// `(sum_k (2^{ks} ||phi_k * f| L_p||)^q)^{1/q}`.
    pub fn besov(&self, s: f64, p: f64, q: f64) -> Result<f64> {
        check_exponent("p", p, true)?;
        check_exponent("q", q, true)?;
        let per: Vec<f64> =
            self.bands.iter().enumerate().map(|(i, b)| self.factor(i, s) * lp(&self.spec, b.iter().copied(), p)).collect();
        Ok(if q.is_infinite() {
            per.into_iter().fold(0.0, f64::max)
        } else {
            per.iter().map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
        })
    }

    /// `|| (sum_k 2^{ksq} |phi_k * f|^q)^{1/q} | L_p ||`.
    pub fn triebel(&self, s: f64, p: f64, q: f64) -> Result<f64> {
        check_exponent("p", p, false)?;
        check_exponent("q", q, true)?;
        let mut acc = vec![0.0f64; self.spec.len()];
        for (i, b) in self.bands.iter().enumerate() {
            let c = self.factor(i, s);
            for (a, v) in acc.iter_mut().zip(b) {
                if q.is_infinite() {
                    *a = a.max(c * v);
                } else {
                    *a += (c * v).powf(q);
                }
            }
        }
        let agg = acc.into_iter().map(|a| if q.is_infinite() { a } else { a.powf(1.0 / q) });
        Ok(lp(&self.spec, agg, p))
    }
}

pub fn classical_besov(f: &GridFunction, pair: &LPPair, s: f64, p: f64, q: f64) -> Result<f64> {
    ClassicalBands::new(f, pair).besov(s, p, q)
}

pub fn classical_triebel(f: &GridFunction, pair: &LPPair, s: f64, p: f64, q: f64) -> Result<f64> {
    ClassicalBands::new(f, pair).triebel(s, p, q)
}
