//! Littlewood–Paley pair, band convolutions and the φ-transform.
//!
//! Profiles are radial functions of `u = log2 |xi|`. `phi_hat(u)` is 1 for
//! `|u| <= 0.75`, falls to 0 at `|u| = 0.9` through an `exp(-1/x)` transition,
//! and vanishes beyond, so its support sits strictly inside `1/2 <= |xi| <= 2`.
//! `psi_hat = phi_hat / D` with `D(u) = sum_j phi_hat(u - j)^2`, which makes the
//! discrete partition of unity an algebraic identity.
//!
//! Analysis samples each band at the lattice `2^{-k} Z^n`. The band spectrum
//! lies in `|xi| < 2^{k + 0.9}`, well below the lattice Nyquist `pi 2^k`, so the
//! samples are obtained exactly by folding the band spectrum into an
//! `M^n`-point inverse DFT with `M = 2 R 2^k`.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::spectral::{fft_square, from_complex, Spectral, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::path::Path;

/// `|u|` below which `phi_hat = 1`.
pub const PLATEAU: f64 = 0.75;
/// `|u|` at and beyond which `phi_hat = 0`.
pub const SUPPORT: f64 = 0.9;

fn smooth_step(x: f64) -> f64 {
    let e = |t: f64| if t <= 0.0 { 0.0 } else { (-1.0 / t).exp() };
    let (a, b) = (e(x), e(1.0 - x));
    a / (a + b)
}

/// `phi_hat` as a function of `u = log2 |xi|`.
pub fn phi_profile(u: f64) -> f64 {
    let d = u.abs();
    if d <= PLATEAU {
        1.0
    } else if d >= SUPPORT {
        0.0
    } else {
        smooth_step((SUPPORT - d) / (SUPPORT - PLATEAU))
    }
}

/// `D(u) = sum_j phi_hat(u - j)^2`, a 1-periodic function with values in `[1, 2]`.
pub fn partition_denominator(u: f64) -> f64 {
    let r = u - u.floor();
    phi_profile(r).powi(2) + phi_profile(r - 1.0).powi(2)
}

/// `psi_hat` as a function of `u = log2 |xi|`.
pub fn psi_profile(u: f64) -> f64 {
    let p = phi_profile(u);
    if p == 0.0 {
        0.0
    } else {
        p / partition_denominator(u)
    }
}

/// The pair `(phi, psi)` on one grid over a level window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LPPair {
    pub spec: GridSpec,
    pub k_min: i32,
    pub k_max: i32,
}

/// Admissible level window `[k_lo, k_hi]` for a grid.
pub fn admissible_levels(spec: &GridSpec) -> (i32, i32) {
    let h = spec.h();
    let nyquist = (PI / h).log2().floor() as i32 - 1;
    let k_hi = nyquist.min(spec.cell_level());
    let k_lo = -(spec.half_width.log2().round() as i32);
    (k_lo, k_hi)
}

/// Validates the level window against the grid and builds the pair.
pub fn make_lp_pair(spec: &GridSpec, k_min: i32, k_max: i32) -> Result<LPPair> {
    spec.validate()?;
    let (lo, hi) = admissible_levels(spec);
    let range = format!("admissible levels for this grid are [{lo}, {hi}]");
    if k_min > k_max {
        return Err(Error::config("levels", format!("empty level range [{k_min}, {k_max}]; {range}")));
    }
    if k_max > hi {
        return Err(Error::config("levels.k_max", format!("level {k_max} is not resolved by the grid; {range}")));
    }
    if k_min < lo {
        return Err(Error::config("levels.k_min", format!("level {k_min} has fewer than two lattice points; {range}")));
    }
    Ok(LPPair { spec: *spec, k_min, k_max })
}

impl LPPair {
    pub fn levels(&self) -> impl Iterator<Item = i32> + Clone {
        self.k_min..=self.k_max
    }

    pub fn count(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    fn u(xi_norm: f64, k: i32) -> f64 {
        xi_norm.log2() - k as f64
    }

    /// `phi_hat(2^{-k} xi)`.
    pub fn phi_hat(&self, xi_norm: f64, k: i32) -> f64 {
        if xi_norm <= 0.0 {
            0.0
        } else {
            phi_profile(Self::u(xi_norm, k))
        }
    }

    /// `psi_hat(2^{-k} xi)`.
    pub fn psi_hat(&self, xi_norm: f64, k: i32) -> f64 {
        if xi_norm <= 0.0 {
            0.0
        } else {
            psi_profile(Self::u(xi_norm, k))
        }
    }

    /// `[lo, hi]` in `|xi|` where the truncated partition of unity is complete.
    pub fn resolved_band(&self) -> (f64, f64) {
        ((self.k_min as f64 + SUPPORT).exp2(), (self.k_max as f64 - SUPPORT).exp2())
    }

    /// `[lo, hi]` in `|xi|` admissible for the reproducing identity.
    pub fn admissible_band(&self) -> (f64, f64) {
        (((self.k_min + 1) as f64).exp2(), ((self.k_max - 1) as f64).exp2())
    }

    /// `sum_k phi_hat(2^{-k} xi) psi_hat(2^{-k} xi)` over the window.
    pub fn partition_sum(&self, xi_norm: f64) -> f64 {
        self.levels().map(|k| self.phi_hat(xi_norm, k) * self.psi_hat(xi_norm, k)).sum()
    }

    /// Lattice size `M = 2 R 2^k` per axis at level `k`.
    pub fn lattice(&self, k: i32) -> usize {
        (2.0 * self.spec.half_width * (k as f64).exp2()) as usize
    }
}

/// Worst deviation of the partition sum from 1 over resolved grid frequencies,
/// with the number of frequencies checked.
pub fn partition_check(pair: &LPPair) -> (f64, usize) {
    let sp = Spectral::new(&pair.spec);
    let (lo, hi) = pair.resolved_band();
    let mut worst = 0.0f64;
    let mut count = 0;
    for i in 0..pair.spec.len() {
        let r = sp.xi_norm(i);
        if r >= lo && r <= hi {
            worst = worst.max((pair.partition_sum(r) - 1.0).abs());
            count += 1;
        }
    }
    (worst, count)
}

/// Largest `phi_hat` value found outside `1/2 <= |xi| <= 2` on a dense scan.
pub fn support_violation(samples: usize) -> f64 {
    (0..=samples)
        .map(|i| 8.0 * i as f64 / samples as f64)
        .filter(|&r| r < 0.5 || r > 2.0)
        .map(|r| if r == 0.0 { 0.0 } else { phi_profile(r.log2()) })
        .fold(0.0, f64::max)
}

/// Minimum of `(|phi_hat|, |psi_hat|)` on `3/5 <= |xi| <= 5/3` over a dense scan.
pub fn annulus_minimum(samples: usize) -> (f64, f64) {
    let (a, b) = (0.6f64, 5.0 / 3.0);
    (0..=samples)
        .map(|i| a + (b - a) * i as f64 / samples as f64)
        .map(|r| (phi_profile(r.log2()), psi_profile(r.log2())))
        .fold((f64::INFINITY, f64::INFINITY), |acc, v| (acc.0.min(v.0), acc.1.min(v.1)))
}

/// Minimum of `|psi_hat(2^{-k} xi)|` over grid frequencies and levels with
/// `2^{-k} xi` in the annulus `3/5 <= |.| <= 5/3`.
pub fn annulus_minimum_on_grid(pair: &LPPair) -> f64 {
    let sp = Spectral::new(&pair.spec);
    let mut out = f64::INFINITY;
    for i in 0..pair.spec.len() {
        let r = sp.xi_norm(i);
        for k in pair.levels() {
            let s = r * (-k as f64).exp2();
            if (0.6..=5.0 / 3.0).contains(&s) {
                out = out.min(pair.psi_hat(r, k));
            }
        }
    }
    out
}

/// Frame bounds `[min D, max D]` over the resolved grid frequencies: the
/// constants with `c1 ||f||^2 <= sum_k ||phi_k * f||^2 <= c2 ||f||^2`.
pub fn frame_bounds(pair: &LPPair) -> (f64, f64) {
    let sp = Spectral::new(&pair.spec);
    let (lo, hi) = pair.resolved_band();
    let mut b = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..pair.spec.len() {
        let r = sp.xi_norm(i);
        if r >= lo && r <= hi {
            let d: f64 = pair.levels().map(|k| pair.phi_hat(r, k).powi(2)).sum();
            b = (b.0.min(d), b.1.max(d));
        }
    }
    b
}

/// Band functions `phi_k * f` for every level of the pair.
#[derive(Clone, Debug)]
pub struct BandDecomposition {
    pub pair: LPPair,
    pub bands: Vec<GridFunction>,
}

impl BandDecomposition {
    pub fn band(&self, k: i32) -> &GridFunction {
        &self.bands[(k - self.pair.k_min) as usize]
    }

    /// Writes `<stem>_k<k>.bin/.json` for every level.
    pub fn write_to(&self, stem: &Path) -> Result<()> {
        for (k, b) in self.pair.levels().zip(&self.bands) {
            let name = format!("{}_k{k}", stem.file_name().and_then(|s| s.to_str()).unwrap_or("band"));
            b.write_to(&stem.with_file_name(name))?;
        }
        Ok(())
    }
}

fn check_grid(pair: &LPPair, f: &GridFunction) -> Result<()> {
    if *f.spec() != pair.spec {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

fn check_level(pair: &LPPair, k: i32) -> Result<()> {
    if k < pair.k_min || k > pair.k_max {
        return Err(Error::Invalid(format!("level {k} outside [{}, {}]", pair.k_min, pair.k_max)));
    }
    Ok(())
}

/// Fourier coefficients of `f` with the mean removed.
fn mean_zero_coefficients(sp: &Spectral, f: &GridFunction) -> Vec<C64> {
    let mut c = sp.coefficients(f);
    c[0] = C64::new(0.0, 0.0);
    c
}

fn band_from(sp: &Spectral, pair: &LPPair, coeffs: &[C64], k: i32, real: bool) -> GridFunction {
    let d: Vec<C64> = coeffs.iter().enumerate().map(|(i, c)| c * pair.phi_hat(sp.xi_norm(i), k)).collect();
    from_complex(&pair.spec, sp.synthesize(&d), real)
}

/// `phi_k * f` as the multiplier `phi_hat(2^{-k} xi)`.
pub fn band(f: &GridFunction, pair: &LPPair, k: i32) -> Result<GridFunction> {
    check_grid(pair, f)?;
    check_level(pair, k)?;
    let sp = Spectral::new(&pair.spec);
    Ok(band_from(&sp, pair, &sp.coefficients(f), k, f.is_real()))
}

/// All bands of `f` over the pair's window.
pub fn bands(f: &GridFunction, pair: &LPPair) -> Result<BandDecomposition> {
    check_grid(pair, f)?;
    let sp = Spectral::new(&pair.spec);
    let c = sp.coefficients(f);
    let bands = pair.levels().collect::<Vec<_>>().into_par_iter().map(|k| band_from(&sp, pair, &c, k, f.is_real())).collect();
    Ok(BandDecomposition { pair: *pair, bands })
}

/// Sparse `(k, m) -> lambda_{k,m}` coefficients of the φ-transform.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoefficientSet {
    pub n: usize,
    pub entries: BTreeMap<(i32, [i64; 2]), C64>,
}

#[derive(Serialize, Deserialize)]
struct CoefficientLine {
    k: i32,
    m: Vec<i64>,
    re: f64,
    im: f64,
}

impl CoefficientSet {
    pub fn new(n: usize) -> Self {
        CoefficientSet { n, entries: BTreeMap::new() }
    }

    /// Single coefficient `lambda_{k,m} = 1`.
    pub fn delta(n: usize, k: i32, m: [i64; 2]) -> Self {
        let mut s = Self::new(n);
        s.entries.insert((k, m), C64::new(1.0, 0.0));
        s
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, k: i32, m: [i64; 2], value: C64) {
        self.entries.insert((k, m), value);
    }

    pub fn get(&self, k: i32, m: [i64; 2]) -> C64 {
        self.entries.get(&(k, m)).copied().unwrap_or_default()
    }

    /// Levels present, ascending.
    pub fn levels(&self) -> Vec<i32> {
        let mut ks: Vec<i32> = self.entries.keys().map(|(k, _)| *k).collect();
        ks.dedup();
        ks
    }

    pub fn level(&self, k: i32) -> impl Iterator<Item = ([i64; 2], C64)> + '_ {
        self.entries.range((k, [i64::MIN; 2])..=(k, [i64::MAX; 2])).map(|((_, m), v)| (*m, *v))
    }

    pub fn scaled(&self, c: f64) -> Self {
        CoefficientSet { n: self.n, entries: self.entries.iter().map(|(key, v)| (*key, v * c)).collect() }
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> Result<()> {
        for ((k, m), v) in &self.entries {
            let line = CoefficientLine { k: *k, m: m[..self.n].to_vec(), re: v.re, im: v.im };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Parses JSON lines `{k, m, re, im}`; all `m` must have length `n`.
    pub fn read_jsonl(n: usize, r: impl BufRead) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(Error::Invalid(format!("dimension must be 1 or 2, got {n}")));
        }
        let mut out = Self::new(n);
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let c: CoefficientLine =
                serde_json::from_str(&line).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
            if c.m.len() != n {
                return Err(Error::Parse(format!("line {}: expected {n} position indices", i + 1)));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::Parse(format!("line {}: non-finite coefficient", i + 1)));
            }
            let m = if n == 1 { [c.m[0], 0] } else { [c.m[0], c.m[1]] };
            out.entries.insert((c.k, m), C64::new(c.re, c.im));
        }
        Ok(out)
    }
}

/// Lattice position `m` of a flat index into an `M^n` array whose index 0 is `m = -M/2`.
fn lattice_position(i: usize, m: usize, n: usize) -> [i64; 2] {
    let half = (m / 2) as i64;
    if n == 1 {
        [i as i64 - half, 0]
    } else {
        [(i / m) as i64 - half, (i % m) as i64 - half]
    }
}

fn lattice_index(pos: [i64; 2], m: usize, n: usize) -> Option<usize> {
    let half = (m / 2) as i64;
    let a = pos[0] + half;
    let b = pos[1] + half;
    let ok = |x: i64| (0..m as i64).contains(&x);
    if n == 1 {
        (ok(a) && pos[1] == 0).then_some(a as usize)
    } else {
        (ok(a) && ok(b)).then(|| a as usize * m + b as usize)
    }
}

/// Folded index of frequency multi-index `j` in an `M^n` array.
fn folded(j: [i64; 2], m: usize, n: usize) -> usize {
    let w = |x: i64| x.rem_euclid(m as i64) as usize;
    if n == 1 {
        w(j[0])
    } else {
        w(j[0]) * m + w(j[1])
    }
}

/// `(-1)^{j_0 + j_1}`, the phase moving the lattice origin to `m = -M/2`.
fn lattice_sign(j: [i64; 2]) -> f64 {
    if (j[0] + j[1]).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn analyze_level(sp: &Spectral, pair: &LPPair, coeffs: &[C64], k: i32) -> Vec<([i64; 2], C64)> {
    let n = pair.spec.n;
    let m = pair.lattice(k);
    let mut arr = vec![C64::new(0.0, 0.0); m.pow(n as u32)];
    for (i, c) in coeffs.iter().enumerate() {
        let w = pair.phi_hat(sp.xi_norm(i), k);
        if w != 0.0 {
            let j = sp.index(i);
            arr[folded(j, m, n)] += c * w * lattice_sign(j);
        }
    }
    fft_square(&mut arr, m, n, true);
    let scale = (-(k as f64) * n as f64 / 2.0).exp2();
    arr.iter().enumerate().map(|(i, v)| (lattice_position(i, m, n), v * scale)).collect()
}

/// `lambda_{k,m} = 2^{-kn/2} (f * phi~_k)(2^{-k} m)` for every lattice point in
/// the domain and every level of the pair; the mean of `f` is removed first.
pub fn analyze(f: &GridFunction, pair: &LPPair) -> Result<CoefficientSet> {
    check_grid(pair, f)?;
    let sp = Spectral::new(&pair.spec);
    let c = mean_zero_coefficients(&sp, f);
    let per_level: Vec<(i32, Vec<([i64; 2], C64)>)> = pair
        .levels()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| (k, analyze_level(&sp, pair, &c, k)))
        .collect();
    let mut out = CoefficientSet::new(pair.spec.n);
    for (k, items) in per_level {
        for (m, v) in items {
            out.entries.insert((k, m), v);
        }
    }
    Ok(out)
}

/// Fourier coefficients of `T_psi lambda = sum_{k,m} lambda_{k,m} psi_{k,m}`.
fn synthesis_coefficients(sp: &Spectral, pair: &LPPair, lambda: &CoefficientSet) -> Result<Vec<C64>> {
    let n = pair.spec.n;
    if lambda.n != n {
        return Err(Error::Invalid(format!("coefficients are {}-dimensional, grid is {n}-dimensional", lambda.n)));
    }
    let volume = (2.0 * pair.spec.half_width).powi(n as i32);
    let mut total = vec![C64::new(0.0, 0.0); pair.spec.len()];
    for k in lambda.levels() {
        check_level(pair, k)?;
        let m = pair.lattice(k);
        let mut arr = vec![C64::new(0.0, 0.0); m.pow(n as u32)];
        for (pos, v) in lambda.level(k) {
            let i = lattice_index(pos, m, n)
                .ok_or_else(|| Error::Invalid(format!("coefficient position {pos:?} at level {k} is outside the domain")))?;
            arr[i] += v;
        }
        fft_square(&mut arr, m, n, false);
        let scale = (-(k as f64) * n as f64 / 2.0).exp2() / volume;
        for (i, t) in total.iter_mut().enumerate() {
            let w = pair.psi_hat(sp.xi_norm(i), k);
            if w != 0.0 {
                let j = sp.index(i);
                *t += arr[folded(j, m, n)] * (w * scale * lattice_sign(j));
            }
        }
    }
    Ok(total)
}

/// `T_psi lambda`; `real` drops the imaginary part of the result.
pub fn synthesize(lambda: &CoefficientSet, pair: &LPPair, real: bool) -> Result<GridFunction> {
    let sp = Spectral::new(&pair.spec);
    let c = synthesis_coefficients(&sp, pair, lambda)?;
    Ok(from_complex(&pair.spec, sp.synthesize(&c), real))
}

/// Relative spectral magnitude above which a frequency counts as present.
pub const SPECTRUM_TOLERANCE: f64 = 1e-10;

/// Frequencies of `f` with non-negligible weight outside `band`, as multi-indices.
pub fn spectrum_outside(f: &GridFunction, band: (f64, f64)) -> Vec<[i64; 2]> {
    let sp = Spectral::new(f.spec());
    let c = mean_zero_coefficients(&sp, f);
    let peak = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    (0..c.len())
        .filter(|&i| {
            let r = sp.xi_norm(i);
            c[i].norm() > SPECTRUM_TOLERANCE * peak && (r < band.0 || r > band.1)
        })
        .map(|i| sp.index(i))
        .collect()
}

/// `||T_psi S_phi f - f|| / ||f||` in `L_2` for mean-zero `f` whose spectrum
/// lies in the pair's admissible band.
pub fn calderon_residual(f: &GridFunction, pair: &LPPair) -> Result<f64> {
    check_grid(pair, f)?;
    let bad = spectrum_outside(f, pair.admissible_band());
    if !bad.is_empty() {
        return Err(Error::Unresolved { count: bad.len(), first: bad.into_iter().take(8).collect() });
    }
    let sp = Spectral::new(&pair.spec);
    let c = mean_zero_coefficients(&sp, f);
    let norm: f64 = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let lambda = analyze(f, pair)?;
    let back = sp.coefficients(&synthesize(&lambda, pair, f.is_real())?);
    let diff: f64 = back.iter().zip(&c).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    Ok(diff / norm)
}
