//! Stochastic initial conditions and coefficient fields.
//!
//! Every generator is a pure function of its [`SeededRng`] stream and its
//! configuration.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::rng::SeededRng;
use crate::solvers::cns::{sound_speed, ConservedState, GAMMA};
use crate::spectral;

const MAX_REDRAWS: usize = 1000;

fn uniform(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        lo + (hi - lo) * rng.random::<f64>()
    }
}

/// Random superposition of sine waves, optionally followed by a signed
/// absolute value and a box window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidSpec {
    pub n_modes: usize,
    pub n_max: u32,
    /// Period used for the wavenumbers; the grid extent when `None`.
    pub domain_length: Option<f64>,
    pub abs_prob: f64,
    pub window_prob: f64,
}

impl Default for SinusoidSpec {
    fn default() -> Self {
        Self {
            n_modes: 2,
            n_max: 8,
            domain_length: None,
            abs_prob: 0.1,
            window_prob: 0.1,
        }
    }
}

impl SinusoidSpec {
    /// Plain superposition without post-processing, as used for the
    /// multi-dimensional compressible-flow perturbations.
    pub fn smooth(n_modes: usize, n_max: u32) -> Self {
        Self {
            n_modes,
            n_max,
            domain_length: None,
            abs_prob: 0.0,
            window_prob: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes == 0 || self.n_max == 0 {
            return Err(Error::Config("sinusoid needs n_modes >= 1 and n_max >= 1".into()));
        }
        for p in [self.abs_prob, self.window_prob] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("probability {p} outside [0, 1]")));
            }
        }
        if let Some(l) = self.domain_length {
            if !(l > 0.0) {
                return Err(Error::Config(format!("domain length {l} must be positive")));
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut SeededRng, dim: usize) -> Result<SinusoidDraw> {
        self.validate()?;
        let modes = (0..self.n_modes)
            .map(|_| {
                let amplitude = rng.random::<f64>();
                let mut wavenumber = [0i64; 3];
                for w in wavenumber.iter_mut().take(dim) {
                    *w = rng.random_range(1..=self.n_max) as i64;
                }
                // open interval (0, 2pi)
                let phase = loop {
                    let p = 2.0 * PI * rng.random::<f64>();
                    if p > 0.0 {
                        break p;
                    }
                };
                SineMode {
                    amplitude,
                    wavenumber,
                    phase,
                }
            })
            .collect();
        // Independent Bernoulli draws for the two post-operations.
        let abs_sign = (rng.random::<f64>() < self.abs_prob)
            .then(|| if rng.random::<bool>() { 1.0 } else { -1.0 });
        let window_fraction =
            (rng.random::<f64>() < self.window_prob).then(|| uniform(rng, 1.0 / 3.0, 2.0 / 3.0));
        Ok(SinusoidDraw {
            modes,
            abs_sign,
            window_fraction,
            domain_length: self.domain_length,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineMode {
    pub amplitude: f64,
    /// Integer wave index per axis; the physical wavenumber is `2 pi n / L`.
    pub wavenumber: [i64; 3],
    pub phase: f64,
}

/// One realization of a [`SinusoidSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinusoidDraw {
    pub modes: Vec<SineMode>,
    pub abs_sign: Option<f64>,
    pub window_fraction: Option<f64>,
    pub domain_length: Option<f64>,
}

impl SinusoidDraw {
    pub fn evaluate(&self, grid: &Grid) -> Vec<f64> {
        let dim = grid.dim();
        let lengths: Vec<f64> = (0..dim)
            .map(|a| self.domain_length.unwrap_or_else(|| grid.extent(a)))
            .collect();
        let mut out: Vec<f64> = (0..grid.len())
            .map(|cell| {
                let x = grid.cell_center(cell);
                self.modes
                    .iter()
                    .map(|m| {
                        let arg: f64 = (0..dim)
                            .map(|a| 2.0 * PI * m.wavenumber[a] as f64 / lengths[a] * x[a])
                            .sum();
                        m.amplitude * (arg + m.phase).sin()
                    })
                    .sum()
            })
            .collect();
        if let Some(sign) = self.abs_sign {
            out.iter_mut().for_each(|v| *v = sign * v.abs());
        }
        if let Some(fraction) = self.window_fraction {
            for (cell, v) in out.iter_mut().enumerate() {
                let x = grid.cell_center(cell);
                let inside = (0..dim).all(|a| {
                    let mid = 0.5 * (grid.lo()[a] + grid.hi()[a]);
                    (x[a] - mid).abs() <= 0.5 * fraction * grid.extent(a)
                });
                if !inside {
                    *v = 0.0;
                }
            }
        }
        out
    }
}

pub fn sinusoidal_superposition(rng: &mut SeededRng, grid: &Grid, spec: &SinusoidSpec) -> Result<Field> {
    grid.require_dim(&[1], "sinusoidal superposition")?;
    let draw = spec.sample(rng, 1)?;
    Field::new(grid.clone(), 1, draw.evaluate(grid))
}

/// Sinusoidal draw passed through `|.|` and scaled to a maximum of one.
pub fn normalized_positive_ic(rng: &mut SeededRng, grid: &Grid, spec: &SinusoidSpec) -> Result<Field> {
    grid.require_dim(&[1], "normalized positive initial condition")?;
    for _ in 0..MAX_REDRAWS {
        let mut values = spec.sample(rng, 1)?.evaluate(grid);
        values.iter_mut().for_each(|v| *v = v.abs());
        let max = values.iter().copied().fold(0.0, f64::max);
        if max > 0.0 {
            values.iter_mut().for_each(|v| *v /= max);
            return Field::new(grid.clone(), 1, values);
        }
    }
    Err(Error::Config("sinusoid spec keeps producing all-zero fields".into()))
}

/// Isotropic Gaussian random field with power spectral density `|k|^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrfSpec {
    pub exponent: f64,
    pub sigma: f64,
}

pub fn gaussian_random_field(rng: &mut SeededRng, grid: &Grid, spec: &GrfSpec) -> Result<Field> {
    if !(spec.sigma >= 0.0) || !spec.exponent.is_finite() {
        return Err(Error::Config(format!("invalid random field spec {spec:?}")));
    }
    if spec.sigma == 0.0 {
        return Ok(Field::zeros(grid.clone(), 1));
    }
    let shape = grid.shape().to_vec();
    let noise: Vec<f64> = (0..grid.len()).map(|_| rng.sample(StandardNormal)).collect();
    let mut spectrum = spectral::forward_real(&noise, &shape);
    // wavenumbers in cycles per unit length; truncate at the smallest Nyquist
    let k_nyquist = (0..grid.dim())
        .map(|a| (shape[a] / 2) as f64 / grid.extent(a))
        .fold(f64::INFINITY, f64::min);
    for (coef, m) in spectrum.iter_mut().zip(spectral::wave_vectors(&shape)) {
        let k = (0..grid.dim())
            .map(|a| (m[a] as f64 / grid.extent(a)).powi(2))
            .sum::<f64>()
            .sqrt();
        let gain = if k == 0.0 || k > k_nyquist * (1.0 + 1e-12) {
            0.0
        } else {
            k.powf(0.5 * spec.exponent)
        };
        *coef *= gain;
    }
    let mut values = spectral::inverse_real(spectrum, &shape);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter_mut().for_each(|v| *v -= mean);
    let std = (values.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    if std > 0.0 {
        let scale = spec.sigma / std;
        values.iter_mut().for_each(|v| *v *= scale);
    }
    Field::new(grid.clone(), 1, values)
}

/// Two-level permeability: a random field thresholded at its median.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarcyCoefficientSpec {
    pub exponent: f64,
    pub a_low: f64,
    pub a_high: f64,
}

impl Default for DarcyCoefficientSpec {
    fn default() -> Self {
        Self {
            exponent: -3.0,
            a_low: 0.1,
            a_high: 1.0,
        }
    }
}

pub fn darcy_coefficient(rng: &mut SeededRng, grid: &Grid, spec: &DarcyCoefficientSpec) -> Result<Field> {
    if !(spec.a_low > 0.0 && spec.a_high > 0.0) {
        return Err(Error::Config("coefficient levels must be positive".into()));
    }
    let grf = gaussian_random_field(
        rng,
        grid,
        &GrfSpec {
            exponent: spec.exponent,
            sigma: 1.0,
        },
    )?;
    let mut sorted = grf.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 0 {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    } else {
        sorted[n / 2]
    };
    let values = grf
        .values()
        .iter()
        .map(|&v| if v > median { spec.a_high } else { spec.a_low })
        .collect();
    Field::new(grid.clone(), 1, values)
}

pub const TURBULENCE_MODES: usize = 4;
pub const TURBULENCE_N_MAX: i64 = 4;

/// Removes the compressive part of a periodic vector field in Fourier space.
///
/// Coefficients on a Nyquist plane of an even axis are dropped: their
/// conjugate partner carries the same index, so no real divergence-free
/// projection exists for them.
pub fn solenoidal_projection(grid: &Grid, components: &mut [Vec<f64>]) {
    let dim = grid.dim();
    let shape = grid.shape().to_vec();
    let mut spectra: Vec<Vec<Complex64>> = components
        .iter()
        .map(|c| spectral::forward_real(c, &shape))
        .collect();
    for (idx, m) in spectral::wave_vectors(&shape).into_iter().enumerate() {
        let k: Vec<f64> = (0..dim).map(|a| m[a] as f64 / grid.extent(a)).collect();
        let k2: f64 = k.iter().map(|v| v * v).sum();
        if (0..dim).any(|a| shape[a] % 2 == 0 && m[a].unsigned_abs() as usize == shape[a] / 2) {
            for spec in spectra.iter_mut() {
                spec[idx] = Complex64::new(0.0, 0.0);
            }
            continue;
        }
        if k2 == 0.0 {
            continue;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for a in 0..dim {
            dot += spectra[a][idx] * k[a];
        }
        for a in 0..dim {
            spectra[a][idx] -= dot * (k[a] / k2);
        }
    }
    for (c, s) in components.iter_mut().zip(spectra) {
        *c = spectral::inverse_real(s, &shape);
    }
}

fn rms_speed(components: &[Vec<f64>]) -> f64 {
    let n = components[0].len();
    let sum: f64 = (0..n)
        .map(|i| components.iter().map(|c| c[i] * c[i]).sum::<f64>())
        .sum();
    (sum / n as f64).sqrt()
}

/// Divergence-free random velocity with RMS speed `mach * sound_speed`.
pub fn turbulence_velocity(rng: &mut SeededRng, grid: &Grid, mach: f64, sound_speed: f64) -> Result<Field> {
    grid.require_dim(&[2, 3], "turbulent velocity")?;
    if !(mach >= 0.0) || !(sound_speed > 0.0) {
        return Err(Error::Config(format!(
            "need mach >= 0 and sound speed > 0, got {mach} / {sound_speed}"
        )));
    }
    let dim = grid.dim();
    if mach == 0.0 {
        return Ok(Field::zeros(grid.clone(), dim));
    }
    let vbar = mach * sound_speed;
    // spectral decay exponent: 1 in 2D, 2 in 3D
    let decay = (dim - 1) as i32;
    for _ in 0..MAX_REDRAWS {
        let mut components = vec![vec![0.0; grid.len()]; dim];
        for _ in 0..TURBULENCE_MODES {
            let m = loop {
                let mut m = [0i64; 3];
                for w in m.iter_mut().take(dim) {
                    *w = rng.random_range(-TURBULENCE_N_MAX..=TURBULENCE_N_MAX);
                }
                if m.iter().any(|&v| v != 0) {
                    break m;
                }
            };
            let kmag = m.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
            let mut dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            let amp = vbar / kmag.powi(decay);
            dir.iter_mut().for_each(|v| *v *= amp / norm);
            let phase = 2.0 * PI * rng.random::<f64>();
            for (cell, _) in components[0].clone().iter().enumerate() {
                let x = grid.cell_center(cell);
                let arg: f64 = (0..dim)
                    .map(|a| 2.0 * PI * m[a] as f64 / grid.extent(a) * x[a])
                    .sum::<f64>()
                    + phase;
                let s = arg.sin();
                for a in 0..dim {
                    components[a][cell] += dir[a] * s;
                }
            }
        }
        solenoidal_projection(grid, &mut components);
        let rms = rms_speed(&components);
        if rms > 1e-12 * vbar {
            let scale = vbar / rms;
            components.iter_mut().flatten().for_each(|v| *v *= scale);
            return Field::from_channels(grid.clone(), &components);
        }
    }
    Err(Error::Config("turbulent draws keep vanishing after projection".into()))
}

/// Sampling ranges for random Riemann problems; `lo == hi` pins a value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockTubeSpec {
    pub density: (f64, f64),
    pub pressure: (f64, f64),
    /// Velocity in units of the local sound speed.
    pub mach: (f64, f64),
    /// Jump position as a fraction of the domain length.
    pub position: (f64, f64),
}

impl Default for ShockTubeSpec {
    fn default() -> Self {
        Self {
            density: (0.1, 1.0),
            pressure: (0.1, 1.0),
            mach: (-1.0, 1.0),
            position: (0.2, 0.8),
        }
    }
}

impl ShockTubeSpec {
    /// Sod's problem: (1, 0, 1) | (0.125, 0, 0.1) with the jump mid-domain.
    pub fn sod() -> Self {
        Self {
            density: (1.0, 1.0),
            pressure: (1.0, 1.0),
            mach: (0.0, 0.0),
            position: (0.5, 0.5),
        }
    }
}

/// Left/right primitive states of a sampled Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannStates {
    pub left: [f64; 3],
    pub right: [f64; 3],
    pub face: usize,
}

pub fn sample_riemann_states(rng: &mut SeededRng, grid: &Grid, spec: &ShockTubeSpec) -> Result<RiemannStates> {
    grid.require_dim(&[1], "shock tube")?;
    let n = grid.shape()[0];
    let side = |rng: &mut SeededRng| -> Result<[f64; 3]> {
        for _ in 0..MAX_REDRAWS {
            let rho = uniform(rng, spec.density.0, spec.density.1);
            let p = uniform(rng, spec.pressure.0, spec.pressure.1);
            let mach = uniform(rng, spec.mach.0, spec.mach.1);
            if rho > 0.0 && p > 0.0 {
                return Ok([rho, mach * sound_speed(rho, p, GAMMA), p]);
            }
        }
        Err(Error::Config("shock tube ranges never give positive states".into()))
    };
    let left = side(rng)?;
    let right = side(rng)?;
    let frac = uniform(rng, spec.position.0, spec.position.1);
    let face = ((frac * n as f64).round() as usize).clamp(1, n - 1);
    Ok(RiemannStates { left, right, face })
}

/// Piecewise-constant Riemann problem with one jump at an interior face.
pub fn shock_tube_ic(rng: &mut SeededRng, grid: &Grid, spec: &ShockTubeSpec) -> Result<ConservedState> {
    let states = sample_riemann_states(rng, grid, spec)?;
    riemann_state(grid, &states)
}

pub fn riemann_state(grid: &Grid, states: &RiemannStates) -> Result<ConservedState> {
    let n = grid.shape()[0];
    let pick = |i: usize, q: usize| {
        if i < states.face {
            states.left[q]
        } else {
            states.right[q]
        }
    };
    let rho: Vec<f64> = (0..n).map(|i| pick(i, 0)).collect();
    let v: Vec<f64> = (0..n).map(|i| pick(i, 1)).collect();
    let p: Vec<f64> = (0..n).map(|i| pick(i, 2)).collect();
    ConservedState::from_primitive(grid.clone(), GAMMA, &rho, &[v], &p)
}

pub const DAM_RADIUS_RANGE: (f64, f64) = (0.3, 0.7);

/// Circular water column of height 2 over a still level of 1.
pub fn radial_dam_break_ic(rng: &mut SeededRng, grid: &Grid) -> Result<Field> {
    let r = uniform(rng, DAM_RADIUS_RANGE.0, DAM_RADIUS_RANGE.1);
    dam_break_height(grid, r)
}

pub fn dam_break_height(grid: &Grid, radius: f64) -> Result<Field> {
    grid.require_dim(&[2], "radial dam break")?;
    // offsets from the domain center, computed from indices so that mirrored
    // cells see bitwise-equal distances
    let offset = |axis: usize, j: usize| {
        let n = grid.shape()[axis] as f64;
        (j as f64 + 0.5 - 0.5 * n) * grid.dx(axis)
    };
    let values = (0..grid.len())
        .map(|c| {
            let idx = grid.unravel(c);
            let (dx, dy) = (offset(0, idx[0]), offset(1, idx[1]));
            if (dx * dx + dy * dy).sqrt() < radius {
                2.0
            } else {
                1.0
            }
        })
        .collect();
    Field::new(grid.clone(), 1, values)
}

pub fn uniform_random_ic(rng: &mut SeededRng, grid: &Grid, lo: f64, hi: f64) -> Result<Field> {
    if !(hi > lo) {
        return Err(Error::Config(format!("uniform range needs hi > lo, got [{lo}, {hi})")));
    }
    let values = (0..grid.len()).map(|_| rng.random_range(lo..hi)).collect();
    Field::new(grid.clone(), 1, values)
}

/// Independent standard normal values per cell and channel.
pub fn normal_noise_ic(rng: &mut SeededRng, grid: &Grid, channels: usize) -> Result<Field> {
    let values = (0..grid.len() * channels)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    Field::new(grid.clone(), channels, values)
}

/// Background state plus bounded sinusoidal perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CnsRandomSpec {
    pub mach: f64,
    pub background_density: f64,
    pub background_pressure: f64,
    /// Peak relative perturbation of density and pressure.
    pub perturbation: f64,
    pub sinusoid: SinusoidSpec,
}

impl Default for CnsRandomSpec {
    fn default() -> Self {
        Self {
            mach: 1.0,
            background_density: 1.0,
            background_pressure: 1.0 / GAMMA,
            perturbation: 0.3,
            sinusoid: SinusoidSpec::smooth(2, 4),
        }
    }
}

fn scale_to_peak(values: &mut [f64], peak: f64) {
    let max = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if max > 0.0 {
        let s = peak / max;
        values.iter_mut().for_each(|v| *v *= s);
    } else {
        values.iter_mut().for_each(|v| *v = 0.0);
    }
}

pub fn random_field_cns_ic(rng: &mut SeededRng, grid: &Grid, spec: &CnsRandomSpec) -> Result<ConservedState> {
    let (rho0, p0) = (spec.background_density, spec.background_pressure);
    if !(rho0 > 0.0 && p0 > 0.0) {
        return Err(Error::Config("background density and pressure must be positive".into()));
    }
    if !(0.0..1.0).contains(&spec.perturbation) || !(spec.mach >= 0.0) {
        return Err(Error::Config(format!(
            "perturbation {} must lie in [0, 1) and mach {} be non-negative",
            spec.perturbation, spec.mach
        )));
    }
    let dim = grid.dim();
    let mut drho = spec.sinusoid.sample(rng, dim)?.evaluate(grid);
    let mut dp = spec.sinusoid.sample(rng, dim)?.evaluate(grid);
    scale_to_peak(&mut drho, spec.perturbation * rho0);
    scale_to_peak(&mut dp, spec.perturbation * p0);
    let rho: Vec<f64> = drho.iter().map(|d| rho0 + d).collect();
    let p: Vec<f64> = dp.iter().map(|d| p0 + d).collect();

    let target = spec.mach * sound_speed(rho0, p0, GAMMA);
    let mut vel = vec![vec![0.0; grid.len()]; dim];
    if target > 0.0 {
        for _ in 0..MAX_REDRAWS {
            for v in vel.iter_mut() {
                *v = spec.sinusoid.sample(rng, dim)?.evaluate(grid);
            }
            let rms = rms_speed(&vel);
            if rms > 0.0 {
                let s = target / rms;
                vel.iter_mut().flatten().for_each(|v| *v *= s);
                break;
            }
        }
    }
    ConservedState::from_primitive(grid.clone(), GAMMA, &rho, &vel, &p)
}
