//! Linear advection `u_t + beta u_x = 0` on a periodic line.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cfl_timestep, march_snapshots, Cfl, Field, TimeAxis, Trajectory};
use crate::spectral;

use super::SspRk2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvectionParams {
    pub beta: f64,
    #[serde(default)]
    pub cfl: Cfl,
}

impl AdvectionParams {
    pub fn new(beta: f64) -> Self {
        Self {
            beta,
            cfl: Cfl::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() {
            return Err(Error::Config(format!("advection speed {} is not finite", self.beta)));
        }
        self.cfl.validate()
    }
}

pub(crate) fn require_scalar_line(u0: &Field, what: &str) -> Result<()> {
    u0.grid().require_dim(&[1], what)?;
    if u0.channels() != 1 {
        return Err(Error::Shape(format!("{what} expects one channel, got {}", u0.channels())));
    }
    Ok(())
}

/// Exact periodic shift `u0(x - beta t)`.
///
/// Whole-cell shifts are exact rolls; fractional shifts use a Fourier phase
/// shift.
pub fn advect_exact(u0: &Field, beta: f64, t: f64) -> Result<Field> {
    require_scalar_line(u0, "exact advection")?;
    let grid = u0.grid();
    let n = grid.shape()[0];
    let shift = beta * t / grid.extent(0);
    if shift == 0.0 {
        return Ok(u0.clone());
    }
    let cells = shift * n as f64;
    if cells.fract() == 0.0 {
        let m = (cells as i64).rem_euclid(n as i64) as usize;
        let src = u0.values();
        let values = (0..n).map(|i| src[(i + n - m) % n]).collect();
        return Field::new(grid.clone(), 1, values);
    }
    let mut spectrum = spectral::forward_real(u0.values(), &[n]);
    let frac = shift.rem_euclid(1.0);
    for (j, c) in spectrum.iter_mut().enumerate() {
        let k = spectral::signed_wavenumber(j, n) as f64;
        let phase = -2.0 * std::f64::consts::PI * k * frac;
        *c *= Complex64::new(phase.cos(), phase.sin());
    }
    Field::new(grid.clone(), 1, spectral::inverse_real(spectrum, &[n]))
}

/// Semi-discrete flux-form update with the fully upwinded three-point flux.
fn rhs(u: &[f64], du: &mut [f64], beta: f64, dx: f64, faces: &mut [f64]) {
    let n = u.len();
    // faces[j] sits between cells j - 1 and j
    for j in 0..n {
        faces[j] = if beta >= 0.0 {
            let a = u[(j + n - 1) % n];
            let b = u[(j + n - 2) % n];
            0.5 * beta * (3.0 * a - b)
        } else {
            let a = u[j];
            let b = u[(j + 1) % n];
            0.5 * beta * (3.0 * a - b)
        };
    }
    for i in 0..n {
        du[i] = -(faces[(i + 1) % n] - faces[i]) / dx;
    }
}

pub fn solve_advection(u0: &Field, params: &AdvectionParams, time: &TimeAxis) -> Result<Trajectory> {
    require_scalar_line(u0, "advection")?;
    params.validate()?;
    let grid = u0.grid().clone();
    if params.beta == 0.0 {
        return Trajectory::new(*time, vec![u0.clone(); time.n_snapshots]);
    }
    let dx = grid.dx(0);
    let dt = cfl_timestep(dx, params.beta.abs(), 0.0, params.cfl)?;
    let n = grid.len();
    let mut rk = SspRk2::new(n);
    let mut faces = vec![0.0; n];
    let mut frames = Vec::with_capacity(time.n_snapshots);
    let mut u = u0.values().to_vec();
    march_snapshots(
        time,
        &mut u,
        |_| Ok(dt),
        |u, _, h| rk.step(u, h, |x, k| {
            rhs(x, k, params.beta, dx, &mut faces);
            Ok(())
        }),
        |u, _| {
            frames.push(Field::new(grid.clone(), 1, u.clone())?);
            Ok(())
        },
    )?;
    Trajectory::new(*time, frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn sine(n: usize) -> Field {
        Field::from_fn(Grid::line(0.0, 1.0, n).unwrap(), |x| (2.0 * PI * x[0]).sin()).unwrap()
    }

    #[test]
    fn zero_shift_is_bitwise() {
        let u = sine(64);
        assert_eq!(advect_exact(&u, 0.0, 3.0).unwrap(), u);
    }

    #[test]
    fn full_period_is_identity() {
        let u = sine(64);
        let v = advect_exact(&u, 0.5, 2.0).unwrap();
        for (a, b) in u.values().iter().zip(v.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fractional_shift_matches_closed_form() {
        let u = sine(100);
        let v = advect_exact(&u, 0.4, 0.5123).unwrap();
        let g = u.grid();
        for i in 0..100 {
            let x = g.center(0, i);
            assert!((v.values()[i] - (2.0 * PI * (x - 0.4 * 0.5123)).sin()).abs() < 1e-12);
        }
        let w = advect_exact(&u, 0.4, 0.5).unwrap();
        for i in 0..100 {
            let x = g.center(0, i);
            assert!((w.values()[i] - (2.0 * PI * (x - 0.2)).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_stays_constant() {
        let g = Grid::line(0.0, 1.0, 32).unwrap();
        let u0 = Field::new(g, 1, vec![0.7; 32]).unwrap();
        let time = TimeAxis::new(0.0, 1.0, 5).unwrap();
        let traj = solve_advection(&u0, &AdvectionParams::new(-1.3), &time).unwrap();
        for f in traj.frames() {
            assert!(f.values().iter().all(|v| *v == 0.7));
        }
    }

    #[test]
    fn both_directions_track_the_exact_shift() {
        for beta in [0.7, -0.7] {
            let u0 = sine(256);
            let time = TimeAxis::new(0.0, 1.0, 3).unwrap();
            let traj = solve_advection(&u0, &AdvectionParams::new(beta), &time).unwrap();
            let exact = advect_exact(&u0, beta, 1.0).unwrap();
            let err: f64 = traj
                .last()
                .values()
                .iter()
                .zip(exact.values())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                / 256.0;
            assert!(err.sqrt() < 1e-3, "beta {beta}: {}", err.sqrt());
        }
    }

    #[test]
    fn sum_is_conserved() {
        let g = Grid::line(0.0, 1.0, 128).unwrap();
        let u0 = Field::from_fn(g, |x| (-(x[0] - 0.3).powi(2) * 80.0).exp()).unwrap();
        let time = TimeAxis::new(0.0, 3.0, 2).unwrap();
        let traj = solve_advection(&u0, &AdvectionParams::new(1.0), &time).unwrap();
        let s0: f64 = u0.values().iter().sum();
        let s1: f64 = traj.last().values().iter().sum();
        assert!((s0 - s1).abs() < 1e-12 * s0);
    }
}
