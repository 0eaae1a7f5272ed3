//! Viscous Burgers' equation `u_t + (u^2/2)_x = (nu/pi) u_xx` on a periodic line.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{march_snapshots, Cfl, Field, TimeAxis, Trajectory};

use super::advection::require_scalar_line;
use super::muscl::slope;
use super::SspRk2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurgersParams {
    /// The diffusion coefficient of the equation is `nu / pi`.
    pub nu: f64,
    #[serde(default)]
    pub cfl: Cfl,
}

impl BurgersParams {
    pub fn new(nu: f64) -> Self {
        Self {
            nu,
            cfl: Cfl::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(Error::Config(format!("Burgers nu must be positive, got {}", self.nu)));
        }
        self.cfl.validate()
    }

    pub fn diffusivity(&self) -> f64 {
        self.nu / PI
    }
}

/// Godunov flux of `u^2 / 2`.
#[inline]
fn godunov(ul: f64, ur: f64) -> f64 {
    let a = ul.max(0.0);
    let b = ur.min(0.0);
    (0.5 * a * a).max(0.5 * b * b)
}

struct Scratch {
    slopes: Vec<f64>,
    faces: Vec<f64>,
}

fn rhs(u: &[f64], du: &mut [f64], diff: f64, dx: f64, s: &mut Scratch) {
    let n = u.len();
    for i in 0..n {
        s.slopes[i] = slope(u[(i + n - 1) % n], u[i], u[(i + 1) % n]);
    }
    // faces[j] sits between cells j - 1 and j
    for j in 0..n {
        let l = (j + n - 1) % n;
        let ul = u[l] + 0.5 * s.slopes[l];
        let ur = u[j] - 0.5 * s.slopes[j];
        s.faces[j] = godunov(ul, ur) - diff * (u[j] - u[l]) / dx;
    }
    for i in 0..n {
        du[i] = -(s.faces[(i + 1) % n] - s.faces[i]) / dx;
    }
}

/// Step from the summed advective and diffusive rates, which keeps the
/// combined update total-variation diminishing.
fn stable_dt(u: &[f64], diff: f64, dx: f64, cfl: Cfl) -> f64 {
    let speed = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    1.0 / (speed / (cfl.advective * dx) + diff / (cfl.diffusive * dx * dx))
}

pub fn solve_burgers(u0: &Field, params: &BurgersParams, time: &TimeAxis) -> Result<Trajectory> {
    require_scalar_line(u0, "Burgers")?;
    params.validate()?;
    let grid = u0.grid().clone();
    let dx = grid.dx(0);
    let diff = params.diffusivity();
    let n = grid.len();
    let mut rk = SspRk2::new(n);
    let mut scratch = Scratch {
        slopes: vec![0.0; n],
        faces: vec![0.0; n],
    };
    let mut frames = Vec::with_capacity(time.n_snapshots);
    let mut u = u0.values().to_vec();
    march_snapshots(
        time,
        &mut u,
        |u| Ok(stable_dt(u, diff, dx, params.cfl)),
        |u, _, h| {
            rk.step(u, h, |x, k| {
                rhs(x, k, diff, dx, &mut scratch);
                Ok(())
            })
        },
        |u, _| {
            frames.push(Field::new(grid.clone(), 1, u.clone())?);
            Ok(())
        },
    )?;
    Trajectory::new(*time, frames)
}
