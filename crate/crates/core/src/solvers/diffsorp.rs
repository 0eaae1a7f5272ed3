//! Diffusion with Freundlich sorption: `u_t = D / R(u) u_xx` on `(0, 1)`.
//!
//! The inlet holds `u = 1`; the outlet satisfies `u = -D u_x`, an outflow
//! flux equal to the boundary concentration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cfl_timestep, march_snapshots, Cfl, Field, TimeAxis, Trajectory};

use super::advection::require_scalar_line;
use super::Rk4;

pub const U_MIN: f64 = 1e-8;
pub const INLET: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SorptionParams {
    pub porosity: f64,
    pub bulk_density: f64,
    pub freundlich_k: f64,
    pub freundlich_nf: f64,
    pub diffusion: f64,
    #[serde(default = "default_u_min")]
    pub u_min: f64,
    #[serde(default)]
    pub cfl: Cfl,
}

fn default_u_min() -> f64 {
    U_MIN
}

impl Default for SorptionParams {
    fn default() -> Self {
        Self {
            porosity: 0.29,
            bulk_density: 2880.0,
            freundlich_k: 3.5e-4,
            freundlich_nf: 0.874,
            diffusion: 5e-4,
            u_min: U_MIN,
            cfl: Cfl::default(),
        }
    }
}

impl SorptionParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.porosity > 0.0
            && self.porosity < 1.0
            && self.freundlich_nf > 0.0
            && self.freundlich_nf < 1.0
            && self.bulk_density > 0.0
            && self.freundlich_k > 0.0
            && self.diffusion > 0.0
            && self.u_min > 0.0;
        if !ok {
            return Err(Error::Config(format!("inadmissible sorption parameters {self:?}")));
        }
        self.cfl.validate()
    }

    fn retardation_unchecked(&self, u: f64) -> f64 {
        let c = (1.0 - self.porosity) / self.porosity * self.bulk_density * self.freundlich_k * self.freundlich_nf;
        1.0 + c * u.max(self.u_min).powf(self.freundlich_nf - 1.0)
    }
}

/// Retardation factor with the concentration clamped below at `u_min`.
pub fn freundlich_retardation(u: f64, params: &SorptionParams) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::Domain(format!("retardation needs u >= 0, got {u}")));
    }
    Ok(params.retardation_unchecked(u))
}

/// Outlet face value from a one-sided second-order derivative.
fn outlet_value(last: f64, before: f64, d: f64, h: f64) -> f64 {
    d * (9.0 * last - before) / (3.0 * h + 8.0 * d)
}

fn rhs(u: &[f64], du: &mut [f64], p: &SorptionParams, h: f64, faces: &mut [f64]) {
    let n = u.len();
    let d = p.diffusion;
    let coef = |avg: f64| d / p.retardation_unchecked(avg.max(0.0));
    // faces[j] is the diffusive flux -D/R u_x through the left face of cell j
    faces[0] = -coef(INLET) * (u[0] - INLET) / (0.5 * h);
    for j in 1..n {
        let avg = 0.5 * (u[j - 1] + u[j]);
        faces[j] = -coef(avg) * (u[j] - u[j - 1]) / h;
    }
    let ub = outlet_value(u[n - 1], u[n - 2], d, h);
    faces[n] = -coef(ub) * (ub - u[n - 1]) / (0.5 * h);
    for i in 0..n {
        du[i] = -(faces[i + 1] - faces[i]) / h;
    }
}

fn max_face_diffusivity(u: &[f64], p: &SorptionParams) -> f64 {
    let umax = u.iter().fold(INLET, |m, v| m.max(*v));
    p.diffusion / p.retardation_unchecked(umax)
}

pub fn solve_diffsorp(u0: &Field, params: &SorptionParams, time: &TimeAxis) -> Result<Trajectory> {
    require_scalar_line(u0, "diffusion-sorption")?;
    params.validate()?;
    if let Some(v) = u0.values().iter().find(|v| **v < 0.0) {
        return Err(Error::Domain(format!("negative initial concentration {v}")));
    }
    let grid = u0.grid().clone();
    let h = grid.dx(0);
    let n = grid.len();
    let mut rk = Rk4::new(n);
    let mut faces = vec![0.0; n + 1];
    let mut frames = Vec::with_capacity(time.n_snapshots);
    let mut u = u0.values().to_vec();
    march_snapshots(
        time,
        &mut u,
        |u| cfl_timestep(h, 0.0, max_face_diffusivity(u, params), params.cfl),
        |u, _, dt| {
            rk.step(u, dt, |x, k| {
                rhs(x, k, params, h, &mut faces);
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

/// Value at the inlet face implied by the Dirichlet ghost cell.
pub fn inlet_face_value(u: &Field) -> f64 {
    let first = u.values()[0];
    0.5 * ((2.0 * INLET - first) + first)
}
