//! Fisher-type diffusion-reaction `u_t = nu u_xx + rho u (1 - u)`.
//!
//! Each substep is a Strang split: half a logistic step solved exactly,
//! a full central-difference diffusion step, then the second half step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cfl_timestep, march_snapshots, Cfl, Field, TimeAxis, Trajectory};

use super::advection::require_scalar_line;
use super::SspRk2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactDiffParams {
    pub nu: f64,
    pub rho: f64,
    #[serde(default)]
    pub cfl: Cfl,
}

impl ReactDiffParams {
    pub fn new(nu: f64, rho: f64) -> Self {
        Self {
            nu,
            rho,
            cfl: Cfl::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0 && self.rho >= 0.0) || !self.nu.is_finite() || !self.rho.is_finite() {
            return Err(Error::Config(format!(
                "diffusion-reaction needs nu >= 0 and rho >= 0, got {} / {}",
                self.nu, self.rho
            )));
        }
        self.cfl.validate()
    }
}

/// Closed-form solution of `du/dt = rho u (1 - u)` after `dt`.
pub fn pes_logistic_step(u: f64, rho: f64, dt: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    u / (u + (1.0 - u) * (-rho * dt).exp())
}

fn laplacian(u: &[f64], du: &mut [f64], nu: f64, dx: f64) {
    let n = u.len();
    let c = nu / (dx * dx);
    for i in 0..n {
        du[i] = c * (u[(i + n - 1) % n] - 2.0 * u[i] + u[(i + 1) % n]);
    }
}

pub fn solve_diffreact1d(u0: &Field, params: &ReactDiffParams, time: &TimeAxis) -> Result<Trajectory> {
    require_scalar_line(u0, "diffusion-reaction")?;
    params.validate()?;
    let grid = u0.grid().clone();
    if params.nu == 0.0 && params.rho == 0.0 {
        return Trajectory::new(*time, vec![u0.clone(); time.n_snapshots]);
    }
    let dx = grid.dx(0);
    // without diffusion the split degenerates to one exact step per interval
    let dt = if params.nu == 0.0 {
        time.interval()
    } else {
        cfl_timestep(dx, 0.0, params.nu, params.cfl)?
    };
    let mut rk = SspRk2::new(grid.len());
    let mut frames = Vec::with_capacity(time.n_snapshots);
    let mut u = u0.values().to_vec();
    let (nu, rho) = (params.nu, params.rho);
    march_snapshots(
        time,
        &mut u,
        |_| Ok(dt),
        |u, _, h| {
            if rho > 0.0 {
                let half = if nu > 0.0 { 0.5 * h } else { h };
                u.iter_mut().for_each(|v| *v = pes_logistic_step(*v, rho, half));
            }
            if nu > 0.0 {
                rk.step(u, h, |x, k| {
                    laplacian(x, k, nu, dx);
                    Ok(())
                })?;
                if rho > 0.0 {
                    u.iter_mut().for_each(|v| *v = pes_logistic_step(*v, rho, 0.5 * h));
                }
            }
            Ok(())
        },
        |u, _| {
            frames.push(Field::new(grid.clone(), 1, u.clone())?);
            Ok(())
        },
    )?;
    Trajectory::new(*time, frames)
}
