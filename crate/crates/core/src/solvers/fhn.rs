//! Two-species FitzHugh-Nagumo diffusion-reaction on a closed 2D box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cfl_timestep, march_snapshots, Cfl, Field, Grid, TimeAxis, Trajectory};

use super::Rk4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FhnParams {
    pub du: f64,
    pub dv: f64,
    pub k: f64,
    /// Switches the reaction terms off, leaving pure diffusion.
    #[serde(default = "yes")]
    pub reaction: bool,
    #[serde(default)]
    pub cfl: Cfl,
}

fn yes() -> bool {
    true
}

impl Default for FhnParams {
    fn default() -> Self {
        Self {
            du: 1e-3,
            dv: 5e-3,
            k: 5e-3,
            reaction: true,
            cfl: Cfl::default(),
        }
    }
}

impl FhnParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.du > 0.0 && self.dv > 0.0) || !self.k.is_finite() {
            return Err(Error::Config(format!("inadmissible FitzHugh-Nagumo parameters {self:?}")));
        }
        self.cfl.validate()
    }
}

/// Reaction terms `(u - u^3 - k - v, u - v)`.
pub fn fhn_reaction(u: f64, v: f64, params: &FhnParams) -> (f64, f64) {
    (u - u * u * u - params.k - v, u - v)
}

/// Five-point finite-volume Laplacian with zero-flux walls (mirror ghosts).
pub(crate) fn neumann_laplacian(u: &[f64], out: &mut [f64], nx: usize, ny: usize, dx: f64, dy: f64, d: f64) {
    let (cx, cy) = (d / (dx * dx), d / (dy * dy));
    for i in 0..nx {
        for j in 0..ny {
            let c = i * ny + j;
            let mut acc = 0.0;
            if i > 0 {
                acc += cx * (u[c - ny] - u[c]);
            }
            if i + 1 < nx {
                acc += cx * (u[c + ny] - u[c]);
            }
            if j > 0 {
                acc += cy * (u[c - 1] - u[c]);
            }
            if j + 1 < ny {
                acc += cy * (u[c + 1] - u[c]);
            }
            out[c] = acc;
        }
    }
}

struct System<'a> {
    params: &'a FhnParams,
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    lap: Vec<f64>,
}

impl System<'_> {
    /// State layout: all of u, then all of v.
    fn rhs(&mut self, s: &[f64], ds: &mut [f64]) {
        let n = self.nx * self.ny;
        let (u, v) = s.split_at(n);
        let (du, dv) = ds.split_at_mut(n);
        neumann_laplacian(u, du, self.nx, self.ny, self.dx, self.dy, self.params.du);
        neumann_laplacian(v, &mut self.lap, self.nx, self.ny, self.dx, self.dy, self.params.dv);
        dv.copy_from_slice(&self.lap);
        if self.params.reaction {
            for c in 0..n {
                let (ru, rv) = fhn_reaction(u[c], v[c], self.params);
                du[c] += ru;
                dv[c] += rv;
            }
        }
    }
}

fn stable_dt(s: &[f64], n: usize, dx_min: f64, p: &FhnParams) -> Result<f64> {
    let dmax = p.du.max(p.dv);
    let mut dt = cfl_timestep(dx_min, 0.0, dmax, p.cfl)?;
    if p.reaction {
        let stiff = s[..n].iter().fold(0.0_f64, |m, u| m.max((1.0 - 3.0 * u * u).abs()));
        dt = dt.min(p.cfl.advective / (stiff + 1.0));
    }
    Ok(dt)
}

pub fn solve_diffreact2d(u0: &Field, v0: &Field, params: &FhnParams, time: &TimeAxis) -> Result<Trajectory> {
    let grid: Grid = u0.grid().clone();
    grid.require_dim(&[2], "FitzHugh-Nagumo")?;
    if v0.grid() != &grid || u0.channels() != 1 || v0.channels() != 1 {
        return Err(Error::Shape("u0 and v0 must be single-channel fields on one grid".into()));
    }
    params.validate()?;
    let (nx, ny) = (grid.shape()[0], grid.shape()[1]);
    let n = nx * ny;
    let mut sys = System {
        params,
        nx,
        ny,
        dx: grid.dx(0),
        dy: grid.dx(1),
        lap: vec![0.0; n],
    };
    let dx_min = grid.dx_min();
    let mut state: Vec<f64> = u0.values().iter().chain(v0.values()).copied().collect();
    let mut rk = Rk4::new(2 * n);
    let mut frames = Vec::with_capacity(time.n_snapshots);
    march_snapshots(
        time,
        &mut state,
        |s| stable_dt(s, n, dx_min, params),
        |s, _, h| {
            rk.step(s, h, |x, k| {
                sys.rhs(x, k);
                Ok(())
            })
        },
        |s, _| {
            let (u, v) = s.split_at(n);
            frames.push(Field::from_channels(grid.clone(), &[u.to_vec(), v.to_vec()])?);
            Ok(())
        },
    )?;
    Trajectory::new(*time, frames)
}
