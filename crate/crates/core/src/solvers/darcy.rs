//! Steady Darcy flow `-div(a grad u) = beta` on a 2D box with `u = 0` on
//! the boundary, reached by explicit pseudo-time marching.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarcyParams {
    pub beta: f64,
    pub pseudo_dt_cfl: f64,
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for DarcyParams {
    fn default() -> Self {
        Self {
            beta: 1.0,
            pseudo_dt_cfl: 0.2,
            tol: 1e-6,
            max_iterations: 1_000_000,
        }
    }
}

impl DarcyParams {
    pub fn with_beta(beta: f64) -> Self {
        Self {
            beta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || !(self.tol > 0.0) || self.max_iterations == 0 {
            return Err(Error::Config(format!("inadmissible Darcy parameters {self:?}")));
        }
        // explicit stability in 2D needs dt * a * (2/dx^2 + 2/dy^2) <= 1
        if !(self.pseudo_dt_cfl > 0.0 && self.pseudo_dt_cfl <= 0.25) {
            return Err(Error::Config(format!(
                "pseudo-time CFL {} not in (0, 0.25]",
                self.pseudo_dt_cfl
            )));
        }
        Ok(())
    }
}

/// Converged pseudo-time run.
#[derive(Debug, Clone)]
pub struct DarcyRun {
    /// Channels `(a, u)`.
    pub field: Field,
    pub iterations: usize,
    /// Final `max|du| / (dt max|u| + eps)`.
    pub update_norm: f64,
}

const EPS: f64 = 1e-300;

/// Face transmissibilities: harmonic means inside, the cell value on walls.
struct Faces {
    nx: usize,
    ny: usize,
    /// (nx + 1) x ny faces normal to x
    ax: Vec<f64>,
    /// nx x (ny + 1) faces normal to y
    ay: Vec<f64>,
    cx: f64,
    cy: f64,
}

fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

impl Faces {
    fn new(grid: &Grid, a: &[f64]) -> Self {
        let (nx, ny) = (grid.shape()[0], grid.shape()[1]);
        let mut ax = vec![0.0; (nx + 1) * ny];
        for i in 0..=nx {
            for j in 0..ny {
                ax[i * ny + j] = if i == 0 {
                    a[j]
                } else if i == nx {
                    a[(nx - 1) * ny + j]
                } else {
                    harmonic(a[(i - 1) * ny + j], a[i * ny + j])
                };
            }
        }
        let mut ay = vec![0.0; nx * (ny + 1)];
        for i in 0..nx {
            for j in 0..=ny {
                ay[i * (ny + 1) + j] = if j == 0 {
                    a[i * ny]
                } else if j == ny {
                    a[i * ny + ny - 1]
                } else {
                    harmonic(a[i * ny + j - 1], a[i * ny + j])
                };
            }
        }
        let (dx, dy) = (grid.dx(0), grid.dx(1));
        Self {
            nx,
            ny,
            ax,
            ay,
            cx: 1.0 / (dx * dx),
            cy: 1.0 / (dy * dy),
        }
    }

    /// `div(a grad u)`; the zero boundary value enters through ghosts `-u`.
    fn divergence(&self, u: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.nx, self.ny);
        for i in 0..nx {
            for j in 0..ny {
                let c = i * ny + j;
                let uc = u[c];
                let west = if i > 0 { u[c - ny] } else { -uc };
                let east = if i + 1 < nx { u[c + ny] } else { -uc };
                let south = if j > 0 { u[c - 1] } else { -uc };
                let north = if j + 1 < ny { u[c + 1] } else { -uc };
                let fx = self.ax[(i + 1) * ny + j] * (east - uc) - self.ax[i * ny + j] * (uc - west);
                let fy = self.ay[i * (ny + 1) + j + 1] * (north - uc) - self.ay[i * (ny + 1) + j] * (uc - south);
                out[c] = self.cx * fx + self.cy * fy;
            }
        }
    }
}

fn check_coefficient(a_field: &Field) -> Result<()> {
    a_field.grid().require_dim(&[2], "Darcy flow")?;
    if a_field.channels() != 1 {
        return Err(Error::Shape("Darcy coefficient must be a single channel".into()));
    }
    if let Some((cell, a)) = a_field.values().iter().enumerate().find(|(_, a)| !(**a > 0.0)) {
        return Err(Error::Domain(format!("coefficient a = {a} at cell {cell} is not positive")));
    }
    Ok(())
}

pub fn darcy_pseudo_time(a_field: &Field, params: &DarcyParams) -> Result<DarcyRun> {
    check_coefficient(a_field)?;
    params.validate()?;
    let grid = a_field.grid();
    let a = a_field.values();
    let faces = Faces::new(grid, a);
    let a_max = a.iter().fold(0.0_f64, |m, v| m.max(*v));
    let dt = params.pseudo_dt_cfl * grid.dx_min().powi(2) / a_max;
    let n = grid.len();
    let mut u = vec![0.0; n];
    let mut lap = vec![0.0; n];
    let mut ratio = f64::INFINITY;
    for it in 1..=params.max_iterations {
        faces.divergence(&u, &mut lap);
        let mut du_max = 0.0_f64;
        let mut u_max = 0.0_f64;
        for c in 0..n {
            let du = dt * (lap[c] + params.beta);
            u[c] += du;
            du_max = du_max.max(du.abs());
            u_max = u_max.max(u[c].abs());
        }
        ratio = du_max / (dt * u_max + EPS);
        if !ratio.is_finite() {
            return Err(Error::NonFinite {
                context: "Darcy pseudo-time update".into(),
                index: it,
            });
        }
        if ratio < params.tol {
            let field = Field::from_channels(grid.clone(), &[a.to_vec(), u])?;
            return Ok(DarcyRun {
                field,
                iterations: it,
                update_norm: ratio,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: params.max_iterations,
        residual: ratio,
    })
}

/// Steady state as a two-channel field `(a, u)`.
pub fn solve_darcy_steady(a_field: &Field, params: &DarcyParams) -> Result<Field> {
    Ok(darcy_pseudo_time(a_field, params)?.field)
}

/// Pointwise residual `div(a grad u) + beta` of a candidate solution.
pub fn darcy_residual(a_field: &Field, u: &[f64], beta: f64) -> Result<Vec<f64>> {
    check_coefficient(a_field)?;
    if u.len() != a_field.grid().len() {
        return Err(Error::Shape("solution and coefficient sizes differ".into()));
    }
    let faces = Faces::new(a_field.grid(), a_field.values());
    let mut out = vec![0.0; u.len()];
    faces.divergence(u, &mut out);
    out.iter_mut().for_each(|r| *r += beta);
    Ok(out)
}
