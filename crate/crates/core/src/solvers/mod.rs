//! Numerical solvers for every PDE family in the benchmark.
//!
//! Scalar solvers take a [`Field`](crate::grid::Field) initial condition and
//! return a [`Trajectory`](crate::grid::Trajectory) sampled on a
//! [`TimeAxis`](crate::grid::TimeAxis). Internal steps follow the CFL limit
//! and the last substep of each interval is clipped onto the snapshot time.

pub mod advection;
pub mod burgers;
pub mod cns;
pub mod darcy;
pub mod diffreact;
pub mod diffsorp;
pub mod fhn;
pub mod muscl;
pub mod swe;

use crate::error::Result;

/// Two-stage strong-stability-preserving Runge-Kutta with reusable buffers.
pub(crate) struct SspRk2 {
    k: Vec<f64>,
    stage: Vec<f64>,
}

impl SspRk2 {
    pub fn new(n: usize) -> Self {
        Self {
            k: vec![0.0; n],
            stage: vec![0.0; n],
        }
    }

    pub fn step(
        &mut self,
        u: &mut [f64],
        h: f64,
        mut rhs: impl FnMut(&[f64], &mut [f64]) -> Result<()>,
    ) -> Result<()> {
        rhs(u, &mut self.k)?;
        for ((s, &x), &k) in self.stage.iter_mut().zip(u.iter()).zip(&self.k) {
            *s = x + h * k;
        }
        rhs(&self.stage, &mut self.k)?;
        for ((x, &s), &k) in u.iter_mut().zip(&self.stage).zip(&self.k) {
            *x = 0.5 * *x + 0.5 * (s + h * k);
        }
        Ok(())
    }
}

/// Classical fourth-order Runge-Kutta with reusable buffers.
pub(crate) struct Rk4 {
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            stage: vec![0.0; n],
        }
    }

    pub fn step(
        &mut self,
        u: &mut [f64],
        h: f64,
        mut rhs: impl FnMut(&[f64], &mut [f64]) -> Result<()>,
    ) -> Result<()> {
        let [k1, k2, k3, k4] = &mut self.k;
        rhs(u, k1)?;
        for i in 0..u.len() {
            self.stage[i] = u[i] + 0.5 * h * k1[i];
        }
        rhs(&self.stage, k2)?;
        for i in 0..u.len() {
            self.stage[i] = u[i] + 0.5 * h * k2[i];
        }
        rhs(&self.stage, k3)?;
        for i in 0..u.len() {
            self.stage[i] = u[i] + h * k3[i];
        }
        rhs(&self.stage, k4)?;
        for i in 0..u.len() {
            u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        Ok(())
    }
}
