//! 2D shallow-water equations with reflective walls.
//!
//! MUSCL-minmod on `(h, u, v)`, HLL fluxes and SSP-RK2. Every floating-point
//! operation is ordered so that a mirror-symmetric initial state stays
//! mirror-symmetric bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{march_snapshots, Cfl, Field, Grid, TimeAxis, Trajectory};

use super::muscl::slope;

pub const DEFAULT_GRAVITY: f64 = 1.0;

/// Height and momenta `(h, hu, hv)` plus an optional bathymetry.
#[derive(Debug, Clone, PartialEq)]
pub struct SweState {
    grid: Grid,
    gravity: f64,
    cells: Vec<[f64; 3]>,
    bathymetry: Option<Vec<f64>>,
}

impl SweState {
    /// Fluid at rest with height `h` over a flat bottom.
    pub fn at_rest(h: &Field, gravity: f64) -> Result<Self> {
        h.grid().require_dim(&[2], "shallow water")?;
        if h.channels() != 1 {
            return Err(Error::Shape("water height must be a single channel".into()));
        }
        if !(gravity > 0.0) {
            return Err(Error::Config(format!("gravity {gravity} must be positive")));
        }
        let cells = h.values().iter().map(|&x| [x, 0.0, 0.0]).collect();
        let s = Self {
            grid: h.grid().clone(),
            gravity,
            cells,
            bathymetry: None,
        };
        s.check(0.0)?;
        Ok(s)
    }

    pub fn with_bathymetry(mut self, b: &Field) -> Result<Self> {
        if b.grid() != &self.grid || b.channels() != 1 {
            return Err(Error::Shape("bathymetry must match the water grid".into()));
        }
        self.bathymetry = Some(b.values().to_vec());
        Ok(self)
    }

    fn check(&self, time: f64) -> Result<()> {
        check_cells(&self.cells, time)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn gravity(&self) -> f64 {
        self.gravity
    }

    pub fn height(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c[0]).collect()
    }

    pub fn cells(&self) -> &[[f64; 3]] {
        &self.cells
    }

    /// Total water volume `sum h dA`.
    pub fn volume(&self) -> f64 {
        let da = self.grid.dx(0) * self.grid.dx(1);
        self.cells.iter().map(|c| c[0]).sum::<f64>() * da
    }
}

fn check_cells(cells: &[[f64; 3]], time: f64) -> Result<()> {
    for (cell, c) in cells.iter().enumerate() {
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "shallow-water update".into(),
                index: cell,
            });
        }
        if !(c[0] > 0.0) {
            return Err(Error::Positivity {
                quantity: "water height",
                value: c[0],
                cell,
                time,
            });
        }
    }
    Ok(())
}

/// Primitive `(h, normal velocity, tangential velocity)`.
type Prim = [f64; 3];

fn physical_flux(q: &Prim, g: f64) -> [f64; 3] {
    let (h, un, ut) = (q[0], q[1], q[2]);
    let hu = h * un;
    [hu, hu * un + 0.5 * g * h * h, hu * ut]
}

/// HLL flux in the normal frame with Davis wave speeds.
pub fn swe_flux_hll(ql: &Prim, qr: &Prim, g: f64) -> Result<[f64; 3]> {
    if !(ql[0] > 0.0 && qr[0] > 0.0) {
        return Err(Error::Domain(format!("HLL needs h > 0, got {} / {}", ql[0], qr[0])));
    }
    Ok(hll(ql, qr, g))
}

fn hll(ql: &Prim, qr: &Prim, g: f64) -> [f64; 3] {
    let cl = (g * ql[0]).sqrt();
    let cr = (g * qr[0]).sqrt();
    let sl = (ql[1] - cl).min(qr[1] - cr);
    let sr = (ql[1] + cl).max(qr[1] + cr);
    let fl = physical_flux(ql, g);
    if sl >= 0.0 {
        return fl;
    }
    let fr = physical_flux(qr, g);
    if sr <= 0.0 {
        return fr;
    }
    let ul = [ql[0], ql[0] * ql[1], ql[0] * ql[2]];
    let ur = [qr[0], qr[0] * qr[1], qr[0] * qr[2]];
    std::array::from_fn(|k| (sr * fl[k] - sl * fr[k] + sl * sr * (ur[k] - ul[k])) / (sr - sl))
}

const G: usize = 2;

struct Solver {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    gravity: f64,
    bathymetry: Option<Vec<f64>>,
    /// padded primitive `(h, u, v)`
    prim: Vec<Prim>,
    line: Vec<Prim>,
    faces: Vec<[f64; 3]>,
    cells: Vec<[f64; 3]>,
    stage: Vec<[f64; 3]>,
    k: Vec<[f64; 3]>,
    time: f64,
}

impl Solver {
    fn pidx(&self, i: usize, j: usize) -> usize {
        i * (self.ny + 2 * G) + j
    }

    fn load(&mut self, cells: &[[f64; 3]]) {
        let (nx, ny) = (self.nx, self.ny);
        for i in 0..nx {
            for j in 0..ny {
                let c = cells[i * ny + j];
                let p = self.pidx(i + G, j + G);
                self.prim[p] = [c[0], c[1] / c[0], c[2] / c[0]];
            }
        }
        // mirror ghosts: copy h and tangential velocity, negate normal velocity
        for l in 0..G {
            for j in G..ny + G {
                let a = self.prim[self.pidx(G + l, j)];
                let b = self.prim[self.pidx(nx + G - 1 - l, j)];
                let lo = self.pidx(G - 1 - l, j);
                let hi = self.pidx(nx + G + l, j);
                self.prim[lo] = [a[0], -a[1], a[2]];
                self.prim[hi] = [b[0], -b[1], b[2]];
            }
        }
        for i in 0..nx + 2 * G {
            for l in 0..G {
                let a = self.prim[self.pidx(i, G + l)];
                let b = self.prim[self.pidx(i, ny + G - 1 - l)];
                let lo = self.pidx(i, G - 1 - l);
                let hi = self.pidx(i, ny + G + l);
                self.prim[lo] = [a[0], a[1], -a[2]];
                self.prim[hi] = [b[0], b[1], -b[2]];
            }
        }
    }

    fn rhs(&mut self, cells: &[[f64; 3]], out: &mut [[f64; 3]]) -> Result<()> {
        check_cells(cells, self.time)?;
        self.load(cells);
        let (nx, ny, g) = (self.nx, self.ny, self.gravity);
        out.iter_mut().for_each(|x| *x = [0.0; 3]);
        // x sweeps: normal component 1
        for j in 0..ny {
            for q in 0..nx + 2 * G {
                let p = self.prim[self.pidx(q, j + G)];
                self.line[q] = [p[0], p[1], p[2]];
            }
            sweep(&self.line, nx, g, &mut self.faces);
            for i in 0..nx {
                let c = i * ny + j;
                let (fa, fb) = (self.faces[i], self.faces[i + 1]);
                out[c][0] -= (fb[0] - fa[0]) / self.dx;
                out[c][1] -= (fb[1] - fa[1]) / self.dx;
                out[c][2] -= (fb[2] - fa[2]) / self.dx;
            }
        }
        // y sweeps: normal component 2, rotated into the normal frame
        for i in 0..nx {
            for q in 0..ny + 2 * G {
                let p = self.prim[self.pidx(i + G, q)];
                self.line[q] = [p[0], p[2], p[1]];
            }
            sweep(&self.line, ny, g, &mut self.faces);
            for j in 0..ny {
                let c = i * ny + j;
                let (fa, fb) = (self.faces[j], self.faces[j + 1]);
                out[c][0] -= (fb[0] - fa[0]) / self.dy;
                out[c][2] -= (fb[1] - fa[1]) / self.dy;
                out[c][1] -= (fb[2] - fa[2]) / self.dy;
            }
        }
        if let Some(b) = &self.bathymetry {
            for i in 0..nx {
                for j in 0..ny {
                    let c = i * ny + j;
                    let bx = if i == 0 || i + 1 == nx {
                        0.0
                    } else {
                        (b[c + ny] - b[c - ny]) / (2.0 * self.dx)
                    };
                    let by = if j == 0 || j + 1 == ny {
                        0.0
                    } else {
                        (b[c + 1] - b[c - 1]) / (2.0 * self.dy)
                    };
                    out[c][1] -= g * cells[c][0] * bx;
                    out[c][2] -= g * cells[c][0] * by;
                }
            }
        }
        Ok(())
    }

    fn new(state: &SweState) -> Self {
        let (nx, ny) = (state.grid.shape()[0], state.grid.shape()[1]);
        let longest = nx.max(ny) + 2 * G;
        let n = nx * ny;
        Self {
            nx,
            ny,
            dx: state.grid.dx(0),
            dy: state.grid.dx(1),
            gravity: state.gravity,
            bathymetry: state.bathymetry.clone(),
            prim: vec![[1.0, 0.0, 0.0]; (nx + 2 * G) * (ny + 2 * G)],
            line: vec![[1.0, 0.0, 0.0]; longest],
            faces: vec![[0.0; 3]; longest],
            cells: state.cells.clone(),
            stage: vec![[0.0; 3]; n],
            k: vec![[0.0; 3]; n],
            time: 0.0,
        }
    }

    fn stable_dt(&self, cfl: f64) -> f64 {
        let mut rate = 0.0_f64;
        for c in &self.cells {
            let h = c[0];
            let s = (self.gravity * h).sqrt();
            let r = ((c[1] / h).abs() + s) / self.dx + ((c[2] / h).abs() + s) / self.dy;
            rate = rate.max(r);
        }
        cfl / rate
    }

    fn step(&mut self, dt: f64) -> Result<()> {
        let mut cells = std::mem::take(&mut self.cells);
        let mut k = std::mem::take(&mut self.k);
        let mut stage = std::mem::take(&mut self.stage);
        let result = (|| -> Result<()> {
            self.rhs(&cells, &mut k)?;
            for c in 0..cells.len() {
                stage[c] = std::array::from_fn(|q| cells[c][q] + dt * k[c][q]);
            }
            self.rhs(&stage, &mut k)?;
            for c in 0..cells.len() {
                cells[c] = std::array::from_fn(|q| 0.5 * cells[c][q] + 0.5 * (stage[c][q] + dt * k[c][q]));
            }
            Ok(())
        })();
        self.cells = cells;
        self.k = k;
        self.stage = stage;
        result?;
        self.time += dt;
        check_cells(&self.cells, self.time)
    }
}

fn sweep(line: &[Prim], n: usize, g: f64, faces: &mut [[f64; 3]]) {
    for f in 0..=n {
        let (l, r) = (f + 1, f + 2);
        let ql: Prim = std::array::from_fn(|k| line[l][k] + 0.5 * slope(line[l - 1][k], line[l][k], line[l + 1][k]));
        let qr: Prim = std::array::from_fn(|k| line[r][k] - 0.5 * slope(line[r - 1][k], line[r][k], line[r + 1][k]));
        faces[f] = hll(&ql, &qr, g);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweParams {
    #[serde(default)]
    pub cfl: Cfl,
}

impl Default for SweParams {
    fn default() -> Self {
        Self { cfl: Cfl::default() }
    }
}

/// Marches the state across `time`, storing water height only.
pub fn solve_swe(state0: &SweState, params: &SweParams, time: &TimeAxis) -> Result<Trajectory> {
    params.cfl.validate()?;
    state0.check(time.t_start)?;
    let grid = state0.grid.clone();
    let mut solver = Solver::new(state0);
    let cfl = params.cfl.advective;
    let mut frames = Vec::with_capacity(time.n_snapshots);
    march_snapshots(
        time,
        &mut solver,
        |s| Ok(s.stable_dt(cfl)),
        |s, t, h| {
            s.time = t;
            s.step(h)
        },
        |s, _| {
            frames.push(Field::new(grid.clone(), 1, s.cells.iter().map(|x| x[0]).collect())?);
            Ok(())
        },
    )?;
    Trajectory::new(*time, frames)
}

/// Takes `steps` CFL-limited substeps and returns the full final state.
pub fn advance_swe(state0: &SweState, params: &SweParams, steps: usize) -> Result<SweState> {
    params.cfl.validate()?;
    let mut solver = Solver::new(state0);
    for _ in 0..steps {
        let dt = solver.stable_dt(params.cfl.advective);
        solver.step(dt)?;
    }
    Ok(SweState {
        cells: solver.cells,
        ..state0.clone()
    })
}
