//! Compressible Navier-Stokes for an ideal gas in one to three dimensions.
//!
//! Unsplit finite volumes: MUSCL-minmod reconstruction of `(rho, v, p)`,
//! HLLC fluxes, central viscous stresses and SSP-RK2 in time. Conserved
//! variables are `(rho, rho v, E)` with `E = p / (gamma - 1) + rho |v|^2 / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{march_snapshots, Cfl, Field, Grid, TimeAxis, Trajectory};

use super::muscl::slope;

pub const GAMMA: f64 = 5.0 / 3.0;

/// Flux or conserved vector: mass, three momentum slots, energy.
pub type Flux = [f64; 5];

pub fn sound_speed(rho: f64, p: f64, gamma: f64) -> f64 {
    (gamma * p / rho).sqrt()
}

/// Total energy density from primitive values.
pub fn eos_energy(rho: f64, v: &[f64], p: f64, gamma: f64) -> f64 {
    let v2: f64 = v.iter().map(|x| x * x).sum();
    p / (gamma - 1.0) + 0.5 * rho * v2
}

fn pressure_of(u: &Flux, gamma: f64) -> f64 {
    let m2 = u[1] * u[1] + u[2] * u[2] + u[3] * u[3];
    (gamma - 1.0) * (u[4] - 0.5 * m2 / u[0])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub v: [f64; 3],
    pub p: f64,
}

impl Primitive {
    pub fn new(rho: f64, v: [f64; 3], p: f64) -> Self {
        Self { rho, v, p }
    }

    pub fn from_conserved(u: &Flux, gamma: f64) -> Self {
        let rho = u[0];
        Self {
            rho,
            v: [u[1] / rho, u[2] / rho, u[3] / rho],
            p: pressure_of(u, gamma),
        }
    }

    pub fn to_conserved(&self, gamma: f64) -> Flux {
        let r = self.rho;
        [r, r * self.v[0], r * self.v[1], r * self.v[2], eos_energy(r, &self.v, self.p, gamma)]
    }
}

/// Exact Euler flux along `axis`.
pub fn euler_flux(q: &Primitive, axis: usize, gamma: f64) -> Flux {
    let vn = q.v[axis];
    let e = eos_energy(q.rho, &q.v, q.p, gamma);
    let mut f = [
        q.rho * vn,
        q.rho * q.v[0] * vn,
        q.rho * q.v[1] * vn,
        q.rho * q.v[2] * vn,
        (e + q.p) * vn,
    ];
    f[1 + axis] += q.p;
    f
}

/// HLLC flux with Davis wave-speed estimates.
pub fn hllc_flux(ql: &Primitive, qr: &Primitive, axis: usize, gamma: f64) -> Result<Flux> {
    for q in [ql, qr] {
        if !(q.rho > 0.0) {
            return Err(Error::Domain(format!("HLLC needs rho > 0, got {}", q.rho)));
        }
        if !(q.p > 0.0) {
            return Err(Error::Domain(format!("HLLC needs p > 0, got {}", q.p)));
        }
    }
    Ok(hllc_unchecked(ql, qr, axis, gamma))
}

fn hllc_unchecked(ql: &Primitive, qr: &Primitive, axis: usize, gamma: f64) -> Flux {
    let (ul, ur) = (ql.v[axis], qr.v[axis]);
    let cl = sound_speed(ql.rho, ql.p, gamma);
    let cr = sound_speed(qr.rho, qr.p, gamma);
    let sl = (ul - cl).min(ur - cr);
    let sr = (ul + cl).max(ur + cr);
    let fl = euler_flux(ql, axis, gamma);
    if sl >= 0.0 {
        return fl;
    }
    let fr = euler_flux(qr, axis, gamma);
    if sr <= 0.0 {
        return fr;
    }
    let ml = ql.rho * (sl - ul);
    let mr = qr.rho * (sr - ur);
    let s_star = (qr.p - ql.p + ul * ml - ur * mr) / (ml - mr);
    let (q, f, s, un) = if s_star >= 0.0 { (ql, fl, sl, ul) } else { (qr, fr, sr, ur) };
    let u = q.to_conserved(gamma);
    let factor = q.rho * (s - un) / (s - s_star);
    let mut star = [
        factor,
        factor * q.v[0],
        factor * q.v[1],
        factor * q.v[2],
        factor * (u[4] / q.rho + (s_star - un) * (s_star + q.p / (q.rho * (s - un)))),
    ];
    star[1 + axis] = factor * s_star;
    std::array::from_fn(|k| f[k] + s * (star[k] - u[k]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    /// Zeroth-order extrapolation: ghosts copy the nearest interior cell.
    Outgoing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CnsParams {
    pub eta: f64,
    pub zeta: f64,
    pub bc: Boundary,
    #[serde(default)]
    pub cfl: Cfl,
}

impl CnsParams {
    pub fn new(eta: f64, zeta: f64, bc: Boundary) -> Self {
        Self {
            eta,
            zeta,
            bc,
            cfl: Cfl::default(),
        }
    }

    pub fn inviscid(bc: Boundary) -> Self {
        Self::new(0.0, 0.0, bc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.zeta >= 0.0) || !self.eta.is_finite() || !self.zeta.is_finite() {
            return Err(Error::Config(format!(
                "viscosities must be non-negative, got eta = {} zeta = {}",
                self.eta, self.zeta
            )));
        }
        self.cfl.validate()
    }

    fn viscous(&self) -> bool {
        self.eta > 0.0 || self.zeta > 0.0
    }
}

/// Conserved compressible-flow state on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedState {
    grid: Grid,
    gamma: f64,
    cells: Vec<Flux>,
}

impl ConservedState {
    /// Builds the state from per-cell density, velocity components and pressure.
    pub fn from_primitive(grid: Grid, gamma: f64, rho: &[f64], vel: &[Vec<f64>], p: &[f64]) -> Result<Self> {
        let n = grid.len();
        if vel.len() != grid.dim() {
            return Err(Error::Shape(format!(
                "{} velocity components on a {}-dimensional grid",
                vel.len(),
                grid.dim()
            )));
        }
        if rho.len() != n || p.len() != n || vel.iter().any(|v| v.len() != n) {
            return Err(Error::Shape(format!("primitive arrays must hold {n} cells")));
        }
        if !(gamma > 1.0) {
            return Err(Error::Config(format!("gamma {gamma} must exceed 1")));
        }
        let cells = (0..n)
            .map(|c| {
                let mut v = [0.0; 3];
                for (a, comp) in vel.iter().enumerate() {
                    v[a] = comp[c];
                }
                Primitive::new(rho[c], v, p[c]).to_conserved(gamma)
            })
            .collect();
        let state = Self { grid, gamma, cells };
        state.check(0.0)?;
        Ok(state)
    }

    pub fn uniform(grid: Grid, gamma: f64, rho: f64, v: &[f64], p: f64) -> Result<Self> {
        let n = grid.len();
        let vel: Vec<Vec<f64>> = v.iter().map(|x| vec![*x; n]).collect();
        Self::from_primitive(grid, gamma, &vec![rho; n], &vel, &vec![p; n])
    }

    fn check(&self, time: f64) -> Result<()> {
        for (cell, u) in self.cells.iter().enumerate() {
            if u.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    context: "compressible state".into(),
                    index: cell,
                });
            }
            if !(u[0] > 0.0) {
                return Err(Error::Positivity {
                    quantity: "density",
                    value: u[0],
                    cell,
                    time,
                });
            }
            let p = pressure_of(u, self.gamma);
            if !(p > 0.0) {
                return Err(Error::Positivity {
                    quantity: "pressure",
                    value: p,
                    cell,
                    time,
                });
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn cells(&self) -> &[Flux] {
        &self.cells
    }

    pub fn density(&self) -> Vec<f64> {
        self.cells.iter().map(|u| u[0]).collect()
    }

    pub fn momentum(&self, axis: usize) -> Vec<f64> {
        self.cells.iter().map(|u| u[1 + axis]).collect()
    }

    pub fn energy(&self) -> Vec<f64> {
        self.cells.iter().map(|u| u[4]).collect()
    }

    pub fn pressure(&self) -> Vec<f64> {
        self.cells.iter().map(|u| pressure_of(u, self.gamma)).collect()
    }

    pub fn velocity(&self, axis: usize) -> Vec<f64> {
        self.cells.iter().map(|u| u[1 + axis] / u[0]).collect()
    }

    /// Domain integrals of mass, each momentum component and energy.
    pub fn totals(&self) -> Vec<f64> {
        let dv: f64 = (0..self.grid.dim()).map(|a| self.grid.dx(a)).product();
        let d = self.grid.dim();
        let mut out = vec![0.0; d + 2];
        for u in &self.cells {
            out[0] += u[0];
            for a in 0..d {
                out[1 + a] += u[1 + a];
            }
            out[d + 1] += u[4];
        }
        out.iter_mut().for_each(|x| *x *= dv);
        out
    }

    /// Channels `(rho, v_1, .., v_d, p)`.
    pub fn to_primitive_field(&self) -> Result<Field> {
        let mut chans = vec![self.density()];
        for a in 0..self.grid.dim() {
            chans.push(self.velocity(a));
        }
        chans.push(self.pressure());
        Field::from_channels(self.grid.clone(), &chans)
    }
}

/// Pressure of every cell as a single-channel field.
pub fn eos_pressure(state: &ConservedState) -> Result<Field> {
    Field::new(state.grid.clone(), 1, state.pressure())
}

const GHOSTS: usize = 2;

/// Padded index arithmetic: two ghost layers on every active axis.
#[derive(Debug, Clone)]
struct Layout {
    dim: usize,
    n: [usize; 3],
    np: [usize; 3],
    stride: [usize; 3],
    g: [usize; 3],
    dx: [f64; 3],
}

impl Layout {
    fn new(grid: &Grid) -> Self {
        let dim = grid.dim();
        let mut n = [1; 3];
        let mut np = [1; 3];
        let mut g = [0; 3];
        let mut dx = [1.0; 3];
        for a in 0..dim {
            n[a] = grid.shape()[a];
            np[a] = n[a] + 2 * GHOSTS;
            g[a] = GHOSTS;
            dx[a] = grid.dx(a);
        }
        let stride = [np[1] * np[2], np[2], 1];
        Self {
            dim,
            n,
            np,
            stride,
            g,
            dx,
        }
    }

    fn padded_len(&self) -> usize {
        self.np.iter().product()
    }

    fn at(&self, i: [usize; 3]) -> usize {
        i[0] * self.stride[0] + i[1] * self.stride[1] + i[2] * self.stride[2]
    }

    /// Padded index of interior cell `c` (row-major over the grid).
    fn interior(&self, c: usize) -> usize {
        let k = c % self.n[2];
        let j = (c / self.n[2]) % self.n[1];
        let i = c / (self.n[1] * self.n[2]);
        self.at([i + self.g[0], j + self.g[1], k + self.g[2]])
    }

    fn fill_ghosts(&self, u: &mut [Flux], bc: Boundary) {
        for a in 0..self.dim {
            let n = self.n[a];
            let (b1, b2) = match a {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            for q in [0, 1, n + 2, n + 3] {
                let src = match bc {
                    Boundary::Periodic => {
                        if q < GHOSTS {
                            q + n
                        } else {
                            q - n
                        }
                    }
                    Boundary::Outgoing => {
                        if q < GHOSTS {
                            GHOSTS
                        } else {
                            n + 1
                        }
                    }
                };
                for o1 in 0..self.np[b1] {
                    for o2 in 0..self.np[b2] {
                        let mut dst_i = [0; 3];
                        dst_i[a] = q;
                        dst_i[b1] = o1;
                        dst_i[b2] = o2;
                        let mut src_i = dst_i;
                        src_i[a] = src;
                        u[self.at(dst_i)] = u[self.at(src_i)];
                    }
                }
            }
        }
    }
}

/// Explicit compressible-flow integrator with owned work buffers.
#[derive(Debug, Clone)]
pub struct CnsSolver {
    layout: Layout,
    grid: Grid,
    params: CnsParams,
    gamma: f64,
    cells: Vec<Flux>,
    time: f64,
    padded: Vec<Flux>,
    prim: Vec<Primitive>,
    stage: Vec<Flux>,
    k: Vec<Flux>,
    line: Vec<Primitive>,
    faces: Vec<Flux>,
}

impl CnsSolver {
    pub fn new(state: &ConservedState, params: &CnsParams) -> Result<Self> {
        params.validate()?;
        state.check(0.0)?;
        let layout = Layout::new(&state.grid);
        let np = layout.padded_len();
        let longest = layout.n.iter().copied().max().unwrap_or(1) + 2 * GHOSTS;
        let n = state.cells.len();
        Ok(Self {
            layout,
            grid: state.grid.clone(),
            params: *params,
            gamma: state.gamma,
            cells: state.cells.clone(),
            time: 0.0,
            padded: vec![[0.0; 5]; np],
            prim: vec![Primitive::new(1.0, [0.0; 3], 1.0); np],
            stage: vec![[0.0; 5]; n],
            k: vec![[0.0; 5]; n],
            line: vec![Primitive::new(1.0, [0.0; 3], 1.0); longest],
            faces: vec![[0.0; 5]; longest],
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn state(&self) -> ConservedState {
        ConservedState {
            grid: self.grid.clone(),
            gamma: self.gamma,
            cells: self.cells.clone(),
        }
    }

    /// CFL step from the acoustic signal speed and the viscous limit.
    pub fn stable_dt(&self) -> f64 {
        let l = &self.layout;
        let mut rate = 0.0_f64;
        let mut nu = 0.0_f64;
        let visc = 4.0 / 3.0 * self.params.eta + self.params.zeta;
        for u in &self.cells {
            let q = Primitive::from_conserved(u, self.gamma);
            let c = sound_speed(q.rho, q.p, self.gamma);
            let r: f64 = (0..l.dim).map(|a| (q.v[a].abs() + c) / l.dx[a]).sum();
            rate = rate.max(r);
            nu = nu.max(visc / q.rho);
        }
        let mut dt = self.params.cfl.advective / rate;
        if nu > 0.0 {
            let dx_min = self.grid.dx_min();
            dt = dt.min(self.params.cfl.diffusive * dx_min * dx_min / (nu * l.dim as f64));
        }
        dt
    }

    /// One SSP-RK2 step of size `dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let mut cells = std::mem::take(&mut self.cells);
        let mut k = std::mem::take(&mut self.k);
        let mut stage = std::mem::take(&mut self.stage);
        let result = (|| -> Result<()> {
            self.rhs(&cells, &mut k, true, true)?;
            for c in 0..cells.len() {
                stage[c] = std::array::from_fn(|q| cells[c][q] + dt * k[c][q]);
            }
            self.rhs(&stage, &mut k, true, true)?;
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
        self.check_cells(&self.cells, self.time)
    }

    fn check_cells(&self, cells: &[Flux], time: f64) -> Result<()> {
        for (cell, u) in cells.iter().enumerate() {
            if u.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    context: "compressible update".into(),
                    index: cell,
                });
            }
            if !(u[0] > 0.0) {
                return Err(Error::Positivity {
                    quantity: "density",
                    value: u[0],
                    cell,
                    time,
                });
            }
            let p = pressure_of(u, self.gamma);
            if !(p > 0.0) {
                return Err(Error::Positivity {
                    quantity: "pressure",
                    value: p,
                    cell,
                    time,
                });
            }
        }
        Ok(())
    }

    /// Time derivative of the interior cells.
    fn rhs(&mut self, cells: &[Flux], out: &mut [Flux], inviscid: bool, viscous: bool) -> Result<()> {
        self.check_cells(cells, self.time)?;
        let l = self.layout.clone();
        for (c, u) in cells.iter().enumerate() {
            self.padded[l.interior(c)] = *u;
        }
        l.fill_ghosts(&mut self.padded, self.params.bc);
        for (w, u) in self.prim.iter_mut().zip(&self.padded) {
            *w = Primitive::from_conserved(u, self.gamma);
        }
        out.iter_mut().for_each(|x| *x = [0.0; 5]);
        let viscous = viscous && self.params.viscous();
        for a in 0..l.dim {
            let (b1, b2) = match a {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let n = l.n[a];
            for o1 in 0..l.n[b1] {
                for o2 in 0..l.n[b2] {
                    let mut base = [0; 3];
                    base[b1] = o1 + l.g[b1];
                    base[b2] = o2 + l.g[b2];
                    let start = l.at(base);
                    let step = l.stride[a];
                    for q in 0..n + 2 * GHOSTS {
                        self.line[q] = self.prim[start + q * step];
                    }
                    for f in 0..=n {
                        let mut flux = [0.0; 5];
                        if inviscid {
                            let (ql, qr) = reconstruct_face(&self.line, f);
                            flux = hllc_unchecked(&ql, &qr, a, self.gamma);
                        }
                        if viscous {
                            let left = start + (f + 1) * step;
                            let visc = self.viscous_face(&l, left, left + step, a);
                            for q in 0..5 {
                                flux[q] -= visc[q];
                            }
                        }
                        self.faces[f] = flux;
                    }
                    // interior cell index of the first cell on this line
                    let mut idx = [0; 3];
                    idx[b1] = o1;
                    idx[b2] = o2;
                    let first = idx[0] * l.n[1] * l.n[2] + idx[1] * l.n[2] + idx[2];
                    let cstep = match a {
                        0 => l.n[1] * l.n[2],
                        1 => l.n[2],
                        _ => 1,
                    };
                    for i in 0..n {
                        let c = first + i * cstep;
                        for q in 0..5 {
                            out[c][q] -= (self.faces[i + 1][q] - self.faces[i][q]) / l.dx[a];
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Viscous stress flux `(0, sigma_a., v . sigma_a.)` through the face
    /// between padded cells `left` and `right` along `axis`.
    fn viscous_face(&self, l: &Layout, left: usize, right: usize, axis: usize) -> Flux {
        let (eta, zeta) = (self.params.eta, self.params.zeta);
        let w = &self.prim;
        let mut grad = [[0.0; 3]; 3];
        for b in 0..l.dim {
            grad[axis][b] = (w[right].v[b] - w[left].v[b]) / l.dx[axis];
        }
        for t in 0..l.dim {
            if t == axis {
                continue;
            }
            let s = l.stride[t];
            for b in 0..l.dim {
                let dr = w[right + s].v[b] - w[right - s].v[b];
                let dl = w[left + s].v[b] - w[left - s].v[b];
                grad[t][b] = (dr + dl) / (4.0 * l.dx[t]);
            }
        }
        let div: f64 = (0..l.dim).map(|b| grad[b][b]).sum();
        let mut flux = [0.0; 5];
        for b in 0..l.dim {
            let mut sigma = eta * (grad[axis][b] + grad[b][axis]);
            if b == axis {
                sigma += (zeta - 2.0 / 3.0 * eta) * div;
            }
            flux[1 + b] = sigma;
            flux[4] += 0.5 * (w[left].v[b] + w[right].v[b]) * sigma;
        }
        flux
    }
}

#[inline]
fn reconstruct_face(line: &[Primitive], f: usize) -> (Primitive, Primitive) {
    let (l, r) = (f + 1, f + 2);
    let side = |i: usize, sign: f64| {
        let (a, b, c) = (&line[i - 1], &line[i], &line[i + 1]);
        Primitive {
            rho: b.rho + sign * 0.5 * slope(a.rho, b.rho, c.rho),
            v: std::array::from_fn(|k| b.v[k] + sign * 0.5 * slope(a.v[k], b.v[k], c.v[k])),
            p: b.p + sign * 0.5 * slope(a.p, b.p, c.p),
        }
    };
    (side(l, 1.0), side(r, -1.0))
}

/// Viscous contribution to the time derivative of every conserved channel,
/// `(rho, rho v_1.., E)`.
pub fn viscous_tendency(state: &ConservedState, eta: f64, zeta: f64, bc: Boundary) -> Result<Vec<Vec<f64>>> {
    let mut solver = CnsSolver::new(state, &CnsParams::new(eta, zeta, bc))?;
    let mut out = vec![[0.0; 5]; state.cells.len()];
    let cells = state.cells.clone();
    solver.rhs(&cells, &mut out, false, true)?;
    let d = state.grid.dim();
    let mut chans = vec![out.iter().map(|u| u[0]).collect::<Vec<_>>()];
    for a in 0..d {
        chans.push(out.iter().map(|u| u[1 + a]).collect());
    }
    chans.push(out.iter().map(|u| u[4]).collect());
    Ok(chans)
}

/// Marches `state0` across `time`; frames hold `(rho, v_1.., p)`.
pub fn solve_cns(state0: &ConservedState, params: &CnsParams, time: &TimeAxis) -> Result<Trajectory> {
    let mut solver = CnsSolver::new(state0, params)?;
    solver.time = time.t_start;
    let mut frames = Vec::with_capacity(time.n_snapshots);
    march_snapshots(
        time,
        &mut solver,
        |s| Ok(s.stable_dt()),
        |s, t, h| {
            s.time = t;
            s.step(h)
        },
        |s, _| {
            frames.push(s.state().to_primitive_field()?);
            Ok(())
        },
    )?;
    Trajectory::new(*time, frames)
}
