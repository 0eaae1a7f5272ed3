//! Discretization primitives shared by every solver.
//!
//! A [`Grid`] is a cell-centered rectilinear box in one to three dimensions.
//! Values live in row-major order with the last spatial axis fastest; a
//! [`Field`] appends a channel axis after the spatial ones, so the flat
//! layout of a field is `(x1, .., xd, v)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest cell count per axis: MUSCL reconstruction needs two ghost layers.
pub const MIN_CELLS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    n: Vec<usize>,
}

impl Grid {
    pub fn new(lo: &[f64], hi: &[f64], n: &[usize]) -> Result<Self> {
        let dim = n.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::Dimension {
                expected: "1, 2 or 3 axes".into(),
                actual: dim,
            });
        }
        if lo.len() != dim || hi.len() != dim {
            return Err(Error::Config(format!(
                "grid extents have {} / {} entries for {dim} axes",
                lo.len(),
                hi.len()
            )));
        }
        for axis in 0..dim {
            if n[axis] < MIN_CELLS {
                return Err(Error::Config(format!(
                    "axis {axis} has {} cells, need at least {MIN_CELLS}",
                    n[axis]
                )));
            }
            if !(hi[axis] > lo[axis]) || !lo[axis].is_finite() || !hi[axis].is_finite() {
                return Err(Error::Config(format!(
                    "axis {axis} extent [{}, {}] is empty",
                    lo[axis], hi[axis]
                )));
            }
        }
        Ok(Self {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            n: n.to_vec(),
        })
    }

    /// `[lo, hi]^d` with `n` cells on every axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(&vec![lo; dim], &vec![hi; dim], &vec![n; dim])
    }

    pub fn line(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(&[lo], &[hi], &[n])
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.n
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn dx(&self, axis: usize) -> f64 {
        self.extent(axis) / self.n[axis] as f64
    }

    pub fn dx_min(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.dx(a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn center(&self, axis: usize, j: usize) -> f64 {
        self.lo[axis] + (j as f64 + 0.5) * self.dx(axis)
    }

    pub fn centers(&self, axis: usize) -> Vec<f64> {
        (0..self.n[axis]).map(|j| self.center(axis, j)).collect()
    }

    /// Row-major strides (in cells) of each axis.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dim()];
        for a in (0..self.dim().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * self.n[a + 1];
        }
        strides
    }

    /// Multi-index of a flat cell index.
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.n[a];
            flat /= self.n[a];
        }
        idx
    }

    /// Coordinates of the center of a flat cell index.
    pub fn cell_center(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut x = [0.0; 3];
        for a in 0..self.dim() {
            x[a] = self.center(a, idx[a]);
        }
        x
    }

    /// True when the cell touches the domain boundary on any axis.
    pub fn is_boundary_cell(&self, flat: usize) -> bool {
        let idx = self.unravel(flat);
        (0..self.dim()).any(|a| idx[a] == 0 || idx[a] + 1 == self.n[a])
    }

    pub(crate) fn require_dim(&self, dims: &[usize], what: &str) -> Result<()> {
        if dims.contains(&self.dim()) {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: format!("{what} on a {dims:?}-dimensional grid"),
                actual: self.dim(),
            })
        }
    }
}

/// Uniformly spaced snapshot instants, `t_start` included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeAxis {
    pub t_start: f64,
    pub t_end: f64,
    pub n_snapshots: usize,
}

impl TimeAxis {
    pub fn new(t_start: f64, t_end: f64, n_snapshots: usize) -> Result<Self> {
        if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::Config(format!(
                "time axis needs t_end > t_start, got [{t_start}, {t_end}]"
            )));
        }
        if n_snapshots < 2 {
            return Err(Error::Config(format!(
                "time axis needs at least 2 snapshots, got {n_snapshots}"
            )));
        }
        Ok(Self {
            t_start,
            t_end,
            n_snapshots,
        })
    }

    pub fn interval(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_snapshots - 1) as f64
    }

    pub fn snapshot(&self, k: usize) -> f64 {
        if k + 1 == self.n_snapshots {
            self.t_end
        } else {
            self.t_start + k as f64 * (self.t_end - self.t_start) / (self.n_snapshots - 1) as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_snapshots).map(|k| self.snapshot(k)).collect()
    }
}

/// Values of `channels` physical quantities on every cell of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    channels: usize,
    values: Vec<f64>,
}

impl Field {
    /// Wraps `values` laid out as `(x1, .., xd, v)`; rejects non-finite entries.
    pub fn new(grid: Grid, channels: usize, values: Vec<f64>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::Config("field needs at least one channel".into()));
        }
        if values.len() != grid.len() * channels {
            return Err(Error::Shape(format!(
                "field of {} cells x {channels} channels given {} values",
                grid.len(),
                values.len()
            )));
        }
        check_finite(&values, "field")?;
        Ok(Self {
            grid,
            channels,
            values,
        })
    }

    pub fn zeros(grid: Grid, channels: usize) -> Self {
        let len = grid.len() * channels;
        Self {
            grid,
            channels,
            values: vec![0.0; len],
        }
    }

    /// Single-channel field from a function of the cell center.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.cell_center(i))).collect();
        Self::new(grid, 1, values)
    }

    /// Interleaves per-channel arrays (each of `grid.len()` cells).
    pub fn from_channels(grid: Grid, channels: &[Vec<f64>]) -> Result<Self> {
        let ncell = grid.len();
        if channels.iter().any(|c| c.len() != ncell) {
            return Err(Error::Shape(format!(
                "every channel must hold {ncell} cells"
            )));
        }
        let nc = channels.len();
        let mut values = vec![0.0; ncell * nc];
        for (c, chan) in channels.iter().enumerate() {
            for (i, v) in chan.iter().enumerate() {
                values[i * nc + c] = *v;
            }
        }
        Self::new(grid, nc, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, cell: usize, channel: usize) -> f64 {
        self.values[cell * self.channels + channel]
    }

    pub fn channel(&self, c: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(c)
            .step_by(self.channels)
            .copied()
            .collect()
    }

    pub fn to_channels(&self) -> Vec<Vec<f64>> {
        (0..self.channels).map(|c| self.channel(c)).collect()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// A field sampled at every instant of a [`TimeAxis`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    time: TimeAxis,
    frames: Vec<Field>,
}

impl Trajectory {
    pub fn new(time: TimeAxis, frames: Vec<Field>) -> Result<Self> {
        if frames.len() != time.n_snapshots {
            return Err(Error::Shape(format!(
                "{} frames for {} snapshots",
                frames.len(),
                time.n_snapshots
            )));
        }
        let first = &frames[0];
        if frames
            .iter()
            .any(|f| f.grid != first.grid || f.channels != first.channels)
        {
            return Err(Error::Shape(
                "trajectory frames disagree on grid or channel count".into(),
            ));
        }
        Ok(Self { time, frames })
    }

    pub fn time(&self) -> &TimeAxis {
        &self.time
    }

    pub fn frames(&self) -> &[Field] {
        &self.frames
    }

    pub fn frame(&self, k: usize) -> &Field {
        &self.frames[k]
    }

    pub fn last(&self) -> &Field {
        self.frames.last().expect("trajectory has >= 2 frames")
    }

    pub fn grid(&self) -> &Grid {
        self.frames[0].grid()
    }

    pub fn channels(&self) -> usize {
        self.frames[0].channels()
    }

    pub fn into_frames(self) -> Vec<Field> {
        self.frames
    }
}

pub(crate) fn check_finite(values: &[f64], context: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            context: context.to_string(),
            index,
        }),
        None => Ok(()),
    }
}

/// Courant factors for explicit stepping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cfl {
    pub advective: f64,
    pub diffusive: f64,
}

impl Default for Cfl {
    fn default() -> Self {
        Self {
            advective: 0.4,
            diffusive: 0.25,
        }
    }
}

impl Cfl {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("advective", self.advective), ("diffusive", self.diffusive)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!("{name} CFL factor {v} not in (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Stable explicit time step: the smaller of the advective and diffusive
/// limits, skipping any limit whose rate is zero.
pub fn cfl_timestep(dx_min: f64, max_signal_speed: f64, diffusivity: f64, cfl: Cfl) -> Result<f64> {
    cfl.validate()?;
    if !(dx_min > 0.0) {
        return Err(Error::Domain(format!("cell width {dx_min} must be positive")));
    }
    if !(max_signal_speed >= 0.0) || !(diffusivity >= 0.0) {
        return Err(Error::Domain(format!(
            "signal speed {max_signal_speed} and diffusivity {diffusivity} must be non-negative"
        )));
    }
    let mut dt = f64::INFINITY;
    if max_signal_speed > 0.0 {
        dt = dt.min(cfl.advective * dx_min / max_signal_speed);
    }
    if diffusivity > 0.0 {
        dt = dt.min(cfl.diffusive * dx_min * dx_min / diffusivity);
    }
    if dt.is_infinite() {
        return Err(Error::StaticSystem);
    }
    Ok(dt)
}

/// Kahan-compensated running time.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Clock {
    t: f64,
    carry: f64,
}

impl Clock {
    pub fn new(t: f64) -> Self {
        Self { t, carry: 0.0 }
    }

    pub fn now(&self) -> f64 {
        self.t
    }

    pub fn advance(&mut self, dt: f64) {
        let y = dt - self.carry;
        let t = self.t + y;
        self.carry = (t - self.t) - y;
        self.t = t;
    }

    pub fn set(&mut self, t: f64) {
        self.t = t;
        self.carry = 0.0;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MarchStats {
    pub substeps: usize,
}

/// Drives an explicit integrator across every snapshot of `time`.
///
/// `record` sees the state at snapshot 0 and after each interval. Substeps
/// come from `dt`; the last substep of each interval is clipped so the state
/// lands exactly on the snapshot time.
pub fn march_snapshots<S>(
    time: &TimeAxis,
    state: &mut S,
    mut dt: impl FnMut(&S) -> Result<f64>,
    mut step: impl FnMut(&mut S, f64, f64) -> Result<()>,
    mut record: impl FnMut(&S, usize) -> Result<()>,
) -> Result<MarchStats> {
    let mut stats = MarchStats::default();
    let mut clock = Clock::new(time.t_start);
    record(state, 0)?;
    for k in 1..time.n_snapshots {
        let target = time.snapshot(k);
        loop {
            let remaining = target - clock.now();
            let proposed = dt(state)?;
            if !(proposed > 0.0) || !proposed.is_finite() {
                return Err(Error::Domain(format!("invalid time step {proposed}")));
            }
            let last = proposed >= remaining * (1.0 - 1e-10);
            let h = if last { remaining } else { proposed };
            step(state, clock.now(), h)?;
            stats.substeps += 1;
            if last {
                clock.set(target);
                break;
            }
            clock.advance(h);
        }
        record(state, k)?;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cfl_single_active_terms() {
        let cfl = Cfl::default();
        let dt = cfl_timestep(0.01, 1.0, 0.0, cfl).unwrap();
        assert!((dt - 0.004).abs() < 1e-15);
        let dt = cfl_timestep(0.01, 0.0, 0.1, cfl).unwrap();
        assert!((dt - 2.5e-4).abs() < 1e-18);
    }

    #[test]
    fn cfl_diffusive_limit_binds() {
        // min(0.4 * 0.01 / 1, 0.25 * 1e-4 / 1)
        let dt = cfl_timestep(0.01, 1.0, 1.0, Cfl::default()).unwrap();
        assert!((dt - 2.5e-5).abs() < 1e-18);
    }

    #[test]
    fn cfl_static_system_is_an_error() {
        let err = cfl_timestep(0.01, 0.0, 0.0, Cfl::default()).unwrap_err();
        assert!(matches!(err, Error::StaticSystem));
        assert_eq!(err.to_string(), "static system, dt undefined");
    }

    #[test]
    fn cfl_rejects_bad_factors() {
        let cfl = Cfl {
            advective: 1.5,
            diffusive: 0.25,
        };
        assert!(cfl_timestep(0.01, 1.0, 0.0, cfl).is_err());
    }

    #[test]
    fn grid_invariants() {
        assert!(Grid::line(0.0, 1.0, 3).is_err());
        assert!(Grid::line(1.0, 1.0, 8).is_err());
        let g = Grid::new(&[0.0, -1.0], &[1.0, 1.0], &[4, 8]).unwrap();
        assert_eq!(g.len(), 32);
        assert_eq!(g.strides(), vec![8, 1]);
        assert!((g.center(1, 0) + 0.875).abs() < 1e-15);
        assert_eq!(g.unravel(13), [1, 5, 0]);
        assert!(g.is_boundary_cell(0));
        assert!(!g.is_boundary_cell(8 + 3));
    }

    #[test]
    fn field_rejects_non_finite() {
        let g = Grid::line(0.0, 1.0, 4).unwrap();
        assert!(Field::new(g.clone(), 1, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        let f = Field::from_channels(g, &[vec![1.0; 4], vec![2.0; 4]]).unwrap();
        assert_eq!(f.values()[..4], [1.0, 2.0, 1.0, 2.0]);
        assert_eq!(f.channel(1), vec![2.0; 4]);
    }

    #[test]
    fn march_hits_snapshots_exactly() {
        let time = TimeAxis::new(0.0, 1.0, 11).unwrap();
        let mut seen = Vec::new();
        let mut t_state = 0.0_f64;
        let stats = march_snapshots(
            &time,
            &mut t_state,
            |_| Ok(0.0123),
            |s, _t, h| {
                *s += h;
                Ok(())
            },
            |s, k| {
                seen.push((k, *s));
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(seen.len(), 11);
        for (k, s) in seen {
            assert!((s - time.snapshot(k)).abs() <= 1e-12 * time.t_end.max(1.0));
        }
        assert!(stats.substeps >= 82);
    }

    #[test]
    fn compensated_clock_accumulates_many_steps() {
        let mut clock = Clock::new(0.0);
        for _ in 0..1_000_000 {
            clock.advance(1e-6);
        }
        assert!((clock.now() - 1.0).abs() < 1e-12);
    }
}
