//! Estimation of an unknown initial condition from one observed snapshot.
//!
//! The initial condition is parameterized by 64 control values on a
//! uniform lattice spanning the domain (64 nodes in 1D, 8x8 in 2D, 4x4x4
//! in 3D) and (multi)linear interpolation onto cell centers. The forward
//! map is a classical solver; gradients of the MSE loss come from central
//! finite differences over the controls, evaluated in parallel.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Trajectory};
use crate::metrics::{self, MetricReport};

pub const N_CONTROLS: usize = 64;

/// Controls per axis for a `dim`-dimensional lattice of 64 nodes.
pub fn lattice_shape(dim: usize) -> Result<Vec<usize>> {
    match dim {
        1 => Ok(vec![64]),
        2 => Ok(vec![8, 8]),
        3 => Ok(vec![4, 4, 4]),
        _ => Err(Error::Dimension {
            expected: "1, 2 or 3".into(),
            actual: dim,
        }),
    }
}

/// Sparse interpolation weights: for each cell, `(node, weight)` pairs.
#[derive(Debug, Clone)]
struct Stencil {
    weights: Vec<Vec<(usize, f64)>>,
}

impl Stencil {
    fn new(grid: &Grid, lattice: &[usize]) -> Self {
        let dim = grid.dim();
        // (lower node, weight of the upper node) per axis and cell index
        let per_axis: Vec<Vec<(usize, f64)>> = (0..dim)
            .map(|a| {
                let m = lattice[a];
                (0..grid.shape()[a])
                    .map(|j| {
                        let s = (grid.center(a, j) - grid.lo()[a]) / grid.extent(a) * (m - 1) as f64;
                        let i0 = (s.floor().max(0.0) as usize).min(m - 2);
                        (i0, s - i0 as f64)
                    })
                    .collect()
            })
            .collect();
        let mut node_strides = vec![1; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            node_strides[a] = node_strides[a + 1] * lattice[a + 1];
        }
        let weights = (0..grid.len())
            .map(|flat| {
                let idx = grid.unravel(flat);
                let mut acc = vec![(0usize, 1.0)];
                for a in 0..dim {
                    let (i0, w) = per_axis[a][idx[a]];
                    let mut next = Vec::with_capacity(acc.len() * 2);
                    for &(node, wt) in &acc {
                        next.push((node + i0 * node_strides[a], wt * (1.0 - w)));
                        next.push((node + (i0 + 1) * node_strides[a], wt * w));
                    }
                    acc = next;
                }
                acc.retain(|(_, w)| *w != 0.0);
                acc
            })
            .collect();
        Self { weights }
    }
}

/// Control values on the coarse lattice plus the grid they interpolate onto.
#[derive(Debug, Clone)]
pub struct IcParameterization {
    grid: Grid,
    lattice: Vec<usize>,
    channels: usize,
    /// `(node, channel)` row-major.
    values: Vec<f64>,
    stencil: Stencil,
}

impl IcParameterization {
    pub fn zeros(grid: &Grid, channels: usize) -> Result<Self> {
        let lattice = lattice_shape(grid.dim())?;
        if channels == 0 {
            return Err(Error::Config("at least one channel is required".into()));
        }
        if grid.shape().iter().any(|&n| n < 2) {
            return Err(Error::Config("interpolation needs at least two cells per axis".into()));
        }
        let stencil = Stencil::new(grid, &lattice);
        Ok(Self {
            grid: grid.clone(),
            lattice,
            channels,
            values: vec![0.0; N_CONTROLS * channels],
            stencil,
        })
    }

    pub fn with_values(grid: &Grid, channels: usize, values: Vec<f64>) -> Result<Self> {
        let mut p = Self::zeros(grid, channels)?;
        p.set_values(values)?;
        Ok(p)
    }

    /// Least-squares fit of the controls to `field`; exact for fields that
    /// are already (multi)linear on the lattice.
    pub fn fit(field: &Field) -> Result<Self> {
        let mut p = Self::zeros(field.grid(), field.channels())?;
        let n = N_CONTROLS;
        let mut ata = DMatrix::<f64>::zeros(n, n);
        for row in &p.stencil.weights {
            for &(i, wi) in row {
                for &(j, wj) in row {
                    ata[(i, j)] += wi * wj;
                }
            }
        }
        let chol = ata
            .cholesky()
            .ok_or_else(|| Error::Inverse("grid too coarse to determine every control value".into()))?;
        for c in 0..p.channels {
            let mut atb = DVector::<f64>::zeros(n);
            for (cell, row) in p.stencil.weights.iter().enumerate() {
                let v = field.get(cell, c);
                for &(i, w) in row {
                    atb[i] += w * v;
                }
            }
            let x = chol.solve(&atb);
            for i in 0..n {
                p.values[i * p.channels + c] = x[i];
            }
        }
        Ok(p)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn lattice(&self) -> &[usize] {
        &self.lattice
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn set_values(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != N_CONTROLS * self.channels {
            return Err(Error::Shape(format!(
                "expected {} control values, got {}",
                N_CONTROLS * self.channels,
                values.len()
            )));
        }
        self.values = values;
        Ok(())
    }

    /// Physical position of lattice node `i` along `axis`.
    pub fn node_position(&self, axis: usize, i: usize) -> f64 {
        self.grid.lo()[axis] + self.grid.extent(axis) * i as f64 / (self.lattice[axis] - 1) as f64
    }

    /// Sets every control to `f` evaluated at its lattice node.
    pub fn sample_at_lattice(&mut self, f: impl Fn([f64; 3], usize) -> f64) {
        let dim = self.grid.dim();
        for node in 0..N_CONTROLS {
            let mut rem = node;
            let mut x = [0.0; 3];
            for a in (0..dim).rev() {
                x[a] = self.node_position(a, rem % self.lattice[a]);
                rem /= self.lattice[a];
            }
            for c in 0..self.channels {
                self.values[node * self.channels + c] = f(x, c);
            }
        }
    }
}

/// (Multi)linear interpolation of the controls onto the cell centers.
pub fn reconstruct_ic(params: &IcParameterization) -> Field {
    let ch = params.channels;
    let mut out = vec![0.0; params.grid.len() * ch];
    for (cell, row) in params.stencil.weights.iter().enumerate() {
        for &(node, w) in row {
            for c in 0..ch {
                out[cell * ch + c] += w * params.values[node * ch + c];
            }
        }
    }
    Field::new(params.grid.clone(), ch, out).expect("shape fixed by construction")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    /// `c -= lr * grad`.
    Sgd,
    /// Adam with the usual moment decay rates 0.9 / 0.999.
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialGuess {
    Zeros,
    /// Least-squares fit of the observation itself.
    Observation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InverseConfig {
    /// Snapshot index of the observation.
    pub horizon: usize,
    pub learning_rate: f64,
    pub n_iterations: usize,
    /// Probe size relative to `max(1, max |control|)`.
    pub fd_epsilon: f64,
    pub n_test_samples: usize,
    pub optimizer: Optimizer,
    pub initial_guess: InitialGuess,
    /// Stop once the loss drops to this value.
    pub tolerance: f64,
}

impl Default for InverseConfig {
    fn default() -> Self {
        Self {
            horizon: 15,
            learning_rate: 0.2,
            n_iterations: 200,
            fd_epsilon: 1e-4,
            n_test_samples: 100,
            optimizer: Optimizer::Adam,
            initial_guess: InitialGuess::Zeros,
            tolerance: 0.0,
        }
    }
}

impl InverseConfig {
    /// Horizon 5 for the compressible flow datasets.
    pub fn for_cfd() -> Self {
        Self {
            horizon: 5,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!("learning_rate {} must be positive", self.learning_rate)));
        }
        if !(self.fd_epsilon > 0.0) || !self.fd_epsilon.is_finite() {
            return Err(Error::Config(format!("fd_epsilon {} must be positive", self.fd_epsilon)));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least one snapshot".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::Config("tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

/// Deterministic map from an initial condition to a trajectory.
pub trait ForwardModel: Sync {
    fn solve(&self, ic: &Field) -> Result<Trajectory>;
}

impl<F> ForwardModel for F
where
    F: Fn(&Field) -> Result<Trajectory> + Sync,
{
    fn solve(&self, ic: &Field) -> Result<Trajectory> {
        self(ic)
    }
}

fn loss_of(values: &[f64], base: &IcParameterization, observed: &Field, forward: &dyn ForwardModel, horizon: usize) -> Result<f64> {
    let mut p = base.clone();
    p.values.copy_from_slice(values);
    let traj = forward.solve(&reconstruct_ic(&p))?;
    if horizon >= traj.frames().len() {
        return Err(Error::Config(format!(
            "horizon {horizon} outside a trajectory of {} snapshots",
            traj.frames().len()
        )));
    }
    let pred = traj.frame(horizon);
    if pred.values().len() != observed.values().len() {
        return Err(Error::Shape("forward prediction and observation differ in shape".into()));
    }
    Ok(metrics::mse(pred.values(), observed.values()))
}

/// MSE between the forward prediction at the horizon and the observation.
pub fn inverse_loss(
    params: &IcParameterization,
    observed: &Field,
    forward: &dyn ForwardModel,
    config: &InverseConfig,
) -> Result<f64> {
    loss_of(&params.values, params, observed, forward, config.horizon)
}

/// Central finite-difference gradient; probes run in parallel.
pub fn fd_gradient<L>(loss: L, x: &[f64], eps: f64) -> Result<Vec<f64>>
where
    L: Fn(&[f64]) -> Result<f64> + Sync,
{
    (0..x.len())
        .into_par_iter()
        .map(|i| {
            let mut probe = x.to_vec();
            probe[i] = x[i] + eps;
            let up = loss(&probe)?;
            probe[i] = x[i] - eps;
            let down = loss(&probe)?;
            Ok((up - down) / (2.0 * eps))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct InverseEstimate {
    /// Best iterate found.
    pub params: IcParameterization,
    pub best_loss: f64,
    /// Loss of every accepted iterate, starting with the initial guess.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub rejected_steps: usize,
}

impl InverseEstimate {
    /// Running minimum of the loss trace.
    pub fn best_trace(&self) -> Vec<f64> {
        self.trace
            .iter()
            .scan(f64::INFINITY, |m, &v| {
                *m = m.min(v);
                Some(*m)
            })
            .collect()
    }

    pub fn initial_condition(&self) -> Field {
        reconstruct_ic(&self.params)
    }
}

const MAX_REJECTIONS: usize = 30;

/// Gradient-based descent on the controls, returning the best iterate.
pub fn estimate_ic(observed: &Field, forward: &dyn ForwardModel, config: &InverseConfig) -> Result<InverseEstimate> {
    config.validate()?;
    let mut params = match config.initial_guess {
        InitialGuess::Zeros => IcParameterization::zeros(observed.grid(), observed.channels())?,
        InitialGuess::Observation => IcParameterization::fit(observed)?,
    };
    let horizon = config.horizon;
    let loss = |v: &[f64]| loss_of(v, &params, observed, forward, horizon);

    let mut x = params.values.clone();
    let mut current = loss(&x)?;
    if !current.is_finite() {
        return Err(Error::Inverse("loss of the initial guess is not finite".into()));
    }
    let mut trace = vec![current];
    let (mut best, mut best_x) = (current, x.clone());
    let mut lr = config.learning_rate;
    let mut eps_rel = config.fd_epsilon;
    let mut rejected = 0;
    let mut consecutive = 0;
    let n = x.len();
    let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
    let (b1, b2) = (0.9_f64, 0.999_f64);
    let mut iterations = 0;
    let mut t = 0;

    while iterations < config.n_iterations && current > config.tolerance {
        let scale = x.iter().fold(1.0_f64, |a, b| a.max(b.abs()));
        let grad = fd_gradient(loss, &x, eps_rel * scale);
        let step = match grad {
            Ok(g) if g.iter().all(|d| d.is_finite()) => {
                if g.iter().all(|d| *d == 0.0) {
                    break;
                }
                match config.optimizer {
                    Optimizer::Sgd => g.iter().map(|d| -lr * d).collect::<Vec<_>>(),
                    Optimizer::Adam => {
                        t += 1;
                        let c1 = 1.0 - b1.powi(t);
                        let c2 = 1.0 - b2.powi(t);
                        (0..n)
                            .map(|i| {
                                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                                -lr * (m[i] / c1) / ((v[i] / c2).sqrt() + 1e-8)
                            })
                            .collect()
                    }
                }
            }
            Ok(_) | Err(_) if consecutive < MAX_REJECTIONS => {
                rejected += 1;
                consecutive += 1;
                lr *= 0.5;
                eps_rel *= 0.5;
                continue;
            }
            Ok(_) => return Err(Error::Inverse("gradient stayed non-finite".into())),
            Err(e) => return Err(e),
        };
        let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + s).collect();
        let trial_loss = loss(&trial).ok().filter(|l| l.is_finite());
        match trial_loss {
            Some(l) => {
                consecutive = 0;
                x = trial;
                current = l;
                trace.push(l);
                iterations += 1;
                if l < best {
                    best = l;
                    best_x = x.clone();
                }
            }
            None => {
                rejected += 1;
                consecutive += 1;
                if consecutive > MAX_REJECTIONS {
                    return Err(Error::Inverse(format!(
                        "loss non-finite after {consecutive} consecutive step reductions"
                    )));
                }
                lr *= 0.5;
                eps_rel *= 0.5;
            }
        }
    }
    params.values = best_x;
    Ok(InverseEstimate {
        params,
        best_loss: best,
        trace,
        iterations,
        rejected_steps: rejected,
    })
}

/// Errors of the estimated initial condition and, primed, of the prediction
/// it produces at the horizon.
pub fn inverse_report(estimated: &Field, truth_ic: &Field, pred_t: &Field, true_t: &Field) -> Result<MetricReport> {
    let mut r = metrics::inverse_metrics(estimated, truth_ic)?;
    for (k, v) in metrics::inverse_metrics(pred_t, true_t)?.values() {
        r.push(format!("{k}'"), *v);
    }
    r.set_meta("primed", "prediction at the horizon snapshot from the estimated initial condition");
    r.set_meta("bands", "quarters of the largest shell index: [0, K/4), [K/4, 3K/4), [3K/4, K]");
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeAxis;
    use crate::solvers::advection::{solve_advection, AdvectionParams};
    use proptest::prelude::*;

    fn ramp_close(f: &Field, g: impl Fn([f64; 3]) -> f64, tol: f64) {
        for cell in 0..f.grid().len() {
            let x = f.grid().cell_center(cell);
            assert!((f.get(cell, 0) - g(x)).abs() < tol, "cell {cell}");
        }
    }

    #[test]
    fn constant_controls_give_constant_field() {
        let g = Grid::line(0.0, 1.0, 100).unwrap();
        let p = IcParameterization::with_values(&g, 1, vec![0.7; 64]).unwrap();
        ramp_close(&reconstruct_ic(&p), |_| 0.7, 1e-14);
    }

    #[test]
    fn linear_ramp_is_reproduced() {
        let g = Grid::new(&[0.0, -1.0], &[2.0, 1.0], &[37, 20]).unwrap();
        let mut p = IcParameterization::zeros(&g, 1).unwrap();
        let ramp = |x: [f64; 3]| 0.3 + 1.5 * x[0] - 0.25 * x[1];
        p.sample_at_lattice(|x, _| ramp(x));
        ramp_close(&reconstruct_ic(&p), ramp, 1e-13);
    }

    #[test]
    fn fit_recovers_lattice_values() {
        let g = Grid::line(0.0, 1.0, 256).unwrap();
        let vals: Vec<f64> = (0..64).map(|i| ((i * 37 % 11) as f64 * 0.3).sin()).collect();
        let p = IcParameterization::with_values(&g, 1, vals.clone()).unwrap();
        let back = IcParameterization::fit(&reconstruct_ic(&p)).unwrap();
        for (a, b) in vals.iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn fd_gradient_on_quadratic() {
        let target: Vec<f64> = (0..8).map(|i| i as f64 * 0.1).collect();
        let w: Vec<f64> = (0..8).map(|i| 1.0 + i as f64).collect();
        let loss = |x: &[f64]| -> Result<f64> {
            Ok(x.iter().zip(&target).zip(&w).map(|((a, b), c)| c * (a - b).powi(2) + (a - b).powi(3)).sum())
        };
        let x = vec![0.5; 8];
        for eps in [1e-2, 1e-3] {
            let g = fd_gradient(loss, &x, eps).unwrap();
            for i in 0..8 {
                let d = x[i] - target[i];
                let exact = 2.0 * w[i] * d + 3.0 * d * d;
                // central differences of a cubic are off by exactly eps^2
                assert!((g[i] - exact - eps * eps).abs() < 1e-9, "{} vs {}", g[i], exact);
            }
        }
    }

    fn advection_forward(n_snap: usize) -> impl Fn(&Field) -> Result<Trajectory> + Sync {
        let params = AdvectionParams::new(0.4);
        let time = TimeAxis::new(0.0, 0.01 * (n_snap - 1) as f64, n_snap).unwrap();
        move |ic: &Field| solve_advection(ic, &params, &time)
    }

    #[test]
    fn zero_observation_gives_zero_estimate() {
        let g = Grid::line(0.0, 1.0, 64).unwrap();
        let obs = Field::zeros(g, 1);
        let cfg = InverseConfig {
            horizon: 3,
            n_iterations: 10,
            ..Default::default()
        };
        let est = estimate_ic(&obs, &advection_forward(4), &cfg).unwrap();
        assert_eq!(est.best_loss, 0.0);
        assert!(est.params.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn truth_has_round_off_loss() {
        let g = Grid::line(0.0, 1.0, 128).unwrap();
        let mut p = IcParameterization::zeros(&g, 1).unwrap();
        p.sample_at_lattice(|x, _| (2.0 * std::f64::consts::PI * x[0]).sin() + 1.0);
        let fwd = advection_forward(6);
        let obs = fwd(&reconstruct_ic(&p)).unwrap().frame(5).clone();
        let cfg = InverseConfig {
            horizon: 5,
            ..Default::default()
        };
        let l = inverse_loss(&p, &obs, &fwd, &cfg).unwrap();
        assert!(l <= 1e-12 * metrics::mse(obs.values(), &vec![0.0; 128]));
    }

    #[test]
    fn sgd_descends_monotonically() {
        let g = Grid::line(0.0, 1.0, 128).unwrap();
        let mut p = IcParameterization::zeros(&g, 1).unwrap();
        p.sample_at_lattice(|x, _| (2.0 * std::f64::consts::PI * x[0]).cos());
        let fwd = advection_forward(4);
        let obs = fwd(&reconstruct_ic(&p)).unwrap().frame(3).clone();
        let cfg = InverseConfig {
            horizon: 3,
            n_iterations: 60,
            learning_rate: 5.0,
            optimizer: Optimizer::Sgd,
            ..Default::default()
        };
        let est = estimate_ic(&obs, &fwd, &cfg).unwrap();
        assert_eq!(est.trace.len(), 61);
        for w in est.trace.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn identical_estimate_reports_zero() {
        let g = Grid::line(0.0, 1.0, 32).unwrap();
        let f = Field::from_fn(g, |x| x[0].sin() + 0.5).unwrap();
        let r = inverse_report(&f, &f, &f, &f).unwrap();
        assert!(r.values().iter().all(|(_, v)| *v == 0.0));
        assert!(r.get("nL2'").is_some() && r.get("fL3 high'").is_some());
    }

    proptest! {
        #[test]
        fn reconstruction_matches_hat_functions(vals in proptest::collection::vec(-2.0f64..2.0, 64), n in 64usize..300) {
            let g = Grid::line(0.0, 1.0, n).unwrap();
            let p = IcParameterization::with_values(&g, 1, vals.clone()).unwrap();
            let f = reconstruct_ic(&p);
            for cell in 0..n {
                let x = g.center(0, cell);
                // sum of hat functions centered on each node
                let expect: f64 = (0..64)
                    .map(|i| vals[i] * (1.0 - ((x - i as f64 / 63.0) * 63.0).abs()).max(0.0))
                    .sum();
                prop_assert!((f.get(cell, 0) - expect).abs() < 1e-12);
            }
        }
    }
}
