//! Dataset generation, evaluation and inverse runs as used by the command
//! line front end.
//!
//! Samples are generated in fixed-size chunks on a worker pool and written
//! in index order, so file contents do not depend on the worker count.
//! Sample `b` draws from stream `b`; a rejected sample is redrawn from
//! stream `b + attempt * samples`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::{
    self, ArraySpec, DatasetFile, DatasetMeta, DatasetWriter, FileName, GridMeta, NamedArray, Precision, TimeMeta,
};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, TimeAxis, Trajectory};
use crate::initcond::{self, CnsRandomSpec, DarcyCoefficientSpec, ShockTubeSpec, SinusoidSpec};
use crate::inverse::{self, InverseConfig, InverseEstimate};
use crate::metrics::{self, Batch, FrequencyBands, MetricReport};
use crate::rng::SeededRng;
use crate::solvers::advection::{solve_advection, AdvectionParams};
use crate::solvers::burgers::{solve_burgers, BurgersParams};
use crate::solvers::cns::{solve_cns, sound_speed, Boundary, CnsParams, ConservedState, GAMMA};
use crate::solvers::darcy::{solve_darcy_steady, DarcyParams};
use crate::solvers::diffreact::{solve_diffreact1d, ReactDiffParams};
use crate::solvers::diffsorp::{solve_diffsorp, SorptionParams};
use crate::solvers::fhn::{solve_diffreact2d, FhnParams};
use crate::solvers::swe::{solve_swe, SweParams, SweState, DEFAULT_GRAVITY};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PDEGEN_OUT";
const MAX_ATTEMPTS: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pde {
    Advection,
    Burgers,
    Reacdiff1d,
    Reacdiff2d,
    Diffsorp,
    Darcy,
    Cns1d,
    Cns2d,
    Cns3d,
    Swe,
}

pub const ALL_PDES: [Pde; 10] = [
    Pde::Advection,
    Pde::Burgers,
    Pde::Reacdiff1d,
    Pde::Reacdiff2d,
    Pde::Diffsorp,
    Pde::Darcy,
    Pde::Cns1d,
    Pde::Cns2d,
    Pde::Cns3d,
    Pde::Swe,
];

impl Pde {
    pub fn parse(s: &str) -> Result<Self> {
        ALL_PDES
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown pde {s:?}; expected one of {}", pde_list())))
    }

    pub fn name(self) -> &'static str {
        match self {
            Pde::Advection => "advection",
            Pde::Burgers => "burgers",
            Pde::Reacdiff1d => "reacdiff1d",
            Pde::Reacdiff2d => "reacdiff2d",
            Pde::Diffsorp => "diffsorp",
            Pde::Darcy => "darcy",
            Pde::Cns1d => "cns1d",
            Pde::Cns2d => "cns2d",
            Pde::Cns3d => "cns3d",
            Pde::Swe => "swe",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Pde::Reacdiff2d | Pde::Darcy | Pde::Cns2d | Pde::Swe => 2,
            Pde::Cns3d => 3,
            _ => 1,
        }
    }

    pub fn time_dependent(self) -> bool {
        self != Pde::Darcy
    }

    pub fn default_ns(self) -> usize {
        match self {
            Pde::Reacdiff2d | Pde::Darcy | Pde::Swe => 128,
            Pde::Cns2d => 512,
            Pde::Cns3d => 128,
            _ => 1024,
        }
    }

    /// Stored snapshots, initial frame included.
    pub fn default_nt(self) -> Option<usize> {
        match self {
            Pde::Advection | Pde::Burgers | Pde::Reacdiff1d => Some(201),
            Pde::Reacdiff2d | Pde::Diffsorp | Pde::Cns1d | Pde::Swe => Some(101),
            Pde::Cns2d | Pde::Cns3d => Some(21),
            Pde::Darcy => None,
        }
    }

    pub fn default_t_end(self) -> Option<f64> {
        match self {
            Pde::Advection | Pde::Burgers => Some(2.0),
            Pde::Reacdiff1d => Some(1.0),
            Pde::Reacdiff2d => Some(5.0),
            Pde::Diffsorp => Some(500.0),
            Pde::Cns1d => Some(0.4),
            Pde::Cns2d | Pde::Cns3d | Pde::Swe => Some(1.0),
            Pde::Darcy => None,
        }
    }

    /// Lower and upper corner of the (cubic) domain.
    pub fn domain(self) -> (f64, f64) {
        match self {
            Pde::Reacdiff2d => (-1.0, 1.0),
            Pde::Swe => (-2.5, 2.5),
            _ => (0.0, 1.0),
        }
    }

    pub fn default_params(self) -> BTreeMap<String, Scalar> {
        let num = |k: &str, v: f64| (k.to_string(), Scalar::Num(v));
        let text = |k: &str, v: &str| (k.to_string(), Scalar::Text(v.to_string()));
        match self {
            Pde::Advection => [num("beta", 0.4)].into(),
            Pde::Burgers => [num("nu", 0.01)].into(),
            Pde::Reacdiff1d => [num("nu", 0.5), num("rho", 1.0)].into(),
            Pde::Reacdiff2d => [num("du", 1e-3), num("dv", 5e-3), num("k", 5e-3)].into(),
            Pde::Diffsorp => BTreeMap::new(),
            Pde::Darcy => [num("beta", 1.0)].into(),
            Pde::Cns1d => [
                num("eta", 1e-8),
                num("zeta", 1e-8),
                num("mach", 1.0),
                text("bc", "periodic"),
                text("ic", "random"),
            ]
            .into(),
            Pde::Cns2d => [
                num("eta", 1e-8),
                num("zeta", 1e-8),
                num("mach", 0.1),
                text("bc", "periodic"),
                text("ic", "random"),
            ]
            .into(),
            Pde::Cns3d => [
                num("eta", 1e-8),
                num("zeta", 1e-8),
                num("mach", 1.0),
                text("bc", "periodic"),
                text("ic", "random"),
            ]
            .into(),
            Pde::Swe => [num("gravity", DEFAULT_GRAVITY)].into(),
        }
    }

    /// The 1D scalar problems the inverse run supports.
    pub fn supports_inverse(self) -> bool {
        matches!(self, Pde::Advection | Pde::Burgers | Pde::Reacdiff1d | Pde::Diffsorp)
    }
}

impl fmt::Display for Pde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn pde_list() -> String {
    ALL_PDES.iter().map(|p| p.name()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Num(f64),
    Text(String),
}

impl Scalar {
    /// Numbers where they parse, text otherwise.
    pub fn parse(s: &str) -> Self {
        match s.trim().parse::<f64>() {
            Ok(v) => Scalar::Num(v),
            Err(_) => Scalar::Text(s.trim().to_string()),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Num(v) => f.write_str(&dataio::format_param(*v)),
            Scalar::Text(s) => f.write_str(s),
        }
    }
}

/// One value or a list of values to sweep over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    One(Scalar),
    Many(Vec<Scalar>),
}

impl ParamValue {
    /// `a` or a comma separated list `a,b,c`.
    pub fn parse(s: &str) -> Self {
        let parts: Vec<Scalar> = s.split(',').map(Scalar::parse).collect();
        if parts.len() == 1 {
            ParamValue::One(parts.into_iter().next().expect("one part"))
        } else {
            ParamValue::Many(parts)
        }
    }

    fn values(&self) -> Vec<Scalar> {
        match self {
            ParamValue::One(s) => vec![s.clone()],
            ParamValue::Many(v) => v.clone(),
        }
    }
}

/// Declarative generation run; CLI flags override keys one to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    pub pde: String,
    pub params: BTreeMap<String, ParamValue>,
    pub ns: Option<usize>,
    pub nt: Option<usize>,
    pub t_end: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub precision: Precision,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            pde: String::new(),
            params: BTreeMap::new(),
            ns: None,
            nt: None,
            t_end: None,
            samples: 16,
            seed: 0,
            out: None,
            workers: None,
            precision: Precision::F32,
        }
    }
}

impl GenerateConfig {
    pub fn from_yaml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Ok(serde_yaml::from_str(&text)?)
    }

    /// Every parameter combination, fully resolved and validated.
    pub fn resolve(&self) -> Result<Vec<ResolvedConfig>> {
        let pde = Pde::parse(&self.pde)?;
        if self.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
        }
        let defaults = pde.default_params();
        for key in self.params.keys() {
            if !defaults.contains_key(key) {
                let known: Vec<&str> = defaults.keys().map(String::as_str).collect();
                return Err(Error::Config(format!(
                    "{pde} has no parameter {key:?} (known: {})",
                    if known.is_empty() { "none".into() } else { known.join(", ") }
                )));
            }
        }
        if !pde.time_dependent() && (self.nt.is_some() || self.t_end.is_some()) {
            return Err(Error::Config(format!("{pde} is time-independent; nt and t_end do not apply")));
        }
        let mut combos: Vec<BTreeMap<String, Scalar>> = vec![defaults];
        for (key, value) in &self.params {
            let values = value.values();
            if values.is_empty() {
                return Err(Error::Config(format!("parameter {key} has an empty list")));
            }
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    values.iter().map(move |v| {
                        let mut c = c.clone();
                        c.insert(key.clone(), v.clone());
                        c
                    })
                })
                .collect();
        }
        let out = combos
            .into_iter()
            .map(|params| ResolvedConfig {
                pde,
                params,
                ns: self.ns.unwrap_or(pde.default_ns()),
                nt: self.nt.or(pde.default_nt()),
                t_end: self.t_end.or(pde.default_t_end()),
                samples: self.samples,
                seed: self.seed,
                precision: self.precision,
            })
            .collect::<Vec<_>>();
        for r in &out {
            Problem::new(r)?;
        }
        Ok(out)
    }
}

/// The exact configuration of one output file, echoed into its metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub pde: Pde,
    pub params: BTreeMap<String, Scalar>,
    pub ns: usize,
    pub nt: Option<usize>,
    pub t_end: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub precision: Precision,
}

impl ResolvedConfig {
    pub fn file_name(&self) -> Result<FileName> {
        let params = if self.params.is_empty() {
            "default".to_string()
        } else {
            self.params
                .iter()
                .map(|(k, v)| match v {
                    Scalar::Num(_) => format!("{k}{v}"),
                    Scalar::Text(_) => format!("{k}-{v}"),
                })
                .collect::<Vec<_>>()
                .join("_")
        };
        let mut config = format!("ns{}", self.ns);
        if let Some(nt) = self.nt {
            config.push_str(&format!("_nt{nt}"));
        }
        config.push_str(&format!(
            "_n{}_seed{}_{}",
            self.samples,
            self.seed,
            match self.precision {
                Precision::F32 => "f32",
                Precision::F64 => "f64",
            }
        ));
        FileName::new(self.pde.name(), params, config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnsIc {
    Random,
    Turbulence,
    Shock,
}

#[derive(Debug, Clone, PartialEq)]
enum Model {
    Advection(AdvectionParams),
    Burgers(BurgersParams),
    Reacdiff1d(ReactDiffParams),
    Reacdiff2d(FhnParams),
    Diffsorp(SorptionParams),
    Darcy(DarcyParams),
    Cns { params: CnsParams, ic: CnsIc, mach: f64 },
    Swe { gravity: f64 },
}

/// A resolved configuration turned into grid, time axis and solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub config: ResolvedConfig,
    pub grid: Grid,
    pub time: Option<TimeAxis>,
    model: Model,
}

impl Problem {
    pub fn new(config: &ResolvedConfig) -> Result<Self> {
        let pde = config.pde;
        let p = &config.params;
        let num = |k: &str| -> Result<f64> {
            match p.get(k) {
                Some(Scalar::Num(v)) if v.is_finite() => Ok(*v),
                other => Err(Error::Config(format!("{pde}: parameter {k} must be a finite number, got {other:?}"))),
            }
        };
        let text = |k: &str| -> Result<String> {
            match p.get(k) {
                Some(Scalar::Text(s)) => Ok(s.clone()),
                other => Err(Error::Config(format!("{pde}: parameter {k} must be text, got {other:?}"))),
            }
        };
        let model = match pde {
            Pde::Advection => {
                let m = AdvectionParams::new(num("beta")?);
                m.validate()?;
                Model::Advection(m)
            }
            Pde::Burgers => {
                let m = BurgersParams::new(num("nu")?);
                m.validate()?;
                Model::Burgers(m)
            }
            Pde::Reacdiff1d => {
                let m = ReactDiffParams::new(num("nu")?, num("rho")?);
                m.validate()?;
                Model::Reacdiff1d(m)
            }
            Pde::Reacdiff2d => {
                let m = FhnParams {
                    du: num("du")?,
                    dv: num("dv")?,
                    k: num("k")?,
                    ..FhnParams::default()
                };
                m.validate()?;
                Model::Reacdiff2d(m)
            }
            Pde::Diffsorp => {
                let m = SorptionParams::default();
                m.validate()?;
                Model::Diffsorp(m)
            }
            Pde::Darcy => {
                let m = DarcyParams::with_beta(num("beta")?);
                m.validate()?;
                Model::Darcy(m)
            }
            Pde::Cns1d | Pde::Cns2d | Pde::Cns3d => {
                let bc = match text("bc")?.as_str() {
                    "periodic" => Boundary::Periodic,
                    "outgoing" => Boundary::Outgoing,
                    other => return Err(Error::Config(format!("bc must be periodic or outgoing, not {other:?}"))),
                };
                let ic = match text("ic")?.as_str() {
                    "random" => CnsIc::Random,
                    "turbulence" if pde != Pde::Cns1d => CnsIc::Turbulence,
                    "shock" if pde == Pde::Cns1d => CnsIc::Shock,
                    other => {
                        return Err(Error::Config(format!(
                            "ic {other:?} not available for {pde} (random; turbulence in 2D/3D; shock in 1D)"
                        )))
                    }
                };
                let mach = num("mach")?;
                if !(mach >= 0.0) {
                    return Err(Error::Config(format!("mach {mach} must be non-negative")));
                }
                let params = CnsParams::new(num("eta")?, num("zeta")?, bc);
                params.validate()?;
                Model::Cns { params, ic, mach }
            }
            Pde::Swe => {
                let gravity = num("gravity")?;
                if !(gravity > 0.0) {
                    return Err(Error::Config(format!("gravity {gravity} must be positive")));
                }
                Model::Swe { gravity }
            }
        };
        if config.ns < 4 {
            return Err(Error::Config(format!("ns = {} must be at least 4", config.ns)));
        }
        let (lo, hi) = pde.domain();
        let grid = Grid::cube(pde.dim(), lo, hi, config.ns)?;
        let time = match (pde.time_dependent(), config.nt, config.t_end) {
            (true, Some(nt), Some(t_end)) => Some(TimeAxis::new(0.0, t_end, nt)?),
            (false, None, None) => None,
            _ => return Err(Error::Config(format!("{pde}: inconsistent nt / t_end"))),
        };
        Ok(Self {
            config: config.clone(),
            grid,
            time,
            model,
        })
    }

    pub fn pde(&self) -> Pde {
        self.config.pde
    }

    /// Stored arrays with their per-sample shapes and descriptions.
    pub fn array_specs(&self) -> Vec<(ArraySpec, String)> {
        let shape = self.grid.shape().to_vec();
        let with_time = |v: Option<usize>| {
            let mut s = vec![self.time.map_or(1, |t| t.n_snapshots)];
            s.extend(&shape);
            if let Some(v) = v {
                s.push(v);
            }
            s
        };
        let spec = |name: &str, sample_shape: Vec<usize>, what: &str| {
            (
                ArraySpec {
                    name: name.into(),
                    sample_shape,
                },
                what.to_string(),
            )
        };
        match &self.model {
            Model::Reacdiff2d(_) => vec![spec("tensor", with_time(Some(2)), "activator u and inhibitor v")],
            Model::Darcy(_) => vec![
                spec("nu", shape.clone(), "diffusion coefficient a(x)"),
                spec("tensor", shape, "steady-state solution u(x)"),
            ],
            Model::Cns { .. } => {
                let mut v = vec![spec("density", with_time(None), "mass density")];
                for (a, name) in ["Vx", "Vy", "Vz"].iter().enumerate().take(self.grid.dim()) {
                    v.push(spec(name, with_time(None), &format!("velocity component {}", a + 1)));
                }
                v.push(spec("pressure", with_time(None), "gas pressure"));
                v
            }
            Model::Swe { .. } => vec![spec("tensor", with_time(Some(1)), "water height h")],
            _ => vec![spec("tensor", with_time(Some(1)), "u")],
        }
    }

    /// Names of the arrays holding model outputs (what metrics compare).
    pub fn outputs(&self) -> Vec<String> {
        self.array_specs()
            .into_iter()
            .map(|(s, _)| s.name)
            .filter(|n| n != "nu")
            .collect()
    }

    pub fn meta(&self) -> Result<DatasetMeta> {
        Ok(DatasetMeta {
            pde: self.pde().name().into(),
            seed: self.config.seed,
            samples: self.config.samples,
            precision: self.config.precision,
            scheme_version: dataio::SCHEME_VERSION.into(),
            grid: GridMeta::of(&self.grid),
            time: self.time.as_ref().map(TimeMeta::of),
            arrays: self.array_specs().into_iter().map(|(s, d)| (s.name, d)).collect(),
            outputs: self.outputs(),
            config: serde_yaml::to_value(&self.config)?,
        })
    }

    /// Initial condition of one sample for the scalar 1D problems.
    pub fn initial_condition(&self, rng: &mut SeededRng) -> Result<Field> {
        match &self.model {
            Model::Advection(_) | Model::Burgers(_) => {
                initcond::sinusoidal_superposition(rng, &self.grid, &SinusoidSpec::default())
            }
            Model::Reacdiff1d(_) => initcond::normalized_positive_ic(rng, &self.grid, &SinusoidSpec::default()),
            Model::Diffsorp(_) => initcond::uniform_random_ic(rng, &self.grid, 0.0, 0.2),
            _ => Err(Error::Config(format!("{} has no scalar initial condition", self.pde()))),
        }
    }

    /// Solves a scalar 1D problem from `ic` over `time`.
    pub fn solve_scalar(&self, ic: &Field, time: &TimeAxis) -> Result<Trajectory> {
        match &self.model {
            Model::Advection(m) => solve_advection(ic, m, time),
            Model::Burgers(m) => solve_burgers(ic, m, time),
            Model::Reacdiff1d(m) => solve_diffreact1d(ic, m, time),
            Model::Diffsorp(m) => solve_diffsorp(ic, m, time),
            _ => Err(Error::Config(format!("{} is not a scalar 1D problem", self.pde()))),
        }
    }

    /// Arrays of one sample in the order of [`Problem::array_specs`].
    pub fn simulate(&self, rng: &mut SeededRng) -> Result<Vec<Vec<f64>>> {
        let stack = |traj: Trajectory| -> Vec<f64> { traj.into_frames().into_iter().flat_map(Field::into_values).collect() };
        let per_channel = |traj: Trajectory| -> Vec<Vec<f64>> {
            let c = traj.channels();
            let mut out = vec![Vec::new(); c];
            for f in traj.frames() {
                for (k, ch) in out.iter_mut().enumerate() {
                    ch.extend(f.channel(k));
                }
            }
            out
        };
        let time = self.time.as_ref();
        let need_time = || time.ok_or_else(|| Error::Config("time axis missing".into()));
        match &self.model {
            Model::Advection(_) | Model::Burgers(_) | Model::Reacdiff1d(_) | Model::Diffsorp(_) => {
                let ic = self.initial_condition(rng)?;
                Ok(vec![stack(self.solve_scalar(&ic, need_time()?)?)])
            }
            Model::Reacdiff2d(m) => {
                let noise = initcond::normal_noise_ic(rng, &self.grid, 2)?;
                let u0 = Field::new(self.grid.clone(), 1, noise.channel(0))?;
                let v0 = Field::new(self.grid.clone(), 1, noise.channel(1))?;
                Ok(vec![stack(solve_diffreact2d(&u0, &v0, m, need_time()?)?)])
            }
            Model::Darcy(m) => {
                let a = initcond::darcy_coefficient(rng, &self.grid, &DarcyCoefficientSpec::default())?;
                let au = solve_darcy_steady(&a, m)?;
                Ok(vec![au.channel(0), au.channel(1)])
            }
            Model::Cns { params, ic, mach } => {
                let state = match ic {
                    CnsIc::Random => initcond::random_field_cns_ic(
                        rng,
                        &self.grid,
                        &CnsRandomSpec {
                            mach: *mach,
                            ..CnsRandomSpec::default()
                        },
                    )?,
                    CnsIc::Shock => initcond::shock_tube_ic(rng, &self.grid, &ShockTubeSpec::default())?,
                    CnsIc::Turbulence => {
                        let (rho, p) = (1.0, 1.0 / GAMMA);
                        let v = initcond::turbulence_velocity(rng, &self.grid, *mach, sound_speed(rho, p, GAMMA))?;
                        let n = self.grid.len();
                        ConservedState::from_primitive(self.grid.clone(), GAMMA, &vec![rho; n], &v.to_channels(), &vec![p; n])?
                    }
                };
                Ok(per_channel(solve_cns(&state, params, need_time()?)?))
            }
            Model::Swe { gravity } => {
                let h = initcond::radial_dam_break_ic(rng, &self.grid)?;
                let state = SweState::at_rest(&h, *gravity)?;
                Ok(vec![stack(solve_swe(&state, &SweParams::default(), need_time()?)?)])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub sample: usize,
    pub stream_id: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct GenerateSummary {
    pub files: Vec<PathBuf>,
    pub rejections: Vec<Rejection>,
}

/// Output directory: explicit setting, then the environment, then `.`.
pub fn output_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let n = workers.unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))
}

fn simulate_with_retries(problem: &Problem, b: usize) -> Result<(Vec<Vec<f64>>, Vec<Rejection>)> {
    let samples = problem.config.samples as u64;
    let mut rejections = Vec::new();
    for attempt in 0..MAX_ATTEMPTS {
        let stream_id = b as u64 + attempt * samples;
        let mut rng = SeededRng::new(problem.config.seed, stream_id);
        let result = problem.simulate(&mut rng).and_then(|arrays| {
            for a in &arrays {
                if let Some(i) = a.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite {
                        context: format!("sample {b}"),
                        index: i,
                    });
                }
            }
            Ok(arrays)
        });
        match result {
            Ok(arrays) => return Ok((arrays, rejections)),
            Err(e) if e.is_numerical() => rejections.push(Rejection {
                sample: b,
                stream_id,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Rejected {
        rejected: rejections.len(),
        total: problem.config.samples,
    })
}

/// Generates one file per parameter combination.
pub fn generate(config: &GenerateConfig) -> Result<GenerateSummary> {
    let resolved = config.resolve()?;
    let dir = output_dir(config.out.as_deref());
    std::fs::create_dir_all(&dir)?;
    let pool = pool(config.workers)?;
    let chunk = pool.current_num_threads().max(1) * 2;
    let mut summary = GenerateSummary::default();
    for r in &resolved {
        let problem = Problem::new(r)?;
        let path = dir.join(r.file_name()?.to_string());
        let specs = problem.array_specs().into_iter().map(|(s, _)| s).collect();
        let mut writer = DatasetWriter::create(&path, &problem.meta()?, specs)?;
        let mut rejections = Vec::new();
        for start in (0..r.samples).step_by(chunk) {
            let end = (start + chunk).min(r.samples);
            let results: Vec<Result<(Vec<Vec<f64>>, Vec<Rejection>)>> =
                pool.install(|| (start..end).into_par_iter().map(|b| simulate_with_retries(&problem, b)).collect());
            for (b, res) in (start..end).zip(results) {
                let (arrays, rej) = res?;
                rejections.extend(rej);
                writer.write_sample(b, &arrays)?;
            }
        }
        if rejections.len() * 100 > r.samples {
            return Err(Error::Rejected {
                rejected: rejections.len(),
                total: r.samples,
            });
        }
        summary.files.push(writer.finish()?);
        summary.rejections.extend(rejections);
    }
    Ok(summary)
}

/// Packs the output arrays of a file into a metric batch; per-variable
/// arrays become channels in file order.
pub fn load_batch(file: &DatasetFile) -> Result<Batch> {
    let meta = &file.meta;
    let dim = meta.grid.shape.len();
    let times = meta.time.as_ref().map_or(1, |t| t.n_snapshots);
    let lead = if meta.time.is_some() { 2 } else { 1 };
    let mut parts = Vec::new();
    for name in &meta.outputs {
        let arr = file
            .array(name)
            .ok_or_else(|| Error::Dataset {
                path: file.path.clone(),
                message: format!("output array {name} missing"),
            })?;
        let v = match arr.shape.len() - lead {
            d if d == dim => 1,
            d if d == dim + 1 => *arr.shape.last().expect("non-empty"),
            _ => {
                return Err(Error::Shape(format!("array {name} has shape {:?}", arr.shape)));
            }
        };
        parts.push((arr, v));
    }
    let channels: usize = parts.iter().map(|(_, v)| v).sum();
    let cells: usize = meta.grid.shape.iter().product();
    let units = meta.samples * times * cells;
    let mut data = vec![0.0; units * channels];
    let mut offset = 0;
    for (arr, v) in parts {
        for u in 0..units {
            for k in 0..v {
                data[u * channels + offset + k] = arr.data[u * v + k];
            }
        }
        offset += v;
    }
    Batch::new(meta.samples, times, meta.grid.shape.clone(), channels, data)
}

/// Forward metrics of a prediction file against a truth file.
pub fn evaluate(truth_path: &Path, pred_path: &Path, bands: &FrequencyBands) -> Result<MetricReport> {
    let truth = dataio::read_dataset(truth_path)?;
    let pred = dataio::read_dataset(pred_path)?;
    if truth.meta.outputs != pred.meta.outputs {
        return Err(Error::Shape(format!(
            "truth outputs {:?} differ from prediction outputs {:?}",
            truth.meta.outputs, pred.meta.outputs
        )));
    }
    let t = load_batch(&truth)?;
    let p = load_batch(&pred)?;
    let mut report = metrics::forward_report(&p, &t, bands)?;
    let name = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    report.set_meta("truth", name(truth_path));
    report.set_meta("prediction", name(pred_path));
    report.set_meta("channels", truth.meta.outputs.join(", "));
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct InverseOutcome {
    /// Mean over the test samples.
    pub report: MetricReport,
    pub per_sample: Vec<MetricReport>,
    pub estimates: Vec<InverseEstimate>,
}

fn field_of(grid: &Grid, arr: &NamedArray, b: usize, frame: usize, frames: usize) -> Result<Field> {
    let n = grid.len();
    let sample = arr.sample(b);
    if sample.len() != frames * n {
        return Err(Error::Shape(format!("array {} is not a scalar 1D trajectory", arr.name)));
    }
    Field::new(grid.clone(), 1, sample[frame * n..(frame + 1) * n].to_vec())
}

/// Estimates the initial condition of the first `n_test_samples` samples
/// from their snapshot at the horizon.
pub fn run_inverse(truth_path: &Path, config: &InverseConfig, workers: Option<usize>) -> Result<InverseOutcome> {
    config.validate()?;
    let file = dataio::read_dataset(truth_path)?;
    let resolved: ResolvedConfig = serde_yaml::from_value(file.meta.config.clone())?;
    let problem = Problem::new(&resolved)?;
    if !problem.pde().supports_inverse() {
        return Err(Error::Config(format!(
            "inverse estimation supports advection, burgers, reacdiff1d and diffsorp, not {}",
            problem.pde()
        )));
    }
    let time = problem.time.ok_or_else(|| Error::Config("dataset has no time axis".into()))?;
    if config.horizon >= time.n_snapshots {
        return Err(Error::Config(format!(
            "horizon {} outside the {} stored snapshots",
            config.horizon, time.n_snapshots
        )));
    }
    let horizon_time = TimeAxis::new(time.t_start, time.snapshot(config.horizon), config.horizon + 1)?;
    let arr = file
        .array("tensor")
        .ok_or_else(|| Error::Config("dataset has no tensor array".into()))?;
    let forward = |ic: &Field| problem.solve_scalar(ic, &horizon_time);
    let pool = pool(workers)?;
    let n = config.n_test_samples.min(file.meta.samples);
    if n == 0 {
        return Err(Error::Config("no test samples requested".into()));
    }
    let mut per_sample = Vec::with_capacity(n);
    let mut estimates = Vec::with_capacity(n);
    for b in 0..n {
        let truth_ic = field_of(&problem.grid, arr, b, 0, time.n_snapshots)?;
        let observed = field_of(&problem.grid, arr, b, config.horizon, time.n_snapshots)?;
        let est = pool.install(|| inverse::estimate_ic(&observed, &forward, config))?;
        let ic = est.initial_condition();
        let pred = forward(&ic)?;
        per_sample.push(inverse::inverse_report(&ic, &truth_ic, pred.frame(config.horizon), &observed)?);
        estimates.push(est);
    }
    let mut report = metrics::mean_report(&per_sample)?;
    report.set_meta("truth", truth_path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default());
    report.set_meta("samples", n.to_string());
    report.set_meta("horizon", config.horizon.to_string());
    Ok(InverseOutcome {
        report,
        per_sample,
        estimates,
    })
}

/// Writes the estimated initial conditions and control values.
pub fn write_estimates(path: &Path, truth_meta: &DatasetMeta, outcome: &InverseOutcome) -> Result<PathBuf> {
    let b = outcome.estimates.len();
    let shape = truth_meta.grid.shape.clone();
    let cells: usize = shape.iter().product();
    let mut ic = Vec::with_capacity(b * cells);
    let mut controls = Vec::with_capacity(b * inverse::N_CONTROLS);
    for e in &outcome.estimates {
        ic.extend_from_slice(e.initial_condition().values());
        controls.extend_from_slice(e.params.values());
    }
    let mut ic_shape = vec![b];
    ic_shape.extend(&shape);
    ic_shape.push(1);
    let mut arrays = BTreeMap::new();
    arrays.insert("estimate".to_string(), "estimated initial condition".to_string());
    arrays.insert("controls".to_string(), "control values on the coarse lattice".to_string());
    let meta = DatasetMeta {
        samples: b,
        precision: Precision::F64,
        time: None,
        arrays,
        outputs: vec!["estimate".into()],
        ..truth_meta.clone()
    };
    dataio::write_dataset(
        path,
        &meta,
        &[
            NamedArray::new("estimate", ic_shape, ic)?,
            NamedArray::new("controls", vec![b, inverse::N_CONTROLS], controls)?,
        ],
    )
}
