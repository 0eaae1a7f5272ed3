//! HDF5 dataset files and metric report files.
//!
//! Arrays are laid out `(b, t, x1..xd, v)`; time-independent data drops
//! the `t` axis and per-variable arrays drop `v`. Metadata is a YAML
//! document stored as a UTF-8 string attribute named `config` on the root
//! group. Files are written sample by sample into chunked datasets under a
//! temporary name and renamed into place only once complete.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use hdf5::types::VarLenUnicode;
use hdf5::{Dataset, File, Hyperslab, SliceOrIndex};
use ndarray::{ArrayD, IxDyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, TimeAxis};
use crate::metrics::MetricReport;

pub const META_ATTRIBUTE: &str = "config";
pub const SCHEME_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F32,
    F64,
}

impl Precision {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "f32" => Ok(Self::F32),
            "f64" => Ok(Self::F64),
            other => Err(Error::Config(format!("precision must be f32 or f64, not {other:?}"))),
        }
    }

    /// Rounds a value to what this precision stores.
    pub fn store(self, v: f64) -> f64 {
        match self {
            Self::F32 => v as f32 as f64,
            Self::F64 => v,
        }
    }
}

/// `${pde}--${parameters}--${config}.h5`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileName {
    pub pde: String,
    pub parameters: String,
    pub config: String,
}

impl FileName {
    pub fn new(pde: impl Into<String>, parameters: impl Into<String>, config: impl Into<String>) -> Result<Self> {
        let name = Self {
            pde: pde.into(),
            parameters: parameters.into(),
            config: config.into(),
        };
        for part in [&name.pde, &name.parameters, &name.config] {
            if part.is_empty() || part.contains("--") || part.contains('/') || part.contains('\\') {
                return Err(Error::Config(format!("file name component {part:?} is empty or contains '--' or a path separator")));
            }
        }
        Ok(name)
    }

    pub fn parse(file_name: &str) -> Result<Self> {
        let stem = file_name
            .strip_suffix(".h5")
            .ok_or_else(|| Error::Config(format!("{file_name:?} does not end in .h5")))?;
        let parts: Vec<&str> = stem.split("--").collect();
        match parts.as_slice() {
            [p, q, c] => Self::new(*p, *q, *c),
            _ => Err(Error::Config(format!("{file_name:?} does not have three '--' separated parts"))),
        }
    }
}

impl fmt::Display for FileName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}--{}--{}.h5", self.pde, self.parameters, self.config)
    }
}

/// Renders a float for file names: shortest round-trip form.
pub fn format_param(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub shape: Vec<usize>,
}

impl GridMeta {
    pub fn of(grid: &Grid) -> Self {
        Self {
            lo: grid.lo().to_vec(),
            hi: grid.hi().to_vec(),
            shape: grid.shape().to_vec(),
        }
    }

    pub fn to_grid(&self) -> Result<Grid> {
        Grid::new(&self.lo, &self.hi, &self.shape)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeMeta {
    pub t_start: f64,
    pub t_end: f64,
    pub n_snapshots: usize,
    /// Frame 0 of every trajectory is the initial condition.
    pub initial_frame_included: bool,
}

impl TimeMeta {
    pub fn of(time: &TimeAxis) -> Self {
        Self {
            t_start: time.t_start,
            t_end: time.t_end,
            n_snapshots: time.n_snapshots,
            initial_frame_included: true,
        }
    }

    pub fn to_axis(&self) -> Result<TimeAxis> {
        TimeAxis::new(self.t_start, self.t_end, self.n_snapshots)
    }
}

/// Self-description of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub pde: String,
    pub seed: u64,
    pub samples: usize,
    pub precision: Precision,
    pub scheme_version: String,
    pub grid: GridMeta,
    pub time: Option<TimeMeta>,
    /// Array name to physical meaning.
    pub arrays: BTreeMap<String, String>,
    /// Arrays holding model outputs, in channel order.
    pub outputs: Vec<String>,
    /// Fully resolved generation config.
    pub config: serde_yaml::Value,
}

impl DatasetMeta {
    pub fn to_yaml(&self) -> Result<String> {
        Ok(serde_yaml::to_string(self)?)
    }

    pub fn from_yaml(s: &str) -> Result<Self> {
        Ok(serde_yaml::from_str(s)?)
    }
}

/// One dense array with its full shape.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedArray {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl NamedArray {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if shape.iter().product::<usize>() != data.len() {
            return Err(Error::Shape(format!("array {name}: shape {shape:?} holds {} values", data.len())));
        }
        Ok(Self { name, shape, data })
    }

    /// Values of sample `b` (first axis).
    pub fn sample(&self, b: usize) -> &[f64] {
        let len: usize = self.shape[1..].iter().product();
        &self.data[b * len..(b + 1) * len]
    }
}

/// Name and per-sample shape of a stored array.
#[derive(Debug, Clone, PartialEq)]
pub struct ArraySpec {
    pub name: String,
    pub sample_shape: Vec<usize>,
}

fn dataset_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Dataset {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    path.with_file_name(name)
}

/// Streaming writer; samples may arrive in any order but must all arrive
/// before [`DatasetWriter::finish`].
pub struct DatasetWriter {
    path: PathBuf,
    tmp: PathBuf,
    file: Option<File>,
    specs: Vec<ArraySpec>,
    datasets: Vec<Dataset>,
    written: Vec<bool>,
    precision: Precision,
}

impl DatasetWriter {
    pub fn create(path: &Path, meta: &DatasetMeta, specs: Vec<ArraySpec>) -> Result<Self> {
        let tmp = tmp_path(path);
        let mut writer = Self {
            path: path.to_path_buf(),
            tmp: tmp.clone(),
            file: None,
            specs,
            datasets: Vec::new(),
            written: vec![false; meta.samples],
            precision: meta.precision,
        };
        if meta.samples == 0 {
            return Err(Error::Config("a dataset needs at least one sample".into()));
        }
        // the writer's Drop removes the temporary file if anything below fails
        let file = File::with_options()
            .with_fcpl(|p| p.obj_track_times(false))
            .create(&tmp)
            .map_err(|e| dataset_error(path, format!("cannot create: {e}")))?;
        file.new_attr::<VarLenUnicode>()
            .create(META_ATTRIBUTE)?
            .write_scalar(&meta.to_yaml()?.parse::<VarLenUnicode>().map_err(|e| dataset_error(path, e.to_string()))?)?;
        let grid = meta.grid.to_grid()?;
        for a in 0..grid.dim() {
            let name = ["x-coordinate", "y-coordinate", "z-coordinate"][a];
            file.new_dataset::<f64>()
                .obj_track_times(false)
                .shape(grid.shape()[a])
                .create(name)?
                .write_raw(&grid.centers(a))?;
        }
        if let Some(t) = &meta.time {
            file.new_dataset::<f64>()
                .obj_track_times(false)
                .shape(t.n_snapshots)
                .create("t-coordinate")?
                .write_raw(&t.to_axis()?.times())?;
        }
        for spec in &writer.specs {
            let mut shape = vec![meta.samples];
            shape.extend(&spec.sample_shape);
            let mut chunk = vec![1];
            chunk.extend(&spec.sample_shape);
            let ds = match meta.precision {
                Precision::F32 => file.new_dataset::<f32>().obj_track_times(false).chunk(chunk).shape(shape).create(spec.name.as_str())?,
                Precision::F64 => file.new_dataset::<f64>().obj_track_times(false).chunk(chunk).shape(shape).create(spec.name.as_str())?,
            };
            writer.datasets.push(ds);
        }
        writer.file = Some(file);
        Ok(writer)
    }

    /// Writes sample `b`; `arrays` follow the order of the specs.
    pub fn write_sample(&mut self, b: usize, arrays: &[Vec<f64>]) -> Result<()> {
        if b >= self.written.len() {
            return Err(dataset_error(&self.path, format!("sample {b} out of range")));
        }
        if arrays.len() != self.specs.len() {
            return Err(Error::Shape(format!("{} arrays for {} specs", arrays.len(), self.specs.len())));
        }
        for ((spec, ds), data) in self.specs.iter().zip(&self.datasets).zip(arrays) {
            let n: usize = spec.sample_shape.iter().product();
            if data.len() != n {
                return Err(Error::Shape(format!(
                    "array {} expects {n} values per sample, got {}",
                    spec.name,
                    data.len()
                )));
            }
            if let Some(i) = data.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: format!("{} of sample {b}", spec.name),
                    index: i,
                });
            }
            let mut sel = vec![SliceOrIndex::Index(b)];
            sel.extend(spec.sample_shape.iter().map(|&n| SliceOrIndex::SliceTo {
                start: 0,
                step: 1,
                end: n,
                block: 1,
            }));
            let dims = IxDyn(&spec.sample_shape);
            match self.precision {
                Precision::F32 => {
                    let arr = ArrayD::from_shape_vec(dims, data.iter().map(|v| *v as f32).collect()).expect("checked length");
                    ds.write_slice(&arr, Hyperslab::from(sel.clone()))?;
                }
                Precision::F64 => {
                    let arr = ArrayD::from_shape_vec(dims, data.clone()).expect("checked length");
                    ds.write_slice(&arr, Hyperslab::from(sel.clone()))?;
                }
            }
        }
        self.written[b] = true;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        if let Some(b) = self.written.iter().position(|w| !w) {
            return Err(dataset_error(&self.path, format!("sample {b} was never written")));
        }
        self.datasets.clear();
        if let Some(f) = self.file.take() {
            f.close()?;
        }
        std::fs::rename(&self.tmp, &self.path)?;
        Ok(self.path.clone())
    }
}

impl Drop for DatasetWriter {
    fn drop(&mut self) {
        self.datasets.clear();
        self.file.take();
        let _ = std::fs::remove_file(&self.tmp);
    }
}

/// Writes fully materialized arrays whose first axis is the sample axis.
pub fn write_dataset(path: &Path, meta: &DatasetMeta, arrays: &[NamedArray]) -> Result<PathBuf> {
    for a in arrays {
        if a.shape.first() != Some(&meta.samples) {
            return Err(Error::Shape(format!(
                "array {} has leading axis {:?}, expected {} samples",
                a.name,
                a.shape.first(),
                meta.samples
            )));
        }
    }
    let specs = arrays
        .iter()
        .map(|a| ArraySpec {
            name: a.name.clone(),
            sample_shape: a.shape[1..].to_vec(),
        })
        .collect();
    let mut w = DatasetWriter::create(path, meta, specs)?;
    for b in 0..meta.samples {
        let slabs: Vec<Vec<f64>> = arrays.iter().map(|a| a.sample(b).to_vec()).collect();
        w.write_sample(b, &slabs)?;
    }
    w.finish()
}

/// Contents of a dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub path: PathBuf,
    pub meta: DatasetMeta,
    /// Data arrays in file order (alphabetical).
    pub arrays: Vec<NamedArray>,
    pub coordinates: Vec<NamedArray>,
}

impl DatasetFile {
    pub fn array(&self, name: &str) -> Option<&NamedArray> {
        self.arrays.iter().find(|a| a.name == name)
    }
}

fn read_array(path: &Path, ds: &Dataset, name: &str) -> Result<NamedArray> {
    let shape = ds.shape();
    let size = ds.dtype().map_err(|e| dataset_error(path, e.to_string()))?.size();
    let data = match size {
        4 => ds.read_raw::<f32>()?.into_iter().map(f64::from).collect(),
        8 => ds.read_raw::<f64>()?,
        other => return Err(dataset_error(path, format!("array {name}: unsupported element size {other}"))),
    };
    NamedArray::new(name, shape, data)
}

pub fn read_dataset(path: &Path) -> Result<DatasetFile> {
    if !path.exists() {
        return Err(dataset_error(path, "no such file"));
    }
    hdf5::silence_errors(true);
    let file = File::open(path).map_err(|e| dataset_error(path, format!("cannot open: {e}")))?;
    let meta_str: VarLenUnicode = file
        .attr(META_ATTRIBUTE)
        .and_then(|a| a.read_scalar())
        .map_err(|e| dataset_error(path, format!("missing {META_ATTRIBUTE} attribute: {e}")))?;
    let meta = DatasetMeta::from_yaml(meta_str.as_str())?;
    let mut arrays = Vec::new();
    let mut coordinates = Vec::new();
    for name in file.member_names()? {
        let ds = file.dataset(&name).map_err(|e| dataset_error(path, format!("{name}: {e}")))?;
        let arr = read_array(path, &ds, &name)?;
        if name.ends_with("-coordinate") {
            coordinates.push(arr);
        } else {
            if arr.shape.first() != Some(&meta.samples) {
                return Err(dataset_error(path, format!("array {name} does not hold {} samples", meta.samples)));
            }
            arrays.push(arr);
        }
    }
    Ok(DatasetFile {
        path: path.to_path_buf(),
        meta,
        arrays,
        coordinates,
    })
}

/// Writes `<stem>.json` and `<stem>.txt` next to `path` and returns both paths.
pub fn emit_report(report: &MetricReport, path: &Path) -> Result<(PathBuf, PathBuf)> {
    let json = path.with_extension("json");
    let txt = path.with_extension("txt");
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&json, serde_json::to_string_pretty(&report.to_json())? + "\n")?;
    std::fs::write(&txt, report.to_table())?;
    Ok((json, txt))
}

pub fn read_report(path: &Path) -> Result<MetricReport> {
    let text = std::fs::read_to_string(path.with_extension("json"))?;
    MetricReport::from_json(&serde_json::from_str(&text)?)
}
