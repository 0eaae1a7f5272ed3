//! Forward and inverse error metrics.
//!
//! Spectra use the unnormalized forward DFT. Shell power is `|F|^2 / N`
//! with `N` the number of cells, so the shell powers of an error sum to its
//! spatial `sum |err|^2` exactly (Parseval).
//!
//! Forward metrics are reduced per channel in a fixed order: over space
//! first (then a square root where the metric has one), then a mean over
//! snapshots, then over samples, then over channels.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::grid::{Field, Trajectory};
use crate::spectral;

/// Description of the forward reduction order, stored with every report.
pub const FORWARD_AVERAGING: &str =
    "per (sample, snapshot, channel) over space, then mean over snapshots, samples and channels";

/// Dense `(b, t, x1..xd, v)` array of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    samples: usize,
    times: usize,
    spatial: Vec<usize>,
    channels: usize,
    data: Vec<f64>,
}

impl Batch {
    pub fn new(samples: usize, times: usize, spatial: Vec<usize>, channels: usize, data: Vec<f64>) -> Result<Self> {
        let cells: usize = spatial.iter().product();
        if samples == 0 || times == 0 || channels == 0 || spatial.is_empty() || cells == 0 {
            return Err(Error::Shape("batch dimensions must all be positive".into()));
        }
        if data.len() != samples * times * cells * channels {
            return Err(Error::Shape(format!(
                "batch ({samples}, {times}, {spatial:?}, {channels}) given {} values",
                data.len()
            )));
        }
        Ok(Self {
            samples,
            times,
            spatial,
            channels,
            data,
        })
    }

    pub fn from_trajectories(trajs: &[Trajectory]) -> Result<Self> {
        let first = trajs.first().ok_or_else(|| Error::Shape("empty batch".into()))?;
        let times = first.frames().len();
        let spatial = first.grid().shape().to_vec();
        let channels = first.channels();
        let mut data = Vec::new();
        for t in trajs {
            if t.frames().len() != times || t.grid().shape() != spatial.as_slice() || t.channels() != channels {
                return Err(Error::Shape("trajectories in a batch must share their shape".into()));
            }
            for f in t.frames() {
                data.extend_from_slice(f.values());
            }
        }
        Self::new(trajs.len(), times, spatial, channels, data)
    }

    /// Time-independent samples, stored with a single snapshot.
    pub fn from_fields(fields: &[Field]) -> Result<Self> {
        let first = fields.first().ok_or_else(|| Error::Shape("empty batch".into()))?;
        let spatial = first.grid().shape().to_vec();
        let channels = first.channels();
        let mut data = Vec::new();
        for f in fields {
            if f.grid().shape() != spatial.as_slice() || f.channels() != channels {
                return Err(Error::Shape("fields in a batch must share their shape".into()));
            }
            data.extend_from_slice(f.values());
        }
        Self::new(fields.len(), 1, spatial, channels, data)
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn times(&self) -> usize {
        self.times
    }

    pub fn spatial(&self) -> &[usize] {
        &self.spatial
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn cells(&self) -> usize {
        self.spatial.iter().product()
    }

    /// Spatial values of one `(sample, snapshot, channel)`.
    pub fn unit(&self, b: usize, t: usize, c: usize) -> Vec<f64> {
        let cells = self.cells();
        let base = (b * self.times + t) * cells * self.channels;
        (0..cells).map(|i| self.data[base + i * self.channels + c]).collect()
    }

    /// Every value of one sample.
    pub fn sample(&self, b: usize) -> &[f64] {
        let len = self.times * self.cells() * self.channels;
        &self.data[b * len..(b + 1) * len]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            data: self.data.iter().map(|v| f(*v)).collect(),
            ..self.clone()
        }
    }
}

fn check_shapes(pred: &Batch, truth: &Batch) -> Result<()> {
    if pred.samples != truth.samples
        || pred.times != truth.times
        || pred.spatial != truth.spatial
        || pred.channels != truth.channels
    {
        return Err(Error::Shape(format!(
            "prediction ({}, {}, {:?}, {}) vs truth ({}, {}, {:?}, {})",
            pred.samples,
            pred.times,
            pred.spatial,
            pred.channels,
            truth.samples,
            truth.times,
            truth.spatial,
            truth.channels
        )));
    }
    Ok(())
}

/// Applies `f(pred_unit, true_unit)` to every `(sample, snapshot, channel)`
/// and reduces with the fixed averaging order.
fn reduce(pred: &Batch, truth: &Batch, mut f: impl FnMut(&[f64], &[f64]) -> Result<f64>) -> Result<f64> {
    check_shapes(pred, truth)?;
    let mut over_channels = 0.0;
    for c in 0..pred.channels {
        let mut over_samples = 0.0;
        for b in 0..pred.samples {
            let mut over_times = 0.0;
            for t in 0..pred.times {
                over_times += f(&pred.unit(b, t, c), &truth.unit(b, t, c))?;
            }
            over_samples += over_times / pred.times as f64;
        }
        over_channels += over_samples / pred.samples as f64;
    }
    Ok(over_channels / pred.channels as f64)
}

fn sq_err(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn rmse(pred: &Batch, truth: &Batch) -> Result<f64> {
    reduce(pred, truth, |p, q| Ok((sq_err(p, q) / p.len() as f64).sqrt()))
}

/// `||pred - true|| / ||true||`; undefined when the truth has zero norm.
pub fn nrmse(pred: &Batch, truth: &Batch) -> Result<f64> {
    reduce(pred, truth, |p, q| {
        let norm: f64 = q.iter().map(|v| v * v).sum();
        if norm == 0.0 {
            return Err(Error::UndefinedMetric("a reference snapshot is identically zero".into()));
        }
        Ok((sq_err(p, q) / norm).sqrt())
    })
}

/// Largest absolute error of each sample, averaged over samples.
pub fn max_error(pred: &Batch, truth: &Batch) -> Result<f64> {
    check_shapes(pred, truth)?;
    let mut acc = 0.0;
    for b in 0..pred.samples {
        let m = pred
            .sample(b)
            .iter()
            .zip(truth.sample(b))
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        acc += m;
    }
    Ok(acc / pred.samples as f64)
}

/// Error of the spatial sum, `|sum pred - sum true| / N`.
pub fn crmse(pred: &Batch, truth: &Batch) -> Result<f64> {
    reduce(pred, truth, |p, q| {
        let d = p.iter().sum::<f64>() - q.iter().sum::<f64>();
        Ok(d.abs() / p.len() as f64)
    })
}

/// Flat indices of the outermost layer of cells.
pub fn boundary_cells(shape: &[usize]) -> Vec<usize> {
    let total: usize = shape.iter().product();
    (0..total)
        .filter(|&flat| {
            let mut rem = flat;
            let mut edge = false;
            for a in (0..shape.len()).rev() {
                let i = rem % shape[a];
                rem /= shape[a];
                edge |= i == 0 || i + 1 == shape[a];
            }
            edge
        })
        .collect()
}

/// RMSE over the outermost layer of cells.
pub fn brmse(pred: &Batch, truth: &Batch) -> Result<f64> {
    let cells = boundary_cells(&pred.spatial);
    reduce(pred, truth, |p, q| {
        let s: f64 = cells.iter().map(|&i| (p[i] - q[i]).powi(2)).sum();
        Ok((s / cells.len() as f64).sqrt())
    })
}

/// Shell index `round(|k|)` of every DFT coefficient.
pub fn shell_indices(shape: &[usize]) -> Vec<usize> {
    spectral::wave_vectors(shape)
        .into_iter()
        .map(|k| ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt().round() as usize)
        .collect()
}

/// Power of `values` summed over shells of integer radius, `|F|^2 / N`.
pub fn radial_spectrum(values: &[f64], shape: &[usize]) -> Vec<f64> {
    let spec = spectral::forward_real(values, shape);
    let shells = shell_indices(shape);
    let kmax = shells.iter().copied().max().unwrap_or(0);
    let n = values.len() as f64;
    let mut out = vec![0.0; kmax + 1];
    for (c, k) in spec.iter().zip(shells) {
        out[k] += c.norm_sqr() / n;
    }
    out
}

/// Radial spectrum of every channel of a field.
pub fn radial_spectrum_field(err: &Field) -> Vec<Vec<f64>> {
    let shape = err.grid().shape();
    (0..err.channels()).map(|c| radial_spectrum(&err.channel(c), shape)).collect()
}

/// Inclusive shell range; `kmax = None` reaches every shell from `kmin` up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Band {
    pub kmin: usize,
    pub kmax: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyBands {
    pub low: Band,
    pub mid: Band,
    pub high: Band,
}

impl Default for FrequencyBands {
    fn default() -> Self {
        Self {
            low: Band { kmin: 0, kmax: Some(4) },
            mid: Band { kmin: 5, kmax: Some(12) },
            high: Band { kmin: 13, kmax: None },
        }
    }
}

/// `floor(min(Ns) / 2)`.
pub fn nyquist_index(shape: &[usize]) -> usize {
    shape.iter().copied().min().unwrap_or(0) / 2
}

pub fn frmse(pred: &Batch, truth: &Batch, band: Band) -> Result<f64> {
    let shape = pred.spatial.clone();
    let k_nyq = nyquist_index(&shape);
    let (hi, width) = match band.kmax {
        Some(k) => (k, (k + 1).saturating_sub(band.kmin).max(1)),
        None => (usize::MAX, (k_nyq + 1).saturating_sub(band.kmin).max(1)),
    };
    reduce(pred, truth, |p, q| {
        let err: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
        let spec = radial_spectrum(&err, &shape);
        let power: f64 = spec
            .iter()
            .enumerate()
            .filter(|(k, _)| *k >= band.kmin && *k <= hi)
            .map(|(_, v)| v)
            .sum();
        Ok(power.sqrt() / width as f64)
    })
}

/// Ordered metric names with their values plus free-form metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricReport {
    values: Vec<(String, f64)>,
    meta: Vec<(String, String)>,
}

impl MetricReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64) {
        self.values.push((name.into(), value));
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let key = key.into();
        let value = value.into();
        match self.meta.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.meta.push((key, value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn values(&self) -> &[(String, f64)] {
        &self.values
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.meta
    }

    pub fn extend(&mut self, other: MetricReport) {
        self.values.extend(other.values);
        for (k, v) in other.meta {
            self.set_meta(k, v);
        }
    }

    /// `{"metrics": {...}, "meta": {...}}` with keys in insertion order.
    pub fn to_json(&self) -> Value {
        let mut metrics = Map::new();
        for (k, v) in &self.values {
            metrics.insert(k.clone(), Value::from(*v));
        }
        let mut meta = Map::new();
        for (k, v) in &self.meta {
            meta.insert(k.clone(), Value::from(v.clone()));
        }
        let mut root = Map::new();
        root.insert("metrics".into(), Value::Object(metrics));
        root.insert("meta".into(), Value::Object(meta));
        Value::Object(root)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = || Error::Config("report JSON must hold \"metrics\" and \"meta\" objects".into());
        let metrics = value.get("metrics").and_then(Value::as_object).ok_or_else(bad)?;
        let meta = value.get("meta").and_then(Value::as_object).ok_or_else(bad)?;
        let mut out = Self::new();
        for (k, v) in metrics {
            out.push(k.clone(), v.as_f64().ok_or_else(bad)?);
        }
        for (k, v) in meta {
            out.set_meta(k.clone(), v.as_str().ok_or_else(bad)?);
        }
        Ok(out)
    }

    /// Aligned `name  value` lines with 17 significant digits.
    pub fn to_table(&self) -> String {
        let width = self.values.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in &self.values {
            out.push_str(&format!("{k:<width$}  {v:.16e}\n"));
        }
        out
    }
}

pub const FORWARD_KEYS: [&str; 8] = [
    "RMSE",
    "nRMSE",
    "max error",
    "cRMSE",
    "bRMSE",
    "fRMSE low",
    "fRMSE mid",
    "fRMSE high",
];

/// All eight forward metrics.
pub fn forward_report(pred: &Batch, truth: &Batch, bands: &FrequencyBands) -> Result<MetricReport> {
    let mut r = MetricReport::new();
    r.push(FORWARD_KEYS[0], rmse(pred, truth)?);
    r.push(FORWARD_KEYS[1], nrmse(pred, truth)?);
    r.push(FORWARD_KEYS[2], max_error(pred, truth)?);
    r.push(FORWARD_KEYS[3], crmse(pred, truth)?);
    r.push(FORWARD_KEYS[4], brmse(pred, truth)?);
    r.push(FORWARD_KEYS[5], frmse(pred, truth, bands.low)?);
    r.push(FORWARD_KEYS[6], frmse(pred, truth, bands.mid)?);
    r.push(FORWARD_KEYS[7], frmse(pred, truth, bands.high)?);
    r.set_meta("averaging", FORWARD_AVERAGING);
    r.set_meta("dft", "unnormalized forward transform; shell power |F|^2 / N");
    r.set_meta(
        "bands",
        format!(
            "low [{}, {}], mid [{}, {}], high [{}, nyquist = {}]",
            bands.low.kmin,
            bands.low.kmax.map_or("inf".into(), |k| k.to_string()),
            bands.mid.kmin,
            bands.mid.kmax.map_or("inf".into(), |k| k.to_string()),
            bands.high.kmin,
            nyquist_index(&pred.spatial)
        ),
    );
    Ok(r)
}

fn check_fields(pred: &Field, truth: &Field) -> Result<()> {
    if pred.grid().shape() != truth.grid().shape() || pred.channels() != truth.channels() {
        return Err(Error::Shape("estimate and truth fields differ in shape".into()));
    }
    Ok(())
}

/// `||pred - true||_p / ||true||_p` over every entry.
pub fn inverse_norm_error(pred: &[f64], truth: &[f64], p: f64) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Shape(format!("{} vs {} values", pred.len(), truth.len())));
    }
    if !(p >= 1.0) {
        return Err(Error::Config(format!("norm order {p} must be at least 1")));
    }
    let num: f64 = pred.iter().zip(truth).map(|(a, b)| (a - b).abs().powf(p)).sum();
    let den: f64 = truth.iter().map(|b| b.abs().powf(p)).sum();
    if den == 0.0 {
        return Err(Error::UndefinedMetric("reference field is identically zero".into()));
    }
    Ok((num / den).powf(1.0 / p))
}

pub fn mse(pred: &[f64], truth: &[f64]) -> f64 {
    sq_err(pred, truth) / pred.len() as f64
}

/// Quarter bands of the largest shell index: `[0, K/4)`, `[K/4, 3K/4)`, `[3K/4, K]`.
pub fn quarter_band(k: usize, kmax: usize) -> usize {
    let x = 4 * k;
    if x < kmax {
        0
    } else if x < 3 * kmax {
        1
    } else {
        2
    }
}

pub const BAND_NAMES: [&str; 3] = ["low", "mid", "high"];

/// Band-restricted spectral errors `fMSE`, `fL2`, `fL3` by quarter bands.
///
/// `fMSE band = sum_band |dF|^2 / N^2`, so the three bands add up to the
/// spatial MSE. `fL2` and `fL3` divide by the full-spectrum norm of the truth.
pub fn inverse_spectral_errors(pred: &Field, truth: &Field) -> Result<MetricReport> {
    check_fields(pred, truth)?;
    let shape = pred.grid().shape();
    let shells = shell_indices(shape);
    let kmax = shells.iter().copied().max().unwrap_or(0);
    let n = pred.grid().len() as f64;
    let channels = pred.channels();
    let mut sq = [0.0; 3];
    let mut cube = [0.0; 3];
    let (mut t2, mut t3) = (0.0, 0.0);
    for c in 0..channels {
        let err: Vec<f64> = pred.channel(c).iter().zip(truth.channel(c)).map(|(a, b)| a - b).collect();
        let fe = spectral::forward_real(&err, shape);
        let ft = spectral::forward_real(&truth.channel(c), shape);
        for ((e, t), &k) in fe.iter().zip(&ft).zip(&shells) {
            let band = quarter_band(k, kmax);
            let a = e.norm();
            sq[band] += a * a;
            cube[band] += a * a * a;
            let b = t.norm();
            t2 += b * b;
            t3 += b * b * b;
        }
    }
    let mut r = MetricReport::new();
    let total = n * n * channels as f64;
    r.push("fMSE", sq.iter().sum::<f64>() / total);
    for (i, name) in BAND_NAMES.iter().enumerate() {
        r.push(format!("fMSE {name}"), sq[i] / total);
    }
    for (i, name) in BAND_NAMES.iter().enumerate() {
        r.push(format!("fL2 {name}"), ratio(sq[i].sqrt(), t2.sqrt())?);
    }
    for (i, name) in BAND_NAMES.iter().enumerate() {
        r.push(format!("fL3 {name}"), ratio(cube[i].cbrt(), t3.cbrt())?);
    }
    Ok(r)
}

fn ratio(num: f64, den: f64) -> Result<f64> {
    if den == 0.0 {
        if num == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::UndefinedMetric("reference spectrum is identically zero".into()));
    }
    Ok(num / den)
}

/// `MSE`, `nL2`, `nL3` and the spectral band errors of one estimate.
pub fn inverse_metrics(pred: &Field, truth: &Field) -> Result<MetricReport> {
    check_fields(pred, truth)?;
    let mut r = MetricReport::new();
    r.push("MSE", mse(pred.values(), truth.values()));
    r.push("nL2", inverse_norm_error(pred.values(), truth.values(), 2.0)?);
    r.push("nL3", inverse_norm_error(pred.values(), truth.values(), 3.0)?);
    r.extend(inverse_spectral_errors(pred, truth)?);
    Ok(r)
}

/// Mean of several reports with identical keys.
pub fn mean_report(reports: &[MetricReport]) -> Result<MetricReport> {
    let first = reports.first().ok_or_else(|| Error::Shape("no reports to average".into()))?;
    let mut out = MetricReport::new();
    for (i, (k, _)) in first.values.iter().enumerate() {
        let mut acc = 0.0;
        for r in reports {
            let (name, v) = r.values.get(i).ok_or_else(|| Error::Shape("reports differ in keys".into()))?;
            if name != k {
                return Err(Error::Shape("reports differ in keys".into()));
            }
            acc += v;
        }
        out.push(k.clone(), acc / reports.len() as f64);
    }
    out.meta = first.meta.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn line_batch(values: Vec<f64>) -> Batch {
        let n = values.len();
        Batch::new(1, 1, vec![n], 1, values).unwrap()
    }

    #[test]
    fn identical_inputs_score_zero() {
        let a = line_batch((0..16).map(|i| (i as f64).sin() + 2.0).collect());
        let r = forward_report(&a, &a, &FrequencyBands::default()).unwrap();
        assert!(r.values().iter().all(|(_, v)| *v == 0.0));
    }

    #[test]
    fn constant_offset() {
        let t = line_batch((0..16).map(|i| (i as f64 * 0.3).cos() + 2.0).collect());
        let p = t.map(|v| v + 0.25);
        assert!((rmse(&p, &t).unwrap() - 0.25).abs() < 1e-15);
        assert!((crmse(&p, &t).unwrap() - 0.25).abs() < 1e-15);
        assert!((brmse(&p, &t).unwrap() - 0.25).abs() < 1e-15);
        assert!((max_error(&p, &t).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn nrmse_cases() {
        let t = line_batch((0..8).map(|i| i as f64 - 3.0).collect());
        assert!((nrmse(&t.map(|v| 2.0 * v), &t).unwrap() - 1.0).abs() < 1e-15);
        assert!((nrmse(&t.map(|_| 0.0), &t).unwrap() - 1.0).abs() < 1e-15);
        let zero = line_batch(vec![0.0; 8]);
        let err = nrmse(&t, &zero).unwrap_err();
        assert!(err.to_string().starts_with("nRMSE undefined"));
    }

    #[test]
    fn single_corrupted_cell() {
        let t = line_batch(vec![1.0; 16]);
        let mut v = vec![1.0; 16];
        v[7] += 0.5;
        assert_eq!(max_error(&line_batch(v), &t).unwrap(), 0.5);
    }

    #[test]
    fn interior_corruption_leaves_boundary_clean() {
        let shape = [6, 5];
        let t = Batch::new(1, 1, shape.to_vec(), 1, vec![1.0; 30]).unwrap();
        let mut v = vec![1.0; 30];
        v[5 + 2] = 9.0;
        let p = Batch::new(1, 1, shape.to_vec(), 1, v).unwrap();
        assert_eq!(brmse(&p, &t).unwrap(), 0.0);
        assert_eq!(boundary_cells(&shape).len(), 30 - 12);
    }

    #[test]
    fn single_mode_lands_in_its_shell() {
        let g = Grid::line(0.0, 1.0, 64).unwrap();
        let f = Field::from_fn(g, |x| (2.0 * PI * 3.0 * x[0]).sin()).unwrap();
        let s = radial_spectrum(f.values(), &[64]);
        let total: f64 = s.iter().sum();
        assert!((s[3] - total).abs() < 1e-12 * total);
    }

    #[test]
    fn band_placement() {
        let n = 64;
        let t = line_batch(vec![0.0; n]);
        let g = Grid::line(0.0, 1.0, n).unwrap();
        let bands = FrequencyBands::default();
        for (k, expect) in [(2.0, 0), (8.0, 1), (20.0, 2)] {
            let f = Field::from_fn(g.clone(), |x| 0.3 * (2.0 * PI * k * x[0]).sin()).unwrap();
            let p = line_batch(f.into_values());
            let vals = [
                frmse(&p, &t, bands.low).unwrap(),
                frmse(&p, &t, bands.mid).unwrap(),
                frmse(&p, &t, bands.high).unwrap(),
            ];
            for (i, v) in vals.iter().enumerate() {
                assert_eq!(*v > 1e-12, i == expect, "k={k}: {vals:?}");
            }
        }
    }

    #[test]
    fn quarter_bands_partition() {
        let kmax = 45;
        let mut counts = [0; 3];
        for k in 0..=kmax {
            counts[quarter_band(k, kmax)] += 1;
        }
        assert_eq!(counts.iter().sum::<usize>(), kmax + 1);
        assert_eq!(quarter_band(0, kmax), 0);
        assert_eq!(quarter_band(kmax, kmax), 2);
    }

    #[test]
    fn report_round_trip_and_table() {
        let mut r = MetricReport::new();
        r.push("RMSE", 0.1);
        r.push("nRMSE", 1.0 / 3.0);
        r.set_meta("averaging", FORWARD_AVERAGING);
        let back = MetricReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let table = r.to_table();
        assert!(table.contains("nRMSE  3.3333333333333331e-1"));
        let parsed: f64 = table.lines().nth(1).unwrap().split_whitespace().last().unwrap().parse().unwrap();
        assert_eq!(parsed, 1.0 / 3.0);
    }

    proptest! {
        #[test]
        fn nrmse_is_scale_invariant(
            vals in proptest::collection::vec(-3.0f64..3.0, 32),
            noise in proptest::collection::vec(-0.5f64..0.5, 32),
            s in prop_oneof![Just(2.0), Just(0.5), Just(-4.0), Just(0.25)],
        ) {
            prop_assume!(vals[..16].iter().any(|v| v.abs() > 1e-3));
            prop_assume!(vals[16..].iter().any(|v| v.abs() > 1e-3));
            let t = Batch::new(2, 1, vec![16], 1, vals.clone()).unwrap();
            let p = Batch::new(2, 1, vec![16], 1, vals.iter().zip(&noise).map(|(a, b)| a + b).collect()).unwrap();
            let a = nrmse(&p, &t).unwrap();
            let b = nrmse(&p.map(|v| v * s), &t.map(|v| v * s)).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn rmse_is_symmetric(
            a in proptest::collection::vec(-3.0f64..3.0, 16),
            b in proptest::collection::vec(-3.0f64..3.0, 16),
        ) {
            let (a, b) = (line_batch(a), line_batch(b));
            prop_assert_eq!(rmse(&a, &b).unwrap(), rmse(&b, &a).unwrap());
        }
    }
}
