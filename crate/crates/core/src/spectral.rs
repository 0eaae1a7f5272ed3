//! Multi-dimensional discrete Fourier transforms on row-major arrays.
//!
//! Forward transforms are unnormalized; [`inverse`] divides by the total
//! number of cells once, so `inverse(forward(x)) == x` up to round-off.

use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

/// Signed integer wavenumber of DFT index `j` on `n` points; the Nyquist
/// index of an even `n` maps to `+n/2`.
pub fn signed_wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

fn transform(data: &mut [Complex64], shape: &[usize], direction: FftDirection) {
    let total: usize = shape.iter().product();
    assert_eq!(data.len(), total, "buffer does not match shape");
    let mut planner = FftPlanner::<f64>::new();
    let mut stride = total;
    let mut line = Vec::new();
    for &n in shape {
        stride /= n;
        let fft = planner.plan_fft(n, direction);
        line.resize(n, Complex64::new(0.0, 0.0));
        let block = n * stride;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
    }
}

pub fn forward(data: &mut [Complex64], shape: &[usize]) {
    transform(data, shape, FftDirection::Forward);
}

pub fn inverse(data: &mut [Complex64], shape: &[usize]) {
    transform(data, shape, FftDirection::Inverse);
    let scale = 1.0 / data.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Unnormalized forward transform of real data.
pub fn forward_real(values: &[f64], shape: &[usize]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward(&mut buf, shape);
    buf
}

/// Inverse transform keeping the real part.
pub fn inverse_real(mut spectrum: Vec<Complex64>, shape: &[usize]) -> Vec<f64> {
    inverse(&mut spectrum, shape);
    spectrum.into_iter().map(|c| c.re).collect()
}

/// Signed wave vector of every flat DFT index.
pub fn wave_vectors(shape: &[usize]) -> Vec<[i64; 3]> {
    let total: usize = shape.iter().product();
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut k = [0i64; 3];
        for a in (0..shape.len()).rev() {
            k[a] = signed_wavenumber(rem % shape[a], shape[a]);
            rem /= shape[a];
        }
        out.push(k);
    }
    out
}
