//! Direct nested-loop metric formulas with an O(N^2) DFT.

use std::f64::consts::PI;

/// Signed frequency of index `j` on `n` points, Nyquist positive.
fn freq(j: usize, n: usize) -> f64 {
    if j <= n / 2 {
        j as f64
    } else {
        j as f64 - n as f64
    }
}

/// `(re, im, |k|)` of every coefficient of a 1D or 2D real array.
pub fn dft(values: &[f64], shape: &[usize]) -> Vec<(f64, f64, f64)> {
    let (nx, ny) = match shape {
        [n] => (*n, 1),
        [a, b] => (*a, *b),
        _ => panic!("1D or 2D only"),
    };
    let mut out = Vec::with_capacity(nx * ny);
    for kx in 0..nx {
        for ky in 0..ny {
            let (mut re, mut im) = (0.0, 0.0);
            for x in 0..nx {
                for y in 0..ny {
                    let ang = -2.0 * PI * ((kx * x) as f64 / nx as f64 + (ky * y) as f64 / ny as f64);
                    let v = values[x * ny + y];
                    re += v * ang.cos();
                    im += v * ang.sin();
                }
            }
            let kmag = if ny == 1 {
                freq(kx, nx).abs()
            } else {
                (freq(kx, nx).powi(2) + freq(ky, ny).powi(2)).sqrt()
            };
            out.push((re, im, kmag));
        }
    }
    out
}

pub fn rmse(p: &[f64], t: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..p.len() {
        s += (p[i] - t[i]) * (p[i] - t[i]);
    }
    (s / p.len() as f64).sqrt()
}

pub fn nrmse(p: &[f64], t: &[f64]) -> f64 {
    let (mut e, mut n) = (0.0, 0.0);
    for i in 0..p.len() {
        e += (p[i] - t[i]) * (p[i] - t[i]);
        n += t[i] * t[i];
    }
    (e / n).sqrt()
}

pub fn max_abs(p: &[f64], t: &[f64]) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..p.len() {
        m = m.max((p[i] - t[i]).abs());
    }
    m
}

pub fn crmse(p: &[f64], t: &[f64]) -> f64 {
    let (mut a, mut b) = (0.0, 0.0);
    for i in 0..p.len() {
        a += p[i];
        b += t[i];
    }
    (a - b).abs() / p.len() as f64
}

pub fn brmse(p: &[f64], t: &[f64], shape: &[usize]) -> f64 {
    let (mut s, mut c) = (0.0, 0usize);
    match shape {
        [n] => {
            for i in [0, n - 1] {
                s += (p[i] - t[i]).powi(2);
                c += 1;
            }
        }
        [nx, ny] => {
            for x in 0..*nx {
                for y in 0..*ny {
                    if x == 0 || y == 0 || x == nx - 1 || y == ny - 1 {
                        s += (p[x * ny + y] - t[x * ny + y]).powi(2);
                        c += 1;
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    (s / c as f64).sqrt()
}

/// Band fRMSE with `kmax = None` meaning "up to Nyquist" for the denominator
/// and every shell from `kmin` up for the sum.
pub fn frmse(p: &[f64], t: &[f64], shape: &[usize], kmin: usize, kmax: Option<usize>) -> f64 {
    let err: Vec<f64> = p.iter().zip(t).map(|(a, b)| a - b).collect();
    let n = err.len() as f64;
    let nyq = shape.iter().min().unwrap() / 2;
    let hi = kmax.unwrap_or(usize::MAX);
    let mut power = 0.0;
    for (re, im, k) in dft(&err, shape) {
        let shell = k.round() as usize;
        if shell >= kmin && shell <= hi {
            power += (re * re + im * im) / n;
        }
    }
    let width = match kmax {
        Some(k) => k - kmin + 1,
        None => (nyq + 1).saturating_sub(kmin).max(1),
    };
    power.sqrt() / width as f64
}

pub fn norm_error(p: &[f64], t: &[f64], q: f64) -> f64 {
    let (mut e, mut n) = (0.0, 0.0);
    for i in 0..p.len() {
        e += (p[i] - t[i]).abs().powf(q);
        n += t[i].abs().powf(q);
    }
    (e / n).powf(1.0 / q)
}

/// `(fMSE, [fMSE band], [fL2 band], [fL3 band])` with quarter bands.
pub fn inverse_spectral(p: &[f64], t: &[f64], shape: &[usize]) -> (f64, [f64; 3], [f64; 3], [f64; 3]) {
    let err: Vec<f64> = p.iter().zip(t).map(|(a, b)| a - b).collect();
    let n = err.len() as f64;
    let fe = dft(&err, shape);
    let ft = dft(t, shape);
    let kmax = fe.iter().map(|c| c.2.round() as usize).max().unwrap() as f64;
    let mut sq = [0.0; 3];
    let mut cu = [0.0; 3];
    let (mut t2, mut t3) = (0.0, 0.0);
    for (e, tt) in fe.iter().zip(&ft) {
        let k = e.2.round();
        let band = if k < kmax / 4.0 {
            0
        } else if k < 3.0 * kmax / 4.0 {
            1
        } else {
            2
        };
        let a = (e.0 * e.0 + e.1 * e.1).sqrt();
        sq[band] += a * a;
        cu[band] += a * a * a;
        let b = (tt.0 * tt.0 + tt.1 * tt.1).sqrt();
        t2 += b * b;
        t3 += b * b * b;
    }
    let total = sq.iter().sum::<f64>() / (n * n);
    let fmse = [sq[0] / (n * n), sq[1] / (n * n), sq[2] / (n * n)];
    let fl2 = [sq[0].sqrt() / t2.sqrt(), sq[1].sqrt() / t2.sqrt(), sq[2].sqrt() / t2.sqrt()];
    let fl3 = [cu[0].cbrt() / t3.cbrt(), cu[1].cbrt() / t3.cbrt(), cu[2].cbrt() / t3.cbrt()];
    (total, fmse, fl2, fl3)
}
