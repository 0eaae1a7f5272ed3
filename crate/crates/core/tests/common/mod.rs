//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

pub mod naive;
pub mod riemann;

use std::io::Write;

/// Prints one result line past the test harness capture.
pub fn report_line(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

/// Cell-centered 5-point Poisson solve of `-lap u = f` on the unit square
/// with `u = 0` on the boundary faces, by conjugate gradients.
pub fn poisson_cg(n: usize, f: f64, tol: f64) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize| i * n + j;
    // A u with the ghost value -u mirrored across the wall faces
    let apply = |u: &[f64], out: &mut [f64]| {
        for i in 0..n {
            for j in 0..n {
                let c = u[idx(i, j)];
                let nb = |ii: isize, jj: isize| {
                    if ii < 0 || jj < 0 || ii >= n as isize || jj >= n as isize {
                        -c
                    } else {
                        u[idx(ii as usize, jj as usize)]
                    }
                };
                let (i, j) = (i as isize, j as isize);
                let lap = nb(i - 1, j) + nb(i + 1, j) + nb(i, j - 1) + nb(i, j + 1) - 4.0 * c;
                out[idx(i as usize, j as usize)] = -lap / (h * h);
            }
        }
    };
    let m = n * n;
    let mut u = vec![0.0; m];
    let mut r = vec![f; m];
    let mut p = r.clone();
    let mut ap = vec![0.0; m];
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let r0 = rr.sqrt();
    for _ in 0..20 * n {
        apply(&p, &mut ap);
        let alpha = rr / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for k in 0..m {
            u[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        if rr_new.sqrt() < tol * r0 {
            break;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..m {
            p[k] = r[k] + beta * p[k];
        }
    }
    u
}

/// Mean of the four cells around the center of an even `n x n` grid.
pub fn center_value(u: &[f64], n: usize) -> f64 {
    let a = n / 2 - 1;
    let b = n / 2;
    (u[a * n + a] + u[a * n + b] + u[b * n + a] + u[b * n + b]) / 4.0
}

/// Center value of `-lap u = 1` on the unit square, `u = 0` on the boundary,
/// from the double sine series.
pub fn poisson_center_series() -> f64 {
    let pi = std::f64::consts::PI;
    let mut s = 0.0;
    for m in (1..400).step_by(2) {
        for n in (1..400).step_by(2) {
            let (mf, nf) = (m as f64, n as f64);
            let sign = if ((m + n) / 2 - 1) % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * 16.0 / (pi.powi(4) * mf * nf * (mf * mf + nf * nf));
        }
    }
    s
}
