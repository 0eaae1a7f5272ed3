//! One-dimensional solvers: advection against its exact shift, Burgers
//! shock formation, diffusion-reaction and diffusion-sorption.
//!
//! cargo run --release --example scalar_solvers

use std::f64::consts::PI;

use pdegen::solvers::advection::{advect_exact, solve_advection, AdvectionParams};
use pdegen::solvers::burgers::{solve_burgers, BurgersParams};
use pdegen::solvers::diffreact::{solve_diffreact1d, ReactDiffParams};
use pdegen::solvers::diffsorp::{solve_diffsorp, SorptionParams};
use pdegen::{Field, Grid, TimeAxis};

fn total_variation(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

fn main() -> pdegen::Result<()> {
    println!("advection, beta = 1, t = 1");
    for n in [128, 256, 512, 1024] {
        let g = Grid::line(0.0, 1.0, n)?;
        let u0 = Field::from_fn(g, |x| (2.0 * PI * x[0]).sin())?;
        let traj = solve_advection(&u0, &AdvectionParams::new(1.0), &TimeAxis::new(0.0, 1.0, 2)?)?;
        let exact = advect_exact(&u0, 1.0, 1.0)?;
        let err = traj
            .last()
            .values()
            .iter()
            .zip(exact.values())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / n as f64;
        println!("  Ns {n:>5}  L2 error {:.3e}", err.sqrt());
    }

    println!("Burgers, nu = 0.001: steepening into a shock");
    let g = Grid::line(0.0, 1.0, 1024)?;
    let u0 = Field::from_fn(g, |x| (2.0 * PI * x[0]).sin())?;
    let time = TimeAxis::new(0.0, 1.0, 6)?;
    let traj = solve_burgers(&u0, &BurgersParams::new(0.001), &time)?;
    for (k, f) in traj.frames().iter().enumerate() {
        let v = f.values();
        let slope = v.windows(2).map(|w| (w[1] - w[0]).abs() * 1024.0).fold(0.0, f64::max);
        println!(
            "  t {:.1}  max|u_x| {slope:>8.2}  TV {:.6}  sum {:+.3e}",
            time.snapshot(k),
            total_variation(v),
            v.iter().sum::<f64>()
        );
    }

    println!("diffusion-reaction, nu = 0.5, rho = 1 from a bump");
    let g = Grid::line(0.0, 1.0, 256)?;
    let u0 = Field::from_fn(g, |x| 0.2 * (-100.0 * (x[0] - 0.5).powi(2)).exp())?;
    let traj = solve_diffreact1d(&u0, &ReactDiffParams::new(0.5, 1.0), &TimeAxis::new(0.0, 1.0, 5)?)?;
    for f in traj.frames() {
        println!("  mean {:.4}  range [{:.4}, {:.4}]", f.mean(), f.min(), f.max());
    }

    println!("diffusion-sorption front entering from the inlet");
    let g = Grid::line(0.0, 1.0, 128)?;
    let u0 = Field::new(g, 1, vec![0.0; 128])?;
    let traj = solve_diffsorp(&u0, &SorptionParams::default(), &TimeAxis::new(0.0, 500.0, 6)?)?;
    for (k, f) in traj.frames().iter().enumerate() {
        let front = f.values().iter().position(|v| *v < 0.5).unwrap_or(128);
        println!("  t {:>5.0}  u = 0.5 at x ~ {:.3}", 100.0 * k as f64, front as f64 / 128.0);
    }
    Ok(())
}
