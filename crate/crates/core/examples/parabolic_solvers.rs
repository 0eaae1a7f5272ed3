//! Two-dimensional FitzHugh-Nagumo pattern formation and steady Darcy flow.
//!
//! cargo run --release --example parabolic_solvers

use pdegen::initcond::{darcy_coefficient, normal_noise_ic, DarcyCoefficientSpec};
use pdegen::solvers::darcy::{darcy_pseudo_time, darcy_residual, DarcyParams};
use pdegen::solvers::fhn::{solve_diffreact2d, FhnParams};
use pdegen::{Field, Grid, SeededRng, TimeAxis};

fn variance(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
}

fn main() -> pdegen::Result<()> {
    let g = Grid::cube(2, -1.0, 1.0, 128)?;
    let noise = normal_noise_ic(&mut SeededRng::new(1, 0), &g, 2)?;
    let u0 = Field::new(g.clone(), 1, noise.channel(0))?;
    let v0 = Field::new(g.clone(), 1, noise.channel(1))?;
    let time = TimeAxis::new(0.0, 5.0, 11)?;
    let traj = solve_diffreact2d(&u0, &v0, &FhnParams::default(), &time)?;
    println!("FitzHugh-Nagumo on 128^2");
    for (k, f) in traj.frames().iter().enumerate() {
        println!("  t {:.1}  var(u) {:.4}  var(v) {:.4}", time.snapshot(k), variance(&f.channel(0)), variance(&f.channel(1)));
    }

    println!("Darcy flow on 64^2, two-level coefficient");
    let g = Grid::cube(2, 0.0, 1.0, 64)?;
    let a = darcy_coefficient(&mut SeededRng::new(1, 0), &g, &DarcyCoefficientSpec::default())?;
    for beta in [0.01, 0.1, 1.0, 10.0] {
        let run = darcy_pseudo_time(&a, &DarcyParams::with_beta(beta))?;
        let u = run.field.channel(1);
        let resid = darcy_residual(&a, &u, beta)?.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        println!(
            "  beta {beta:>5}  max u {:.5e}  iterations {:>6}  residual {resid:.2e}",
            u.iter().cloned().fold(0.0, f64::max),
            run.iterations
        );
    }
    Ok(())
}
