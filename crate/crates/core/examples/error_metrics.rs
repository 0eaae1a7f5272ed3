//! Scores a deliberately degraded advection run against the reference
//! with every forward metric, then shows the band-resolved picture.
//!
//! cargo run --release --example error_metrics

use std::f64::consts::PI;

use pdegen::metrics::{forward_report, radial_spectrum, Batch, FrequencyBands};
use pdegen::solvers::advection::{solve_advection, AdvectionParams};
use pdegen::{Field, Grid, TimeAxis};

fn main() -> pdegen::Result<()> {
    let time = TimeAxis::new(0.0, 1.0, 11)?;
    let p = AdvectionParams::new(1.0);
    let ic = |x: [f64; 3]| (2.0 * PI * x[0]).sin() + 0.3 * (2.0 * PI * 9.0 * x[0]).sin() + 0.1 * (2.0 * PI * 40.0 * x[0]).cos();

    // reference on 1024 cells; the "model" runs on 128 and is upsampled
    let fine = Grid::line(0.0, 1.0, 1024)?;
    let coarse = Grid::line(0.0, 1.0, 128)?;
    let truth = solve_advection(&Field::from_fn(fine.clone(), ic)?, &p, &time)?;
    let rough = solve_advection(&Field::from_fn(coarse, |x| ic(x))?, &p, &time)?;
    let upsampled: Vec<Field> = rough
        .frames()
        .iter()
        .map(|f| Field::new(fine.clone(), 1, f.values().iter().flat_map(|v| [*v; 8]).collect()))
        .collect::<pdegen::Result<_>>()?;

    let tb = Batch::from_trajectories(&[truth.clone()])?;
    let pb = Batch::from_fields(&upsampled)?;
    let pb = Batch::new(1, pb.samples(), vec![1024], 1, pb.data().to_vec())?;
    let report = forward_report(&pb, &tb, &FrequencyBands::default())?;
    print!("{}", report.to_table());
    for (k, v) in report.metadata() {
        println!("# {k}: {v}");
    }

    let err: Vec<f64> = upsampled[10].values().iter().zip(truth.last().values()).map(|(a, b)| a - b).collect();
    let spec = radial_spectrum(&err, &[1024]);
    println!("error power at t = 1 by shell (nonzero, first 50):");
    for (k, pw) in spec.iter().enumerate().take(50).filter(|(_, pw)| **pw > 1e-6) {
        println!("  k {k:>3}  {pw:.3e}");
    }
    Ok(())
}
