//! Recovers an advection initial condition from its snapshot at the
//! horizon by descent on the 64 lattice controls.
//!
//! cargo run --release --example inverse_estimation -- [adam|sgd]

use std::f64::consts::PI;

use pdegen::inverse::{estimate_ic, inverse_report, reconstruct_ic, IcParameterization, InverseConfig, Optimizer};
use pdegen::solvers::advection::{solve_advection, AdvectionParams};
use pdegen::{Field, Grid, TimeAxis};

fn main() -> pdegen::Result<()> {
    let optimizer = match std::env::args().nth(1).as_deref() {
        Some("sgd") => Optimizer::Sgd,
        _ => Optimizer::Adam,
    };
    let g = Grid::line(0.0, 1.0, 256)?;
    let mut truth = IcParameterization::zeros(&g, 1)?;
    truth.sample_at_lattice(|x, _| (2.0 * PI * x[0]).sin() + 0.4 * (6.0 * PI * x[0] + 0.5).cos());
    let u0 = reconstruct_ic(&truth);

    let params = AdvectionParams::new(0.4);
    let time = TimeAxis::new(0.0, 0.15, 16)?;
    let forward = |ic: &Field| solve_advection(ic, &params, &time);
    let observed = forward(&u0)?.frame(15).clone();

    let cfg = InverseConfig {
        optimizer,
        ..InverseConfig::default()
    };
    let est = estimate_ic(&observed, &forward, &cfg)?;
    println!("{optimizer:?}: {} iterations, {} rejected steps", est.iterations, est.rejected_steps);
    for (i, loss) in est.best_trace().iter().enumerate().step_by(20) {
        println!("  iteration {i:>3}  best loss {loss:.3e}");
    }
    let pred_t = forward(&est.initial_condition())?.frame(15).clone();
    let report = inverse_report(&est.initial_condition(), &u0, &pred_t, &observed)?;
    print!("{}", report.to_table());
    Ok(())
}
