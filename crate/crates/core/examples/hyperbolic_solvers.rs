//! Compressible Euler (Sod tube and a 2D periodic flow) and the radial
//! shallow-water dam break.
//!
//! cargo run --release --example hyperbolic_solvers

use pdegen::initcond::{dam_break_height, random_field_cns_ic, riemann_state, CnsRandomSpec, RiemannStates};
use pdegen::solvers::cns::{solve_cns, Boundary, CnsParams, CnsSolver};
use pdegen::solvers::swe::{solve_swe, SweParams, SweState};
use pdegen::{Grid, SeededRng, TimeAxis};

fn main() -> pdegen::Result<()> {
    let n = 400;
    let g = Grid::line(0.0, 1.0, n)?;
    let sod = RiemannStates {
        left: [1.0, 0.0, 1.0],
        right: [0.125, 0.0, 0.1],
        face: n / 2,
    };
    let traj = solve_cns(&riemann_state(&g, &sod)?, &CnsParams::inviscid(Boundary::Outgoing), &TimeAxis::new(0.0, 0.2, 2)?)?;
    let last = traj.last();
    println!("Sod tube at t = 0.2 (every 25th cell): x rho v p");
    for i in (0..n).step_by(25) {
        println!("  {:.3} {:.4} {:+.4} {:.4}", g.center(0, i), last.get(i, 0), last.get(i, 1), last.get(i, 2));
    }

    let g2 = Grid::cube(2, 0.0, 1.0, 64)?;
    let s0 = random_field_cns_ic(&mut SeededRng::new(2, 0), &g2, &CnsRandomSpec::default())?;
    let mut solver = CnsSolver::new(&s0, &CnsParams::new(1e-8, 1e-8, Boundary::Periodic))?;
    let before = s0.totals();
    for _ in 0..200 {
        let dt = solver.stable_dt();
        solver.step(dt)?;
    }
    let after = solver.state().totals();
    println!("2D periodic flow, 200 steps to t = {:.4}", solver.time());
    for (name, (a, b)) in ["mass", "x-momentum", "y-momentum", "energy"].iter().zip(before.iter().zip(&after)) {
        println!("  {name:<11} {a:+.12e} -> {b:+.12e}");
    }

    let g = Grid::cube(2, -2.5, 2.5, 128)?;
    let state = SweState::at_rest(&dam_break_height(&g, 0.5)?, 1.0)?;
    let time = TimeAxis::new(0.0, 1.0, 5)?;
    let traj = solve_swe(&state, &SweParams::default(), &time)?;
    println!("radial dam break on 128^2");
    for (k, f) in traj.frames().iter().enumerate() {
        let vol: f64 = f.values().iter().sum::<f64>() * g.dx(0) * g.dx(1);
        println!("  t {:.2}  h in [{:.4}, {:.4}]  volume {vol:.12}", time.snapshot(k), f.min(), f.max());
    }
    Ok(())
}
