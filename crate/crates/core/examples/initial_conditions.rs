//! Draws one realization of every initial-condition family and prints
//! summary statistics.
//!
//! cargo run --release --example initial_conditions -- [seed]

use pdegen::initcond::{
    darcy_coefficient, dam_break_height, gaussian_random_field, normalized_positive_ic, radial_dam_break_ic,
    random_field_cns_ic, sinusoidal_superposition, shock_tube_ic, turbulence_velocity, CnsRandomSpec,
    DarcyCoefficientSpec, GrfSpec, ShockTubeSpec, SinusoidSpec,
};
use pdegen::{Field, Grid, SeededRng};

fn describe(name: &str, f: &Field) {
    println!(
        "{name:<26} cells {:>6}  channels {}  min {:>9.4}  max {:>9.4}  mean {:>9.4}",
        f.grid().len(),
        f.channels(),
        f.min(),
        f.max(),
        f.mean()
    );
}

fn main() -> pdegen::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let line = Grid::line(0.0, 1.0, 1024)?;
    let square = Grid::cube(2, 0.0, 1.0, 64)?;

    // every family gets its own stream so draws do not shift each other
    let rng = |stream| SeededRng::new(seed, stream);

    describe("sinusoid superposition", &sinusoidal_superposition(&mut rng(0), &line, &SinusoidSpec::default())?);
    describe("normalized positive", &normalized_positive_ic(&mut rng(1), &line, &SinusoidSpec::default())?);
    describe(
        "random field |k|^-3",
        &gaussian_random_field(&mut rng(2), &square, &GrfSpec { exponent: -3.0, sigma: 1.0 })?,
    );
    describe("Darcy coefficient", &darcy_coefficient(&mut rng(3), &square, &DarcyCoefficientSpec::default())?);

    let v = turbulence_velocity(&mut rng(4), &square, 0.5, 1.0)?;
    describe("turbulent velocity M=0.5", &v);

    let tube = shock_tube_ic(&mut rng(5), &line, &ShockTubeSpec::default())?;
    describe("shock tube (rho, v, p)", &tube.to_primitive_field()?);

    let cns = random_field_cns_ic(&mut rng(6), &square, &CnsRandomSpec::default())?;
    describe("random CNS (rho, v, p)", &cns.to_primitive_field()?);

    let swe_grid = Grid::cube(2, -2.5, 2.5, 64)?;
    describe("radial dam break", &radial_dam_break_ic(&mut rng(7), &swe_grid)?);
    let fixed = dam_break_height(&swe_grid, 0.5)?;
    let wet = fixed.values().iter().filter(|h| **h > 1.0).count();
    println!("dam radius 0.5 covers {wet} of {} cells", fixed.values().len());
    Ok(())
}
